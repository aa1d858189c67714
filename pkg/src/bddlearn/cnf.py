"""CNF/WCNF formulas, cardinality constraints, and DIMACS I/O.

Literals are signed DIMACS-style integers throughout the package: ``+v``
is the Boolean variable ``v`` and ``-v`` its negation, with ``v >= 1``.
A clause is a list of such literals.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, Mapping, TextIO


class FormulaError(ValueError):
    """Malformed clause or weight."""


class ModelParseError(ValueError):
    """Solver output that cannot be turned into an assignment."""


class UnsatStatusError(ModelParseError):
    """Solver output reports unsatisfiability instead of a model."""


class Formula:
    """A CNF formula split into hard clauses and weighted soft clauses.

    Construction is single-writer: build the formula, then treat it as
    immutable (``copy`` before mutating a shared instance).
    """

    __slots__ = ("var_count", "hard", "soft")

    def __init__(self, var_count: int = 0):
        if var_count < 0:
            raise FormulaError("var_count must be >= 0")
        self.var_count = var_count
        self.hard: list[list[int]] = []
        self.soft: list[tuple[list[int], int]] = []

    def fresh_var(self) -> int:
        self.var_count += 1
        return self.var_count

    def _checked(self, clause: Iterable[int]) -> list[int]:
        lits = list(clause)
        if not lits:
            raise FormulaError("empty clause")
        for lit in lits:
            if lit == 0 or abs(lit) > self.var_count:
                raise FormulaError(
                    f"literal {lit} outside variable range 1..{self.var_count}"
                )
        return lits

    def add_hard(self, clause: Iterable[int]) -> None:
        self.hard.append(self._checked(clause))

    def add_soft(self, clause: Iterable[int], weight: int = 1) -> None:
        if weight < 1:
            raise FormulaError("soft weights must be >= 1")
        self.soft.append((self._checked(clause), weight))

    def copy(self) -> "Formula":
        dup = Formula(self.var_count)
        dup.hard = [list(c) for c in self.hard]
        dup.soft = [(list(c), w) for c, w in self.soft]
        return dup

    def __repr__(self) -> str:
        return (
            f"Formula(vars={self.var_count}, hard={len(self.hard)},"
            f" soft={len(self.soft)})"
        )


def at_most_k(formula: Formula, lits: Iterable[int], k: int) -> None:
    """Append sequential-counter clauses enforcing at most ``k`` true literals.

    Introduces ``len(lits) * k`` auxiliary register variables.  Every total
    assignment satisfying the added clauses has at most ``k`` true literals
    among ``lits``, and every assignment of ``lits`` with at most ``k`` true
    literals extends to the registers.  ``k >= len(lits)`` appends nothing.
    """
    lits = list(lits)
    if not lits:
        raise FormulaError("at_most_k needs at least one literal")
    if k < 0:
        raise FormulaError("k must be >= 0")
    n = len(lits)
    if k >= n:
        return
    if k == 0:
        for x in lits:
            formula.add_hard([-x])
        return
    # reg[i][j] reads "at least j+1 of the first i+1 literals are true"
    reg = [[formula.fresh_var() for _ in range(k)] for _ in range(n)]
    add = formula.add_hard
    add([-lits[0], reg[0][0]])
    for j in range(1, k):
        add([-reg[0][j]])
    for i in range(1, n):
        add([-lits[i], reg[i][0]])
        add([-reg[i - 1][0], reg[i][0]])
        for j in range(1, k):
            add([-lits[i], -reg[i - 1][j - 1], reg[i][j]])
            add([-reg[i - 1][j], reg[i][j]])
        add([-lits[i], -reg[i - 1][k - 1]])


def exactly_one(formula: Formula, lits: Iterable[int]) -> None:
    """Exactly one of ``lits``: a covering clause plus ``at_most_k(lits, 1)``."""
    lits = list(lits)
    if not lits:
        raise FormulaError("exactly_one needs at least one literal")
    formula.add_hard(lits)
    at_most_k(formula, lits, 1)


def literal_count(formula: Formula) -> int:
    """Total number of literals over all hard and soft clauses."""
    total = sum(len(c) for c in formula.hard)
    total += sum(len(c) for c, _ in formula.soft)
    return total


def lit_true(lit: int, assignment: Mapping[int, int]) -> bool:
    value = assignment.get(abs(lit), 0)
    return bool(value) if lit > 0 else not value


def clause_satisfied(clause: Iterable[int], assignment: Mapping[int, int]) -> bool:
    return any(lit_true(lit, assignment) for lit in clause)


def verify_model(formula: Formula, assignment: Mapping[int, int]) -> bool:
    """Check every hard clause against ``assignment`` (missing vars read 0)."""
    return all(clause_satisfied(c, assignment) for c in formula.hard)


def falsified_soft_weight(formula: Formula, assignment: Mapping[int, int]) -> int:
    return sum(w for c, w in formula.soft if not clause_satisfied(c, assignment))


# ---------------------------------------------------------------------------
# DIMACS


def emit_dimacs_cnf(formula: Formula, out: TextIO) -> None:
    """Write ``formula`` in DIMACS CNF format; rejects soft clauses."""
    if formula.soft:
        raise FormulaError("formula has soft clauses; emit WCNF instead")
    out.write(f"p cnf {formula.var_count} {len(formula.hard)}\n")
    for clause in formula.hard:
        out.write(" ".join(map(str, clause)))
        out.write(" 0\n")


def emit_dimacs_wcnf(formula: Formula, out: TextIO) -> None:
    """Write ``formula`` in classic weighted DIMACS with a top weight.

    The top weight marking hard clauses is ``1 + sum of soft weights``.
    """
    top = 1 + sum(w for _, w in formula.soft)
    n_clauses = len(formula.hard) + len(formula.soft)
    out.write(f"p wcnf {formula.var_count} {n_clauses} {top}\n")
    for clause in formula.hard:
        out.write(f"{top} " + " ".join(map(str, clause)) + " 0\n")
    for clause, weight in formula.soft:
        out.write(f"{weight} " + " ".join(map(str, clause)) + " 0\n")


def dimacs_cnf(formula: Formula) -> str:
    buf = io.StringIO()
    emit_dimacs_cnf(formula, buf)
    return buf.getvalue()


def dimacs_wcnf(formula: Formula) -> str:
    buf = io.StringIO()
    emit_dimacs_wcnf(formula, buf)
    return buf.getvalue()


@dataclass(frozen=True)
class SolverOutput:
    """Status/model/cost triple parsed from a solver log."""

    status: str | None  # "SAT" | "OPTIMUM" | "UNSAT" | "UNKNOWN" | None
    model: dict[int, int] | None
    cost: int | None


_STATUS_MAP = {
    "SATISFIABLE": "SAT",
    "OPTIMUM FOUND": "OPTIMUM",
    "UNSATISFIABLE": "UNSAT",
    "UNKNOWN": "UNKNOWN",
}


def _assignment_from_tokens(tokens: list[str]) -> dict[int, int]:
    # Two v-line dialects: signed integers (0-terminated) and a plain
    # 0/1 bit string giving variables 1..n in order.
    if tokens and all(set(t) <= {"0", "1"} for t in tokens) and any(
        len(t) > 1 for t in tokens
    ):
        bits = "".join(tokens)
        return {i + 1: int(b) for i, b in enumerate(bits)}
    assignment: dict[int, int] = {}
    for tok in tokens:
        try:
            lit = int(tok)
        except ValueError:
            raise ModelParseError(f"unparsable v-line token {tok!r}") from None
        if lit == 0:
            continue
        assignment[abs(lit)] = 1 if lit > 0 else 0
    if not assignment:
        raise ModelParseError("v-line carries no literals")
    return assignment


def parse_solver_output(text: str) -> SolverOutput:
    """Extract status, model, and cost from DIMACS-style solver output."""
    status: str | None = None
    cost: int | None = None
    tokens: list[str] = []
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("s ") or line == "s":
            status = _STATUS_MAP.get(line[2:].strip(), "UNKNOWN")
        elif line.startswith("v "):
            tokens.extend(line[2:].split())
        elif line.startswith("o "):
            parts = line.split()
            try:
                cost = int(parts[-1])
            except (IndexError, ValueError):
                raise ModelParseError(f"unparsable o-line {line!r}") from None
    model = _assignment_from_tokens(tokens) if tokens else None
    return SolverOutput(status=status, model=model, cost=cost)


def parse_model(text: str) -> dict[int, int]:
    """Parse a satisfying assignment out of solver output text.

    Raises :class:`UnsatStatusError` on an UNSATISFIABLE status and
    :class:`ModelParseError` when no usable v-line is present.
    """
    parsed = parse_solver_output(text)
    if parsed.status == "UNSAT":
        raise UnsatStatusError("solver reported UNSATISFIABLE")
    if parsed.status not in ("SAT", "OPTIMUM"):
        raise ModelParseError(f"no satisfiable status line (got {parsed.status})")
    if parsed.model is None:
        raise ModelParseError("status line present but no v-line")
    return parsed.model
