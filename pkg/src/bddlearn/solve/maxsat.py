"""Complete linear-search MaxSAT on top of the embedded CDCL solver.

Each soft clause gets a fresh relaxation variable; a first SAT call gives
an upper bound on the number of falsified soft clauses, and the search
then tightens a cardinality bound over the relaxation variables until an
UNSAT answer proves optimality.  The bound after every model is the
recomputed count of soft clauses the model actually falsifies, which is
tighter than the sum of relaxation variables whenever the solver set some
of them gratuitously.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .. import cnf
from .cdcl import SAT, TIMEOUT, UNSAT, CdclSolver, SatStats

OPTIMUM = "OPTIMUM"
FEASIBLE = "FEASIBLE"
TIMEOUT_NO_SOLUTION = "TIMEOUT-NO-SOLUTION"


class SolverError(RuntimeError):
    """Solver-level failure: unsatisfiable hard clauses, bad integration."""


@dataclass
class MaxSatResult:
    status: str  # OPTIMUM | FEASIBLE | TIMEOUT-NO-SOLUTION
    model: dict[int, int] | None
    cost: int | None
    optimal: bool
    stats: SatStats = field(default_factory=SatStats)
    iterations: int = 0


def _merge_stats(total: SatStats, part: SatStats) -> None:
    total.decisions += part.decisions
    total.conflicts += part.conflicts
    total.propagations += part.propagations
    total.restarts += part.restarts
    total.learned_deleted += part.learned_deleted




def maxsat_solve(
    formula: cnf.Formula, budget: float | None = 900.0, seed: int = 0
) -> MaxSatResult:
    """Minimize the falsified soft-clause weight of ``formula``.

    Only unit soft weights are supported.  Raises :class:`SolverError`
    when the hard clauses alone are unsatisfiable.
    """
    if any(w != 1 for _, w in formula.soft):
        raise ValueError("maxsat_solve supports unit soft weights only")
    start = time.monotonic()
    deadline = start + budget if budget is not None else None
    stats = SatStats()

    def remaining() -> float | None:
        if deadline is None:
            return None
        return deadline - time.monotonic()

    def result(status: str, model, cost, optimal, iterations) -> MaxSatResult:
        stats.elapsed = time.monotonic() - start
        return MaxSatResult(status, model, cost, optimal, stats, iterations)

    def run_sat(work: cnf.Formula) -> "object":
        solver = CdclSolver(work.hard, work.var_count, seed=seed)
        res = solver.solve(remaining())
        _merge_stats(stats, res.stats)
        if res.status == SAT:
            assert res.model is not None
            if not cnf.verify_model(work, res.model):
                raise RuntimeError("internal error: model fails hard-clause check")
        return res

    orig_vars = formula.var_count
    relaxed = formula.copy()
    relax: list[int] = []
    for clause, _weight in relaxed.soft:
        b = relaxed.fresh_var()
        relaxed.add_hard(clause + [b])
        relax.append(b)
    relaxed.soft = []

    res = run_sat(relaxed)
    if res.status == TIMEOUT:
        return result(TIMEOUT_NO_SOLUTION, None, None, False, 1)
    if res.status == UNSAT:
        raise SolverError("hard clauses are unsatisfiable")

    def restrict(model: dict[int, int]) -> dict[int, int]:
        return {v: model[v] for v in range(1, orig_vars + 1)}

    best_model = restrict(res.model)
    best_cost = cnf.falsified_soft_weight(formula, best_model)
    iterations = 1
    while best_cost > 0:
        if deadline is not None and time.monotonic() > deadline:
            return result(FEASIBLE, best_model, best_cost, False, iterations)
        # the relaxed base plus the current bound; stale looser bounds are
        # dropped, so iterations shrink as the bound tightens
        working = relaxed.copy()
        cnf.at_most_k(working, relax, best_cost - 1)
        res = run_sat(working)
        iterations += 1
        if res.status == TIMEOUT:
            return result(FEASIBLE, best_model, best_cost, False, iterations)
        if res.status == UNSAT:
            return result(OPTIMUM, best_model, best_cost, True, iterations)
        model = restrict(res.model)
        cost = cnf.falsified_soft_weight(formula, model)
        if cost >= best_cost:
            raise RuntimeError("internal error: descent failed to lower the cost")
        best_model, best_cost = model, cost
    return result(OPTIMUM, best_model, best_cost, True, iterations)
