"""SAT and partial MaxSAT encodings of depth-bounded diagram learning.

Two Boolean variable families are shared by all encodings: ``a[r][i]``
places feature ``r`` at position ``i`` of the feature ordering, and
``c[j]`` holds the ``j``-th truth-table cell.  The improved encoding adds
``d[i][q]``, the value of the ``i``-th selected feature on example ``q``,
which shrinks the classification clauses to ``depth + 1`` literals each.

Structure shared by every variant:

* each feature is used at most once and each position picks exactly one
  feature (sequential-counter cardinality clauses);
* the table must be a bead, i.e. some cell pair ``(j, j + 2**(H-1))``
  differs, so the root split is never vacuous (one Tseitin equivalence
  variable per XOR plus a covering clause).

Auxiliary variables always come after the semantic ones, so the context
maps stay contiguous and can be serialized to a JSON sidecar for models
produced by an external solver in a later process.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import cnf
from .bdd import TruthTable
from .data import DataError, Dataset, check_consistency

BDD1 = "bdd1"
BDD2 = "bdd2"
MAXSAT = "maxsat"

_MAX_DEPTH = 16


class DecodeError(ValueError):
    """Model does not describe a well-formed ordering/table pair."""


@dataclass(frozen=True)
class EncodingContext:
    """Variable maps tying solver variables to their roles."""

    variant: str
    depth: int
    n_features: int
    n_examples: int
    a: tuple[tuple[int, ...], ...]  # a[r][i], 0-based
    c: tuple[int, ...]  # c[j], 0-based
    d: tuple[tuple[int, ...], ...] | None  # d[i][q], 0-based
    feature_names: tuple[str, ...] | None = None

    def to_json(self) -> dict:
        doc = {
            "format": "bddlearn-context/1",
            "variant": self.variant,
            "depth": self.depth,
            "n_features": self.n_features,
            "n_examples": self.n_examples,
            "a": [list(row) for row in self.a],
            "c": list(self.c),
            "d": [list(row) for row in self.d] if self.d is not None else None,
        }
        if self.feature_names is not None:
            doc["feature_names"] = list(self.feature_names)
        return doc

    @classmethod
    def from_json(cls, doc: Mapping) -> "EncodingContext":
        names = doc.get("feature_names")
        return cls(
            variant=doc["variant"],
            depth=int(doc["depth"]),
            n_features=int(doc["n_features"]),
            n_examples=int(doc["n_examples"]),
            a=tuple(tuple(int(v) for v in row) for row in doc["a"]),
            c=tuple(int(v) for v in doc["c"]),
            d=tuple(tuple(int(v) for v in row) for row in doc["d"])
            if doc.get("d") is not None
            else None,
            feature_names=tuple(names) if names is not None else None,
        )


def write_context(ctx: EncodingContext, path) -> None:
    with open(path, "w", encoding="utf-8") as out:
        json.dump(ctx.to_json(), out, indent=1)
        out.write("\n")


def read_context(path) -> EncodingContext:
    with open(path, encoding="utf-8") as handle:
        return EncodingContext.from_json(json.load(handle))


def rel(i: int, j: int, depth: int) -> int:
    """Value of the ``i``-th ordering position in the ``j``-th table cell.

    Both arguments are 1-based: ``i`` in ``[1, depth]``, ``j`` in
    ``[1, 2**depth]``.
    """
    if not 1 <= i <= depth:
        raise ValueError(f"position {i} outside 1..{depth}")
    if not 1 <= j <= (1 << depth):
        raise ValueError(f"cell {j} outside 1..{1 << depth}")
    return ((j - 1) >> (depth - i)) & 1


def _check_depth(depth: int) -> None:
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if depth > _MAX_DEPTH:
        raise ValueError(f"depth {depth} exceeds the supported maximum {_MAX_DEPTH}")


def _require_consistent(dataset: Dataset) -> None:
    conflicts = check_consistency(dataset)
    if conflicts:
        raise DataError(
            "dataset is inconsistent (identical feature vectors carry both "
            f"labels) in example groups {conflicts}; perfect classification "
            "is impossible at any depth"
        )


def _new_context(dataset: Dataset, depth: int, variant: str):
    k, m = dataset.k, dataset.m
    formula = cnf.Formula()
    a = tuple(
        tuple(formula.fresh_var() for _ in range(depth)) for _ in range(k)
    )
    c = tuple(formula.fresh_var() for _ in range(1 << depth))
    d = None
    if variant != BDD1:
        d = tuple(tuple(formula.fresh_var() for _ in range(m)) for _ in range(depth))
    ctx = EncodingContext(
        variant=variant,
        depth=depth,
        n_features=k,
        n_examples=m,
        a=a,
        c=c,
        d=d,
        feature_names=dataset.feature_names,
    )
    return formula, ctx


def _structural_constraints(formula: cnf.Formula, ctx: EncodingContext) -> None:
    depth, k = ctx.depth, ctx.n_features
    # each feature selected at most once
    for r in range(k):
        cnf.at_most_k(formula, [ctx.a[r][i] for i in range(depth)], 1)
    # exactly one feature per ordering position
    for i in range(depth):
        cnf.exactly_one(formula, [ctx.a[r][i] for r in range(k)])
    # the table is a bead: some cell differs from its opposite-half twin
    half = 1 << (depth - 1)
    xors = []
    for j in range(half):
        x, y = ctx.c[j], ctx.c[j + half]
        t = formula.fresh_var()
        formula.add_hard([-t, x, y])
        formula.add_hard([-t, -x, -y])
        formula.add_hard([t, -x, y])
        formula.add_hard([t, x, -y])
        xors.append(t)
    formula.add_hard(xors)


def encode_bdd1(dataset: Dataset, depth: int) -> tuple[cnf.Formula, EncodingContext]:
    """Direct encoding: one wide clause per example and table cell.

    The clause for example ``q`` and cell ``j`` keeps ``c[j]`` (positive
    example) or ``-c[j]`` (negative) plus every ``a[r][i]`` whose placement
    would route ``q`` away from cell ``j``; placements that agree with the
    cell are dropped up front.
    """
    _check_depth(depth)
    _require_consistent(dataset)
    formula, ctx = _new_context(dataset, depth, BDD1)
    _structural_constraints(formula, ctx)
    n_cells = 1 << depth
    for q, row in enumerate(dataset.features):
        sign = 1 if dataset.labels[q] == 1 else -1
        for j in range(n_cells):
            clause = [sign * ctx.c[j]]
            for i in range(depth):
                bit = (j >> (depth - 1 - i)) & 1
                for r in range(ctx.n_features):
                    if row[r] != bit:
                        clause.append(ctx.a[r][i])
            formula.add_hard(clause)
    return formula, ctx


def _classification_clauses(ctx: EncodingContext, dataset: Dataset):
    """Clauses of the improved encoding, one per example and cell.

    Cell ``j`` is reached when the selected-feature values spell out the
    binary expansion of ``j``; the clause is that implication's CNF form,
    ``depth + 1`` literals wide.
    """
    depth = ctx.depth
    n_cells = 1 << depth
    assert ctx.d is not None
    for q in range(dataset.m):
        sign = 1 if dataset.labels[q] == 1 else -1
        for j in range(n_cells):
            clause = []
            for i in range(depth):
                bit = (j >> (depth - 1 - i)) & 1
                lit = ctx.d[i][q]
                clause.append(-lit if bit else lit)
            clause.append(sign * ctx.c[j])
            yield clause


def _feature_value_links(formula: cnf.Formula, ctx: EncodingContext, dataset: Dataset):
    # placing feature r at position i fixes d[i][q] to the feature value
    assert ctx.d is not None
    for q, row in enumerate(dataset.features):
        for i in range(ctx.depth):
            d_lit = ctx.d[i][q]
            for r in range(ctx.n_features):
                if row[r]:
                    formula.add_hard([-ctx.a[r][i], d_lit])
                else:
                    formula.add_hard([-ctx.a[r][i], -d_lit])


def encode_bdd2(dataset: Dataset, depth: int) -> tuple[cnf.Formula, EncodingContext]:
    """Improved encoding with per-example selected-feature values."""
    _check_depth(depth)
    _require_consistent(dataset)
    formula, ctx = _new_context(dataset, depth, BDD2)
    _structural_constraints(formula, ctx)
    _feature_value_links(formula, ctx, dataset)
    for clause in _classification_clauses(ctx, dataset):
        formula.add_hard(clause)
    return formula, ctx


def encode_maxsat(
    dataset: Dataset, depth: int, weights: Sequence[int] | None = None
) -> tuple[cnf.Formula, EncodingContext]:
    """Partial MaxSAT lift of the improved encoding.

    Structural clauses and the feature-value links stay hard; every
    classification clause becomes soft.  An example is classified
    correctly iff all ``2**depth`` of its soft clauses hold, and wrongly
    iff exactly one fails, so the optimum cost counts misclassified
    examples (scaled by ``weights`` when given).
    """
    _check_depth(depth)
    if weights is not None:
        if len(weights) != dataset.m:
            raise ValueError("need one weight per example")
        if any(w < 1 for w in weights):
            raise ValueError("weights must be >= 1")
    formula, ctx = _new_context(dataset, depth, MAXSAT)
    _structural_constraints(formula, ctx)
    _feature_value_links(formula, ctx, dataset)
    n_cells = 1 << depth
    for idx, clause in enumerate(_classification_clauses(ctx, dataset)):
        weight = 1 if weights is None else weights[idx // n_cells]
        formula.add_soft(clause, weight)
    return formula, ctx


def decode(
    model: Mapping[int, int], ctx: EncodingContext
) -> tuple[tuple[int, ...], TruthTable]:
    """Read the feature ordering and truth table out of a solver model."""
    positions: list[int] = []
    for i in range(ctx.depth):
        selected = [r for r in range(ctx.n_features) if model.get(ctx.a[r][i])]
        if len(selected) != 1:
            raise DecodeError(
                f"corrupt model: position {i + 1} selects {len(selected)} features"
            )
        positions.append(selected[0])
    if len(set(positions)) != len(positions):
        raise DecodeError("corrupt model: a feature is placed twice")
    try:
        cells = "".join("1" if model[v] else "0" for v in ctx.c)
    except KeyError as exc:
        raise DecodeError(f"model is missing table variable {exc}") from None
    return tuple(positions), TruthTable(cells)
