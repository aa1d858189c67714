"""Learning pipelines: depth search, feature preselection, train/evaluate.

``learn`` wires the full path together: optional greedy feature
preselection, encoding, solving (embedded or external), model decoding,
unknown-cell marking, and the configured generalization bias.
``min_depth`` finds the smallest depth admitting a perfect classifier by
linear search, and ``cross_validate`` runs the k-fold protocol.
"""

from __future__ import annotations

import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

from . import cnf, encode, postprocess, solve
from .bdd import Bdd, TruthTable, classify, classify_table, gen_bdd, node_count
from .data import DataError, Dataset, check_consistency, kfold

MODE_SAT = "sat"
MODE_MAXSAT = "maxsat"
BIASES = ("P", "C", "S")


class LearnError(RuntimeError):
    """Learning failed: no model could be produced."""


class DepthInsufficientError(LearnError):
    """No perfect classifier exists at the requested depth."""


class SolverTimeoutError(LearnError):
    """The solver budget ran out before any model was found."""


@dataclass(frozen=True)
class PreselectConfig:
    max_depth: int
    min_leaf: int = 1


@dataclass(frozen=True)
class LearnConfig:
    depth: int
    mode: str = MODE_MAXSAT
    bias: str = "S"
    preselect: PreselectConfig | None = None
    solver_cmd: str | None = None  # None = embedded solver
    budget: float = 900.0
    seed: int = 0

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.budget <= 0:
            raise ValueError("budget must be > 0")
        if self.mode not in (MODE_SAT, MODE_MAXSAT):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.bias not in BIASES:
            raise ValueError(f"unknown bias {self.bias!r}")


@dataclass
class LearnedModel:
    depth: int
    mode: str
    bias: str
    ordering: tuple[int, ...]  # indices into the full feature list
    feature_names: tuple[str, ...]  # full feature list of the training data
    table: TruthTable
    bdd: Bdd
    train_accuracy: float
    optimal: bool
    literal_count: int
    solver_stats: dict = field(default_factory=dict)

    @property
    def ordering_names(self) -> tuple[str, ...]:
        return tuple(self.feature_names[r] for r in self.ordering)


def _gini_split_cost(indices, labels, rows, feature) -> float | None:
    n_pos = [0, 0]
    n_neg = [0, 0]
    for q in indices:
        side = rows[q][feature]
        if labels[q]:
            n_pos[side] += 1
        else:
            n_neg[side] += 1
    total = len(indices)
    sizes = (n_pos[0] + n_neg[0], n_pos[1] + n_neg[1])
    if 0 in sizes:
        return None
    cost = 0.0
    for side in (0, 1):
        p = n_pos[side] / sizes[side]
        cost += (sizes[side] / total) * 2.0 * p * (1.0 - p)
    return cost


def preselect_features(
    dataset: Dataset, max_depth: int, min_leaf: int = 1, seed: int = 0
) -> tuple[int, ...]:
    """Features used by a greedy Gini-impurity tree grown on the dataset.

    Splits stop on purity, at ``max_depth``, below ``min_leaf`` examples,
    or when no split lowers the weighted impurity; ties pick the lowest
    feature index.  A pure dataset yields the empty tuple.  ``seed`` is
    accepted for interface symmetry; the construction is deterministic.
    """
    del seed
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    rows = dataset.features
    labels = dataset.labels
    used: set[int] = set()

    def grow(indices: list[int], depth: int) -> None:
        pos = sum(labels[q] for q in indices)
        if pos == 0 or pos == len(indices):
            return
        if depth >= max_depth or len(indices) < min_leaf:
            return
        p = pos / len(indices)
        node_gini = 2.0 * p * (1.0 - p)
        best: tuple[float, int] | None = None
        for feature in range(dataset.k):
            cost = _gini_split_cost(indices, labels, rows, feature)
            if cost is None or cost >= node_gini - 1e-12:
                continue
            if best is None or cost < best[0]:
                best = (cost, feature)
        if best is None:
            return
        feature = best[1]
        used.add(feature)
        grow([q for q in indices if rows[q][feature] == 0], depth + 1)
        grow([q for q in indices if rows[q][feature] == 1], depth + 1)

    if dataset.m:
        grow(list(range(dataset.m)), 0)
    return tuple(sorted(used))


def training_accuracy(dataset: Dataset, ordering, table) -> float:
    hits = sum(
        1
        for row, label in zip(dataset.features, dataset.labels)
        if classify_table(table, ordering, row) == label
    )
    return hits / dataset.m


def _constant_model(dataset: Dataset, cfg: LearnConfig | None) -> LearnedModel:
    value = dataset.labels[0]
    table = TruthTable("1" if value else "0")
    return LearnedModel(
        depth=0,
        mode=cfg.mode if cfg else MODE_SAT,
        bias=cfg.bias if cfg else "S",
        ordering=(),
        feature_names=dataset.feature_names,
        table=table,
        bdd=gen_bdd(table, ()),
        train_accuracy=1.0,
        optimal=True,
        literal_count=0,
        solver_stats={"elapsed": 0.0, "solver": "none"},
    )


def _stats_dict(stats: solve.SatStats, extra: dict | None = None) -> dict:
    doc = {
        "decisions": stats.decisions,
        "conflicts": stats.conflicts,
        "propagations": stats.propagations,
        "restarts": stats.restarts,
        "elapsed": stats.elapsed,
    }
    if extra:
        doc.update(extra)
    return doc


def _solve_formula(formula, cfg: LearnConfig, mode: str):
    if cfg.solver_cmd:
        with tempfile.TemporaryDirectory(prefix="bddlearn-") as workdir:
            return solve.external_solve(
                formula, cfg.solver_cmd, workdir, budget=cfg.budget
            )
    if mode == MODE_SAT:
        return solve.sat_solve(formula, budget=cfg.budget, seed=cfg.seed)
    return solve.maxsat_solve(formula, budget=cfg.budget, seed=cfg.seed)


def learn(dataset: Dataset, cfg: LearnConfig) -> LearnedModel:
    """Learn one classifier at the configured depth.

    SAT mode refuses inconsistent datasets up front (no depth can fix a
    feature-vector conflict) and reports UNSAT as "depth insufficient".
    A single-class dataset short-circuits to a sink-only diagram without
    touching a solver.
    """
    if dataset.m == 0:
        raise DataError("empty training set")
    if len(set(dataset.labels)) == 1:
        return _constant_model(dataset, cfg)

    work = dataset
    feature_map: Sequence[int] = range(dataset.k)
    if cfg.preselect is not None:
        selected = preselect_features(
            dataset, cfg.preselect.max_depth, cfg.preselect.min_leaf, cfg.seed
        )
        # fall back to the full feature set when preselection leaves the
        # encoding without enough distinct features
        if len(selected) >= cfg.depth:
            work = dataset.restrict_features(selected)
            feature_map = selected

    if cfg.mode == MODE_SAT:
        formula, ctx = encode.encode_bdd2(work, cfg.depth)
    else:
        formula, ctx = encode.encode_maxsat(work, cfg.depth)
    lits = cnf.literal_count(formula)

    result = _solve_formula(formula, cfg, cfg.mode)
    if isinstance(result, solve.SatResult):
        if result.status == solve.TIMEOUT:
            raise SolverTimeoutError(f"no answer within {cfg.budget}s")
        if result.status == solve.UNSAT:
            raise DepthInsufficientError(
                f"depth {cfg.depth} insufficient for perfect classification"
            )
        model = result.model
        optimal = True
        stats = _stats_dict(result.stats)
    else:
        if result.status == solve.TIMEOUT_NO_SOLUTION:
            raise SolverTimeoutError(f"no model within {cfg.budget}s")
        model = result.model
        optimal = result.optimal
        stats = _stats_dict(result.stats, {"cost": result.cost, "iterations": result.iterations})

    positions, table = encode.decode(model, ctx)
    ordering = tuple(feature_map[r] for r in positions)

    ext = postprocess.mark_unknown(table, ordering, dataset)
    if cfg.bias == "S":
        final = postprocess.apply_bias_S(ext)
        diagram = gen_bdd(final, ordering)
    elif cfg.bias == "P":
        final = postprocess.apply_bias_P(ext)
        diagram = gen_bdd(final, ordering)
    else:
        final, diagram = postprocess.apply_bias_C(ext, ordering)

    return LearnedModel(
        depth=cfg.depth,
        mode=cfg.mode,
        bias=cfg.bias,
        ordering=ordering,
        feature_names=dataset.feature_names,
        table=final,
        bdd=diagram,
        train_accuracy=training_accuracy(dataset, ordering, final),
        optimal=optimal,
        literal_count=lits,
        solver_stats=stats,
    )


@dataclass
class MinDepthResult:
    depth: int
    model: LearnedModel
    unsat_depth: int | None  # certificate: UNSAT at depth - 1 when probed
    probes: list[tuple[int, str]] = field(default_factory=list)


def min_depth(
    dataset: Dataset,
    h0: int,
    *,
    budget: float = 900.0,
    seed: int = 0,
    solver_cmd: str | None = None,
    strategy: str = "linear",
) -> MinDepthResult:
    """Smallest depth at which a perfect classifier exists.

    Starts at ``min(h0, K)`` and walks down on SAT answers or up on UNSAT
    until the boundary is bracketed; ``strategy="binary"`` bisects
    instead.  Consistent data is always separable at depth K, so the walk
    terminates.  Single-class data short-circuits to the constant model.
    """
    if h0 < 1:
        raise ValueError("h0 must be >= 1")
    if strategy not in ("linear", "binary"):
        raise ValueError(f"unknown strategy {strategy!r}")
    conflicts = check_consistency(dataset)
    if conflicts:
        raise DataError(
            f"dataset is inconsistent in example groups {conflicts}; "
            "no depth admits a perfect classifier"
        )
    if len(set(dataset.labels)) == 1:
        return MinDepthResult(0, _constant_model(dataset, None), None, [])

    probes: list[tuple[int, str]] = []
    models: dict[int, LearnedModel] = {}

    def probe(depth: int) -> bool:
        cfg = LearnConfig(
            depth=depth,
            mode=MODE_SAT,
            bias="S",
            solver_cmd=solver_cmd,
            budget=budget,
            seed=seed,
        )
        try:
            models[depth] = learn(dataset, cfg)
        except DepthInsufficientError:
            probes.append((depth, "UNSAT"))
            return False
        probes.append((depth, "SAT"))
        return True

    k = dataset.k
    depth = min(h0, k)
    if strategy == "binary":
        lo = 0  # largest known UNSAT depth
        while not probe(depth):
            lo = depth
            if depth >= k:
                raise LearnError("consistent data must be separable at depth K")
            depth = min(k, depth * 2)
        hi = depth  # smallest known SAT depth
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if probe(mid):
                hi = mid
            else:
                lo = mid
        best = hi
    else:
        if probe(depth):
            while depth > 1 and probe(depth - 1):
                depth -= 1
            best = depth
        else:
            while True:
                if depth >= k:
                    raise LearnError("consistent data must be separable at depth K")
                depth += 1
                if probe(depth):
                    break
            best = depth
    unsat_depth = None
    if any(d == best - 1 and s == "UNSAT" for d, s in probes):
        unsat_depth = best - 1
    return MinDepthResult(best, models[best], unsat_depth, probes)


def evaluate(model: LearnedModel, test: Dataset) -> float:
    """Fraction of test examples the diagram classifies correctly."""
    if test.m == 0:
        raise DataError("empty test set")
    if model.ordering and max(model.ordering) >= test.k:
        raise DataError(
            f"model uses feature index {max(model.ordering)} but the test set "
            f"has only {test.k} features"
        )
    if model.feature_names and test.feature_names:
        for r in model.ordering:
            if model.feature_names[r] != test.feature_names[r]:
                raise DataError(
                    f"feature mismatch at index {r}: model has "
                    f"{model.feature_names[r]!r}, test set {test.feature_names[r]!r}"
                )
    hits = sum(
        1
        for row, label in zip(test.features, test.labels)
        if classify(model.bdd, row) == label
    )
    return hits / test.m


@dataclass
class CvRun:
    seed: int
    fold: int
    status: str  # "ok" | "error"
    train_accuracy: float | None = None
    test_accuracy: float | None = None
    node_count: int | None = None
    literal_count: int | None = None
    solve_seconds: float | None = None
    optimal: bool | None = None
    error: str | None = None


@dataclass
class CvReport:
    runs: list[CvRun]
    aggregates: dict

    def to_json(self) -> dict:
        return {
            "runs": [run.__dict__ for run in self.runs],
            "aggregates": self.aggregates,
        }


def _fold_seed(base: int, split_seed: int, fold: int) -> int:
    return (base * 1_000_003 + split_seed * 1_009 + fold) & 0x7FFFFFFF


def _cv_one(args) -> CvRun:
    dataset, cfg, split_seed, fold, train_idx, test_idx = args
    run = CvRun(seed=split_seed, fold=fold, status="ok")
    try:
        fold_cfg = replace(cfg, seed=_fold_seed(cfg.seed, split_seed, fold))
        t0 = time.monotonic()
        model = learn(dataset.subset(train_idx), fold_cfg)
        run.solve_seconds = time.monotonic() - t0
        run.train_accuracy = model.train_accuracy
        run.test_accuracy = evaluate(model, dataset.subset(test_idx))
        run.node_count = node_count(model.bdd)
        run.literal_count = model.literal_count
        run.optimal = model.optimal
    except (DataError, LearnError, solve.SolverError) as exc:
        run.status = "error"
        run.error = str(exc)
    return run


def cross_validate(
    dataset: Dataset,
    cfg: LearnConfig,
    k: int,
    seeds: Sequence[int],
    jobs: int = 1,
) -> CvReport:
    """k-fold cross-validation repeated under each split seed.

    Per-run failures are recorded, not fatal.  With ``jobs > 1`` the runs
    execute in worker processes, each owning a private solver.
    """
    if k < 2:
        raise DataError("k must be >= 2")
    tasks = []
    for split_seed in seeds:
        for fold, split in enumerate(kfold(dataset, k, split_seed)):
            tasks.append((dataset, cfg, split_seed, fold, split.train, split.test))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_cv_one, tasks))
    else:
        runs = [_cv_one(task) for task in tasks]

    ok = [r for r in runs if r.status == "ok"]

    def mean(values) -> float | None:
        values = list(values)
        return sum(values) / len(values) if values else None

    aggregates = {
        "runs": len(runs),
        "failed": len(runs) - len(ok),
        "train_accuracy": mean(r.train_accuracy for r in ok),
        "test_accuracy": mean(r.test_accuracy for r in ok),
        "node_count": mean(r.node_count for r in ok),
        "literal_count": mean(r.literal_count for r in ok),
        "solve_seconds": mean(r.solve_seconds for r in ok),
        "optimal_rate": mean(1.0 if r.optimal else 0.0 for r in ok),
    }
    return CvReport(runs=runs, aggregates=aggregates)
