import random
import sys
import textwrap

import pytest

from bddlearn import cnf
from bddlearn.solve import (
    FEASIBLE,
    OPTIMUM,
    SAT,
    TIMEOUT,
    TIMEOUT_NO_SOLUTION,
    UNSAT,
    CdclSolver,
    IntegrationError,
    SolverError,
    external_solve,
    maxsat_solve,
    sat_solve,
)
from oracles import enumerate_sat, random_formula


def _formula(clauses, n):
    f = cnf.Formula(n)
    for clause in clauses:
        f.add_hard(clause)
    return f


def test_contradictory_units_unsat():
    res = sat_solve(_formula([[1], [-1]], 1), budget=5)
    assert res.status == UNSAT
    assert res.model is None


def test_empty_clause_set_sat_empty_model():
    res = sat_solve(cnf.Formula(), budget=5)
    assert res.status == SAT
    assert res.model == {}


def test_model_is_total_over_unconstrained_vars():
    res = sat_solve(_formula([[1, 2]], 4), budget=5)
    assert res.status == SAT
    assert set(res.model) == {1, 2, 3, 4}


def test_soft_clauses_ignored_with_warning():
    f = _formula([[1]], 1)
    f.add_soft([-1])
    with pytest.warns(UserWarning):
        res = sat_solve(f, budget=5)
    assert res.status == SAT


def test_differential_against_enumeration():
    rng = random.Random(42)
    for _ in range(150):
        clauses, n = random_formula(rng)
        expected = enumerate_sat(clauses, n)
        res = sat_solve(_formula(clauses, n), budget=30, seed=1)
        if expected is None:
            assert res.status == UNSAT
        else:
            assert res.status == SAT
            assert all(
                cnf.clause_satisfied(c, res.model) for c in clauses
            )


def test_fixed_seed_is_deterministic():
    rng = random.Random(5)
    clauses, n = random_formula(rng, max_vars=18, max_clauses=70)
    f = _formula(clauses, n)
    a = sat_solve(f, budget=30, seed=3)
    b = sat_solve(f, budget=30, seed=3)
    assert a.status == b.status
    assert a.model == b.model
    assert (a.stats.decisions, a.stats.conflicts, a.stats.propagations) == (
        b.stats.decisions,
        b.stats.conflicts,
        b.stats.propagations,
    )


def _pigeonhole(holes: int):
    """holes+1 pigeons into `holes` holes: classic UNSAT family."""
    f = cnf.Formula((holes + 1) * holes)

    def var(p, h):
        return p * holes + h + 1

    for p in range(holes + 1):
        f.add_hard([var(p, h) for h in range(holes)])
    for h in range(holes):
        for p1 in range(holes + 1):
            for p2 in range(p1 + 1, holes + 1):
                f.add_hard([-var(p1, h), -var(p2, h)])
    return f


def test_budget_exhaustion_times_out():
    res = sat_solve(_pigeonhole(9), budget=0.02)
    assert res.status == TIMEOUT
    assert res.model is None


def test_pigeonhole_unsat():
    res = sat_solve(_pigeonhole(5), budget=60)
    assert res.status == UNSAT


def test_learned_clause_deletion_triggers():
    f = _pigeonhole(6)
    solver = CdclSolver(f.hard, f.var_count, seed=0, max_learnts=20)
    res = solver.solve(60)
    assert res.status == UNSAT
    assert res.stats.learned_deleted > 0


def test_maxsat_all_hard_satisfiable():
    res = maxsat_solve(_formula([[1, 2], [-1, 2]], 2), budget=5)
    assert res.status == OPTIMUM
    assert res.cost == 0
    assert res.optimal


def test_maxsat_one_of_two_units_must_fail():
    f = cnf.Formula(1)
    f.add_soft([1])
    f.add_soft([-1])
    res = maxsat_solve(f, budget=5)
    assert res.status == OPTIMUM
    assert res.cost == 1


def test_maxsat_cost_matches_model_recount():
    rng = random.Random(9)
    for _ in range(25):
        clauses, n = random_formula(rng, max_vars=10, max_clauses=25)
        f = cnf.Formula(n)
        hard, soft = clauses[: len(clauses) // 2], clauses[len(clauses) // 2 :]
        for c in hard:
            f.add_hard(c)
        for c in soft:
            f.add_soft(c)
        if enumerate_sat(hard, n) is None:
            with pytest.raises(SolverError):
                maxsat_solve(f, budget=30)
            continue
        res = maxsat_solve(f, budget=30)
        assert res.status == OPTIMUM
        assert cnf.falsified_soft_weight(f, res.model) == res.cost
        # exhaustive optimum over all assignments
        best = min(
            cnf.falsified_soft_weight(f, {v: (a >> (v - 1)) & 1 for v in range(1, n + 1)})
            for a in range(1 << n)
            if all(
                cnf.clause_satisfied(c, {v: (a >> (v - 1)) & 1 for v in range(1, n + 1)})
                for c in hard
            )
        )
        assert res.cost == best


def test_maxsat_rejects_general_weights():
    f = cnf.Formula(1)
    f.add_soft([1], weight=2)
    with pytest.raises(ValueError):
        maxsat_solve(f)


def test_maxsat_timeout_before_any_model():
    f = _pigeonhole(9)
    f.add_soft([1])
    res = maxsat_solve(f, budget=0.02)
    assert res.status == TIMEOUT_NO_SOLUTION
    assert res.model is None


def test_maxsat_feasible_when_budget_dies_mid_descent():
    # soft-only instance with a slow hard core: the first model arrives,
    # the descent then runs out of time
    f = _pigeonhole(8)
    relaxed = cnf.Formula(f.var_count)
    for clause in f.hard:
        relaxed.add_soft(clause)
    res = maxsat_solve(relaxed, budget=0.3)
    if res.status == FEASIBLE:
        assert res.model is not None
        assert res.cost >= 1
        assert not res.optimal
    else:  # a fast machine may finish; then the answer must be optimal
        assert res.status == OPTIMUM


# --- external bridge -------------------------------------------------------


def _shim_script(tmp_path):
    """A DIMACS CNF solver built on this package, run as a subprocess."""
    script = tmp_path / "shim_solver.py"
    script.write_text(
        textwrap.dedent(
            """
            import sys
            from bddlearn.solve import CdclSolver

            clauses, n = [], 0
            with open(sys.argv[1]) as fh:
                for line in fh:
                    line = line.strip()
                    if not line or line[0] in "cp%":
                        if line.startswith("p cnf"):
                            n = int(line.split()[2])
                        continue
                    lits = [int(tok) for tok in line.split()]
                    clauses.append([l for l in lits if l != 0])
            res = CdclSolver(clauses, n, seed=0).solve(60)
            if res.status == "SAT":
                print("s SATISFIABLE")
                lits = [v if res.model[v] else -v for v in sorted(res.model)]
                print("v " + " ".join(map(str, lits)) + " 0")
            else:
                print("s UNSATISFIABLE")
            """
        )
    )
    return f"{sys.executable} {script} {{file}}"


def test_external_differential_against_embedded(tmp_path):
    cmd = _shim_script(tmp_path)
    rng = random.Random(21)
    for i in range(6):
        clauses, n = random_formula(rng, max_vars=12, max_clauses=40)
        f = _formula(clauses, n)
        mine = sat_solve(f, budget=30)
        theirs = external_solve(f, cmd, tmp_path / f"run{i}", budget=60)
        assert theirs.status == mine.status
        if theirs.status == SAT:
            assert cnf.verify_model(f, theirs.model)


def test_external_requires_file_placeholder(tmp_path):
    with pytest.raises(ValueError):
        external_solve(_formula([[1]], 1), "solver", tmp_path)


def test_external_garbage_output_is_integration_error(tmp_path):
    script = tmp_path / "garbage.py"
    script.write_text("print('hello world')\n")
    with pytest.raises(IntegrationError):
        external_solve(
            _formula([[1]], 1), f"{sys.executable} {script} {{file}}", tmp_path
        )


def test_external_lying_model_is_rejected(tmp_path):
    script = tmp_path / "liar.py"
    script.write_text("print('s SATISFIABLE')\nprint('v -1 0')\n")
    with pytest.raises(IntegrationError):
        external_solve(
            _formula([[1]], 1), f"{sys.executable} {script} {{file}}", tmp_path
        )


def test_external_wcnf_optimum_with_cost_line(tmp_path):
    # three unit soft clauses forced false by hard clauses: cost 3
    f = cnf.Formula(3)
    for v in (1, 2, 3):
        f.add_hard([-v])
        f.add_soft([v])
    script = tmp_path / "maxsat.py"
    script.write_text(
        "print('o 5')\nprint('o 3')\nprint('s OPTIMUM FOUND')\nprint('v -1 -2 -3 0')\n"
    )
    res = external_solve(f, f"{sys.executable} {script} {{file}}", tmp_path)
    assert res.status == OPTIMUM
    assert res.cost == 3
    assert res.optimal


def test_external_wcnf_cost_mismatch_is_rejected(tmp_path):
    f = cnf.Formula(1)
    f.add_hard([-1])
    f.add_soft([1])
    script = tmp_path / "bad_cost.py"
    script.write_text("print('o 0')\nprint('s OPTIMUM FOUND')\nprint('v -1 0')\n")
    with pytest.raises(IntegrationError):
        external_solve(f, f"{sys.executable} {script} {{file}}", tmp_path)


def test_external_exit_code_hints(tmp_path):
    unsat = tmp_path / "exit20.py"
    unsat.write_text("import sys\nsys.exit(20)\n")
    res = external_solve(
        _formula([[1], [-1]], 1), f"{sys.executable} {unsat} {{file}}", tmp_path
    )
    assert res.status == UNSAT

    sat_script = tmp_path / "exit10.py"
    sat_script.write_text("import sys\nprint('v 1 0')\nsys.exit(10)\n")
    res = external_solve(
        _formula([[1]], 1), f"{sys.executable} {sat_script} {{file}}", tmp_path
    )
    assert res.status == SAT
    assert res.model[1] == 1
