import random

import pytest

from bddlearn import cnf
from bddlearn.bdd import classify_table, is_bead
from bddlearn.data import DataError, dataset_from_bits
from bddlearn.encode import (
    DecodeError,
    decode,
    encode_bdd1,
    encode_bdd2,
    encode_maxsat,
    read_context,
    rel,
    write_context,
)
from bddlearn.solve import maxsat_solve, sat_solve
from oracles import best_split_error, random_dataset


def test_rel_values():
    assert rel(1, 1, 2) == 0
    assert rel(2, 4, 2) == 1
    # cell 1 corresponds to the all-zero assignment
    assert (rel(1, 1, 2), rel(2, 1, 2)) == (0, 0)
    assert (rel(1, 6, 3), rel(2, 6, 3), rel(3, 6, 3)) == (1, 0, 1)


def test_rel_range_checks():
    with pytest.raises(ValueError):
        rel(0, 1, 2)
    with pytest.raises(ValueError):
        rel(3, 1, 2)
    with pytest.raises(ValueError):
        rel(1, 5, 2)


def test_bdd1_emits_simplified_clause_for_first_negative_example(demo8):
    formula, ctx = encode_bdd1(demo8, 2)
    # example e1 = (1,0,1,0) is negative; its cell-1 clause keeps exactly
    # the placements of the features it sets to 1
    expected = [
        -ctx.c[0],
        ctx.a[0][0],
        ctx.a[2][0],
        ctx.a[0][1],
        ctx.a[2][1],
    ]
    assert expected in formula.hard


def test_bdd1_no_examples_only_structure():
    ds = dataset_from_bits([], [], feature_names=("f1", "f2", "f3"))
    formula, ctx = encode_bdd1(ds, 2)
    res = sat_solve(formula, budget=10)
    assert res.status == "SAT"
    ordering, table = decode(res.model, ctx)
    assert len(set(ordering)) == 2
    assert is_bead(table.cells)


def test_bdd1_literal_count_scales_with_classification_volume():
    rng = random.Random(0)
    ds = random_dataset(rng, k=20, m=60, consistent=False)
    counts = {}
    for depth in (2, 3, 4, 5):
        formula, _ = encode_bdd1(ds, depth)
        counts[depth] = cnf.literal_count(formula)
    # dominated by M * 2^H clauses of Theta(H*K) literals: growing H by one
    # roughly doubles the count (slightly more through the H factor)
    for depth in (2, 3, 4):
        ratio = counts[depth + 1] / counts[depth]
        assert 1.7 < ratio < 2.9, (depth, ratio)


def test_bdd1_rejects_inconsistent_data():
    ds = dataset_from_bits([(0, 0), (0, 0)], [0, 1])
    with pytest.raises(DataError):
        encode_bdd1(ds, 1)
    with pytest.raises(DataError):
        encode_bdd2(ds, 1)


def test_bdd2_classification_clauses_have_depth_plus_one_literals(demo8):
    for depth in (1, 2, 3):
        formula, ctx = encode_bdd2(demo8, depth)
        n_cls = demo8.m * (1 << depth)
        for clause in formula.hard[-n_cls:]:
            assert len(clause) == depth + 1


def test_bdd2_single_positive_example_hand_model():
    ds = dataset_from_bits([(1,)], [1])
    formula, ctx = encode_bdd2(ds, 1)
    res = sat_solve(formula, budget=5)
    assert res.status == "SAT"
    model = res.model
    assert model[ctx.a[0][0]] == 1
    assert model[ctx.d[0][0]] == 1
    assert model[ctx.c[1]] == 1  # the example routes to cell 2
    assert model[ctx.c[0]] == 0  # the bead constraint forces the other cell down
    ordering, table = decode(model, ctx)
    assert ordering == (0,)
    assert table.cells == "01"


def test_bdd2_demo8_perfect_classifier(demo8):
    formula, ctx = encode_bdd2(demo8, 2)
    res = sat_solve(formula, budget=10)
    assert res.status == "SAT"
    ordering, table = decode(res.model, ctx)
    hits = sum(
        classify_table(table, ordering, row) == label
        for row, label in zip(demo8.features, demo8.labels)
    )
    assert hits == 8


def test_bdd1_models_decode_to_perfect_classifiers(demo8):
    formula, ctx = encode_bdd1(demo8, 2)
    res = sat_solve(formula, budget=10)
    assert res.status == "SAT"
    ordering, table = decode(res.model, ctx)
    for row, label in zip(demo8.features, demo8.labels):
        assert classify_table(table, ordering, row) == label


def test_encodings_equisatisfiable_small_random():
    rng = random.Random(17)
    for _ in range(12):
        ds = random_dataset(rng, k=rng.randint(2, 5), m=rng.randint(2, 10), consistent=True)
        if len(set(ds.labels)) < 2:
            continue
        depth = rng.randint(1, min(3, ds.k))
        f1, _ = encode_bdd1(ds, depth)
        f2, _ = encode_bdd2(ds, depth)
        r1 = sat_solve(f1, budget=30)
        r2 = sat_solve(f2, budget=30)
        assert r1.status == r2.status, (ds, depth)


def test_bdd2_smaller_than_bdd1_on_wide_data():
    rng = random.Random(5)
    ds = random_dataset(rng, k=20, m=100)
    for depth in (3, 4):
        fa, _ = encode_bdd1(ds, depth)
        fb, _ = encode_bdd2(ds, depth)
        assert cnf.literal_count(fb) < cnf.literal_count(fa)


def test_maxsat_consistent_data_reaches_cost_zero(demo8):
    formula, ctx = encode_maxsat(demo8, 2)
    res = maxsat_solve(formula, budget=30)
    assert res.status == "OPTIMUM"
    assert res.cost == 0


def test_maxsat_irreducible_conflict_costs_one():
    ds = dataset_from_bits([(0,), (0,)], [1, 0])
    formula, ctx = encode_maxsat(ds, 1)
    res = maxsat_solve(formula, budget=10)
    assert res.status == "OPTIMUM"
    assert res.cost == 1


def test_maxsat_matches_ordering_oracle():
    rng = random.Random(23)
    for _ in range(8):
        ds = random_dataset(rng, k=5, m=20)
        formula, ctx = encode_maxsat(ds, 2)
        res = maxsat_solve(formula, budget=60)
        assert res.status == "OPTIMUM"
        assert res.cost == best_split_error(ds, 2)


def test_maxsat_weights_validated(demo8):
    with pytest.raises(ValueError):
        encode_maxsat(demo8, 2, weights=[1] * 7)
    with pytest.raises(ValueError):
        encode_maxsat(demo8, 2, weights=[0] * 8)
    formula, _ = encode_maxsat(demo8, 2, weights=[2] * 8)
    assert all(w == 2 for _, w in formula.soft)


def test_decode_reference_model(demo8):
    formula, ctx = encode_bdd2(demo8, 2)
    model = {v: 0 for v in range(1, formula.var_count + 1)}
    model[ctx.a[0][0]] = 1  # f1 first
    model[ctx.a[1][1]] = 1  # f2 second
    model[ctx.c[0]] = 1  # table 1000
    ordering, table = decode(model, ctx)
    assert ordering == (0, 1)
    assert table.cells == "1000"


def test_decode_soft_clause_pattern_matches_classifier():
    rng = random.Random(31)
    ds = random_dataset(rng, k=5, m=16)
    formula, ctx = encode_maxsat(ds, 2)
    res = maxsat_solve(formula, budget=30)
    ordering, table = decode(res.model, ctx)
    errors = sum(
        classify_table(table, ordering, row) != label
        for row, label in zip(ds.features, ds.labels)
    )
    assert errors == cnf.falsified_soft_weight(formula, res.model) == res.cost


def test_decode_rejects_corrupt_models(demo8):
    formula, ctx = encode_bdd2(demo8, 2)
    empty = {v: 0 for v in range(1, formula.var_count + 1)}
    with pytest.raises(DecodeError):
        decode(empty, ctx)
    doubled = dict(empty)
    doubled[ctx.a[0][0]] = 1
    doubled[ctx.a[1][0]] = 1
    with pytest.raises(DecodeError):
        decode(doubled, ctx)
    repeated = dict(empty)
    repeated[ctx.a[0][0]] = 1
    repeated[ctx.a[0][1]] = 1
    with pytest.raises(DecodeError):
        decode(repeated, ctx)


def test_decoded_table_is_always_a_bead():
    rng = random.Random(41)
    for _ in range(6):
        ds = random_dataset(rng, k=4, m=12)
        formula, ctx = encode_maxsat(ds, 2)
        res = maxsat_solve(formula, budget=30)
        _, table = decode(res.model, ctx)
        assert is_bead(table.cells)


def test_context_json_round_trip(tmp_path, demo8):
    formula, ctx = encode_maxsat(demo8, 2)
    path = tmp_path / "ctx.json"
    write_context(ctx, path)
    restored = read_context(path)
    assert restored == ctx
    res = maxsat_solve(formula, budget=30)
    assert decode(res.model, restored) == decode(res.model, ctx)


def test_depth_validation(demo8):
    with pytest.raises(ValueError):
        encode_bdd2(demo8, 0)
    with pytest.raises(ValueError):
        encode_maxsat(demo8, 40)
