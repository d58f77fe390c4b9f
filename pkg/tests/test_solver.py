import math
import pathlib

import pytest

from conftest import abc_instance, random_small
from dtopt import (
    EQUAL,
    Instance,
    Internal,
    ResourceLimitError,
    SolveMode,
    Test,
    ValidationError,
    cost_of,
    enumerate_admissible,
    generate_instance,
    greedy_baseline,
    identify_leaves,
    parse_instance,
    print_tree,
    set_of_signature,
    signature_of,
    solve,
    stage1_less_splits,
    stage2_eq_splits,
    subset_dp_cost,
    tree_cost,
    verify_tree,
)
from dtopt.solver import _resolved_candidates

DATA = pathlib.Path(__file__).parent / "data"


def test_fixture_all_keys():
    inst = abc_instance()
    r = solve(inst)
    assert r.status == "optimal"
    assert r.cost == 3
    assert isinstance(r.tree, Internal) and r.tree.test == Test(EQUAL, 1)
    assert tree_cost(r.tree, inst) == 3


def test_fixture_single_key():
    # only the middle value is a key: the equality split is forced anyway
    inst = Instance(
        [1, 2, 3], [1, 1, 1], [False, True, False], [("A", (1, 3)), ("B", (2,))]
    )
    r = solve(inst)
    assert r.cost == 3
    assert r.tree.test == Test(EQUAL, 1)


def test_single_query_is_a_leaf():
    inst = Instance([7], [5], [True], [("only", (7,))])
    r = solve(inst)
    assert r.status == "optimal" and r.cost == 0
    assert r.tree.class_id == "only"
    assert r.stats.dict_size == 1


def test_infeasible_instance():
    inst = abc_instance(keys=(False, False, False))
    r = solve(inst)
    assert r.status == "infeasible"
    assert r.cost is None and r.tree is None
    assert greedy_baseline(inst).status == "infeasible"


def test_single_class_zero_cost():
    inst = Instance([1, 2, 3], [4, 5, 6], [True] * 3, [("c", (1, 2, 3))])
    assert solve(inst).cost == 0


@pytest.mark.parametrize("seed", range(20))
def test_stage_signatures_match_direct_computation(seed):
    """Both stages must emit exactly tau of the split's two sides."""
    inst = random_small(seed, max_keys=4)
    d = enumerate_admissible(inst)
    for t in d.signatures():
        R = list(set_of_signature(t, inst))
        for test, ys, ns in stage1_less_splits(R, t, inst):
            yes = [q for q in R if q < test.key]
            no = [q for q in R if q >= test.key]
            assert yes and no
            assert ys == signature_of(yes, inst)
            assert ns == signature_of(no, inst)
        seen = set()
        for test, ys, ns in stage2_eq_splits(R, t, inst):
            assert test.key in R and inst.is_key[test.key]
            seen.add(test.key)
            assert ys == signature_of([test.key], inst)
            no = [q for q in R if q != test.key]
            if len(ns.holes) <= 3:
                # oversized hole lists are emitted raw as "never admissible"
                assert ns == signature_of(no, inst) or set_of_signature(ns, inst) is None
        if len(R) >= 2:
            assert seen == {q for q in R if inst.is_key[q]}


@pytest.mark.parametrize("seed", range(20))
def test_fused_candidates_match_staged(seed):
    """The packed fast path and the two public stages agree candidate by
    candidate, including order (which fixes tie-breaking)."""
    inst = random_small(seed + 300, max_keys=4)
    d = identify_leaves(enumerate_admissible(inst), inst)
    for hf in (False, True):
        for t in d.signatures():
            if hf and t.holes:
                continue
            R = list(set_of_signature(t, inst))
            staged = []
            for test, ys, ns in stage1_less_splits(R, t, inst) + stage2_eq_splits(
                R, t, inst
            ):
                if hf and (ys.holes or ns.holes):
                    continue
                yi = d.index_of(ys)
                ni = d.index_of(ns)
                if yi >= 0 and ni >= 0:
                    code = test.key * 2 + (1 if test.kind == EQUAL else 0)
                    staged.append((code, yi, ni))
            fused = _resolved_candidates(R, t, d, inst, hf, None)
            assert fused == staged


@pytest.mark.parametrize("seed", range(15))
def test_cost_of_every_subproblem_matches_oracle(seed):
    inst = random_small(seed + 100, max_keys=3)
    if inst.n > 9:
        pytest.skip("oracle too slow at this size")
    d = identify_leaves(enumerate_admissible(inst), inst)
    stats = None
    for t in d.signatures():
        got = cost_of(t, d, inst, SolveMode.FULL, stats)
        R = set_of_signature(t, inst)
        want = subset_dp_cost(inst, R)
        assert got == want, (t, R)


@pytest.mark.parametrize("seed", range(25))
def test_modes_and_greedy_bound_optimal(seed):
    inst = random_small(seed + 200, max_keys=4)
    full = solve(inst)
    hf = solve(inst, mode="hf")
    greedy = greedy_baseline(inst)
    if full.status == "infeasible":
        assert hf.status == "infeasible"
        assert greedy.status == "infeasible"
        return
    assert hf.status == "optimal"
    assert hf.cost >= full.cost
    assert greedy.status == "optimal"
    assert greedy.cost >= full.cost
    for r in (full, hf):
        rep = verify_tree(r.tree, inst)
        assert rep.correct and rep.cost == r.cost
    assert verify_tree(greedy.tree, inst).correct
    # restricted mode really is heaviest-first
    assert verify_tree(hf.tree, inst).heaviest_first


def test_heaviest_first_gap_fixture():
    """Frozen regression: restricting to heaviest-first costs 186 > 170."""
    inst = parse_instance((DATA / "hf_gap.2wcdt").read_text())
    assert solve(inst).cost == 170
    assert solve(inst, mode=SolveMode.HEAVIEST_FIRST_ONLY).cost == 186
    assert subset_dp_cost(inst) == 170


def test_scale_equivariance():
    base = generate_instance("standard", 3, seed=11, classes=3)
    scaled = Instance(
        base.values,
        [w * 7 for w in base.weights],
        base.is_key,
        [
            (cid, tuple(base.values[q] for q in sorted(members)))
            for cid, members in base.classes
        ],
    )
    a, b = solve(base), solve(scaled)
    assert b.cost == 7 * a.cost


def test_coarsening_cannot_increase_cost():
    # adding a union class only adds leaves the tree may use
    for seed in range(8):
        inst = random_small(seed + 400, max_keys=3)
        if len(inst.classes) < 2:
            continue
        class_spec = [
            (cid, tuple(inst.values[q] for q in sorted(members)))
            for cid, members in inst.classes
        ]
        merged = tuple(
            inst.values[q] for q in sorted(inst.classes[0][1] | inst.classes[1][1])
        )
        richer = Instance(
            inst.values, inst.weights, inst.is_key, class_spec + [("u", merged)]
        )
        a, b = solve(inst), solve(richer)
        if a.status == "optimal":
            assert b.status == "optimal"
            assert b.cost <= a.cost


def test_candidate_budget_linear():
    inst = generate_instance("successful", 12, seed=3, classes=3, overlap=0.3)
    r = solve(inst)
    assert r.stats.max_candidates <= 2 * inst.n
    assert r.stats.subproblems <= r.stats.dict_size


def test_solve_deterministic_bytes():
    inst = generate_instance("general", 10, seed=0, classes=3, overlap=0.3)
    a, b = solve(inst), solve(inst)
    assert a.cost == b.cost == 1199
    assert print_tree(a.tree, inst) == print_tree(b.tree, inst)
    assert a.stats.dict_size == b.stats.dict_size


def test_max_records_cap_and_env(monkeypatch):
    inst = abc_instance()
    with pytest.raises(ResourceLimitError):
        solve(inst, max_records=2)
    monkeypatch.setenv("DTOPT_MAX_RECORDS", "2")
    with pytest.raises(ResourceLimitError):
        solve(inst)
    monkeypatch.setenv("DTOPT_MAX_RECORDS", "a lot")
    with pytest.raises(ValidationError):
        solve(inst)
    monkeypatch.delenv("DTOPT_MAX_RECORDS")
    assert solve(inst).cost == 3


def test_cost_of_unknown_signature_is_infinite():
    inst = abc_instance()
    d = identify_leaves(enumerate_admissible(inst), inst)
    from dtopt import Signature

    assert cost_of(Signature(0, 2, 0, (1,)), d, inst) == math.inf
