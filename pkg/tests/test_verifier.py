import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import chain, instances
from diffauction import AuctionInstance, BuyerType, informed_set
from diffauction.analysis import optimal_welfare, utility
from diffauction.mechanisms import Mechanism
from diffauction.model import Outcome, build_apg
from diffauction.verifier import (
    CounterexampleError,
    Deviation,
    DeviationLimitError,
    MechanismFailure,
    audit,
    audit_corpus,
    check_ir,
    check_strategy_proof,
    deviation_set,
    gen_corpus,
    gen_instance,
    narrative_violations,
    neighbor_subsets,
    reconstruct_gidm_counterexample,
    replay,
    search_counterexamples,
)
from diffauction.verifier.counterexample import CANONICAL, ID, build_instance, cut_instance
from diffauction.verifier.deviations import DEFAULT_EPSILON

F = Fraction
EPS = DEFAULT_EPSILON


# ---------------------------------------------------------------- deviation sets


def test_neighbor_subsets_order_and_limit():
    assert neighbor_subsets({2, 3}) == [frozenset({2, 3}), frozenset({2}), frozenset({3}), frozenset()]
    with pytest.raises(DeviationLimitError):
        neighbor_subsets(range(13))
    assert len(neighbor_subsets(range(12))) == 4096


def test_grid_for_two_rivals():
    inst = AuctionInstance.create(
        1, [1], [BuyerType.of([1], [2, 3]), BuyerType.of([4]), BuyerType.of([10])], value_cap=10
    )
    devs = deviation_set(inst, 1, alpha=F(1, 2))
    subsets = {d.neighbors for d in devs}
    assert subsets == {frozenset(), frozenset({2}), frozenset({3}), frozenset({2, 3})}
    firsts = {d.valuations[0] for d in devs}
    # rivals 4 and 10, alpha-scaled 2 and 5 (8 and 20 from dividing; 20 is above the cap)
    expected = {F(1)}
    for x in (0, 4, 10, 2, 5, 8):
        expected |= {y for y in (x - EPS, F(x), x + EPS) if 0 <= y <= 10}
    assert firsts == expected
    assert len(devs) == 4 * len(expected)
    assert devs[0] == Deviation(1, (F(1),), frozenset({2, 3}))


def test_grid_without_edges_or_rival_values():
    inst = AuctionInstance.create(1, [1, 2], [BuyerType.of([3]), BuyerType.of([0])], value_cap=10)
    devs = deviation_set(inst, 1)
    assert {d.neighbors for d in devs} == {frozenset()}
    assert {d.valuations[0] for d in devs} == {F(3), F(0), EPS, F(10), 10 - EPS}


def test_grid_for_multi_item_buyer():
    inst = AuctionInstance.create(
        4, [1, 2], [BuyerType.of([5, 3, 1, 0]), BuyerType.of([6, 2, 2, 2])], value_cap=10
    )
    devs = deviation_set(inst, 1, focus="bundle")
    for d in devs:
        v = d.valuations
        assert len(v) == 4 and list(v) == sorted(v, reverse=True) and v[0] <= 10
        if v != (5, 3, 1, 0):  # the truthful report leads the list
            assert v[2:] in {(F(0), F(0)), (v[1], v[1])}
    sums = {d.valuations[0] + d.valuations[1] for d in devs}
    assert {F(8), 8 - EPS, 8 + EPS, F(0), F(20)} <= sums


@settings(max_examples=100, deadline=None)
@given(instances(n_max=5, k_max=4))
def test_every_deviation_is_a_valid_report(inst):
    for i in inst.ids:
        for focus in ("unit", "first", "bundle", "both"):
            for d in deviation_set(inst, i, focus=focus):
                assert d.neighbors <= inst.true_type(i).neighbors
                inst.with_declared(i, d.as_type())  # validates


# ---------------------------------------------------------------- audits


def first_price(instance):
    """Pay-your-bid single item auction over the informed buyers: not strategy-proof."""
    apg = build_apg(instance)
    w = max(apg.order, key=lambda i: (instance.declared(i).valuations[0], -i))
    return Outcome({w: 1}, {w: instance.declared(w).valuations[0]})


def pay_the_cap(instance):
    """Planted IR failure: the winner always pays the value cap."""
    apg = build_apg(instance)
    w = max(apg.order, key=lambda i: (instance.declared(i).valuations[0], -i))
    return Outcome({w: 1}, {w: instance.value_cap})


def test_broken_mechanism_is_caught():
    inst = chain(3, 7, cap=10)
    violation = check_ir(pay_the_cap, inst)
    assert violation is not None and violation.buyer == 2 and violation.utility == -3
    assert check_strategy_proof(first_price, inst) is not None


def test_reports_replay_exactly():
    inst = chain(3, 7, cap=10)
    report = check_strategy_proof(first_price, inst)
    assert report.gain > 0
    assert replay(first_price, inst, report) == (report.truthful_utility, report.deviant_utility)


def test_mechanism_failure_carries_deviation():
    def fragile(instance):
        if instance.declared(1).valuations[0] == 0:
            raise ZeroDivisionError("boom")
        return first_price(instance)

    with pytest.raises(MechanismFailure) as info:
        audit(fragile, chain(3, 7, cap=10))
    assert info.value.deviation.valuations == (0,)
    assert isinstance(info.value.cause, ZeroDivisionError)


@settings(max_examples=40, deadline=None)
@given(instances(n_max=5).filter(lambda x: informed_set(x)), st.sampled_from([F(1, 4), F(1, 2), F(3, 4)]))
def test_alpha_apg_audit_clean(inst, alpha):
    assert audit(Mechanism("alpha-apg", alpha), inst).clean


@settings(max_examples=40, deadline=None)
@given(instances(n_max=4, k_min=2, k_max=9))
def test_gapg_audit_clean(inst):
    assert audit(Mechanism("gapg"), inst).clean


@settings(max_examples=60, deadline=None)
@given(
    instances(n_max=5, k_max=4).filter(lambda x: informed_set(x)),
    st.sampled_from([Mechanism("alpha-apg", F(1, 2)), Mechanism("gapg")]),
)
def test_diffusion_monotonicity(inst, mech):
    if mech.name == "alpha-apg":
        inst = AuctionInstance.create(
            1, inst.seller_neighbors, [BuyerType(t.valuations[:1], t.neighbors) for t in inst.buyers], inst.value_cap
        )
    for i in informed_set(inst):
        full = utility(inst, i, mech(inst))
        t = inst.declared(i)
        for subset in neighbor_subsets(t.neighbors):
            cut = inst.with_declared(i, BuyerType(t.valuations, subset))
            assert utility(cut, i, mech(cut)) <= full


def _mesh_violation(mechanism, inst, steps=1000):
    """Profitable unit-demand misreport on a uniform mesh over [0, cap], or None."""
    cap = inst.value_cap
    for i in inst.ids:
        base = inst.truthful_for(i)
        u_true = utility(base, i, mechanism(base))
        t = inst.true_type(i)
        for subset in neighbor_subsets(t.neighbors):
            for step in range(steps + 1):
                report = BuyerType((cap * step / steps,) + (F(0),) * (inst.k - 1), subset)
                profile = base.with_declared(i, report)
                if utility(profile, i, mechanism(profile)) > u_true:
                    return i
    return None


MESH_MECHANISMS = [
    Mechanism("alpha-apg", F(1, 2)),
    Mechanism("gapg-topk"),
    Mechanism("gapg-topk", reading="max"),
    first_price,
]


@pytest.mark.parametrize("mechanism", MESH_MECHANISMS, ids=["alpha-apg", "topk-kth", "topk-max", "first-price"])
def test_grid_agrees_with_dense_mesh(mechanism):
    is_topk = getattr(mechanism, "name", "") == "gapg-topk"
    corpus = gen_corpus(
        6, seed=11, n=[2, 3], k=[2] if is_topk else [1], topology=["path", "star", "random-graph"],
        distribution="quarter", value_cap=10, unit_demand=True,
    )
    for inst in corpus:
        grid = check_strategy_proof(mechanism, inst)
        mesh = _mesh_violation(mechanism, inst, steps=250 if is_topk else 1000)
        assert (grid is None) == (mesh is None), inst
        if grid is not None:
            assert grid.gain > 0


def test_audit_corpus_parallel_matches_serial():
    corpus = list(gen_corpus(8, seed=3, n=[2, 3, 4], k=[2], unit_demand=True))
    mech = Mechanism("gapg-topk", reading="max")
    serial = audit_corpus(mech, corpus)
    parallel = audit_corpus(mech, corpus, workers=2)
    assert serial == parallel
    assert serial.instances == 8 and serial.violations > 0


# ---------------------------------------------------------------- generation


def test_generation_is_deterministic():
    assert gen_instance(5, topology="path", seed=7) == gen_instance(5, topology="path", seed=7)
    assert list(gen_corpus(5, seed=2, n=[2, 3])) == list(gen_corpus(5, seed=2, n=[2, 3]))


def test_random_tree_informs_everyone():
    for seed in range(20):
        inst = gen_instance(6, topology="random-tree", seed=seed)
        assert informed_set(inst) == set(inst.ids)
        assert sum(len(t.neighbors) for t in inst.buyers) + len(inst.seller_neighbors) == 6


def test_zero_distribution():
    assert optimal_welfare(gen_instance(4, topology="random-graph", distribution="zero", seed=1)) == 0


def test_generator_respects_shape():
    for seed in range(20):
        inst = gen_instance(8, k=3, seed=seed, max_out_degree=5, value_cap=10, distribution="quarter")
        assert all(len(t.neighbors) <= 5 for t in inst.buyers)
        assert all(v * 4 == int(v * 4) and v <= 10 for t in inst.buyers for v in t.valuations)
    unit = gen_instance(4, k=3, unit_demand=True, seed=1)
    assert all(t.valuations[1:] == (0, 0) for t in unit.buyers)


def test_generator_rejects_bad_arguments():
    with pytest.raises(ValueError, match="topology"):
        gen_instance(3, topology="ring")
    with pytest.raises(ValueError, match="distribution"):
        gen_instance(3, distribution="normal")
    with pytest.raises(ValueError):
        gen_instance(0)


# ---------------------------------------------------------------- GIDM counter-example


def test_counterexample_narrative():
    inst = reconstruct_gidm_counterexample()
    assert narrative_violations(inst, audit=True) == []
    report = check_strategy_proof(Mechanism("gidm"), inst)
    assert report.buyer == ID["d"] and report.deviation.neighbors == frozenset()
    assert report.truthful_utility == 0 and report.gain == 1
    assert replay(Mechanism("gidm"), inst, report) == (0, 1)


def test_counterexample_cut_removes_edge_only():
    inst = reconstruct_gidm_counterexample()
    cut = cut_instance(inst)
    d = ID["d"]
    assert cut.declared(d).neighbors == frozenset() and cut.true_type(d).neighbors == {ID["e"]}
    assert cut.declared(d).valuations == inst.declared(d).valuations


def test_candidate_from_the_story_fails_loudly():
    candidate = dict(a=1, b=2, c=5, d=7, e=8, f=4, g=6)
    problems = narrative_violations(build_instance(candidate))
    assert "c should take from d at price 3" in problems
    with pytest.raises(CounterexampleError):
        reconstruct_gidm_counterexample(candidate)


def test_search_finds_the_canonical_family():
    found = list(search_counterexamples(10))
    assert CANONICAL in found
    assert len(found) == 9
    assert {(v["c"], v["d"], v["e"], v["f"], v["g"]) for v in found} == {(4, 7, 5, 4, 6)}
    assert {(v["a"], v["b"]) for v in found} == set(itertools.product([1, 2, 3], repeat=2))
