"""A seven-buyer tree on which the revised GIDM rewards withholding the auction.

Only the shape of the story is known: who the top four buyers are, who takes
an item from whom, and two prices (3 when everyone is truthful, 6 after
buyer ``d`` stops forwarding). :func:`narrative_violations` turns the story
into checks against the executor's trace, :func:`search_counterexamples`
enumerates small integer valuations passing every check, and
:func:`reconstruct_gidm_counterexample` returns the one used throughout.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from ..analysis import utility
from ..mechanisms import Mechanism, PreconditionError, gidm_revised
from ..mechanisms.gidm import SELLER, GidmTreeState
from ..model import AuctionInstance, BuyerType
from .audit import check_strategy_proof

LABELS = ("a", "b", "c", "d", "e", "f", "g")
ID = {name: i for i, name in enumerate(LABELS, start=1)}
ITEMS = 4
SELLER_NEIGHBORS = ("a", "f")
TREE = {"a": ("b",), "b": ("c", "g"), "c": ("d",), "d": ("e",)}

# Every integer solution up to 10 shares c, d, e, f, g; a and b only need 0 < a, b < f.
CANONICAL = {"a": 1, "b": 2, "c": 4, "d": 7, "e": 5, "f": 4, "g": 6}


class CounterexampleError(AssertionError):
    """The instance does not reproduce the story under the implemented reading."""


def build_instance(values: Mapping[str, int | Fraction]) -> AuctionInstance:
    buyers = [
        BuyerType((Fraction(values[name]),), frozenset(ID[c] for c in TREE.get(name, ())))
        for name in LABELS
    ]
    return AuctionInstance.create(
        ITEMS, [ID[x] for x in SELLER_NEIGHBORS], buyers, labels=LABELS
    )


def cut_instance(instance: AuctionInstance) -> AuctionInstance:
    """Buyer ``d`` keeps the auction to herself."""
    d = ID["d"]
    return instance.with_declared(d, BuyerType(instance.declared(d).valuations, frozenset()))


def _sent(state: GidmTreeState, src: str | int, dst: str) -> int:
    who = SELLER if src == SELLER else ID[src]
    return sum(e.items for e in state.trace if e.kind == "send" and e.buyer == who and e.other == ID[dst])


def _act(state: GidmTreeState, name: str):
    return next((e for e in state.trace if e.buyer == ID[name] and e.kind != "send"), None)


def _names(ids) -> set[str]:
    return {LABELS[i - 1] for i in ids}


def narrative_violations(instance: AuctionInstance, audit: bool = False) -> list[str]:
    """Every part of the story the executor's traces disagree with (empty means all hold)."""
    problems: list[str] = []

    def expect(cond: bool, what: str) -> None:
        if not cond:
            problems.append(what)

    def acted(state: GidmTreeState, name: str, kind: str, other: str | None = None, price=None) -> bool:
        e = _act(state, name)
        if e is None or e.kind != kind:
            return False
        if other is not None and e.other != ID[other]:
            return False
        return price is None or e.price == price

    try:
        truthful, st = gidm_revised(instance)
        cut = cut_instance(instance)
        deviant, sc = gidm_revised(cut)
    except PreconditionError as exc:
        return [f"executor rejected the instance: {exc}"]

    v = {name: instance.declared(ID[name]).valuations[0] for name in LABELS}
    expect(_names(st.top_k) == {"c", "d", "e", "g"}, "truthful top four should be c, d, e, g")
    expect(all(v["c"] < v[x] for x in "deg"), "c should have the smallest value of the top four")
    expect(_sent(st, SELLER, "a") == 4 and _sent(st, SELLER, "f") == 0, "seller should send all 4 items to a")
    expect(acted(st, "a", "take", "c"), "a should take an item from c")
    expect(acted(st, "b", "take", "e"), "b should take an item from e")
    expect(_sent(st, "b", "c") == 1 and _sent(st, "b", "g") == 1, "b should send one item each to c and g")
    expect(acted(st, "c", "take", "d", 3), "c should take from d at price 3")
    expect(utility(instance, ID["d"], truthful) == 0, "d's truthful utility should be 0")

    expect(_names(sc.top_k) == {"c", "d", "f", "g"}, "after the cut the top four should be c, d, f, g")
    expect(_sent(sc, SELLER, "a") == 3 and _sent(sc, SELLER, "f") == 1, "after the cut a gets 3 items, f gets 1")
    expect(acted(sc, "a", "take", "c"), "after the cut a should take from c")
    expect(acted(sc, "b", "take", "g"), "after the cut b should take from g")
    expect(_sent(sc, "b", "c") == 1, "after the cut b should send one item to c")
    expect(acted(sc, "c", "decline", price=6), "after the cut c should decline at price 6")
    expect(
        deviant.items(ID["d"]) == 1 and deviant.paid(ID["d"]) == 6,
        "after the cut d should obtain an item and pay 6",
    )
    expect(utility(cut, ID["d"], deviant) > 0, "after the cut d's utility should be positive")

    if audit and not problems:
        report = check_strategy_proof(Mechanism("gidm"), instance)
        expect(report is not None and report.buyer == ID["d"], "the strategy-proofness audit should flag d first")
    return problems


def reconstruct_gidm_counterexample(values: Mapping[str, int | Fraction] | None = None) -> AuctionInstance:
    """The counter-example instance; raises :class:`CounterexampleError` if the story breaks."""
    instance = build_instance(CANONICAL if values is None else values)
    problems = narrative_violations(instance, audit=True)
    if problems:
        raise CounterexampleError("; ".join(problems))
    return instance


def _rank_ok(vals: Mapping[str, int], winners: Sequence[str], losers: Sequence[str]) -> bool:
    key = {x: (-vals[x], ID[x]) for x in list(winners) + list(losers)}
    return max(key[w] for w in winners) < min(key[x] for x in losers)


def search_counterexamples(max_value: int = 10) -> Iterator[dict[str, int]]:
    """Integer valuations in ``0..max_value`` for which the whole story replays.

    Valuations failing the cheap parts of the story are skipped before the
    executor runs: who is in each top four, and the take-away victims being
    the lowest-ranked claimants (``c`` overall, then ``e``, then ``g`` once
    ``e`` is cut off).
    """
    rng = range(max_value + 1)
    for c in rng:
        above = range(c + 1, max_value + 1)
        for (d, e, g), f in itertools.product(itertools.product(above, repeat=3), rng):
            base = {"c": c, "d": d, "e": e, "g": g, "f": f}
            if not (_rank_ok(base, "cdeg", "f") and _rank_ok(base, "dg", "e") and _rank_ok(base, "d", "g")):
                continue
            for a, b in itertools.product(range(f + 1), repeat=2):
                vals = dict(base, a=a, b=b)
                if not (_rank_ok(vals, "cdeg", "abf") and _rank_ok(vals, "cdfg", "ab")):
                    continue
                if not narrative_violations(build_instance(vals)):
                    yield vals
