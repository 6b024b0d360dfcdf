from __future__ import annotations

from collections import defaultdict
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from diffauction import AuctionInstance, BuyerType

_criteria: dict[int, str] = {}
_outcomes: dict[int, list[bool]] = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    _criteria[number] = title
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _outcomes[number].append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        results = _outcomes.get(number, [])
        ok = bool(results) and all(results)
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {_criteria[number]}")


# ---------------------------------------------------------------- strategies

values = st.integers(0, 12).map(Fraction) | st.integers(0, 48).map(lambda x: Fraction(x, 4))


@st.composite
def instances(draw, n_min=1, n_max=6, k_min=1, k_max=1, unit=False, cap=12, tree=False):
    """Small random instances; ``tree`` gives every buyer exactly one in-edge."""
    n = draw(st.integers(n_min, n_max))
    k = draw(st.integers(k_min, k_max))
    ids = list(range(1, n + 1))
    seller: set[int] = set()
    out: dict[int, set[int]] = {i: set() for i in ids}
    if tree:
        order = draw(st.permutations(ids))
        placed = [0]
        for node in order:
            host = draw(st.sampled_from(placed))
            (seller if host == 0 else out[host]).add(node)
            placed.append(node)
    else:
        seller = set(draw(st.lists(st.sampled_from(ids), max_size=n)))
        for i in ids:
            out[i] = set(draw(st.lists(st.sampled_from(ids), max_size=3))) - {i}
    buyers = []
    for i in ids:
        if unit:
            vals = [draw(values)] + [Fraction(0)] * (k - 1)
        else:
            vals = sorted(draw(st.lists(values, min_size=k, max_size=k)), reverse=True)
        buyers.append(BuyerType(tuple(vals), frozenset(out[i])))
    return AuctionInstance.create(k, seller, buyers, value_cap=cap)


def chain(*vals, k: int = 1, cap=None) -> AuctionInstance:
    """Path s -> 1 -> 2 -> ... with the given valuation vectors (or single values)."""
    n = len(vals)
    buyers = []
    for i, v in enumerate(vals, start=1):
        vec = tuple(v) if isinstance(v, (tuple, list)) else (v,)
        buyers.append(BuyerType.of(vec, [i + 1] if i < n else []))
    return AuctionInstance.create(k, [1], buyers, value_cap=cap)


def six_buyer_graph(values=(3, 7, 2, 9, 5, 1)) -> AuctionInstance:
    """s -> {1, 6}, 1 -> 3, 6 -> 5, 3 -> 2, 5 -> 4."""
    edges = {1: [3], 2: [], 3: [2], 4: [], 5: [4], 6: [5]}
    buyers = [BuyerType.of([values[i - 1]], edges[i]) for i in range(1, 7)]
    return AuctionInstance.create(1, [1, 6], buyers, value_cap=10)
