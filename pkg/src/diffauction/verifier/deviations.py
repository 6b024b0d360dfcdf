"""Finite sets of misreports that cover every outcome region of the implemented mechanisms.

Each mechanism's outcome is piecewise constant in one buyer's report, with
breakpoints at statistics of the other reports (their values, bundle sums,
alpha-scalings of those, and prices). Probing each breakpoint, a hair on
either side of it, 0 and the cap reaches every region.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Literal

from ..model import ZERO, AuctionInstance, BuyerType, informed_set

DEFAULT_EPSILON = Fraction(1, 1000)
MAX_NEIGHBORS = 12

Focus = Literal["unit", "first", "bundle", "both"]


class DeviationLimitError(ValueError):
    """The buyer has too many neighbors to enumerate every withheld subset."""


@dataclass(frozen=True)
class Deviation:
    buyer: int
    valuations: tuple[Fraction, ...]
    neighbors: frozenset[int]

    def as_type(self) -> BuyerType:
        return BuyerType(self.valuations, self.neighbors)


def neighbor_subsets(neighbors: Iterable[int], limit: int = MAX_NEIGHBORS) -> list[frozenset[int]]:
    """Every subset, largest first, lexicographic within a size."""
    items = sorted(neighbors)
    if len(items) > limit:
        raise DeviationLimitError(
            f"{len(items)} neighbors means {2 ** len(items)} subsets; the limit is {limit} neighbors"
        )
    return [
        frozenset(c)
        for size in range(len(items), -1, -1)
        for c in itertools.combinations(items, size)
    ]


def _around(points: Iterable[Fraction], epsilon: Fraction, lo: Fraction, hi: Fraction) -> list[Fraction]:
    out = set()
    for x in points:
        for y in (x - epsilon, x, x + epsilon):
            if lo <= y <= hi:
                out.add(y)
    return sorted(out)


def _effective_cap(instance: AuctionInstance, stats: Iterable[Fraction]) -> Fraction:
    if instance.value_cap is not None:
        return instance.value_cap
    seen = [v for t in instance.buyers for v in t.valuations]
    if instance.true_types is not None:
        seen += [v for t in instance.true_types for v in t.valuations]
    return 2 * max(itertools.chain(seen, stats), default=ZERO) + 1


def deviation_set(
    instance: AuctionInstance,
    buyer: int,
    *,
    alpha: Fraction | None = None,
    epsilon: Fraction = DEFAULT_EPSILON,
    max_neighbors: int = MAX_NEIGHBORS,
    focus: Focus | None = None,
    extra_points: Iterable[Fraction] = (),
) -> list[Deviation]:
    """All (valuation probe, withheld-neighbor subset) combinations for ``buyer``.

    The truthful valuation comes first, so pure diffusion deviations are
    tried before any value misreport.

    ``focus`` says which part of the report the mechanism reads: ``"unit"``
    probes the first marginal with the rest zero, ``"first"`` also tries a
    flat tail, ``"bundle"`` probes the sum of the first ``floor(sqrt(k))``
    marginals and ``"both"`` combines the last two. It defaults to ``"unit"``
    for one item and ``"both"`` otherwise. ``extra_points`` adds
    mechanism-specific breakpoints such as observed prices.
    """
    k = instance.k
    nk = math.isqrt(k)
    if focus is None:
        focus = "unit" if k == 1 else "both"
    true_t = instance.true_type(buyer)
    base = instance.truthful_for(buyer)
    others = sorted(informed_set(base) - {buyer})

    firsts = [base.buyers[j - 1].valuations[0] for j in others]
    sums = [base.buyers[j - 1].prefix_sum(nk) for j in others] if k > 1 else []
    extra = [abs(x) for x in extra_points]
    cap = _effective_cap(instance, firsts + sums + extra)

    def scaled(points: list[Fraction]) -> list[Fraction]:
        if alpha is None:
            return points
        return points + [alpha * x for x in points] + [x / alpha for x in points]

    vectors: list[tuple[Fraction, ...]] = [true_t.valuations]
    if focus != "bundle":
        for c in _around(scaled(firsts + extra) + [ZERO, cap], epsilon, ZERO, cap):
            vectors.append((c,) + (ZERO,) * (k - 1))
            if k > 1 and focus != "unit":
                vectors.append((c,) * k)
    if focus in ("bundle", "both") and k > 1:
        for t in _around(scaled(sums + extra) + [ZERO, nk * cap], epsilon, ZERO, nk * cap):
            flat = t / nk
            vectors.append((flat,) * nk + (ZERO,) * (k - nk))
            front, left = [], t
            for _ in range(nk):
                x = min(cap, left)
                front.append(x)
                left -= x
            vectors.append(tuple(front) + (front[-1],) * (k - nk))

    seen: set[tuple[Fraction, ...]] = set()
    unique = []
    for v in vectors:
        if v not in seen:
            seen.add(v)
            unique.append(v)

    subsets = neighbor_subsets(true_t.neighbors, max_neighbors)
    return [Deviation(buyer, v, subset) for v in unique for subset in subsets]
