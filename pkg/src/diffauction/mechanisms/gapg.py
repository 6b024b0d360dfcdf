"""Generalized APG for buyers with decreasing marginal values, and its unit-demand variant."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

from ..model import ZERO, AlignedPath, AuctionInstance, Outcome, build_apg, kth_largest
from .errors import PreconditionError


def nk_of(k: int) -> int:
    """Bundle size ``floor(sqrt(k))``, computed in integer arithmetic."""
    if k < 1:
        raise PreconditionError(f"k must be at least 1, got {k}")
    return math.isqrt(k)


@dataclass(frozen=True)
class GapgStatistics:
    nk: int
    sum_valuations: dict[int, Fraction]
    threshold: Fraction


def gapg_statistics(instance: AuctionInstance, apg: AlignedPath | None = None) -> GapgStatistics:
    nk = nk_of(instance.k)
    if apg is None:
        apg = build_apg(instance)
    # insertion order follows the aligned path
    sums = {i: instance.buyers[i - 1].prefix_sum(nk) for i in apg.order}
    return GapgStatistics(nk, sums, kth_largest(sums.values(), nk))


def _rank_payments(
    order: tuple[int, ...],
    score: dict[int, Fraction],
    winners: set[int],
    rank: int,
    loser_base: Fraction,
) -> dict[int, Fraction]:
    """Winners pay the ``rank``-th best score ahead of them; losers receive the gap to ``loser_base``."""
    payment: dict[int, Fraction] = {}
    ahead: list[Fraction] = []
    for i in order:
        ahead_stat = kth_largest(ahead, rank)
        payment[i] = ahead_stat if i in winners else ahead_stat - loser_base
        ahead.append(score[i])
    return payment


def gapg(instance: AuctionInstance) -> Outcome:
    """Every winner takes a bundle of ``floor(sqrt(k))`` items; the rest are discarded.

    Winners are the (at most ``nk``) informed buyers whose bundle value reaches
    the ``nk``-th largest one, larger bundle value first, smaller id on ties.
    """
    apg = build_apg(instance)
    stats = gapg_statistics(instance, apg)
    nk, sums = stats.nk, stats.sum_valuations
    qualifying = sorted((i for i in sums if sums[i] >= stats.threshold), key=lambda i: (-sums[i], i))
    winners = set(qualifying[:nk])
    order = apg.order
    allocation = {i: (nk if i in winners else 0) for i in order}
    payment = _rank_payments(order, sums, winners, nk, stats.threshold)
    return Outcome(allocation, payment)


Reading = Literal["kth", "max"]


def gapg_top_k_unit(instance: AuctionInstance, reading: Reading = "kth") -> Outcome:
    """Unit-demand variant: the ``k`` highest first-item values each win one item.

    Payments mirror GAPG with single-item bundles. ``reading`` picks the rank
    used for both the "best report ahead" price and the losers' base amount:
    ``"kth"`` uses the k-th largest (the rank that decides winning), ``"max"``
    uses the largest.
    """
    if reading not in ("kth", "max"):
        raise PreconditionError(f"unknown reading {reading!r}")
    k = instance.k
    apg = build_apg(instance)
    value = {i: instance.buyers[i - 1].valuations[0] for i in apg.order}
    ranked = sorted(apg.order, key=lambda i: (-value[i], i))
    winners = set(ranked[:k])
    rank = k if reading == "kth" else 1
    base = kth_largest(value.values(), rank)
    allocation = {i: (1 if i in winners else 0) for i in apg.order}
    payment = _rank_payments(apg.order, value, winners, rank, base)
    per_item = {i: (ZERO, payment[i]) if i in winners else (payment[i],) for i in apg.order}
    return Outcome(allocation, payment, per_item)
