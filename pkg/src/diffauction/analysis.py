"""Welfare, utility and revenue accounting for mechanism outcomes.

Everything is measured with *true* valuations when the instance carries a
true profile, and with the declarations otherwise.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

from .model import ZERO, AuctionInstance, BuyerType, InstanceError, Outcome, informed_set
from .numbers import Number, to_fraction

MechanismFn = Callable[[AuctionInstance], Outcome]


@dataclass(frozen=True)
class WelfareReport:
    achieved: Fraction
    optimal: Fraction

    @property
    def ratio(self) -> Fraction:
        """``achieved / optimal``; 1 when there is nothing to gain."""
        return Fraction(1) if self.optimal == 0 else self.achieved / self.optimal


@dataclass(frozen=True)
class RevenueReport:
    revenue: Fraction
    normalized: Fraction | None = None


def optimal_welfare(instance: AuctionInstance) -> Fraction:
    """Best feasible surplus: the ``k`` largest marginal values pooled over informed buyers.

    Greedy is exact because every buyer's marginals are non-increasing, so any
    prefix-closed choice of the largest marginals is a valid allocation.
    """
    pool = (v for i in informed_set(instance) for v in instance.true_type(i).valuations)
    return sum(heapq.nlargest(instance.k, pool), ZERO)


def achieved_welfare(instance: AuctionInstance, outcome: Outcome) -> Fraction:
    informed = informed_set(instance)
    total = ZERO
    for i, f in outcome.allocation.items():
        if f == 0:
            continue
        if i not in informed:
            raise InstanceError(f"outcome gives {f} item(s) to uninformed buyer {i}")
        total += sum(instance.true_type(i).valuations[:f], ZERO)
    return total


def utility(instance: AuctionInstance, buyer: int, outcome: Outcome) -> Fraction:
    """Quasi-linear utility: true value of the items received minus money paid."""
    f = outcome.items(buyer)
    value = sum(instance.true_type(buyer).valuations[:f], ZERO) if f else ZERO
    return value - outcome.paid(buyer)


def welfare_report(instance: AuctionInstance, outcome: Outcome) -> WelfareReport:
    return WelfareReport(achieved_welfare(instance, outcome), optimal_welfare(instance))


def revenue_report(instance: AuctionInstance, outcome: Outcome) -> RevenueReport:
    revenue = outcome.revenue
    cap = instance.value_cap
    if cap is None or cap <= 0 or instance.n < 2:
        return RevenueReport(revenue)
    return RevenueReport(revenue, 1 + revenue / ((instance.n - 1) * cap))


def empirical_efficiency(mechanism: MechanismFn, corpus: Iterable[AuctionInstance]) -> Fraction:
    """Smallest welfare ratio over the corpus.

    This only bounds the worst case from above: it is a minimum over the
    sampled profiles, not over every profile.
    """
    ratios = [welfare_report(inst, mechanism(inst)).ratio for inst in corpus]
    if not ratios:
        raise ValueError("empirical efficiency needs a non-empty corpus")
    return min(ratios)


def empirical_beta(mechanism: MechanismFn, corpus: Iterable[AuctionInstance], v_star: Number) -> Fraction:
    """``1 + min revenue / ((n - 1) v*)`` over the corpus, with ``n`` counting every buyer."""
    cap = to_fraction(v_star)
    corpus = list(corpus)
    if not corpus:
        raise ValueError("empirical beta needs a non-empty corpus")
    sizes = {inst.n for inst in corpus}
    if len(sizes) != 1:
        raise ValueError(f"corpus mixes buyer counts {sorted(sizes)}")
    (n,) = sizes
    if n < 2 or cap <= 0:
        raise ValueError("beta needs at least two buyers and a positive value cap")
    worst = min(mechanism(inst).revenue for inst in corpus)
    return 1 + worst / ((n - 1) * cap)


# Witness families: hand-built profiles on which the worst-case bounds are met.


def _path(values: Iterable[Number], k: int, cap: Number) -> AuctionInstance:
    vals = [to_fraction(v) for v in values]
    n = len(vals)
    buyers = [
        BuyerType((v,) + (ZERO,) * (k - 1), frozenset({i + 1}) if i < n else frozenset())
        for i, v in enumerate(vals, start=1)
    ]
    return AuctionInstance.create(k, [1], buyers, value_cap=to_fraction(cap))


def efficiency_witness(alpha: Number, n: int = 5, cap: Number = 10) -> AuctionInstance:
    """Path whose nearest buyer reports ``alpha * cap`` just ahead of a buyer at the cap.

    Alpha-APG sells to the nearer buyer, so welfare is exactly ``alpha`` of optimal.
    """
    if n < 2:
        raise ValueError("the efficiency witness needs two buyers")
    c = to_fraction(cap)
    return _path([to_fraction(alpha) * c, c] + [ZERO] * (n - 2), 1, c)


def beta_witness(n: int = 5, cap: Number = 10) -> AuctionInstance:
    """Path of zero-value buyers with the farthest one at the cap.

    Every buyer ahead of the winner is subsidised ``alpha * cap``, which drives
    the normalized revenue down to ``1 - alpha``.
    """
    if n < 2:
        raise ValueError("the beta witness needs two buyers")
    return _path([ZERO] * (n - 1) + [to_fraction(cap)], 1, cap)


def flat_witness(k: int, n: int = 1, cap: Number = 10) -> AuctionInstance:
    """One buyer valuing every item at the cap, the other ``n - 1`` buyers at 0.

    GAPG hands the valuable buyer only ``isqrt(k)`` items.
    """
    c = to_fraction(cap)
    buyers = [BuyerType((c,) * k, frozenset({2}) if n > 1 else frozenset())]
    buyers += [
        BuyerType((ZERO,) * k, frozenset({i + 1}) if i < n else frozenset()) for i in range(2, n + 1)
    ]
    return AuctionInstance.create(k, [1], buyers, value_cap=c)
