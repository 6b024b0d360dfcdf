"""Auction model for a seller who can only reach buyers through their network.

Buyers are numbered ``1..n``. Each declares a non-increasing vector of ``k``
marginal values and the set of neighbors it forwards the auction to. A buyer
takes part only if a chain of declared forwarding edges leads to it from the
seller. Informed buyers are lined up on the *aligned path*: sorted by their
breadth-first distance from the seller, smaller id first on ties.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .numbers import Number, to_fraction

ZERO = Fraction(0)


class InstanceError(ValueError):
    """Raised for malformed auction instances."""


@dataclass(frozen=True)
class BuyerType:
    """A (true or declared) type: marginal values and forwarding neighbors."""

    valuations: tuple[Fraction, ...]
    neighbors: frozenset[int] = frozenset()

    @classmethod
    def of(cls, valuations: Iterable[Number], neighbors: Iterable[int] = ()) -> BuyerType:
        return cls(tuple(to_fraction(v) for v in valuations), frozenset(neighbors))

    def padded(self, k: int) -> BuyerType:
        if len(self.valuations) >= k:
            return self
        return BuyerType(self.valuations + (ZERO,) * (k - len(self.valuations)), self.neighbors)

    def prefix_sum(self, m: int) -> Fraction:
        return sum(self.valuations[:m], ZERO)


def _check_type(owner: int, t: BuyerType, n: int, k: int, cap: Fraction | None, what: str) -> None:
    vals = t.valuations
    if len(vals) != k:
        raise InstanceError(f"buyer {owner}: {what} has {len(vals)} valuations, expected k={k}")
    for a, b in zip(vals, vals[1:]):
        if a < b:
            raise InstanceError(f"buyer {owner}: {what} valuations must be non-increasing")
    if vals and vals[-1] < 0:
        raise InstanceError(f"buyer {owner}: {what} valuations must be non-negative")
    if cap is not None and vals and vals[0] > cap:
        raise InstanceError(f"buyer {owner}: {what} valuation {vals[0]} exceeds cap {cap}")
    if owner in t.neighbors:
        raise InstanceError(f"buyer {owner}: {what} neighbors contain the buyer itself")
    for j in t.neighbors:
        if not 1 <= j <= n:
            raise InstanceError(f"buyer {owner}: {what} neighbor {j} is not in 1..{n}")


@dataclass(frozen=True)
class AuctionInstance:
    """Seller's neighbors, every buyer's declared type, item count and value cap.

    ``buyers[i - 1]`` is buyer ``i``'s declared type. ``true_types`` is only
    attached in verification contexts; declared neighbor sets must then be
    subsets of the true ones.
    """

    k: int
    seller_neighbors: frozenset[int]
    buyers: tuple[BuyerType, ...]
    value_cap: Fraction | None = None
    true_types: tuple[BuyerType, ...] | None = None
    labels: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.k < 1:
            raise InstanceError(f"k must be a positive integer, got {self.k}")
        n = len(self.buyers)
        cap = self.value_cap
        if cap is not None and cap < 0:
            raise InstanceError("value cap must be non-negative")
        for j in self.seller_neighbors:
            if not 1 <= j <= n:
                raise InstanceError(f"seller neighbor {j} is not in 1..{n}")
        for i, t in enumerate(self.buyers, start=1):
            _check_type(i, t, n, self.k, cap, "declared")
        if self.true_types is not None:
            if len(self.true_types) != n:
                raise InstanceError("true profile must list every buyer")
            for i, (d, t) in enumerate(zip(self.buyers, self.true_types), start=1):
                _check_type(i, t, n, self.k, cap, "true")
                if not d.neighbors <= t.neighbors:
                    raise InstanceError(
                        f"buyer {i}: declared neighbors {sorted(d.neighbors)} are not a subset "
                        f"of true neighbors {sorted(t.neighbors)}"
                    )
        if self.labels is not None and len(self.labels) != n:
            raise InstanceError("labels must name every buyer")

    @classmethod
    def create(
        cls,
        k: int,
        seller_neighbors: Iterable[int],
        buyers: Sequence[BuyerType] | Mapping[int, BuyerType],
        value_cap: Number | None = None,
        true_types: Sequence[BuyerType] | Mapping[int, BuyerType] | None = None,
        labels: Sequence[str] | None = None,
    ) -> AuctionInstance:
        """Build an instance, zero-padding short valuation vectors to length ``k``."""

        def ordered(types: Sequence[BuyerType] | Mapping[int, BuyerType]) -> tuple[BuyerType, ...]:
            if isinstance(types, Mapping):
                ids = sorted(types)
                if ids != list(range(1, len(ids) + 1)):
                    raise InstanceError(f"buyer ids must be 1..n without gaps, got {ids}")
                types = [types[i] for i in ids]
            return tuple(t.padded(k) for t in types)

        return cls(
            k=k,
            seller_neighbors=frozenset(seller_neighbors),
            buyers=ordered(buyers),
            value_cap=None if value_cap is None else to_fraction(value_cap),
            true_types=None if true_types is None else ordered(true_types),
            labels=None if labels is None else tuple(labels),
        )

    @property
    def n(self) -> int:
        return len(self.buyers)

    @property
    def ids(self) -> range:
        return range(1, len(self.buyers) + 1)

    def declared(self, i: int) -> BuyerType:
        return self.buyers[i - 1]

    def true_type(self, i: int) -> BuyerType:
        """True type when a true profile is attached, else the declaration."""
        if self.true_types is None:
            return self.buyers[i - 1]
        return self.true_types[i - 1]

    def name(self, i: int) -> str:
        return self.labels[i - 1] if self.labels else str(i)

    def with_declared(self, i: int, t: BuyerType) -> AuctionInstance:
        """Same instance with buyer ``i`` declaring ``t`` instead.

        The current declarations become the true profile if none was attached.
        """
        buyers = list(self.buyers)
        buyers[i - 1] = t
        true_types = self.true_types if self.true_types is not None else self.buyers
        return AuctionInstance(
            self.k, self.seller_neighbors, tuple(buyers), self.value_cap, true_types, self.labels
        )

    def truthful_for(self, i: int) -> AuctionInstance:
        """Profile where ``i`` reports its true type and everyone else keeps their report."""
        if self.true_types is None or self.true_types[i - 1] == self.buyers[i - 1]:
            return self
        return self.with_declared(i, self.true_types[i - 1])

    def all_truthful(self) -> AuctionInstance:
        if self.true_types is None:
            return self
        return AuctionInstance(
            self.k, self.seller_neighbors, self.true_types, self.value_cap, self.true_types, self.labels
        )


@dataclass(frozen=True)
class AlignedPath:
    """Informed buyers lined up nearest-first; positions are 1-based."""

    order: tuple[int, ...]
    position: Mapping[int, int]
    bfs_distance: Mapping[int, int]

    def __contains__(self, i: object) -> bool:
        return i in self.position

    def __len__(self) -> int:
        return len(self.order)


@dataclass(frozen=True)
class Outcome:
    """Items per buyer and money paid by each buyer.

    ``net_payment`` is money paid to the seller; a negative entry is a subsidy
    received. Buyers absent from either mapping get nothing and pay nothing.
    ``per_item_payments`` maps a buyer to ``(p_0, p_1, ..., p_f)`` where
    ``p_0`` is the transfer owed when no item is received.
    """

    allocation: Mapping[int, int]
    net_payment: Mapping[int, Fraction]
    per_item_payments: Mapping[int, tuple[Fraction, ...]] | None = None

    def items(self, i: int) -> int:
        return self.allocation.get(i, 0)

    def paid(self, i: int) -> Fraction:
        return self.net_payment.get(i, ZERO)

    @property
    def winners(self) -> frozenset[int]:
        return frozenset(i for i, f in self.allocation.items() if f > 0)

    @property
    def items_allocated(self) -> int:
        return sum(self.allocation.values())

    @property
    def revenue(self) -> Fraction:
        return sum(self.net_payment.values(), ZERO)


def bfs_distances(instance: AuctionInstance) -> dict[int, int]:
    """Hop distance from the seller to every informed buyer over declared edges."""
    dist: dict[int, int] = {}
    queue: deque[int] = deque()
    for j in sorted(instance.seller_neighbors):
        dist[j] = 1
        queue.append(j)
    buyers = instance.buyers
    while queue:
        i = queue.popleft()
        d = dist[i] + 1
        for j in buyers[i - 1].neighbors:
            if j not in dist:
                dist[j] = d
                queue.append(j)
    return dist


def informed_set(instance: AuctionInstance) -> frozenset[int]:
    """Buyers reachable from the seller along declared forwarding edges."""
    return frozenset(bfs_distances(instance))


def build_apg(instance: AuctionInstance) -> AlignedPath:
    dist = bfs_distances(instance)
    order = tuple(sorted(dist, key=lambda i: (dist[i], i)))
    position = {i: p for p, i in enumerate(order, start=1)}
    return AlignedPath(order, position, dist)


def close_far_split(apg: AlignedPath, i: int) -> tuple[frozenset[int], frozenset[int]]:
    """Buyers strictly before and strictly after ``i`` on the aligned path."""
    if i not in apg.position:
        raise KeyError(f"buyer {i} is not informed, so it has no place on the aligned path")
    p = apg.position[i]
    return frozenset(apg.order[: p - 1]), frozenset(apg.order[p:])


def kth_largest(values: Iterable[Fraction], k: int) -> Fraction:
    """The ``k``-th largest value, or 0 when there are fewer than ``k`` values."""
    ranked = sorted(values, reverse=True)
    return ranked[k - 1] if len(ranked) >= k else ZERO


def max_or_zero(values: Iterable[Fraction]) -> Fraction:
    return max(values, default=ZERO)
