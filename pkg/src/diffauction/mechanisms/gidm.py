"""Tree-scoped executor for the revised generalized information diffusion mechanism.

Unit-demand buyers, declared diffusion graph a tree under the seller. Items
flow down the tree towards the top-k buyers; a holder outside the top k may
keep one item for herself by paying the drop in everyone else's surplus.

Reading of the procedure implemented here:

* The seller hands each child as many items as there are top-k buyers
  (value descending, smaller id first) in that child's subtree.
* Buyers act top-down, by depth and then id. A buyer holding items computes
  a price with every buyer already settled on an item held fixed:
  ``best(rest minus own subtree, r) - best(rest minus self, r - 1)``, floored
  at 0, where ``rest`` is every informed unsettled buyer, ``r`` the number of
  items not yet settled and ``best(S, m)`` the sum of the ``m`` largest values
  in ``S``.
* A top-k holder keeps one item at that price. Any other holder takes one
  iff the price is below her value; the lowest-ranked top-k buyer below her
  then loses its claim.
* Remaining items are forwarded to children by their count of top-k claims.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..model import ZERO, AuctionInstance, Outcome, bfs_distances
from ..numbers import format_exact
from .errors import PreconditionError

SELLER = 0


@dataclass(frozen=True)
class TraceEvent:
    kind: str  # "send", "take", "keep" or "decline"
    buyer: int  # acting party; SELLER for the initial hand-out
    other: int | None = None  # recipient of a send, or the buyer taken from
    items: int = 0
    price: Fraction | None = None

    def describe(self, name) -> str:
        who = "seller" if self.buyer == SELLER else name(self.buyer)
        if self.kind == "send":
            return f"{who} sends {self.items} to {name(self.other)}"
        if self.kind == "take":
            return f"{who} takes from {name(self.other)} at price {_fmt(self.price)}"
        if self.kind == "keep":
            return f"{who} keeps an item at price {_fmt(self.price)}"
        return f"{who} declines at price {_fmt(self.price)}"


def _fmt(x: Fraction | None) -> str:
    return "-" if x is None else format_exact(x)


@dataclass
class GidmTreeState:
    parent: dict[int, int]
    top_k: frozenset[int]
    holdings: dict[int, int] = field(default_factory=dict)
    fixed_allocations: list[int] = field(default_factory=list)
    prices: dict[int, Fraction] = field(default_factory=dict)
    trace: list[TraceEvent] = field(default_factory=list)

    def lines(self, instance: AuctionInstance) -> list[str]:
        return [e.describe(instance.name) for e in self.trace]


def diffusion_tree(instance: AuctionInstance) -> dict[int, int]:
    """Parent of every informed buyer; raises unless declared edges form a tree under the seller."""
    informed = bfs_distances(instance)
    parent: dict[int, int] = {}
    sources = [(SELLER, instance.seller_neighbors)]
    sources += [(i, instance.buyers[i - 1].neighbors) for i in informed]
    for src, targets in sources:
        for j in targets:
            if j in parent:
                raise PreconditionError(
                    f"buyer {instance.name(j)} is reached by more than one declared edge; "
                    "the executor only handles trees"
                )
            parent[j] = src
    return parent


def _best(values: list[Fraction], m: int) -> Fraction:
    if m <= 0:
        return ZERO
    return sum(sorted(values, reverse=True)[:m], ZERO)


def gidm_revised(instance: AuctionInstance) -> tuple[Outcome, GidmTreeState]:
    parent = diffusion_tree(instance)
    informed = sorted(parent)
    for i in informed:
        if any(v > 0 for v in instance.buyers[i - 1].valuations[1:]):
            raise PreconditionError(f"buyer {instance.name(i)} values more than one item")

    k = instance.k
    value = {i: instance.buyers[i - 1].valuations[0] for i in informed}
    rank = {i: r for r, i in enumerate(sorted(informed, key=lambda i: (-value[i], i)))}
    top_k = frozenset(i for i in informed if rank[i] < k)

    children: dict[int, list[int]] = {SELLER: []}
    for i in informed:
        children.setdefault(i, [])
    for j in informed:
        children[parent[j]].append(j)
    subtree: dict[int, frozenset[int]] = {}
    depth = {SELLER: 0}
    stack = [SELLER]
    visit: list[int] = []
    while stack:
        u = stack.pop()
        visit.append(u)
        for c in children[u]:
            depth[c] = depth[u] + 1
            stack.append(c)
    for u in reversed(visit):
        subtree[u] = frozenset([u]).union(*(subtree[c] for c in children[u]))

    state = GidmTreeState(parent, top_k)
    claims = set(top_k)
    received = {i: 0 for i in informed}
    allocation = {i: 0 for i in informed}
    payment = {i: ZERO for i in informed}

    def forward(u: int) -> None:
        for c in sorted(children[u]):
            m = len(claims & subtree[c])
            if m:
                received[c] += m
                state.trace.append(TraceEvent("send", u, c, m))

    forward(SELLER)
    for i in sorted(informed, key=lambda i: (depth[i], i)):
        if received[i] == 0:
            continue
        settled = set(state.fixed_allocations)
        rest = [j for j in informed if j not in settled]
        r = k - len(settled)
        with_i = _best([value[j] for j in rest if j != i], r - 1)
        without_i = _best([value[j] for j in rest if j not in subtree[i]], r)
        price = max(ZERO, without_i - with_i)

        if i in claims:
            claims.discard(i)
            state.trace.append(TraceEvent("keep", i, items=1, price=price))
            settle = True
        elif price < value[i]:
            below = [j for j in claims if j in subtree[i]]
            victim = max(below, key=rank.__getitem__)
            claims.discard(victim)
            state.trace.append(TraceEvent("take", i, victim, 1, price))
            settle = True
        else:
            state.trace.append(TraceEvent("decline", i, price=price))
            settle = False
        state.prices[i] = price
        if settle:
            allocation[i] = 1
            payment[i] = price
            state.fixed_allocations.append(i)
        forward(i)

    state.holdings = dict(allocation)
    return Outcome(allocation, payment), state
