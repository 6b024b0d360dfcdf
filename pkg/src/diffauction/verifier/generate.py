"""Seeded random instances over a handful of network shapes."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Iterator

from ..model import AuctionInstance, BuyerType
from ..numbers import Number, to_fraction

TOPOLOGIES = ("path", "star", "random-tree", "random-graph")
DISTRIBUTIONS = ("int", "quarter", "zero")


def _draw(rng: random.Random, distribution: str, cap: Fraction) -> Fraction:
    if distribution == "zero":
        return Fraction(0)
    if distribution == "int":
        return Fraction(rng.randint(0, int(cap)))
    if distribution == "quarter":
        return Fraction(rng.randint(0, int(4 * cap)), 4)
    raise ValueError(f"unknown value distribution {distribution!r}; choose from {DISTRIBUTIONS}")


def _edges(rng: random.Random, n: int, topology: str, max_out: int, edge_prob: float):
    """Seller's neighbors and every buyer's neighbor set; every buyer is reachable."""
    seller: set[int] = set()
    out: dict[int, set[int]] = {i: set() for i in range(1, n + 1)}
    if topology == "path":
        seller.add(1)
        for i in range(1, n):
            out[i].add(i + 1)
        return seller, out
    if topology == "star":
        return set(range(1, n + 1)), out
    if topology not in ("random-tree", "random-graph"):
        raise ValueError(f"unknown topology {topology!r}; choose from {TOPOLOGIES}")

    # attach buyers in a random order so ids do not follow the tree depth
    order = list(range(1, n + 1))
    rng.shuffle(order)
    placed = [0]
    for node in order:
        hosts = [u for u in placed if u == 0 or len(out[u]) < max_out]
        host = rng.choice(hosts)
        (seller if host == 0 else out[host]).add(node)
        placed.append(node)
    if topology == "random-graph":
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if i != j and len(out[i]) < max_out and rng.random() < edge_prob:
                    out[i].add(j)
            if rng.random() < edge_prob / 2:
                seller.add(i)
    return seller, out


def gen_instance(
    n: int,
    k: int = 1,
    topology: str = "random-graph",
    distribution: str = "int",
    seed: int = 0,
    value_cap: Number = 10,
    max_out_degree: int = 5,
    edge_prob: float = 0.25,
    unit_demand: bool = False,
) -> AuctionInstance:
    """A reproducible instance: the same arguments always give the same instance.

    Valuations are drawn per buyer then sorted non-increasing; with
    ``unit_demand`` only the first marginal is drawn.
    """
    if n < 1:
        raise ValueError("need at least one buyer")
    if topology not in TOPOLOGIES:
        raise ValueError(f"unknown topology {topology!r}; choose from {TOPOLOGIES}")
    cap = to_fraction(value_cap)
    rng = random.Random(f"{seed}:{n}:{k}:{topology}:{distribution}:{unit_demand}")
    seller, out = _edges(rng, n, topology, max_out_degree, edge_prob)
    buyers = []
    for i in range(1, n + 1):
        if unit_demand:
            vals = [_draw(rng, distribution, cap)] + [Fraction(0)] * (k - 1)
        else:
            vals = sorted((_draw(rng, distribution, cap) for _ in range(k)), reverse=True)
        buyers.append(BuyerType(tuple(vals), frozenset(out[i])))
    return AuctionInstance.create(k, seller, buyers, value_cap=cap)


def gen_corpus(count: int, seed: int = 0, **params) -> Iterator[AuctionInstance]:
    """``count`` instances; ``n``, ``k`` or ``topology`` may be sequences to cycle through."""
    rng = random.Random(seed)
    for idx in range(count):
        chosen = {}
        for key, val in params.items():
            chosen[key] = rng.choice(val) if isinstance(val, (list, tuple)) else val
        yield gen_instance(seed=seed * 1_000_003 + idx, **chosen)
