"""Single-item alpha-APG mechanism.

The item goes to the buyer nearest the seller on the aligned path among those
whose report is at least ``alpha`` times the highest report. Buyers ahead of
the winner are subsidised, buyers behind it pay nothing.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from ..model import ZERO, AuctionInstance, Outcome, build_apg, max_or_zero
from ..numbers import Number, to_fraction
from .errors import PreconditionError


class Group(enum.Enum):
    WINNER_CHEAP = 1  # winner, nothing ahead comes close to what is behind
    AHEAD = 2  # before the winner on the path; receives a subsidy
    WINNER_MAX = 3  # winner whose price is scaled up by 1/alpha
    BEHIND = 4  # after the winner; pays nothing

    @property
    def label(self) -> str:
        return f"Group{self.value}"


@dataclass(frozen=True)
class AlphaApgClassification:
    group: dict[int, Group]
    winner: int | None
    candidate_set: frozenset[int]
    alpha: Fraction
    max_value: Fraction


def check_alpha(alpha: Number) -> Fraction:
    a = to_fraction(alpha)
    if not 0 < a < 1:
        raise PreconditionError(f"alpha must lie strictly between 0 and 1, got {a}")
    return a


def alpha_apg(instance: AuctionInstance, alpha: Number) -> tuple[Outcome, AlphaApgClassification]:
    a = check_alpha(alpha)
    if instance.k != 1:
        raise PreconditionError(f"alpha-APG sells a single item, got k={instance.k}")
    apg = build_apg(instance)
    if not apg.order:
        raise PreconditionError("no buyer is informed, so there is no one to trade with")

    value = {i: instance.buyers[i - 1].valuations[0] for i in apg.order}
    top = max(value.values())
    threshold = a * top
    candidates = frozenset(i for i in apg.order if value[i] >= threshold)
    # the path order is already by position, so the first candidate is the winner
    w = next(i for i in apg.order if i in candidates)
    p = apg.position[w]
    ahead, behind = apg.order[: p - 1], apg.order[p:]

    allocation = {i: 0 for i in apg.order}
    allocation[w] = 1
    payment: dict[int, Fraction] = {}
    group: dict[int, Group] = {}

    best_ahead = max_or_zero(value[j] for j in ahead)
    best_behind = max_or_zero(value[j] for j in behind)
    if best_ahead < a * best_behind:
        group[w] = Group.WINNER_CHEAP
        payment[w] = best_ahead
    else:
        group[w] = Group.WINNER_MAX
        payment[w] = best_ahead / a

    running = ZERO  # highest report strictly ahead of the current buyer
    for j in ahead:
        group[j] = Group.AHEAD
        payment[j] = running - threshold
        running = max(running, value[j])
    for j in behind:
        group[j] = Group.BEHIND
        payment[j] = ZERO

    per_item = {i: (payment[i],) if i != w else (ZERO, payment[i]) for i in apg.order}
    outcome = Outcome(allocation, payment, per_item)
    return outcome, AlphaApgClassification(group, w, candidates, a, top)
