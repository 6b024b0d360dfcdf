"""Mechanisms and a small registry binding their parameters by name."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..model import AuctionInstance, Outcome
from .alpha_apg import AlphaApgClassification, Group, alpha_apg, check_alpha
from .errors import PreconditionError
from .gapg import GapgStatistics, gapg, gapg_statistics, gapg_top_k_unit, nk_of
from .gidm import GidmTreeState, TraceEvent, diffusion_tree, gidm_revised

NAMES = ("alpha-apg", "gapg", "gapg-topk", "gidm")


@dataclass(frozen=True)
class Mechanism:
    """A named mechanism with its parameters bound; calling it yields the outcome.

    Instances are plain data so they pickle into worker processes.
    """

    name: str
    alpha: Fraction | None = None
    reading: str = "kth"

    def __post_init__(self) -> None:
        if self.name not in NAMES:
            raise ValueError(f"unknown mechanism {self.name!r}; choose from {', '.join(NAMES)}")
        if self.name == "alpha-apg":
            if self.alpha is None:
                raise ValueError("alpha-apg needs alpha")
            object.__setattr__(self, "alpha", check_alpha(self.alpha))

    def __call__(self, instance: AuctionInstance) -> Outcome:
        if self.name == "alpha-apg":
            return alpha_apg(instance, self.alpha)[0]
        if self.name == "gapg":
            return gapg(instance)
        if self.name == "gapg-topk":
            return gapg_top_k_unit(instance, self.reading)
        return gidm_revised(instance)[0]

    @property
    def focus(self) -> str:
        """Which part of a valuation vector the mechanism reads."""
        return "bundle" if self.name == "gapg" else "unit"

    @property
    def label(self) -> str:
        if self.name == "alpha-apg":
            return f"alpha-apg(alpha={self.alpha})"
        if self.name == "gapg-topk":
            return f"gapg-topk(reading={self.reading})"
        return self.name


__all__ = [
    "NAMES",
    "AlphaApgClassification",
    "GapgStatistics",
    "GidmTreeState",
    "Group",
    "Mechanism",
    "PreconditionError",
    "TraceEvent",
    "alpha_apg",
    "diffusion_tree",
    "gapg",
    "gapg_statistics",
    "gapg_top_k_unit",
    "gidm_revised",
    "nk_of",
]
