"""Auctions over social networks where buyers decide whether to pass the word on."""

from .model import (
    AlignedPath,
    AuctionInstance,
    BuyerType,
    InstanceError,
    Outcome,
    build_apg,
    close_far_split,
    informed_set,
)

__version__ = "0.1.0"

__all__ = [
    "AlignedPath",
    "AuctionInstance",
    "BuyerType",
    "InstanceError",
    "Outcome",
    "build_apg",
    "close_far_split",
    "informed_set",
]
