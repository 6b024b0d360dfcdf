"""JSON instance files with exact numerics.

Numbers may be written as JSON numbers (read exactly, never through binary
floats) or as strings such as ``"1/3"``. Serialization writes terminating
decimals as plain JSON numbers and everything else as ``"p/q"`` strings.

Layout::

    {
      "k": 1,
      "value_cap": 10,
      "alpha": 0.5,
      "seller_neighbors": [1],
      "buyers": [{"id": 1, "label": "a", "valuations": [4], "neighbors": [2]}, ...],
      "true_profile": [{"id": 1, "valuations": [4], "neighbors": [2]}, ...]
    }

``value_cap``, ``alpha``, ``label`` and ``true_profile`` are optional.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path
from typing import Any

from .model import AuctionInstance, BuyerType, InstanceError
from .numbers import format_exact, to_fraction

_MARK = "\x00num:"
_MARK_RE = re.compile(r'"\\u0000num:([^"\\]*)\\u0000"')


class InstanceFormatError(ValueError):
    """The document is not a valid instance; the message names the line or field."""


def _number(raw: Any, where: str) -> Fraction:
    if isinstance(raw, bool) or not isinstance(raw, (int, str, Fraction)):
        raise InstanceFormatError(f"{where}: expected a number, got {raw!r}")
    try:
        return to_fraction(raw)
    except (ValueError, ZeroDivisionError, TypeError):
        raise InstanceFormatError(f"{where}: {raw!r} is not a number") from None


def _ids(raw: Any, where: str) -> list[int]:
    if not isinstance(raw, list):
        raise InstanceFormatError(f"{where}: expected a list of buyer ids")
    out = []
    for idx, x in enumerate(raw):
        if isinstance(x, bool) or not isinstance(x, int):
            raise InstanceFormatError(f"{where}[{idx}]: buyer ids are integers, got {x!r}")
        out.append(x)
    if len(set(out)) != len(out):
        dup = sorted({x for x in out if out.count(x) > 1})
        raise InstanceFormatError(f"{where}: duplicate edge(s) to {dup}")
    return out


def _profile(raw: Any, where: str) -> tuple[list[BuyerType], list[str | None]]:
    if not isinstance(raw, list) or not raw:
        raise InstanceFormatError(f"{where}: expected a non-empty list of buyers")
    by_id: dict[int, tuple[BuyerType, str | None]] = {}
    for idx, entry in enumerate(raw):
        at = f"{where}[{idx}]"
        if not isinstance(entry, dict):
            raise InstanceFormatError(f"{at}: expected an object")
        unknown = set(entry) - {"id", "label", "valuations", "neighbors"}
        if unknown:
            raise InstanceFormatError(f"{at}: unknown field(s) {sorted(unknown)}")
        bid = entry.get("id")
        if isinstance(bid, bool) or not isinstance(bid, int):
            raise InstanceFormatError(f"{at}.id: expected an integer")
        if bid in by_id:
            raise InstanceFormatError(f"{at}.id: buyer {bid} listed twice")
        vals = entry.get("valuations")
        if not isinstance(vals, list):
            raise InstanceFormatError(f"{at}.valuations: expected a list")
        neighbors = _ids(entry.get("neighbors", []), f"{at}.neighbors")
        if bid in neighbors:
            raise InstanceFormatError(f"{at}.neighbors: buyer {bid} lists itself")
        label = entry.get("label")
        if label is not None and not isinstance(label, str):
            raise InstanceFormatError(f"{at}.label: expected a string")
        t = BuyerType(
            tuple(_number(v, f"{at}.valuations[{j}]") for j, v in enumerate(vals)),
            frozenset(neighbors),
        )
        by_id[bid] = (t, label)
    ids = sorted(by_id)
    if ids != list(range(1, len(ids) + 1)):
        raise InstanceFormatError(f"{where}: buyer ids must be 1..n without gaps, got {ids}")
    return [by_id[i][0] for i in ids], [by_id[i][1] for i in ids]


def instance_from_dict(doc: Any) -> tuple[AuctionInstance, Fraction | None]:
    """Parse a decoded document into ``(instance, alpha or None)``."""
    if not isinstance(doc, dict):
        raise InstanceFormatError("top level: expected an object")
    unknown = set(doc) - {"k", "value_cap", "alpha", "seller_neighbors", "buyers", "true_profile"}
    if unknown:
        raise InstanceFormatError(f"top level: unknown field(s) {sorted(unknown)}")
    k = doc.get("k")
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise InstanceFormatError(f"k: expected a positive integer, got {k!r}")
    cap = None if doc.get("value_cap") is None else _number(doc["value_cap"], "value_cap")
    alpha = None if doc.get("alpha") is None else _number(doc["alpha"], "alpha")
    seller = _ids(doc.get("seller_neighbors", []), "seller_neighbors")
    buyers, labels = _profile(doc.get("buyers"), "buyers")
    true_types = None
    if doc.get("true_profile") is not None:
        true_types, _ = _profile(doc["true_profile"], "true_profile")
        if len(true_types) != len(buyers):
            raise InstanceFormatError("true_profile: must list the same buyers as buyers")
    for idx, t in enumerate(buyers):
        if len(t.valuations) > k:
            raise InstanceFormatError(f"buyers[{idx}].valuations: more than k={k} values")
    named = labels if any(x is not None for x in labels) else None
    if named is not None:
        named = [x if x is not None else str(i) for i, x in enumerate(named, start=1)]
    try:
        instance = AuctionInstance.create(k, seller, buyers, cap, true_types, named)
    except InstanceError as exc:
        raise InstanceFormatError(str(exc)) from None
    return instance, alpha


def loads(text: str) -> tuple[AuctionInstance, Fraction | None]:
    try:
        doc = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return instance_from_dict(doc)


def load(path: str | Path) -> tuple[AuctionInstance, Fraction | None]:
    return loads(Path(path).read_text())


def _num(x: Fraction) -> str:
    return _MARK + format_exact(x) + "\x00"


def _buyer_doc(i: int, t: BuyerType, label: str | None) -> dict:
    doc: dict[str, Any] = {"id": i}
    if label is not None:
        doc["label"] = label
    doc["valuations"] = [_num(v) for v in t.valuations]
    doc["neighbors"] = sorted(t.neighbors)
    return doc


def instance_to_dict(instance: AuctionInstance, alpha: Fraction | None = None) -> dict:
    doc: dict[str, Any] = {"k": instance.k}
    if instance.value_cap is not None:
        doc["value_cap"] = _num(instance.value_cap)
    if alpha is not None:
        doc["alpha"] = _num(alpha)
    doc["seller_neighbors"] = sorted(instance.seller_neighbors)
    labels = instance.labels or [None] * instance.n
    doc["buyers"] = [_buyer_doc(i, t, labels[i - 1]) for i, t in enumerate(instance.buyers, start=1)]
    if instance.true_types is not None:
        doc["true_profile"] = [_buyer_doc(i, t, None) for i, t in enumerate(instance.true_types, start=1)]
    return doc


def dumps(instance: AuctionInstance, alpha: Fraction | None = None) -> str:
    text = json.dumps(instance_to_dict(instance, alpha), indent=2)

    def number(m: re.Match) -> str:
        body = m.group(1)
        return f'"{body}"' if "/" in body else body

    return _MARK_RE.sub(number, text) + "\n"
