"""Named smooth feedback maps used by the truth systems.

Each map is a small callable dataclass with a ``kind`` tag so it can round-trip
through JSON configs.  Identified models always carry a
:class:`~sesid.cpl.CplFunction` instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .cpl import CplFunction


@dataclass(frozen=True)
class ScaledTanh:
    """``amplitude * tanh(rate * (u - center) / amplitude) + offset``.

    Saturates at ``offset +/- amplitude`` with slope ``rate`` at the center.
    """

    amplitude: float
    rate: float = 1.0
    center: float = 0.0
    offset: float = 0.0
    kind = "scaled_tanh"

    def __call__(self, u: float) -> float:
        return (
            self.amplitude * math.tanh(self.rate * (u - self.center) / self.amplitude)
            + self.offset
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "amplitude": self.amplitude,
            "rate": self.rate,
            "center": self.center,
            "offset": self.offset,
        }


@dataclass(frozen=True)
class GaussianPairBump:
    """Odd, non-monotonic map built from two opposed Gaussian bumps.

    A negative bump centered at ``-center`` plus a positive one at
    ``+center``, each with height scale ``peak`` and width ``width``.
    """

    peak: float
    width: float
    center: float
    kind = "gaussian_pair"

    def __call__(self, u: float) -> float:
        norm = self.peak / (self.width * math.sqrt(2.0 * math.pi))
        lo = math.exp(-0.5 * ((u + self.center) / self.width) ** 2)
        hi = math.exp(-0.5 * ((u - self.center) / self.width) ** 2)
        return norm * (hi - lo)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "peak": self.peak,
            "width": self.width,
            "center": self.center,
        }


def feedback_from_dict(data: dict):
    """Rebuild a feedback map (CPL or named smooth form) from its dict form."""
    kind = data.get("kind", "cpl")
    if kind == "cpl":
        return CplFunction.from_dict(data)
    if kind == "scaled_tanh":
        return ScaledTanh(
            amplitude=float(data["amplitude"]),
            rate=float(data.get("rate", 1.0)),
            center=float(data.get("center", 0.0)),
            offset=float(data.get("offset", 0.0)),
        )
    if kind == "gaussian_pair":
        return GaussianPairBump(
            peak=float(data["peak"]),
            width=float(data["width"]),
            center=float(data["center"]),
        )
    raise ValueError(f"unknown feedback map kind {kind!r}")


def feedback_to_dict(nl) -> dict:
    if isinstance(nl, CplFunction):
        return {"kind": "cpl", **nl.to_dict()}
    if hasattr(nl, "to_dict"):
        return nl.to_dict()
    raise TypeError(f"feedback map {type(nl).__name__} is not serializable")
