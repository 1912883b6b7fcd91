"""Domain types for the two-hop relay network and the SNR-normalized
scenario translation used by the Monte Carlo experiments.

Conventions: the source has ``t`` transmit antennas, the destination ``r``
receive antennas, the relay ``s`` receive and ``u`` transmit antennas.
``h0`` (r x t) is the direct source-to-destination channel, ``h1`` (s x t)
source-to-relay, ``h2`` (r x u) relay-to-destination.  Noise variances are
never stored: they are absorbed into the SNR scaling of the channel
matrices, so every formula downstream works on whitened channels.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DeadRelayWarning, ValidationError

__all__ = [
    "Dims",
    "ChannelSet",
    "PowerBudget",
    "SnrScenario",
    "translate_scenario",
    "validate",
]


@dataclass(frozen=True)
class Dims:
    """Antenna counts: source transmit, destination receive, relay receive,
    relay transmit."""

    t: int
    r: int
    s: int
    u: int

    def __post_init__(self):
        for name in ("t", "r", "s", "u"):
            val = getattr(self, name)
            if isinstance(val, bool) or not isinstance(val, (int, np.integer)) or val < 1:
                raise ValidationError(
                    f"antenna count {name} must be a positive integer, got {val!r}"
                )


@dataclass(frozen=True)
class ChannelSet:
    """One realization of the three complex channel matrices."""

    h0: np.ndarray  # r x t, source -> destination
    h1: np.ndarray  # s x t, source -> relay
    h2: np.ndarray  # r x u, relay -> destination

    def __post_init__(self):
        for name in ("h0", "h1", "h2"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.ndim != 2:
                raise ValidationError(f"{name} must be a 2-d matrix, got ndim {arr.ndim}")
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class PowerBudget:
    """Average transmit power limits (linear units) for source and relay."""

    p1: float
    p2: float

    def __post_init__(self):
        if not (math.isfinite(self.p1) and self.p1 > 0.0):
            raise ValidationError(f"source power p1 must be finite and > 0, got {self.p1}")
        if not (math.isfinite(self.p2) and self.p2 >= 0.0):
            raise ValidationError(f"relay power p2 must be finite and >= 0, got {self.p2}")


@dataclass(frozen=True)
class SnrScenario:
    """An experiment point expressed in per-link SNRs (dB).

    When ``direct_link_enabled`` is false the direct channel is forced to
    zero and ``rho0_db`` is ignored.
    """

    rho0_db: float
    rho1_db: float
    rho2_db: float
    dims: Dims
    direct_link_enabled: bool = field(default=True)

    def __post_init__(self):
        for name in ("rho0_db", "rho1_db", "rho2_db"):
            val = getattr(self, name)
            if not math.isfinite(val):
                raise ValidationError(f"{name} must be finite, got {val!r}")


def _check_shapes(dims: Dims, ch: ChannelSet) -> None:
    expected = {
        "h0": (dims.r, dims.t),
        "h1": (dims.s, dims.t),
        "h2": (dims.r, dims.u),
    }
    for name, shape in expected.items():
        h = getattr(ch, name)
        if h.shape != shape:
            raise ValidationError(f"{name} must have shape {shape}, got {h.shape}")


def validate(dims: Dims, ch: ChannelSet, pb: PowerBudget) -> None:
    """Check shape consistency and finiteness of a network description.

    Raises ValidationError on hard inconsistencies.  All-zero h1 or h2 is
    legal (a degenerate network) and only triggers a DeadRelayWarning.
    """
    _check_shapes(dims, ch)
    for name in ("h0", "h1", "h2"):
        if not np.all(np.isfinite(getattr(ch, name))):
            raise ValidationError(f"{name} contains non-finite entries")
    for name in ("h1", "h2"):
        if not np.any(getattr(ch, name)):
            warnings.warn(
                f"relay path dead: {name} is identically zero",
                DeadRelayWarning,
                stacklevel=2,
            )


def translate_scenario(scn: SnrScenario, raw: ChannelSet) -> tuple[ChannelSet, PowerBudget]:
    """Map an SNR scenario onto canonical channel matrices and powers.

    ``raw`` holds unit-variance channel draws.  Each matrix is scaled by
    the square root of its linear SNR (the direct channel is zeroed when
    the direct link is disabled) and the canonical powers are p1 = t,
    p2 = u.  Feeding the result into the generic capacity and power
    constraint reproduces the SNR-normalized expressions exactly, so the
    optimizers never need to know about SNRs.
    """
    dims = scn.dims
    _check_shapes(dims, raw)
    g1 = math.sqrt(10.0 ** (scn.rho1_db / 10.0))
    g2 = math.sqrt(10.0 ** (scn.rho2_db / 10.0))
    if scn.direct_link_enabled:
        h0 = math.sqrt(10.0 ** (scn.rho0_db / 10.0)) * raw.h0
    else:
        h0 = np.zeros_like(raw.h0)
    ch = ChannelSet(h0=h0, h1=g1 * raw.h1, h2=g2 * raw.h2)
    return ch, PowerBudget(p1=float(dims.t), p2=float(dims.u))
