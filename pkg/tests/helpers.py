"""Shared helpers for the test suite."""

import numpy as np

from relay_rtm.network import ChannelSet, Dims, PowerBudget

#: one "ACCEPTANCE n: PASS/FAIL" line per criterion, echoed by conftest's
#: terminal summary so they stay visible under output capture
ACCEPTANCE_LINES = []


def crandn(rng, shape):
    """Unit-variance circular complex Gaussian array."""
    z = rng.standard_normal((2, *shape))
    return (z[0] + 1j * z[1]) / np.sqrt(2.0)


def db_to_lin(db):
    return 10.0 ** (db / 10.0)


def scaled_channels(rng, dims: Dims, rho0_db=None, rho1_db=10.0, rho2_db=10.0):
    """Rayleigh channels scaled to per-link SNRs; rho0_db=None disables the
    direct link.  Pair with canonical_budget(dims)."""
    if rho0_db is None:
        h0 = np.zeros((dims.r, dims.t), dtype=complex)
    else:
        h0 = np.sqrt(db_to_lin(rho0_db)) * crandn(rng, (dims.r, dims.t))
    h1 = np.sqrt(db_to_lin(rho1_db)) * crandn(rng, (dims.s, dims.t))
    h2 = np.sqrt(db_to_lin(rho2_db)) * crandn(rng, (dims.r, dims.u))
    return ChannelSet(h0=h0, h1=h1, h2=h2)


def canonical_budget(dims: Dims) -> PowerBudget:
    return PowerBudget(p1=float(dims.t), p2=float(dims.u))


def scalar_network():
    """The worked 1x1x1x1 example: h0=0, h1=1, h2=1."""
    dims = Dims(1, 1, 1, 1)
    ch = ChannelSet(
        h0=np.zeros((1, 1)), h1=np.ones((1, 1)), h2=np.ones((1, 1))
    )
    return dims, ch
