"""Capacity-optimal relay transform matrices.

The pipeline has three independent stages:

1. ``build_capacity_spectra`` reduces the network to per-mode scalars: a
   gain ``alpha_i`` in [0, 1) and a power cost ``beta_i`` > 0 per servable
   mode, together with the eigenvector factors needed later.
2. ``waterfill_capacity`` splits the relay power budget across the modes.
   Mode ``i`` receives ``x_i = phi_i(xi)`` where

       phi_i(xi) = max(0, alpha_i/2 - 1 + sqrt(alpha_i^2/4 + alpha_i/beta_i * xi))

   and the water level ``xi > 0`` is the unique root of
   ``sum_i beta_i * phi_i(xi) = p2``.  The budget curve is continuous and
   nondecreasing in ``xi`` with square-root kinks at the activation
   thresholds ``(1 - alpha_i) * beta_i / alpha_i``, so the root is
   bracketed between consecutive sorted thresholds and found by bisection
   (unconditionally robust at these sizes, unlike Newton across kinks).
3. ``assemble_rtm`` lifts the mode powers back to the u x s matrix
   ``X = U_b diag(sqrt(x / lam_b)) U_a^H`` over the active modes.

All functions are pure; a solver call owns all of its intermediates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DeadRelayError, NumericalError, ValidationError
from .matalg import DEFAULT_RANK_TOL, herm_eig, hermitian_part, inv_sqrt_diag, thin_ud
from .network import ChannelSet, Dims, PowerBudget, validate

__all__ = [
    "SpectraBundle",
    "WaterfillSolution",
    "RtmSolution",
    "build_capacity_spectra",
    "waterfill_capacity",
    "assemble_rtm",
    "optimize_capacity_rtm",
    "activation_thresholds",
]


@dataclass(frozen=True)
class SpectraBundle:
    """Per-mode spectra of a relay network plus the factors that rebuild X.

    ``alpha``/``beta`` cover the ``rho = min(s, rho_b)`` servable modes
    (``alpha`` zero-padded past ``rho_a``).  ``alpha_tail`` holds the gain
    spectrum beyond the servable modes (nonempty only when the first-hop
    rank exceeds ``rho``); those modes are stuck at zero power but still
    enter the parametric capacity.  ``variant`` is "capacity" (gains
    strictly below 1) or "ostbc" (gains unbounded).
    """

    variant: str
    alpha: np.ndarray       # (rho,) mode gains, nonincreasing
    beta: np.ndarray        # (rho,) mode power costs, > 0
    u_a_thin: np.ndarray    # (s, rho) semi-unitary receive-side factor
    u_b_thin: np.ndarray    # (u, rho_b) semi-unitary transmit-side factor
    lam_b_thin: np.ndarray  # (rho_b,) second-hop eigenvalues, > 0
    rho: int
    rho_a: int
    rho_b: int
    alpha_tail: np.ndarray  # (s - rho,) gains of the unservable modes
    c_matrix: np.ndarray    # (s, s) relay input shaping matrix


@dataclass(frozen=True)
class WaterfillSolution:
    """Mode powers from a water-filling solve.

    ``xi`` is the water level; ``None`` is the explicit "no water" state
    (all gains zero: nothing to pour the budget into).
    """

    x: np.ndarray
    xi: Optional[float]
    active: np.ndarray
    achieved_budget: float


@dataclass(frozen=True)
class RtmSolution:
    """A relay transform matrix with its construction diagnostics.

    ``kind`` is one of "opt1" (capacity-optimal), "opt2" (OSTBC-optimal),
    "naf" / "naf-rect" (scaled identity).  ``spectra`` is None for the
    NAF kinds, which are not built from an eigenstructure.
    """

    x_matrix: np.ndarray
    wf: WaterfillSolution
    spectra: Optional[SpectraBundle]
    relay_power_used: float
    kind: str


def _spectra_from_parts(
    variant: str,
    a: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    s: int,
    rank_tol: float,
) -> SpectraBundle:
    """Shared spectra assembly for both optimization criteria."""
    ud_b = thin_ud(b, rank_tol)
    if ud_b.rank == 0:
        raise DeadRelayError(
            "relay path dead: the relay-to-destination channel has rank 0"
        )
    rho_b = ud_b.rank
    rho = min(s, rho_b)

    eig_a = herm_eig(a)
    lam_a = np.clip(eig_a.eigenvalues, 0.0, None)
    cut = rank_tol * max(float(lam_a[0]), 1.0)
    rho_a = int(np.sum(lam_a > cut))
    lam_a = np.where(lam_a > cut, lam_a, 0.0)

    alpha = lam_a[:rho].copy()
    alpha_tail = lam_a[rho:].copy()
    if variant == "capacity":
        top = float(alpha.max(initial=0.0))
        if top >= 1.0 + 1e-12:
            raise NumericalError(
                f"capacity mode gain {top} exceeds 1; the first-hop reduction is "
                "contractive by construction, so the inputs are inconsistent"
            )
        np.minimum(alpha, np.nextafter(1.0, 0.0), out=alpha)
        np.minimum(alpha_tail, np.nextafter(1.0, 0.0), out=alpha_tail)

    u_a = eig_a.eigenvectors[:, :rho].copy()
    cost = np.real(np.einsum("ji,jk,ki->i", u_a.conj(), c, u_a))
    beta = cost / ud_b.lam_thin[:rho]
    return SpectraBundle(
        variant=variant,
        alpha=alpha,
        beta=beta,
        u_a_thin=u_a,
        u_b_thin=ud_b.u_thin,
        lam_b_thin=ud_b.lam_thin,
        rho=rho,
        rho_a=rho_a,
        rho_b=rho_b,
        alpha_tail=alpha_tail,
        c_matrix=c,
    )


def build_capacity_spectra(
    ch: ChannelSet,
    pb: PowerBudget,
    dims: Dims,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> SpectraBundle:
    """Reduce a network to the capacity-criterion mode spectra.

    The gain matrix is A = H1 (t/p1 I + H0^H H0 + H1^H H1)^-1 H1^H (its
    eigenvalues are the ``alpha``, strictly below 1 because the bracket
    dominates H1^H H1), the second hop enters through B = H2^H H2, and the
    relay input shaping matrix is C = I + (p1/t) H1 H1^H.  The cost of
    mode i is beta_i = (U_a^H C U_a)_ii / lam_b_i.

    Raises DeadRelayError when H2 has rank 0 (no mode can be served).
    """
    validate(dims, ch, pb)
    t, s = dims.t, dims.s
    h0, h1, h2 = ch.h0, ch.h1, ch.h2
    g = hermitian_part(
        (t / pb.p1) * np.eye(t) + h0.conj().T @ h0 + h1.conj().T @ h1
    )
    a = hermitian_part(h1 @ np.linalg.solve(g, h1.conj().T))
    b = hermitian_part(h2.conj().T @ h2)
    c = np.eye(s) + (pb.p1 / t) * hermitian_part(h1 @ h1.conj().T)
    return _spectra_from_parts("capacity", a, b, c, s, rank_tol)


def _phi(alpha: np.ndarray, beta: np.ndarray, xi: float) -> np.ndarray:
    # Zero-gain modes fall out on their own: sqrt(0) - 1 clips to 0.
    return np.maximum(
        alpha / 2.0 - 1.0 + np.sqrt(alpha ** 2 / 4.0 + alpha / beta * xi), 0.0
    )


def activation_thresholds(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Water level at which each mode starts receiving power.

    ``(1 - alpha_i) * beta_i / alpha_i`` for servable modes, +inf for
    zero-gain modes (they never activate).
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    out = np.full(alpha.shape, np.inf)
    pos = alpha > 0.0
    out[pos] = (1.0 - alpha[pos]) * beta[pos] / alpha[pos]
    return out


def _no_water(n: int) -> WaterfillSolution:
    return WaterfillSolution(
        x=np.zeros(n),
        xi=None,
        active=np.zeros(n, dtype=bool),
        achieved_budget=0.0,
    )


def _validate_wf_inputs(alpha, beta, p2, *, alpha_below_one: bool):
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if alpha.ndim != 1 or alpha.shape != beta.shape:
        raise ValidationError("alpha and beta must be 1-d vectors of equal length")
    if not math.isfinite(p2) or p2 < 0.0:
        raise ValidationError(f"relay power budget must be finite and >= 0, got {p2}")
    if np.any(alpha < 0.0):
        raise ValidationError("mode gains must be nonnegative")
    if alpha_below_one and np.any(alpha >= 1.0):
        raise ValidationError("capacity mode gains must lie in [0, 1)")
    if np.any(beta <= 0.0) or not np.all(np.isfinite(beta)):
        raise ValidationError("mode power costs must be finite and strictly positive")
    return alpha, beta


def waterfill_capacity(
    alpha: np.ndarray,
    beta: np.ndarray,
    p2: float,
    *,
    budget_rtol: float = 1e-12,
    max_iter: int = 200,
) -> WaterfillSolution:
    """Split a relay power budget across modes for the capacity criterion.

    Finds the water level ``xi`` such that ``sum beta_i * phi_i(xi) = p2``
    (see module docstring), by bisection between consecutive sorted
    activation thresholds, to relative budget tolerance ``budget_rtol``.
    The budget binds exactly whenever some gain is positive and p2 > 0;
    with all gains zero the "no water" solution is returned.
    """
    alpha, beta = _validate_wf_inputs(alpha, beta, p2, alpha_below_one=True)
    servable = alpha > 0.0
    if not np.any(servable):
        return _no_water(alpha.size)

    thresholds = np.sort(
        (1.0 - alpha[servable]) * beta[servable] / alpha[servable]
    )
    if p2 == 0.0:
        # exactly zero powers at the just-dry water level
        return WaterfillSolution(
            x=np.zeros(alpha.size),
            xi=float(thresholds[0]),
            active=np.zeros(alpha.size, dtype=bool),
            achieved_budget=0.0,
        )

    def budget(xi: float) -> float:
        return float(beta @ _phi(alpha, beta, xi))

    lo = float(thresholds[0])
    hi = None
    for cand in thresholds[1:]:
        if budget(float(cand)) >= p2:
            hi = float(cand)
            break
        lo = float(cand)
    if hi is None:
        hi = 2.0 * max(lo, 1.0)
        while budget(hi) < p2:
            lo = hi
            hi *= 2.0

    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        resid = budget(mid) - p2
        if abs(resid) <= budget_rtol * p2:
            lo = hi = mid
            break
        if resid < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= np.finfo(float).eps * max(hi, 1.0):
            break

    # Newton polish on the smooth segment: harshly scaled spectra can make
    # the bisection target unrepresentable in xi floats, so keep the best
    # iterate seen instead of trusting the last step.
    xi = 0.5 * (lo + hi)
    best_xi, best_res = xi, abs(budget(xi) - p2)
    for _ in range(4):
        if best_res <= budget_rtol * p2:
            break
        x = _phi(alpha, beta, xi)
        act = x > 0.0
        deriv = float(
            np.sum(
                alpha[act]
                / (2.0 * np.sqrt(alpha[act] ** 2 / 4.0 + alpha[act] / beta[act] * xi))
            )
        )
        if deriv <= 0.0:
            break
        xi_next = xi - (float(beta @ x) - p2) / deriv
        if not math.isfinite(xi_next) or xi_next <= 0.0:
            break
        xi = xi_next
        res = abs(budget(xi) - p2)
        if res < best_res:
            best_xi, best_res = xi, res
    return _solution_at(alpha, beta, best_xi)


def _solution_at(alpha: np.ndarray, beta: np.ndarray, xi: float) -> WaterfillSolution:
    x = _phi(alpha, beta, xi)
    return WaterfillSolution(
        x=x,
        xi=float(xi),
        active=x > 0.0,
        achieved_budget=float(beta @ x),
    )


def assemble_rtm(spectra: SpectraBundle, wf: WaterfillSolution) -> RtmSolution:
    """Build the relay transform matrix from spectra and mode powers.

    X = U_b diag(sqrt(x_i / lam_b_i)) U_a^H over the active modes; zero
    modes are skipped so the returned matrix has rank equal to the active
    count.  ``relay_power_used`` is the exact trace tr(X C X^H).
    """
    if wf.x.shape != (spectra.rho,):
        raise ValidationError(
            f"water-filling solution has {wf.x.shape[0]} modes, spectra expect {spectra.rho}"
        )
    u_rows = spectra.u_b_thin.shape[0]
    s_rows = spectra.u_a_thin.shape[0]
    idx = np.flatnonzero(wf.x > 0.0)
    if idx.size:
        scale = np.sqrt(wf.x[idx]) * inv_sqrt_diag(spectra.lam_b_thin[idx])
        x_matrix = (spectra.u_b_thin[:, idx] * scale) @ spectra.u_a_thin[:, idx].conj().T
    else:
        x_matrix = np.zeros((u_rows, s_rows), dtype=complex)
    power = float(np.real(np.trace(x_matrix @ spectra.c_matrix @ x_matrix.conj().T)))
    kind = "opt1" if spectra.variant == "capacity" else "opt2"
    return RtmSolution(
        x_matrix=x_matrix,
        wf=wf,
        spectra=spectra,
        relay_power_used=power,
        kind=kind,
    )


def optimize_capacity_rtm(
    ch: ChannelSet,
    pb: PowerBudget,
    dims: Dims,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> RtmSolution:
    """End-to-end capacity-optimal relay transform for one realization."""
    spectra = build_capacity_spectra(ch, pb, dims, rank_tol)
    wf = waterfill_capacity(spectra.alpha, spectra.beta, pb.p2)
    return assemble_rtm(spectra, wf)
