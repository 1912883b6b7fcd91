"""Scalar figures of merit for relay networks.

Capacity is computed in bit/s/Hz through two algebraically equivalent
log-det forms (the direct whitened-channel form and the matrix-inversion
identity form); both are evaluated on every call and a disagreement above
1e-9 bits raises, turning the underlying identity into a permanent
regression guard.  Also here: the OSTBC (trace) capacity, the bare
direct-link capacity, the naive scaled-identity relay baseline, KKT
residual reporting for the capacity water-filler, and a brute-force grid
oracle used to verify both water-filling solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .matalg import hermitian_part
from .network import ChannelSet, Dims, PowerBudget
from .opt_capacity import RtmSolution, WaterfillSolution

__all__ = [
    "CapacityReport",
    "KktReport",
    "capacity",
    "capacity_forms",
    "ostbc_capacity",
    "direct_link_capacity",
    "naf_rtm",
    "verify_kkt_capacity",
    "oracle_solve",
]

_FORM_AGREEMENT_BITS = 1e-9


@dataclass(frozen=True)
class CapacityReport:
    """A capacity figure in bit/s/Hz with its context."""

    bits: float
    variant: str          # "capacity" | "ostbc"
    symbol_rate: float    # meaningful for the ostbc variant, 1.0 otherwise
    relay_power_used: float


@dataclass(frozen=True)
class KktReport:
    """First-order optimality residuals of a water-filling solution.

    All four are reported as nonnegative magnitudes; a correct solution
    drives every one of them to numerical zero.
    """

    stationarity_residual: float
    complementary_slackness: float
    primal_feasibility: float
    dual_feasibility: float


def _check_x_shape(dims: Dims, x_matrix: np.ndarray) -> np.ndarray:
    x_matrix = np.asarray(x_matrix, dtype=complex)
    if x_matrix.shape != (dims.u, dims.s):
        raise ValidationError(
            f"relay transform must have shape {(dims.u, dims.s)}, got {x_matrix.shape}"
        )
    return x_matrix


def _logdet_bits(m: np.ndarray) -> float:
    sign, logdet = np.linalg.slogdet(hermitian_part(m))
    if sign <= 0.0 or not math.isfinite(logdet):
        raise NumericalError(
            f"log-det argument is not positive definite (sign {sign}, logdet {logdet})"
        )
    return logdet / math.log(2.0)


def _whitened_inner(ch: ChannelSet, x_matrix: np.ndarray) -> np.ndarray:
    """The t x t relay-path information matrix
    H1^H X^H H2^H (I + H2 X X^H H2^H)^-1 H2 X H1."""
    k = ch.h2 @ x_matrix
    r = k.shape[0]
    kh1 = k @ ch.h1
    gram = hermitian_part(np.eye(r) + k @ k.conj().T)
    return hermitian_part(kh1.conj().T @ np.linalg.solve(gram, kh1))


def _relay_power(ch: ChannelSet, pb: PowerBudget, dims: Dims, x_matrix: np.ndarray) -> float:
    c = np.eye(dims.s) + (pb.p1 / dims.t) * hermitian_part(ch.h1 @ ch.h1.conj().T)
    return float(np.real(np.trace(x_matrix @ c @ x_matrix.conj().T)))


def capacity_forms(
    ch: ChannelSet, pb: PowerBudget, dims: Dims, x_matrix: np.ndarray
) -> tuple[float, float]:
    """Both equivalent network-capacity forms, in bits.

    Returns (direct form, identity form).  The first evaluates the
    whitened two-hop channel directly; the second replaces the relay-path
    term by I + (p1/t)(H0^H H0 + H1^H H1) minus the residual
    (p1/t) H1^H (I + X^H H2^H H2 X)^-1 H1.
    """
    x_matrix = _check_x_shape(dims, x_matrix)
    t = dims.t
    scale = pb.p1 / t
    h0, h1, h2 = ch.h0, ch.h1, ch.h2
    g0 = h0.conj().T @ h0

    direct = _logdet_bits(np.eye(t) + scale * (g0 + _whitened_inner(ch, x_matrix)))

    bx = x_matrix.conj().T @ (h2.conj().T @ h2) @ x_matrix
    gram = hermitian_part(np.eye(dims.s) + bx)
    residual = h1.conj().T @ np.linalg.solve(gram, h1)
    ident = _logdet_bits(
        np.eye(t) + scale * (g0 + h1.conj().T @ h1) - scale * residual
    )
    return direct, ident


def capacity(
    ch: ChannelSet, pb: PowerBudget, dims: Dims, x_matrix: np.ndarray
) -> CapacityReport:
    """Network capacity achieved with a given relay transform matrix.

    Both capacity forms are evaluated and must agree to 1e-9 bits; this
    cross-check costs nothing at these sizes and hard-fails on numerical
    trouble instead of returning a silently wrong figure.
    """
    direct, ident = capacity_forms(ch, pb, dims, x_matrix)
    if abs(direct - ident) > _FORM_AGREEMENT_BITS:
        raise NumericalError(
            f"capacity forms disagree: {direct!r} vs {ident!r} bits"
        )
    x_matrix = np.asarray(x_matrix, dtype=complex)
    return CapacityReport(
        bits=direct,
        variant="capacity",
        symbol_rate=1.0,
        relay_power_used=_relay_power(ch, pb, dims, x_matrix),
    )


def ostbc_capacity(
    ch: ChannelSet,
    pb: PowerBudget,
    dims: Dims,
    x_matrix: np.ndarray,
    symbol_rate: float = 1.0,
) -> CapacityReport:
    """OSTBC capacity with symbol rate R:
    R * log2(1 + p1/(t R) * tr[H0^H H0 + relay-path information matrix]).

    The trace argument reuses the same whitened inner matrix as the
    log-det capacity.
    """
    if not (0.0 < symbol_rate <= 1.0):
        raise ValidationError(f"symbol rate must lie in (0, 1], got {symbol_rate}")
    x_matrix = _check_x_shape(dims, x_matrix)
    trace_arg = float(
        np.real(np.trace(ch.h0.conj().T @ ch.h0))
        + np.real(np.trace(_whitened_inner(ch, x_matrix)))
    )
    bits = symbol_rate * math.log2(1.0 + pb.p1 / (dims.t * symbol_rate) * trace_arg)
    if not math.isfinite(bits):
        raise NumericalError(f"OSTBC capacity is not finite (trace {trace_arg})")
    return CapacityReport(
        bits=bits,
        variant="ostbc",
        symbol_rate=float(symbol_rate),
        relay_power_used=_relay_power(ch, pb, dims, x_matrix),
    )


def direct_link_capacity(h0: np.ndarray, pb: PowerBudget, dims: Dims) -> CapacityReport:
    """Capacity of the bare source-to-destination link (no relay)."""
    h0 = np.asarray(h0, dtype=complex)
    if h0.shape != (dims.r, dims.t):
        raise ValidationError(
            f"h0 must have shape {(dims.r, dims.t)}, got {h0.shape}"
        )
    bits = _logdet_bits(np.eye(dims.t) + (pb.p1 / dims.t) * (h0.conj().T @ h0))
    return CapacityReport(
        bits=bits, variant="capacity", symbol_rate=1.0, relay_power_used=0.0
    )


def naf_rtm(ch: ChannelSet, pb: PowerBudget, dims: Dims) -> RtmSolution:
    """Naive amplify-and-forward baseline: a scaled identity transform.

    The gain is chosen so that tr(X C X^H) meets the relay budget exactly.
    For s != u the identity pattern is rectangular (ones on the main
    diagonal) and the solution is flagged "naf-rect".
    """
    s, u = dims.s, dims.u
    c = np.eye(s) + (pb.p1 / dims.t) * hermitian_part(ch.h1 @ ch.h1.conj().T)
    k = min(s, u)
    denom = float(np.real(np.trace(c[:k, :k])))
    gain = math.sqrt(pb.p2 / denom)
    x_matrix = np.zeros((u, s), dtype=complex)
    x_matrix[np.arange(k), np.arange(k)] = gain
    power = float(np.real(np.trace(x_matrix @ c @ x_matrix.conj().T)))
    wf = WaterfillSolution(
        x=np.full(k, gain ** 2),
        xi=None,
        active=np.full(k, gain > 0.0),
        achieved_budget=power,
    )
    return RtmSolution(
        x_matrix=x_matrix,
        wf=wf,
        spectra=None,
        relay_power_used=power,
        kind="naf" if s == u else "naf-rect",
    )


def verify_kkt_capacity(
    alpha: np.ndarray, beta: np.ndarray, p2: float, wf: WaterfillSolution
) -> KktReport:
    """Reconstruct the multipliers of a capacity water-filling solution and
    report all first-order optimality residuals.

    The budget multiplier is 1/xi (zero in the no-water state) and the
    per-mode slack multipliers follow from the gradient equations
    lambda_i = 1/(1+x_i) - 1/(1-alpha_i+x_i) + beta_i/xi.  Active modes
    must carry a zero multiplier (stationarity), x_i > 0 forces
    lambda_i = 0 (complementarity), the budget must bind whenever some
    gain is positive (primal), and no multiplier may be negative (dual).
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    x = np.asarray(wf.x, dtype=float)
    lam0 = 0.0 if wf.xi is None else 1.0 / wf.xi

    grad = 1.0 / (1.0 + x) - 1.0 / (1.0 - alpha + x)
    lam = grad + lam0 * beta
    active = x > 0.0

    stationarity = float(np.max(np.abs(lam[active]), initial=0.0))
    complementarity = float(np.max(np.abs(lam * x), initial=0.0))
    budget = float(beta @ x)
    if np.any(alpha > 0.0):
        primal = abs(budget - p2)
    else:
        primal = max(0.0, budget - p2)
    primal = max(primal, float(np.max(-x, initial=0.0)))
    dual = max(0.0, float(np.max(-lam, initial=0.0)), -lam0)
    return KktReport(
        stationarity_residual=stationarity,
        complementary_slackness=complementarity,
        primal_feasibility=primal,
        dual_feasibility=dual,
    )


def _objective(kind: str, alpha: np.ndarray):
    if kind == "capacity":
        def f(x):
            return -np.sum(np.log(1.0 - alpha / (1.0 + x)), axis=-1)
    else:
        def f(x):
            return np.sum(alpha / (1.0 + x), axis=-1)
    return f


def _simplex_lattice(k: int, rho: int) -> np.ndarray:
    """All length-rho nonnegative integer vectors summing to k."""
    if rho == 1:
        return np.array([[k]])
    ranges = np.stack(
        np.meshgrid(*([np.arange(k + 1)] * (rho - 1)), indexing="ij"), axis=-1
    ).reshape(-1, rho - 1)
    tail = k - ranges.sum(axis=1)
    keep = tail >= 0
    return np.concatenate([ranges[keep], tail[keep, None]], axis=1)


def _pairwise_polish(f, x: np.ndarray, beta: np.ndarray, sweeps: int = 60) -> np.ndarray:
    """Local pairwise coordinate descent on the budget-equality set.

    Transfers budget between mode pairs with an exact 1-d convex line
    search; a point stationary against every pairwise transfer is the
    constrained optimum for these convex objectives.
    """
    rho = x.size
    x = x.copy()
    for _ in range(sweeps):
        best = f(x)
        improved = False
        for i in range(rho):
            for j in range(rho):
                if i == j:
                    continue
                lo, hi = -x[i] * beta[i], x[j] * beta[j]
                if hi <= lo:
                    continue
                def line(tr):
                    trial = x.copy()
                    trial[i] += tr / beta[i]
                    trial[j] -= tr / beta[j]
                    return f(np.maximum(trial, 0.0))
                for _ in range(90):
                    m1 = lo + (hi - lo) / 3.0
                    m2 = hi - (hi - lo) / 3.0
                    if line(m1) <= line(m2):
                        hi = m2
                    else:
                        lo = m1
                tr = 0.5 * (lo + hi)
                cand = x.copy()
                cand[i] = max(cand[i] + tr / beta[i], 0.0)
                cand[j] = max(cand[j] - tr / beta[j], 0.0)
                val = f(cand)
                if val < best - 1e-16:
                    x, best, improved = cand, val, True
        if not improved:
            break
    return x


def oracle_solve(
    objective: str,
    alpha: np.ndarray,
    beta: np.ndarray,
    p2: float,
    grid_step: float = 1e-3,
) -> tuple[np.ndarray, float]:
    """Brute-force verification solver for the mode-power problems.

    Searches the budget-equality simplex {x >= 0 : sum beta_i x_i = p2}
    on a lattice (full enumeration at the finest affordable resolution,
    then pattern-search refinement of the lattice down to ``grid_step``
    in budget-fraction units), followed by a local pairwise
    coordinate-descent refinement pass.  Only the raw objective is ever
    evaluated, so the result is independent of the water-filling
    closed forms it is used to verify.

    Returns the best point and its objective value (nats for the
    "capacity" objective, the plain trace sum for "ostbc").
    """
    if objective not in ("capacity", "ostbc"):
        raise ValidationError(f"unknown objective {objective!r}")
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    rho = alpha.size
    if rho > 4:
        raise ValidationError(f"grid oracle supports at most 4 modes, got {rho}")
    if grid_step <= 0.0:
        raise ValidationError("grid_step must be positive")
    if np.any(beta <= 0.0) or np.any(alpha < 0.0) or p2 < 0.0:
        raise ValidationError("need alpha >= 0, beta > 0, p2 >= 0")
    if objective == "capacity" and np.any(alpha >= 1.0):
        raise ValidationError("capacity objective needs alpha < 1")

    f = _objective(objective, alpha)
    if p2 == 0.0 or not np.any(alpha > 0.0):
        x = np.zeros(rho)
        return x, float(f(x))
    if rho == 1:
        x = np.array([p2 / beta[0]])
        return x, float(f(x))

    # Full lattice at the finest resolution whose size stays reasonable.
    caps = {2: 2000, 3: 180, 4: 46}
    k0 = min(int(math.ceil(1.0 / grid_step)), caps[rho])
    lattice = _simplex_lattice(k0, rho) / float(k0)
    points = lattice * (p2 / beta)
    frac = lattice[int(np.argmin(f(points)))].copy()

    # Pattern-search refinement: halve the lattice spacing down to
    # grid_step, walking to the best improving neighbor at each level.
    deltas = []
    d = 1.0 / k0
    while d > grid_step * 1.0000001:
        d = max(d / 2.0, grid_step)
        deltas.append(d)
    eye = np.eye(rho)
    moves = [eye[i] - eye[j] for i in range(rho) for j in range(rho) if i != j]
    for d in deltas:
        for _ in range(400):
            cands = [frac + d * mv for mv in moves]
            cands = [c for c in cands if c.min() >= -1e-15]
            if not cands:
                break
            cands = np.maximum(np.array(cands), 0.0)
            vals = f(cands * (p2 / beta))
            best = int(np.argmin(vals))
            if vals[best] < f(frac * (p2 / beta)) - 1e-16:
                frac = cands[best]
            else:
                break

    x = _pairwise_polish(f, frac * (p2 / beta), beta)
    return x, float(f(x))
