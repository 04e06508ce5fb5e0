"""Three-stage transmit waveform design.

Stage 1 (covariance): pick the rank-one transmit covariance that maximizes
the summed beampattern power over a set of candidate steering vectors; the
closed form is P_T times the outer product of the dominant unit eigenvector
of the steering outer-product sum.

Stage 2 (radar reference): given a desired covariance R_d, the waveform
minimizing the multi-user interference under the hard constraint
(1/L) X0 X0^H = R_d reduces, after whitening by a Cholesky factor of R_d,
to an orthogonal Procrustes problem solved in closed form by an SVD.

Stage 3 (trade-off): blend interference suppression against similarity to
the radar reference under a total-power sphere constraint. The stacked
least-squares objective is a matrix trust-region subproblem whose dual is a
scalar secular equation, strictly decreasing in the multiplier; a bracketed
golden-section search pins the multiplier and the primal solution follows
from a (pseudo-)inverse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .upa import SpatialGrid, UpaConfig, steering_matrix


class BracketingError(RuntimeError):
    """Dual line search failed to bracket the power target."""


class PoleError(ValueError):
    """Secular function evaluated at or beyond a pole."""


@dataclass(frozen=True)
class TradeoffConfig:
    """Knobs for the dual line search of the trade-off solver."""

    tol: float = 1e-10
    max_expansions: int = 200
    max_iters: int = 200


def isotropic_covariance(n_t: int, p_t: float) -> np.ndarray:
    """Beampattern-flat covariance (P_T / N_t) * I."""
    return (p_t / n_t) * np.eye(n_t, dtype=complex)


def actual_covariance(x: np.ndarray, length: int) -> np.ndarray:
    """Covariance (1/L) X X^H actually presented by a code matrix."""
    return (x @ x.conj().T) / length


def _fix_phase(u: np.ndarray) -> np.ndarray:
    """Rotate so the first non-negligible component is real positive (determinism)."""
    idx = np.flatnonzero(np.abs(u) > 1e-12 * np.abs(u).max())
    if idx.size:
        piv = u[idx[0]]
        u = u * (np.conj(piv) / abs(piv))
    return u


def design_covariance(steerings, p_t: float) -> np.ndarray:
    """Rank-one covariance P_T u u^H, u the dominant eigenvector of sum a a^H.

    The attained objective is P_T * lambda_max of the steering outer-product
    sum. Raises on an empty steering list; callers wanting an empty selection
    substitute the isotropic covariance instead.
    """
    steerings = list(steerings)
    if not steerings:
        raise ValueError("need at least one steering vector; use isotropic_covariance for none")
    n_t = steerings[0].size
    b_hat = np.zeros((n_t, n_t), dtype=complex)
    for a in steerings:
        b_hat += np.outer(a, np.conj(a))
    vals, vecs = np.linalg.eigh(b_hat)
    u = _fix_phase(vecs[:, -1])
    return p_t * np.outer(u, np.conj(u))


def radar_reference(h_chan: np.ndarray, symbols: np.ndarray, cov: np.ndarray, length: int) -> np.ndarray:
    """MUI-minimizing waveform X0 with (1/L) X0 X0^H equal to the given covariance.

    Cholesky cov = F F^H, SVD U S V^H = F^H h_chan^H symbols, then
    X0 = sqrt(L) F U I_(NxL) V^H. A rank-deficient covariance (the designed
    one always is) gets a small isotropic ridge before factorization and the
    result is rescaled to restore the exact total power L * trace(cov).
    """
    cov = np.asarray(cov)
    n_t = cov.shape[0]
    k = h_chan.shape[0]
    if length < n_t:
        raise ValueError("code length must be >= number of transmit antennas")
    if k > n_t:
        raise ValueError("more users than transmit antennas")
    p_t = float(np.trace(cov).real)
    try:
        f = np.linalg.cholesky(cov)
        rescale = False
    except np.linalg.LinAlgError:
        ridge = 1e-6 * (p_t / n_t)
        f = np.linalg.cholesky(cov + ridge * np.eye(n_t))
        rescale = True
    u, _, vh = np.linalg.svd(f.conj().T @ h_chan.conj().T @ symbols)
    # U I_(NxL) V^H with N <= L keeps the leading N rows of V^H
    x0 = np.sqrt(length) * f @ u @ vh[:n_t, :]
    if rescale:
        x0 *= np.sqrt(length * p_t) / np.linalg.norm(x0)
    return x0


def secular_value(lam: float, eigvals: np.ndarray, w: np.ndarray) -> float:
    """P(lam) = sum |w_ij|^2 / (lam + eigval_i)^2; strictly decreasing in lam."""
    shifted = lam + eigvals
    if np.any(shifted < 1e-12):
        raise PoleError("lambda too close to (or beyond) a pole of the secular function")
    return float(np.sum(np.abs(w) ** 2 / shifted[:, None] ** 2))


def tradeoff_waveform(
    h_chan: np.ndarray,
    symbols: np.ndarray,
    x0: np.ndarray,
    rho: float,
    p_t: float,
    length: int,
    config: TradeoffConfig | None = None,
) -> np.ndarray:
    """Globally optimal X for the weighted MUI/reference objective on the power sphere.

    Minimizes rho * ||h_chan X - symbols||_F^2 + (1 - rho) * ||X - x0||_F^2
    subject to ||X||_F^2 = L * P_T, via the dual secular equation of the
    matrix trust-region subproblem.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    config = config or TradeoffConfig()
    n_t = h_chan.shape[1]
    target = length * p_t

    # Q = A^H A and G = A^H B for the stacked [sqrt(rho) H; sqrt(1-rho) I] system
    q = rho * (h_chan.conj().T @ h_chan) + (1.0 - rho) * np.eye(n_t)
    g = rho * (h_chan.conj().T @ symbols) + (1.0 - rho) * x0

    eigvals, v = np.linalg.eigh(q)
    lam_min = float(eigvals[0])
    w = v.conj().T @ g

    lam_lo = -lam_min + 1e-9 * (1.0 + abs(lam_min))
    p_lo = secular_value(lam_lo, eigvals, w)

    if p_lo < target:
        # hard case: the reachable power at the dual boundary falls short;
        # complete with a minimal-eigenvector component of the right norm
        shifted = lam_lo + eigvals
        coeff = np.where(
            (eigvals - lam_min) < 1e-10 * (1.0 + abs(lam_min)), 0.0, 1.0
        )[:, None] / shifted[:, None]
        x_base = v @ (coeff * w)
        deficit = target - float(np.linalg.norm(x_base) ** 2)
        x = x_base
        if deficit > 0:
            z = np.zeros(x0.shape[1], dtype=complex)
            z[0] = np.sqrt(deficit)
            x = x_base + np.outer(v[:, 0], z)
        return x * np.sqrt(target / np.linalg.norm(x) ** 2)

    lam_hi = lam_lo + 1.0
    for _ in range(config.max_expansions):
        if secular_value(lam_hi, eigvals, w) < target:
            break
        lam_hi = lam_lo + 2.0 * (lam_hi - lam_lo)
    else:
        raise BracketingError("could not bracket the power target")

    lo, hi = lam_lo, lam_hi
    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    c = hi - inv_phi * (hi - lo)
    d = lo + inv_phi * (hi - lo)
    fc = abs(secular_value(c, eigvals, w) - target)
    fd = abs(secular_value(d, eigvals, w) - target)
    for _ in range(config.max_iters):
        if hi - lo <= config.tol * (1.0 + abs(lo)):
            break
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = abs(secular_value(c, eigvals, w) - target)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv_phi * (hi - lo)
            fd = abs(secular_value(d, eigvals, w) - target)
    lam_opt = 0.5 * (lo + hi)

    x = v @ (w / (lam_opt + eigvals)[:, None])
    return x * np.sqrt(target / np.linalg.norm(x) ** 2)


def orthogonal_reference(n_t: int, length: int, p_t: float) -> np.ndarray:
    """Isotropic-beampattern code matrix: (1/L) X X^H = (P_T / N_t) I exactly.

    Rows are scaled DFT rows, mutually orthogonal for any L >= N_t.
    """
    if length < n_t:
        raise ValueError("code length must be >= number of transmit antennas")
    k = np.arange(n_t)[:, None]
    l = np.arange(length)[None, :]
    return np.sqrt(p_t / n_t) * np.exp(-2j * np.pi * k * l / length)


def beampattern(cov: np.ndarray, upa: UpaConfig, grid: SpatialGrid) -> np.ndarray:
    """Physically radiated power toward each grid bin, E|a_t^T x|^2 per bin.

    For the propagation convention used here this is a^T R conj(a), i.e. the
    quadratic form in the conjugated transmit steering vector.
    """
    a_t = steering_matrix(upa, grid, "tx")
    return np.einsum("mi,ij,mj->m", a_t, cov, np.conj(a_t)).real
