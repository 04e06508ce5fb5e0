"""Wald-type detection per spatial bin with single-snapshot covariance estimation.

The test statistic for channel h and snapshot y is

    Lambda = 2 |h^H y|^2 / (h^H Gamma_hat h),

with Gamma_hat the lag-truncated (banded) outer product of the signal-free
residual c_hat = y - alpha_hat * h. Under the null it is asymptotically
chi-square with 2 degrees of freedom, which fixes the CFAR threshold
eta = -2 ln(p_fa); under the alternative it is noncentral with parameter
zeta = 2 |alpha|^2 ||h||^4 / (h^H Gamma h), giving the asymptotic detection
probability Q1(sqrt(zeta), sqrt(eta)) through the first-order Marcum
Q-function.

The banded estimator is rank deficient at a single snapshot, so the
quadratic form can degenerate; a diagonal loading proportional to the
residual power plus a relative floor keeps the ratio well defined at desk
scale.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import ncx2

log = logging.getLogger(__name__)

#: relative floor applied to the denominator quadratic form
DENOM_FLOOR = 1e-12


class DegenerateChannelError(ValueError):
    """Raised when an operation requires a nonzero channel vector."""


def threshold(p_fa: float) -> float:
    """CFAR threshold eta = -2 ln(p_fa) for the asymptotically chi2(2) statistic."""
    if not 0.0 < p_fa <= 1.0:
        raise ValueError("p_fa must lie in (0, 1]")
    return -2.0 * math.log(p_fa)


def default_lag(n: int) -> int:
    """Truncation lag floor(N^(1/4)); grows more slowly than the N^(1/3) consistency bound."""
    return int(math.floor(n ** 0.25))


def marcum_q1(a, b):
    """First-order Marcum Q-function Q1(a, b), elementwise on arrays.

    Evaluated as the survival function at b^2 of a noncentral chi-square with
    2 degrees of freedom and noncentrality a^2. Exact special cases: Q1(0, b)
    = exp(-b^2/2), Q1(a, 0) = 1; for a - b >= 40 the complement is below
    double precision and 1.0 is returned outright.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("Marcum Q arguments must be nonnegative")
    out = np.where(
        a == 0.0,
        np.exp(-0.5 * b * b),
        ncx2.sf(b * b, 2, np.where(a - b >= 40.0, 0.0, a * a)),
    )
    out = np.where(a - b >= 40.0, 1.0, out)
    out = np.where(b == 0.0, 1.0, out)
    if out.ndim == 0:
        return float(out)
    return out


def amplitude_estimate(h: np.ndarray, y: np.ndarray) -> complex:
    """Least-squares amplitude h^H y / ||h||^2."""
    h2 = float(np.vdot(h, h).real)
    if h2 <= 0.0:
        raise DegenerateChannelError("zero channel vector")
    return complex(np.vdot(h, y) / h2)


@dataclass(frozen=True)
class BandedCovariance:
    """Lag-truncated single-snapshot covariance estimate, stored implicitly.

    Entry (i, j) is c_hat[i] * conj(c_hat[j]) for |i - j| <= lag and zero
    outside the band; the diagonal additionally carries
    loading * ||c_hat||^2 / N.
    """

    c_hat: np.ndarray
    lag: int
    loading: float = 0.0

    def __post_init__(self):
        if self.lag < 0 or self.lag >= self.c_hat.size:
            raise ValueError("lag must satisfy 0 <= lag < N")

    @property
    def n(self) -> int:
        return self.c_hat.size

    @property
    def diag_load(self) -> float:
        return self.loading * float(np.vdot(self.c_hat, self.c_hat).real) / self.n

    def quadratic_form(self, h: np.ndarray) -> float:
        """h^H Gamma_hat h in O(N * lag) using the band structure."""
        u = np.conj(h) * self.c_hat
        qf = float(np.vdot(u, u).real)
        for d in range(1, self.lag + 1):
            qf += 2.0 * float(np.sum(u[d:] * np.conj(u[:-d])).real)
        return qf + self.diag_load * float(np.vdot(h, h).real)

    def to_dense(self) -> np.ndarray:
        """Explicit matrix; for small-N validation only."""
        outer = np.outer(self.c_hat, np.conj(self.c_hat))
        i = np.arange(self.n)
        outer[np.abs(i[:, None] - i[None, :]) > self.lag] = 0.0
        outer[i, i] += self.diag_load
        return outer


def banded_covariance(
    y: np.ndarray, h: np.ndarray, lag: int, loading: float = 0.0
) -> BandedCovariance:
    """Estimate the disturbance covariance from the snapshot under test."""
    alpha = amplitude_estimate(h, y)
    return BandedCovariance(y - alpha * h, lag, loading)


def _quadratic_form(gamma, h: np.ndarray) -> float:
    if isinstance(gamma, BandedCovariance):
        return gamma.quadratic_form(h)
    return float(np.vdot(h, np.asarray(gamma) @ h).real)


def wald_statistic(h: np.ndarray, y: np.ndarray, gamma) -> float:
    """Lambda = 2 |h^H y|^2 / (h^H gamma h); gamma banded or dense."""
    num = 2.0 * abs(np.vdot(h, y)) ** 2
    denom = _quadratic_form(gamma, h)
    floor = _denom_floor(h, gamma)
    if denom < floor:
        log.debug("Wald denominator %.3e floored at %.3e", denom, floor)
        denom = floor
    if denom <= 0.0:
        return 0.0
    return num / denom


def _denom_floor(h: np.ndarray, gamma) -> float:
    h2 = float(np.vdot(h, h).real)
    if isinstance(gamma, BandedCovariance):
        c2 = float(np.vdot(gamma.c_hat, gamma.c_hat).real)
        return DENOM_FLOOR * h2 * c2 / gamma.n
    return DENOM_FLOOR * h2 * float(np.trace(np.asarray(gamma)).real) / np.asarray(gamma).shape[0]


def noncentrality(alpha: complex, h: np.ndarray, gamma) -> float:
    """zeta = 2 |alpha|^2 ||h||^4 / (h^H Gamma h)."""
    h2 = float(np.vdot(h, h).real)
    denom = _quadratic_form(gamma, h)
    if denom <= 0.0:
        raise DegenerateChannelError("nonpositive covariance quadratic form")
    return 2.0 * abs(alpha) ** 2 * h2 * h2 / denom


def asymptotic_pd(h: np.ndarray, gamma, eta: float, alpha=None, y=None) -> float:
    """Asymptotic detection probability Q1(sqrt(kappa), sqrt(eta)).

    With `y` given, kappa uses the estimated amplitude (the reward path);
    with `alpha` given, it uses the true amplitude against the supplied
    covariance (the theory path).
    """
    if (alpha is None) == (y is None):
        raise ValueError("provide exactly one of alpha (theory) or y (estimated)")
    if y is not None:
        alpha = amplitude_estimate(h, y)
    kappa = noncentrality(alpha, h, gamma)
    return float(marcum_q1(math.sqrt(kappa), math.sqrt(eta)))


@dataclass(frozen=True)
class DetectorConfig:
    """CFAR operating point plus estimator knobs."""

    p_fa: float = 1e-4
    lag: int | None = None  # None -> floor(N^(1/4)) at frame time
    loading: float = 1e-3

    def __post_init__(self):
        if not 0.0 < self.p_fa < 1.0:
            raise ValueError("p_fa must lie in (0, 1)")
        if self.loading < 0:
            raise ValueError("loading must be >= 0")

    @property
    def eta(self) -> float:
        return threshold(self.p_fa)

    def lag_for(self, n: int) -> int:
        lag = default_lag(n) if self.lag is None else self.lag
        if lag >= round(n ** (1.0 / 3.0)):
            log.warning("lag %d does not grow more slowly than N^(1/3) at N=%d", lag, n)
        return lag


@dataclass
class DetectionFrame:
    """Per-bin detector outputs for one pulse."""

    statistics: np.ndarray
    alpha_hat: np.ndarray
    decisions: np.ndarray
    h_norm2: np.ndarray
    denominators: np.ndarray
    eta: float
    n_floored: int = 0

    @property
    def count(self) -> int:
        """T_p: number of bins whose statistic exceeds the threshold."""
        return int(self.decisions.sum())

    @property
    def n_bins(self) -> int:
        return self.statistics.size

    def top_bins(self, j: int) -> np.ndarray:
        """Indices of the j largest statistics, ties broken toward lower index."""
        j = min(j, self.n_bins)
        if j == 0:
            return np.empty(0, dtype=int)
        order = np.lexsort((np.arange(self.n_bins), -self.statistics))
        return order[:j]

    def kappa(self) -> np.ndarray:
        """Estimated noncentralities 2 |alpha_hat|^2 ||h||^4 / denom per bin."""
        with np.errstate(divide="ignore", invalid="ignore"):
            k = 2.0 * np.abs(self.alpha_hat) ** 2 * self.h_norm2**2 / self.denominators
        return np.where(np.isfinite(k), k, 0.0)


def detect_frame(channels: np.ndarray, snapshots: np.ndarray, config: DetectorConfig) -> DetectionFrame:
    """Run the Wald test on every bin of a pulse.

    channels, snapshots: (M, N) arrays of per-bin effective channels and
    received vectors. Bins whose channel is exactly zero are dark (no
    illumination) and yield a zero statistic.
    """
    channels = np.asarray(channels)
    snapshots = np.asarray(snapshots)
    if channels.shape != snapshots.shape or channels.ndim != 2:
        raise ValueError("channels and snapshots must share shape (M, N)")
    m, n = channels.shape
    lag = min(config.lag_for(n), n - 1)

    h2 = np.einsum("mn,mn->m", np.conj(channels), channels).real
    hy = np.einsum("mn,mn->m", np.conj(channels), snapshots)
    live = h2 > 0.0
    alpha = np.zeros(m, dtype=complex)
    alpha[live] = hy[live] / h2[live]

    c_hat = snapshots - alpha[:, None] * channels
    u = np.conj(channels) * c_hat
    denom = np.einsum("mn,mn->m", np.conj(u), u).real
    for d in range(1, lag + 1):
        denom += 2.0 * np.einsum("mn,mn->m", u[:, d:], np.conj(u[:, :-d])).real
    c2 = np.einsum("mn,mn->m", np.conj(c_hat), c_hat).real
    denom += config.loading * (c2 / n) * h2

    floor = DENOM_FLOOR * h2 * c2 / n
    floored = denom < floor
    denom = np.maximum(denom, floor)

    lam = np.zeros(m)
    ok = live & (denom > 0.0)
    lam[ok] = 2.0 * np.abs(hy[ok]) ** 2 / denom[ok]

    eta = config.eta
    return DetectionFrame(
        statistics=lam,
        alpha_hat=alpha,
        decisions=lam > eta,
        h_norm2=h2,
        denominators=denom,
        eta=eta,
        n_floored=int(np.count_nonzero(floored & live)),
    )
