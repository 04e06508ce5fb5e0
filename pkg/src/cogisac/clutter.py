"""Clutter-plus-noise generation: 2D circular complex AR field with Student-t innovations.

The disturbance hitting the N = n_rx * n_tx virtual channels is modeled as a
causal quarter-plane autoregression over a 2D lattice,

    c[i, j] = sum_{(di, dj) != (0, 0)} rho[di, dj] * c[i - di, j - dj] + w[i, j],

driven by circular complex Student-t innovations w, then flattened row-major
onto the channel vector. The (n_rx, n_tx) lattice matches the row-major
channel ordering of `upa.effective_channel`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .upa import SpatialGrid, UpaConfig

#: minimum squared magnitude of the AR symbol before the PSD is declared unstable
PSD_DENOM_FLOOR = 1e-12


class ArInstabilityError(ValueError):
    """AR coefficients whose spectral denominator vanishes on the torus."""


@dataclass(frozen=True)
class ArCoefficients:
    """Quarter-plane AR coefficients; rho[di, dj] weights lag (di, dj), rho[0, 0] unused."""

    rho: np.ndarray

    def __post_init__(self):
        rho = np.atleast_2d(np.asarray(self.rho, dtype=float))
        if abs(rho[0, 0]) > 0:
            raise ValueError("rho[0, 0] is the current sample and must be zero")
        object.__setattr__(self, "rho", rho)

    @property
    def abs_sum(self) -> float:
        return float(np.abs(self.rho).sum())

    def symbol(self, nu_x, nu_y) -> np.ndarray:
        """1 - sum rho[n, l] exp(-j*2*pi*(n*nu_x + l*nu_y)), broadcast over inputs."""
        nu_x = np.asarray(nu_x, dtype=float)
        nu_y = np.asarray(nu_y, dtype=float)
        out = np.ones(np.broadcast(nu_x, nu_y).shape, dtype=complex)
        for n in range(self.rho.shape[0]):
            for l in range(self.rho.shape[1]):
                if self.rho[n, l]:
                    out -= self.rho[n, l] * np.exp(-2j * np.pi * (n * nu_x + l * nu_y))
        return out

    def check_stable(self, n_check: int = 128) -> None:
        """Raise ArInstabilityError if |symbol|^2 dips below the floor on a fine torus grid."""
        nu = np.arange(n_check) / n_check - 0.5
        d = self.symbol(nu[:, None], nu[None, :])
        if np.min(np.abs(d) ** 2) < PSD_DENOM_FLOOR or self.abs_sum >= 1.0:
            raise ArInstabilityError(
                f"AR coefficients unstable (sum |rho| = {self.abs_sum:.3g})"
            )


def paper_coefficients() -> ArCoefficients:
    """The default spatial-correlation matrix used throughout the experiments."""
    return ArCoefficients(np.array([
        [0.0, 0.1, 0.1],
        [0.1, 0.0, 0.0],
        [0.05, 0.0, 0.0],
    ]))


@dataclass(frozen=True)
class StudentTNoise:
    """Circular complex heavy-tailed innovation law.

    Sampled via the compound-Gaussian representation: a complex Gaussian
    scaled by the square root of an inverse-gamma texture with shape mu,
    normalized so the variance equals sigma_w2. mu -> inf recovers the
    complex Gaussian.
    """

    mu: float = 2.0
    sigma_w2: float = 1.0

    def __post_init__(self):
        if self.mu <= 1:
            raise ValueError("tail shape mu must exceed 1 for the variance to exist")
        if self.sigma_w2 <= 0:
            raise ValueError("sigma_w2 must be positive")

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray | complex:
        shape = () if size is None else tuple(np.atleast_1d(size))
        # texture = (mu - 1) / Gamma(mu, 1) has unit mean, so E|w|^2 = sigma_w2
        texture = (self.mu - 1.0) / rng.standard_gamma(self.mu, size=shape)
        g = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        w = np.sqrt(self.sigma_w2 * texture / 2.0) * g
        return complex(w) if size is None else w


def sample_student_t(noise: StudentTNoise, rng: np.random.Generator) -> complex:
    """One circular complex Student-t variate with E|w|^2 = sigma_w2."""
    return noise.sample(rng)


@dataclass(frozen=True)
class ClutterField:
    """Fully-specified generator for one family of clutter realizations."""

    coefficients: ArCoefficients = field(default_factory=paper_coefficients)
    noise: StudentTNoise = field(default_factory=StudentTNoise)
    burn_in: int = 50

    def __post_init__(self):
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")


def generate_field(
    fld: ClutterField, n_x: int, n_y: int, rng: np.random.Generator
) -> np.ndarray:
    """One (n_x, n_y) realization of the AR field, burn-in margin discarded."""
    return generate_fields(fld, n_x, n_y, 1, rng)[0]


def generate_fields(
    fld: ClutterField, n_x: int, n_y: int, count: int, rng: np.random.Generator
) -> np.ndarray:
    """A batch of `count` independent field realizations, shape (count, n_x, n_y).

    The recursion starts from zeros outside a burn-in margin prepended on both
    axes; the row recursion runs through scipy's lfilter, which evaluates the
    identical recurrence with zero initial conditions.
    """
    if n_x < 1 or n_y < 1 or count < 1:
        raise ValueError("dims and count must be >= 1")
    fld.coefficients.check_stable()
    rho = fld.coefficients.rho
    p = rho.shape[0] - 1
    b = fld.burn_in
    gx, gy = n_x + b, n_y + b
    w = fld.noise.sample(rng, size=(count, gx, gy))
    if not np.any(rho):
        return w[:, b:, b:]
    c = np.empty((count, gx, gy), dtype=complex)
    a_row = np.r_[1.0, -rho[0, 1:]]
    for i in range(gx):
        known = w[:, i, :].copy()
        for di in range(1, min(p, i) + 1):
            for dj in range(rho.shape[1]):
                if rho[di, dj]:
                    if dj == 0:
                        known += rho[di, dj] * c[:, i - di, :]
                    else:
                        known[:, dj:] += rho[di, dj] * c[:, i - di, :-dj]
        c[:, i, :] = lfilter([1.0], a_row, known, axis=-1)
    return c[:, b:, b:]


def psd(coefficients: ArCoefficients, sigma_w2: float, grid: SpatialGrid) -> np.ndarray:
    """Theoretical power spectral density on the grid, shape (l_x, l_y).

    S(nu_x, nu_y) = sigma_w2 * |1 - sum rho[n, l] exp(-j*2*pi*(n*nu_x + l*nu_y))|^-2.
    """
    d = coefficients.symbol(grid.nu_x_values[:, None], grid.nu_y_values[None, :])
    d2 = np.abs(d) ** 2
    if np.min(d2) < PSD_DENOM_FLOOR:
        raise ArInstabilityError("PSD denominator vanishes on the evaluation grid")
    return sigma_w2 / d2


def autocovariance(
    coefficients: ArCoefficients, sigma_w2: float, max_lag: int, n_fft: int = 256
) -> np.ndarray:
    """Stationary autocovariance r[dx, dy] for 0 <= dx, dy <= max_lag via FFT of the PSD."""
    nu = np.fft.fftfreq(n_fft)
    d = coefficients.symbol(nu[:, None], nu[None, :])
    s = sigma_w2 / np.abs(d) ** 2
    r = np.fft.ifft2(s).real
    if max_lag >= n_fft // 2:
        raise ValueError("max_lag too large for the FFT grid")
    return r[: max_lag + 1, : max_lag + 1]


def true_covariance(fld: ClutterField, upa: UpaConfig) -> np.ndarray:
    """Exact covariance of the vectorized clutter vector, shape (N, N).

    Theory path only: dense, intended for validation at desk scale.
    """
    n_r, n_t = upa.n_rx, upa.n_tx
    r = autocovariance(
        fld.coefficients, fld.noise.sigma_w2, max_lag=max(n_r, n_t),
        n_fft=max(256, 4 * max(n_r, n_t)),
    )
    rows = np.arange(n_r * n_t) // n_t
    cols = np.arange(n_r * n_t) % n_t
    dx = np.abs(rows[:, None] - rows[None, :])
    dy = np.abs(cols[:, None] - cols[None, :])
    # quarter-plane AR with real coefficients: r is real and even in each lag
    return r[dx, dy].astype(complex)


def vectorize_to_channels(fld_matrix: np.ndarray, upa: UpaConfig) -> np.ndarray:
    """Flatten an (n_rx, n_tx) field row-major onto the length-N channel vector."""
    fld_matrix = np.asarray(fld_matrix)
    if fld_matrix.shape[-2] < upa.n_rx or fld_matrix.shape[-1] < upa.n_tx:
        raise ValueError(
            f"field {fld_matrix.shape} smaller than virtual array ({upa.n_rx}, {upa.n_tx})"
        )
    trimmed = fld_matrix[..., : upa.n_rx, : upa.n_tx]
    return trimmed.reshape(*fld_matrix.shape[:-2], upa.n_virtual)


def devectorize_from_channels(vec: np.ndarray, upa: UpaConfig) -> np.ndarray:
    """Inverse of vectorize_to_channels for exactly-sized fields."""
    vec = np.asarray(vec)
    return vec.reshape(*vec.shape[:-1], upa.n_rx, upa.n_tx)
