"""Uniform planar array geometry: steering vectors and the spatial-frequency grid.

Conventions fixed project-wide:

* element (p, q) of an n_x-by-n_y panel sits at half-wavelength offsets
  (p, q), p = 0..n_x-1, q = 0..n_y-1;
* its steering phase is exp(j*2*pi*(p*nu_x + q*nu_y));
* entries are ordered with the x index running fastest, i.e. the full
  vector is kron(a_y, a_x) of the two axis factors;
* grid bins are indexed row-major over (i, j) with nu values inclusive of
  both endpoints of [-0.5, 0.5].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class UpaConfig:
    """Transmit/receive panel sizes of the colocated MIMO front end."""

    tx_x: int
    tx_y: int
    rx_x: int
    rx_y: int

    def __post_init__(self):
        for name in ("tx_x", "tx_y", "rx_x", "rx_y"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    @property
    def n_tx(self) -> int:
        return self.tx_x * self.tx_y

    @property
    def n_rx(self) -> int:
        return self.rx_x * self.rx_y

    @property
    def n_virtual(self) -> int:
        """Virtual channel count after transmit correlation."""
        return self.n_tx * self.n_rx


@dataclass(frozen=True)
class SpatialBin:
    """A single angular bin in spatial-frequency coordinates."""

    nu_x: float
    nu_y: float
    index: int

    @property
    def physical(self) -> bool:
        """True if (nu_x, nu_y) maps back to a real (theta, phi) direction."""
        return self.nu_x**2 + self.nu_y**2 <= 0.25 + 1e-12


class SpatialGrid:
    """Row-major discretization of the field of view into L_x x L_y bins."""

    def __init__(self, l_x: int, l_y: int):
        if l_x < 1 or l_y < 1:
            raise ValueError("grid dims must be >= 1")
        self.l_x = l_x
        self.l_y = l_y
        self.nu_x_values = np.linspace(-0.5, 0.5, l_x)
        self.nu_y_values = np.linspace(-0.5, 0.5, l_y)
        self.bins = [
            SpatialBin(float(self.nu_x_values[i]), float(self.nu_y_values[j]), i * l_y + j)
            for i in range(l_x)
            for j in range(l_y)
        ]

    def __len__(self) -> int:
        return self.l_x * self.l_y

    def __iter__(self):
        return iter(self.bins)

    def __getitem__(self, m: int) -> SpatialBin:
        return self.bins[m]

    def index_of(self, i: int, j: int) -> int:
        if not (0 <= i < self.l_x and 0 <= j < self.l_y):
            raise IndexError("grid coordinate out of range")
        return i * self.l_y + j

    def coords_of(self, m: int) -> tuple[int, int]:
        if not (0 <= m < len(self)):
            raise IndexError("bin index out of range")
        return divmod(m, self.l_y)

    def find_bin(self, nu_x: float, nu_y: float, tol: float = 1e-9) -> SpatialBin:
        """Locate the bin at (nu_x, nu_y); raises if no grid point is within tol."""
        i = int(np.argmin(np.abs(self.nu_x_values - nu_x)))
        j = int(np.argmin(np.abs(self.nu_y_values - nu_y)))
        if abs(self.nu_x_values[i] - nu_x) > tol or abs(self.nu_y_values[j] - nu_y) > tol:
            raise ValueError(f"({nu_x}, {nu_y}) is not on the {self.l_x}x{self.l_y} grid")
        return self.bins[self.index_of(i, j)]


def make_grid(l_x: int, l_y: int) -> SpatialGrid:
    """Uniform grid over [-0.5, 0.5]^2, both endpoints included, row-major indexing."""
    return SpatialGrid(l_x, l_y)


def steering_axis(n: int, nu: float) -> np.ndarray:
    """Axis factor [exp(j*2*pi*p*nu)] for p = 0..n-1."""
    return np.exp(2j * np.pi * nu * np.arange(n))


def steering(n_x: int, n_y: int, nu_x: float, nu_y: float) -> np.ndarray:
    """Steering vector of an n_x-by-n_y panel toward (nu_x, nu_y).

    Entry for element (p, q) is exp(j*2*pi*(p*nu_x + q*nu_y)); the x index
    runs fastest, so the result equals kron(a_y, a_x).
    """
    return np.kron(steering_axis(n_y, nu_y), steering_axis(n_x, nu_x))


def tx_steering(upa: UpaConfig, b: SpatialBin) -> np.ndarray:
    return steering(upa.tx_x, upa.tx_y, b.nu_x, b.nu_y)


def rx_steering(upa: UpaConfig, b: SpatialBin) -> np.ndarray:
    return steering(upa.rx_x, upa.rx_y, b.nu_x, b.nu_y)


def effective_channel(a_t: np.ndarray, a_r: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """Virtual-channel response h = a_r kron (a_t^T R) for transmit covariance R.

    The correlation receiver collapses the echo of a target seen through
    steering pair (a_t, a_r) to alpha * h with h of length n_tx * n_rx;
    channel n = r * n_tx + t pairs receive element r with transmit element t.
    """
    cov = np.asarray(cov)
    if cov.shape != (a_t.size, a_t.size):
        raise ValueError(f"covariance is {cov.shape}, expected ({a_t.size}, {a_t.size})")
    return np.kron(a_r, a_t @ cov)


def steering_matrix(upa: UpaConfig, grid: SpatialGrid, side: str = "tx") -> np.ndarray:
    """Stack of per-bin steering vectors, shape (len(grid), n_elements)."""
    if side == "tx":
        n_x, n_y = upa.tx_x, upa.tx_y
    elif side == "rx":
        n_x, n_y = upa.rx_x, upa.rx_y
    else:
        raise ValueError("side must be 'tx' or 'rx'")
    return np.array([steering(n_x, n_y, b.nu_x, b.nu_y) for b in grid])


def effective_channel_matrix(a_t_all: np.ndarray, a_r_all: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """effective_channel for every grid bin at once; rows follow bin indices."""
    rows = a_t_all @ cov
    return np.einsum("mr,mt->mrt", a_r_all, rows).reshape(a_t_all.shape[0], -1)
