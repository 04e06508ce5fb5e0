"""Downlink communication scene and throughput metrics.

Unit-power QPSK symbols over a flat Rayleigh channel; the transmit SNR
convention is snr = 1 / N0, which coincides with the per-symbol SNR because
the constellation has unit average power.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

QPSK = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2.0)


@dataclass(frozen=True)
class CommScene:
    """Channel, intended symbols, and noise level for one frame."""

    h: np.ndarray  # (K, N_t)
    s: np.ndarray  # (K, L)
    n0: float

    @property
    def n_users(self) -> int:
        return self.h.shape[0]


def rayleigh_channel(k: int, n_t: int, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. CN(0, 1) channel matrix."""
    return (rng.standard_normal((k, n_t)) + 1j * rng.standard_normal((k, n_t))) / np.sqrt(2.0)


def qpsk_symbols(k: int, length: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform unit-power QPSK frame."""
    return QPSK[rng.integers(0, 4, size=(k, length))]


def noise_power(snr_db: float) -> float:
    """N0 under the snr = 1/N0 convention (0 dB -> N0 = 1)."""
    return 10.0 ** (-snr_db / 10.0)


def sample_scene(k: int, n_t: int, length: int, snr_db: float, rng: np.random.Generator) -> CommScene:
    if k > n_t:
        raise ValueError(f"K = {k} users exceed N_t = {n_t} transmit antennas")
    return CommScene(
        h=rayleigh_channel(k, n_t, rng),
        s=qpsk_symbols(k, length, rng),
        n0=noise_power(snr_db),
    )


def mui_energy(h: np.ndarray, x: np.ndarray, s: np.ndarray) -> float:
    """Multi-user interference energy ||H X - S||_F^2."""
    return float(np.linalg.norm(h @ x - s) ** 2)


def per_user_sinr(h: np.ndarray, x: np.ndarray, s: np.ndarray, n0: float) -> np.ndarray:
    """Per-frame SINR per user: 1 / (mean interference power + N0).

    The expectations are realized as averages over the L symbols of the
    frame; the signal power is the unit symbol power.
    """
    if n0 <= 0:
        raise ValueError("N0 must be positive")
    residual = h @ x - s
    interference = np.mean(np.abs(residual) ** 2, axis=1)
    return 1.0 / (interference + n0)


def sum_rate(sinrs: np.ndarray) -> float:
    """Achievable downlink sum rate, bits per channel use."""
    return float(np.sum(np.log2(1.0 + np.asarray(sinrs))))


def normalized_sum_rate(sinrs: np.ndarray, n0: float) -> float:
    """Sum rate divided by the zero-MUI benchmark K * log2(1 + 1/N0)."""
    k = np.asarray(sinrs).size
    return sum_rate(sinrs) / (k * np.log2(1.0 + 1.0 / n0))
