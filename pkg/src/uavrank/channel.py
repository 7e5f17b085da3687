"""Narrowband MIMO channel synthesis, thresholded rank, and RSS."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scene import ArrayConfig

DEFAULT_THRESHOLD_RATIOS = (10.0, 100.0, 1000.0)


class OutOfCoverageError(RuntimeError):
    """Raised when a channel is requested for a link with no propagation path."""


@dataclass(frozen=True)
class ChannelMatrix:
    entries: np.ndarray  # complex, shape (N_r, N_t)
    frequency_hz: float

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.ndim != 2:
            raise ValueError(f"channel matrix must be 2D, got shape {e.shape}")
        if not np.all(np.isfinite(e)):
            raise ValueError("channel matrix entries must be finite")
        object.__setattr__(self, "entries", e)


def _direction(az: float, el: float) -> np.ndarray:
    c = np.cos(el)
    return np.array([c * np.cos(az), c * np.sin(az), np.sin(el)])


def steering_vector(a: ArrayConfig, direction, wavelength_m: float) -> np.ndarray:
    """ULA response: element k gets phase 2*pi*k*spacing*(axis . direction)."""
    direction = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(direction) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    proj = float(np.dot(a.axis, direction))
    k = np.arange(a.elements)
    return np.exp(2j * np.pi * a.spacing_wavelengths * proj * k)


def synthesize_channel(paths, tx: ArrayConfig, rx: ArrayConfig,
                       wavelength_m: float, frequency_hz: float | None = None) -> ChannelMatrix:
    """Sum of gain-weighted steering outer products over all paths.

    Plane-wave approximation across the arrays: every path contributes
    gain * a_rx(aoa) a_tx(aod)^H.
    """
    paths = list(paths)
    if not paths:
        raise OutOfCoverageError("no propagation paths: receiver out of coverage")
    h = np.zeros((rx.elements, tx.elements), dtype=complex)
    for p in paths:
        a_tx = steering_vector(tx, _direction(*p.aod), wavelength_m)
        a_rx = steering_vector(rx, _direction(*p.aoa), wavelength_m)
        h += p.gain * np.outer(a_rx, a_tx.conj())
    if frequency_hz is None:
        frequency_hz = 299_792_458.0 / wavelength_m
    return ChannelMatrix(entries=h, frequency_hz=frequency_hz)


def singular_values(h: ChannelMatrix) -> np.ndarray:
    """Singular values of the channel matrix in descending order."""
    return np.linalg.svd(h.entries, compute_uv=False)


def channel_rank(h: ChannelMatrix, K: float) -> int:
    """Number of singular values strictly above sigma_1 / K."""
    if K <= 1:
        raise ValueError(f"threshold ratio K must be > 1, got {K}")
    sv = singular_values(h)
    if sv[0] == 0:
        raise ValueError("rank undefined for an all-zero channel matrix")
    return int(np.sum(sv > sv[0] / K))


def rss(paths, tx: ArrayConfig, rx: ArrayConfig, tx_power_w: float,
        wavelength_m: float, weights: str = "uniform") -> float:
    """Received signal strength in dBm.

    MIMO uses a fixed transmit beam and reports the per-receive-element
    average power; with single-element arrays this reduces exactly to the
    SISO coherent path sum.  `weights` selects the transmit beam: "uniform"
    (co-phased broadside) or "mrt" (matched to the channel).
    """
    paths = list(paths)
    if not paths:
        raise OutOfCoverageError("no propagation paths: receiver out of coverage")
    h = synthesize_channel(paths, tx, rx, wavelength_m).entries
    if weights == "uniform":
        w = np.ones(tx.elements) / np.sqrt(tx.elements)
    elif weights == "mrt":
        _, _, vh = np.linalg.svd(h)
        w = vh[0].conj()
    else:
        raise ValueError(f"unknown weight mode {weights!r}")
    p_rx = tx_power_w * float(np.linalg.norm(h @ w) ** 2) / rx.elements
    if p_rx == 0.0:
        return -np.inf
    return 10.0 * np.log10(p_rx * 1e3)
