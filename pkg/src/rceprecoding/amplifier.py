"""Ideal-limiter power amplifier and the three power metrics.

The limiter is AM-AM only: amplitudes above the saturation level are set to
that level and the phase is kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PaConfig:
    """Total available power ``P_tx`` shared equally by ``antennas`` amplifiers."""

    total_available_power: float
    antennas: int

    def __post_init__(self):
        if not (self.total_available_power > 0 and math.isfinite(self.total_available_power)):
            raise ValueError("total available power must be positive and finite")
        if self.antennas < 1:
            raise ValueError("need at least one antenna")

    @property
    def per_antenna_power(self) -> float:
        return self.total_available_power / self.antennas

    @property
    def saturation_amplitude(self) -> float:
        return math.sqrt(self.per_antenna_power)


@dataclass(frozen=True)
class PowerReport:
    available: float
    radiated: float
    consumed: float


# a few ulps inside the limit, so rounding in |v * scale| can never land above it
INWARD = 1.0 - 2.0**-50


def shrink_to_disk(v: np.ndarray, a: float) -> np.ndarray:
    """Scale entries with ``|v| > a`` back onto (just inside) the circle of radius ``a``."""
    v = np.asarray(v, dtype=np.complex128)
    mag = np.abs(v)
    over = mag > a
    return np.where(over, v * (a * INWARD / np.where(over, mag, 1.0)), v)


def clip(x: np.ndarray, config: PaConfig) -> np.ndarray:
    """Apply the limiter entrywise to ``x`` (last axis = antennas).

    Entries with ``|x_n| <= sqrt(P_tx/N)`` pass unchanged, larger ones are
    scaled down to that magnitude.
    """
    return shrink_to_disk(x, config.saturation_amplitude)


def project_constant_envelope(v: np.ndarray, config: PaConfig, previous: np.ndarray | None = None) -> np.ndarray:
    """Rescale every entry to magnitude ``sqrt(P_tx/N)``.

    Zero entries take the phase of ``previous`` (or phase 0 without it).
    """
    v = np.asarray(v, dtype=np.complex128)
    a = config.saturation_amplitude
    mag = np.abs(v)
    zero = mag == 0
    out = np.where(zero, 1.0, v / np.where(zero, 1.0, mag)) * a
    if previous is not None and zero.any():
        prev = np.broadcast_to(previous, v.shape)
        pmag = np.abs(prev)
        fallback = np.where(pmag > 0, prev / np.where(pmag > 0, pmag, 1.0), 1.0) * a
        out = np.where(zero, fallback, out)
    return out


def _as_block(pa_outputs) -> np.ndarray:
    block = np.atleast_2d(np.asarray(pa_outputs))
    if block.shape[0] == 0:
        raise ValueError("power metrics need at least one transmit vector")
    return block


def consumed_power(pa_outputs: np.ndarray, config: PaConfig) -> float:
    """Sample estimate of ``sum_n sqrt(P_tx/N) E|x_PA,n|`` over a block of shape ``(K, N)``."""
    block = _as_block(pa_outputs)
    return float(config.saturation_amplitude * np.abs(block).mean(axis=0).sum())


def radiated_power(pa_outputs: np.ndarray) -> float:
    """Sample mean of ``||x_PA||^2`` over a block of shape ``(K, N)``."""
    block = _as_block(pa_outputs)
    return float((np.abs(block) ** 2).sum(axis=1).mean())


def power_report(pa_outputs: np.ndarray, config: PaConfig) -> PowerReport:
    return PowerReport(
        available=config.total_available_power,
        radiated=radiated_power(pa_outputs),
        consumed=consumed_power(pa_outputs, config),
    )
