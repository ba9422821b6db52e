"""Receive chain: blind per-user gain, nearest-point detection, bit-error counting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import Constellation


@dataclass(frozen=True)
class BerRecord:
    bit_errors: int
    bits_total: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_total if self.bits_total else 0.0

    def __add__(self, other: BerRecord) -> BerRecord:
        return BerRecord(self.bit_errors + other.bit_errors, self.bits_total + other.bits_total)


def _abs_component_sum(r: np.ndarray) -> np.ndarray:
    return np.abs(r.real) + np.abs(r.imag)


def blind_gain(block: np.ndarray, constellation: Constellation, user: int) -> float:
    """Scale estimate for one user from the mean absolute I/Q amplitudes.

    ``f_m = L E[|Re s| + |Im s|] / sum_l (|Re r_m[l]| + |Im r_m[l]|)`` with the
    expectation taken exactly over the constellation.

    Raises:
        ValueError: if the user's received column is identically zero.
    """
    col = np.asarray(block)[:, user]
    total = float(_abs_component_sum(col).sum())
    if total == 0.0:
        raise ValueError(f"received samples of user {user} are all zero")
    return col.shape[0] * constellation.mean_abs_components / total


def blind_gains(block: np.ndarray, constellation: Constellation) -> np.ndarray:
    block = np.asarray(block)
    return np.array([blind_gain(block, constellation, m) for m in range(block.shape[1])])


def moment_ratio_gain(block: np.ndarray, sent: np.ndarray, user: int) -> float:
    """Data-aided reference ``E|s_m|^2 / Re E[s_m r_m^*]``."""
    r = np.asarray(block)[:, user]
    s = np.asarray(sent)[:, user]
    return float(np.mean(np.abs(s) ** 2) / np.mean(s * r.conj()).real)


def detect_indices(block: np.ndarray, gains, constellation: Constellation) -> np.ndarray:
    gains = np.asarray(gains, dtype=float)
    if np.any(~np.isfinite(gains)) or np.any(gains <= 0):
        raise ValueError("gains must be finite and positive")
    return constellation.nearest(np.asarray(block) * gains)


def detect(block: np.ndarray, gains, constellation: Constellation) -> np.ndarray:
    """Scale each user's samples by its gain and slice to the nearest point.

    Exact ties resolve to the point with the smaller label.
    """
    return constellation.modulate(detect_indices(block, gains, constellation))


def count_bit_errors(sent: np.ndarray, detected: np.ndarray, constellation: Constellation) -> BerRecord:
    """Hamming distance between Gray labels, summed over every symbol slot."""
    sent = np.asarray(sent)
    detected = np.asarray(detected)
    if sent.shape != detected.shape:
        raise ValueError(f"shape mismatch: sent {sent.shape} vs detected {detected.shape}")
    wrong = np.bitwise_xor(constellation.nearest(sent), constellation.nearest(detected))
    errors = int(constellation.label_bits(wrong).sum())
    return BerRecord(errors, sent.size * constellation.bits_per_symbol)
