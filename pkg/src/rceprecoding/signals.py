"""Constellations, symbol streams, Rayleigh channels and receiver noise.

Every random draw goes through :func:`make_rng`, a PCG64 generator seeded
from a :class:`numpy.random.SeedSequence`, so outputs are a pure function of
the arguments and the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SUPPORTED_ORDERS = (4, 16, 64)


def make_rng(*seed: int) -> np.random.Generator:
    """PCG64 generator for an entropy tuple such as ``(master, realization, stream)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(seed))))


def _gray(i: int) -> int:
    return i ^ (i >> 1)


@dataclass(frozen=True)
class Constellation:
    """Square QAM alphabet with unit average energy and Gray labels.

    ``points[k]`` carries the label ``k``; ``bit_labels[k]`` is the same label
    as a bit string (in-phase bits first).
    """

    order: int
    points: np.ndarray = field(repr=False)
    bit_labels: tuple[str, ...] = field(repr=False)

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.order))

    @property
    def levels(self) -> np.ndarray:
        """Sorted per-axis amplitude levels."""
        return np.unique(self.points.real)

    @property
    def min_distance(self) -> float:
        lv = self.levels
        return float(lv[1] - lv[0])

    @property
    def mean_abs_components(self) -> float:
        """E[|Re s| + |Im s|] over equiprobable points."""
        return float(np.mean(np.abs(self.points.real) + np.abs(self.points.imag)))

    def modulate(self, indices: np.ndarray) -> np.ndarray:
        return self.points[np.asarray(indices)]

    def nearest(self, samples: np.ndarray) -> np.ndarray:
        """Index of the closest point; exact ties go to the smaller index."""
        samples = np.asarray(samples)
        d = np.abs(samples[..., None] - self.points) ** 2
        return np.argmin(d, axis=-1)

    def label_bits(self, indices: np.ndarray) -> np.ndarray:
        """Bit matrix of shape ``indices.shape + (bits_per_symbol,)``."""
        k = self.bits_per_symbol
        shifts = np.arange(k - 1, -1, -1)
        return (np.asarray(indices)[..., None] >> shifts) & 1


def build_constellation(order: int) -> Constellation:
    """Unit-energy Gray-labelled square QAM of the given order (4, 16 or 64).

    Raises:
        ValueError: for non-square or unsupported orders.
    """
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported QAM order {order}; expected one of {SUPPORTED_ORDERS}")
    side = math.isqrt(order)
    half_bits = int(math.log2(side))
    norm = math.sqrt(2.0 * (order - 1) / 3.0)
    # gray code -> level position along one axis
    position = {_gray(i): i for i in range(side)}
    amplitude = [(2 * i - (side - 1)) / norm for i in range(side)]

    points = np.empty(order, dtype=np.complex128)
    labels = []
    for k in range(order):
        gi, gq = k >> half_bits, k & (side - 1)
        points[k] = complex(amplitude[position[gi]], amplitude[position[gq]])
        labels.append(format(k, f"0{2 * half_bits}b"))
    points.setflags(write=False)
    return Constellation(order=order, points=points, bit_labels=tuple(labels))


def draw_symbol_indices(
    constellation: Constellation,
    users: int,
    count: int,
    seed: int | tuple[int, ...],
    exhaustive: bool = False,
) -> np.ndarray:
    """Integer labels of shape ``(count, users)``.

    With ``exhaustive=True`` every one of the ``B**users`` vectors appears
    ``count // B**users`` times (in seeded random order); ``count`` must then
    be a multiple of ``B**users``.
    """
    if count < 1 or users < 1:
        raise ValueError("count and users must be positive")
    rng = make_rng(*np.atleast_1d(seed).tolist())
    B = constellation.order
    if not exhaustive:
        return rng.integers(0, B, size=(count, users))
    total = B**users
    if count % total:
        raise ValueError(f"exhaustive drawing needs count to be a multiple of {total}")
    grid = np.indices((B,) * users).reshape(users, -1).T
    out = np.tile(grid, (count // total, 1))
    return out[rng.permutation(count)]


def draw_symbols(
    constellation: Constellation,
    users: int,
    count: int,
    seed: int | tuple[int, ...],
    exhaustive: bool = False,
) -> np.ndarray:
    """Complex symbol vectors of shape ``(count, users)``; see :func:`draw_symbol_indices`."""
    return constellation.modulate(draw_symbol_indices(constellation, users, count, seed, exhaustive))


def all_symbol_vectors(constellation: Constellation, users: int) -> np.ndarray:
    """The full input set, ``B**users`` rows in lexicographic label order."""
    grid = np.indices((constellation.order,) * users).reshape(users, -1).T
    return constellation.modulate(grid)


def draw_channel(M: int, N: int, seed: int | tuple[int, ...]) -> np.ndarray:
    """``M x N`` i.i.d. CN(0, 1) channel matrix."""
    rng = make_rng(*np.atleast_1d(seed).tolist())
    return (rng.standard_normal((M, N)) + 1j * rng.standard_normal((M, N))) / math.sqrt(2.0)


@dataclass(frozen=True)
class NoiseModel:
    """Diagonal receiver-noise covariance, stored as per-user variances."""

    variances: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.variances, dtype=float)
        if v.ndim != 1 or np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("noise variances must be a finite non-negative vector")
        object.__setattr__(self, "variances", v)

    @classmethod
    def identity(cls, users: int, scale: float = 1.0) -> NoiseModel:
        return cls(np.full(users, float(scale)))

    @property
    def users(self) -> int:
        return self.variances.size

    @property
    def covariance(self) -> np.ndarray:
        return np.diag(self.variances)

    @property
    def trace(self) -> float:
        return float(self.variances.sum())


def draw_noise(model: NoiseModel, count: int, seed: int | tuple[int, ...]) -> np.ndarray:
    """``count`` circularly-symmetric Gaussian vectors, shape ``(count, M)``."""
    if count < 1:
        raise ValueError("count must be positive")
    rng = make_rng(*np.atleast_1d(seed).tolist())
    shape = (count, model.users)
    w = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return w * np.sqrt(model.variances / 2.0)
