import itertools

import numpy as np
import pytest

from rceprecoding.signals import (
    NoiseModel,
    all_symbol_vectors,
    build_constellation,
    draw_channel,
    draw_noise,
    draw_symbol_indices,
    draw_symbols,
)


@pytest.mark.parametrize("order", [4, 16, 64])
def test_unit_energy(order):
    c = build_constellation(order)
    assert np.mean(np.abs(c.points) ** 2) == pytest.approx(1.0, abs=1e-15)
    assert len(c.points) == order and len(c.bit_labels) == order


def test_qpsk_points():
    c = build_constellation(4)
    expected = {complex(a, b) / np.sqrt(2) for a in (-1, 1) for b in (-1, 1)}
    assert set(np.round(c.points, 15)) == set(np.round(list(expected), 15))


def test_qam16_levels_by_enumeration():
    c = build_constellation(16)
    np.testing.assert_allclose(c.levels, np.array([-3, -1, 1, 3]) / np.sqrt(10))
    # oracle: enumerate the grid and average |point|^2
    grid = [complex(a, b) / np.sqrt(10) for a in (-3, -1, 1, 3) for b in (-3, -1, 1, 3)]
    assert np.mean(np.abs(grid) ** 2) == pytest.approx(1.0)
    assert sorted(np.round(c.points, 12), key=lambda z: (z.real, z.imag)) == sorted(
        np.round(grid, 12), key=lambda z: (z.real, z.imag))


@pytest.mark.parametrize("order", [3, 5, 8, 32, 256, 0])
def test_rejects_unsupported(order):
    with pytest.raises(ValueError):
        build_constellation(order)


@pytest.mark.parametrize("order", [4, 16, 64])
def test_gray_labels_adjacent_points(order):
    c = build_constellation(order)
    d = c.min_distance
    labels = [int(b, 2) for b in c.bit_labels]
    pairs = 0
    for i, j in itertools.combinations(range(order), 2):
        if abs(abs(c.points[i] - c.points[j]) - d) < 1e-12:
            pairs += 1
            assert bin(labels[i] ^ labels[j]).count("1") == 1
    side = int(np.sqrt(order))
    assert pairs == 2 * side * (side - 1)


def test_symmetric_grid():
    c = build_constellation(16)
    pts = set(np.round(c.points, 12))
    assert all(np.round(-p, 12) in pts and np.round(p.conjugate(), 12) in pts for p in c.points)


def test_draw_symbols_deterministic_and_members(qam16):
    a = draw_symbols(qam16, 10, 1000, seed=7)
    b = draw_symbols(qam16, 10, 1000, seed=7)
    assert a.shape == (1000, 10)
    assert np.array_equal(a, b)
    assert np.all(np.min(np.abs(a[..., None] - qam16.points), axis=-1) == 0)
    assert not np.array_equal(a, draw_symbols(qam16, 10, 1000, seed=8))


def test_draw_symbols_zero_mean(qam16):
    s = draw_symbols(qam16, 10, 20000, seed=3)
    assert abs(s.mean()) < 0.02


def test_exhaustive_drawing_covers_input_set(qam16):
    idx = draw_symbol_indices(qam16, 2, 256 * 3, seed=1, exhaustive=True)
    codes = idx[:, 0] * 16 + idx[:, 1]
    assert np.array_equal(np.bincount(codes, minlength=256), np.full(256, 3))
    with pytest.raises(ValueError):
        draw_symbol_indices(qam16, 2, 300, seed=1, exhaustive=True)


def test_all_symbol_vectors(qam16):
    S = all_symbol_vectors(qam16, 2)
    assert S.shape == (256, 2)
    assert len({tuple(row) for row in np.round(S, 12)}) == 256


def test_channel_statistics():
    H = np.stack([draw_channel(10, 100, seed=k) for k in range(50)])
    assert np.mean(np.abs(H) ** 2) == pytest.approx(1.0, rel=0.05)
    assert np.var(H.real) == pytest.approx(0.5, rel=0.05)
    assert abs(H.mean()) < 0.02


def test_channel_determinism_and_degenerate():
    assert np.array_equal(draw_channel(10, 100, 5), draw_channel(10, 100, 5))
    assert draw_channel(1, 1, 0).shape == (1, 1)


def test_noise_identity_covariance():
    model = NoiseModel.identity(4)
    w = draw_noise(model, 50000, seed=2)
    cov = w.T @ w.conj() / len(w)
    np.testing.assert_allclose(cov, np.eye(4), atol=0.03)
    assert model.trace == 4.0
    np.testing.assert_array_equal(model.covariance, np.eye(4))


def test_noise_zero_and_determinism():
    assert not np.any(draw_noise(NoiseModel.identity(3, 0.0), 10, seed=0))
    m = NoiseModel.identity(3)
    assert np.array_equal(draw_noise(m, 10, 4), draw_noise(m, 10, 4))


def test_noise_rejects_negative():
    with pytest.raises(ValueError):
        NoiseModel(np.array([1.0, -1.0]))
