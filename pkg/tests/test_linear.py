import itertools

import numpy as np
import pytest

from oracles import complex_fd_gradient, scan_minimizer
from rceprecoding.amplifier import PaConfig
from rceprecoding.linear import (
    LrceSettings,
    fit_lrce,
    lrce_cost,
    lrce_gradient_P,
    mse_linear,
    optimal_f_linear,
    peak_penalty,
    selection_masks,
    selection_matrix,
    wiener_filter,
)
from rceprecoding.signals import NoiseModel, all_symbol_vectors, draw_channel, draw_symbols

from conftest import crandn


def test_wiener_scalar_example():
    wf = wiener_filter(np.array([[1.0 + 0j]]), NoiseModel.identity(1), PaConfig(1.0, 1))
    assert wf.matrix[0, 0] == pytest.approx(1.0)
    assert wf.receive_gain == pytest.approx(0.5)


@pytest.mark.parametrize("scale", [1e-3, 1.0, 50.0])
def test_wiener_power_normalization(scale):
    H = scale * draw_channel(3, 6, 2)
    wf = wiener_filter(H, NoiseModel.identity(3), PaConfig(2.5, 6))
    assert np.linalg.norm(wf.matrix) ** 2 == pytest.approx(2.5)


def test_wiener_rejects_zero_channel():
    with pytest.raises(ValueError):
        wiener_filter(np.zeros((2, 4), complex), NoiseModel.identity(2), PaConfig(1.0, 4))


def test_cost_trivial_values(qam16):
    H = draw_channel(2, 4, 0)
    noise = NoiseModel.identity(2)
    cfg = PaConfig(1.0, 4)
    S = draw_symbols(qam16, 2, 32, 1)
    P = crandn(np.random.default_rng(0), 4, 2)
    assert lrce_cost(P, 0.0, S, H, noise, cfg, 0.0) == pytest.approx(2.0)
    for lam in (0.0, 0.3, 0.9):
        assert lrce_cost(np.zeros((4, 2)), 0.0, S, H, noise, cfg, lam) == pytest.approx((1 - lam) * 2)
    tiny = 1e-3 * P
    assert lrce_cost(tiny, 0.7, S, H, noise, cfg, 1.0) == 0.0


def test_mse_matches_monte_carlo(rng):
    H = crandn(rng, 2, 4)
    P = crandn(rng, 4, 2)
    noise = NoiseModel.identity(2)
    S = (rng.choice([-1, 1], (200000, 2)) + 1j * rng.choice([-1, 1], (200000, 2))) / np.sqrt(2)
    eta = crandn(rng, 200000, 2)
    f = 0.6
    empirical = np.mean(np.sum(np.abs(f * (S @ (H @ P).T + eta) - S) ** 2, axis=1))
    assert mse_linear(P, f, H, noise) == pytest.approx(empirical, rel=0.01)


def test_selection_matrix_examples():
    cfg = PaConfig(2.0, 2)  # threshold 1 per antenna
    s = np.array([1.0 + 0j])
    assert np.array_equal(selection_matrix(np.array([[0.5], [0.9]]), s, cfg), np.zeros((2, 2)))
    assert np.array_equal(selection_matrix(np.array([[1.5], [2.0]]), s, cfg), np.eye(2))
    assert np.array_equal(selection_matrix(np.array([[0.2], [1.2]]), s, cfg), np.diag([0.0, 1.0]))
    assert np.array_equal(selection_matrix(np.array([[1.2j], [0.2]]), s, cfg), np.diag([1.0, 0.0]))
    # boundary: exactly at the threshold is not a violation
    assert not selection_masks(np.array([[1.0], [0.0]]), s, cfg).any()


def _away_from_kinks(P, S, cfg, margin=1e-3):
    power = np.abs(S @ P.T) ** 2
    return np.min(np.abs(power - cfg.per_antenna_power)) > margin * cfg.per_antenna_power


def random_linear_instance(rng, qam16, N=4, M=2, K=16):
    noise = NoiseModel.identity(M)
    while True:
        H = crandn(rng, M, N)
        P = crandn(rng, N, M)
        if np.trace(H @ P).real < 0:
            P = -P
        S = draw_symbols(qam16, M, K, int(rng.integers(1 << 30)))
        cfg = PaConfig(float(np.mean(np.abs(S @ P.T) ** 2)) * N, N)
        if _away_from_kinks(P, S, cfg):
            return H, P, S, noise, cfg


@pytest.mark.parametrize("lam", [0.0, 0.1, 0.5, 0.9])
def test_gradient_matches_finite_differences(rng, qam16, lam):
    for _ in range(5):
        H, P, S, noise, cfg = random_linear_instance(rng, qam16)
        f = float(rng.uniform(0.2, 1.5))
        assert selection_masks(P, S, cfg).any()
        G = lrce_gradient_P(P, f, S, H, noise, cfg, lam)
        numeric = complex_fd_gradient(lambda Z: lrce_cost(Z, f, S, H, noise, cfg, lam), P)
        assert np.linalg.norm(2 * G.conj() - numeric) / np.linalg.norm(numeric) < 1e-5


def test_gradient_zero_when_f_and_penalty_vanish(rng, qam16):
    H, P, S, noise, cfg = random_linear_instance(rng, qam16)
    G = lrce_gradient_P(1e-6 * P, 0.0, S, H, noise, cfg, 0.0)
    assert not np.any(G)


def test_gradient_without_violations_is_mse_gradient(rng, qam16):
    H, P, S, noise, cfg = random_linear_instance(rng, qam16)
    small = 1e-4 * P
    f = 0.8
    G = lrce_gradient_P(small, f, S, H, noise, cfg, 0.3)
    expected = 0.7 * (f * f * H.T @ H.conj() @ small.conj() - f * H.T)
    np.testing.assert_allclose(G, expected, atol=1e-14)


def test_optimal_f_examples():
    noise = NoiseModel.identity(1)
    one = np.array([[1.0 + 0j]])
    assert optimal_f_linear(one, one, noise) == pytest.approx(0.5)
    assert optimal_f_linear(np.zeros((1, 1)), one, noise) == 0.0


def test_optimal_f_scaling_law(rng):
    H = crandn(rng, 2, 4)
    P0 = np.linalg.pinv(H)  # H P0 = I, positive-real trace
    noise = NoiseModel.identity(2)
    a = np.linalg.norm(H @ P0) ** 2
    for c in (0.1, 1.0, 7.0):
        assert optimal_f_linear(c * P0, H, noise) == pytest.approx(c * 2 / (c * c * a + 2))


def test_optimal_f_is_scan_minimizer(rng, qam16):
    for lam in (0.0, 0.1, 0.6):
        H, P, S, noise, cfg = random_linear_instance(rng, qam16)
        f_star = optimal_f_linear(P, H, noise)
        found = scan_minimizer(lambda f: lrce_cost(P, f, S, H, noise, cfg, lam), 0.0, 4 * f_star + 1)
        assert abs(found - f_star) <= 1e-4


def test_exhaustive_penalty_equals_expectation(qam16):
    H = draw_channel(2, 4, 5)
    P = wiener_filter(H, NoiseModel.identity(2), PaConfig(1.0, 4)).matrix
    cfg = PaConfig(1.0, 4)
    # oracle: explicit enumeration of all 256 input vectors
    total = 0.0
    for a, b in itertools.product(qam16.points, repeat=2):
        x = P @ np.array([a, b])
        total += sum(max(abs(v) ** 2 - cfg.per_antenna_power, 0.0) for v in x)
    exact = total / 256
    assert peak_penalty(P, all_symbol_vectors(qam16, 2), cfg) == pytest.approx(exact, rel=1e-12)
    stratified = draw_symbols(qam16, 2, 512, seed=3, exhaustive=True)
    assert peak_penalty(P, stratified, cfg) == pytest.approx(exact, rel=1e-12)


def test_fit_monotone_and_converged(qam16):
    H = draw_channel(2, 8, 21)
    noise = NoiseModel.identity(2)
    cfg = PaConfig(2.0, 8)
    S = draw_symbols(qam16, 2, 512, 22)
    settings = LrceSettings(penalty_weight=0.1)
    lin, trace = fit_lrce(H, noise, cfg, settings, S)
    assert np.all(np.diff(trace.cost_history) <= 0)
    assert trace.converged and trace.relative_change <= settings.tolerance
    assert lin.receive_gain > 0 and lin.matrix.shape == (8, 2)
    assert trace.cost_history[-1] <= lrce_cost(*_wf_point(H, noise, cfg), S, H, noise, cfg, 0.1)


def _wf_point(H, noise, cfg):
    wf = wiener_filter(H, noise, cfg)
    return wf.matrix, wf.receive_gain


def test_fit_exhaustive_samples(qam16):
    H = draw_channel(2, 8, 30)
    noise = NoiseModel.identity(2)
    cfg = PaConfig(1.0, 8)
    S = all_symbol_vectors(qam16, 2)
    lin, trace = fit_lrce(H, noise, cfg, LrceSettings(), S)
    assert np.all(np.diff(trace.cost_history) <= 0)
    assert trace.converged


def test_fit_stationary_when_penalty_inactive(qam16):
    H = draw_channel(2, 8, 3)
    noise = NoiseModel.identity(2)
    cfg = PaConfig(1e12, 8)
    S = draw_symbols(qam16, 2, 256, 4)
    lin, trace = fit_lrce(H, noise, cfg, LrceSettings(tolerance=1e-8), S)
    assert trace.converged
    assert peak_penalty(lin.matrix, S, cfg) == 0.0
    grad = lrce_gradient_P(lin.matrix, lin.receive_gain, S, H, noise, cfg, 0.1)
    assert np.linalg.norm(grad) < 1e-6


def test_fit_fixed_selection_variant(qam16):
    H = draw_channel(2, 8, 8)
    noise = NoiseModel.identity(2)
    S = draw_symbols(qam16, 2, 256, 9)
    lin, trace = fit_lrce(H, noise, PaConfig(1.0, 8), LrceSettings(fixed_selection=True), S)
    assert np.all(np.diff(trace.cost_history) <= 0)


def test_fit_reports_nonconvergence(qam16):
    H = draw_channel(2, 8, 8)
    S = draw_symbols(qam16, 2, 64, 9)
    _, trace = fit_lrce(H, NoiseModel.identity(2), PaConfig(1.0, 8),
                        LrceSettings(max_iterations=2, tolerance=1e-15), S)
    assert trace.iterations_run == 2 and not trace.converged


def test_fit_rejects_zero_weight(qam16):
    H = draw_channel(2, 4, 0)
    with pytest.raises(ValueError):
        fit_lrce(H, NoiseModel.identity(2), PaConfig(1.0, 4), LrceSettings(penalty_weight=0.0),
                 draw_symbols(qam16, 2, 8, 0))


@pytest.mark.parametrize("kwargs", [{"penalty_weight": 1.0}, {"penalty_weight": -0.1}, {"step_size": 0.0},
                                    {"tolerance": 0.0}, {"sample_count": 0}])
def test_settings_validation(kwargs):
    with pytest.raises(ValueError):
        LrceSettings(**kwargs)
