import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rceprecoding.amplifier import (
    PaConfig,
    clip,
    consumed_power,
    power_report,
    project_constant_envelope,
    radiated_power,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)
cvec = st.tuples(arrays(float, 6, elements=finite), arrays(float, 6, elements=finite)).map(
    lambda t: t[0] + 1j * t[1])
ptx = st.floats(1e-3, 1e3)


def test_linear_region_identity():
    assert clip(np.array([0.3 + 0j]), PaConfig(1.0, 1))[0] == 0.3


def test_saturation_keeps_phase():
    out = clip(np.array([2 * np.exp(1j * np.pi / 4)]), PaConfig(1.0, 1))
    assert out[0] == pytest.approx(np.exp(1j * np.pi / 4), abs=1e-15)


def test_boundary_is_linear():
    cfg = PaConfig(4.0, 4)
    x = np.array([cfg.saturation_amplitude * np.exp(0.7j)])
    assert clip(x, cfg)[0] == x[0]


def test_zero_passes():
    assert clip(np.zeros(3, complex), PaConfig(1.0, 3)).tolist() == [0, 0, 0]


def test_config_validation():
    with pytest.raises(ValueError):
        PaConfig(0.0, 4)
    with pytest.raises(ValueError):
        PaConfig(1.0, 0)
    assert PaConfig(8.0, 2).saturation_amplitude == 2.0


@given(cvec, ptx)
def test_clip_idempotent_and_feasible(x, p):
    cfg = PaConfig(p, 6)
    y = clip(x, cfg)
    np.testing.assert_array_equal(clip(y, cfg), y)
    assert np.all(np.abs(y) <= cfg.saturation_amplitude * (1 + 1e-15))


@given(cvec, cvec, ptx)
def test_clip_non_expansive(x, y, p):
    cfg = PaConfig(p, 6)
    assert np.linalg.norm(clip(x, cfg) - clip(y, cfg)) <= np.linalg.norm(x - y) * (1 + 1e-12) + 1e-12


@given(arrays(complex, (5, 6), elements=st.complex_numbers(max_magnitude=100, allow_nan=False)), ptx)
@settings(max_examples=60)
def test_power_ordering(block, p):
    cfg = PaConfig(p, 6)
    out = clip(block, cfg)
    rep = power_report(out, cfg)
    slack = 1e-12 * p
    assert 0 <= rep.radiated <= rep.consumed + slack
    assert rep.consumed <= p + slack


def test_constant_envelope_identities():
    cfg = PaConfig(3.0, 8)
    rng = np.random.default_rng(0)
    block = project_constant_envelope(rng.standard_normal((50, 8)) + 1j * rng.standard_normal((50, 8)), cfg)
    assert radiated_power(block) == pytest.approx(3.0, rel=1e-14)
    assert consumed_power(block, cfg) == pytest.approx(3.0, rel=1e-14)


def test_power_examples():
    cfg = PaConfig(1.0, 1)
    assert consumed_power(np.array([[0.5]]), cfg) == 0.5
    assert consumed_power(np.zeros((4, 1)), cfg) == 0.0
    assert radiated_power(np.array([[0.5, 0.5j]])) == pytest.approx(0.5)
    assert radiated_power(np.zeros((3, 2))) == 0.0


def test_power_rejects_empty():
    with pytest.raises(ValueError):
        radiated_power(np.zeros((0, 4)))
    with pytest.raises(ValueError):
        consumed_power(np.zeros((0, 4)), PaConfig(1.0, 4))


def test_ce_projection_zero_entry_phase():
    cfg = PaConfig(4.0, 1)
    assert project_constant_envelope(np.array([0j]), cfg)[0] == 2.0
    prev = np.array([2j])
    assert project_constant_envelope(np.array([0j]), cfg, prev)[0] == pytest.approx(2j)
