import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holosim import pulses as pl
from holosim.units import mhz, ns


def test_square_and_ramp_areas():
    assert pl.envelope_area(pl.Envelope("square", 3.0, 2.0)) == pytest.approx(6.0, rel=1e-12)
    assert pl.envelope_area(pl.Envelope("sine_squared_ramp", 3.0, 2.0)) == pytest.approx(4.5, rel=1e-12)


def test_ramp_shape_values():
    e = pl.Envelope("sine_squared_ramp", 2.0, 8.0)
    assert e(0.0) == 0.0 and e(1.0) == pytest.approx(2.0 * math.sin(math.pi / 4) ** 2)
    assert e(4.0) == 2.0 and e(7.0) == pytest.approx(2.0 * math.sin(math.pi / 4) ** 2)
    assert e(-1.0) == 0.0 and e(9.0) == 0.0
    assert np.allclose(e(np.array([2.0, 6.0])), 2.0)


def test_ramp_continuity_at_plateau_edges():
    a, T = 1.7, 3.0
    e = pl.Envelope("sine_squared_ramp", a, T)
    for t in (T / 4, 3 * T / 4):
        assert abs(e(np.nextafter(t, 0)) - a) < 1e-12
        assert abs(e(np.nextafter(t, T)) - a) < 1e-12


def test_sampled_envelope_area_and_validation():
    e = pl.Envelope("sampled", 0.0, 2.0, ((0.0, 0.0), (1.0, 2.0), (2.0, 0.0)))
    assert pl.envelope_area(e) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        pl.Envelope("sampled", 0.0, 2.0, ((0.0, 0.0), (0.0, 1.0)))
    with pytest.raises(ValueError):
        pl.Envelope("sampled", 0.0, 2.0, ((0.0, -1.0), (1.0, 1.0)))
    with pytest.raises(ValueError):
        pl.Envelope("triangle", 1.0, 1.0)


def test_reference_two_qubit_pulse_area():
    # 2pi x 11.8 MHz per qubit, equal tones: sqrt2 * (3/4) A T close to pi
    area = math.sqrt(2) * pl.envelope_area(pl.Envelope("sine_squared_ramp", mhz(11.8), ns(40)))
    assert area == pytest.approx(3.1455, abs=5e-4)
    assert abs(area / math.pi - 1) < 2e-3


def test_not_gate_schedule():
    s = pl.build_single_loop_schedule(math.pi / 2, 0.0, math.pi, mhz(16))
    assert s.duration == pytest.approx(ns(31.25))
    w0, w1 = s.tone_amplitudes(s.duration / 3)
    assert w0 == pytest.approx(mhz(16) / math.sqrt(2)) and w1 == pytest.approx(w0)


def test_gamma_zero_phase_sets():
    s = pl.build_single_loop_schedule(1.0, 0.0, 0.0, 1e8)
    (_, _, a0, a1), (_, _, b0, b1) = s.phases.segments
    assert (a0, a1) == (0.0, math.pi) and (b0, b1) == (math.pi, 0.0)


def test_schedule_errors():
    with pytest.raises(ValueError):
        pl.build_single_loop_schedule(1.0, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        pl.PulseSchedule(pl.Envelope("square", 1.0, 1.0), 1.0, pl.PhaseSchedule(((0.0, 1.0, 0.0, 0.0),)))
    with pytest.raises(ValueError):
        pl.PhaseSchedule(((0.0, 1.0, 0, 0), (1.5, 2.0, 0, 0)))


@given(
    st.floats(0, math.pi),
    st.floats(0, 2 * math.pi, exclude_max=True),
    st.floats(0, 2 * math.pi, exclude_max=True),
    st.floats(1e6, 1e10),
    st.sampled_from(["square", "sine_squared_ramp"]),
)
def test_cyclic_condition_and_relative_phase(theta, phi, gamma, omega, shape):
    s = pl.build_single_loop_schedule(theta, phi, gamma, omega, shape)
    assert pl.envelope_area(s.envelope) == pytest.approx(math.pi, rel=1e-6)
    (t0, t1, p0, p1), (u0, u1, q0, q1) = s.phases.segments
    assert t0 == 0 and t1 == u0 and u1 == s.duration
    rel = lambda a, b: (a - b + math.pi) % (2 * math.pi)  # noqa: E731
    assert math.isclose(math.cos(rel(p0, p1) - phi), 1.0, abs_tol=1e-12)
    assert math.isclose(math.cos(rel(q0, q1) - phi), 1.0, abs_tol=1e-12)
    assert math.isclose(math.cos(q1 - gamma), 1.0, abs_tol=1e-12)
    # each half contributes pi/2
    half = sum(s.envelope(np.linspace(0, t1, 20001))[:-1]) * t1 / 20000
    assert half == pytest.approx(math.pi / 2, rel=1e-3)


def test_noise_zero_is_identity():
    s = pl.build_single_loop_schedule(1.0, 0.0, 1.0, 1e8)
    assert pl.apply_amplitude_noise(s, 0.0, 1000, 7) is s


@given(st.integers(0, 2**32 - 1), st.floats(0.001, 0.5), st.integers(1, 2000))
def test_noise_mean_zero_deterministic_and_phase_preserving(seed, eps, bins):
    s = pl.build_single_loop_schedule(1.0, 0.5, 1.0, 1e8)
    a = pl.apply_amplitude_noise(s, eps, bins, seed)
    b = pl.apply_amplitude_noise(s, eps, bins, seed)
    assert a == b
    noise = np.array(a.noise)
    assert len(noise) == bins
    assert abs(noise.mean()) < 1e-15
    assert np.all(np.abs(noise) <= 2 * eps)
    assert a.phases == s.phases and a.envelope == s.envelope
    assert set(s.phases.boundaries()) <= set(a.breakpoints())


def test_noise_factor_piecewise_constant():
    s = pl.build_single_loop_schedule(1.0, 0.0, 1.0, 1e8)
    a = pl.apply_amplitude_noise(s, 0.2, 10, 1)
    T = s.duration
    for k in range(10):
        t = (k + 0.5) * T / 10
        assert a.amplitude(t) == pytest.approx(s.amplitude(t) * (1 + a.noise[k]))
    assert replace(a, noise=None).amplitude(T / 2) == s.amplitude(T / 2)
