"""Window functions, barrier waveforms and the amplitude solvers."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spintwin.device import exchange, reference_device
from spintwin.pulses import (
    BarrierWaveform,
    WindowSpec,
    adiabatic_error,
    barrier_waveform,
    conditional_phase,
    cphase_amplitude,
    floor_riding_barrier,
    waveform_to_csv,
    window_samples,
    window_value,
)


@pytest.fixture(scope="module")
def ref():
    return reference_device()


def test_window_boundaries_vanish():
    for r in (0.1, 0.5, 1.0):
        spec = WindowSpec("tukey", 100e-9, r=r)
        assert window_value(spec, 0.0) == pytest.approx(0.0, abs=1e-15)
        assert window_value(spec, spec.t_p) == pytest.approx(0.0, abs=1e-12)


def test_tukey_r1_equals_cosine():
    tk = WindowSpec("tukey", 80e-9, r=1.0)
    cos = WindowSpec("cosine", 80e-9)
    t = np.linspace(0, 80e-9, 501)
    assert np.allclose(window_value(tk, t), window_value(cos, t), atol=1e-14)


def test_tukey_half_plateau():
    spec = WindowSpec("tukey", 100e-9, r=0.5)
    t = np.linspace(25e-9, 75e-9, 101)
    assert np.allclose(window_value(spec, t), 1.0, atol=1e-12)
    assert window_value(spec, 20e-9) < 1.0


def test_window_continuity_at_segment_edges():
    spec = WindowSpec("tukey", 100e-9, r=0.5)
    eps = 1e-15
    for edge in (25e-9, 75e-9):
        below = window_value(spec, edge * (1 - 1e-9))
        above = window_value(spec, edge * (1 + 1e-9))
        assert below == pytest.approx(above, abs=1e-6)
    with pytest.raises(ValueError, match="outside"):
        window_value(spec, 101e-9)


@settings(max_examples=50, deadline=None)
@given(r=st.floats(0.05, 1.0), x=st.floats(0.0, 1.0))
def test_window_symmetry_and_range(r, x):
    spec = WindowSpec("tukey", 100e-9, r=r)
    t = x * spec.t_p
    w = float(window_value(spec, t))
    w_mirror = float(window_value(spec, spec.t_p - t))
    assert w == pytest.approx(w_mirror, abs=1e-12)
    assert -1e-12 <= w <= 1 + 1e-12


def test_amplitude_window_integral_solution(ref):
    amp = cphase_amplitude(ref, WindowSpec("cosine", 100e-9))
    assert amp.window_integral_j == pytest.approx(10.00e6, rel=1e-12)


def test_amplitude_root_solved_reference(ref):
    amp = cphase_amplitude(ref, WindowSpec("cosine", 100e-9))
    assert abs(amp.root_solved_j - 10.06e6) < 0.02e6


def test_amplitude_200ns(ref):
    amp = cphase_amplitude(ref, WindowSpec("cosine", 200e-9))
    assert amp.window_integral_j == pytest.approx(5.00e6, rel=1e-12)
    # Regression value from the root solver.
    assert amp.root_solved_j == pytest.approx(5.0588e6, abs=2e3)


def test_amplitude_requires_cosine(ref):
    with pytest.raises(ValueError, match="cosine"):
        cphase_amplitude(ref, WindowSpec("tukey", 100e-9, r=0.5))


def test_amplitude_perturbative_limit(ref):
    # Root-solved -> window-integral as the residual exchange vanishes.
    spec = WindowSpec("cosine", 500e-9)   # peak J / dEz < 0.02
    last = np.inf
    for j_res in (40e3, 20e3, 10e3, 5e3):
        model = ref.replace(j_res=j_res)
        amp = cphase_amplitude(model, spec, dt=5e-11)
        rel = abs(amp.root_solved - amp.window_integral) / amp.window_integral
        assert rel < last
        last = rel
    assert last < 0.01


def test_root_solution_hits_target_phase(ref):
    spec = WindowSpec("cosine", 100e-9)
    amp = cphase_amplitude(ref, spec)
    wf = floor_riding_barrier(ref, amp.root_solved, spec, 1e-11)
    phi = conditional_phase(ref, wf.samples, 1e-11)
    background = 2 * np.pi * ref.j_res * spec.t_p
    assert phi - background == pytest.approx(np.pi, abs=1e-9)


def test_barrier_waveform_clamp_and_peak(ref):
    spec = WindowSpec("cosine", 100e-9)
    a = 170.0
    wf = barrier_waveform(ref, a, spec, 1e-10)
    # W = 1/A corresponds to v_B = 0 exactly; tails are clamped there.
    assert wf.samples[0] == 0.0 and wf.samples[-1] == 0.0
    assert wf.samples.max() == pytest.approx(np.log(a) / (2 * ref.alpha),
                                             rel=1e-6)
    assert np.allclose(wf.samples, wf.samples[::-1], atol=1e-12)


def test_barrier_waveform_round_trip(ref):
    spec = WindowSpec("cosine", 100e-9)
    a = 171.0
    wf = barrier_waveform(ref, a, spec, 1e-10)
    t, w = window_samples(spec, 1e-10)
    target = a * w * ref.j_res
    above = a * w >= 1.0
    j = exchange(ref, wf.samples)
    assert np.allclose(j[above] / target[above], 1.0, rtol=1e-9)
    assert np.allclose(j[~above], ref.j_res, rtol=1e-12)


def test_barrier_waveform_rejects_subfloor_amplitude(ref):
    with pytest.raises(ValueError, match="floor"):
        barrier_waveform(ref, 0.9, WindowSpec("cosine", 100e-9), 1e-10)


def test_adiabatic_error_constant_envelope():
    assert adiabatic_error(np.full(1000, 5e6), 103e6, 1e-11) == 0.0


def test_adiabatic_error_cosine_pulse_is_tiny(ref):
    _, w = window_samples(WindowSpec("cosine", 100e-9), 1e-11)
    p = adiabatic_error(10.06e6 * w, abs(ref.delta_ez), 1e-11)
    assert p < 1e-6


def test_adiabatic_error_square_pulse_much_worse(ref):
    dt = 1e-11
    _, w = window_samples(WindowSpec("cosine", 100e-9), dt)
    p_cos = adiabatic_error(10.06e6 * w, abs(ref.delta_ez), dt)
    square = np.full(w.size, 5.03e6)   # equal area
    square[0] = square[-1] = 0.0
    p_sq = adiabatic_error(square, abs(ref.delta_ez), dt)
    assert p_sq / p_cos >= 1e3


def test_adiabatic_error_decreases_with_splitting():
    dt = 1e-11
    _, w = window_samples(WindowSpec("cosine", 100e-9), dt)
    env = 10e6 * w
    dez = np.logspace(8, 9, 9)
    p = np.array([adiabatic_error(env, d, dt) for d in dez])
    assert np.all(np.diff(np.log(p)) < 0)


def test_adiabatic_error_requires_closed_pulse():
    ramp = np.linspace(0, 1e6, 100)
    with pytest.raises(ValueError, match="closed"):
        adiabatic_error(ramp, 1e8, 1e-11)
    with pytest.raises(ValueError, match="3 points"):
        adiabatic_error(np.array([1.0]), 1e8, 1e-11)


def test_waveform_csv_export(tmp_path, ref):
    wf = barrier_waveform(ref, 170.0, WindowSpec("cosine", 100e-9), 1e-9)
    path = tmp_path / "wf.csv"
    waveform_to_csv(ref, wf, path)
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "time_s,v_B_volt,J_hz"
    assert len(rows) == wf.samples.size + 1
