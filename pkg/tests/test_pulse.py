import math

import numpy as np
import pytest

from qperceptron import units
from qperceptron.pulse import (PulseError, PulseParams, chirp_schedule, export_schedule_csv,
                               make_schedule, sech_schedule, time_transform, trajectory_compare)

P = PulseParams()
T = P.duration_T


def sched(family, **kw):
    return make_schedule(PulseParams(family=family, **kw))


def test_params_validation():
    with pytest.raises(PulseError):
        PulseParams(duration_T=0.0)
    with pytest.raises(PulseError):
        PulseParams(omega0=-1.0)
    with pytest.raises(PulseError):
        PulseParams(family="gauss")
    with pytest.raises(PulseError):
        PulseParams(family="sech_printed", sech_window=2.0)
    with pytest.raises(PulseError):
        chirp_schedule(PulseParams(family="sech_printed"))
    with pytest.raises(PulseError):
        sech_schedule(P)


def test_default_span_and_reanchoring():
    assert P.span == pytest.approx(80 * units.MHZ)
    q = P.with_final(P.omega_f + 3 * units.MHZ)
    assert q.span == pytest.approx(P.span)
    assert q.omega_i == pytest.approx(P.omega_i + 3 * units.MHZ)


def test_chirp_endpoints_and_midpoint():
    s = chirp_schedule(P)
    assert s.sample(0.0) == (pytest.approx(P.omega_i), pytest.approx(0.0))
    w, a = s.sample(T)
    assert w == pytest.approx(P.omega_f, rel=1e-15) and abs(a) < 1e-9 * P.omega0
    w, a = s.sample(T / 2)
    assert w == pytest.approx(0.5 * (P.omega_i + P.omega_f), rel=1e-15)
    assert a == pytest.approx(P.omega0, rel=1e-15)
    assert s.detuning_from_final(T / 2) == pytest.approx(-P.span / 2)


def test_sech_printed_centre_and_edges():
    s = sched("sech_printed")
    assert s.sample(0.0) == (pytest.approx(P.omega_i), pytest.approx(P.omega0))
    for t in (s.t_start, s.t_end):
        assert s.amplitude(t) < 1e-3 * P.omega0
    # not monotone: starts and ends near omega_f
    assert s.omega_p(s.t_start) == pytest.approx(P.omega_f, abs=1e-6 * P.span)


@pytest.mark.parametrize("family", ["sech_printed", "sech_monotonic"])
def test_sech_amplitude_even(family):
    s = sched(family)
    t = np.linspace(0, s.t_end, 101)
    np.testing.assert_allclose(s.amplitude(t), s.amplitude(-t), rtol=0, atol=1e-14 * P.omega0)


@pytest.mark.parametrize("family", ["chirp", "sech_printed", "sech_monotonic"])
def test_schedules_continuous_and_off_at_ends(family):
    s = sched(family)
    t = np.linspace(s.t_start, s.t_end, 20001)
    dt = t[1] - t[0]
    w, a = s.detuning_from_final(t), s.amplitude(t)
    # derivative bounds: |d omega_p/dt| <= span * pi / T, |dA/dt| <= omega0 * pi / T
    assert np.abs(np.diff(w)).max() <= P.span * math.pi / T * dt * 1.0001
    assert np.abs(np.diff(a)).max() <= P.omega0 * math.pi / T * dt * 1.0001
    assert a[0] < 1e-3 * P.omega0 and a[-1] < 1e-3 * P.omega0


def test_time_transform_values():
    assert time_transform(T / 2, T) == pytest.approx(0.0, abs=1e-20)
    assert time_transform(T / 4, T) == pytest.approx(-math.atanh(math.cos(math.pi / 4)) * T)
    assert time_transform(T / 4, T, scaled=True) == pytest.approx(time_transform(T / 4, T) / math.pi)
    for bad in (0.0, T, -T):
        with pytest.raises(PulseError):
            time_transform(bad, T)


def test_scaled_transform_carries_envelope():
    tp = np.linspace(0.01, 0.99, 99) * T
    tau = time_transform(tp, T, scaled=True)
    sech_amp = P.omega0 / np.cosh(np.pi * tau / T)
    np.testing.assert_allclose(sech_amp, P.omega0 * np.sin(np.pi * tp / T), rtol=0,
                               atol=1e-10 * P.omega0)


def test_trajectory_compare_self_and_reparametrized():
    c = chirp_schedule(P)
    assert trajectory_compare(c, c) == 0.0
    warped = c.reparametrized(lambda u: T * (u / (3 * T)) ** 2, 0.0, 3 * T)
    assert trajectory_compare(c, warped) < 1e-9 * P.span


def test_trajectory_finding_monotonic_variant_matches_chirp():
    c = chirp_schedule(P)
    printed = trajectory_compare(c, sched("sech_printed"))
    monotonic = trajectory_compare(c, sched("sech_monotonic"))
    # the printed tanh^2 sweep misses the chirp by the full span on the rising branch
    assert printed == pytest.approx(P.span, rel=1e-3)
    assert monotonic < 1e-9 * P.span


def test_trajectory_compare_needs_overlap():
    c = chirp_schedule(P)
    other = chirp_schedule(PulseParams(omega0=0.0))
    with pytest.raises(PulseError):
        trajectory_compare(c, other)


def test_export_csv(tmp_path):
    s = chirp_schedule(P)
    export_schedule_csv(s, tmp_path / "f.csv", tmp_path / "a.csv", n=11)
    f = (tmp_path / "f.csv").read_text().splitlines()
    a = (tmp_path / "a.csv").read_text().splitlines()
    assert f[0] == "time_ns,freq_GHz" and a[0] == "time_ns,amp_MHz"
    assert len(f) == len(a) == 12
    t, amp = map(float, a[6].split(","))
    assert t == pytest.approx(T / 2 / units.NS) and amp == pytest.approx(19.7)
