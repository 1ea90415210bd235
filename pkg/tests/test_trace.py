import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nanosr.trace import (
    TRACE_COLUMNS,
    EmissionTrace,
    PulseError,
    fit_coherence_time,
    pulse_metrics,
)


def _trace(t, intensity, coherence=None):
    n = len(t)
    return EmissionTrace(t, intensity, np.zeros(n), np.zeros(n) if coherence is None else coherence,
                         np.ones(n), np.zeros(n), n_molecules=3, engine="test")


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 0.8), st.floats(0.01, 0.05))
def test_sech2_metrics(t0_frac, tau):
    t = np.linspace(0.0, 1.0, 2001)
    t0 = t0_frac
    y = 1.0 / np.cosh((t - t0) / tau) ** 2
    m = pulse_metrics(_trace(t, y))
    assert abs(m.delay_time - t0) <= t[1] - t[0]
    assert m.fwhm == pytest.approx(2 * math.log(1 + math.sqrt(2)) * tau, rel=0.02)
    assert m.peak_intensity == pytest.approx(1.0, rel=1e-4)
    assert m.total_photons == pytest.approx(2 * tau, rel=1e-3)


def test_no_pulse():
    t = np.linspace(0, 1, 11)
    with pytest.raises(PulseError, match="no pulse"):
        pulse_metrics(_trace(t, np.zeros(11)))


def test_window_too_short():
    t = np.linspace(0, 1, 101)
    y = 1.0 / np.cosh((t - 0.8) / 0.1) ** 2
    with pytest.raises(PulseError, match="window too short"):
        pulse_metrics(_trace(t, y))
    assert pulse_metrics(_trace(t, y), require_complete=False).peak_intensity > 0


@pytest.mark.parametrize("tau", [0.05, 0.13, 0.4])
def test_exponential_coherence(tau):
    t = np.linspace(0, 2.0, 1001)
    assert fit_coherence_time(t, 3.0 * np.exp(-t / tau)) == pytest.approx(tau, rel=0.02)


def test_coherence_needs_a_decade():
    t = np.linspace(0, 1, 101)
    assert fit_coherence_time(t, np.exp(-t)) is None
    assert fit_coherence_time(t, np.zeros(101)) is None


def test_csv_round_trip(tmp_path):
    t = np.linspace(0, 1, 7)
    tr = _trace(t, np.sin(t) + 1 / 3, np.exp(-t))
    text = tr.to_csv()
    assert text.splitlines()[0] == ",".join(TRACE_COLUMNS)
    assert len(text.splitlines()) == 8
    path = tmp_path / "t.csv"
    tr.write_csv(path)
    back = EmissionTrace.read_csv(path)
    np.testing.assert_array_equal(back.intensity, tr.intensity)
    np.testing.assert_array_equal(back.coherence, tr.coherence)


def test_trace_validation():
    with pytest.raises(ValueError):
        _trace(np.array([0.0, 0.0, 1.0]), np.ones(3))
    with pytest.raises(ValueError):
        EmissionTrace(np.arange(3.0), np.ones(2), np.ones(3), np.ones(3), np.ones(3), np.ones(3))


def test_metrics_json_keys():
    t = np.linspace(0, 1, 201)
    m = pulse_metrics(_trace(t, 1 / np.cosh((t - 0.5) / 0.05) ** 2))
    d = m.to_dict()
    assert list(d) == ["peak_intensity_per_s", "delay_time_s", "fwhm_s", "total_photons",
                       "coherence_time_s", "n_molecules", "engine"]
    assert d["coherence_time_s"] is None
