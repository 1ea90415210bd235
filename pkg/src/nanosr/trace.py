"""Emission traces, burst metrics and the CSV/JSON record formats."""
from __future__ import annotations

from dataclasses import dataclass, field
import io
import json
import math

import numpy as np

TRACE_COLUMNS = ("t_s", "intensity_per_s", "jz_expect", "coherence_abs", "purity", "trace_error")
METRIC_KEYS = (
    "peak_intensity_per_s",
    "delay_time_s",
    "fwhm_s",
    "total_photons",
    "coherence_time_s",
    "n_molecules",
    "engine",
)

#: A burst is considered captured once the intensity falls below this fraction of the peak.
WINDOW_FRACTION = 0.05
#: Lowest coherence (relative to its maximum) used in the exponential fit.
COHERENCE_FLOOR = 1e-6


class PulseError(ValueError):
    """The trace does not contain a usable burst."""


@dataclass
class EmissionTrace:
    times: np.ndarray
    intensity: np.ndarray  # photons/s
    inversion: np.ndarray  # <J_z>
    coherence: np.ndarray  # |<J+>|
    purity: np.ndarray
    trace_error: np.ndarray
    pump_flux: np.ndarray | None = None  # quanta/s absorbed from the pump
    n_molecules: int = 0
    engine: str = ""

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        n = len(self.times)
        for name in ("intensity", "inversion", "coherence", "purity", "trace_error"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"{name} has shape {arr.shape}, expected ({n},)")
            setattr(self, name, arr)
        if self.pump_flux is None:
            self.pump_flux = np.zeros(n)
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(TRACE_COLUMNS) + "\n")
        cols = (self.times, self.intensity, self.inversion, self.coherence, self.purity, self.trace_error)
        for row in zip(*cols):
            buf.write(",".join(format_float(v) for v in row) + "\n")
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    @classmethod
    def read_csv(cls, path) -> "EmissionTrace":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(*data.T)


def format_float(value: float) -> str:
    return "%.17g" % value


@dataclass
class PulseMetrics:
    peak_intensity: float
    delay_time: float
    fwhm: float
    total_photons: float
    coherence_time: float | None
    n_molecules: int = 0
    engine: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "peak_intensity_per_s": _finite_or_none(self.peak_intensity),
            "delay_time_s": _finite_or_none(self.delay_time),
            "fwhm_s": _finite_or_none(self.fwhm),
            "total_photons": _finite_or_none(self.total_photons),
            "coherence_time_s": _finite_or_none(self.coherence_time),
            "n_molecules": self.n_molecules,
            "engine": self.engine,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _finite_or_none(value):
    if value is None or not math.isfinite(value):
        return None
    return float(value)


def _parabolic_peak(t, y, k):
    if k == 0 or k == len(y) - 1:
        return t[k], y[k]
    tt = t[k - 1:k + 2] - t[k]
    c2, c1, c0 = np.polyfit(tt, y[k - 1:k + 2], 2)
    if c2 >= 0:
        return t[k], y[k]
    dt = -c1 / (2 * c2)
    return t[k] + dt, c0 - c1**2 / (4 * c2)


def _crossing(t, y, i0, i1, level):
    """Linear interpolation of the time where y crosses ``level`` between samples i0 and i1."""
    y0, y1 = y[i0], y[i1]
    if y1 == y0:
        return t[i0]
    return t[i0] + (level - y0) * (t[i1] - t[i0]) / (y1 - y0)


def fit_coherence_time(times, coherence, floor=COHERENCE_FLOOR) -> float | None:
    """Exponential decay time of ``coherence``, or None if it spans less than a decade.

    The fit runs from the coherence maximum to the last sample above
    ``floor`` times that maximum, least squares on the logarithm.
    """
    c = np.asarray(coherence, dtype=float)
    t = np.asarray(times, dtype=float)
    if len(c) < 3 or not np.any(c > 0):
        return None
    k0 = int(np.argmax(c))
    cmax = c[k0]
    if not (cmax > 0 and math.isfinite(cmax)):
        return None
    stop = k0
    while stop + 1 < len(c) and c[stop + 1] > floor * cmax:
        stop += 1
    window = slice(k0, stop + 1)
    cw, tw = c[window], t[window]
    if len(cw) < 3 or cmax / cw.min() < 10.0:
        return None
    slope, _ = np.polyfit(tw - tw[0], np.log(cw), 1)
    if slope >= 0:
        return None
    return -1.0 / slope


def pulse_metrics(trace: EmissionTrace, require_complete: bool = True) -> PulseMetrics:
    """Peak, delay, width, photon yield and coherence time of a burst.

    Raises PulseError for an empty pulse, or when ``require_complete`` and
    the final intensity is still above 5% of the peak.
    """
    t, y = trace.times, trace.intensity
    if len(t) < 2:
        raise PulseError("trace has fewer than two samples")
    k = int(np.argmax(y))
    if not y[k] > 0:
        raise PulseError("no pulse: intensity is never positive")
    t_peak, peak = _parabolic_peak(t, y, k)
    if require_complete and y[-1] >= WINDOW_FRACTION * peak:
        raise PulseError(
            f"window too short: final intensity is {y[-1] / peak:.3g} of the peak (needs < {WINDOW_FRACTION})"
        )
    half = 0.5 * peak
    left = t[0]
    for i in range(k, 0, -1):
        if y[i - 1] < half:
            left = _crossing(t, y, i - 1, i, half)
            break
    right = math.nan
    for i in range(k, len(y) - 1):
        if y[i + 1] < half:
            right = _crossing(t, y, i, i + 1, half)
            break
    total = float(np.trapezoid(y, t))
    return PulseMetrics(
        peak_intensity=float(peak),
        delay_time=float(t_peak),
        fwhm=float(right - left),
        total_photons=total,
        coherence_time=fit_coherence_time(t, trace.coherence),
        n_molecules=trace.n_molecules,
        engine=trace.engine,
    )
