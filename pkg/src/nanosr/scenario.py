"""Scenario configs, engines, the microtubule-vs-amyloid comparison and sweeps.

A scenario is a JSON object with exactly the fields of :class:`ScenarioConfig`.
Nothing in the pipeline is random: the same config gives byte-identical CSV.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
import io
import json
import math
from pathlib import Path

import numpy as np

from . import geometry as geo
from . import oracle
from .dicke import MAX_MOLECULES, CapacityError, FieldMode, ModelParams
from .dynamics import (
    CollectiveLindblad,
    InvariantViolation,
    dephasing_from_coherence_time,
    emission_trace,
    evolve_master,
    initial_state,
    run_closed_cavity,
)
from .semiclassical import SemiclassicalParams, sech2_pulse
from .trace import METRIC_KEYS, EmissionTrace, PulseError, PulseMetrics, format_float, pulse_metrics
from .units import dipole_moment_from_displacement, wavenumber_to_angular_frequency

ENGINES = ("quantum", "semiclassical", "oracle")
INITIAL_STATES = ("ground", "fully_excited", "tipped")


class ConfigError(ValueError):
    """Invalid scenario configuration; ``field`` names the offending entry."""

    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class ScenarioConfig:
    geometry: str | dict = "polyq_sup35"
    n_molecules: int | str = "from_geometry"
    epsilon_wavenumber: float = 200.0  # cm^-1
    dipole_displacement: float = 0.2  # A
    gamma_collective: float = 1.0  # 1/s
    gamma_dephasing: float | dict = 0.0  # 1/s or {"from_coherence_time": s}
    pump_rate: float = 0.0  # 1/s
    initial_state: str | dict = "fully_excited"  # or {"tipped": theta}
    engine: str = "quantum"
    t_max: float = 1.0  # s
    n_samples: int = 501
    fock_cutoff: int | None = None  # closed-cavity (unitary) run when set
    seed_label: str = ""

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        known = [f.name for f in fields(cls)]
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown field")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError("<root>", f"invalid JSON: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **changes) -> "ScenarioConfig":
        data = self.to_dict()
        for key in changes:
            if key not in data:
                raise ConfigError(key, "unknown field")
        data.update(changes)
        return ScenarioConfig.from_dict(data)

    # -- resolution ----------------------------------------------------

    def resolved_geometry(self) -> geo.NanotubeGeometry:
        g = self.geometry
        try:
            if isinstance(g, str):
                return geo.get_preset(g)
            if isinstance(g, dict):
                return geo.NanotubeGeometry.from_dict(g)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError("geometry", str(exc).strip("'\"")) from None
        raise ConfigError("geometry", "must be a preset name or a geometry object")

    def resolved_n(self) -> int:
        n = self.n_molecules
        if n == "from_geometry":
            try:
                n = geo.water_count(self.resolved_geometry()).n_molecules
            except ValueError as exc:
                raise ConfigError("geometry", str(exc)) from None
            if n < 1:
                raise ConfigError("n_molecules", "geometry holds no whole water molecule")
            return n
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ConfigError("n_molecules", "must be a positive integer or 'from_geometry'")
        return n

    def resolved_dephasing(self) -> float:
        g = self.gamma_dephasing
        if isinstance(g, dict):
            if set(g) != {"from_coherence_time"}:
                raise ConfigError("gamma_dephasing", "object form must be {'from_coherence_time': seconds}")
            try:
                return dephasing_from_coherence_time(float(g["from_coherence_time"]))
            except (TypeError, ValueError) as exc:
                raise ConfigError("gamma_dephasing", str(exc)) from None
        return _nonneg("gamma_dephasing", g)

    def resolved_initial(self) -> tuple[str, float | None]:
        s = self.initial_state
        if isinstance(s, dict):
            if set(s) != {"tipped"}:
                raise ConfigError("initial_state", "object form must be {'tipped': theta}")
            theta = s["tipped"]
            if not _is_number(theta) or not 0 < theta <= math.pi:
                raise ConfigError("initial_state", "tipping angle must lie in (0, pi]")
            return "tipped", float(theta)
        if s not in INITIAL_STATES:
            raise ConfigError("initial_state", f"must be one of {INITIAL_STATES} or {{'tipped': theta}}")
        return s, None

    def t_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n_samples)

    def model_params(self) -> ModelParams:
        geom = self.resolved_geometry()
        eps = wavenumber_to_angular_frequency(self.epsilon_wavenumber)
        return ModelParams(
            epsilon=eps,
            dipole=dipole_moment_from_displacement(self.dipole_displacement),
            mode_frequency=eps,
            mode_volume=geo.mode_volume(geom),
            gamma_collective=self.gamma_collective,
            gamma_dephasing=self.resolved_dephasing(),
            pump_rate=self.pump_rate,
        )

    def validate(self) -> None:
        self.resolved_geometry()
        n = self.resolved_n()
        _nonneg("epsilon_wavenumber", self.epsilon_wavenumber)
        _nonneg("dipole_displacement", self.dipole_displacement)
        _nonneg("gamma_collective", self.gamma_collective)
        _nonneg("pump_rate", self.pump_rate)
        self.resolved_dephasing()
        self.resolved_initial()
        if self.engine not in ENGINES:
            raise ConfigError("engine", f"must be one of {ENGINES}")
        if not _is_number(self.t_max) or not self.t_max > 0:
            raise ConfigError("t_max", "empty time grid (t_max must be > 0)")
        if isinstance(self.n_samples, bool) or not isinstance(self.n_samples, int) or self.n_samples < 2:
            raise ConfigError("n_samples", "must be an integer >= 2")
        if self.fock_cutoff is not None:
            if isinstance(self.fock_cutoff, bool) or not isinstance(self.fock_cutoff, int) or self.fock_cutoff < 1:
                raise ConfigError("fock_cutoff", "must be null or an integer >= 1")
            if self.engine != "quantum":
                raise ConfigError("fock_cutoff", "closed-cavity runs use engine 'quantum'")
        if not isinstance(self.seed_label, str):
            raise ConfigError("seed_label", "must be a string")
        if self.engine == "semiclassical" and self.pump_rate > 0:
            raise ConfigError("pump_rate", "the semiclassical engine does not model pumping")
        if self.engine == "semiclassical" and not self.gamma_collective > 0:
            raise ConfigError("gamma_collective", "the semiclassical engine needs gamma_collective > 0")
        if self.engine == "quantum" and n > MAX_MOLECULES:
            raise CapacityError(f"engine 'quantum' supports N <= {MAX_MOLECULES}, got N = {n}")
        if self.engine == "oracle" and n > oracle.MAX_ORACLE_MOLECULES:
            raise CapacityError(f"engine 'oracle' supports N <= {oracle.MAX_ORACLE_MOLECULES}, got N = {n}")


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _nonneg(name, value) -> float:
    if not _is_number(value) or value < 0:
        raise ConfigError(name, "must be a finite number >= 0")
    return float(value)


# ---------------------------------------------------------------- engines


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    trace: EmissionTrace
    metrics: PulseMetrics

    def write(self, out) -> tuple[Path, Path]:
        """Write the trace CSV to ``out`` and the metrics JSON beside it."""
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        self.trace.write_csv(out)
        metrics_path = out.with_name(out.stem + ".metrics.json")
        metrics_path.write_text(self.metrics.to_json())
        return out, metrics_path


def simulate_trace(config: ScenarioConfig) -> EmissionTrace:
    config.validate()
    n = config.resolved_n()
    params = config.model_params()
    kind, theta = config.resolved_initial()
    t = config.t_grid()
    if config.engine == "semiclassical":
        theta0 = {"fully_excited": None, "ground": math.pi}.get(kind, theta)
        sp = SemiclassicalParams(n, params.gamma_collective, theta0, params.gamma_dephasing)
        return sech2_pulse(sp, t)
    if config.engine == "oracle":
        rho0 = oracle.initial_full_state(n, kind, theta)
        traj = oracle.evolve_full_master(n, params, rho0, t)
        return emission_trace(traj, params.gamma_collective, params.pump_rate, n, "oracle")
    if config.fock_cutoff is not None:
        mode = FieldMode(config.fock_cutoff, params.mode_frequency)
        return run_closed_cavity(params, n, mode, t, kind, theta).trace
    model = CollectiveLindblad.from_params(params, n)
    traj = evolve_master(model, initial_state(model.basis, kind, theta), t)
    return emission_trace(traj, params.gamma_collective, params.pump_rate, n, "quantum")


def run_scenario(config: ScenarioConfig, out=None) -> ScenarioResult:
    """Run one scenario; with ``out`` the trace CSV and metrics JSON are written.

    Pumped and closed-cavity runs never decay to zero, so their metrics are
    taken without the burst-completion check.
    """
    trace = simulate_trace(config)
    complete = config.pump_rate == 0 and config.fock_cutoff is None
    metrics = pulse_metrics(trace, require_complete=complete)
    result = ScenarioResult(config, trace, metrics)
    if out is not None:
        result.write(out)
    return result


# ---------------------------------------------------------------- presets

# No emission rate is measured for these fibers. Single-arm presets use this
# collective rate so bursts last microseconds; it is free, like the pump rate.
REFERENCE_GAMMA = 1e5

MICROTUBULE_COHERENCE_TIME = 1e-14
AMYLOID_COHERENCE_TIME = 1e-6
# Comparison arms scale the emission rate so each burst spans ~20 coherence
# times (N*gamma*tau = 1/20); both arms then resolve their decay equally well.
BURST_PER_COHERENCE = 20.0
COMPARISON_WINDOW = 100.0  # coherence times
COMPARISON_SAMPLES = 801
# 160 molecules keep the microtubule arm quick; the 1 nm microtubule slice
# holds ~5900. |<J+>| decay under collective dephasing does not depend on N.
MICROTUBULE_ARM_MOLECULES = 160


def _comparison_arm(geometry, n_molecules, tau, label) -> dict:
    n = n_molecules
    if n == "from_geometry":
        n = geo.water_count(geo.get_preset(geometry)).n_molecules
    return {
        "geometry": geometry,
        "n_molecules": n_molecules,
        "gamma_collective": 1.0 / (BURST_PER_COHERENCE * n * tau),
        "gamma_dephasing": {"from_coherence_time": tau},
        "initial_state": {"tipped": math.pi / 2},
        "engine": "quantum",
        "t_max": COMPARISON_WINDOW * tau,
        "n_samples": COMPARISON_SAMPLES,
        "seed_label": label,
    }


SCENARIO_PRESETS = {
    "amyloid-polyq": {
        "geometry": "polyq_sup35",
        "n_molecules": "from_geometry",
        "gamma_collective": REFERENCE_GAMMA,
        "gamma_dephasing": {"from_coherence_time": AMYLOID_COHERENCE_TIME},
        "initial_state": "fully_excited",
        "engine": "quantum",
        "t_max": 5e-5,
        "n_samples": 1001,
        "seed_label": "amyloid-polyq",
    },
    "amyloid-abeta": {
        "geometry": "abeta_double_sheet",
        "n_molecules": "from_geometry",
        "gamma_collective": REFERENCE_GAMMA,
        "gamma_dephasing": {"from_coherence_time": AMYLOID_COHERENCE_TIME},
        "initial_state": "fully_excited",
        "engine": "quantum",
        "t_max": 1e-5,
        "n_samples": 1001,
        "seed_label": "amyloid-abeta",
    },
    "microtubule": {
        "geometry": "microtubule",
        "n_molecules": "from_geometry",
        "gamma_collective": REFERENCE_GAMMA,
        "gamma_dephasing": {"from_coherence_time": MICROTUBULE_COHERENCE_TIME},
        "initial_state": "fully_excited",
        "engine": "semiclassical",
        "t_max": 5e-8,
        "n_samples": 1001,
        "seed_label": "microtubule",
    },
    "microtubule-coherence": _comparison_arm(
        "microtubule", MICROTUBULE_ARM_MOLECULES, MICROTUBULE_COHERENCE_TIME, "microtubule-coherence"),
    "amyloid-coherence": _comparison_arm(
        "abeta_double_sheet", "from_geometry", AMYLOID_COHERENCE_TIME, "amyloid-coherence"),
}

COMPARISON_PRESETS = {
    "microtubule-vs-amyloid": ("microtubule-coherence", "amyloid-coherence"),
}


def preset_config(name: str) -> ScenarioConfig:
    try:
        data = SCENARIO_PRESETS[name]
    except KeyError:
        raise ConfigError("preset", f"unknown scenario preset {name!r}; choose from {sorted(SCENARIO_PRESETS)}") from None
    return ScenarioConfig.from_dict(dict(data))


# ---------------------------------------------------------------- comparison


@dataclass
class ArmOutcome:
    label: str
    metrics: PulseMetrics | None = None
    error: str | None = None
    error_kind: str | None = None

    @property
    def ok(self) -> bool:
        return self.metrics is not None

    def to_dict(self) -> dict:
        d = {"label": self.label, "ok": self.ok}
        if self.ok:
            d["metrics"] = self.metrics.to_dict()
        else:
            d["error"] = self.error
            d["error_kind"] = self.error_kind
        return d


@dataclass
class ComparisonReport:
    """Arm B relative to arm A."""

    arm_a: ArmOutcome
    arm_b: ArmOutcome
    coherence_time_ratio: float | None = None
    n_ratio: float | None = None
    peak_ratio: float | None = None
    traces: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {
            "arm_a": self.arm_a.to_dict(),
            "arm_b": self.arm_b.to_dict(),
            "coherence_time_ratio": self.coherence_time_ratio,
            "N_ratio": self.n_ratio,
            "peak_ratio": self.peak_ratio,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _run_arm(label, config) -> tuple[ArmOutcome, EmissionTrace | None]:
    try:
        result = run_scenario(config)
    except (ConfigError, CapacityError, PulseError, InvariantViolation) as exc:
        return ArmOutcome(label, error=str(exc), error_kind=type(exc).__name__), None
    return ArmOutcome(label, metrics=result.metrics), result.trace


def compare_scenarios(config_a: ScenarioConfig, config_b: ScenarioConfig,
                      labels=("a", "b")) -> ComparisonReport:
    arm_a, trace_a = _run_arm(labels[0], config_a)
    arm_b, trace_b = _run_arm(labels[1], config_b)
    report = ComparisonReport(arm_a, arm_b, traces={labels[0]: trace_a, labels[1]: trace_b})
    if arm_a.ok and arm_b.ok:
        a, b = arm_a.metrics, arm_b.metrics
        if a.coherence_time and b.coherence_time:
            report.coherence_time_ratio = b.coherence_time / a.coherence_time
        report.n_ratio = b.n_molecules / a.n_molecules
        report.peak_ratio = b.peak_intensity / a.peak_intensity
    return report


def compare_preset(name: str) -> ComparisonReport:
    try:
        a, b = COMPARISON_PRESETS[name]
    except KeyError:
        raise ConfigError("preset", f"unknown comparison preset {name!r}; choose from {sorted(COMPARISON_PRESETS)}") from None
    return compare_scenarios(preset_config(a), preset_config(b), labels=(a, b))


# ---------------------------------------------------------------- sweeps

SWEEP_COLUMNS = METRIC_KEYS


@dataclass
class SweepRow:
    value: object
    metrics: PulseMetrics | None
    error: str | None = None


def _sweep_arm(args):
    config, param, value = args
    try:
        cfg = config.replace(**{param: value})
        return SweepRow(value, run_scenario(cfg).metrics)
    except (ConfigError, CapacityError, PulseError, InvariantViolation) as exc:
        return SweepRow(value, None, f"{type(exc).__name__}: {exc}")


def sweep(base_config: ScenarioConfig, param_name: str, values, workers: int = 1) -> list[SweepRow]:
    """Run ``base_config`` once per value of ``param_name``; rows keep input order."""
    if param_name not in {f.name for f in fields(ScenarioConfig)}:
        raise ConfigError(param_name, "unknown parameter")
    jobs = [(base_config, param_name, v) for v in values]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_arm, jobs))
    return [_sweep_arm(j) for j in jobs]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True).replace(",", ";")
    return str(value)


def sweep_csv(param_name: str, rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    buf.write(",".join((param_name,) + SWEEP_COLUMNS + ("error",)) + "\n")
    for row in rows:
        metrics = row.metrics.to_dict() if row.metrics else {}
        cells = [_cell(row.value)] + [_cell(metrics.get(k)) for k in SWEEP_COLUMNS] + [_cell(row.error)]
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def fit_power_law(x, y) -> float:
    """Slope of log y against log x."""
    slope, _ = np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)
    return float(slope)
