"""Experiment runner: ``holosim run <experiment> [options]``.

Configs are JSON objects ``{"experiment": ..., "seed": ..., "params": {...}}``
with frequencies in MHz (nu = Omega / 2 pi), times in ns and rates in kHz.
Precedence is dataclass defaults < config file < ``--set`` < per-field flags.
"""

from __future__ import annotations

import argparse
import ast
import csv
import dataclasses
import hashlib
import json
import math
import operator
import os
import sys
import time
import typing
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import calibration, holonomy, lindblad, units
from .device import DetuningParams, ResonatorParams, SystemParams, TransmonParams
from .errors import CalibrationError, ConfigError, InvariantError
from .pulses import build_single_loop_schedule

EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_CALIBRATION = 4

CSV_DIGITS = 12


# --- value parsing --------------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def parse_number(text) -> float:
    """Evaluate a number or an arithmetic expression in ``pi`` such as ``3*pi/4``."""
    if isinstance(text, bool):
        raise ConfigError(f"expected a number, got {text!r}")
    if isinstance(text, (int, float)):
        return float(text)

    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        raise ConfigError(f"cannot parse {text!r} as a number")

    try:
        return ev(ast.parse(str(text).strip(), mode="eval").body)
    except (SyntaxError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse {text!r} as a number") from exc


def _coerce(name: str, kind, value):
    optional = typing.get_origin(kind) is typing.Union and type(None) in typing.get_args(kind)
    if optional:
        if value is None or (isinstance(value, str) and value.lower() in ("none", "null")):
            return None
        kind = next(a for a in typing.get_args(kind) if a is not type(None))
    try:
        if kind is bool:
            if isinstance(value, bool):
                return value
            if isinstance(value, str) and value.lower() in ("true", "false", "1", "0", "yes", "no"):
                return value.lower() in ("true", "1", "yes")
            raise ConfigError(f"{name}: expected true/false, got {value!r}")
        if kind is int:
            v = parse_number(value)
            if v != int(v):
                raise ConfigError(f"{name}: expected an integer, got {value!r}")
            return int(v)
        if kind is float:
            return parse_number(value)
        if kind is str:
            if not isinstance(value, str):
                raise ConfigError(f"{name}: expected a string, got {value!r}")
            return value
    except ConfigError as exc:
        if str(exc).startswith(name):
            raise
        raise ConfigError(f"{name}: {exc}") from None
    raise ConfigError(f"{name}: unsupported field type {kind}")


def _require(cond: bool, key: str, why: str):
    if not cond:
        raise ConfigError(f"{key}: {why}")


# --- experiment configs ---------------------------------------------------------


@dataclass(frozen=True)
class SingleGateConfig:
    theta: float = math.pi / 2
    phi: float = 0.0
    gamma: float = math.pi
    omega_mhz: float = 16.0
    alpha_mhz: float = 400.0
    rates_khz: float = 10.0
    levels: int = 3
    mode: str = "ideal"
    shape: str = "square"
    steps: int = lindblad.DEFAULT_STEPS

    def __post_init__(self):
        _require(0 <= self.theta <= math.pi, "theta", "must lie in [0, pi]")
        _require(self.omega_mhz > 0, "omega_mhz", "must be positive")
        _require(self.alpha_mhz > 0, "alpha_mhz", "must be positive")
        _require(self.rates_khz >= 0, "rates_khz", "must be non-negative")
        _require(self.levels in (3, 4, 5), "levels", "must be 3, 4 or 5")
        _require(self.mode in ("ideal", "faithful"), "mode", "must be ideal or faithful")
        _require(self.shape in ("square", "sine_squared_ramp"), "shape", "must be square or sine_squared_ramp")
        _require(self.steps >= 1, "steps", "must be at least 1")

    def transmon(self) -> TransmonParams:
        r = units.khz(self.rates_khz)
        return TransmonParams(units.mhz(self.alpha_mhz), self.levels, r, r, r, r)

    def gate(self) -> holonomy.SingleQubitGateSpec:
        return holonomy.SingleQubitGateSpec(self.theta, self.phi, self.gamma)

    def schedule(self):
        return build_single_loop_schedule(self.theta, self.phi, self.gamma, units.mhz(self.omega_mhz), self.shape)


@dataclass(frozen=True)
class GateAverageConfig(SingleGateConfig):
    n_states: int = 1001

    def __post_init__(self):
        super().__post_init__()
        _require(self.n_states >= 1, "n_states", "must be at least 1")


@dataclass(frozen=True)
class NoiseSweepConfig(SingleGateConfig):
    rates_khz: float = 0.0
    eps_max: float = 0.2
    eps_points: int = 11
    seeds: int = 20
    bins: int = 1000

    def __post_init__(self):
        super().__post_init__()
        _require(self.rates_khz == 0, "rates_khz", "the noise sweep runs without decoherence")
        _require(self.eps_max >= 0, "eps_max", "must be non-negative")
        _require(self.eps_points >= 1, "eps_points", "must be at least 1")
        _require(self.seeds >= 1, "seeds", "must be at least 1")
        _require(self.bins >= 1, "bins", "must be at least 1")


@dataclass(frozen=True)
class CalibrateConfig:
    g_mhz: float = 65.0
    delta_mhz: float = 1000.0
    alpha_mhz: float = 400.0
    levels: int = 4
    photon_cutoff: int = 3
    grid_points: int = 40
    grid_max_mhz: float = 400.0
    model: str = "single"

    def __post_init__(self):
        _require(self.g_mhz >= 0, "g_mhz", "must be non-negative")
        _require(self.alpha_mhz > 0, "alpha_mhz", "must be positive")
        _require(self.delta_mhz > self.alpha_mhz, "delta_mhz", "must exceed alpha_mhz")
        _require(self.levels in (4, 5), "levels", "must be 4 or 5")
        _require(self.photon_cutoff >= 2, "photon_cutoff", "must be at least 2")
        _require(self.grid_points >= 2, "grid_points", "must be at least 2")
        _require(self.grid_max_mhz > 0, "grid_max_mhz", "must be positive")
        _require(self.model in ("single", "pair"), "model", "must be single or pair")

    def grid(self) -> np.ndarray:
        return calibration.default_grid(self.grid_points, units.mhz(self.grid_max_mhz))


@dataclass(frozen=True)
class CouplingScanConfig(CalibrateConfig):
    small_omega_mhz: float = 20.0

    def __post_init__(self):
        super().__post_init__()
        _require(0 < self.small_omega_mhz <= self.grid_max_mhz, "small_omega_mhz", "must lie inside the grid")


@dataclass(frozen=True)
class TwoGateConfig:
    g_mhz: float = 65.0
    delta_mhz: float = 1000.0
    alpha_mhz: float = 400.0
    levels: int = 4
    photon_cutoff: int = 3
    duration_ns: float = 40.0
    omega_max_mhz: typing.Optional[float] = None
    vartheta: float = math.pi / 2
    rates_khz: float = 10.0
    kappa_khz: float = 10.0
    initial: str = "f0g"
    compensate: bool = True
    grid_points: int = 40
    grid_max_mhz: float = 400.0
    steps: typing.Optional[int] = None

    def __post_init__(self):
        _require(self.g_mhz > 0, "g_mhz", "must be positive")
        _require(self.alpha_mhz > 0, "alpha_mhz", "must be positive")
        _require(self.delta_mhz > self.alpha_mhz, "delta_mhz", "must exceed alpha_mhz")
        _require(self.levels in (4, 5), "levels", "must be 4 or 5")
        _require(self.photon_cutoff >= 2, "photon_cutoff", "must be at least 2")
        _require(self.duration_ns > 0, "duration_ns", "must be positive")
        _require(self.omega_max_mhz is None or self.omega_max_mhz > 0, "omega_max_mhz", "must be positive")
        _require(0 <= self.vartheta <= math.pi, "vartheta", "must lie in [0, pi]")
        _require(self.rates_khz >= 0 and self.kappa_khz >= 0, "rates_khz", "rates must be non-negative")
        _require(self.initial in ("g0g", "f0g", "g0f", "f0f"), "initial", "must be g0g, f0g, g0f or f0f")
        _require(self.grid_points >= 2 and self.grid_max_mhz > 0, "grid_points", "calibration grid is empty")
        _require(self.steps is None or self.steps >= 1, "steps", "must be at least 1")

    def system(self) -> SystemParams:
        r = units.khz(self.rates_khz)
        g = units.mhz(self.g_mhz)
        return SystemParams(
            TransmonParams(units.mhz(self.alpha_mhz), self.levels, r, r, r, r),
            ResonatorParams((g, g), self.photon_cutoff, units.khz(self.kappa_khz)),
            DetuningParams(units.mhz(self.delta_mhz)),
        )

    def calibration_config(self) -> CalibrateConfig:
        return CalibrateConfig(
            self.g_mhz, self.delta_mhz, self.alpha_mhz, self.levels, self.photon_cutoff,
            self.grid_points, self.grid_max_mhz, "pair",
        )


CONFIGS = {
    "single-gate": SingleGateConfig,
    "gate-average": GateAverageConfig,
    "noise-sweep": NoiseSweepConfig,
    "two-gate": TwoGateConfig,
    "calibrate": CalibrateConfig,
    "coupling-scan": CouplingScanConfig,
}


def build_params(experiment: str, *layers: dict):
    """Merge override layers onto the experiment defaults, rejecting unknown keys."""
    cls = CONFIGS[experiment]
    hints = typing.get_type_hints(cls)
    values = {}
    for layer in layers:
        for key, val in layer.items():
            if key not in hints:
                raise ConfigError(f"unknown key {key!r} for experiment {experiment}")
            values[key] = _coerce(key, hints[key], val)
    return cls(**values)


def load_config_file(path, experiment: str) -> tuple[dict, int | None]:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    for key in data:
        if key not in ("experiment", "seed", "params"):
            raise ConfigError(f"unknown top-level key {key!r}")
    if data.get("experiment", experiment) != experiment:
        raise ConfigError(f"experiment: config is for {data['experiment']!r}, not {experiment!r}")
    params = data.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params: must be a JSON object")
    seed = data.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ConfigError("seed: must be an integer")
    return params, seed


def config_record(experiment: str, params, seed: int) -> dict:
    return {"experiment": experiment, "seed": seed, "params": dataclasses.asdict(params)}


def config_hash(record: dict) -> str:
    canon = json.dumps(record, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


# --- output ---------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.{CSV_DIGITS}g}"


def write_csv(path: Path, header, rows) -> Path:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return Path(path)


def _trajectory_rows(traj: lindblad.Trajectory, names, every: int):
    t = traj.observable_times
    keep = list(range(0, len(t), every))
    if keep[-1] != len(t) - 1:
        keep.append(len(t) - 1)
    return [[units.to_ns(t[i]), *(traj.observables[n][i] for n in names)] for i in keep]


@dataclass
class ResultRecord:
    experiment: str
    config_hash: str
    config: dict
    headline: dict
    files: dict
    wall_clock_s: float = 0.0
    extra: dict = dataclasses.field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=1, sort_keys=True) + "\n"


# --- calibration cache ----------------------------------------------------------


def cache_dir() -> Path:
    env = os.environ.get("HOLOSIM_CACHE")
    return Path(env) if env else Path.home() / ".cache" / "holosim"


def calibration_key(cfg: CalibrateConfig) -> str:
    return config_hash({"calibration": dataclasses.asdict(cfg)})[:16]


def cached_calibration(cfg: CalibrateConfig) -> tuple[calibration.CalibrationCurve, Path, bool]:
    """Load the curve for ``cfg`` from the cache, computing and storing it if absent."""
    path = cache_dir() / f"calibration-{calibration_key(cfg)}.csv"
    if path.exists():
        return calibration.CalibrationCurve.from_csv(path), path, True
    curve = calibration.calibrate_omega(
        units.mhz(cfg.g_mhz), cfg.grid(), units.mhz(cfg.delta_mhz), units.mhz(cfg.alpha_mhz),
        model=cfg.model, levels=cfg.levels, cutoff=cfg.photon_cutoff,
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    curve.to_csv(path)
    return curve, path, False


# --- experiments ----------------------------------------------------------------


def _figure_for_gate(p: SingleGateConfig) -> str | None:
    if not math.isclose(p.theta, math.pi / 2) or p.phi % (2 * math.pi) != 0:
        return None
    if math.isclose(p.gamma, math.pi):
        return "fig2a"
    if math.isclose(p.gamma, math.pi / 2):
        return "fig2b"
    return None


def run_single_gate(p: SingleGateConfig, seed: int, out: Path, threads: int):
    run = lindblad.simulate_single_gate(p.schedule(), p.transmon(), spec=p.gate(), mode=p.mode, steps=p.steps)
    names = ("P_g", "P_e", "P_f", "F")
    rows = _trajectory_rows(run.trajectory, names, lindblad.STORE_EVERY)
    files = {"trajectory": write_csv(out / "trajectory.csv", ("t_ns", *names), rows)}
    headline = {"fidelity": run.fidelity, "duration_ns": units.to_ns(p.schedule().duration)}
    return headline, files, {"rows": rows, "header": ("t_ns", *names)}


def run_gate_average(p: GateAverageConfig, seed: int, out: Path, threads: int):
    thetas, fids = lindblad.gate_fidelity_profile(
        p.schedule(), p.transmon(), p.n_states, spec=p.gate(), mode=p.mode, steps=p.steps
    )
    rows = [(k, th, f) for k, (th, f) in enumerate(zip(thetas, fids))]
    files = {"profile": write_csv(out / "profile.csv", ("state_index", "theta_prime", "F"), rows)}
    return {"average_fidelity": float(np.mean(fids)), "min_fidelity": float(np.min(fids))}, files, {"rows": rows}


def run_noise_sweep(p: NoiseSweepConfig, seed: int, out: Path, threads: int):
    eps = np.linspace(0.0, p.eps_max, p.eps_points) if p.eps_points > 1 else np.array([p.eps_max])
    seeds = list(range(seed, seed + p.seeds))

    def one(e):
        return lindblad.noise_robustness_sweep(
            [float(e)], seeds, p.gate(), units.mhz(p.omega_mhz), p.transmon(),
            bins=p.bins, shape=p.shape, mode=p.mode, steps=p.steps,
        )[0]

    # results come back in grid order whatever the completion order
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        table = list(pool.map(one, eps))
    rows = [(r.eps, r.mean, r.stderr) for r in table]
    per_seed = [(r.eps, s, f) for r in table for s, f in zip(seeds, r.fidelities)]
    files = {
        "sweep": write_csv(out / "sweep.csv", ("eps", "mean_F", "stderr"), rows),
        "per_seed": write_csv(out / "sweep_per_seed.csv", ("eps", "seed", "F"), per_seed),
    }
    return {"mean_fidelity_at_eps_max": table[-1].mean, "min_mean_fidelity": min(r.mean for r in table)}, files, {"rows": rows}


def run_calibrate(p: CalibrateConfig, seed: int, out: Path, threads: int):
    curve, cache_path, hit = cached_calibration(p)
    curve.to_csv(out / "calibration.csv")
    g, d, a = units.mhz(p.g_mhz), units.mhz(p.delta_mhz), units.mhz(p.alpha_mhz)
    variant = curve.metadata.get("validated_variant") or "appendix"
    pert = [
        units.to_mhz(calibration.perturbative_coupling(g, units.mhz(om), d, a, variant).magnitude)
        for om in curve.omega_mhz
    ]
    files = {
        "calibration": out / "calibration.csv",
        "fig4": write_csv(out / "fig4.csv", ("omega_MHz", "delta_s_MHz"), zip(curve.omega_mhz, curve.delta_s_mhz)),
        "fig5": write_csv(
            out / "fig5.csv", ("omega_MHz", "g_numeric_MHz", "g_perturbative_MHz"),
            zip(curve.omega_mhz, curve.g_eff_mhz, pert),
        ),
    }
    headline = {
        "rows": len(curve.omega_mhz),
        "delta_s_at_zero_MHz": float(curve.delta_s_mhz[0]),
        "delta_s_at_max_MHz": float(curve.delta_s_mhz[-1]),
        "g_eff_at_max_MHz": float(curve.g_eff_mhz[-1]),
        "delta_s_monotone": bool(np.all(np.diff(curve.delta_s_mhz) > 0)),
    }
    return headline, files, {"cache": str(cache_path), "cache_hit": hit, "validated_variant": variant}


def run_coupling_scan(p: CouplingScanConfig, seed: int, out: Path, threads: int):
    g, d, a = units.mhz(p.g_mhz), units.mhz(p.delta_mhz), units.mhz(p.alpha_mhz)
    kw = {"levels": p.levels, "cutoff": p.photon_cutoff}
    curve = calibration.calibrate_omega(g, p.grid(), d, a, model=p.model, **kw)
    small = units.mhz(p.small_omega_mhz)
    slope = calibration.numeric_coupling(g, small, d, a, **kw) / small
    rows = []
    for om_mhz, gn in zip(curve.omega_mhz, curve.g_eff_mhz):
        om = units.mhz(om_mhz)
        app = calibration.perturbative_coupling(g, om, d, a, "appendix").magnitude
        main = calibration.perturbative_coupling(g, om, d, a, "maintext").magnitude
        rows.append((om_mhz, gn, units.to_mhz(app), units.to_mhz(main), units.to_mhz(slope * om)))
    header = ("omega_MHz", "g_numeric_MHz", "g_appendix_MHz", "g_maintext_MHz", "g_linear_MHz")
    variant = curve.metadata["validated_variant"] or "appendix"
    col = 2 if variant == "appendix" else 3
    files = {
        "scan": write_csv(out / "coupling_scan.csv", header, rows),
        "fig5": write_csv(
            out / "fig5.csv", ("omega_MHz", "g_numeric_MHz", "g_perturbative_MHz"),
            [(r[0], r[1], r[col]) for r in rows],
        ),
    }
    last = rows[-1]
    headline = {
        "g_numeric_at_max_MHz": last[1],
        "relative_deviation_from_linear_at_max": abs(last[1] - last[4]) / last[4],
    }
    return headline, files, {"validated_variant": variant}


def run_two_gate(p: TwoGateConfig, seed: int, out: Path, threads: int):
    curve, cache_path, hit = cached_calibration(p.calibration_config())
    if p.omega_max_mhz is not None:
        duration = lindblad.cyclic_duration(curve, units.mhz(p.omega_max_mhz), p.vartheta)
    else:
        duration = units.ns(p.duration_ns)
    run = lindblad.two_qubit_gate_run(
        p.system(), curve, duration, vartheta=p.vartheta, initial=p.initial,
        uncompensated=not p.compensate, steps=p.steps,
    )
    names = ("P_f0g", "P_g0f", "P_g1g", "P_photon", "P_leak", "F")
    rows = _trajectory_rows(run.trajectory, names, lindblad.STORE_EVERY)
    files = {"trajectory": write_csv(out / "trajectory.csv", ("t_ns", *names), rows)}
    headline = {
        "fidelity": run.fidelity,
        "resonator_population": run.resonator_population,
        "leakage": run.leakage,
        "duration_ns": units.to_ns(duration),
        "peak_coupling_MHz": units.to_mhz(max(run.peak_couplings)),
        "peak_drive_MHz": units.to_mhz(max(run.peak_drives)),
    }
    return headline, files, {"rows": rows, "header": ("t_ns", *names), "cache": str(cache_path), "cache_hit": hit}


RUNNERS = {
    "single-gate": run_single_gate,
    "gate-average": run_gate_average,
    "noise-sweep": run_noise_sweep,
    "two-gate": run_two_gate,
    "calibrate": run_calibrate,
    "coupling-scan": run_coupling_scan,
}


def emit_figure_data(experiment: str, params, out: Path, data: dict) -> dict:
    """Write the figure-panel CSVs that belong to ``experiment``; return their paths."""
    out = Path(out)
    files = {}
    if experiment == "single-gate":
        fig = _figure_for_gate(params)
        if fig:
            files[fig] = write_csv(out / f"{fig}.csv", data["header"], data["rows"])
    elif experiment == "gate-average":
        files["fig2c"] = write_csv(out / "fig2c.csv", ("state_index", "theta_prime", "F"), data["rows"])
    elif experiment == "noise-sweep":
        files["fig2d"] = write_csv(out / "fig2d.csv", ("eps", "mean_F", "stderr"), data["rows"])
    elif experiment == "two-gate":
        files["fig3"] = write_csv(out / "fig3.csv", data["header"], data["rows"])
    return files


def run(experiment: str, params, seed: int = 0, out=None, threads: int = 1) -> ResultRecord:
    """Execute one experiment and write its CSVs, figure data and summary."""
    out = Path(out or Path("results") / experiment)
    out.mkdir(parents=True, exist_ok=True)
    record = config_record(experiment, params, seed)
    t0 = time.perf_counter()
    headline, files, data = RUNNERS[experiment](params, seed, out, threads)
    files.update(emit_figure_data(experiment, params, out, data))
    files["headline"] = write_csv(out / "headline.csv", ("name", "value"), sorted(headline.items()))
    extra = {k: v for k, v in data.items() if k not in ("rows", "header")}
    res = ResultRecord(
        experiment,
        config_hash(record),
        record,
        headline,
        {k: str(v) for k, v in files.items()},
        time.perf_counter() - t0,
        extra,
    )
    (out / "summary.json").write_text(res.to_json())
    return res


# --- argument parsing -----------------------------------------------------------


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holosim", description="Holonomic transmon gate simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run an experiment")
    exps = run_p.add_subparsers(dest="experiment", required=True)
    for name, cls in CONFIGS.items():
        ep = exps.add_parser(name, help=f"run the {name} experiment")
        ep.add_argument("--config", help="JSON config file")
        ep.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a parameter")
        ep.add_argument("--out", help="output directory (default results/<experiment>)")
        ep.add_argument("--seed", type=int, help="base random seed (default 0)")
        ep.add_argument("--threads", type=int, default=1, help="workers for sweep members")
        for f in dataclasses.fields(cls):
            ep.add_argument(_flag(f.name), dest=f"field_{f.name}", metavar="VALUE", help=f"default {f.default!r}")
    return parser


def _parse_set(items) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, val = item.split("=", 1)
        try:
            out[key.strip()] = json.loads(val)
        except json.JSONDecodeError:
            out[key.strip()] = val
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        exp = args.experiment
        file_params, file_seed = load_config_file(args.config, exp) if args.config else ({}, None)
        flags = {
            k[len("field_"):]: v for k, v in vars(args).items() if k.startswith("field_") and v is not None
        }
        params = build_params(exp, file_params, _parse_set(args.set), flags)
        seed = args.seed if args.seed is not None else (file_seed if file_seed is not None else 0)
        if args.threads < 1:
            raise ConfigError("threads: must be at least 1")
        res = run(exp, params, seed, args.out, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantError as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except CalibrationError as exc:
        print(f"calibration failure: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    print(json.dumps({"experiment": res.experiment, "config_hash": res.config_hash, **res.headline}, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
