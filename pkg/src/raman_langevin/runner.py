"""Batch pipeline: parameters -> steady state -> moments -> observable tables."""

from __future__ import annotations

import hashlib
import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, InstabilityError
from .linear_system import build_diffusion, build_drift, fdt_warnings, stability
from .moments import commutator_drift, evolve, initial_moments
from .observables import ObservableRecord, parse_pair, record, single_mode_symplectic
from .params import BOSONIC_MODES, SystemParams, dump_config, read_config
from .steady_state import SteadyState, solve, verify_fixed_point

SCHEMA_VERSION = 1

DEFAULT_PAIRS = (("signal", "idler"), ("signal", "phonon"), ("stoke", "antistoke"))
DEFAULT_TEMPS = (0.1, 0.8, 10.0, 100.0)
DEFAULT_LOCATIONS = (16e-9, 24e-9, 50e-9)


@dataclass(frozen=True)
class TimeGrid:
    start: float = 1e-14
    stop: float = 1e-7
    points: int = 600
    spacing: str = "log"

    def __post_init__(self):
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ConfigError("time grid bounds must be finite", key="t")
        if not self.stop > self.start >= 0:
            raise ConfigError(f"need stop > start >= 0, got start={self.start}, stop={self.stop}", key="t")
        if int(self.points) != self.points or self.points < 2:
            raise ConfigError(f"need at least 2 time points, got {self.points}", key="t_points")
        if self.spacing not in ("log", "linear"):
            raise ConfigError(f"spacing must be 'log' or 'linear', got {self.spacing!r}", key="t_spacing")
        if self.spacing == "log" and self.start <= 0:
            raise ConfigError("log spacing needs start > 0", key="t_start")

    def times(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, int(self.points))
        return np.linspace(self.start, self.stop, int(self.points))


def _check_sweep(values, name):
    if values is None:
        return None
    vals = tuple(float(v) for v in values)
    if not vals:
        raise ConfigError(f"{name} list is empty", key=name)
    if any(not math.isfinite(v) for v in vals):
        raise ConfigError(f"{name} values must be finite", key=name)
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ConfigError(f"{name} list must be strictly increasing", key=name)
    return vals


@dataclass(frozen=True)
class RunSpec:
    """One batch run: what to compute, on which grid, and where to write it."""

    command: str = "simulate"
    config: Path | None = None
    grid: TimeGrid = field(default_factory=TimeGrid)
    temps: tuple[float, ...] | None = None
    locations: tuple[float, ...] | None = None
    pairs: tuple = DEFAULT_PAIRS
    out: Path | None = None
    include_mean: bool = False

    def __post_init__(self):
        object.__setattr__(self, "temps", _check_sweep(self.temps, "temps"))
        object.__setattr__(self, "locations", _check_sweep(self.locations, "locations"))
        if self.temps is not None and any(t < 0 for t in self.temps):
            raise ConfigError("temperatures must be >= 0", key="temps")
        if self.locations is not None and any(r < 0 for r in self.locations):
            raise ConfigError("locations must be >= 0", key="locations")
        try:
            pairs = tuple(parse_pair(p) for p in self.pairs)
        except ValueError as exc:
            raise ConfigError(str(exc), key="pairs") from exc
        if len(set(pairs)) != len(pairs):
            raise ConfigError("duplicate mode pair", key="pairs")
        object.__setattr__(self, "pairs", pairs)

    def load_params(self) -> SystemParams:
        return SystemParams() if self.config is None else read_config(self.config)


@dataclass(frozen=True, eq=False)
class Prepared:
    """Steady state and drift for one parameter set, checked for stability."""

    params: SystemParams
    ss: SteadyState
    A: np.ndarray
    max_real: float


@dataclass(frozen=True, eq=False)
class Table:
    columns: list[str]
    rows: list[list]


def prepare(params: SystemParams) -> Prepared:
    """Solve the mean field, build the drift and refuse an unstable system."""
    ss = solve(params)
    A = build_drift(params, ss).A
    rep = stability(A)
    if not rep.stable:
        raise InstabilityError(
            f"unstable system: max Re(eig A) = {rep.max_real:.6g} 1/s; refusing to simulate",
            max_real=rep.max_real,
        )
    return Prepared(params, ss, A, rep.max_real)


def _pair_name(pair) -> str:
    return f"{pair[0].value}_{pair[1].value}"


def columns(pairs, axis: str | None = None) -> list[str]:
    cols = [axis] if axis else []
    cols.append("t")
    for mode in BOSONIC_MODES:
        m = mode.value
        cols += [f"varX_{m}", f"varP_{m}", f"n_{m}", f"g2_{m}"]
    cols += [f"two_eta_{_pair_name(p)}" for p in pairs]
    return cols


def record_row(rec: ObservableRecord, pairs) -> list:
    row = [rec.t]
    for mode in BOSONIC_MODES:
        v = rec.variances[mode]
        row += [v.varX, v.varP, rec.occupation[mode], rec.g2[mode]]
    row += [rec.pairs[p].two_eta for p in pairs]
    return row


def series(prep: Prepared, T: float, times, pairs, include_mean: bool) -> list[ObservableRecord]:
    """Observable records on ``times`` for the prepared system at temperature ``T``."""
    D = build_diffusion(prep.params, T).D
    M0 = initial_moments().M
    return [record(evolve(M0, prep.A, D, t), prep.ss, pairs, include_mean) for t in times]


def simulate(spec: RunSpec, params: SystemParams | None = None) -> Table:
    params = spec.load_params() if params is None else params
    prep = prepare(params)
    recs = series(prep, params.T, spec.grid.times(), spec.pairs, spec.include_mean)
    return Table(columns(spec.pairs), [record_row(r, spec.pairs) for r in recs])


def sweep_temperature(spec: RunSpec, params: SystemParams | None = None) -> Table:
    """Temperature blocks sharing one drift matrix; only the diffusion changes."""
    params = spec.load_params() if params is None else params
    temps = spec.temps or DEFAULT_TEMPS
    prep = prepare(params)
    rows = []
    for T in temps:
        recs = series(prep, T, spec.grid.times(), spec.pairs, spec.include_mean)
        rows += [[T] + record_row(r, spec.pairs) for r in recs]
    return Table(columns(spec.pairs, "T"), rows)


def sweep_location(spec: RunSpec, params: SystemParams | None = None) -> Table:
    """Molecule-location blocks; couplings and steady state are redone per ``r``."""
    params = spec.load_params() if params is None else params
    if params.profile is None:
        raise ConfigError("sweep-location needs a [profile] section", key="profile")
    locations = spec.locations or DEFAULT_LOCATIONS
    rows = []
    for r in locations:
        p = replace(params, r_mol=r)
        prep = prepare(p)
        recs = series(prep, p.T, spec.grid.times(), spec.pairs, spec.include_mean)
        rows += [[r] + record_row(rec, spec.pairs) for rec in recs]
    return Table(columns(spec.pairs, "r"), rows)


def _cell(v) -> str:
    if v is None:
        return ""
    return format(float(v), ".17g")


def to_csv(table: Table) -> str:
    buf = io.StringIO()
    buf.write(",".join(table.columns) + "\n")
    for row in table.rows:
        buf.write(",".join(_cell(v) for v in row) + "\n")
    return buf.getvalue()


def parse_csv(text: str) -> tuple[list[str], np.ndarray]:
    """Header and float data (blank cells become NaN)."""
    lines = text.splitlines()
    header = lines[0].split(",")
    data = [[float(c) if c else math.nan for c in line.split(",")] for line in lines[1:]]
    return header, np.array(data, dtype=float).reshape(len(data), len(header))


def _params_dict(params: SystemParams) -> dict:
    out = {}
    for name in params.__dataclass_fields__:
        if name in ("defaulted", "profile"):
            continue
        out[name] = getattr(params, name)
    if params.profile is not None:
        out["profile"] = {"r": list(params.profile.r), "scale": list(params.profile.scale)}
    return out


def metadata(spec: RunSpec, params: SystemParams) -> dict:
    run = {
        "command": spec.command,
        "grid": {
            "start": spec.grid.start, "stop": spec.grid.stop,
            "points": int(spec.grid.points), "spacing": spec.grid.spacing,
        },
        "temps": list(spec.temps) if spec.temps else None,
        "locations": list(spec.locations) if spec.locations else None,
        "pairs": [[a.value, b.value] for a, b in spec.pairs],
        "include_mean": spec.include_mean,
    }
    body = {"parameters": _params_dict(params), "run": run}
    digest = hashlib.sha256(
        (dump_config(params) + json.dumps(run, sort_keys=True)).encode()
    ).hexdigest()
    return {
        "schema_version": SCHEMA_VERSION,
        **body,
        "defaulted": sorted(params.defaulted),
        "derived": params.derived(),
        "fdt_warnings": fdt_warnings(params),
        "run_hash": digest,
    }


def write_outputs(table: Table, spec: RunSpec, params: SystemParams) -> str:
    """Write the CSV (stdout when ``spec.out`` is None) and its metadata sidecar."""
    text = to_csv(table)
    if spec.out is None:
        return text
    out = Path(spec.out)
    out.write_text(text)
    side = out.with_name(out.name + ".meta.json")
    side.write_text(json.dumps(metadata(spec, params), indent=2, sort_keys=True) + "\n")
    return text


def stability_report(params: SystemParams) -> tuple[str, dict, bool]:
    """Human-readable report, its machine-readable form and the verdict."""
    ss = solve(params)
    rep = stability(build_drift(params, ss).A)
    warns = fdt_warnings(params)
    lines = [
        f"verdict: {'stable' if rep.stable else 'UNSTABLE'}",
        f"max_real: {rep.max_real:.17g}",
        f"margin: {rep.margin:.17g}",
        "spectrum (re, im):",
    ]
    lines += [f"  {ev.real:.17g} {ev.imag:.17g}" for ev in rep.spectrum]
    lines += [f"warning: {w}" for w in warns]
    data = {
        "schema_version": SCHEMA_VERSION,
        "stable": rep.stable,
        "max_real": rep.max_real,
        "margin": rep.margin,
        "spectrum": [[ev.real, ev.imag] for ev in rep.spectrum],
        "fdt_warnings": warns,
    }
    return "\n".join(lines) + "\n", data, rep.stable


def steady_state_report(params: SystemParams) -> dict:
    ss = solve(params)
    out = ss.as_dict()
    out["mean_field_drift"] = verify_fixed_point(ss, params)
    return out


def physicality(prep: Prepared, T: float, times: Sequence[float]) -> tuple[float, float]:
    """Worst single-mode symplectic value and commutator drift over ``times``."""
    D = build_diffusion(prep.params, T).D
    M0 = initial_moments().M
    worst_nu, worst_drift = math.inf, 0.0
    for t in times:
        M = evolve(M0, prep.A, D, t)
        worst_nu = min(worst_nu, min(single_mode_symplectic(M, m) for m in BOSONIC_MODES))
        worst_drift = max(worst_drift, commutator_drift(M))
    return worst_nu, worst_drift
