"""Reproducibility front end: named scenarios emitting plot-ready CSV.

Scenarios
---------
``fig1_filter``
    Momentum-filter curves: the transmitted momentum distributions and
    their means for a list of barrier widths.
``fig2_peaks``
    Density extrema (central, secondary, minima) versus time at the
    downstream face for thin barriers, plus the density curves themselves.
``fig3_times``
    Numeric peak-emergence time and velocity versus barrier width, next to
    the opaque-limit closed forms.
``fig4_transit``
    Arrival of the transmitted peak at a fixed downstream detector for a
    list of widths; the superluminal transit comparison.
``table1``
    The full extremum catalog at the downstream face for the canonical
    width ladder, with quadrature tightened enough to resolve secondary
    peaks twelve orders below the central one.
``custom``
    Whatever the config file asks for: peak scans for each width, transit
    reports when detectors are given.

Output contract: every run writes CSV (or JSON) files plus ``manifest.json``
recording parameters and sha256 checksums, and a gnuplot stub ``plot.gp``.
Reruns with identical configuration produce byte-identical files: node
counts are fixed, nothing depends on wall clock or RNG.  Exit codes:
0 success, 2 invalid configuration, 3 numeric non-convergence (partial
manifest with failure records).
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .asymptotics import (
    opaque_tunneling_time,
    opaque_tunneling_velocity,
    series_coefficients,
)
from .errors import ConfigError, DiracTunnelError
from .kinematics import BarrierConfig, momentum_window
from .transit import numeric_tunneling_time, scan_peaks, superluminal_detector_bound, transit_measure, transit_time_predicted
from .wavepacket import (
    PacketSpec,
    filter_stats,
    filtered_distributions,
    momentum_weight,
    transmitted_density,
)

__all__ = ["main", "run_scenario", "validate_config", "parse_config_text", "ScenarioConfig"]

SCENARIOS = (
    "fig1_filter",
    "fig2_peaks",
    "fig3_times",
    "fig4_transit",
    "table1",
    "custom",
)


@dataclass(frozen=True)
class PhysicsParams:
    v0: float
    mass: float
    p0: float
    d: float


@dataclass(frozen=True)
class GeometryParams:
    widths: tuple[float, ...]
    detectors: tuple[float, ...]
    offset: float


@dataclass(frozen=True)
class NumericsParams:
    nodes: int
    tolerance: float
    t_start: float
    t_stop: float
    t_step: float
    peak_floor: float
    curve_samples: int


@dataclass(frozen=True)
class OutputParams:
    directory: str
    format: str


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    physics: PhysicsParams
    geometry: GeometryParams
    numerics: NumericsParams
    output: OutputParams


# -- configuration loading --------------------------------------------------

_CANONICAL_P0 = math.sqrt(3.0) / 2.0

_BASE_DEFAULTS = {
    ("physics", "v0"): "1.0",
    ("physics", "mass"): "1.0",
    ("physics", "p0"): repr(_CANONICAL_P0),
    ("physics", "d"): "10.0",
    ("geometry", "L"): "10",
    ("geometry", "D"): "",
    ("geometry", "offset"): "0.0",
    ("numerics", "nodes"): "2048",
    ("numerics", "tolerance"): "1e-8",
    ("numerics", "t_start"): "-100.0",
    ("numerics", "t_stop"): "100.0",
    ("numerics", "t_step"): "0.25",
    ("numerics", "peak_floor"): "1e-6",
    ("numerics", "curve_samples"): "512",
    ("output", "directory"): ".",
    ("output", "format"): "csv",
}

_SCENARIO_DEFAULTS = {
    "fig1_filter": {("geometry", "L"): "0, 5, 10, 20, 50"},
    "fig2_peaks": {
        ("geometry", "L"): "10, 15, 20, 25, 30",
        ("numerics", "tolerance"): "1e-14",
        ("numerics", "peak_floor"): "1e-13",
    },
    "fig3_times": {
        ("geometry", "L"): ", ".join(str(w) for w in range(4, 101, 4)),
    },
    "fig4_transit": {
        ("geometry", "L"): "0, 10, 20, 30",
        ("geometry", "D"): "40",
        ("numerics", "t_stop"): "200.0",
    },
    "table1": {
        ("geometry", "L"): "10, 15, 20, 25, 30, 40, 50, 75, 100",
        ("numerics", "tolerance"): "1e-14",
        ("numerics", "peak_floor"): "1e-13",
    },
    "custom": {},
}

_VALID_KEYS = frozenset(_BASE_DEFAULTS)


def parse_config_text(text: str) -> dict[tuple[str, str], tuple[str, int]]:
    """Parse the flat sectioned key-value format.

    Returns ``{(section, key): (raw value, line number)}``.  Sections are
    ``[name]`` headers; assignments are ``key = value``; ``#`` starts a
    comment.  Unknown keys are rejected later, in :func:`validate_config`,
    where scenario context is available.
    """
    entries: dict[tuple[str, str], tuple[str, int]] = {}
    section = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {raw_line.strip()!r}", line=lineno)
            section = line[1:-1].strip()
            if not section:
                raise ConfigError("empty section name", line=lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw_line.strip()!r}", line=lineno)
        if section is None:
            raise ConfigError("assignment before any [section] header", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", line=lineno)
        if (section, key) in entries:
            raise ConfigError(f"duplicate key {section}.{key}", line=lineno)
        entries[(section, key)] = (value, lineno)
    return entries


def _parse_float(section, key, value, line):
    try:
        out = float(value)
    except ValueError:
        raise ConfigError(f"{section}.{key}: not a number: {value!r}", line=line) from None
    if not math.isfinite(out):
        raise ConfigError(f"{section}.{key}: must be finite, got {value!r}", line=line)
    return out


def _parse_int(section, key, value, line):
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{section}.{key}: not an integer: {value!r}", line=line) from None


def _parse_float_list(section, key, value, line):
    items = [part.strip() for part in value.split(",")]
    items = [part for part in items if part]
    return tuple(_parse_float(section, key, part, line) for part in items)


def validate_config(
    raw: dict[tuple[str, str], tuple[str, int]],
    scenario: str,
    overrides: dict[tuple[str, str], str] | None = None,
    out_dir: str | None = None,
) -> ScenarioConfig:
    """Apply defaults, types and physics bounds; reject unknown keys.

    ``raw`` comes from :func:`parse_config_text`; ``overrides`` (from
    ``--set``) win over the file, ``out_dir`` (from ``--out``) wins over
    both for the output directory.
    """
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)}")

    merged: dict[tuple[str, str], tuple[str, int | None]] = {
        path: (value, None) for path, value in _BASE_DEFAULTS.items()
    }
    merged.update({path: (value, None) for path, value in _SCENARIO_DEFAULTS[scenario].items()})
    for path, (value, line) in raw.items():
        if path not in _VALID_KEYS:
            raise ConfigError(f"unknown key {path[0]}.{path[1]}", line=line)
        merged[path] = (value, line)
    for path, value in (overrides or {}).items():
        if path not in _VALID_KEYS:
            raise ConfigError(f"unknown key {path[0]}.{path[1]} in --set")
        merged[path] = (value, None)
    if out_dir is not None:
        merged[("output", "directory")] = (out_dir, None)

    def take(section, key, parse):
        value, line = merged[(section, key)]
        return parse(section, key, value, line)

    physics = PhysicsParams(
        v0=take("physics", "v0", _parse_float),
        mass=take("physics", "mass", _parse_float),
        p0=take("physics", "p0", _parse_float),
        d=take("physics", "d", _parse_float),
    )
    geometry = GeometryParams(
        widths=take("geometry", "L", _parse_float_list),
        detectors=take("geometry", "D", _parse_float_list),
        offset=take("geometry", "offset", _parse_float),
    )
    numerics = NumericsParams(
        nodes=take("numerics", "nodes", _parse_int),
        tolerance=take("numerics", "tolerance", _parse_float),
        t_start=take("numerics", "t_start", _parse_float),
        t_stop=take("numerics", "t_stop", _parse_float),
        t_step=take("numerics", "t_step", _parse_float),
        peak_floor=take("numerics", "peak_floor", _parse_float),
        curve_samples=take("numerics", "curve_samples", _parse_int),
    )
    output = OutputParams(
        directory=merged[("output", "directory")][0],
        format=merged[("output", "format")][0].strip().lower(),
    )

    # physics bounds; barrier and packet constructors own the detailed rules
    try:
        probe = BarrierConfig(
            v0=physics.v0, width=0.0, mass=physics.mass, offset=geometry.offset
        )
        lo, hi = momentum_window(probe)
        PacketSpec(p0=physics.p0, d=physics.d, p_min=lo, p_max=hi)
    except (DiracTunnelError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    if not geometry.widths:
        raise ConfigError("geometry.L must list at least one barrier width")
    for width in geometry.widths:
        if width < 0.0:
            raise ConfigError(f"geometry.L: widths must be non-negative, got {width}")
    if geometry.detectors:
        needed = geometry.offset + max(geometry.widths)
        for det in geometry.detectors:
            if det < needed:
                raise ConfigError(
                    f"geometry.D: detector {det} sits before the downstream "
                    f"barrier face at {needed}"
                )
    if numerics.nodes < 64:
        raise ConfigError(f"numerics.nodes must be at least 64, got {numerics.nodes}")
    if not 0.0 < numerics.tolerance < 1.0:
        raise ConfigError(f"numerics.tolerance must lie in (0, 1), got {numerics.tolerance}")
    if not numerics.t_start < numerics.t_stop:
        raise ConfigError(
            f"numerics.t_start={numerics.t_start} must precede t_stop={numerics.t_stop}"
        )
    if not numerics.t_step > 0.0:
        raise ConfigError(f"numerics.t_step must be positive, got {numerics.t_step}")
    if not 0.0 < numerics.peak_floor <= 1.0:
        raise ConfigError(f"numerics.peak_floor must lie in (0, 1], got {numerics.peak_floor}")
    if numerics.curve_samples < 2:
        raise ConfigError(f"numerics.curve_samples must be at least 2, got {numerics.curve_samples}")
    if output.format not in ("csv", "json"):
        raise ConfigError(f"output.format must be csv or json, got {output.format!r}")

    return ScenarioConfig(
        scenario=scenario,
        physics=physics,
        geometry=geometry,
        numerics=numerics,
        output=output,
    )


# -- output plumbing ---------------------------------------------------------


def _fmt_cell(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


class _Emitter:
    """Collects tabular outputs and writes them with checksums."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.directory = Path(config.output.directory)
        self.outputs: list[dict] = []
        self.failures: list[dict] = []

    def comment(self, width=None, nodes=None) -> str:
        p = self.config.physics
        parts = [f"V0={_fmt_cell(p.v0)}", f"m={_fmt_cell(p.mass)}"]
        if width is not None:
            parts.append(f"L={_fmt_cell(width)}")
        parts += [f"p0={_fmt_cell(p.p0)}", f"d={_fmt_cell(p.d)}"]
        parts.append(f"nodes={self.config.numerics.nodes if nodes is None else nodes}")
        return " ".join(parts)

    def table(self, name: str, columns: list[str], rows: list[tuple], comment: str):
        if self.config.output.format == "json":
            payload = {
                "comment": comment,
                "columns": columns,
                "rows": [[_fmt_cell(cell) for cell in row] for row in rows],
            }
            body = json.dumps(payload, indent=2, sort_keys=True) + "\n"
            self._write(Path(name).with_suffix(".json").name, body)
            return
        lines = [f"# {comment}", ",".join(columns)]
        lines += [",".join(_fmt_cell(cell) for cell in row) for row in rows]
        self._write(name, "\n".join(lines) + "\n")

    def text(self, name: str, body: str):
        self._write(name, body)

    def _write(self, name: str, body: str):
        path = self.directory / name
        data = body.encode("utf-8")
        path.write_bytes(data)
        self.outputs.append(
            {
                "file": name,
                "sha256": hashlib.sha256(data).hexdigest(),
                "bytes": len(data),
            }
        )

    def fail(self, item: str, exc: Exception):
        record = {"item": item, "error": f"{type(exc).__name__}: {exc}"}
        estimate = getattr(exc, "estimate", None)
        if estimate is not None:
            record["estimate"] = float(estimate)
        self.failures.append(record)

    def manifest(self) -> dict:
        return {
            "scenario": self.config.scenario,
            "parameters": dataclasses.asdict(self.config),
            "outputs": sorted(self.outputs, key=lambda o: o["file"]),
            "failures": self.failures,
        }


def _plot_stub(outputs: list[dict]) -> str:
    lines = [
        "# gnuplot stub for the CSV files in this directory",
        "set datafile separator ','",
        "set key autotitle columnhead",
    ]
    for out in sorted(outputs, key=lambda o: o["file"]):
        name = out["file"]
        if name.endswith(".csv"):
            lines.append(f"# plot '{name}' using 1:2 with lines")
    return "\n".join(lines) + "\n"


# -- scenario bodies ---------------------------------------------------------


def _width_tag(width: float) -> str:
    return format(float(width), "g").replace(".", "p").replace("-", "m")


def _barrier(config: ScenarioConfig, width: float) -> BarrierConfig:
    p = config.physics
    return BarrierConfig(
        v0=p.v0, width=width, mass=p.mass, offset=config.geometry.offset
    )


def _packet(config: ScenarioConfig) -> PacketSpec:
    p = config.physics
    lo, hi = momentum_window(_barrier(config, 0.0))
    return PacketSpec(p0=p.p0, d=p.d, p_min=lo, p_max=hi)


def _run_filter(config: ScenarioConfig, emitter: _Emitter):
    spec = _packet(config)
    p_axis = np.linspace(spec.p_min, spec.p_max, config.numerics.curve_samples)
    stats_rows = []
    for width in config.geometry.widths:
        cfg = _barrier(config, width)
        g_t, f_t = filtered_distributions(p_axis, spec, cfg)
        weight = momentum_weight(p_axis, spec)
        rows = list(zip(p_axis, weight, g_t, f_t))
        emitter.table(
            f"filter_L{_width_tag(width)}.csv",
            ["p", "weight", "g_t", "f_t"],
            rows,
            emitter.comment(width=width),
        )
        try:
            stats = filter_stats(spec, cfg, nodes=config.numerics.nodes)
        except DiracTunnelError as exc:
            emitter.fail(f"filter_stats L={width:g}", exc)
            continue
        stats_rows.append(
            (
                width,
                stats.p_mean,
                stats.e_mean,
                stats.v_out,
                stats.transmitted_weight,
                stats.p_mean / (stats.e_mean + config.physics.mass),
            )
        )
    emitter.table(
        "filter_stats.csv",
        ["L", "p_mean", "e_mean", "v_out", "transmitted_weight", "component_ratio"],
        stats_rows,
        emitter.comment(),
    )


def _scan_one(config: ScenarioConfig, spec, width: float):
    n = config.numerics
    cfg = _barrier(config, width)
    return scan_peaks(
        config.geometry.offset + width,
        (n.t_start, n.t_stop),
        spec,
        cfg,
        step=n.t_step,
        nodes=n.nodes,
        tol=n.tolerance,
        min_density_ratio=n.peak_floor,
    )


def _run_peaks(config: ScenarioConfig, emitter: _Emitter, with_curves: bool):
    spec = _packet(config)
    n = config.numerics
    peak_rows = []
    for width in config.geometry.widths:
        try:
            records = _scan_one(config, spec, width)
        except DiracTunnelError as exc:
            emitter.fail(f"scan L={width:g}", exc)
            continue
        for rec in records:
            peak_rows.append((width, rec.kind.value, rec.time, rec.density))
        if with_curves:
            t_axis = np.arange(n.t_start, n.t_stop + 0.5 * n.t_step, n.t_step)
            grid = transmitted_density(
                config.geometry.offset + width,
                t_axis,
                spec,
                _barrier(config, width),
                nodes=n.nodes,
            )
            emitter.table(
                f"density_L{_width_tag(width)}.csv",
                ["t", "density"],
                list(zip(grid.axis, grid.values)),
                emitter.comment(width=width),
            )
    emitter.table(
        "peaks.csv",
        ["L", "kind", "t_peak", "density"],
        peak_rows,
        emitter.comment(),
    )


def _run_times(config: ScenarioConfig, emitter: _Emitter):
    spec = _packet(config)
    n = config.numerics
    coeffs = series_coefficients(_barrier(config, 0.0))
    v_closed = opaque_tunneling_velocity(_barrier(config, 0.0))
    rows = []
    for width in config.geometry.widths:
        if width <= 0.0:
            emitter.fail(f"times L={width:g}", ValueError("width must be positive"))
            continue
        cfg = _barrier(config, width)
        try:
            tau, v = numeric_tunneling_time(
                spec,
                cfg,
                t_range=(n.t_start, n.t_stop),
                step=n.t_step,
                nodes=n.nodes,
                tol=n.tolerance,
            )
        except DiracTunnelError as exc:
            emitter.fail(f"times L={width:g}", exc)
            continue
        opaque = opaque_tunneling_time(width, coeffs, mode="exact")
        rows.append((width, tau, v, opaque.tau, v_closed))
    emitter.table(
        "times.csv",
        ["L", "tau", "v", "tau_opaque", "v_opaque"],
        rows,
        emitter.comment(),
    )


def _run_transit(config: ScenarioConfig, emitter: _Emitter):
    spec = _packet(config)
    n = config.numerics
    v_closed = opaque_tunneling_velocity(_barrier(config, 0.0))
    transit_rows = []
    context_rows = []
    for detector in config.geometry.detectors:
        for width in config.geometry.widths:
            cfg = _barrier(config, width)
            try:
                report = transit_measure(
                    detector,
                    spec,
                    cfg,
                    t_range=(n.t_start, n.t_stop),
                    step=n.t_step,
                    nodes=n.nodes,
                    tol=n.tolerance,
                )
                stats = filter_stats(spec, cfg, nodes=n.nodes)
            except DiracTunnelError as exc:
                emitter.fail(f"transit D={detector:g} L={width:g}", exc)
                continue
            transit_rows.append(
                (detector, width, report.t_dl, report.v_dl, report.superluminal)
            )
            predicted = (
                transit_time_predicted(detector, width, v_closed, stats.v_out)
                if width > 0.0
                else detector / stats.v_out
            )
            bound = superluminal_detector_bound(v_closed, stats.v_out, width)
            context_rows.append(
                (detector, width, predicted, stats.v_out, v_closed, bound)
            )
    emitter.table(
        "transit.csv",
        ["D", "L", "t_dl", "v_dl", "superluminal"],
        transit_rows,
        emitter.comment(),
    )
    emitter.table(
        "transit_context.csv",
        ["D", "L", "t_predicted", "v_out", "v_tun", "d_bound"],
        context_rows,
        emitter.comment(),
    )


def run_scenario(config: ScenarioConfig) -> dict:
    """Execute one scenario; write outputs, plot stub and manifest.

    Returns the manifest dict (also written to ``manifest.json``).  Numeric
    failures do not abort the run: they are recorded in the manifest's
    ``failures`` list and reflected in the process exit code.
    """
    emitter = _Emitter(config)
    emitter.directory.mkdir(parents=True, exist_ok=True)

    scenario = config.scenario
    if scenario == "fig1_filter":
        _run_filter(config, emitter)
    elif scenario == "fig2_peaks":
        _run_peaks(config, emitter, with_curves=True)
    elif scenario == "table1":
        _run_peaks(config, emitter, with_curves=False)
    elif scenario == "fig3_times":
        _run_times(config, emitter)
    elif scenario == "fig4_transit":
        _run_transit(config, emitter)
    elif scenario == "custom":
        _run_peaks(config, emitter, with_curves=False)
        _run_filter(config, emitter)
        if config.geometry.detectors:
            _run_transit(config, emitter)
    else:  # pragma: no cover - guarded by validate_config
        raise ConfigError(f"unknown scenario {scenario!r}")

    if config.output.format == "csv":
        emitter.text("plot.gp", _plot_stub(emitter.outputs))
    manifest = emitter.manifest()
    body = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    (emitter.directory / "manifest.json").write_bytes(body.encode("utf-8"))
    return manifest


# -- argument handling -------------------------------------------------------


def _parse_set_items(items: list[str]) -> dict[tuple[str, str], str]:
    overrides: dict[tuple[str, str], str] = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        path, value = item.split("=", 1)
        if "." not in path:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        section, key = path.split(".", 1)
        overrides[(section.strip(), key.strip())] = value.strip()
    return overrides


def _parse_sweep_range(text: str) -> str:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"--L expects start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(part) for part in parts)
    except ValueError:
        raise ConfigError(f"--L expects numbers in start:stop:step, got {text!r}") from None
    if step <= 0.0 or stop < start:
        raise ConfigError(f"--L range is empty: {text!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    widths = [start + i * step for i in range(count)]
    return ", ".join(format(w, "g") for w in widths)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirac-tunnel",
        description="Relativistic wave-packet tunneling scenarios",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a named scenario")
    run.add_argument("--scenario", required=True, choices=SCENARIOS)
    run.add_argument("--out", default=None, help="output directory")
    run.add_argument("--config", default=None, help="config file path")
    run.add_argument(
        "--set",
        dest="set_items",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override one config value (repeatable)",
    )

    sweep = sub.add_parser("sweep", help="sweep barrier widths (times scenario)")
    sweep.add_argument("--L", required=True, metavar="START:STOP:STEP")
    sweep.add_argument("--out", default=None, help="output directory")
    sweep.add_argument("--config", default=None, help="config file path")
    sweep.add_argument(
        "--set",
        dest="set_items",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0

    try:
        raw = {}
        if args.config is not None:
            raw = parse_config_text(Path(args.config).read_text(encoding="utf-8"))
        overrides = _parse_set_items(args.set_items)
        if args.command == "sweep":
            scenario = "fig3_times"
            overrides[("geometry", "L")] = _parse_sweep_range(args.L)
        else:
            scenario = args.scenario
        config = validate_config(raw, scenario, overrides=overrides, out_dir=args.out)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    manifest = run_scenario(config)
    for out in manifest["outputs"]:
        print(f"wrote {Path(config.output.directory) / out['file']}")
    if manifest["failures"]:
        for failure in manifest["failures"]:
            print(f"failed: {failure['item']}: {failure['error']}", file=sys.stderr)
        return 3
    return 0
