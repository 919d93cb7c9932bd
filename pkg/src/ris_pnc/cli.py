"""Command-line sweeps: YAML config in, CSV (and optionally PNG) out.

A config holds scenario keys at the top level, the sweep (``sweep_axis`` and
``sweep_values``) and an optional ``series`` list; each series entry
overrides scenario keys (and may carry its own ``sweep_values``) and becomes
one CSV file. See ``recipes/*.yaml`` for complete examples.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import yaml

from .channel import CEE_MODES, NodeGeometry
from .modem import LABELINGS, SUPPORTED_ORDERS
from .ofdm import DEFAULT_GRID
from .simengine import FRAMINGS, METRICS, PHASE_MODES, SWEEP_AXES, BerPoint, Scenario, sweep

RECIPES = ("fig2", "fig3", "fig4", "fig5")
FORMATS = ("csv", "plot", "both")
SEED_ENV = "PNC_RIS_SEED"
CSV_COLUMNS = (
    "sweep_axis", "sweep_value", "L", "M", "phase_mode", "cee_db",
    "p_max_dbm", "bits", "errors", "ber", "dropped_rounds",
)
GEOMETRY_KEYS = tuple(f.name for f in fields(NodeGeometry))
SCENARIO_KEYS = tuple(f.name for f in fields(Scenario) if f.name != "geometry")
RUN_KEYS = ("name", "sweep_axis", "sweep_values", "series", "output_dir", "format", "workers")
SERIES_KEYS = ("label", "sweep_values") + SCENARIO_KEYS


class ConfigError(ValueError):
    """Invalid run configuration; the message names the key and line."""


@dataclass(frozen=True)
class Series:
    label: str
    scenario: Scenario
    values: tuple


@dataclass(frozen=True)
class RunConfig:
    name: str
    axis: str
    series: tuple
    output_dir: Path = Path("results")
    format: str = "csv"
    workers: int = 1
    source: dict = field(default_factory=dict, compare=False)

    @property
    def master_seed(self) -> int:
        return self.series[0].scenario.master_seed

    def with_overrides(self, seed=None, workers=None, output_dir=None, fmt=None) -> "RunConfig":
        cfg = self
        if seed is not None:
            _check_seed(seed, "seed", None)
            cfg = replace(cfg, series=tuple(replace(s, scenario=replace(s.scenario, master_seed=seed)) for s in cfg.series))
        if workers is not None:
            cfg = replace(cfg, workers=workers)
        if output_dir is not None:
            cfg = replace(cfg, output_dir=Path(output_dir))
        if fmt is not None:
            cfg = replace(cfg, format=fmt)
        return cfg

    def resolved(self) -> dict:
        """Fully expanded configuration, as embedded in every CSV header."""
        return {
            "name": self.name,
            "sweep_axis": self.axis,
            "ofdm_grid": {
                "n_fft": DEFAULT_GRID.n_fft,
                "n_cp": DEFAULT_GRID.n_cp,
                "data_subcarriers": list(DEFAULT_GRID.data_subcarriers),
                "pilot_subcarriers": list(DEFAULT_GRID.pilot_subcarriers),
            },
            "series": [
                {"label": s.label, "sweep_values": list(s.values), **s.scenario.to_dict()} for s in self.series
            ],
        }


def _key_lines(text: str) -> dict:
    """Map key paths like ``("series", 0, "L")`` to 1-based line numbers."""
    lines = {}
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return lines

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                p = path + (k.value,)
                lines[p] = k.start_mark.line + 1
                walk(v, p)
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                lines[path + (i,)] = v.start_mark.line + 1
                walk(v, path + (i,))

    if root is not None:
        walk(root, ())
    return lines


def _fail(key, line, msg):
    where = f" (line {line})" if line else ""
    raise ConfigError(f"{key}{where}: {msg}")


def _check_seed(v, key, line):
    if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v < 2**64:
        _fail(key, line, "must be an unsigned 64-bit integer")


def _is_off(v):
    # a bare YAML `off` loads as False
    return v is None or v is False or v == "off"


def _coerce(key, value, line):
    """Type-check one scenario key; returns the value Scenario expects."""
    def need(ok, msg):
        if not ok:
            _fail(key, line, msg)

    is_int = lambda v: isinstance(v, int) and not isinstance(v, bool)
    is_num = lambda v: (isinstance(v, (int, float)) and not isinstance(v, bool)) and math.isfinite(v)
    if key == "M":
        need(value in SUPPORTED_ORDERS and is_int(value), f"must be one of {{{', '.join(map(str, SUPPORTED_ORDERS))}}}")
    elif key == "L":
        need(is_int(value) and value >= 1, "must be an integer >= 1")
    elif key == "rounds":
        need(is_int(value) and value >= 1, "must be an integer >= 1")
    elif key == "min_errors":
        need(value is None or (is_int(value) and value >= 1), "must be a positive integer or null")
    elif key == "master_seed":
        _check_seed(value, key, line)
    elif key == "cee_db":
        if _is_off(value):
            return None
        need(is_num(value), "must be a number (dBm) or 'off'")
        return float(value)
    elif key == "noise_figure_db":
        need(is_num(value), "must be a finite number")
        return float(value)
    elif key in ("p_max_dbm", "p_relay_dbm"):
        need(is_num(value), "must be a finite number")
        return float(value)
    elif key == "bandwidth_hz":
        need(is_num(value) and value > 0, "must be a positive number")
        return float(value)
    elif key in ("power_control", "silence_b"):
        need(isinstance(value, bool), "must be true or false")
    else:
        choices = {"cee_mode": CEE_MODES, "phase_mode": PHASE_MODES, "metric": METRICS,
                   "framing": FRAMINGS, "labeling": LABELINGS}[key]
        need(value in choices, f"must be one of {choices}")
    return value


def _geometry(raw, lines, path):
    if not isinstance(raw, dict):
        _fail("geometry", lines.get(path), "must be a mapping")
    kw = {}
    for k, v in raw.items():
        line = lines.get(path + (k,))
        if k not in GEOMETRY_KEYS:
            _fail(f"geometry.{k}", line, f"unknown key; valid keys are {GEOMETRY_KEYS}")
        if k == "carrier_hz":
            if not isinstance(v, (int, float)) or isinstance(v, bool) or v <= 0:
                _fail(f"geometry.{k}", line, "must be a positive number")
            kw[k] = float(v)
        else:
            if not (isinstance(v, list) and len(v) == 3 and all(isinstance(c, (int, float)) for c in v)):
                _fail(f"geometry.{k}", line, "must be an [x, y, z] list in metres")
            kw[k] = tuple(float(c) for c in v)
    try:
        return NodeGeometry(**kw)
    except ValueError as e:
        _fail("geometry", lines.get(path), str(e))


def _scenario_kwargs(raw, lines, path, allowed):
    kw = {}
    for k, v in raw.items():
        line = lines.get(path + (k,))
        if k not in allowed:
            _fail(k, line, "unknown key")
        if k in SCENARIO_KEYS:
            kw[k] = _coerce(k, v, line)
    return kw


def _values(raw, axis, key, line):
    if not isinstance(raw, list) or not raw:
        _fail(key, line, "must be a non-empty list")
    out = []
    for v in raw:
        if axis == "cee_db" and _is_off(v):
            out.append(None)
        elif axis == "L":
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                _fail(key, line, "L values must be integers >= 1")
            out.append(v)
        else:
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                _fail(key, line, "values must be finite numbers")
            out.append(float(v))
    return tuple(out)


def parse_config(text: str) -> RunConfig:
    """Validate a YAML run configuration, filling defaults for omitted keys."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ConfigError(f"malformed document{f' (line {mark.line + 1})' if mark else ''}: {e}") from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("malformed document (line 1): top level must be a mapping")
    lines = _key_lines(text)

    allowed = set(RUN_KEYS) | set(SCENARIO_KEYS) | {"geometry"}
    base = _scenario_kwargs({k: v for k, v in raw.items() if k not in RUN_KEYS and k != "geometry"},
                            lines, (), allowed)
    if "geometry" in raw:
        base["geometry"] = _geometry(raw["geometry"], lines, ("geometry",))

    axis = raw.get("sweep_axis", "p_max_dbm")
    if axis not in SWEEP_AXES:
        _fail("sweep_axis", lines.get(("sweep_axis",)), f"must be one of {SWEEP_AXES}")
    default_values = {"p_max_dbm": [20.0], "cee_db": ["off"], "L": [1]}[axis]
    values = _values(raw.get("sweep_values", default_values), axis, "sweep_values", lines.get(("sweep_values",)))

    name = raw.get("name", "run")
    if not isinstance(name, str) or not name or any(c in name for c in "/\\"):
        _fail("name", lines.get(("name",)), "must be a plain file-name stem")
    fmt = raw.get("format", "csv")
    if fmt not in FORMATS:
        _fail("format", lines.get(("format",)), f"must be one of {FORMATS}")
    workers = raw.get("workers", 1)
    if not isinstance(workers, int) or isinstance(workers, bool) or workers < 1:
        _fail("workers", lines.get(("workers",)), "must be a positive integer")
    out_dir = raw.get("output_dir", "results")
    if not isinstance(out_dir, str):
        _fail("output_dir", lines.get(("output_dir",)), "must be a path string")

    def build(kw, key, line):
        try:
            return Scenario(**kw)
        except ValueError as e:
            _fail(key, line, str(e))

    series_raw = raw.get("series")
    series = []
    if series_raw is None:
        series.append(Series(name, build(base, "config", 1), values))
    else:
        if not isinstance(series_raw, list) or not series_raw:
            _fail("series", lines.get(("series",)), "must be a non-empty list of mappings")
        for i, entry in enumerate(series_raw):
            path = ("series", i)
            if not isinstance(entry, dict):
                _fail(f"series[{i}]", lines.get(path), "must be a mapping")
            kw = dict(base)
            kw.update(_scenario_kwargs(entry, lines, path, set(SERIES_KEYS)))
            label = entry.get("label", f"s{i}")
            if not isinstance(label, str) or any(c in label for c in "/\\"):
                _fail(f"series[{i}].label", lines.get(path + ("label",)), "must be a plain string")
            vals = values
            if "sweep_values" in entry:
                vals = _values(entry["sweep_values"], axis, f"series[{i}].sweep_values",
                               lines.get(path + ("sweep_values",)))
            series.append(Series(label, build(kw, f"series[{i}]", lines.get(path)), vals))
    return RunConfig(name=name, axis=axis, series=tuple(series), output_dir=Path(out_dir),
                     format=fmt, workers=workers, source=raw)


def load_recipe(name: str) -> str:
    if name not in RECIPES:
        raise ConfigError(f"recipe: unknown recipe {name!r}; choose from {RECIPES}")
    return resources.files("ris_pnc").joinpath("recipes", f"{name}.yaml").read_text(encoding="utf-8")


def _fmt_cee(v):
    return "off" if v is None else repr(float(v))


def csv_text(cfg: RunConfig, series: Series, points: list) -> str:
    """CSV body for one series, headed by '#' lines holding the resolved config."""
    buf = io.StringIO()
    buf.write(f"# ris_pnc sweep: {cfg.name} / {series.label}\n")
    buf.write(f"# master_seed: {series.scenario.master_seed}\n")
    buf.write("# config: " + json.dumps(cfg.resolved(), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    sc = series.scenario
    for value, pt in zip(series.values, points):
        point_sc = sc if cfg.axis != "L" else replace(sc, L=value)
        cee = value if cfg.axis == "cee_db" else sc.cee_db
        p_max = value if cfg.axis == "p_max_dbm" else sc.p_max_dbm
        w.writerow([
            cfg.axis,
            _fmt_cee(value) if cfg.axis == "cee_db" else repr(value),
            point_sc.L, sc.M, sc.phase_mode, _fmt_cee(cee), repr(float(p_max)),
            pt.bits, pt.errors, repr(pt.ber), pt.dropped_rounds,
        ])
    return buf.getvalue()


def read_csv(path) -> tuple:
    """Parse a result CSV back into ``(header_lines, rows)``."""
    text = Path(path).read_text(encoding="utf-8")
    header = [ln for ln in text.splitlines() if ln.startswith("#")]
    rows = list(csv.DictReader(ln for ln in text.splitlines() if not ln.startswith("#")))
    return header, rows


def render_plot(csv_paths, out_path, title=""):
    """Semilog BER curves drawn purely from CSV content."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4.5))
    xlabel = None
    for path in csv_paths:
        _, rows = read_csv(path)
        xs, ys = [], []
        for r in rows:
            if r["sweep_value"] == "off":
                continue
            ber = float(r["ber"])
            if ber > 0:
                xs.append(float(r["sweep_value"]))
                ys.append(ber)
        xlabel = rows[0]["sweep_axis"] if rows else xlabel
        ax.semilogy(xs, ys, marker="o", ms=3, label=Path(path).stem.split("__")[-1])
    ax.set_xlabel({"p_max_dbm": "P_max (dBm)", "cee_db": "CEE variance (dBm)", "L": "RIS elements L"}.get(xlabel, xlabel))
    ax.set_ylabel("BER")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)


def _summary(cfg: RunConfig, results) -> str:
    lines = [f"{'series':<14}{'point':>10}{'bits':>12}{'errors':>9}{'BER':>13}{'dropped':>9}"]
    for series, points in results:
        for v, p in zip(series.values, points):
            shown = "off" if v is None else f"{v:g}"
            lines.append(f"{series.label:<14}{shown:>10}{p.bits:>12}{p.errors:>9}{p.ber:>13.4e}{p.dropped_rounds:>9}")
    return "\n".join(lines)


def run(cfg: RunConfig, stdout=sys.stdout) -> int:
    """Execute every series, write outputs, print a summary. Returns an exit status."""
    try:
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        probe = cfg.output_dir / f".{cfg.name}.write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as e:
        print(f"error: cannot write to output directory {cfg.output_dir}: {e}", file=sys.stderr)
        return 2

    results = []
    for s in cfg.series:
        points: list[BerPoint] = sweep(s.scenario, cfg.axis, s.values, workers=cfg.workers)
        results.append((s, points))

    paths = []
    for s, points in results:
        path = cfg.output_dir / f"{cfg.name}__{s.label}.csv"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text(cfg, s, points))
        paths.append(path)
    if cfg.format in ("plot", "both"):
        render_plot(paths, cfg.output_dir / f"{cfg.name}.png", title=cfg.name)
    if cfg.format == "plot":
        for p in paths:
            p.unlink()
    print(_summary(cfg, results), file=stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ris-pnc", description="BER sweeps for RIS-assisted OFDM-PNC.")
    p.add_argument("config", nargs="?", help="YAML run configuration")
    p.add_argument("--recipe", choices=RECIPES, help="run a bundled figure recipe instead of a config file")
    p.add_argument("--seed", type=int, help="master seed (overrides config and $%s)" % SEED_ENV)
    p.add_argument("--workers", type=int, help="worker processes for sweep points")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", choices=FORMATS, help="csv, plot or both")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if (args.config is None) == (args.recipe is None):
        print("error: give exactly one of a config path or --recipe", file=sys.stderr)
        return 2
    try:
        if args.recipe:
            text = load_recipe(args.recipe)
        else:
            text = Path(args.config).read_text(encoding="utf-8")
        cfg = parse_config(text)
        env_seed = os.environ.get(SEED_ENV)
        if env_seed is not None:
            try:
                seed = int(env_seed)
            except ValueError:
                raise ConfigError(f"{SEED_ENV}: not an integer: {env_seed!r}") from None
            cfg = cfg.with_overrides(seed=seed)
        if args.workers is not None and args.workers < 1:
            raise ConfigError("--workers: must be a positive integer")
        cfg = cfg.with_overrides(seed=args.seed, workers=args.workers, output_dir=args.out, fmt=args.format)
    except (ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
