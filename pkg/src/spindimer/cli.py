"""Command-line front end.

    spindimer point     --units dimensionless --j 1 --delta 1 --d-over-j 0.5 --b 0.2 --t 0.3
    spindimer sweep     --axis B:0:3:61 --t 0.1 --out sweep.csv
    spindimer figure    fig4 --out fig4.csv
    spindimer threshold --config cuni.ini --b 0.01 --moving T --measure negativity --lo 1 --hi 300
    spindimer selftest

Settings come from flags, then the config file (``--config`` or $SPINDIMER_CONFIG),
then built-in defaults. Exit codes: 0 ok, 1 validation error, 2 numerical guard
failure, 64 usage error.
"""
import argparse
import configparser
import json
import logging
import math
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, NumericalGuard, ValidationError
from .measures import MEASURES, evaluate
from .model import DimerParams
from .selftest import run_all
from .sweep import (
    PRESETS,
    Axis,
    SweepSpec,
    ThresholdQuery,
    find_threshold,
    figure_preset,
    format_value,
    rows_to_json,
    run_sweep,
    write_csv,
)
from .thermal import gibbs_state_analytic

log = logging.getLogger("spindimer")

COMMANDS = ("point", "sweep", "figure", "threshold", "selftest")
EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2, 64
CONFIG_ENV = "SPINDIMER_CONFIG"

SECTIONS = {
    "model": {"units", "j", "d_over_j", "j_over_kb_kelvin", "d_over_kb_kelvin", "delta", "g1", "g2", "b"},
    "sweep": {"t", "axis1", "axis2", "measures", "temperatures", "moving", "measure", "lo", "hi", "tol"},
    "run": {"command", "preset", "out", "parallel", "grid", "json", "draws"},
}

# flag dest -> (section, key)
FLAG_KEYS = {
    "units": ("model", "units"),
    "j": ("model", "j"),
    "j_over_kb_kelvin": ("model", "j_over_kb_kelvin"),
    "delta": ("model", "delta"),
    "d_over_j": ("model", "d_over_j"),
    "d_over_kb_kelvin": ("model", "d_over_kb_kelvin"),
    "g1": ("model", "g1"),
    "g2": ("model", "g2"),
    "b": ("model", "b"),
    "t": ("sweep", "t"),
    "measures": ("sweep", "measures"),
    "temperatures": ("sweep", "temperatures"),
    "moving": ("sweep", "moving"),
    "measure": ("sweep", "measure"),
    "lo": ("sweep", "lo"),
    "hi": ("sweep", "hi"),
    "tol": ("sweep", "tol"),
    "out": ("run", "out"),
    "parallel": ("run", "parallel"),
    "grid": ("run", "grid"),
    "draws": ("run", "draws"),
}


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    model: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    run: dict = field(default_factory=dict)
    source: str = None
    lines: dict = field(default_factory=dict)

    def where(self, section, key):
        line = self.lines.get((section, key))
        if self.source and line:
            return f"{self.source}, line {line}"
        return "command line" if self.source is None or (section, key) not in self.lines else self.source

    @property
    def command(self):
        return self.run.get("command")

    def number(self, section, key, default=None, positive=False, nonnegative=False):
        raw = getattr(self, section).get(key)
        if raw is None:
            return default
        try:
            value = float(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"[{section}] {key} = {raw!r} is not a number ({self.where(section, key)})") from None
        if not math.isfinite(value):
            raise ConfigError(f"[{section}] {key} must be finite ({self.where(section, key)})")
        if positive and not value > 0:
            raise ConfigError(f"[{section}] {key} must be > 0 ({self.where(section, key)})")
        if nonnegative and value < 0:
            raise ConfigError(f"[{section}] {key} must be >= 0 ({self.where(section, key)})")
        return value

    def params(self):
        model = dict(self.model)
        self.number("model", "b", nonnegative=True)
        for key in ("j", "j_over_kb_kelvin", "g1", "g2", "delta", "d_over_j", "d_over_kb_kelvin"):
            self.number("model", key)
        try:
            return DimerParams.from_config(model)
        except ValidationError as exc:
            raise ConfigError(f"[model] {exc}") from None

    def temperature(self, required=True):
        T = self.number("sweep", "t", positive=True)
        if T is None and required:
            raise ConfigError("a temperature is required (--t or [sweep] t)")
        return T

    def measures(self):
        raw = self.sweep.get("measures")
        if not raw:
            return MEASURES
        names = tuple(m.strip() for m in raw.split(",") if m.strip())
        bad = set(names) - set(MEASURES)
        if bad:
            raise ConfigError(f"[sweep] measures: unknown {sorted(bad)} ({self.where('sweep', 'measures')})")
        return names

    def axes(self):
        out = []
        for key in ("axis1", "axis2"):
            if self.sweep.get(key):
                out.append(Axis.parse(self.sweep[key]))
        return tuple(out)

    def temperatures(self):
        raw = self.sweep.get("temperatures")
        if not raw:
            return None
        try:
            temps = tuple(float(v) for v in raw.split(","))
        except ValueError:
            raise ConfigError(f"[sweep] temperatures must be comma-separated numbers ({self.where('sweep', 'temperatures')})") from None
        if any(not t > 0 for t in temps):
            raise ConfigError("[sweep] temperatures must be > 0")
        return temps

    def parallel(self):
        value = self.number("run", "parallel", default=1)
        if value < 1 or value != int(value):
            raise ConfigError("[run] parallel must be a positive integer")
        return int(value)

    def grid(self):
        raw = self.run.get("grid")
        if not raw:
            return None
        m = re.fullmatch(r"\s*(\d+)\s*[x,]\s*(\d+)\s*", raw)
        if not m or int(m.group(1)) < 2 or int(m.group(2)) < 2:
            raise ConfigError(f"[run] grid must look like 360x180, got {raw!r}")
        return int(m.group(1)), int(m.group(2))

    def flag(self, section, key):
        raw = getattr(self, section).get(key)
        if raw is None:
            return False
        if isinstance(raw, bool):
            return raw
        if raw.strip().lower() in ("1", "true", "yes", "on"):
            return True
        if raw.strip().lower() in ("0", "false", "no", "off", ""):
            return False
        raise ConfigError(f"[{section}] {key} must be a boolean ({self.where(section, key)})")

    def check(self):
        if self.command is not None and self.command not in COMMANDS:
            raise ConfigError(f"[run] command must be one of {COMMANDS}, got {self.command!r}")
        physical = {"j_over_kb_kelvin", "d_over_kb_kelvin"} & self.model.keys()
        dimless = {"j", "d_over_j"} & self.model.keys()
        if physical and dimless:
            raise ConfigError(
                f"[model] mixes physical keys {sorted(physical)} with dimensionless keys {sorted(dimless)}")
        return self


def _line_index(text):
    lines = {}
    section = None
    for n, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s[0] in "#;":
            continue
        m = re.fullmatch(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip().lower()
            lines.setdefault((section, None), n)
            continue
        m = re.match(r"([^=:\s]+)\s*[=:]", s)
        if m and section:
            lines[(section, m.group(1).lower())] = n
    return lines


def parse_config(path, overrides=None):
    """Read an INI config and layer ``overrides`` ({section: {key: value}}) on top."""
    cfg = CliConfig()
    if path:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        parser = configparser.ConfigParser(interpolation=None, strict=True)
        try:
            parser.read_string(text, source=str(path))
        except configparser.Error as exc:
            raise ConfigError(f"config parse error: {exc}") from None
        cfg.source = str(path)
        cfg.lines = _line_index(text)
        for section in parser.sections():
            if section not in SECTIONS:
                line = cfg.lines.get((section.lower(), None))
                raise ConfigError(f"{path}, line {line}: unknown section [{section}]")
            for key, value in parser.items(section):
                if key not in SECTIONS[section]:
                    raise ConfigError(f"{path}, line {cfg.lines.get((section, key))}: unknown key {key!r} in [{section}]")
                getattr(cfg, section)[key] = value.strip()
    for section, values in (overrides or {}).items():
        for key, value in values.items():
            if value is not None:
                getattr(cfg, section)[key] = value
                cfg.lines.pop((section, key), None)
    return cfg.check()


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(prog="spindimer", description="Thermal MIN, F-MIN and negativity of the mixed spin-(1/2,1) dimer.")
    p.add_argument("command", nargs="?", choices=COMMANDS)
    p.add_argument("preset", nargs="?", help="figure preset (fig1..fig6 or all)")
    p.add_argument("--config", help=f"INI config file (default ${CONFIG_ENV})")
    p.add_argument("--units", choices=("dimensionless", "physical"))
    p.add_argument("--j")
    p.add_argument("--j-over-kb-kelvin", dest="j_over_kb_kelvin")
    p.add_argument("--delta")
    p.add_argument("--d-over-j", dest="d_over_j")
    p.add_argument("--d-over-kb-kelvin", dest="d_over_kb_kelvin")
    p.add_argument("--g1")
    p.add_argument("--g2")
    p.add_argument("--b", help="field: mu_B B / J (dimensionless) or Tesla (physical)")
    p.add_argument("--t", help="temperature: k_B T / J (dimensionless) or Kelvin (physical)")
    p.add_argument("--axis", action="append", help="NAME:MIN:MAX:POINTS or NAME=v1,v2 (up to two)")
    p.add_argument("--measures", help="comma list of hs_min,f_min,negativity")
    p.add_argument("--temperatures", help="override the temperature family of fig1/fig3/fig5")
    p.add_argument("--moving", choices=("B", "T"))
    p.add_argument("--measure", choices=MEASURES)
    p.add_argument("--lo")
    p.add_argument("--hi")
    p.add_argument("--tol")
    p.add_argument("--out")
    p.add_argument("--parallel")
    p.add_argument("--grid", help="oracle grid PHIxTHETA for selftest")
    p.add_argument("--draws", help="random draws for selftest")
    p.add_argument("--json", action="store_true", default=None, help="also emit JSON")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _overrides(ns):
    out = {"model": {}, "sweep": {}, "run": {}}
    for dest, (section, key) in FLAG_KEYS.items():
        value = getattr(ns, dest)
        if value is not None:
            out[section][key] = value
    if ns.axis:
        if len(ns.axis) > 2:
            raise UsageError("at most two --axis flags")
        for i, a in enumerate(ns.axis, start=1):
            out["sweep"][f"axis{i}"] = a
    if ns.command:
        out["run"]["command"] = ns.command
    if ns.preset:
        out["run"]["preset"] = ns.preset
    if ns.json:
        out["run"]["json"] = True
    return out


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_point(cfg):
    params = cfg.params()
    T = cfg.temperature()
    state = gibbs_state_analytic(params, T)
    report = evaluate(state.rho, cfg.measures())
    rows = run_sweep(SweepSpec(base=params, T=T, measures=cfg.measures()))
    doc = rows_to_json(rows, {
        "command": "point",
        "params": params.to_config(),
        "T": T,
        "log_Z": state.log_z,
        "report": report.to_json(),
    })
    _emit(json.dumps(doc, indent=2) + "\n", cfg.run.get("out"))
    return EXIT_OK


def _write_rows(rows, out, want_json, meta):
    if out:
        write_csv(rows, out)
        if want_json:
            Path(out).with_suffix(".json").write_text(json.dumps(rows_to_json(rows, meta), indent=1) + "\n")
    elif want_json:
        sys.stdout.write(json.dumps(rows_to_json(rows, meta), indent=1) + "\n")
    else:
        write_csv(rows, sys.stdout)


def cmd_sweep(cfg):
    axes = cfg.axes()
    if not axes:
        raise ConfigError("sweep needs at least one axis (--axis or [sweep] axis1)")
    spec = SweepSpec(
        base=cfg.params(),
        T=cfg.temperature(required="T" not in [a.name for a in axes]),
        axes=axes,
        measures=cfg.measures(),
        output=cfg.run.get("out"),
    )
    rows = run_sweep(spec, parallel=cfg.parallel())
    meta = {"axes": [a.describe() for a in axes], "params": spec.base.to_config(), "T": spec.T}
    _write_rows(rows, spec.output, cfg.flag("run", "json"), meta)
    return EXIT_OK


def _preset_paths(name, specs, out):
    out = Path(out) if out else Path(f"{name}.csv")
    if len(specs) == 1:
        return [out]
    return [out.with_name(f"{out.stem}_{s.label}{out.suffix or '.csv'}") for s in specs]


def cmd_figure(cfg):
    name = cfg.run.get("preset")
    if not name:
        raise ConfigError("figure needs a preset name (fig1..fig6 or all)")
    temps = cfg.temperatures()
    if name == "all":
        outdir = Path(cfg.run.get("out") or ".")
        outdir.mkdir(parents=True, exist_ok=True)
        jobs = [(n, outdir / f"{n}.csv") for n in sorted(PRESETS)]
    else:
        jobs = [(name, cfg.run.get("out"))]
    for preset, out in jobs:
        specs = figure_preset(preset, temps)
        for spec, path in zip(specs, _preset_paths(preset, specs, out)):
            rows = run_sweep(spec, parallel=cfg.parallel())
            meta = {"preset": preset, "label": spec.label, "axes": [a.describe() for a in spec.axes],
                    "params": spec.base.to_config()}
            _write_rows(rows, str(path), cfg.flag("run", "json"), meta)
            bad = sum(r.status != "ok" for r in rows)
            print(f"{path}\t{len(rows)} rows\t{bad} flagged")
    return EXIT_OK


def cmd_threshold(cfg):
    moving = cfg.sweep.get("moving")
    measure = cfg.sweep.get("measure")
    if moving is None or measure is None:
        raise ConfigError("threshold needs --moving and --measure")
    lo = cfg.number("sweep", "lo")
    hi = cfg.number("sweep", "hi")
    if lo is None or hi is None:
        raise ConfigError("threshold needs a bracket (--lo, --hi)")
    q = ThresholdQuery(
        base=cfg.params(),
        moving=moving,
        measure=measure,
        bracket=(lo, hi),
        T=cfg.temperature(required=moving == "B"),
        tol=cfg.number("sweep", "tol", default=1e-3, positive=True),
    )
    print(format_value(find_threshold(q)))
    return EXIT_OK


def cmd_selftest(cfg):
    draws = int(cfg.number("run", "draws", default=1000, positive=True))
    grid = cfg.grid() or (360, 180)
    results = run_all(draws=draws, grid=grid)
    for r in results:
        print(r.line())
    ok = all(r.ok for r in results)
    print("selftest " + ("passed" if ok else "FAILED"))
    return EXIT_OK if ok else EXIT_NUMERIC


HANDLERS = {
    "point": cmd_point,
    "sweep": cmd_sweep,
    "figure": cmd_figure,
    "threshold": cmd_threshold,
    "selftest": cmd_selftest,
}


def run_cli(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        ns = build_parser().parse_args(argv)
        overrides = _overrides(ns)
    except UsageError as exc:
        print(f"spindimer: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = parse_config(ns.config or os.environ.get(CONFIG_ENV), overrides)
        if cfg.command is None:
            print("spindimer: usage error: no command given", file=sys.stderr)
            return EXIT_USAGE
        return HANDLERS[cfg.command](cfg)
    except NumericalGuard as exc:
        print(f"spindimer: numerical guard: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValidationError as exc:
        print(f"spindimer: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
