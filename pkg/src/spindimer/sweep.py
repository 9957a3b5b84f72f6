"""Parameter sweeps, threshold bisection and the figure presets."""
import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import BracketInvalid, SpinDimerError, UnknownPreset, ValidationError
from .measures import MEASURES, evaluate
from .model import DimerParams
from .thermal import gibbs_state_analytic

AXIS_NAMES = ("B", "T", "D_over_J", "g1", "g2", "Delta")
CSV_COLUMNS = ("axis1", "axis2", "Z", "purity", "x_norm", "hs_min", "f_min", "negativity", "status")
THRESHOLD_CUTOFF = 1e-6

# Default temperature and field families for the presets; overridable.
DEFAULT_DIMENSIONLESS_TEMPERATURES = (0.1, 0.5, 1.0, 2.0)
DEFAULT_CUNI_TEMPERATURES = (1.0, 50.0, 100.0, 200.0, 300.0)
DEFAULT_CUNI_FIELDS = (1.0, 50.0, 100.0, 150.0)


@dataclass(frozen=True)
class Axis:
    """A swept variable: ``points`` evenly spaced values on [lo, hi], or explicit ``values``."""

    name: str
    lo: float = None
    hi: float = None
    points: int = None
    values: tuple = None

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValidationError(f"unknown axis {self.name!r}; choose from {AXIS_NAMES}")
        if self.values is not None:
            vals = tuple(float(v) for v in self.values)
            object.__setattr__(self, "values", vals)
            object.__setattr__(self, "lo", vals[0] if vals else None)
            object.__setattr__(self, "hi", vals[-1] if vals else None)
            object.__setattr__(self, "points", len(vals))
            if len(vals) >= 2 and any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValidationError(f"axis {self.name} values must be strictly increasing")
        if self.points is None or self.points < 2:
            raise ValidationError(f"axis {self.name} needs at least 2 points")
        if not self.lo < self.hi:
            raise ValidationError(f"axis {self.name} needs min < max")

    @classmethod
    def parse(cls, text):
        """``NAME:MIN:MAX:POINTS`` or ``NAME=v1,v2,...``."""
        text = text.strip()
        try:
            if "=" in text:
                name, vals = text.split("=", 1)
                return cls(name.strip(), values=tuple(float(v) for v in vals.split(",")))
            name, lo, hi, pts = text.split(":")
            return cls(name.strip(), float(lo), float(hi), int(pts))
        except ValueError as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"bad axis spec {text!r}: expected NAME:MIN:MAX:POINTS or NAME=v1,v2,...") from None

    def grid(self):
        if self.values is not None:
            return np.array(self.values)
        return np.linspace(self.lo, self.hi, self.points)

    def describe(self):
        if self.values is not None:
            return f"{self.name}=" + ",".join(repr(v) for v in self.values)
        return f"{self.name}:{self.lo!r}:{self.hi!r}:{self.points}"


@dataclass(frozen=True)
class SweepSpec:
    base: DimerParams
    T: float = None
    axes: tuple = ()
    measures: tuple = MEASURES
    output: str = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        object.__setattr__(self, "measures", tuple(self.measures))
        self.validate()

    def validate(self):
        if len(self.axes) > 2:
            raise ValidationError("at most two sweep axes")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ValidationError("sweep axes must be distinct")
        bad = set(self.measures) - set(MEASURES)
        if bad:
            raise ValidationError(f"unknown measures {sorted(bad)}")
        if "T" not in names and self.T is None:
            raise ValidationError("a fixed temperature is required when T is not swept")

    def points(self):
        """Grid points in row-major order as (axis values, param changes, T)."""
        grids = [a.grid() for a in self.axes]
        if not grids:
            yield (), {}, self.T
            return
        if len(grids) == 1:
            combos = [(v,) for v in grids[0]]
        else:
            combos = [(u, v) for u in grids[0] for v in grids[1]]
        for vals in combos:
            params, T = self.base, self.T
            changes = {}
            for axis, v in zip(self.axes, vals):
                if axis.name == "T":
                    T = float(v)
                elif axis.name == "D_over_J":
                    changes["D"] = float(v) * params.J
                elif axis.name == "Delta":
                    changes["delta"] = float(v)
                else:
                    changes[axis.name] = float(v)
            yield vals, changes, T

    def size(self):
        return math.prod(a.points for a in self.axes)


@dataclass
class SweepRow:
    axis1: float = None
    axis2: float = None
    Z: float = None
    purity: float = None
    x_norm: float = None
    hs_min: float = None
    f_min: float = None
    negativity: float = None
    status: str = "ok"

    def as_dict(self):
        return {c: getattr(self, c) for c in CSV_COLUMNS}


def evaluate_point(base, changes, T, measures=MEASURES):
    """Evaluate one parameter point; failures become a status string, never an exception."""
    row = SweepRow()
    try:
        params = replace(base, **changes) if changes else base
        state = gibbs_state_analytic(params, T)
        rep = evaluate(state.rho, measures)
    except SpinDimerError as exc:
        row.status = type(exc).__name__
        return row
    row.Z = state.Z
    row.purity = rep.purity
    row.x_norm = rep.marginal_bloch_norm
    row.hs_min, row.f_min, row.negativity = rep.hs_min, rep.f_min, rep.negativity
    return row


def _evaluate_task(task):
    return evaluate_point(*task)


def run_sweep(spec, parallel=1):
    """All grid points of ``spec`` as SweepRows, in row-major axis order."""
    tasks = []
    coords = []
    for vals, changes, T in spec.points():
        coords.append(vals)
        tasks.append((spec.base, changes, T, spec.measures))
    if parallel and parallel > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            rows = list(pool.map(_evaluate_task, tasks, chunksize=max(1, len(tasks) // (8 * parallel))))
    else:
        rows = [_evaluate_task(t) for t in tasks]
    for vals, row in zip(coords, rows):
        if len(vals) > 0:
            row.axis1 = float(vals[0])
        if len(vals) > 1:
            row.axis2 = float(vals[1])
    return rows


def format_value(v):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return format(float(v), ".12g")


def write_csv(rows, target):
    """Write rows with the fixed header; ``target`` is a path or a text stream."""
    if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
        with open(target, "w", newline="") as fh:
            return write_csv(rows, fh)
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        d = row.as_dict() if isinstance(row, SweepRow) else row
        writer.writerow([format_value(d.get(c)) for c in CSV_COLUMNS])


def csv_text(rows):
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def _json_float(v):
    if v is None or isinstance(v, str):
        return v
    v = float(v)
    return v if math.isfinite(v) else repr(v)


def rows_to_json(rows, meta=None):
    doc = dict(meta or {})
    doc["columns"] = list(CSV_COLUMNS)
    doc["rows"] = [{k: _json_float(v) for k, v in r.as_dict().items()} for r in rows]
    return doc


def read_sweep_json(text):
    """Parse sweep (or point) JSON back into SweepRows."""
    doc = json.loads(text)
    rows = []
    for rec in doc["rows"]:
        unknown = set(rec) - set(CSV_COLUMNS)
        if unknown:
            raise ValidationError(f"unknown row fields {sorted(unknown)}")
        kwargs = {}
        for k, v in rec.items():
            if k != "status" and isinstance(v, str):
                v = float(v)
            kwargs[k] = v
        rows.append(SweepRow(**kwargs))
    return rows


def read_csv(source):
    """Read a sweep CSV (path or stream) back as SweepRows."""
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, newline="") as fh:
            return read_csv(fh)
    reader = csv.reader(source)
    header = next(reader)
    if tuple(header) != CSV_COLUMNS:
        raise ValidationError(f"unexpected CSV header {header}")
    rows = []
    for rec in reader:
        vals = dict(zip(header, rec))
        rows.append(SweepRow(**{
            k: (v if k == "status" else (float(v) if v != "" else None)) for k, v in vals.items()
        }))
    return rows


@dataclass(frozen=True)
class ThresholdQuery:
    base: DimerParams
    moving: str
    measure: str
    bracket: tuple
    T: float = None
    tol: float = 1e-3
    cutoff: float = THRESHOLD_CUTOFF

    def __post_init__(self):
        if self.moving not in ("B", "T"):
            raise ValidationError("threshold search moves B or T")
        if self.measure not in MEASURES:
            raise ValidationError(f"unknown measure {self.measure!r}")
        if self.moving == "B" and self.T is None:
            raise ValidationError("moving B needs a fixed temperature")
        lo, hi = self.bracket
        if not lo < hi:
            raise BracketInvalid("bracket needs lo < hi")
        if not self.tol > 0:
            raise ValidationError("tolerance must be positive")

    def measure_at(self, value):
        if self.moving == "T":
            params, T = self.base, value
        else:
            params, T = replace(self.base, B=value), self.T
        rep = evaluate(gibbs_state_analytic(params, T).rho, (self.measure,))
        return getattr(rep, self.measure)


def bisect_crossing(func, lo, hi, tol, cutoff=THRESHOLD_CUTOFF):
    """Bisection on the predicate ``func(v) > cutoff``; returns the midpoint of the final bracket."""
    above_lo = func(lo) > cutoff
    above_hi = func(hi) > cutoff
    if above_lo == above_hi:
        side = "above" if above_lo else "at or below"
        raise BracketInvalid(f"measure is {side} {cutoff:g} at both ends of [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if (func(mid) > cutoff) == above_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_threshold(q):
    lo, hi = q.bracket
    return bisect_crossing(q.measure_at, float(lo), float(hi), q.tol, q.cutoff)


# ---------------------------------------------------------------- presets

def _dimensionless(D_over_J, g1=2.0, g2=2.0):
    return DimerParams(J=1.0, delta=1.0, D=D_over_J, g1=g1, g2=g2, B=0.0)


def _field_family(name, base, temps, b_axis, label):
    return SweepSpec(base=base, axes=(Axis("T", values=temps), b_axis), label=label, output=name)


def _fig1(temps):
    b_axis = Axis("B", 0.0, 3.0, 121)
    return [_field_family("fig1", _dimensionless(d), temps, b_axis, f"d_over_j_{d:+g}") for d in (-0.5, 1.5)]


def _fig2(_):
    out = []
    for d in (-1.5, 0.0, 1.5):
        out.append(SweepSpec(
            base=_dimensionless(d),
            axes=(Axis("B", 0.0, 3.0, 41), Axis("T", 0.01, 2.0, 41)),
            measures=("hs_min", "f_min"),
            label=f"d_over_j_{d:+g}",
            output="fig2",
        ))
    return out


def _fig3(temps):
    b_axis = Axis("B", 0.0, 3.0, 121)
    readings = (("g1_2.2_g2_2.2", 2.2, 2.2), ("g1_2.0_g2_2.2", 2.0, 2.2), ("g1_2.2_g2_2.0", 2.2, 2.0))
    out = []
    for tag, g1, g2 in readings:
        for d in (-0.5, 1.5):
            out.append(_field_family("fig3", _dimensionless(d, g1, g2), temps, b_axis, f"{tag}_d_over_j_{d:+g}"))
    return out


def _fig4(_, fields=DEFAULT_CUNI_FIELDS):
    return [SweepSpec(
        base=DimerParams.cuni(),
        axes=(Axis("B", values=fields), Axis("T", 0.1, 300.0, 300)),
        label="cuni_t_sweeps",
        output="fig4",
    )]


def _fig5(temps):
    return [SweepSpec(
        base=DimerParams.cuni(),
        axes=(Axis("T", values=temps), Axis("B", 0.0, 300.0, 301)),
        label="cuni_b_sweeps",
        output="fig5",
    )]


def _fig6(_):
    return [SweepSpec(
        base=DimerParams.cuni(),
        axes=(Axis("B", 0.0, 300.0, 41), Axis("T", 1.0, 300.0, 41)),
        measures=("hs_min", "f_min"),
        label="cuni_density",
        output="fig6",
    )]


PRESETS = {
    "fig1": (_fig1, DEFAULT_DIMENSIONLESS_TEMPERATURES),
    "fig2": (_fig2, None),
    "fig3": (_fig3, DEFAULT_DIMENSIONLESS_TEMPERATURES),
    "fig4": (_fig4, None),
    "fig5": (_fig5, DEFAULT_CUNI_TEMPERATURES),
    "fig6": (_fig6, None),
}


def figure_preset(name, temperatures=None):
    """SweepSpecs regenerating one figure's data.

    ``temperatures`` overrides the temperature family of fig1, fig3 and fig5. In
    dimensionless presets J = 1, so T is k_B T / J and B is mu_B B / J.
    fig3 contains both g-factor readings: equal g = 2.2, and |g1 - g2| = 0.2 either way.
    """
    try:
        builder, default_temps = PRESETS[name]
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    temps = tuple(temperatures) if temperatures else default_temps
    return builder(temps)
