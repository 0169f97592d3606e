"""Command-line sweeps over distance or frequency, written as CSV.

Scenario files are flat ``key = value`` text (``#`` starts a comment); keys
are the long option names with ``-`` or ``_``.  Options given on the command
line override the file.  Example::

    mode = ion_heating
    material = copper
    temperature = 300
    frequency = 1e6
    distance_range = 1e-7 1e-3
    points_per_decade = 25

Exit status: 0 on success, 2 if some sweep points failed numerically,
1 on validation or I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .angular import ATOMS, SpinSystem
from .constants import AMU, E_CHARGE, G_S
from .nearfield import SurfaceGeometry, electric_nearfield_spectrum, magnetic_nearfield_spectrum
from .physical import MATERIALS, Material, ThermalEnvironment
from .quadrature import QuadratureError
from .rates import TrapConfig, hyperfine_loss_rate, ion_heating_rate, spin_heating_rate, zeeman_loss_rate

MODES = ("ion_heating", "spin_heating", "zeeman_loss", "hyperfine_loss", "spectrum")
METHODS = ("auto", "exact", "asymptotic")
DEFAULT_FREQUENCY = {"ion_heating": 1e6, "spin_heating": 1e5}


class ScenarioError(ValueError):
    def __init__(self, problems):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


@dataclass
class Scenario:
    mode: str
    material: str | None = "copper"
    resistivity: float | None = None
    eps_real: float | None = None
    temperature: float = 300.0
    sweep: str = "distance"
    distance_range: tuple | None = None
    distance: float | None = None
    frequency_range: tuple | None = None
    frequency: list = field(default_factory=list)  # Hz
    points_per_decade: int = 25
    method: str = "auto"
    mass_amu: float = 40.0
    charge: float = 1.0  # units of e
    axis: tuple = (0.0, 0.0, 1.0)
    theta: float = math.pi / 2
    spin: float = 0.5
    nuclear_spin: float = 0.0
    g_s: float = G_S
    atom: list = field(default_factory=list)
    f_initial: float | None = None
    f_final: float | None = None
    field_kind: str = "electric"
    normalization: str = "closed_form"
    include_blackbody: bool = False

    def validate(self):
        problems = []
        if self.mode not in MODES:
            problems.append(f"mode: must be one of {MODES}, got {self.mode!r}")
        if self.method not in METHODS:
            problems.append(f"method: must be one of {METHODS}, got {self.method!r}")
        if self.resistivity is None and self.material not in MATERIALS:
            problems.append(f"material: unknown preset {self.material!r} and no resistivity given")
        if self.resistivity is not None and not self.resistivity > 0:
            problems.append("resistivity: must be > 0")
        if self.eps_real is not None and not self.eps_real >= 1:
            problems.append("eps_real: must be >= 1")
        if not self.temperature >= 0:
            problems.append("temperature: must be >= 0")
        if self.points_per_decade < 1:
            problems.append("points_per_decade: must be >= 1")
        if self.sweep == "distance":
            problems += _check_range("distance_range", self.distance_range)
        elif self.sweep == "frequency":
            problems += _check_range("frequency_range", self.frequency_range)
            if self.distance is None or not self.distance > 0:
                problems.append("distance: a positive distance is required for a frequency sweep")
        else:
            problems.append(f"sweep: must be 'distance' or 'frequency', got {self.sweep!r}")
        if any(not f > 0 for f in self.frequency):
            problems.append("frequency: values must be > 0")
        needs_freq = self.mode in ("zeeman_loss", "spectrum") and self.sweep == "distance"
        if needs_freq and not self.frequency:
            problems.append(f"frequency: required for mode {self.mode}")
        if self.mode in ("ion_heating", "spin_heating"):
            if not self.mass_amu > 0:
                problems.append("mass_amu: must be > 0")
            if len(self.frequency) > 1:
                problems.append("frequency: a single trap frequency is expected")
        if len(self.axis) != 3 or not any(self.axis):
            problems.append("axis: must be a nonzero 3-vector")
        else:
            norm = math.sqrt(sum(a * a for a in self.axis))
            self.axis = tuple(a / norm for a in self.axis)
        if self.mode == "ion_heating" and not self.charge:
            problems.append("charge: must be nonzero for ion heating")
        if self.mode == "spin_heating" and tuple(self.axis) != (0.0, 0.0, 1.0):
            problems.append("axis: spin heating is only defined for axis 0,0,1")
        if self.mode == "zeeman_loss" and not 0 <= self.theta <= math.pi:
            problems.append("theta: must lie in [0, pi]")
        if self.mode == "hyperfine_loss":
            unknown = [a for a in self.atom if a not in ATOMS]
            if unknown:
                problems.append(f"atom: unknown preset(s) {unknown}")
            if not self.atom:
                for name in ("f_initial", "f_final"):
                    if getattr(self, name) is None:
                        problems.append(f"{name}: required for hyperfine_loss without --atom")
                if self.sweep == "distance" and not self.frequency:
                    problems.append("frequency: hyperfine splitting required without --atom")
        if self.mode == "spectrum" and self.field_kind not in ("electric", "magnetic"):
            problems.append("field_kind: must be 'electric' or 'magnetic'")
        if self.normalization not in ("closed_form", "golden_rule"):
            problems.append("normalization: must be 'closed_form' or 'golden_rule'")
        if problems:
            raise ScenarioError(problems)
        return self

    def material_model(self) -> Material:
        base = MATERIALS.get(self.material)
        if self.resistivity is None:
            if self.eps_real is None:
                return base
            return Material(base.name, base.resistivity, self.eps_real)
        eps = self.eps_real if self.eps_real is not None else (base.static_eps_real if base else 1.0)
        return Material(self.material or "custom", self.resistivity, eps)

    def sweep_values(self) -> np.ndarray:
        lo, hi = self.distance_range if self.sweep == "distance" else self.frequency_range
        return log_grid(lo, hi, self.points_per_decade)


def _check_range(name, rng):
    if rng is None:
        return [f"{name}: required"]
    if len(rng) != 2:
        return [f"{name}: expected START STOP"]
    lo, hi = rng
    if not (lo > 0 and hi > 0):
        return [f"{name}: bounds must be positive"]
    if not hi > lo:
        return [f"{name}: need STOP > START (at least 2 points)"]
    return []


def log_grid(lo, hi, points_per_decade):
    """Log-spaced points including both ends, ``points_per_decade`` per factor 10."""
    n = max(2, int(math.ceil(math.log10(hi / lo) * points_per_decade)) + 1)
    return np.logspace(math.log10(lo), math.log10(hi), n)


@dataclass
class SweepRow:
    """One sweep point; ``values`` is ordered and names the CSV columns."""

    values: dict
    error: str | None = None


# -- evaluation --------------------------------------------------------------

_NUMERIC_ERRORS = (QuadratureError, FloatingPointError, ValueError, ZeroDivisionError, OverflowError)


def _series(sc: Scenario):
    """Yield ``(label, callable(x) -> (dict of values, method, rel_err))`` per column group."""
    material = sc.material_model()
    env = ThermalEnvironment(sc.temperature)
    by_distance = sc.sweep == "distance"

    def place(x, f_hz):
        """Return (distance, angular frequency) for a sweep value."""
        if by_distance:
            return x, 2 * math.pi * f_hz
        return sc.distance, 2 * math.pi * x

    if sc.mode in ("ion_heating", "spin_heating"):
        f0 = sc.frequency[0] if sc.frequency else DEFAULT_FREQUENCY[sc.mode]

        def run(x):
            z, w = place(x, f0)
            if sc.mode == "ion_heating":
                trap = TrapConfig(w, sc.mass_amu * AMU, z, tuple(sc.axis), sc.charge * E_CHARGE)
                res = ion_heating_rate(trap, material, env, method=sc.method,
                                       include_blackbody=sc.include_blackbody)
            else:
                trap = TrapConfig(w, sc.mass_amu * AMU, z)
                res = spin_heating_rate(trap, material, env, SpinSystem(sc.spin, 0, sc.g_s),
                                        method=sc.method,
                                        include_blackbody=sc.include_blackbody,
                                        normalization=sc.normalization)
            return {"rate_per_s": res.rate}, res.method, res.rel_err

        yield None, run

    elif sc.mode == "zeeman_loss":
        spin = SpinSystem(sc.spin, 0, sc.g_s)
        for f_hz in (sc.frequency if by_distance else [None]):
            def run(x, f_hz=f_hz):
                z, w = place(x, f_hz)
                res = zeeman_loss_rate(spin, w, material, env, SurfaceGeometry(z), sc.theta,
                                       method=sc.method)
                return {"rate_per_s": res.rate}, res.method, res.rel_err
            yield (f"{f_hz:g}Hz" if f_hz else None), run

    elif sc.mode == "hyperfine_loss":
        if sc.atom:
            atoms = [(a, ATOMS[a].spin, ATOMS[a].omega_hf / (2 * math.pi), ATOMS[a].F_i, ATOMS[a].F_f)
                     for a in sc.atom]
        else:
            f_hf = sc.frequency[0] if sc.frequency else None
            atoms = [(None, SpinSystem(sc.spin, sc.nuclear_spin, sc.g_s), f_hf,
                      sc.f_initial, sc.f_final)]
        for label, spin, f_hf, fi, ff in atoms:
            def run(x, spin=spin, f_hf=f_hf, fi=fi, ff=ff):
                z, w = place(x, f_hf)
                res = hyperfine_loss_rate(spin, w, material, env, SurfaceGeometry(z), fi, ff,
                                          method=sc.method)
                return {"rate_per_s": res.rate}, res.method, res.rel_err
            yield label, run

    else:
        unit = "V2_s_per_m2" if sc.field_kind == "electric" else "T2_s"
        fn = electric_nearfield_spectrum if sc.field_kind == "electric" else magnetic_nearfield_spectrum
        for f_hz in (sc.frequency if by_distance else [None]):
            def run(x, f_hz=f_hz):
                z, w = place(x, f_hz)
                spec = fn(material, env, SurfaceGeometry(z), w, method=sc.method,
                          include_blackbody=sc.include_blackbody)
                return ({f"s_parallel_{unit}": spec.parallel, f"s_perp_{unit}": spec.perpendicular},
                        spec.method, spec.rel_err)
            yield (f"{f_hz:g}Hz" if f_hz else None), run


def _method_label(method):
    return {"exact_quadrature": "exact", "asymptotic_interpolation": "asymptotic",
            "perfect_conductor": "perfect_conductor"}[method.value]


def run_scenario(scenario: Scenario) -> list[SweepRow]:
    """Evaluate every sweep point; numerical failures mark the row and the sweep goes on."""
    scenario.validate()
    xs = scenario.sweep_values()
    series = list(_series(scenario))
    multi = len(series) > 1
    first = "z_m" if scenario.sweep == "distance" else "f_Hz"
    rows = []
    for x in xs:
        values = {first: float(x)}
        errors = []
        for label, run in series:
            suffix = f"_{label}" if multi else ""
            try:
                vals, method, rel_err = run(float(x))
                mlabel = _method_label(method)
            except _NUMERIC_ERRORS as exc:
                names = _column_names(scenario)
                vals = {n: math.nan for n in names}
                mlabel, rel_err = "error", math.nan
                errors.append(f"{label or scenario.mode}: {type(exc).__name__}: {exc}")
            for k, v in vals.items():
                values[k + suffix] = v
            values["method" + suffix] = mlabel
            values["rel_err" + suffix] = rel_err
        rows.append(SweepRow(values, "; ".join(errors) or None))
    return rows


def _column_names(sc):
    if sc.mode == "spectrum":
        unit = "V2_s_per_m2" if sc.field_kind == "electric" else "T2_s"
        return [f"s_parallel_{unit}", f"s_perp_{unit}"]
    return ["rate_per_s"]


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return f"{v:.9g}"


def emit_csv(rows, destination) -> None:
    """Write rows as CSV to a path or an open text stream (9 significant digits)."""
    if not rows:
        raise ValueError("no rows to write")
    header = list(rows[0].values)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row.values[k]) for k in header])
    text = buf.getvalue()
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text)


# -- argument handling -----------------------------------------------------------

def read_config(path) -> dict:
    """Parse a flat ``key = value`` scenario file into raw strings."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError([f"{path}:{lineno}: expected 'key = value'"])
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _floats(text):
    return [float(t) for t in str(text).replace(",", " ").split()]


_CONVERTERS = {
    "temperature": float, "distance": float, "points_per_decade": int,
    "mass_amu": float, "charge": float, "theta": float, "spin": float,
    "nuclear_spin": float, "g_s": float, "f_initial": float, "f_final": float,
    "resistivity": float, "eps_real": float,
    "distance_range": lambda s: tuple(_floats(s)),
    "frequency_range": lambda s: tuple(_floats(s)),
    "frequency": _floats,
    "axis": lambda s: tuple(_floats(s)),
    "atom": lambda s: str(s).replace(",", " ").split(),
    "include_blackbody": lambda s: str(s).lower() in ("1", "true", "yes", "on"),
}
_FIELD_NAMES = {f.name for f in fields(Scenario)}


def build_scenario(mode: str, config: dict, overrides: dict) -> Scenario:
    problems = []
    if "mode" in config and config["mode"].replace("-", "_") != mode:
        problems.append(f"mode: config file says {config['mode']!r} but subcommand is {mode!r}")
    kwargs = {}
    for source in (config, overrides):
        for key, value in source.items():
            if key == "mode" or value is None:
                continue
            if key not in _FIELD_NAMES:
                problems.append(f"{key}: unknown setting")
                continue
            try:
                conv = _CONVERTERS.get(key)
                kwargs[key] = conv(value) if conv and isinstance(value, str) else value
            except ValueError:
                problems.append(f"{key}: cannot parse {value!r}")
    if problems:
        raise ScenarioError(problems)
    if "sweep" not in kwargs and "frequency_range" in kwargs and "distance_range" not in kwargs:
        kwargs["sweep"] = "frequency"
    return Scenario(mode=mode, **kwargs)


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario file (key = value lines)")
    common.add_argument("--material", help="material preset name (see 'presets list')")
    common.add_argument("--resistivity", type=float, help="custom resistivity, Ohm m")
    common.add_argument("--eps-real", type=float, help="real static permittivity")
    common.add_argument("--temperature", type=float, help="surface temperature, K")
    common.add_argument("--distance-range", nargs=2, type=float, metavar=("START", "STOP"),
                        help="distance sweep bounds, m")
    common.add_argument("--distance", type=float, help="fixed distance for frequency sweeps, m")
    common.add_argument("--frequency-range", nargs=2, type=float, metavar=("START", "STOP"),
                        help="frequency sweep bounds, Hz")
    common.add_argument("--points-per-decade", type=int)
    common.add_argument("--method", choices=METHODS)
    common.add_argument("--include-blackbody", action="store_true", default=None)
    common.add_argument("--output", "-o", help="CSV destination (default: stdout)")

    p = argparse.ArgumentParser(prog="trapnoise", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    ion = sub.add_parser("ion-heating", parents=[common], help="ion heating rate")
    ion.add_argument("--frequency", type=float, nargs=1, help="trap frequency, Hz")
    ion.add_argument("--mass-amu", type=float)
    ion.add_argument("--charge", type=float, help="charge in units of e")
    ion.add_argument("--axis", type=lambda s: tuple(_floats(s)), help="trap axis, e.g. 0,0,1")

    spin = sub.add_parser("spin-heating", parents=[common], help="heating of a trapped spin")
    spin.add_argument("--frequency", type=float, nargs=1, help="trap frequency, Hz")
    spin.add_argument("--mass-amu", type=float)
    spin.add_argument("--spin", type=float)
    spin.add_argument("--g-s", type=float)
    spin.add_argument("--normalization", choices=("closed_form", "golden_rule"))

    zee = sub.add_parser("zeeman-loss", parents=[common], help="spin-flip loss in a magnetic trap")
    zee.add_argument("--frequency", type=float, nargs="+", help="Larmor frequency (or several), Hz")
    zee.add_argument("--theta", type=float, help="bias field angle from the surface normal, rad")
    zee.add_argument("--spin", type=float)
    zee.add_argument("--g-s", type=float)

    hf = sub.add_parser("hyperfine-loss", parents=[common], help="hyperfine-changing loss")
    hf.add_argument("--atom", nargs="+", help="atom preset(s), e.g. rb85 cs133")
    hf.add_argument("--frequency", type=float, nargs=1, help="hyperfine splitting, Hz")
    hf.add_argument("--nuclear-spin", type=float)
    hf.add_argument("--f-initial", type=float)
    hf.add_argument("--f-final", type=float)

    spec = sub.add_parser("spectrum", parents=[common], help="near-field noise spectrum")
    spec.add_argument("--field", dest="field_kind", choices=("electric", "magnetic"))
    spec.add_argument("--frequency", type=float, nargs="+", help="frequency (or several), Hz")

    pre = sub.add_parser("presets", help="built-in presets")
    pre.add_argument("action", choices=("list",))
    return p


def presets_text() -> str:
    lines = ["materials:"]
    for m in MATERIALS.values():
        lines.append(f"  {m.name:8s} resistivity={m.resistivity:g} Ohm m  eps_real={m.static_eps_real:g}")
    lines.append("atoms:")
    for a in ATOMS.values():
        lines.append(f"  {a.name:8s} S={a.spin.S:g} I={a.spin.I:g} "
                     f"f_HF={a.omega_hf / (2 * math.pi):.6g} Hz  F {a.F_i:g} -> {a.F_f:g}")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "presets":
        sys.stdout.write(presets_text())
        return 0
    mode = args.command.replace("-", "_")
    opts = {k: v for k, v in vars(args).items() if k not in ("command", "config", "output")}
    try:
        config = read_config(args.config) if args.config else {}
        scenario = build_scenario(mode, config, opts)
        rows = run_scenario(scenario)
    except ScenarioError as exc:
        for problem in exc.problems:
            print(f"trapnoise: invalid scenario: {problem}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"trapnoise: {exc}", file=sys.stderr)
        return 1
    try:
        if args.output:
            emit_csv(rows, args.output)
        else:
            emit_csv(rows, sys.stdout)
    except OSError as exc:
        print(f"trapnoise: cannot write output: {exc}", file=sys.stderr)
        return 1
    failed = [r for r in rows if r.error]
    for r in failed:
        print(f"trapnoise: point {next(iter(r.values.values())):.6g}: {r.error}", file=sys.stderr)
    return 2 if failed else 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
