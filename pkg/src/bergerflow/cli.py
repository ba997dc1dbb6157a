"""Command-line entry point ``bergerflow``.

Exit status: 0 on success, 2 on usage or precondition errors, 3 when
``verify`` finds a residual above tolerance.  Diagnostics go to stderr,
data to files or stdout.
"""
from __future__ import annotations

import argparse
import io
import math
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import su2
from .checks import ALTERNATE_COS_THETA, FIGURE_COS_THETA, run_suite
from .errors import BergerError, DomainError
from .flow import (
    DEFAULT_DS,
    Trajectory,
    closed_form_trajectory,
    helix_periodic_params,
    ikawa_array,
    initial_tangent,
    integrate,
    model_helix_derivatives,
    trajectory_from_positions,
)
from .hopf import circle_data, holonomy, measured_holonomy, project_array, tube_mesh, wrap_angle
from .periodicity import (
    DEFAULT_MAX_DEN,
    DEFAULT_TOL,
    PERIODIC,
    measure_period,
    periodicity_ratio,
    predicted_period,
    rational_approx,
    s3_verdict,
    slope_from_mn,
    slope_quantization,
)
from .sasaki import SasakiParams, ambient_to_frame, curvature_tables
from .viz import CSV_HEADER, FMT, emit_curve, emit_tube, stereographic_su2, trajectory_csv_rows, write_trajectory_csv

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 2, 3


def number(text: str):
    """Parse ``"29/36"`` or ``"3"`` exactly (``Fraction``), anything else as float."""
    text = text.strip()
    try:
        return Fraction(text) if ("/" in text or text.lstrip("+-").isdigit()) else float(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    return "%.17g" % x


@dataclass
class RunConfig:
    command: str = ""
    kind: Optional[str] = None
    alpha: object = 1.0
    q: object = 1.0
    cos_theta: object = None
    t1: object = None
    t2: object = None
    psi: object = math.pi / 4
    p: object = Fraction(2)
    s_max: object = None
    ds: object = DEFAULT_DS
    nt: int = 64
    nu: int = 256
    max_den: int = DEFAULT_MAX_DEN
    tol: object = DEFAULT_TOL
    horizon: object = None
    m: int = 1
    n: int = 1
    R: object = None
    grid: int = 101
    input: Optional[str] = None
    out: Optional[str] = None
    outdir: str = "figures"
    format: str = "csv"
    samples: int = 4001

    def validate(self):
        if not float(self.alpha) > 0:
            raise DomainError(f"alpha must be positive (got {self.alpha})")
        if self.cos_theta is not None and abs(float(self.cos_theta)) > 1:
            raise DomainError(f"|cos_theta| must be <= 1 (got {self.cos_theta})")
        if not float(self.ds) > 0:
            raise DomainError(f"ds must be positive (got {self.ds})")
        if self.s_max is not None and not float(self.s_max) > 0:
            raise DomainError(f"s_max must be positive (got {self.s_max})")
        if self.horizon is not None and not float(self.horizon) > 0:
            raise DomainError(f"horizon must be positive (got {self.horizon})")
        if self.max_den < 1:
            raise DomainError(f"max_den must be >= 1 (got {self.max_den})")
        if not float(self.tol) > 0:
            raise DomainError(f"tol must be positive (got {self.tol})")
        if self.nt < 3 or self.nu < 3:
            raise DomainError(f"nt and nu must be >= 3 (got {self.nt}, {self.nu})")
        if self.n < 1:
            raise DomainError(f"n must be a positive integer (got {self.n})")
        if self.grid < 2:
            raise DomainError(f"grid must be >= 2 (got {self.grid})")
        if self.samples < 2:
            raise DomainError(f"samples must be >= 2 (got {self.samples})")
        if self.format not in ("csv", "obj", "svg"):
            raise DomainError(f"format must be csv, obj or svg (got {self.format})")

    def params(self) -> SasakiParams:
        return SasakiParams(float(self.alpha), float(self.q))


def _require(cfg: RunConfig, *names):
    for name in names:
        if getattr(cfg, name) is None:
            raise DomainError(f"--{name.replace('_', '-')} is required for '{cfg.command}'")


def _note(msg: str):
    print(msg, file=sys.stderr)


# -- subcommands ----------------------------------------------------------------

def cmd_verify(cfg: RunConfig) -> int:
    p = cfg.params()
    rep = curvature_tables(p)
    print(f"alpha {p.alpha:.17g}  c {p.c:.17g}")
    for f in fields(rep):
        print(f"{f.name:<8s} {getattr(rep, f.name): .17g}")
    rows = run_suite(p.alpha)
    for row in rows:
        print(row.line())
    failed = [r for r in rows if not r.passed]
    if failed:
        _note(f"verify: {len(failed)} check(s) above tolerance")
        return EXIT_VERIFY
    return EXIT_OK


def _open_out(path):
    return sys.stdout if path in (None, "-") else path


def _write_traj(traj, path):
    if path in (None, "-"):
        buf = io.StringIO()
        np.savetxt(buf, trajectory_csv_rows(traj), fmt=FMT, delimiter=",", header=CSV_HEADER, comments="")
        sys.stdout.write(buf.getvalue())
    else:
        write_trajectory_csv(traj, path)


def cmd_integrate(cfg: RunConfig) -> int:
    _require(cfg, "cos_theta", "s_max")
    p = cfg.params()
    t0 = initial_tangent(float(cfg.cos_theta), None if cfg.t1 is None else float(cfg.t1),
                         None if cfg.t2 is None else float(cfg.t2))
    n_steps = int(round(float(cfg.s_max) / float(cfg.ds)))
    traj = integrate(su2.IDENTITY, t0, p, float(cfg.ds), n_steps)
    _write_traj(traj, cfg.out)
    return EXIT_OK


def ikawa_trajectory(cos_theta: float, s) -> Trajectory:
    p = SasakiParams(1.0, 1.0)
    s = np.asarray(s, dtype=float)
    ref = closed_form_trajectory(su2.IDENTITY, initial_tangent(cos_theta), p, s)
    return trajectory_from_positions(s, ikawa_array(cos_theta, s), ref.tangent, p)


def helix_trajectory(psi: float, p_ratio, s) -> Trajectory:
    a, b = helix_periodic_params(p_ratio, psi)
    s = np.asarray(s, dtype=float)
    d0, d1 = model_helix_derivatives(psi, a, b, s, order=1)
    pos, vel = su2.from_r4(d0), su2.from_r4(d1)
    p = SasakiParams(1.0)
    return trajectory_from_positions(s, pos, ambient_to_frame(pos, vel, p), p)


def _grid(s_max: float, ds: float) -> np.ndarray:
    n = max(2, int(round(s_max / ds)) + 1)
    return np.linspace(0.0, s_max, n)


def cmd_curve(cfg: RunConfig) -> int:
    if cfg.kind == "ikawa":
        _require(cfg, "cos_theta")
        s_max = float(cfg.s_max) if cfg.s_max is not None else 12.0 * math.pi
        traj = ikawa_trajectory(float(cfg.cos_theta), _grid(s_max, float(cfg.ds)))
    else:
        p_ratio = cfg.p
        if cfg.s_max is not None:
            s_max = float(cfg.s_max)
        else:
            a, _ = helix_periodic_params(p_ratio, float(cfg.psi))
            f = Fraction(p_ratio).limit_denominator(10**6)
            s_max = 2.0 * math.pi * f.denominator / a
        traj = helix_trajectory(float(cfg.psi), p_ratio, _grid(s_max, float(cfg.ds)))
    if cfg.format == "csv" and cfg.out in (None, "-"):
        _write_traj(traj, None)
    elif cfg.format == "csv":
        write_trajectory_csv(traj, cfg.out)
    else:
        _require(cfg, "out")
        emit_curve(traj, cfg.format, cfg.out)
    return EXIT_OK


def cmd_project(cfg: RunConfig) -> int:
    _require(cfg, "input")
    data = np.loadtxt(cfg.input, delimiter=",", skiprows=1, ndmin=2)
    if len(data) == 0:
        raise DomainError(f"{cfg.input} has no samples")
    p = cfg.params()
    s, pos, tan = data[:, 0], data[:, 1:5], data[:, 5:8]
    y = project_array(pos, p)
    u = cumulative_trapezoid(np.hypot(tan[:, 0], tan[:, 1]), s, initial=0.0)
    out = np.column_stack([u, y])
    target = _open_out(cfg.out)
    np.savetxt(target, out, fmt="%.17g", delimiter=",", header="u,y1,y2,y3", comments="")
    return EXIT_OK


def cmd_tube(cfg: RunConfig) -> int:
    _require(cfg, "cos_theta", "out")
    verts, faces = tube_mesh(float(cfg.q), float(cfg.cos_theta), cfg.params(), cfg.nt, cfg.nu)
    emit_tube(su2.r4_coords(verts), faces, cfg.out)
    _note(f"tube: {len(verts)} vertices, {len(faces)} quads -> {cfg.out}")
    return EXIT_OK


def cmd_holonomy(cfg: RunConfig) -> int:
    _require(cfg, "R")
    p = cfg.params()
    formula = holonomy(circle_data(float(cfg.R), p).A, p)
    measured = measured_holonomy(float(cfg.R), p)
    print(f"delta_formula  {formula:.17g}")
    print(f"delta_measured {measured:.17g}")
    print(f"difference     {abs(wrap_angle(measured - formula)):.3e}")
    return EXIT_OK


def cmd_period(cfg: RunConfig) -> int:
    _require(cfg, "cos_theta")
    alpha = cfg.alpha
    if float(alpha) == 1.0:
        approx = s3_verdict(cfg.q, cfg.cos_theta, cfg.max_den, float(cfg.tol))
        value = approx.fraction if approx.exact and approx.periodic else approx.value
    else:
        value = periodicity_ratio(cfg.params(), float(cfg.cos_theta))
        approx = rational_approx(value, cfg.max_den, float(cfg.tol))
    print(f"criterion {_fmt(value)}")
    print(f"best_rational {approx.numerator}/{approx.denominator}  error {approx.error:.3e}")
    print(f"verdict {approx.verdict}  (max_den {cfg.max_den}, tol {float(cfg.tol):g})")
    if approx.verdict == PERIODIC:
        p = cfg.params()
        predicted = predicted_period(p, float(cfg.cos_theta), cfg.max_den, float(cfg.tol))
        horizon = float(cfg.horizon) if cfg.horizon is not None else 1.01 * predicted
        res = measure_period(p, float(cfg.cos_theta), horizon=horizon, tol=1e-5)
        if res.period is None:
            print(f"period not found within horizon {horizon:.17g} (min distance {res.min_distance:.3e})")
        else:
            print(f"period {res.period:.17g}  ({res.period / math.pi:.12g} pi, predicted {predicted:.17g})")
    return EXIT_OK


def cmd_quantize(cfg: RunConfig) -> int:
    _require(cfg, "R")
    p = cfg.params()
    sigma = slope_from_mn(cfg.m, cfg.n, float(cfg.R), p)
    data = slope_quantization(float(cfg.R), sigma, p, cfg.max_den, float(cfg.tol))
    ratio = data.residual / p.alpha
    print(f"sigma {sigma:.17g}")
    print(f"residual {data.residual:.17g}")
    print(f"residual/alpha {ratio:.17g}  m/n {cfg.m}/{cfg.n}  identity error {abs(ratio - cfg.m / cfg.n):.3e}")
    print(f"verdict {data.verdict}  best_rational {data.approx.numerator}/{data.approx.denominator}")
    return EXIT_OK


def cmd_scan(cfg: RunConfig) -> int:
    _require(cfg, "out")
    rows = []
    exact = float(cfg.alpha) == 1.0 and isinstance(cfg.q, Fraction)
    for k in range(cfg.grid):
        c = Fraction(-1) + Fraction(2 * k, cfg.grid - 1)
        try:
            if float(cfg.alpha) == 1.0:
                approx = s3_verdict(cfg.q if exact else float(cfg.q), c if exact else float(c), cfg.max_den, float(cfg.tol))
            else:
                approx = rational_approx(periodicity_ratio(cfg.params(), float(c)), cfg.max_den, float(cfg.tol))
            rows.append(f"{float(c):.17g},{float(approx.value):.17g},{approx.numerator},{approx.denominator},{approx.error:.17g},{approx.verdict}")
        except BergerError as exc:
            _note(f"scan: cos_theta={c}: {exc}")
            rows.append(f"{float(c):.17g},nan,0,1,nan,degenerate")
    with open(cfg.out, "w") as fh:
        fh.write("cos_theta,criterion,p,den,err,verdict\n")
        fh.write("\n".join(rows) + "\n")
    return EXIT_OK


def figure_files(outdir: Path, tag: str) -> dict:
    return {
        "csv": outdir / f"curve_{tag}.csv",
        "obj": outdir / f"curve_{tag}.obj",
        "svg": outdir / f"curve_{tag}.svg",
        "tube": outdir / f"tube_{tag}.obj",
    }


def cmd_figure(cfg: RunConfig) -> int:
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    s = np.linspace(0.0, 12.0 * math.pi, cfg.samples)
    for cos_theta in (FIGURE_COS_THETA, ALTERNATE_COS_THETA):
        tag = f"cos{cos_theta.numerator}-{cos_theta.denominator}"
        omega = math.sqrt(1.25 - float(cos_theta))
        traj = ikawa_trajectory(float(cos_theta), s)
        files = figure_files(outdir, tag)
        for fmt in ("csv", "obj", "svg"):
            emit_curve(traj, fmt, files[fmt])
        verts, faces = tube_mesh(1.0, float(cos_theta), SasakiParams(1.0, 1.0), cfg.nt, cfg.nu)
        emit_tube(su2.r4_coords(verts), faces, files["tube"])
        proj = stereographic_su2(traj.position)
        gap = float(np.linalg.norm(proj[-1] - proj[0]))
        _note(f"figure {tag}: omega={omega:.12g}, projected endpoint gap over [0, 12 pi] = {gap:.3e}")
    _note(
        "figure: the alternate value cos(theta)=29/37 does not give omega=2/3 "
        f"(omega={math.sqrt(1.25 - 29 / 37):.12g}); cos(theta)=29/36 does. "
        "Both variants are written; the 29/36 curve is the closed one."
    )
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "integrate": cmd_integrate,
    "curve": cmd_curve,
    "project": cmd_project,
    "tube": cmd_tube,
    "holonomy": cmd_holonomy,
    "period": cmd_period,
    "quantize": cmd_quantize,
    "scan": cmd_scan,
    "figure": cmd_figure,
}


# -- parsing ----------------------------------------------------------------------

_OPTIONS = {
    "alpha": number, "q": number, "cos_theta": number, "t1": number, "t2": number,
    "psi": number, "p": number, "s_max": number, "ds": number, "nt": int, "nu": int,
    "max_den": int, "tol": number, "horizon": number, "m": int, "n": int, "R": number,
    "grid": int, "input": str, "out": str, "outdir": str, "format": str, "samples": int,
}

_PER_COMMAND = {
    "verify": ["alpha"],
    "integrate": ["alpha", "q", "cos_theta", "t1", "t2", "s_max", "ds", "out"],
    "curve": ["cos_theta", "psi", "p", "s_max", "ds", "out", "format"],
    "project": ["alpha", "input", "out"],
    "tube": ["alpha", "q", "cos_theta", "nt", "nu", "out"],
    "holonomy": ["alpha", "R"],
    "period": ["alpha", "q", "cos_theta", "max_den", "tol", "horizon"],
    "quantize": ["alpha", "m", "n", "R", "max_den", "tol"],
    "scan": ["alpha", "q", "grid", "max_den", "tol", "out"],
    "figure": ["outdir", "nt", "nu", "samples"],
}


def _flag(name: str) -> str:
    return "--" + ("in" if name == "input" else name.replace("_", "-"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bergerflow", description="Magnetic trajectories on Berger spheres.")
    parser.add_argument("--config", help="key=value file; command-line flags override it")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, names in _PER_COMMAND.items():
        sp = sub.add_parser(command)
        if command == "curve":
            sp.add_argument("kind", choices=["ikawa", "helix"])
        for name in names:
            sp.add_argument(_flag(name), dest=name, type=_OPTIONS[name], default=argparse.SUPPRESS)
    return parser


def read_config(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment.  Keys match flag names."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise DomainError(f"cannot read config {path}: {exc}")
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key == "in":
            key = "input"
        if key not in _OPTIONS:
            raise DomainError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _OPTIONS[key](value)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise DomainError(f"{path}:{lineno}: bad value for {key}: {exc}")
    return out


def make_config(ns: argparse.Namespace) -> RunConfig:
    values = vars(ns).copy()
    command = values.pop("command")
    config_path = values.pop("config", None)
    merged = {}
    if config_path:
        allowed = set(_PER_COMMAND[command])
        merged.update({k: v for k, v in read_config(config_path).items() if k in allowed})
    merged.update(values)
    cfg = RunConfig(command=command, **merged)
    cfg.validate()
    return cfg


def dispatch(cfg: RunConfig) -> int:
    return COMMANDS[cfg.command](cfg)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)  # exits with status 2 on usage errors
    try:
        cfg = make_config(ns)
        return dispatch(cfg)
    except BergerError as exc:
        _note(f"error: {exc}")
        return EXIT_USAGE
    except OSError as exc:
        _note(f"error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
