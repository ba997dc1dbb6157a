"""Stereographic projection and plain-text figure output (CSV, OBJ, SVG).

Points of S^3 are given in R^4 coordinates ``(x1, x2, x3, x4)`` =
``(Re z1, Im z1, Re z2, Im z2)`` (see :func:`bergerflow.su2.r4_coords`);
projection is from the pole ``(0, 0, 0, 1)``.
"""
from __future__ import annotations

import os
from pathlib import Path
from typing import Optional

import numpy as np

from . import su2
from .errors import DomainError, PoleError
from .flow import Trajectory

POLE = np.array([0.0, 0.0, 0.0, 1.0])
POLE_TOL = 1e-9
CSV_HEADER = "s,x0,x1,x2,x3,T1,T2,T3,res_norm,res_speed,res_angle"
FMT = "%.17g"


def stereographic(x) -> np.ndarray:
    """``(x1, x2, x3) / (1 - x4)`` for R^4 points ``x`` of shape ``(4,)`` or ``(N, 4)``."""
    x = np.asarray(x, dtype=float)
    pts = np.atleast_2d(x)
    bad = np.flatnonzero(np.linalg.norm(pts - POLE, axis=1) <= POLE_TOL)
    if bad.size:
        raise PoleError(f"samples within {POLE_TOL} of the projection pole", indices=bad.tolist())
    out = pts[:, :3] / (1.0 - pts[:, 3:4])
    return out[0] if x.ndim == 1 else out


def inverse_stereographic(p) -> np.ndarray:
    """Inverse of :func:`stereographic`; returns R^4 points on the unit sphere."""
    p = np.asarray(p, dtype=float)
    pts = np.atleast_2d(p)
    n2 = np.sum(pts * pts, axis=1, keepdims=True)
    out = np.concatenate([2.0 * pts, n2 - 1.0], axis=1) / (n2 + 1.0)
    return out[0] if p.ndim == 1 else out


def stereographic_su2(a) -> np.ndarray:
    """Project group elements (quaternion components) via their R^4 coordinates."""
    return stereographic(su2.r4_coords(a))


def _check_writable(path) -> Path:
    path = Path(path)
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir():
        raise DomainError(f"cannot write {path}: directory {parent} does not exist")
    if not os.access(parent, os.W_OK) or (path.exists() and not os.access(path, os.W_OK)):
        raise DomainError(f"cannot write {path}: permission denied")
    return path


def trajectory_csv_rows(traj: Trajectory, projected: Optional[np.ndarray] = None) -> np.ndarray:
    cols = [
        traj.s[:, None], traj.position, traj.tangent,
        traj.res_norm[:, None], traj.res_speed[:, None], traj.res_angle[:, None],
    ]
    if projected is not None:
        cols.append(projected)
    return np.hstack(cols)


def write_trajectory_csv(traj: Trajectory, path, project: bool = False) -> Path:
    """Write the trajectory table, optionally with ``px,py,pz`` columns."""
    if len(traj) == 0:
        raise DomainError("empty sample list")
    path = _check_writable(path)
    header = CSV_HEADER
    projected = None
    if project:
        projected = stereographic_su2(traj.position)
        header += ",px,py,pz"
    np.savetxt(path, trajectory_csv_rows(traj, projected), fmt=FMT, delimiter=",", header=header, comments="")
    return path


def write_polyline_obj(points, path, closed: bool = False) -> Path:
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        raise DomainError("empty sample list")
    path = _check_writable(path)
    idx = list(range(1, len(points) + 1))
    if closed:
        idx.append(1)
    with open(path, "w") as fh:
        for p in points:
            fh.write("v " + " ".join(FMT % c for c in p) + "\n")
        fh.write("l " + " ".join(map(str, idx)) + "\n")
    return path


def write_mesh_obj(vertices, faces, path) -> Path:
    """Polygonal mesh: vertex lines, then 1-based face lines."""
    vertices = np.asarray(vertices, dtype=float)
    if len(vertices) == 0:
        raise DomainError("empty mesh")
    path = _check_writable(path)
    with open(path, "w") as fh:
        for p in vertices:
            fh.write("v " + " ".join(FMT % c for c in p) + "\n")
        for f in faces:
            fh.write("f " + " ".join(str(int(i) + 1) for i in f) + "\n")
    return path


def write_polyline_svg(xy, path, width: int = 600, stroke: str = "black") -> Path:
    """Orthographic (x, y) view with a viewBox fitted to the data plus a 5% margin."""
    xy = np.asarray(xy, dtype=float)[:, :2]
    if len(xy) == 0:
        raise DomainError("empty sample list")
    path = _check_writable(path)
    lo, hi = xy.min(axis=0), xy.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-12))
    pad = 0.05 * span
    # SVG y axis points down
    pts = np.column_stack([xy[:, 0], -xy[:, 1]])
    x0, y0 = lo[0] - pad, -hi[1] - pad
    w, h = hi[0] - lo[0] + 2 * pad, hi[1] - lo[1] + 2 * pad
    coords = " ".join("%.9g,%.9g" % (p[0], p[1]) for p in pts)
    with open(path, "w") as fh:
        fh.write('<?xml version="1.0" encoding="UTF-8"?>\n')
        fh.write(
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{int(round(width * h / w))}" '
            f'viewBox="{x0:.9g} {y0:.9g} {w:.9g} {h:.9g}">\n'
        )
        fh.write(
            f'<polyline fill="none" stroke="{stroke}" stroke-width="{span / 400:.6g}" points="{coords}"/>\n'
        )
        fh.write("</svg>\n")
    return path


def emit_curve(samples: Trajectory, fmt: str, path) -> Path:
    """Write a trajectory as ``csv`` (with projected columns), ``obj`` polyline or ``svg``."""
    if samples is None or len(samples) == 0:
        raise DomainError("empty sample list")
    if fmt == "csv":
        return write_trajectory_csv(samples, path, project=True)
    projected = stereographic_su2(samples.position)
    if fmt == "obj":
        return write_polyline_obj(projected, path)
    if fmt == "svg":
        return write_polyline_svg(projected, path)
    raise DomainError(f"unknown format {fmt!r}; expected csv, obj or svg")


def emit_tube(vertices_r4, faces, path) -> Path:
    """Stereographically project a tube mesh given in R^4 coordinates and write OBJ."""
    return write_mesh_obj(stereographic(vertices_r4), faces, path)
