"""Target patterns to fit exposure plans against."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .pattern import Grid1D, Grid2D

_C_R_INNER = math.pi / 3
_C_R_OUTER = 2 * math.pi / 3
_C_THETA_MIN = math.pi / 4
_C_THETA_MAX = 7 * math.pi / 4


def square_target(zeta, duty: float = 0.5, center: float = 0.0):
    """Binary pi-periodic pattern: 1 inside a window of width duty*pi.

    A point is inside when its periodic distance from ``center`` is strictly
    less than duty*pi/2.  Accepts scalars or arrays.
    """
    if not (0.0 < duty < 1.0):
        raise ValueError(f"duty must lie in (0, 1), got {duty!r}")
    z = np.asarray(zeta, dtype=float)
    d = np.mod(z - center, math.pi)
    dist = np.minimum(d, math.pi - d)
    vals = (dist < duty * math.pi / 2).astype(float)
    return vals if z.ndim else float(vals)


def c_shape_target(zeta_x, zeta_y, r_inner: float = _C_R_INNER,
                   r_outer: float = _C_R_OUTER, theta_min: float = _C_THETA_MIN,
                   theta_max: float = _C_THETA_MAX):
    """Binary C-shaped annular arc, open toward +x.

    1 when the radius lies strictly inside (r_inner, r_outer) and the polar
    angle, taken in [0, 2*pi), lies strictly inside (theta_min, theta_max).
    Accepts scalars or arrays.
    """
    if not (0.0 < r_inner < r_outer):
        raise ValueError("need 0 < r_inner < r_outer")
    zx = np.asarray(zeta_x, dtype=float)
    zy = np.asarray(zeta_y, dtype=float)
    r = np.hypot(zx, zy)
    th = np.mod(np.arctan2(zy, zx), 2 * math.pi)
    inside = (r_inner < r) & (r < r_outer) & (theta_min < th) & (th < theta_max)
    vals = inside.astype(float)
    return vals if vals.ndim else float(vals)


@dataclass(frozen=True)
class TargetSpec:
    """Declarative description of a target pattern, JSON-friendly.

    ``kind`` is "square", "c_shape" or "samples"; the remaining fields
    parameterize the matching generator (or point at a sample file).
    """

    kind: str
    duty: float = 0.5
    center: float = 0.0
    r_inner: float = _C_R_INNER
    r_outer: float = _C_R_OUTER
    theta_min: float = _C_THETA_MIN
    theta_max: float = _C_THETA_MAX
    path: str | None = None

    def __post_init__(self):
        if self.kind not in ("square", "c_shape", "samples"):
            raise ValueError(f"unknown target kind {self.kind!r}")
        if not (0.0 < self.duty < 1.0):
            raise ValueError("duty must lie in (0, 1)")
        if not (0.0 < self.r_inner < self.r_outer):
            raise ValueError("need 0 < r_inner < r_outer")
        if self.kind == "samples" and not self.path:
            raise ValueError("samples target needs a path")

    def sample_1d(self, g: Grid1D) -> np.ndarray:
        if self.kind == "square":
            return square_target(g.zeta, self.duty, self.center)
        raise ValueError(f"target kind {self.kind!r} cannot be sampled on a 1D grid")

    def sample_2d(self, g: Grid2D) -> np.ndarray:
        if self.kind == "c_shape":
            zx, zy = g.mesh()
            return c_shape_target(zx, zy, self.r_inner, self.r_outer,
                                  self.theta_min, self.theta_max)
        raise ValueError(f"target kind {self.kind!r} cannot be sampled on a 2D grid")

    def to_json_data(self) -> dict:
        data = {"kind": self.kind}
        if self.kind == "square":
            data.update(duty=self.duty, center=self.center)
        elif self.kind == "c_shape":
            data.update(r_inner=self.r_inner, r_outer=self.r_outer,
                        theta_min=self.theta_min, theta_max=self.theta_max)
        else:
            data["path"] = self.path
        return data

    @classmethod
    def from_json_data(cls, data) -> "TargetSpec":
        if not isinstance(data, dict) or "kind" not in data:
            raise ValueError("target JSON must be an object with a 'kind' key")
        known = {"kind", "duty", "center", "r_inner", "r_outer",
                 "theta_min", "theta_max", "path"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown target keys: {sorted(unknown)}")
        return cls(**data)


def load_target_samples(path):
    """Read target samples from CSV.

    Accepts `zeta,value` rows (returning (Grid1D, vector)) or
    `zeta_x,zeta_y,value` rows (returning (Grid2D, matrix)); 2D rows must
    cover a complete tensor grid, each node exactly once.  Values must be
    finite and >= 0.  Errors carry the 1-based line number.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty target file") from None
        header = [h.strip() for h in header]
        if header == ["zeta", "value"]:
            return _load_1d(path, reader)
        if header == ["zeta_x", "zeta_y", "value"]:
            return _load_2d(path, reader)
        raise ValueError(
            f"{path}: line 1: header must be 'zeta,value' or 'zeta_x,zeta_y,value', "
            f"got {','.join(header)!r}"
        )


def _parse_row(path, lineno, row, width):
    if len(row) != width:
        raise ValueError(f"{path}: line {lineno}: expected {width} fields, got {len(row)}")
    try:
        nums = [float(x) for x in row]
    except ValueError as exc:
        raise ValueError(f"{path}: line {lineno}: {exc}") from None
    if not all(math.isfinite(x) for x in nums):
        raise ValueError(f"{path}: line {lineno}: non-finite entry")
    if nums[-1] < 0.0:
        raise ValueError(f"{path}: line {lineno}: negative target value {nums[-1]!r}")
    return nums


def _load_1d(path, reader):
    zs, vs = [], []
    lineno = 1
    for row in reader:
        lineno += 1
        if not row:
            continue
        z, v = _parse_row(path, lineno, row, 2)
        zs.append(z)
        vs.append(v)
    if not zs:
        raise ValueError(f"{path}: no sample rows")
    order = np.argsort(zs)
    z_sorted = np.asarray(zs, dtype=float)[order]
    if np.any(np.diff(z_sorted) == 0.0):
        raise ValueError(f"{path}: duplicate zeta values")
    return Grid1D(z_sorted), np.asarray(vs, dtype=float)[order]


def _load_2d(path, reader):
    entries = {}
    lineno = 1
    for row in reader:
        lineno += 1
        if not row:
            continue
        x, y, v = _parse_row(path, lineno, row, 3)
        if (x, y) in entries:
            raise ValueError(f"{path}: line {lineno}: duplicate point ({x!r}, {y!r})")
        entries[(x, y)] = v
    if not entries:
        raise ValueError(f"{path}: no sample rows")
    xs = np.array(sorted({x for x, _ in entries}))
    ys = np.array(sorted({y for _, y in entries}))
    if len(entries) != xs.size * ys.size:
        raise ValueError(f"{path}: rows do not cover a complete zeta_x x zeta_y grid")
    vals = np.empty((xs.size, ys.size))
    for ix, x in enumerate(xs):
        for iy, y in enumerate(ys):
            vals[ix, iy] = entries[(x, y)]
    return Grid2D(xs, ys), vals
