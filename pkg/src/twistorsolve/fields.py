"""Real grid boxes and complex scalar fields sampled on them."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Grid3:
    origin: tuple = (0.0, 0.0, 0.0)
    spacing: tuple = (1.0, 1.0, 1.0)
    shape: tuple = (1, 1, 1)

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))
        object.__setattr__(self, "spacing", tuple(float(v) for v in self.spacing))
        object.__setattr__(self, "shape", tuple(int(v) for v in self.shape))
        if len(self.origin) != 3 or len(self.spacing) != 3 or len(self.shape) != 3:
            raise ValueError("a grid needs three origins, spacings and sizes")
        if any(h <= 0 for h in self.spacing):
            raise ValueError(f"spacings must be positive: {self.spacing}")
        if any(n < 1 for n in self.shape):
            raise ValueError(f"sizes must be at least 1: {self.shape}")

    @classmethod
    def box(cls, radius, n, center=(0.0, 0.0, 0.0)) -> "Grid3":
        """Cube ``[c - r, c + r]^3`` with n points per axis (n = 1 gives the center)."""
        n = (n,) * 3 if np.isscalar(n) else tuple(n)
        radius = (radius,) * 3 if np.isscalar(radius) else tuple(radius)
        origin, spacing = [], []
        for c, r, k in zip(center, radius, n):
            if k == 1:
                origin.append(c)
                spacing.append(1.0)
            else:
                origin.append(c - r)
                spacing.append(2 * r / (k - 1))
        return cls(tuple(origin), tuple(spacing), n)

    def axes(self):
        return tuple(o + h * np.arange(n) for o, h, n in zip(self.origin, self.spacing, self.shape))

    def mesh(self):
        return np.meshgrid(*self.axes(), indexing="ij")

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def interior(self) -> np.ndarray:
        """Mask of points with a full central-difference stencil."""
        m = np.zeros(self.shape, dtype=bool)
        if min(self.shape) >= 3:
            m[1:-1, 1:-1, 1:-1] = True
        return m

    def to_dict(self) -> dict:
        return {"origin": list(self.origin), "spacing": list(self.spacing), "shape": list(self.shape)}


@dataclass(frozen=True, eq=False)
class ScalarField3:
    """Complex values on a :class:`Grid3`; NaN entries are holes (see ``holes`` for codes)."""

    values: np.ndarray
    grid: Grid3
    holes: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def spacing(self):
        return self.grid.spacing

    def valid(self) -> np.ndarray:
        return np.isfinite(self.values)

    def max_abs_diff(self, other) -> float:
        o = other.values if isinstance(other, ScalarField3) else np.asarray(other)
        return float(np.nanmax(np.abs(self.values - o)))

    # serialization
    def to_csv(self, path, config_hash: str | None = None) -> None:
        """CSV ``x,y,z,re,im`` (z fastest) plus a ``.json`` sidecar next to it."""
        path = Path(path)
        X, Y, Z = self.grid.mesh()
        rows = np.column_stack([X.ravel(), Y.ravel(), Z.ravel(),
                                self.values.real.ravel(), self.values.imag.ravel()])
        with open(path, "w", newline="") as fh:
            fh.write("x,y,z,re,im\n")
            np.savetxt(fh, rows, fmt="%.17g", delimiter=",")
        sidecar = {
            "grid": self.grid.to_dict(),
            "holes": {",".join(map(str, k)): v for k, v in sorted(self.holes.items())},
            "meta": self.meta,
            "config_hash": config_hash,
        }
        path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True))

    @classmethod
    def from_csv(cls, path) -> "ScalarField3":
        path = Path(path)
        side = json.loads(path.with_suffix(".json").read_text())
        g = side["grid"]
        grid = Grid3(g["origin"], g["spacing"], g["shape"])
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != ["x", "y", "z", "re", "im"]:
                raise ValueError(f"unexpected header {header}")
            data = np.array([[float(v) for v in row] for row in reader]).reshape(-1, 5)
        values = (data[:, 3] + 1j * data[:, 4]).reshape(grid.shape)
        holes = {tuple(int(i) for i in k.split(",")): v for k, v in side.get("holes", {}).items()}
        return cls(values, grid, holes, side.get("meta", {}))

    def write_slice_z0(self, path, config_hash: str | None = None) -> None:
        """gnuplot blocks ``x y re im`` on the plane nearest to z = 0."""
        xs, ys, zs = self.grid.axes()
        k = int(np.argmin(np.abs(zs)))
        with open(path, "w") as fh:
            fh.write(f"# x y re im at z = {zs[k]:.17g}\n")
            if config_hash:
                fh.write(f"# config {config_hash}\n")
            for i, xv in enumerate(xs):
                for j, yv in enumerate(ys):
                    v = self.values[i, j, k]
                    fh.write(f"{xv:.17g} {yv:.17g} {v.real:.17g} {v.imag:.17g}\n")
                fh.write("\n")
