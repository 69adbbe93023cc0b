"""One-dimensional primal/dual axes and tensor-product grids."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Union

import numpy as np


@dataclass(frozen=True)
class Uniform:
    N: int
    kind: str = "uniform"

    def __post_init__(self):
        _check_n(self.N)


@dataclass(frozen=True)
class SinhOrigin:
    """Nodes clustered at the lower end: x_i = lo + d sinh(i * deta)."""

    N: int
    d: float
    kind: str = "sinh-origin"

    def __post_init__(self):
        _check_n(self.N)
        if self.d <= 0.0:
            raise ValueError(f"grading parameter d must be positive, got {self.d}")


@dataclass(frozen=True)
class SinhStrike:
    """Nodes clustered around lo + E: x_i = lo + E + c sinh(eta_i)."""

    N: int
    E: float
    c: float
    kind: str = "sinh-strike"

    def __post_init__(self):
        _check_n(self.N)
        if self.c <= 0.0:
            raise ValueError(f"grading parameter c must be positive, got {self.c}")


AxisSpec = Union[Uniform, SinhOrigin, SinhStrike]


def _check_n(n: int) -> None:
    if int(n) != n or n < 2:
        raise ValueError(f"an axis needs N >= 2 intervals, got {n}")


def axis_spec_from_dict(data: dict) -> AxisSpec:
    data = dict(data)
    kind = data.pop("kind", "uniform")
    cls = {"uniform": Uniform, "sinh-origin": SinhOrigin, "sinh-strike": SinhStrike}.get(kind)
    if cls is None:
        raise ValueError(f"unknown axis kind {kind!r}")
    return cls(**data)


def axis_spec_to_dict(spec: AxisSpec) -> dict:
    return {name: getattr(spec, name) for name in spec.__dataclass_fields__}


@dataclass(frozen=True, eq=False)
class Axis:
    """Primal nodes with their control volumes.

    ``midpoints`` has N + 2 entries: midpoints[i] is the left face x_{i-1/2}
    of cell i, with the end faces collapsed onto the end nodes, so the cell of
    node i is [midpoints[i], midpoints[i + 1]].
    """

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 3:
            raise ValueError("an axis needs at least three nodes")
        if np.any(np.diff(nodes) <= 0.0):
            raise RuntimeError("axis nodes are not strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        mids = np.empty(nodes.size + 1)
        mids[0] = nodes[0]
        mids[1:-1] = 0.5 * (nodes[:-1] + nodes[1:])
        mids[-1] = nodes[-1]
        mids.setflags(write=False)
        object.__setattr__(self, "midpoints", mids)

    @property
    def N(self) -> int:
        return self.nodes.size - 1

    @property
    def lo(self) -> float:
        return float(self.nodes[0])

    @property
    def hi(self) -> float:
        return float(self.nodes[-1])

    @property
    def primal_widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def dual_widths(self) -> np.ndarray:
        return np.diff(self.midpoints)

    def __eq__(self, other):
        return isinstance(other, Axis) and np.array_equal(self.nodes, other.nodes)

    def __hash__(self):
        return hash(self.nodes.tobytes())


def build_axis(spec: AxisSpec, lo: float, hi: float) -> Axis:
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    n = spec.N
    i = np.arange(n + 1)
    length = hi - lo
    if isinstance(spec, Uniform):
        nodes = lo + length * i / n
    elif isinstance(spec, SinhOrigin):
        deta = math.asinh(length / spec.d) / n
        nodes = lo + spec.d * np.sinh(i * deta)
    elif isinstance(spec, SinhStrike):
        if not 0.0 < spec.E < length:
            raise ValueError(f"strike offset E={spec.E} must lie in (0, {length})")
        eta0 = math.asinh(-spec.E / spec.c)
        deta = (math.asinh((length - spec.E) / spec.c) - eta0) / n
        nodes = lo + spec.E + spec.c * np.sinh(eta0 + i * deta)
    else:
        raise TypeError(f"unsupported axis spec {spec!r}")
    nodes[0] = lo
    nodes[-1] = hi
    return Axis(nodes)


@dataclass(frozen=True)
class Grid2D:
    x_axis: Axis
    y_axis: Axis

    @property
    def shape(self) -> tuple[int, int]:
        return self.x_axis.nodes.size, self.y_axis.nodes.size

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x_axis.nodes, self.y_axis.nodes, indexing="ij")

    def cell_areas(self) -> np.ndarray:
        return np.outer(self.x_axis.dual_widths, self.y_axis.dual_widths)


def write_axis_csv(axis: Axis, path) -> None:
    """index, node, right face x_{i+1/2}, primal width h_i (blank at i=N), dual width."""
    h = axis.primal_widths
    hbar = axis.dual_widths
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "node", "midpoint", "primal_width", "dual_width"])
        for i, x in enumerate(axis.nodes):
            w.writerow([
                i,
                f"{x:.17g}",
                f"{axis.midpoints[i + 1]:.17g}",
                f"{h[i]:.17g}" if i < h.size else "",
                f"{hbar[i]:.17g}",
            ])
