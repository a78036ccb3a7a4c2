"""Haar martingale analysis on the mesh: differences, square functions,
maximal operators, and the average-doubling stopping-time decomposition.

All sums over dyadic cubes stop at the mesh depth, so reconstruction
identities carry the top-level average explicitly and hold cell-exactly.
The stopping tree works on two cube systems: intervals of one axis, and
squares of a product box with equal per-axis depth ("one-parameter" mode).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

import numpy as np

from .lattice import (
    BoxDomain,
    DyadicInterval,
    DyadicRectangle,
    GeometryError,
    Grid1D,
    MeshFunction,
    MeshFunction1D,
)

__all__ = [
    "HaarFunction",
    "haar_values_1d",
    "tensor_haar",
    "haar_coefficient",
    "martingale_diff",
    "delta_level",
    "average_level",
    "square_function",
    "maximal",
    "maximal_1d",
    "SparseNode",
    "SparseCollection",
    "sparse_stopping",
]


# ---------------------------------------------------------------------------
# level-wise averaging and martingale differences
# ---------------------------------------------------------------------------


def _block_mean(values: np.ndarray, axis: int, k: int) -> np.ndarray:
    """Means over level-k intervals along ``axis`` (array dim shrinks to 2**k)."""
    n = values.shape[axis]
    w = n >> k
    shp = list(values.shape)
    shp[axis : axis + 1] = [1 << k, w]
    return values.reshape(shp).mean(axis=axis + 1)


def _upsample(values: np.ndarray, axis: int, n: int) -> np.ndarray:
    rep = n // values.shape[axis]
    return np.repeat(values, rep, axis=axis)


def average_level(f: MeshFunction, axis: int, k: int) -> np.ndarray:
    """E_k f along one axis: conditional expectation at level k, full shape."""
    n = f.domain.grid(axis).n
    ax = axis - 1
    return _upsample(_block_mean(f.values, ax, k), ax, n)


def delta_level(values: np.ndarray, axis0: int, k: int) -> np.ndarray:
    """Martingale difference at level k along numpy axis ``axis0`` (full shape)."""
    n = values.shape[axis0]
    fine = _upsample(_block_mean(values, axis0, k + 1), axis0, n)
    coarse = _upsample(_block_mean(values, axis0, k), axis0, n)
    return fine - coarse


def martingale_diff(
    f: MeshFunction, target: Union[DyadicInterval, DyadicRectangle]
) -> MeshFunction:
    """Delta_I f on one axis, or Delta_{IxJ} f = Delta_I(Delta_J f) on both."""
    if isinstance(target, DyadicRectangle):
        d1 = _localized_delta(f.values, 0, target.I)
        return MeshFunction(f.domain, _localized_delta(d1, 1, target.J))
    ax = target.axis - 1
    return MeshFunction(f.domain, _localized_delta(f.values, ax, target))


def _localized_delta(values: np.ndarray, axis0: int, interval: DyadicInterval) -> np.ndarray:
    if interval.level >= interval.grid.depth:
        raise GeometryError("martingale difference needs a level below the mesh depth")
    full = delta_level(values, axis0, interval.level)
    out = np.zeros_like(full)
    sl = [slice(None)] * values.ndim
    sl[axis0] = interval.cells
    out[tuple(sl)] = full[tuple(sl)]
    return out


# ---------------------------------------------------------------------------
# Haar functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HaarFunction:
    """h_I = (1_{I_left} - 1_{I_right}) / |I|^{1/2}, or the L^2-normalized indicator."""

    interval: DyadicInterval
    cancellative: bool = True

    def values(self) -> np.ndarray:
        return haar_values_1d(self.interval, self.cancellative)


def haar_values_1d(interval: DyadicInterval, cancellative: bool = True) -> np.ndarray:
    grid = interval.grid
    out = np.zeros(grid.n)
    scale = interval.length ** -0.5
    sl = interval.cells
    if not cancellative:
        out[sl] = scale
        return out
    if interval.level >= grid.depth:
        raise GeometryError("cancellative Haar needs a level below the mesh depth")
    half = interval.n_cells // 2
    out[sl.start : sl.start + half] = scale
    out[sl.start + half : sl.stop] = -scale
    return out


def tensor_haar(
    domain: BoxDomain,
    I: DyadicInterval,
    J: DyadicInterval,
    cancellative1: bool = True,
    cancellative2: bool = True,
) -> MeshFunction:
    v1 = haar_values_1d(I, cancellative1)
    v2 = haar_values_1d(J, cancellative2)
    return MeshFunction(domain, np.outer(v1, v2))


def haar_coefficient(f: MeshFunction, I: DyadicInterval, J: DyadicInterval) -> complex:
    h = tensor_haar(f.domain, I, J)
    return complex((f.values * h.values).sum() * f.domain.cell_measure)


# ---------------------------------------------------------------------------
# square functions
# ---------------------------------------------------------------------------


def square_function(f: MeshFunction, which: str = "S") -> MeshFunction:
    """Pointwise dyadic square function over in-box scales.

    "S" sums |Delta_{IxJ} f|^2 over all rectangle scales, "S1"/"S2" the
    one-parameter variants.
    """
    v = f.values
    L1, L2 = f.domain.axis1.depth, f.domain.axis2.depth
    acc = np.zeros(f.domain.shape)
    if which == "S":
        for k1 in range(L1):
            d1 = delta_level(v, 0, k1)
            for k2 in range(L2):
                acc += np.abs(delta_level(d1, 1, k2)) ** 2
    elif which == "S1":
        for k1 in range(L1):
            acc += np.abs(delta_level(v, 0, k1)) ** 2
    elif which == "S2":
        for k2 in range(L2):
            acc += np.abs(delta_level(v, 1, k2)) ** 2
    else:
        raise ValueError(f"unknown square function {which!r}")
    return MeshFunction(f.domain, np.sqrt(acc))


# ---------------------------------------------------------------------------
# maximal operators
# ---------------------------------------------------------------------------


def _axis_maximal(a: np.ndarray, axis0: int, alpha: float, lengths: list[float]) -> np.ndarray:
    n = a.shape[axis0]
    depth = int(math.log2(n))
    out = np.zeros_like(a)
    for k in range(depth + 1):
        avg = _upsample(_block_mean(a, axis0, k), axis0, n) * lengths[k] ** alpha
        np.maximum(out, avg, out=out)
    return out


def maximal(
    f: MeshFunction, which: str = "M_strong", alpha: float = 0.0, axis: Union[int, str, None] = None
) -> MeshFunction:
    """Dyadic maximal functions: per-axis, strong, and fractional variants.

    "M1"/"M2" maximize averages of |f| over dyadic intervals of one axis,
    "M_strong" over all dyadic rectangles, and "M_alpha" weights level-k
    averages by side**alpha (per-axis with d = 1, or over squares of a
    square box with d = 2 when ``axis="both"``).
    """
    a = np.abs(f.values)
    g1, g2 = f.domain.axis1, f.domain.axis2
    if which == "M1":
        return MeshFunction(f.domain, _axis_maximal(a, 0, 0.0, _lengths(g1)))
    if which == "M2":
        return MeshFunction(f.domain, _axis_maximal(a, 1, 0.0, _lengths(g2)))
    if which == "M_strong":
        out = np.zeros_like(a)
        for k1 in range(g1.depth + 1):
            m1 = _block_mean(a, 0, k1)
            for k2 in range(g2.depth + 1):
                blk = _upsample(_upsample(_block_mean(m1, 1, k2), 1, g2.n), 0, g1.n)
                np.maximum(out, blk, out=out)
        return MeshFunction(f.domain, out)
    if which == "M_alpha":
        if axis in (1, 2):
            if not (0.0 <= alpha < 1.0):
                raise ValueError(f"alpha must lie in [0, 1) on one axis, got {alpha}")
            g = f.domain.grid(axis)
            return MeshFunction(f.domain, _axis_maximal(a, axis - 1, alpha, _lengths(g)))
        if axis == "both":
            if not (0.0 <= alpha < 2.0):
                raise ValueError(f"alpha must lie in [0, 2) over squares, got {alpha}")
            _require_square(f.domain)
            out = np.zeros_like(a)
            for k in range(g1.depth + 1):
                blk = _block_mean(_block_mean(a, 0, k), 1, k) * g1.length_at(k) ** alpha
                np.maximum(out, _upsample(_upsample(blk, 1, g2.n), 0, g1.n), out=out)
            return MeshFunction(f.domain, out)
        raise ValueError("M_alpha needs axis 1, 2 or 'both'")
    raise ValueError(f"unknown maximal operator {which!r}")


def _lengths(grid: Grid1D) -> list[float]:
    return [grid.length_at(k) for k in range(grid.depth + 1)]


def maximal_1d(u: MeshFunction1D, alpha: float = 0.0) -> MeshFunction1D:
    if not (0.0 <= alpha < 1.0):
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    a = np.abs(u.values)
    return MeshFunction1D(u.grid, _axis_maximal(a, 0, alpha, _lengths(u.grid)))


def _require_square(domain: BoxDomain) -> None:
    if domain.axis1.depth != domain.axis2.depth or domain.axis1.extent != domain.axis2.extent:
        raise ValueError("square cube system needs equal per-axis depth and extent")


# ---------------------------------------------------------------------------
# stopping-time sparse decomposition
# ---------------------------------------------------------------------------


@dataclass
class SparseNode:
    """One stopping cube P with its piece f_P (stored over P's cells only)."""

    level: int
    index: tuple[int, ...]
    avg_abs: float
    mean: complex
    piece: np.ndarray
    e_mask: np.ndarray
    e_measure: float
    measure: float
    children: list["SparseNode"] = field(default_factory=list)

    @property
    def piece_sup(self) -> float:
        return float(np.abs(self.piece).max()) if self.piece.size else 0.0


class _CubeSystem:
    """Interval or square dyadic tree with |f| and f mean pyramids."""

    def __init__(self, values: np.ndarray, cell_measure: float, mode: str):
        self.mode = mode
        self.values = values
        self.cell_measure = cell_measure
        n = values.shape[0]
        self.depth = int(math.log2(n))
        self.ndim = 1 if mode == "interval" else 2
        self.abs_means = [None] * (self.depth + 1)
        self.means = [None] * (self.depth + 1)
        a = np.abs(values)
        for k in range(self.depth, -1, -1):
            if k == self.depth:
                am, mm = a, values
            else:
                am, mm = self._coarsen(self.abs_means[k + 1]), self._coarsen(self.means[k + 1])
            self.abs_means[k], self.means[k] = am, mm

    def _coarsen(self, arr: np.ndarray) -> np.ndarray:
        if self.ndim == 1:
            return 0.5 * (arr[0::2] + arr[1::2])
        return 0.25 * (arr[0::2, 0::2] + arr[0::2, 1::2] + arr[1::2, 0::2] + arr[1::2, 1::2])

    def children_of(self, level: int, index: tuple[int, ...]) -> list[tuple[int, tuple[int, ...]]]:
        if level >= self.depth:
            return []
        if self.ndim == 1:
            (i,) = index
            return [(level + 1, (2 * i,)), (level + 1, (2 * i + 1,))]
        i, j = index
        return [
            (level + 1, (2 * i + di, 2 * j + dj)) for di in (0, 1) for dj in (0, 1)
        ]

    def avg_abs(self, level: int, index: tuple[int, ...]) -> float:
        return float(self.abs_means[level][index])

    def mean(self, level: int, index: tuple[int, ...]) -> complex:
        return complex(self.means[level][index])

    def cube_slices(self, level: int, index: tuple[int, ...]) -> tuple[slice, ...]:
        w = 1 << (self.depth - level)
        return tuple(slice(i * w, (i + 1) * w) for i in index)

    def cube_measure(self, level: int) -> float:
        cells = (1 << (self.depth - level)) ** self.ndim
        return cells * self.cell_measure


@dataclass
class SparseCollection:
    """Stopping-time generations with pieces f_P, major subsets E_P, and sums."""

    mode: str
    shape: tuple[int, ...]
    cell_measure: float
    root_level: int
    root_index: tuple[int, ...]
    generations: list[list[SparseNode]]
    grid: Optional[Grid1D] = None
    domain: Optional[BoxDomain] = None

    def all_nodes(self) -> Iterable[SparseNode]:
        for gen in self.generations:
            yield from gen

    def node_count(self) -> int:
        return sum(len(g) for g in self.generations)

    def reconstruct(self) -> np.ndarray:
        depth = int(math.log2(self.shape[0]))
        out = np.zeros(self.shape, dtype=np.complex128)
        for node in self.all_nodes():
            w = 1 << (depth - node.level)
            sl = tuple(slice(i * w, (i + 1) * w) for i in node.index)
            out[sl] += node.piece
        return out

    def piece_sup_sum(self, s: float) -> np.ndarray:
        """Pointwise sum of ||f_P||_inf**s 1_P over all stopping cubes."""
        depth = int(math.log2(self.shape[0]))
        out = np.zeros(self.shape)
        for node in self.all_nodes():
            w = 1 << (depth - node.level)
            sl = tuple(slice(i * w, (i + 1) * w) for i in node.index)
            out[sl] += node.piece_sup**s
        return out

    def half_sparse_ok(self) -> bool:
        return all(n.e_measure >= 0.5 * n.measure for n in self.all_nodes())

    def intervals(self) -> list[DyadicInterval]:
        if self.grid is None:
            raise ValueError("interval list is only available for 1d collections")
        return [
            DyadicInterval(self.grid, 1, n.level, n.index[0]) for n in self.all_nodes()
        ]

    def to_tree_json(self) -> list[dict]:
        return [
            {
                "level": n.level,
                "index": list(n.index) if self.mode == "square" else n.index[0],
                "avg_abs": n.avg_abs,
                "piece_sup": n.piece_sup,
                "e_set_measure": n.e_measure,
            }
            for n in self.all_nodes()
        ]


def _stopping_children(
    sys: _CubeSystem, level: int, index: tuple[int, ...], threshold: float
) -> list[tuple[int, tuple[int, ...]]]:
    found: list[tuple[int, tuple[int, ...]]] = []
    stack = sys.children_of(level, index)
    while stack:
        lv, idx = stack.pop()
        if sys.avg_abs(lv, idx) > threshold:
            found.append((lv, idx))
        else:
            stack.extend(sys.children_of(lv, idx))
    return found


def _build_node(sys: _CubeSystem, level: int, index: tuple[int, ...]) -> SparseNode:
    threshold = 2.0 * sys.avg_abs(level, index)
    kids = _stopping_children(sys, level, index, threshold)
    child_nodes = [_build_node(sys, lv, idx) for lv, idx in kids]

    sl = sys.cube_slices(level, index)
    block = sys.values[sl].astype(np.complex128)
    w = 1 << (sys.depth - level)
    e_mask = np.ones(block.shape, dtype=bool)
    piece = block.copy()
    mean_p = sys.mean(level, index)
    piece -= mean_p
    for lv, idx in kids:
        # relative block of the child inside this cube
        wc = 1 << (sys.depth - lv)
        rel = tuple(
            slice(i * wc - b * w, i * wc - b * w + wc) for i, b in zip(idx, index)
        )
        e_mask[rel] = False
        piece[rel] = complex(sys.mean(lv, idx)) - mean_p

    e_measure = float(e_mask.sum()) * sys.cell_measure
    return SparseNode(
        level=level,
        index=index,
        avg_abs=sys.avg_abs(level, index),
        mean=mean_p,
        piece=piece,
        e_mask=e_mask,
        e_measure=e_measure,
        measure=sys.cube_measure(level),
        children=child_nodes,
    )


def sparse_stopping(
    f: Union[MeshFunction1D, MeshFunction],
    root: Union[DyadicInterval, DyadicRectangle, None] = None,
) -> SparseCollection:
    """Average-doubling stopping-time decomposition f = sum_P f_P.

    The stopping children of Q are the maximal dyadic P strictly inside Q with
    <|f|>_P > 2 <|f|>_Q; pieces are f_P = sum_{Pi Q = P} Delta_Q f.  Works on
    one axis (``MeshFunction1D``) or on a square product box treated with
    square cubes.  Requires supp(f) inside the root and zero mean.
    """
    if isinstance(f, MeshFunction1D):
        mode = "interval"
        values = f.values
        cell_measure = f.grid.h
        depth = f.grid.depth
        if root is None:
            root = DyadicInterval(f.grid, 1, 0, 0)
        root_level, root_index = root.level, (root.index,)
        root_slices = (root.cells,)
        grid, domain = f.grid, None
    else:
        _require_square(f.domain)
        mode = "square"
        values = f.values
        cell_measure = f.domain.cell_measure
        depth = f.domain.axis1.depth
        if root is None:
            root = f.domain.full_rectangle()
        if root.I.level != root.J.level:
            raise ValueError("square-mode root must have equal per-axis levels")
        root_level, root_index = root.I.level, (root.I.index, root.J.index)
        root_slices = root.cells
        grid, domain = None, f.domain

    outside = values.copy()
    outside[root_slices] = 0
    if np.any(outside != 0):
        raise ValueError("f must be supported inside the root cube")
    total = float(np.abs(values).sum()) * cell_measure
    if total > 0 and abs(values.sum() * cell_measure) > 1e-10 * total:
        raise ValueError("f must have zero mean on the root cube")

    sys = _CubeSystem(np.asarray(values, dtype=np.complex128), cell_measure, mode)
    root_node = _build_node(sys, root_level, root_index)

    generations: list[list[SparseNode]] = [[root_node]]
    while generations[-1]:
        nxt: list[SparseNode] = []
        for node in generations[-1]:
            nxt.extend(node.children)
        if not nxt:
            break
        generations.append(nxt)

    return SparseCollection(
        mode=mode,
        shape=values.shape,
        cell_measure=cell_measure,
        root_level=root_level,
        root_index=root_index,
        generations=generations,
        grid=grid,
        domain=domain,
    )
