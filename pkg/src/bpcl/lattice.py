"""Dyadic product geometry, mesh-sampled functions, mixed norms, oscillation.

Everything downstream runs on a uniform dyadic product mesh over a bounded
box.  Functions are sampled at cell centers and integrated by the midpoint
rule, which is exact for indicators of cell-aligned dyadic rectangles.
Intervals are half-open ``[a, b)``; pairings are bilinear (no conjugation).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Union

import numpy as np

__all__ = [
    "Grid1D",
    "BoxDomain",
    "DyadicInterval",
    "DyadicRectangle",
    "MeshFunction",
    "MeshFunction1D",
    "ExponentProfile",
    "GeometryError",
    "mixed_norm",
    "oscillation",
    "rectangle_mean",
    "reflect_rectangle",
    "inner_product",
    "write_mesh_csv",
    "read_mesh_csv",
    "read_mesh1d_csv",
]


class GeometryError(ValueError):
    """A dyadic object does not fit inside, or is not aligned with, its box."""


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid1D:
    """Uniform dyadic mesh of one axis: ``2**depth`` cells over [origin, origin+extent)."""

    origin: float
    extent: float
    depth: int

    def __post_init__(self) -> None:
        if not (self.extent > 0):
            raise ValueError(f"extent must be positive, got {self.extent}")
        if self.depth < 0:
            raise ValueError(f"depth must be >= 0, got {self.depth}")

    @property
    def n(self) -> int:
        return 1 << self.depth

    @property
    def h(self) -> float:
        """Cell width ``extent * 2**-depth``."""
        return self.extent / self.n

    def centers(self) -> np.ndarray:
        return self.origin + (np.arange(self.n) + 0.5) * self.h

    def length_at(self, level: int) -> float:
        return self.extent * 2.0 ** (-level)


@dataclass(frozen=True)
class BoxDomain:
    """Product box: one :class:`Grid1D` per axis, depths >= 1."""

    axis1: Grid1D
    axis2: Grid1D

    def __post_init__(self) -> None:
        if self.axis1.depth < 1 or self.axis2.depth < 1:
            raise ValueError("box depths must be >= 1 on both axes")

    @classmethod
    def square(cls, extent: float, depth: int, origin: float = 0.0) -> "BoxDomain":
        g = Grid1D(origin, extent, depth)
        return cls(g, g)

    def grid(self, axis: int) -> Grid1D:
        if axis == 1:
            return self.axis1
        if axis == 2:
            return self.axis2
        raise ValueError(f"axis must be 1 or 2, got {axis}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.axis1.n, self.axis2.n)

    @property
    def cell_measure(self) -> float:
        return self.axis1.h * self.axis2.h

    def interval(self, axis: int, level: int, index: int) -> "DyadicInterval":
        return DyadicInterval(self.grid(axis), axis, level, index)

    def rectangle(self, level1: int, index1: int, level2: int, index2: int) -> "DyadicRectangle":
        return DyadicRectangle(self.interval(1, level1, index1), self.interval(2, level2, index2))

    def full_rectangle(self) -> "DyadicRectangle":
        return self.rectangle(0, 0, 0, 0)


@dataclass(frozen=True)
class DyadicInterval:
    """Dyadic interval ``[a, b)`` at ``level`` (0 = whole axis), ``index`` in [0, 2**level)."""

    grid: Grid1D
    axis: int
    level: int
    index: int

    def __post_init__(self) -> None:
        if self.axis not in (1, 2):
            raise ValueError(f"axis must be 1 or 2, got {self.axis}")
        if self.level < 0 or self.level > self.grid.depth:
            raise GeometryError(
                f"interval level {self.level} outside mesh depth {self.grid.depth}"
            )
        if not (0 <= self.index < (1 << self.level)):
            raise GeometryError(
                f"interval index {self.index} out of range at level {self.level}"
            )

    @property
    def length(self) -> float:
        return self.grid.length_at(self.level)

    @property
    def a(self) -> float:
        return self.grid.origin + self.index * self.length

    @property
    def b(self) -> float:
        return self.a + self.length

    @property
    def center(self) -> float:
        return self.a + 0.5 * self.length

    @property
    def cells(self) -> slice:
        """Index slice of this interval in a mesh array along its axis."""
        w = 1 << (self.grid.depth - self.level)
        return slice(self.index * w, (self.index + 1) * w)

    @property
    def n_cells(self) -> int:
        return 1 << (self.grid.depth - self.level)

    def children(self) -> tuple["DyadicInterval", "DyadicInterval"]:
        if self.level >= self.grid.depth:
            raise GeometryError("cell-level interval has no children on this mesh")
        return (
            DyadicInterval(self.grid, self.axis, self.level + 1, 2 * self.index),
            DyadicInterval(self.grid, self.axis, self.level + 1, 2 * self.index + 1),
        )

    def parent(self) -> "DyadicInterval":
        if self.level == 0:
            raise GeometryError("top interval has no parent")
        return DyadicInterval(self.grid, self.axis, self.level - 1, self.index // 2)

    def contains(self, other: "DyadicInterval") -> bool:
        if other.level < self.level:
            return False
        return (other.index >> (other.level - self.level)) == self.index

    def centers(self) -> np.ndarray:
        return self.a + (np.arange(self.n_cells) + 0.5) * self.grid.h


@dataclass(frozen=True)
class DyadicRectangle:
    """Product ``I x J`` of one dyadic interval per axis."""

    I: DyadicInterval
    J: DyadicInterval

    def __post_init__(self) -> None:
        if self.I.axis != 1 or self.J.axis != 2:
            raise ValueError("rectangle needs an axis-1 and an axis-2 interval, in that order")

    @property
    def measure(self) -> float:
        return self.I.length * self.J.length

    @property
    def center(self) -> tuple[float, float]:
        return (self.I.center, self.J.center)

    @property
    def cells(self) -> tuple[slice, slice]:
        return (self.I.cells, self.J.cells)

    @property
    def n_cells(self) -> int:
        return self.I.n_cells * self.J.n_cells

    def key(self) -> tuple[int, int, int, int]:
        return (self.I.level, self.I.index, self.J.level, self.J.index)


class MeshFunction:
    """Complex scalar field sampled at the cell centers of a :class:`BoxDomain`.

    Immutable after construction; all operations return new instances.
    """

    __slots__ = ("domain", "values")

    def __init__(self, domain: BoxDomain, values: np.ndarray):
        values = np.array(values, dtype=np.complex128, order="C", copy=True)
        if values.shape != domain.shape:
            raise ValueError(f"values shape {values.shape} != mesh shape {domain.shape}")
        if not np.all(np.isfinite(values.view(np.float64))):
            raise ValueError("mesh function has non-finite sample values")
        values.flags.writeable = False
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("MeshFunction is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_callable(cls, domain: BoxDomain, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "MeshFunction":
        x1, x2 = np.meshgrid(domain.axis1.centers(), domain.axis2.centers(), indexing="ij")
        return cls(domain, np.broadcast_to(np.asarray(fn(x1, x2)), domain.shape))

    @classmethod
    def constant(cls, domain: BoxDomain, c: complex) -> "MeshFunction":
        return cls(domain, np.full(domain.shape, c, dtype=np.complex128))

    @classmethod
    def indicator(cls, domain: BoxDomain, rect: DyadicRectangle) -> "MeshFunction":
        vals = np.zeros(domain.shape, dtype=np.complex128)
        vals[rect.cells] = 1.0
        return cls(domain, vals)

    @classmethod
    def zeros(cls, domain: BoxDomain) -> "MeshFunction":
        return cls(domain, np.zeros(domain.shape, dtype=np.complex128))

    # -- quadrature ---------------------------------------------------------

    def integral(self) -> complex:
        return complex(self.values.sum() * self.domain.cell_measure)

    def abs_integral(self) -> float:
        return float(np.abs(self.values).sum() * self.domain.cell_measure)

    def sup_norm(self) -> float:
        return float(np.abs(self.values).max())

    def support_cells(self) -> np.ndarray:
        return self.values != 0

    # -- algebra -------------------------------------------------------------

    def _wrap(self, values: np.ndarray) -> "MeshFunction":
        return MeshFunction(self.domain, values)

    def __add__(self, other: "MeshFunction") -> "MeshFunction":
        return self._wrap(self.values + other.values)

    def __sub__(self, other: "MeshFunction") -> "MeshFunction":
        return self._wrap(self.values - other.values)

    def __neg__(self) -> "MeshFunction":
        return self._wrap(-self.values)

    def __mul__(self, other: Union["MeshFunction", complex]) -> "MeshFunction":
        if isinstance(other, MeshFunction):
            return self._wrap(self.values * other.values)
        return self._wrap(self.values * other)

    __rmul__ = __mul__

    def restrict(self, rect: DyadicRectangle) -> "MeshFunction":
        """Zero out everything outside ``rect``."""
        vals = np.zeros_like(self.values)
        vals[rect.cells] = self.values[rect.cells]
        return self._wrap(vals)


@dataclass(frozen=True)
class MeshFunction1D:
    """One-axis analogue of :class:`MeshFunction`, used by PV and fractional operators."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=np.complex128, order="C", copy=True)
        if vals.shape != (self.grid.n,):
            raise ValueError(f"values shape {vals.shape} != ({self.grid.n},)")
        if not np.all(np.isfinite(vals.view(np.float64))):
            raise ValueError("mesh function has non-finite sample values")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def integral(self) -> complex:
        return complex(self.values.sum() * self.grid.h)

    def sup_norm(self) -> float:
        return float(np.abs(self.values).max())

    def lp_norm(self, p: float) -> float:
        return float(_axis_norm(np.abs(self.values), p, self.grid.h, axis=0))


@dataclass(frozen=True)
class ExponentProfile:
    """Integrability exponents (p1, p2, q1, q2), all in (1, inf).

    ``alpha_i = d_i (1/p_i - 1/q_i)`` exists exactly when ``p_i < q_i`` and
    ``1/r_i = 1/q_i - 1/p_i`` exactly when ``p_i > q_i`` (here ``d_i = 1``).
    """

    p1: float
    p2: float
    q1: float
    q2: float
    d1: int = 1
    d2: int = 1

    def __post_init__(self) -> None:
        for name in ("p1", "p2", "q1", "q2"):
            v = getattr(self, name)
            if not (1.0 < v < math.inf):
                raise ValueError(f"{name} must lie in (1, inf), got {v}")

    def p(self, i: int) -> float:
        return (self.p1, self.p2)[i - 1]

    def q(self, i: int) -> float:
        return (self.q1, self.q2)[i - 1]

    def d(self, i: int) -> int:
        return (self.d1, self.d2)[i - 1]

    def alpha(self, i: int) -> Optional[float]:
        if self.p(i) < self.q(i):
            return self.d(i) * (1.0 / self.p(i) - 1.0 / self.q(i))
        return None

    def r(self, i: int) -> Optional[float]:
        if self.p(i) > self.q(i):
            return 1.0 / (1.0 / self.q(i) - 1.0 / self.p(i))
        return None

    @staticmethod
    def conjugate(p: float) -> float:
        if p == math.inf:
            return 1.0
        return p / (p - 1.0)


# ---------------------------------------------------------------------------
# quadrature functionals
# ---------------------------------------------------------------------------


def _axis_norm(a: np.ndarray, p: float, h: float, axis: int) -> np.ndarray:
    """L^p norm along one axis by midpoint quadrature; p = inf is the cell max."""
    if p == math.inf:
        return a.max(axis=axis)
    return (np.power(a, p).sum(axis=axis) * h) ** (1.0 / p)


def mixed_norm(f: MeshFunction, p1: float, p2: float) -> float:
    """Mixed norm: inner L^{p2} in x2, outer L^{p1} in x1; inf-exponents as maxima."""
    for p in (p1, p2):
        if not (1.0 <= p):
            raise ValueError(f"exponents must lie in [1, inf], got {p}")
    a = np.abs(f.values)
    inner = _axis_norm(a, p2, f.domain.axis2.h, axis=1)
    return float(_axis_norm(inner, p1, f.domain.axis1.h, axis=0))


def mixed_norm_swapped(f: MeshFunction, p2_outer: float, p1_inner: float) -> float:
    """Mixed norm with the opposite nesting: inner L^{p1} in x1, outer L^{p2} in x2."""
    a = np.abs(f.values)
    inner = _axis_norm(a, p1_inner, f.domain.axis1.h, axis=0)
    return float(_axis_norm(inner, p2_outer, f.domain.axis2.h, axis=0))


def inner_product(f: MeshFunction, g: MeshFunction) -> complex:
    """Bilinear pairing integral f*g (no conjugation), by midpoint quadrature."""
    return complex((f.values * g.values).sum() * f.domain.cell_measure)


def rectangle_mean(f: MeshFunction, rect: DyadicRectangle) -> complex:
    return complex(f.values[rect.cells].mean())


def oscillation(b: MeshFunction, rect: DyadicRectangle) -> float:
    """Mean oscillation over ``rect``: the average of |b - <b>_rect|."""
    block = b.values[rect.cells]
    return float(np.abs(block - block.mean()).mean())


def reflect_rectangle(rect: DyadicRectangle, A: float, kernel) -> DyadicRectangle:
    """Same-dimensions rectangle centred at the kernel's non-degeneracy witness.

    The witness is taken at radii ``(A*l(I), A*l(J))`` from the center of
    ``rect`` and snapped to the dyadic grid (exact whenever the witness offset
    is an integer number of cells, as for the tensor Hilbert rule with
    integer 2A).
    """
    if A < 3:
        raise ValueError(f"A must be >= 3, got {A}")
    wy1, wy2 = kernel.witness(rect.center[0], rect.center[1], A * rect.I.length, A * rect.J.length)
    out = []
    for interval, y in ((rect.I, wy1), (rect.J, wy2)):
        grid = interval.grid
        idx = int(round((y - grid.origin) / interval.length - 0.5))
        if not (0 <= idx < (1 << interval.level)):
            raise GeometryError(
                "reflected rectangle escapes the box; enlarge the domain "
                f"(axis {interval.axis}, witness center {y})"
            )
        out.append(DyadicInterval(grid, interval.axis, interval.level, idx))
    return DyadicRectangle(out[0], out[1])


# ---------------------------------------------------------------------------
# CSV serialization (see README for the format)
# ---------------------------------------------------------------------------

_HEADER = "axis1_cells,axis2_cells,origin1,origin2,extent1,extent2"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_mesh_csv(f: MeshFunction) -> str:
    d = f.domain
    lines = [_HEADER]
    lines.append(
        ",".join(
            [str(d.axis1.n), str(d.axis2.n)]
            + [_fmt(v) for v in (d.axis1.origin, d.axis2.origin, d.axis1.extent, d.axis2.extent)]
        )
    )
    for row in f.values:
        lines.append(",".join(f"{_fmt(v.real)}:{_fmt(v.imag)}" for v in row))
    return "\n".join(lines) + "\n"


def _parse_mesh_csv(text: str) -> tuple[int, int, float, float, float, float, np.ndarray]:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines or lines[0].strip() != _HEADER:
        raise ValueError("bad mesh CSV: missing header row")
    n1, n2, o1, o2, e1, e2 = lines[1].split(",")
    n1, n2 = int(n1), int(n2)
    if not (_is_power_of_two(n1) and _is_power_of_two(n2)):
        raise ValueError("cell counts must be powers of two")
    if len(lines) != 2 + n1:
        raise ValueError(f"expected {n1} value rows, got {len(lines) - 2}")
    vals = np.empty((n1, n2), dtype=np.complex128)
    for i, ln in enumerate(lines[2:]):
        parts = ln.split(",")
        if len(parts) != n2:
            raise ValueError(f"row {i} has {len(parts)} entries, expected {n2}")
        for j, pair in enumerate(parts):
            re, im = pair.split(":")
            vals[i, j] = complex(float(re), float(im))
    return n1, n2, float(o1), float(o2), float(e1), float(e2), vals


def read_mesh_csv(text: str) -> MeshFunction:
    n1, n2, o1, o2, e1, e2, vals = _parse_mesh_csv(text)
    domain = BoxDomain(
        Grid1D(o1, e1, int(math.log2(n1))), Grid1D(o2, e2, int(math.log2(n2)))
    )
    return MeshFunction(domain, vals)


def read_mesh1d_csv(text: str) -> MeshFunction1D:
    """Read a one-axis function: a mesh CSV with a single x2 cell."""
    n1, n2, o1, _, e1, _, vals = _parse_mesh_csv(text)
    if n2 != 1:
        raise ValueError("1d mesh CSV must have axis2_cells = 1")
    return MeshFunction1D(Grid1D(o1, e1, int(math.log2(n1))), vals[:, 0])


def write_mesh1d_csv(f: MeshFunction1D) -> str:
    lines = [_HEADER]
    lines.append(
        ",".join([str(f.grid.n), "1", _fmt(f.grid.origin), "0", _fmt(f.grid.extent), "1"])
    )
    for v in f.values:
        lines.append(f"{_fmt(v.real)}:{_fmt(v.imag)}")
    return "\n".join(lines) + "\n"


def all_rectangles(
    domain: BoxDomain, max_level1: Optional[int] = None, max_level2: Optional[int] = None
) -> Iterable[DyadicRectangle]:
    """Every in-box dyadic rectangle with per-axis levels up to the given caps."""
    m1 = domain.axis1.depth if max_level1 is None else min(max_level1, domain.axis1.depth)
    m2 = domain.axis2.depth if max_level2 is None else min(max_level2, domain.axis2.depth)
    for k1 in range(m1 + 1):
        for i1 in range(1 << k1):
            for k2 in range(m2 + 1):
                for i2 in range(1 << k2):
                    yield domain.rectangle(k1, i1, k2, i2)
