"""Off-support application of T, commutator bilinear forms, truncated PV,
and the one-parameter fractional integral.

T is only ever applied off-support here: every target sample point differs
from every source point in both coordinates separately, so no quadrature
node touches the singular set and no regularization choice can contaminate
the results.  The one exception is the truncated principal value used by the
tensor-form commutator representation, where the truncation window is
explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .kernels import KernelSpec
from .lattice import (
    BoxDomain,
    DyadicRectangle,
    MeshFunction,
    MeshFunction1D,
)

__all__ = [
    "TruncationSchedule",
    "SupportOverlapError",
    "HypothesisError",
    "apply_offsupport",
    "commutator_form",
    "truncated_pv_apply",
    "journe_commutator_form",
    "fractional_integral",
    "richardson",
    "hilbert_kernel_1d",
]

_CHUNK = 1 << 21  # max pairwise-matrix entries per block


class SupportOverlapError(ValueError):
    """Target and source supports share a coordinate in some axis."""


class HypothesisError(ValueError):
    """An operation's structural hypothesis on its inputs fails."""


@dataclass(frozen=True)
class TruncationSchedule:
    """PV truncation radii (default: one cell width) and Richardson depth count."""

    eps1: Optional[float] = None
    eps2: Optional[float] = None
    richardson_levels: int = 3

    def resolve(self, h: float, which: int) -> float:
        eps = self.eps1 if which == 1 else self.eps2
        if eps is None:
            return h
        if eps < h * (1 - 1e-12):
            raise ValueError(f"truncation eps {eps} below cell width {h}")
        return eps


def _support_index_sets(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    nz = values != 0
    return np.nonzero(nz.any(axis=1))[0], np.nonzero(nz.any(axis=0))[0]


def _check_separated(tmask: np.ndarray, src: np.ndarray, what: str) -> None:
    trows, tcols = _support_index_sets(tmask.astype(np.complex128))
    srows, scols = _support_index_sets(src)
    bad_rows = np.intersect1d(trows, srows)
    if bad_rows.size:
        raise SupportOverlapError(
            f"{what}: x1-cell {int(bad_rows[0])} appears in both target and source supports"
        )
    bad_cols = np.intersect1d(tcols, scols)
    if bad_cols.size:
        raise SupportOverlapError(
            f"{what}: x2-cell {int(bad_cols[0])} appears in both target and source supports"
        )


def _target_mask(domain: BoxDomain, target: Union[DyadicRectangle, np.ndarray]) -> np.ndarray:
    if isinstance(target, DyadicRectangle):
        mask = np.zeros(domain.shape, dtype=bool)
        mask[target.cells] = True
        return mask
    mask = np.asarray(target, dtype=bool)
    if mask.shape != domain.shape:
        raise ValueError("target mask shape does not match the mesh")
    return mask


def apply_offsupport(
    K: KernelSpec,
    g: MeshFunction,
    target: Union[DyadicRectangle, np.ndarray],
    adjoint: bool = False,
) -> MeshFunction:
    """Evaluate Tg (or T*g with ``adjoint=True``) on cells disjoint from supp(g).

    Tg(x) = integral K(x,y) g(y) dy; the adjoint applies K(y,x).  Targets
    and sources must be disjoint in both axes separately.
    """
    domain = g.domain
    mask = _target_mask(domain, target)
    _check_separated(mask, g.values, "apply_offsupport")

    out = np.zeros(domain.shape, dtype=np.complex128)
    si, sj = np.nonzero(g.values)
    if si.size == 0 or not mask.any():
        return MeshFunction(domain, out)
    c1, c2 = domain.axis1.centers(), domain.axis2.centers()
    sy1, sy2, sval = c1[si], c2[sj], g.values[si, sj]
    ti, tj = np.nonzero(mask)
    tx1, tx2 = c1[ti], c2[tj]

    step = max(1, _CHUNK // max(1, si.size))
    acc = np.empty(ti.size, dtype=np.complex128)
    for s in range(0, ti.size, step):
        e = min(s + step, ti.size)
        if adjoint:
            mat = K.evaluate(sy1[None, :], sy2[None, :], tx1[s:e, None], tx2[s:e, None])
        else:
            mat = K.evaluate(tx1[s:e, None], tx2[s:e, None], sy1[None, :], sy2[None, :])
        acc[s:e] = mat @ sval
    out[ti, tj] = acc * domain.cell_measure
    return MeshFunction(domain, out)


def commutator_form(b: MeshFunction, K: KernelSpec, f: MeshFunction, g: MeshFunction) -> complex:
    """The off-support commutator pairing <[b,T]f, g>.

    Double quadrature of (b(x)-b(y)) K(x,y) f(y) g(x) over supp(f) x supp(g),
    which must be separated in both axes.
    """
    domain = f.domain
    _check_separated(g.values != 0, f.values, "commutator_form")
    fi, fj = np.nonzero(f.values)
    gi, gj = np.nonzero(g.values)
    if fi.size == 0 or gi.size == 0:
        return 0.0 + 0.0j
    c1, c2 = domain.axis1.centers(), domain.axis2.centers()
    y1, y2, fv = c1[fi], c2[fj], f.values[fi, fj]
    bv_y = b.values[fi, fj]
    x1, x2, gv = c1[gi], c2[gj], g.values[gi, gj]
    bv_x = b.values[gi, gj]

    total = 0.0 + 0.0j
    step = max(1, _CHUNK // max(1, fi.size))
    for s in range(0, gi.size, step):
        e = min(s + step, gi.size)
        kmat = K.evaluate(x1[s:e, None], x2[s:e, None], y1[None, :], y2[None, :])
        diff = bv_x[s:e, None] - bv_y[None, :]
        total += (gv[s:e] @ (diff * kmat) @ fv)
    return complex(total * domain.cell_measure**2)


def hilbert_kernel_1d(amplitude: float = 1.0 / math.pi) -> Callable:
    """One-parameter Hilbert-type kernel a/(x - y), vectorized."""

    def k(x, y):
        return amplitude / (np.asarray(x) - y)

    return k


def truncated_pv_apply(
    k1d: Callable, u: MeshFunction1D, eps: Optional[float] = None
) -> MeshFunction1D:
    """Symmetrically truncated singular integral sum_{|x-y| >= eps} k(x,y) u(y) h.

    ``eps`` defaults to one cell width, in which case this is exactly the
    skip-diagonal sum (the boundary |x-y| = eps is included).
    """
    h = u.grid.h
    if eps is None:
        eps = h
    if eps < h * (1 - 1e-12):
        raise ValueError(f"eps {eps} below cell width {h}: no sub-cell truncation")
    c = u.grid.centers()
    gap = np.abs(c[:, None] - c[None, :])
    window = gap >= eps * (1 - 1e-12)
    safe_y = np.where(window, c[None, :], c[:, None] + 1.0)
    kv = np.asarray(k1d(c[:, None], safe_y), dtype=np.complex128)
    out = np.where(window, kv, 0.0) @ u.values * h
    return MeshFunction1D(u.grid, out)


def _slice_constancy_defect(values: np.ndarray) -> float:
    means = values.mean(axis=1, keepdims=True)
    return float(np.abs(values - means).max())


def journe_commutator_form(
    b: MeshFunction,
    K: KernelSpec,
    f: MeshFunction,
    g: MeshFunction,
    schedule: Optional[TruncationSchedule] = None,
) -> complex:
    """<[b,T]f, g> through the one-parameter kernel representation.

    Requires a tensor-form kernel and a symbol constant on x1-slices
    (b(x1, .) constant for each x1): the pairing collapses to an x1 double
    integral of (b(x1)-b(y1)) k1(x1,y1) <T2 f(y1,.), g(x1,.)>, with the inner
    operator applied as a truncated PV in x2 and the x1 diagonal skipped.
    """
    if K.factors is None:
        raise ValueError("journe_commutator_form needs a tensor-form kernel")
    schedule = schedule or TruncationSchedule()
    domain = b.domain
    scale = max(b.sup_norm(), 1.0)
    if _slice_constancy_defect(b.values) > 1e-12 * scale:
        raise HypothesisError("b varies within x1-slices beyond tolerance")

    k1, k2 = K.factors
    h1, h2 = domain.axis1.h, domain.axis2.h
    c1, c2 = domain.axis1.centers(), domain.axis2.centers()
    eps2 = schedule.resolve(h2, 2)

    gap2 = np.abs(c2[:, None] - c2[None, :])
    win2 = gap2 >= eps2 * (1 - 1e-12)
    m2 = np.where(win2, k2(c2[:, None], np.where(win2, c2[None, :], c2[:, None] + 1.0)), 0.0)
    # U[y1, x2] = (T2 f(y1, .))(x2), truncated PV in x2
    U = f.values @ m2.T * h2
    # P[y1, x1] = <U(y1, .), g(x1, .)>
    P = U @ g.values.T * h2

    b1 = b.values[:, 0]
    off = ~np.eye(domain.axis1.n, dtype=bool)
    d1 = np.where(off, k1(c1[:, None], np.where(off, c1[None, :], c1[:, None] + 1.0)), 0.0)
    core = (b1[:, None] - b1[None, :]) * d1  # indexed [x1, y1]
    return complex((core * P.T).sum() * h1 * h1)


def fractional_integral(u: MeshFunction1D, alpha: float) -> MeshFunction1D:
    """Riesz-type potential I_alpha u(x) = integral |x-y|^{alpha-1} u(y) dy.

    Skip-diagonal midpoint quadrature plus the same-cell closed form
    integral_{|t|<h/2} |t|^{alpha-1} dt = 2 (h/2)^alpha / alpha.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    h = u.grid.h
    n = u.grid.n
    # translation-invariant kernel over index gaps: midpoint off the diagonal,
    # exact same-cell value at gap 0
    gaps = np.abs(np.arange(-(n - 1), n)) * h
    ker = np.where(gaps > 0, np.where(gaps > 0, gaps, 1.0) ** (alpha - 1.0) * h, 0.0)
    ker[n - 1] = 2.0 * (h / 2.0) ** alpha / alpha
    full = np.convolve(u.values, ker, mode="full")
    return MeshFunction1D(u.grid, full[n - 1 : 2 * n - 1])


def richardson(values: Sequence[complex], order: int = 2) -> complex:
    """Extrapolate a sequence of quadrature values at successive mesh halvings.

    Romberg-style tableau assuming an error expansion in powers of h**order.
    """
    t = [list(map(complex, values))]
    k = len(values)
    for j in range(1, k):
        fac = 2.0 ** (order * j)
        prev = t[-1]
        t.append([(fac * prev[i + 1] - prev[i]) / (fac - 1.0) for i in range(len(prev) - 1)])
    return t[-1][0]
