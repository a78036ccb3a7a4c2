"""Symbol functionals: little bmo, Hölder seminorms, infimum-over-constants
mixed norms, A_p characteristics, Bloom bmo, off-support commutator norms,
and the sparse oscillation functionals.

All sup-type outputs are certified lower bounds: rectangle scans are
exhaustive at mesh resolution, and the bilinear sups over unit balls use
alternating phase maximization, each half-step of which is an exact
maximization (so the objective is monotone and the final value is attained
by explicit functions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .dyadic import SparseCollection, sparse_stopping, _block_mean, _upsample
from .kernels import KernelSpec
from .lattice import (
    BoxDomain,
    DyadicInterval,
    DyadicRectangle,
    ExponentProfile,
    GeometryError,
    MeshFunction,
    MeshFunction1D,
    mixed_norm,
    mixed_norm_swapped,
    oscillation,
    reflect_rectangle,
)

__all__ = [
    "WeightPair",
    "OffSupportConfig",
    "OffSupportEstimate",
    "FamilyEntry",
    "NumericalError",
    "little_bmo",
    "holder_seminorm",
    "inf_const_mixed_norm",
    "inf_const_lr_1d",
    "ap_characteristic",
    "bloom_bmo",
    "offsupport_norm",
    "offsupport_norm_weighted",
    "offsupport_norm_sigma",
    "sparse_cross_family",
    "double_sparse_family",
    "double_sparse_osc_functional",
    "sparse_osc_sup",
    "commutator_pair_matrix",
    "alternating_sup",
    "admissible_reflected_pairs",
    "oscillation_table",
]

NORM_SPECS = ("Linf1_Lr2", "Linf2_Lr1", "Lr1_Linf2", "Lr1_Lr2", "Lr")


class NumericalError(RuntimeError):
    """Iterative minimization failed to converge; carries the best iterate."""

    def __init__(self, message: str, best: complex, value: float):
        super().__init__(message)
        self.best = best
        self.value = value


# ---------------------------------------------------------------------------
# rectangle scans
# ---------------------------------------------------------------------------


def oscillation_table(values: np.ndarray, k1: int, k2: int) -> np.ndarray:
    """osc(b, R) for every dyadic rectangle at level pair (k1, k2)."""
    n1, n2 = values.shape
    m = _upsample(_upsample(_block_mean(_block_mean(values, 0, k1), 1, k2), 1, n2), 0, n1)
    return _block_mean(_block_mean(np.abs(values - m), 0, k1), 1, k2)


def _mean_table(values: np.ndarray, k1: int, k2: int) -> np.ndarray:
    return _block_mean(_block_mean(values, 0, k1), 1, k2)


def little_bmo(b: MeshFunction) -> float:
    """sup over all in-box dyadic rectangles of the mean oscillation."""
    best = 0.0
    L1, L2 = b.domain.axis1.depth, b.domain.axis2.depth
    for k1 in range(L1 + 1):
        for k2 in range(L2 + 1):
            best = max(best, float(oscillation_table(b.values, k1, k2).max()))
    return best


def holder_seminorm(b: MeshFunction, alpha: float, axis: int) -> float:
    """sup over same-slice cell-center pairs of |b(u)-b(v)| / |u-v|^alpha."""
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    vals = b.values if axis == 2 else b.values.T
    h = b.domain.grid(axis).h
    n = vals.shape[1]
    best = 0.0
    for off in range(1, n):
        diff = np.abs(vals[:, off:] - vals[:, :-off]).max(initial=0.0)
        best = max(best, float(diff) / (off * h) ** alpha)
    return best


def ap_characteristic(mu: MeshFunction, p: float) -> float:
    """Bi-parameter A_p characteristic over in-box dyadic rectangles."""
    if not (1.0 < p < math.inf):
        raise ValueError(f"p must lie in (1, inf), got {p}")
    w = np.real(mu.values)
    if np.any(w <= 0):
        raise ValueError("weight must be strictly positive")
    pc = p / (p - 1.0)
    dual = w ** (-pc / p)
    best = 0.0
    L1, L2 = mu.domain.axis1.depth, mu.domain.axis2.depth
    for k1 in range(L1 + 1):
        for k2 in range(L2 + 1):
            t = _mean_table(w, k1, k2) * _mean_table(dual, k1, k2) ** (p / pc)
            best = max(best, float(t.max()))
    return best


def bloom_bmo(b: MeshFunction, nu: MeshFunction) -> float:
    """sup_R (1/nu(R)) integral_R |b - <b>_R|."""
    w = np.real(nu.values)
    if np.any(w <= 0):
        raise ValueError("nu must be strictly positive")
    best = 0.0
    L1, L2 = b.domain.axis1.depth, b.domain.axis2.depth
    for k1 in range(L1 + 1):
        for k2 in range(L2 + 1):
            ratio = oscillation_table(b.values, k1, k2) / _mean_table(w, k1, k2)
            best = max(best, float(ratio.max()))
    return best


@dataclass(frozen=True)
class WeightPair:
    """Two A_p weights with the derived Bloom weight nu = (mu/lambda)^{1/p}."""

    mu: MeshFunction
    lam: MeshFunction
    p: float

    def __post_init__(self) -> None:
        if np.any(np.real(self.mu.values) <= 0) or np.any(np.real(self.lam.values) <= 0):
            raise ValueError("weights must be strictly positive")

    @property
    def nu(self) -> MeshFunction:
        vals = (np.real(self.mu.values) / np.real(self.lam.values)) ** (1.0 / self.p)
        return MeshFunction(self.mu.domain, vals)


# ---------------------------------------------------------------------------
# infimum over constants
# ---------------------------------------------------------------------------


def _golden_min(fn, lo: float, hi: float, tol: float = 1e-8, max_iter: int = 200):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    it = 0
    while (b - a) > tol and it < max_iter:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
        it += 1
    x = (a + b) / 2.0
    return x, fn(x), it < max_iter


def _norm_for_spec(f: MeshFunction, spec: str, r1, r2, r) -> float:
    if spec == "Linf1_Lr2":
        return mixed_norm(f, math.inf, r2)
    if spec == "Linf2_Lr1":
        return mixed_norm_swapped(f, math.inf, r1)
    if spec == "Lr1_Linf2":
        return mixed_norm(f, r1, math.inf)
    if spec == "Lr1_Lr2":
        return mixed_norm(f, r1, r2)
    if spec == "Lr":
        return mixed_norm(f, r, r)
    raise ValueError(f"unknown norm spec {spec!r}; use one of {NORM_SPECS}")


def inf_const_mixed_norm(
    b: MeshFunction,
    spec: str,
    r1: Optional[float] = None,
    r2: Optional[float] = None,
    r: Optional[float] = None,
    tol: float = 1e-8,
) -> tuple[float, complex]:
    """Minimize ||b - c|| over complex constants c for the requested norm.

    The objective is convex in c; coordinate-wise golden-section on
    (Re c, Im c) over the hull of b's values converges to ``tol``.
    """
    for name, val in (("r1", r1), ("r2", r2), ("r", r)):
        if val is not None and not (1.0 < val < math.inf):
            raise ValueError(f"{name} must lie in (1, inf), got {val}")

    def objective(c: complex) -> float:
        return _norm_for_spec(MeshFunction(b.domain, b.values - c), spec, r1, r2, r)

    re_lo, re_hi = float(b.values.real.min()), float(b.values.real.max())
    im_lo, im_hi = float(b.values.imag.min()), float(b.values.imag.max())
    cur = complex((re_lo + re_hi) / 2.0, (im_lo + im_hi) / 2.0)
    obj = objective(cur)
    for _ in range(100):
        prev, prev_obj = cur, obj
        re, _, _ = _golden_min(lambda t: objective(complex(t, cur.imag)), re_lo, re_hi, tol)
        cur = complex(re, cur.imag)
        if im_hi - im_lo > tol:
            im, _, _ = _golden_min(lambda t: objective(complex(cur.real, t)), im_lo, im_hi, tol)
            cur = complex(cur.real, im)
        obj = objective(cur)
        # near a flat or polygonal minimum the argmin may wander while the
        # objective has converged, so stall on either
        if abs(cur - prev) <= tol or prev_obj - obj <= tol * max(1.0, obj):
            break
    else:
        raise NumericalError("constant minimization stalled", cur, objective(cur))
    return obj, cur


def inf_const_lr_1d(u: MeshFunction1D, r: float, tol: float = 1e-8) -> tuple[float, complex]:
    """inf over constants of the one-axis L^r norm of u - c."""

    def objective(c: complex) -> float:
        return float((np.abs(u.values - c) ** r).sum() * u.grid.h) ** (1.0 / r)

    re_lo, re_hi = float(u.values.real.min()), float(u.values.real.max())
    im_lo, im_hi = float(u.values.imag.min()), float(u.values.imag.max())
    cur = complex((re_lo + re_hi) / 2.0, (im_lo + im_hi) / 2.0)
    for _ in range(40):
        prev = cur
        re, _, _ = _golden_min(lambda t: objective(complex(t, cur.imag)), re_lo, re_hi, tol)
        cur = complex(re, cur.imag)
        if im_hi - im_lo > tol:
            im, _, _ = _golden_min(lambda t: objective(complex(cur.real, t)), im_lo, im_hi, tol)
            cur = complex(cur.real, im)
        if abs(cur - prev) <= tol:
            break
    return objective(cur), cur


# ---------------------------------------------------------------------------
# off-support norms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OffSupportConfig:
    """Rectangle sample set and alternating-maximization budget."""

    A: float = 8.0
    rectangles: Optional[Sequence[DyadicRectangle]] = None
    max_level1: Optional[int] = None
    max_level2: Optional[int] = None
    max_rectangles: int = 64
    iter_cap: int = 50
    stall_tol: float = 1e-10
    extra_starts: int = 1
    seed: int = 7

    def __post_init__(self) -> None:
        if self.A < 3:
            raise ValueError(f"A must be >= 3, got {self.A}")


@dataclass(frozen=True)
class OffSupportEstimate:
    value: float
    best_rectangle: Optional[tuple[int, int, int, int]]
    stalled: bool
    samples: list


def admissible_reflected_pairs(
    domain: BoxDomain, K: KernelSpec, cfg: OffSupportConfig
) -> list[tuple[DyadicRectangle, DyadicRectangle]]:
    """Every sampled rectangle together with its in-box reflection.

    Enumerates dyadic rectangles up to the configured level caps, keeps those
    whose reflection fits inside the box, and thins deterministically to the
    rectangle budget.
    """
    if cfg.rectangles is not None:
        return [(R, reflect_rectangle(R, cfg.A, K)) for R in cfg.rectangles]
    L1 = domain.axis1.depth if cfg.max_level1 is None else min(cfg.max_level1, domain.axis1.depth)
    L2 = domain.axis2.depth if cfg.max_level2 is None else min(cfg.max_level2, domain.axis2.depth)
    pairs = []
    for k1 in range(L1 + 1):
        for k2 in range(L2 + 1):
            for m1 in range(1 << k1):
                for m2 in range(1 << k2):
                    R = domain.rectangle(k1, m1, k2, m2)
                    try:
                        pairs.append((R, reflect_rectangle(R, cfg.A, K)))
                    except GeometryError:
                        continue
    if len(pairs) > cfg.max_rectangles:
        stride = -(-len(pairs) // cfg.max_rectangles)
        pairs = pairs[::stride]
    return pairs


def commutator_pair_matrix(
    b: MeshFunction, K: KernelSpec, rect: DyadicRectangle, refl: DyadicRectangle
) -> np.ndarray:
    """W[x, y] = (b(x)-b(y)) K(x,y) dxdy over x in refl, y in rect (flattened)."""
    domain = b.domain
    c1, c2 = domain.axis1.centers(), domain.axis2.centers()
    yi = np.repeat(np.arange(rect.I.cells.start, rect.I.cells.stop), rect.J.n_cells)
    yj = np.tile(np.arange(rect.J.cells.start, rect.J.cells.stop), rect.I.n_cells)
    xi = np.repeat(np.arange(refl.I.cells.start, refl.I.cells.stop), refl.J.n_cells)
    xj = np.tile(np.arange(refl.J.cells.start, refl.J.cells.stop), refl.I.n_cells)
    kmat = K.evaluate(c1[xi][:, None], c2[xj][:, None], c1[yi][None, :], c2[yj][None, :])
    diff = b.values[xi, xj][:, None] - b.values[yi, yj][None, :]
    return diff * kmat * domain.cell_measure**2


def alternating_sup(
    W: np.ndarray,
    iter_cap: int = 50,
    stall_tol: float = 1e-10,
    extra_starts: int = 1,
    seed: int = 7,
) -> tuple[float, bool]:
    """sup over ||f||_inf, ||g||_inf <= 1 of |g^T W f| by alternating phase steps.

    Each half-step is an exact maximization (unimodular phase alignment), so
    the objective is nondecreasing; the result is a certified lower bound on
    the true sup.  Returns (value, hit_iteration_cap).
    """
    rng = np.random.default_rng(seed)
    nx, ny = W.shape
    starts = [np.ones(nx, dtype=np.complex128)]
    rows = W.sum(axis=1)
    mag = np.abs(rows)
    starts.append(np.where(mag > 0, np.conj(rows) / np.where(mag > 0, mag, 1.0), 1.0))
    for _ in range(extra_starts):
        starts.append(np.exp(2j * np.pi * rng.uniform(size=nx)))

    best, stalled = 0.0, False
    for g in starts:
        obj = -1.0
        for _ in range(iter_cap):
            F = g @ W
            magF = np.abs(F)
            f = np.where(magF > 0, np.conj(F) / np.where(magF > 0, magF, 1.0), 0.0)
            G = W @ f
            magG = np.abs(G)
            g = np.where(magG > 0, np.conj(G) / np.where(magG > 0, magG, 1.0), 0.0)
            new_obj = float(magG.sum())
            if new_obj - obj <= stall_tol * max(1.0, new_obj):
                obj = new_obj
                break
            obj = new_obj
        else:
            stalled = True
        best = max(best, obj)
    return best, stalled


def _pair_normalization(profile: ExponentProfile, rect: DyadicRectangle) -> float:
    q1c = ExponentProfile.conjugate(profile.q1)
    q2c = ExponentProfile.conjugate(profile.q2)
    return rect.I.length ** (1.0 / profile.p1 + 1.0 / q1c) * rect.J.length ** (
        1.0 / profile.p2 + 1.0 / q2c
    )


def offsupport_norm(
    b: MeshFunction,
    K: KernelSpec,
    profile: ExponentProfile,
    cfg: Optional[OffSupportConfig] = None,
) -> OffSupportEstimate:
    """Estimate of the off-support commutator norm: a sup over separated
    rectangle pairs of the normalized bilinear form, maximized over unit-ball
    functions by alternating phase alignment."""
    cfg = cfg or OffSupportConfig()
    pairs = admissible_reflected_pairs(b.domain, K, cfg)
    if not pairs:
        raise ValueError("no admissible rectangles; shrink levels or enlarge the box")
    best, best_key, any_stall, samples = 0.0, None, False, []
    for R, Rt in pairs:
        W = commutator_pair_matrix(b, K, R, Rt)
        sup, stalled = alternating_sup(W, cfg.iter_cap, cfg.stall_tol, cfg.extra_starts, cfg.seed)
        val = sup / _pair_normalization(profile, R)
        samples.append((R.key(), val))
        any_stall |= stalled
        if val > best:
            best, best_key = val, R.key()
    return OffSupportEstimate(best, best_key, any_stall, samples)


def offsupport_norm_weighted(
    b: MeshFunction,
    K: KernelSpec,
    p: float,
    weights: WeightPair,
    cfg: Optional[OffSupportConfig] = None,
) -> OffSupportEstimate:
    """Bloom variant: normalization mu(R)^{1/p} [lambda^{-p'/p}(R~)]^{1/p'}."""
    cfg = cfg or OffSupportConfig()
    pairs = admissible_reflected_pairs(b.domain, K, cfg)
    pc = p / (p - 1.0)
    mu = np.real(weights.mu.values)
    lam_dual = np.real(weights.lam.values) ** (-pc / p)
    cm = b.domain.cell_measure
    best, best_key, any_stall, samples = 0.0, None, False, []
    for R, Rt in pairs:
        W = commutator_pair_matrix(b, K, R, Rt)
        sup, stalled = alternating_sup(W, cfg.iter_cap, cfg.stall_tol, cfg.extra_starts, cfg.seed)
        norm = (mu[R.cells].sum() * cm) ** (1.0 / p) * (lam_dual[Rt.cells].sum() * cm) ** (1.0 / pc)
        val = sup / norm
        samples.append((R.key(), val))
        any_stall |= stalled
        if val > best:
            best, best_key = val, R.key()
    return OffSupportEstimate(best, best_key, any_stall, samples)


# ---------------------------------------------------------------------------
# finite-family off-support norm
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FamilyEntry:
    """One rectangle of a finite family with sup bounds for its pair of functions."""

    rect: DyadicRectangle
    f_bound: float = 1.0
    g_bound: float = 1.0


def offsupport_norm_sigma(
    b: MeshFunction,
    K: KernelSpec,
    profile: ExponentProfile,
    families: Sequence[Sequence[FamilyEntry]],
    cfg: Optional[OffSupportConfig] = None,
) -> tuple[float, list[float]]:
    """Finite-family off-support functional with mixed-norm normalization.

    Each term's bilinear sup is maximized independently (the numerator is a
    sum of absolute values, so this is a certified lower-bound relaxation of
    the coupled sup).  Returns (max over families, per-family values).
    """
    cfg = cfg or OffSupportConfig()
    if not families or any(len(fam) == 0 for fam in families):
        raise ValueError("families must be non-empty")
    q1c = ExponentProfile.conjugate(profile.q1)
    q2c = ExponentProfile.conjugate(profile.q2)
    per_family = []
    for fam in families:
        num = 0.0
        find = np.zeros(b.domain.shape)
        gind = np.zeros(b.domain.shape)
        for entry in fam:
            R = entry.rect
            Rt = reflect_rectangle(R, cfg.A, K)
            W = commutator_pair_matrix(b, K, R, Rt)
            sup, _ = alternating_sup(W, cfg.iter_cap, cfg.stall_tol, cfg.extra_starts, cfg.seed)
            num += entry.f_bound * entry.g_bound * sup
            find[R.cells] += entry.f_bound
            gind[Rt.cells] += entry.g_bound
        den = mixed_norm(MeshFunction(b.domain, find), profile.p1, profile.p2) * mixed_norm(
            MeshFunction(b.domain, gind), q1c, q2c
        )
        per_family.append(num / den)
    return max(per_family), per_family


def _support_root(u: MeshFunction1D) -> DyadicInterval:
    """Smallest dyadic interval containing the support of u."""
    nz = np.nonzero(u.values)[0]
    if nz.size == 0:
        return DyadicInterval(u.grid, 2, 0, 0)
    lo, hi = int(nz[0]), int(nz[-1])
    level, index = u.grid.depth, lo
    while level > 0 and (hi >> (u.grid.depth - level)) != index:
        level -= 1
        index = lo >> (u.grid.depth - level)
    return DyadicInterval(u.grid, 2, level, index)


def sparse_cross_family(
    domain: BoxDomain,
    u2: MeshFunction1D,
    I: DyadicInterval,
    profile: ExponentProfile,
) -> list[FamilyEntry]:
    """Default family: the x2 stopping collection of u2 crossed with a fixed I.

    Mirrors the lower-bound construction for the p1 = q1, p2 > q2 cell; the
    weights split ||piece||_inf across the two normalization sides via
    r2'/p2 + r2'/q2' = 1.
    """
    r2 = profile.r(2)
    if r2 is None:
        raise ValueError("sparse cross families need p2 > q2")
    r2c = ExponentProfile.conjugate(r2)
    q2c = ExponentProfile.conjugate(profile.q2)
    col = sparse_stopping(u2, _support_root(u2))
    entries = []
    for node in col.all_nodes():
        w = node.piece_sup
        if w <= 0:
            continue
        P = DyadicInterval(u2.grid, 2, node.level, node.index[0])
        entries.append(
            FamilyEntry(
                rect=DyadicRectangle(I, P),
                f_bound=w ** (r2c / profile.p2),
                g_bound=w ** (r2c / q2c),
            )
        )
    if not entries:
        raise ValueError("stopping collection produced no usable rectangles")
    return entries


def double_sparse_family(
    col1: SparseCollection,
    lam1: Sequence[float],
    col2: SparseCollection,
    lam2: Sequence[float],
    profile: ExponentProfile,
    domain: BoxDomain,
) -> list[FamilyEntry]:
    """The family taming the double-sparse functional: all I1 x I2 rectangles
    with the coefficient split lam^{r'/p} / lam^{r'/q'} on the two sides."""
    r1, r2 = profile.r(1), profile.r(2)
    if r1 is None or r2 is None:
        raise ValueError("double sparse families need p_i > q_i on both axes")
    r1c, r2c = ExponentProfile.conjugate(r1), ExponentProfile.conjugate(r2)
    q1c, q2c = ExponentProfile.conjugate(profile.q1), ExponentProfile.conjugate(profile.q2)
    entries = []
    for l1, n1 in zip(lam1, col1.all_nodes()):
        for l2, n2 in zip(lam2, col2.all_nodes()):
            I = DyadicInterval(domain.axis1, 1, n1.level, n1.index[0])
            J = DyadicInterval(domain.axis2, 2, n2.level, n2.index[0])
            entries.append(
                FamilyEntry(
                    rect=DyadicRectangle(I, J),
                    f_bound=l1 ** (r1c / profile.p1) * l2 ** (r2c / profile.p2),
                    g_bound=l1 ** (r1c / q1c) * l2 ** (r2c / q2c),
                )
            )
    return entries


# ---------------------------------------------------------------------------
# sparse oscillation functionals
# ---------------------------------------------------------------------------


def _osc_1d(values: np.ndarray, h: float, level: int, index: int) -> float:
    n = values.shape[0]
    w = n >> level
    block = values[index * w : (index + 1) * w]
    return float(np.abs(block - block.mean()).mean())


def double_sparse_osc_functional(
    b: MeshFunction,
    col1: SparseCollection,
    lam1: Sequence[float],
    col2: SparseCollection,
    lam2: Sequence[float],
    r1: float,
    r2: float,
) -> float:
    """sum_{I1, I2} lam_{I1} lam_{I2} |I1| |I2| osc(b, I1 x I2).

    Validates the per-axis normalization sum lam^{r_i'} |I_i| <= 1 and the
    half-sparseness of both collections.
    """
    for col, lam, r in ((col1, lam1, r1), (col2, lam2, r2)):
        if col.mode != "interval":
            raise ValueError("double sparse functional needs per-axis interval collections")
        if not col.half_sparse_ok():
            raise ValueError("collection is not 1/2-sparse")
        nodes = list(col.all_nodes())
        if len(lam) != len(nodes):
            raise ValueError("one coefficient per collection node required")
        rc = ExponentProfile.conjugate(r)
        total = sum(
            l**rc * col.grid.length_at(n.level) for l, n in zip(lam, nodes)
        )
        if total > 1.0 + 1e-9:
            raise ValueError(f"coefficient normalization violated: {total} > 1")

    g1, g2 = col1.grid, col2.grid
    value = 0.0
    for l1, n1 in zip(lam1, col1.all_nodes()):
        w1 = g1.length_at(n1.level)
        for l2, n2 in zip(lam2, col2.all_nodes()):
            I = DyadicInterval(b.domain.axis1, 1, n1.level, n1.index[0])
            J = DyadicInterval(b.domain.axis2, 2, n2.level, n2.index[0])
            value += l1 * l2 * w1 * g2.length_at(n2.level) * oscillation(b, DyadicRectangle(I, J))
    return value


def _collection_osc_value(oscs: np.ndarray, measures: np.ndarray, r: float) -> float:
    # Hoelder-extremal coefficients give (sum |Q| osc^r)^{1/r} for a fixed collection
    return float((measures * oscs**r).sum() ** (1.0 / r))


def sparse_osc_sup(u: Union[MeshFunction1D, MeshFunction], r: float) -> float:
    """sup over stopping-generated 1/2-sparse candidates of sum lam |Q| osc(b,Q)
    with the coefficients optimized in closed form.

    Candidates: singletons, per-level disjoint families, and the stopping
    collection of the recentred symbol.  For a fixed collection the optimal
    normalized coefficients are lam_Q ~ osc(b,Q)^{r-1}, giving the value
    (sum_Q |Q| osc(b,Q)^r)^{1/r}.
    """
    if not (1.0 < r < math.inf):
        raise ValueError(f"r must lie in (1, inf), got {r}")
    if isinstance(u, MeshFunction1D):
        values = u.values
        depth, ndim = u.grid.depth, 1
        cube_measure = [u.grid.length_at(k) for k in range(depth + 1)]

        def osc_table(k):
            w = values.shape[0] >> k
            blocks = values.reshape(1 << k, w)
            return np.abs(blocks - blocks.mean(axis=1, keepdims=True)).mean(axis=1)

    else:
        from .dyadic import _require_square

        _require_square(u.domain)
        values = u.values
        depth, ndim = u.domain.axis1.depth, 2
        cube_measure = [u.domain.axis1.length_at(k) ** 2 for k in range(depth + 1)]

        def osc_table(k):
            return oscillation_table(values, k, k).ravel()

    best = 0.0
    per_level = []
    for k in range(depth + 1):
        oscs = osc_table(k)
        measures = np.full(oscs.shape, cube_measure[k])
        per_level.append((oscs, measures))
        if oscs.size:
            # singletons
            best = max(best, float((measures ** (1.0 / r) * oscs).max()))
            # per-level disjoint family
            best = max(best, _collection_osc_value(oscs, measures, r))

    mean = values.mean()
    recentred = values - mean
    if np.abs(recentred).max() > 0:
        if ndim == 1:
            col = sparse_stopping(MeshFunction1D(u.grid, recentred))
        else:
            col = sparse_stopping(MeshFunction(u.domain, recentred))
        oscs, measures = [], []
        for node in col.all_nodes():
            k = node.level
            if ndim == 1:
                oscs.append(_osc_1d(values, 0.0, k, node.index[0]))
            else:
                w = values.shape[0] >> k
                blk = values[
                    node.index[0] * w : (node.index[0] + 1) * w,
                    node.index[1] * w : (node.index[1] + 1) * w,
                ]
                oscs.append(float(np.abs(blk - blk.mean()).mean()))
            measures.append(cube_measure[k])
        best = max(best, _collection_osc_value(np.asarray(oscs), np.asarray(measures), r))
    return best
