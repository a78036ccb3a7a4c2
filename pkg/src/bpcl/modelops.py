"""Bi-parameter dyadic model operators: shifts, partial paraproducts, full
paraproducts, paraproduct decompositions of products, and their commutators.

Operators act through Haar coefficient tables indexed by a top rectangle
``K x V`` and subinterval offsets; coefficient sizes follow the admissibility
rules of each kind (pointwise for shifts, dyadic-BMO columns for partial
paraproducts, a sup surrogate for full paraproducts).  ``apply_model``
evaluates the defining sums exactly via level-wise transforms; tests check it
against a literal summation oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .lattice import BoxDomain, Grid1D, MeshFunction
from .sio import HypothesisError

__all__ = [
    "ModelOperatorSpec",
    "CoefficientError",
    "random_shift",
    "random_partial_paraproduct",
    "random_full_paraproduct",
    "rank_one_shift",
    "spec_from_json",
    "spec_to_json",
    "apply_model",
    "model_commutator",
    "commutator_decompose_model",
    "product_decompose",
    "fractional_positive_op",
    "dyadic_bmo_flat",
    "coeff_square_function",
    "flat_interval_count",
    "flat_offset",
]

PARTIAL_SYMMETRIES = ("i0_direct", "i0_adjoint", "j0_direct", "j0_adjoint")
FULL_SYMMETRIES = ("avg_f", "avg_g", "mix_f1", "mix_f2")


class CoefficientError(ValueError):
    """Coefficient table violates the size rule of its operator kind."""


# ---------------------------------------------------------------------------
# level-wise transforms
# ---------------------------------------------------------------------------


def _avg_pyramid(values: np.ndarray, axis0: int) -> list[np.ndarray]:
    """Means over dyadic intervals, indexed by level (coarse first)."""
    depth = int(math.log2(values.shape[axis0]))
    out = [None] * (depth + 1)
    out[depth] = values
    cur = values
    for k in range(depth - 1, -1, -1):
        cur = 0.5 * (np.take(cur, range(0, cur.shape[axis0], 2), axis=axis0)
                     + np.take(cur, range(1, cur.shape[axis0], 2), axis=axis0))
        out[k] = cur
    return out


def _haar_coeffs_axis(pyramid: list[np.ndarray], grid: Grid1D, axis0: int) -> list[np.ndarray]:
    """<f, h_I> for all cancellative I of one axis; entry k has 2**k rows."""
    out = []
    for k in range(grid.depth):
        fine = pyramid[k + 1]
        left = np.take(fine, range(0, fine.shape[axis0], 2), axis=axis0)
        right = np.take(fine, range(1, fine.shape[axis0], 2), axis=axis0)
        out.append((left - right) * (grid.length_at(k) ** 0.5 / 2.0))
    return out


def _profile_factor(grid: Grid1D, level: int, profile: str) -> np.ndarray:
    """Per-cell factor of a Haar (+-|I|^-1/2) or averaging (1_I/|I|) profile."""
    n, w = grid.n, 1 << (grid.depth - level)
    if profile == "haar":
        pat = np.empty(w)
        pat[: w // 2], pat[w // 2:] = 1.0, -1.0
        return np.tile(pat, n // w) * grid.length_at(level) ** -0.5
    if profile == "avg":
        return np.full(n, 1.0 / grid.length_at(level))
    raise ValueError(f"unknown profile {profile!r}")


def _expand(domain: BoxDomain, level1: int, level2: int, coeff: np.ndarray,
            profile1: str, profile2: str) -> np.ndarray:
    n1, n2 = domain.shape
    up = np.repeat(np.repeat(coeff, n1 >> level1, axis=0), n2 >> level2, axis=1)
    f1 = _profile_factor(domain.axis1, level1, profile1)
    f2 = _profile_factor(domain.axis2, level2, profile2)
    return up * np.outer(f1, f2)


def full_haar_coefficients(f: MeshFunction) -> dict[tuple[int, int], np.ndarray]:
    """<f, h_I x h_J> for all fully cancellative rectangle scales."""
    d = f.domain
    pyr1 = _avg_pyramid(f.values, 0)
    out: dict[tuple[int, int], np.ndarray] = {}
    for k1 in range(d.axis1.depth):
        fine = pyr1[k1 + 1]
        c1 = (fine[0::2] - fine[1::2]) * (d.axis1.length_at(k1) ** 0.5 / 2.0)
        pyr2 = _avg_pyramid(c1, 1)
        for k2 in range(d.axis2.depth):
            f2 = pyr2[k2 + 1]
            out[(k1, k2)] = (f2[:, 0::2] - f2[:, 1::2]) * (d.axis2.length_at(k2) ** 0.5 / 2.0)
    return out


def flat_interval_count(grid: Grid1D) -> int:
    """Number of intervals carrying a cancellative Haar: levels 0..depth-1."""
    return (1 << grid.depth) - 1


def flat_offset(level: int) -> int:
    return (1 << level) - 1


# ---------------------------------------------------------------------------
# coefficient size rules
# ---------------------------------------------------------------------------


def dyadic_bmo_flat(beta: np.ndarray, grid: Grid1D) -> float:
    """Dyadic BMO norm of a coefficient sequence indexed over levels 0..depth-1:
    sup_{K0} ( sum_{K inside K0} |beta_K|^2 / |K0| )^{1/2}."""
    depth = grid.depth
    sq = np.abs(beta) ** 2
    best = 0.0
    subtree = None
    for a in range(depth - 1, -1, -1):
        own = sq[flat_offset(a): flat_offset(a) + (1 << a)]
        subtree = own if subtree is None else own + subtree[0::2] + subtree[1::2]
        best = max(best, float(subtree.max()) / grid.length_at(a))
    return math.sqrt(best)


def coeff_square_function(beta: np.ndarray, grid: Grid1D) -> np.ndarray:
    """Pointwise (sum_Q |beta_Q|^2 1_Q / |Q|)^{1/2} over the flat index set."""
    acc = np.zeros(grid.n)
    for a in range(grid.depth):
        blk = np.abs(beta[flat_offset(a): flat_offset(a) + (1 << a)]) ** 2 / grid.length_at(a)
        acc += np.repeat(blk, grid.n >> a)
    return np.sqrt(acc)


# ---------------------------------------------------------------------------
# the operator spec
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelOperatorSpec:
    """A dyadic model operator with an explicit coefficient table.

    Coefficient layout by kind:
      shift: {(a, c): array (2^a, 2^i1, 2^i2, 2^c, 2^j1, 2^j2)} over top levels
      partial paraproduct (i0_*): {c: array (nK_flat, 2^c, 2^j1, 2^j2)}
      partial paraproduct (j0_*): {a: array (nV_flat, 2^a, 2^i1, 2^i2)}
      full paraproduct: {(a, c): array (2^a, 2^c)}
    """

    kind: str
    domain: BoxDomain
    complexity: tuple[int, int, int, int] = (0, 0, 0, 0)
    symmetry: str = ""
    coefficients: dict = field(default_factory=dict)
    normalization: float = 1.0
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in ("shift", "partial_paraproduct", "full_paraproduct"):
            raise ValueError(f"unknown model operator kind {self.kind!r}")
        validate_coefficients(self)

    @property
    def max_complexity(self) -> int:
        return max(self.complexity)


def _shift_levels(domain: BoxDomain, complexity) -> list[tuple[int, int]]:
    i1, i2, j1, j2 = complexity
    amax = domain.axis1.depth - 1 - max(i1, i2)
    cmax = domain.axis2.depth - 1 - max(j1, j2)
    return [(a, c) for a in range(amax + 1) for c in range(cmax + 1)]


def validate_coefficients(spec: ModelOperatorSpec) -> None:
    d = spec.domain
    i1, i2, j1, j2 = spec.complexity
    tol = 1.0 + 1e-9
    if spec.kind == "shift":
        for (a, c), arr in spec.coefficients.items():
            want = (1 << a, 1 << i1, 1 << i2, 1 << c, 1 << j1, 1 << j2)
            if arr.shape != want:
                raise CoefficientError(f"shift table at {(a, c)} has shape {arr.shape}, want {want}")
            bound = (
                d.axis1.length_at(a + i1) * d.axis1.length_at(a + i2)
                * d.axis2.length_at(c + j1) * d.axis2.length_at(c + j2)
            ) ** 0.5 / (d.axis1.length_at(a) * d.axis2.length_at(c))
            if np.abs(arr).max(initial=0.0) > bound * spec.normalization * tol:
                raise CoefficientError("shift coefficient exceeds its size bound")
    elif spec.kind == "partial_paraproduct":
        if spec.symmetry not in PARTIAL_SYMMETRIES:
            raise ValueError(f"bad partial paraproduct symmetry {spec.symmetry!r}")
        if spec.symmetry.startswith("i0"):
            if (i1, i2) != (0, 0):
                raise CoefficientError("i0 partial paraproduct needs i1 = i2 = 0")
            col_grid, top_grid, (e1, e2) = d.axis1, d.axis2, (j1, j2)
        else:
            if (j1, j2) != (0, 0):
                raise CoefficientError("j0 partial paraproduct needs j1 = j2 = 0")
            col_grid, top_grid, (e1, e2) = d.axis2, d.axis1, (i1, i2)
        for c, arr in spec.coefficients.items():
            want = (flat_interval_count(col_grid), 1 << c, 1 << e1, 1 << e2)
            if arr.shape != want:
                raise CoefficientError(f"paraproduct table at {c} has shape {arr.shape}, want {want}")
            bound = (
                top_grid.length_at(c + e1) * top_grid.length_at(c + e2)
            ) ** 0.5 / top_grid.length_at(c)
            cols = arr.reshape(arr.shape[0], -1)
            for col in range(cols.shape[1]):
                if dyadic_bmo_flat(cols[:, col], col_grid) > bound * spec.normalization * tol:
                    raise CoefficientError("paraproduct column exceeds its BMO bound")
    else:
        if spec.symmetry not in FULL_SYMMETRIES:
            raise ValueError(f"bad full paraproduct symmetry {spec.symmetry!r}")
        if spec.complexity != (0, 0, 0, 0):
            raise CoefficientError("full paraproducts have complexity (0,0,0,0)")
        for (a, c), arr in spec.coefficients.items():
            if arr.shape != (1 << a, 1 << c):
                raise CoefficientError("full paraproduct table has a bad shape")
            if np.abs(arr).max(initial=0.0) > spec.normalization * tol:
                raise CoefficientError("full paraproduct coefficient exceeds the sup surrogate")


# ---------------------------------------------------------------------------
# random generators (deterministic from seed)
# ---------------------------------------------------------------------------


def _disk(rng: np.random.Generator, shape) -> np.ndarray:
    r = np.sqrt(rng.uniform(0.0, 1.0, size=shape))
    th = rng.uniform(0.0, 2 * np.pi, size=shape)
    return r * np.exp(1j * th)


def random_shift(
    domain: BoxDomain, complexity, seed: int, normalization: float = 1.0
) -> ModelOperatorSpec:
    """Shift with coefficients drawn uniformly from the admissible disk."""
    rng = np.random.default_rng(seed)
    i1, i2, j1, j2 = complexity
    coeffs = {}
    for a, c in _shift_levels(domain, complexity):
        bound = (
            domain.axis1.length_at(a + i1) * domain.axis1.length_at(a + i2)
            * domain.axis2.length_at(c + j1) * domain.axis2.length_at(c + j2)
        ) ** 0.5 / (domain.axis1.length_at(a) * domain.axis2.length_at(c))
        shape = (1 << a, 1 << i1, 1 << i2, 1 << c, 1 << j1, 1 << j2)
        coeffs[(a, c)] = _disk(rng, shape) * bound * normalization
    return ModelOperatorSpec("shift", domain, tuple(complexity), "", coeffs, normalization, seed)


def random_partial_paraproduct(
    domain: BoxDomain, symmetry: str, complexity, seed: int, normalization: float = 1.0
) -> ModelOperatorSpec:
    """Partial paraproduct whose K-columns are Haar coefficient sequences of a
    random function, rescaled to the certified dyadic BMO bound."""
    rng = np.random.default_rng(seed)
    i1, i2, j1, j2 = complexity
    if symmetry.startswith("i0"):
        col_grid, top_grid, (e1, e2) = domain.axis1, domain.axis2, (j1, j2)
    else:
        col_grid, top_grid, (e1, e2) = domain.axis2, domain.axis1, (i1, i2)
    nK = flat_interval_count(col_grid)
    coeffs = {}
    for c in range(top_grid.depth - max(e1, e2)):
        bound = (top_grid.length_at(c + e1) * top_grid.length_at(c + e2)) ** 0.5 / top_grid.length_at(c)
        arr = np.empty((nK, 1 << c, 1 << e1, 1 << e2), dtype=np.complex128)
        for v in range(1 << c):
            for p1 in range(1 << e1):
                for p2 in range(1 << e2):
                    phi = rng.standard_normal(col_grid.n) + 1j * rng.standard_normal(col_grid.n)
                    pyr = _avg_pyramid(phi, 0)
                    beta = np.concatenate(
                        [
                            (pyr[a + 1][0::2] - pyr[a + 1][1::2]) * (col_grid.length_at(a) ** 0.5 / 2.0)
                            for a in range(col_grid.depth)
                        ]
                    )
                    bmo = dyadic_bmo_flat(beta, col_grid)
                    arr[:, v, p1, p2] = beta * (bound * normalization / bmo)
        coeffs[c] = arr
    return ModelOperatorSpec(
        "partial_paraproduct", domain, tuple(complexity), symmetry, coeffs, normalization, seed
    )


def random_full_paraproduct(
    domain: BoxDomain, symmetry: str, seed: int, normalization: float = 1.0
) -> ModelOperatorSpec:
    rng = np.random.default_rng(seed)
    coeffs = {}
    for a in range(domain.axis1.depth):
        for c in range(domain.axis2.depth):
            coeffs[(a, c)] = _disk(rng, (1 << a, 1 << c)) * normalization
    return ModelOperatorSpec(
        "full_paraproduct", domain, (0, 0, 0, 0), symmetry, coeffs, normalization, seed
    )


def rank_one_shift(domain: BoxDomain, value: complex = 1.0) -> ModelOperatorSpec:
    """Complexity-(0,0,0,0) shift with a single coefficient at K = V = top."""
    coeffs = {
        (a, c): np.zeros((1 << a, 1, 1, 1 << c, 1, 1), dtype=np.complex128)
        for (a, c) in _shift_levels(domain, (0, 0, 0, 0))
    }
    coeffs[(0, 0)][0, 0, 0, 0, 0, 0] = value
    return ModelOperatorSpec("shift", domain, (0, 0, 0, 0), "", coeffs, 1.0, None)


def spec_to_json(spec: ModelOperatorSpec) -> dict:
    if spec.seed is None:
        raise ValueError("only seeded specs serialize; explicit tables do not")
    return {
        "kind": spec.kind,
        "symmetry": spec.symmetry,
        "complexity": list(spec.complexity),
        "seed": spec.seed,
        "normalization": spec.normalization,
    }


def spec_from_json(domain: BoxDomain, payload: dict) -> ModelOperatorSpec:
    kind = payload["kind"]
    complexity = tuple(payload.get("complexity", (0, 0, 0, 0)))
    seed = int(payload["seed"])
    norm = float(payload.get("normalization", 1.0))
    symmetry = payload.get("symmetry", "")
    if kind == "shift":
        return random_shift(domain, complexity, seed, norm)
    if kind == "partial_paraproduct":
        return random_partial_paraproduct(domain, symmetry, complexity, seed, norm)
    if kind == "full_paraproduct":
        return random_full_paraproduct(domain, symmetry, seed, norm)
    raise ValueError(f"unknown model operator kind {kind!r}")


# ---------------------------------------------------------------------------
# application
# ---------------------------------------------------------------------------


def _transpose(f: MeshFunction) -> MeshFunction:
    d = f.domain
    swapped = BoxDomain(
        Grid1D(d.axis2.origin, d.axis2.extent, d.axis2.depth),
        Grid1D(d.axis1.origin, d.axis1.extent, d.axis1.depth),
    )
    return MeshFunction(swapped, f.values.T)


def _transposed_spec(spec: ModelOperatorSpec) -> ModelOperatorSpec:
    d = spec.domain
    swapped = BoxDomain(
        Grid1D(d.axis2.origin, d.axis2.extent, d.axis2.depth),
        Grid1D(d.axis1.origin, d.axis1.extent, d.axis1.depth),
    )
    i1, i2, j1, j2 = spec.complexity
    if spec.kind == "partial_paraproduct":
        symmetry = {"j0_direct": "i0_direct", "j0_adjoint": "i0_adjoint"}[spec.symmetry]
        return replace(
            spec, domain=swapped, symmetry=symmetry, complexity=(j1, j2, i1, i2)
        )
    if spec.kind == "full_paraproduct" and spec.symmetry == "mix_f2":
        coeffs = {(c, a): arr.T for (a, c), arr in spec.coefficients.items()}
        return replace(spec, domain=swapped, symmetry="mix_f1", coefficients=coeffs)
    raise ValueError("spec does not transpose")


def apply_model(spec: ModelOperatorSpec, f: MeshFunction) -> MeshFunction:
    """Evaluate the defining sum of the model operator exactly on the mesh."""
    if f.domain != spec.domain:
        raise ValueError("function and operator live on different meshes")
    if spec.kind == "partial_paraproduct" and spec.symmetry.startswith("j0"):
        return _transpose(apply_model(_transposed_spec(spec), _transpose(f)))
    if spec.kind == "full_paraproduct" and spec.symmetry == "mix_f2":
        return _transpose(apply_model(_transposed_spec(spec), _transpose(f)))

    d = spec.domain
    n1, n2 = d.shape
    out = np.zeros(d.shape, dtype=np.complex128)
    i1, i2, j1, j2 = spec.complexity

    if spec.kind == "shift":
        hc = full_haar_coefficients(f)
        acc: dict[tuple[int, int], np.ndarray] = {}
        for (a, c), alpha in spec.coefficients.items():
            inblk = hc[(a + i1, c + j1)].reshape(1 << a, 1 << i1, 1 << c, 1 << j1)
            blk = np.einsum("kabvcd,kavc->kbvd", alpha, inblk)
            key = (a + i2, c + j2)
            tgt = acc.setdefault(key, np.zeros((1 << key[0], 1 << key[1]), dtype=np.complex128))
            tgt += blk.reshape(tgt.shape)
        for (k1, k2), coeff in acc.items():
            out += _expand(d, k1, k2, coeff, "haar", "haar")
        return MeshFunction(d, out)

    if spec.kind == "partial_paraproduct":
        # i0 symmetries: K-slot on axis 1, J's inside V on axis 2
        if spec.symmetry == "i0_direct":
            # in: <f, 1_K/|K| x h_J1>; out: h_K x h_J2
            pyr1 = _avg_pyramid(f.values, 0)
            for c, alpha in spec.coefficients.items():
                for a in range(d.axis1.depth):
                    rows = alpha[flat_offset(a): flat_offset(a) + (1 << a)]
                    avg_rows = pyr1[a]                      # (2^a, n2)
                    pyr2 = _avg_pyramid(avg_rows, 1)
                    fine = pyr2[c + j1 + 1]
                    cf = (fine[:, 0::2] - fine[:, 1::2]) * (d.axis2.length_at(c + j1) ** 0.5 / 2.0)
                    inblk = cf.reshape(1 << a, 1 << c, 1 << j1)
                    blk = np.einsum("kvpq,kvp->kvq", rows, inblk).reshape(1 << a, -1)
                    out += _expand(d, a, c + j2, blk, "haar", "haar")
            return MeshFunction(d, out)
        if spec.symmetry == "i0_adjoint":
            # in: <f, h_K x h_J1>; out: (1_K/|K|) x h_J2
            hc = full_haar_coefficients(f)
            for c, alpha in spec.coefficients.items():
                for a in range(d.axis1.depth):
                    rows = alpha[flat_offset(a): flat_offset(a) + (1 << a)]
                    inblk = hc[(a, c + j1)].reshape(1 << a, 1 << c, 1 << j1)
                    blk = np.einsum("kvpq,kvp->kvq", rows, inblk).reshape(1 << a, -1)
                    out += _expand(d, a, c + j2, blk, "avg", "haar")
            return MeshFunction(d, out)
        raise AssertionError("unreachable symmetry")

    # full paraproducts
    if spec.symmetry == "avg_f":
        pyr1 = _avg_pyramid(f.values, 0)
        for (a, c), alpha in spec.coefficients.items():
            means = _avg_pyramid(pyr1[a], 1)[c]
            out += _expand(d, a, c, alpha * means, "haar", "haar")
        return MeshFunction(d, out)
    if spec.symmetry == "avg_g":
        hc = full_haar_coefficients(f)
        for (a, c), alpha in spec.coefficients.items():
            out += _expand(d, a, c, alpha * hc[(a, c)], "avg", "avg")
        return MeshFunction(d, out)
    if spec.symmetry == "mix_f1":
        # in: <f, h_K x 1_V/|V|>; out: (1_K/|K|) x h_V
        pyr1 = _avg_pyramid(f.values, 0)
        for (a, c), alpha in spec.coefficients.items():
            fine = pyr1[a + 1]
            c1 = (fine[0::2] - fine[1::2]) * (d.axis1.length_at(a) ** 0.5 / 2.0)  # (2^a, n2)
            paired = _avg_pyramid(c1, 1)[c]  # mean over V = pairing with 1_V/|V|
            out += _expand(d, a, c, alpha * paired, "avg", "haar")
        return MeshFunction(d, out)
    raise AssertionError("unreachable symmetry")


# ---------------------------------------------------------------------------
# products, positive fractional operator, commutators
# ---------------------------------------------------------------------------


def product_decompose(
    b: MeshFunction, f: MeshFunction, axis: int = 2
) -> tuple[MeshFunction, MeshFunction, MeshFunction, MeshFunction]:
    """Paraproduct split of b*f along one axis.

    Returns (A1, A2, A3, top) with A1 = sum_J Delta_J b Delta_J f,
    A2 = sum Delta_J b E_J f, A3 = sum E_J b Delta_J f, and the finite-depth
    top correction E_0 b * E_0 f; the four pieces sum to b*f cell-exactly.
    """
    from .dyadic import delta_level, _block_mean, _upsample

    ax = axis - 1
    n = b.domain.grid(axis).n
    depth = b.domain.grid(axis).depth
    a1 = np.zeros(b.domain.shape, dtype=np.complex128)
    a2 = np.zeros_like(a1)
    a3 = np.zeros_like(a1)
    for k in range(depth):
        db = delta_level(b.values, ax, k)
        df = delta_level(f.values, ax, k)
        eb = _upsample(_block_mean(b.values, ax, k), ax, n)
        ef = _upsample(_block_mean(f.values, ax, k), ax, n)
        a1 += db * df
        a2 += db * ef
        a3 += eb * df
    top = _upsample(_block_mean(b.values, ax, 0), ax, n) * _upsample(
        _block_mean(f.values, ax, 0), ax, n
    )
    D = b.domain
    return (MeshFunction(D, a1), MeshFunction(D, a2), MeshFunction(D, a3), MeshFunction(D, top))


def fractional_positive_op(
    f: MeshFunction, alpha: float, axis: Union[int, str] = 1
) -> MeshFunction:
    """Positive fractional sum over dyadic cubes: sum_Q l(Q)^alpha <|f|>_Q 1_Q.

    Per-axis (d = 1) or over squares of a square box (``axis="both"``, d = 2);
    the sum runs over every in-box level including the cells.
    """
    from .dyadic import _block_mean, _upsample, _require_square

    a = np.abs(f.values)
    acc = np.zeros(f.domain.shape)
    if axis in (1, 2):
        if not (0.0 < alpha < 1.0):
            raise ValueError(f"alpha must lie in (0, 1) on one axis, got {alpha}")
        g = f.domain.grid(axis)
        ax = axis - 1
        for k in range(g.depth + 1):
            acc += g.length_at(k) ** alpha * _upsample(_block_mean(a, ax, k), ax, g.n)
    elif axis == "both":
        if not (0.0 < alpha < 2.0):
            raise ValueError(f"alpha must lie in (0, 2) over squares, got {alpha}")
        _require_square(f.domain)
        g = f.domain.axis1
        for k in range(g.depth + 1):
            blk = _block_mean(_block_mean(a, 0, k), 1, k)
            acc += g.length_at(k) ** alpha * _upsample(_upsample(blk, 1, g.n), 0, g.n)
    else:
        raise ValueError("axis must be 1, 2 or 'both'")
    return MeshFunction(f.domain, acc)


def model_commutator(b: MeshFunction, spec: ModelOperatorSpec, f: MeshFunction) -> MeshFunction:
    """[b, S] f = b * Sf - S(b f), evaluated exactly."""
    return b * apply_model(spec, f) - apply_model(spec, b * f)


@dataclass(frozen=True)
class CommutatorDecomposition:
    """Labeled expansion of <[b,S]f, g> for a shift and an x2-dependent symbol."""

    f_vs_a1g: complex
    f_vs_a2g: complex
    a1f_vs_g: complex
    a2f_vs_g: complex
    core: complex
    total: complex
    reference: complex
    defect: float


def commutator_decompose_model(
    b: MeshFunction, spec: ModelOperatorSpec, f: MeshFunction, g: MeshFunction
) -> CommutatorDecomposition:
    """Expand <[b,S]f, g> into paraproduct terms plus the average-difference core.

    Requires a shift and b(. , x2) constant (b depends on x2 only); then the
    A3 contributions collapse to the core sum of
    alpha (<b>_{J2} - <b>_{J1}) <f, h_{I1 x J1}> <g, h_{I2 x J2}>.
    """
    from .lattice import inner_product

    if spec.kind != "shift":
        raise ValueError("decomposition is defined for shifts")
    col_defect = float(np.abs(b.values - b.values.mean(axis=0, keepdims=True)).max())
    if col_defect > 1e-12 * max(b.sup_norm(), 1.0):
        raise HypothesisError("b must be constant in x1 for the decomposition")

    a1g, a2g, _, _ = product_decompose(b, g, axis=2)
    a1f, a2f, _, _ = product_decompose(b, f, axis=2)
    sf = apply_model(spec, f)
    t1 = inner_product(sf, a1g)
    t2 = inner_product(sf, a2g)
    t3 = -inner_product(apply_model(spec, a1f), g)
    t4 = -inner_product(apply_model(spec, a2f), g)

    i1, i2, j1, j2 = spec.complexity
    hcf = full_haar_coefficients(f)
    hcg = full_haar_coefficients(g)
    phi = b.values[0, :]
    pyr_phi = _avg_pyramid(phi, 0)
    core = 0.0 + 0.0j
    for (a, c), alpha in spec.coefficients.items():
        cf = hcf[(a + i1, c + j1)].reshape(1 << a, 1 << i1, 1 << c, 1 << j1)
        cg = hcg[(a + i2, c + j2)].reshape(1 << a, 1 << i2, 1 << c, 1 << j2)
        bavg1 = pyr_phi[c + j1].reshape(1 << c, 1 << j1)
        bavg2 = pyr_phi[c + j2].reshape(1 << c, 1 << j2)
        core += np.einsum("kabvcd,kavc,kbvd,vd->", alpha, cf, cg, bavg2)
        core -= np.einsum("kabvcd,kavc,kbvd,vc->", alpha, cf, cg, bavg1)

    total = t1 + t2 + t3 + t4 + core
    reference = inner_product(model_commutator(b, spec, f), g)
    defect = abs(total - reference) / max(abs(reference), 1e-30)
    return CommutatorDecomposition(
        f_vs_a1g=t1, f_vs_a2g=t2, a1f_vs_g=t3, a2f_vs_g=t4,
        core=complex(core), total=total, reference=reference, defect=defect,
    )
