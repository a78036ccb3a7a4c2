"""Bi-parameter singular kernels with non-degeneracy witnesses.

A kernel is singular on {x1 = y1} union {x2 = y2}, satisfies the product
size bound |K(x,y)| <= C |x1-y1|^{-d1} |x2-y2|^{-d2}, and mixed
size-regularity bounds with modulus ``omega``.  Non-degeneracy supplies, for
every base point and pair of radii, a far point where |K| is as large as the
size bound allows; the witness rule makes that point constructive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "KernelSpec",
    "SingularityError",
    "tensor_hilbert",
    "zero_kernel",
    "eval_kernel",
    "nondegenerate_witness",
    "verify_kernel_estimates",
    "KernelEstimateReport",
    "kernel_by_name",
]

DEFAULT_AMPLITUDE = 1.0 / math.pi**2


class SingularityError(ValueError):
    """Kernel evaluated on the singular set x1 = y1 or x2 = y2."""


@dataclass(frozen=True)
class KernelSpec:
    """A bi-parameter kernel with its declared constants and witness rule.

    ``evaluate`` is vectorized over numpy arrays.  ``factors``, when present,
    gives the tensor split K(x,y) = k1(x1,y1) * k2(x2,y2) used by the
    one-parameter PV machinery.
    """

    name: str
    size_constant: float
    delta: float
    nondegeneracy_constant: float
    evaluate: Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    witness: Callable[[float, float, float, float], tuple[float, float]]
    d1: int = 1
    d2: int = 1
    factors: Optional[tuple[Callable, Callable]] = None
    params: dict = field(default_factory=dict)

    def modulus(self, t):
        """Regularity modulus omega(t) = t**delta (increasing, subadditive, -> 0)."""
        return np.asarray(t) ** self.delta


def tensor_hilbert(amplitude: float = DEFAULT_AMPLITUDE) -> KernelSpec:
    """The built-in exemplar: K(x,y) = a / ((x1-y1)(x2-y2)).

    Antisymmetric in each slot, delta = 1, and the witness y_i = x_i + 2 r_i
    gives |K(x, y)| = a / (4 r1 r2) exactly.
    """

    def _eval(x1, x2, y1, y2):
        return amplitude / ((np.asarray(x1) - y1) * (np.asarray(x2) - y2))

    def _witness(x1, x2, r1, r2):
        return (x1 + 2.0 * r1, x2 + 2.0 * r2)

    return KernelSpec(
        name="tensor_hilbert",
        size_constant=amplitude,
        delta=1.0,
        nondegeneracy_constant=amplitude / 4.0,
        evaluate=_eval,
        witness=_witness,
        factors=(lambda x1, y1: 1.0 / (np.asarray(x1) - y1),
                 lambda x2, y2: amplitude / (np.asarray(x2) - y2)),
        params={"amplitude": amplitude},
    )


def zero_kernel() -> KernelSpec:
    def _eval(x1, x2, y1, y2):
        return np.zeros(np.broadcast(x1, x2, y1, y2).shape, dtype=float)

    return KernelSpec(
        name="zero",
        size_constant=0.0,
        delta=1.0,
        nondegeneracy_constant=0.0,
        evaluate=_eval,
        witness=lambda x1, x2, r1, r2: (x1 + 2 * r1, x2 + 2 * r2),
        factors=(lambda x1, y1: np.zeros(np.broadcast(x1, y1).shape),
                 lambda x2, y2: np.zeros(np.broadcast(x2, y2).shape)),
    )


def kernel_by_name(name: str, params: Optional[dict] = None) -> KernelSpec:
    params = params or {}
    if name == "tensor_hilbert":
        return tensor_hilbert(float(params.get("amplitude", DEFAULT_AMPLITUDE)))
    if name == "zero":
        return zero_kernel()
    raise ValueError(f"unknown kernel {name!r}")


def eval_kernel(K: KernelSpec, x: tuple[float, float], y: tuple[float, float]) -> complex:
    if x[0] == y[0] or x[1] == y[1]:
        raise SingularityError(f"kernel evaluated on the diagonal: x={x}, y={y}")
    return complex(K.evaluate(x[0], x[1], y[0], y[1]))


def nondegenerate_witness(K: KernelSpec, x: tuple[float, float], r1: float, r2: float) -> tuple[float, float]:
    if r1 <= 0 or r2 <= 0:
        raise ValueError("witness radii must be positive")
    return K.witness(x[0], x[1], r1, r2)


@dataclass(frozen=True)
class KernelEstimateReport:
    size_ratio_max: float
    regularity_ratio_max: dict  # per variant: "x1", "x2", "y1", "y2"
    witness_ratio_min: float
    witness_ratio_max: float
    size_ok: bool
    witness_ok: bool


def verify_kernel_estimates(K: KernelSpec, sample_count: int, seed: int) -> KernelEstimateReport:
    """Randomized check of the size, mixed regularity, and witness estimates.

    Draws admissible point quadruples with |x_i - x_i'| <= |x_i - y_i| / 2
    (and the three symmetric variants), and reports maximal observed ratios
    against the declared bounds.  A kernel passes when the size ratio is <= 1
    and the witness lower bound holds with its declared constant.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)

    def draw_offsets(n):
        # log-uniform gaps in [1e-3, 1e3], random signs; never on the diagonal
        mag = 10.0 ** rng.uniform(-3, 3, size=n)
        return mag * rng.choice([-1.0, 1.0], size=n)

    n = sample_count
    x1 = rng.uniform(-10, 10, size=n)
    x2 = rng.uniform(-10, 10, size=n)
    y1 = x1 + draw_offsets(n)
    y2 = x2 + draw_offsets(n)

    kv = np.abs(K.evaluate(x1, x2, y1, y2))
    bound = np.abs(x1 - y1) ** (-K.d1) * np.abs(x2 - y2) ** (-K.d2)
    denom = K.size_constant * bound
    size_ratio = float(np.max(np.divide(kv, denom, out=np.zeros_like(kv), where=denom > 0)))

    # mixed size-regularity, one variant per perturbed slot
    reg = {}
    for slot in ("x1", "x2", "y1", "y2"):
        base = {"x1": x1, "x2": x2, "y1": y1, "y2": y2}
        gap = np.abs(base["x1"] - base["y1"]) if slot in ("x1", "y1") else np.abs(base["x2"] - base["y2"])
        step = gap * rng.uniform(0.05, 0.5, size=n)
        pert = dict(base)
        pert[slot] = base[slot] + step * rng.choice([-1.0, 1.0], size=n)
        diff = np.abs(
            K.evaluate(base["x1"], base["x2"], base["y1"], base["y2"])
            - K.evaluate(pert["x1"], pert["x2"], pert["y1"], pert["y2"])
        )
        other = np.abs(x2 - y2) ** (-K.d2) if slot in ("x1", "y1") else np.abs(x1 - y1) ** (-K.d1)
        denom = K.size_constant * gap ** (-1.0) * K.modulus(step / gap) * other
        reg[slot] = float(np.max(np.divide(diff, denom, out=np.zeros_like(diff), where=denom > 0)))

    r1 = 10.0 ** rng.uniform(-2, 2, size=n)
    r2 = 10.0 ** rng.uniform(-2, 2, size=n)
    ratios = []
    for i in range(n):
        w1, w2 = K.witness(x1[i], x2[i], r1[i], r2[i])
        ratios.append(abs(complex(K.evaluate(x1[i], x2[i], w1, w2))) * r1[i] ** K.d1 * r2[i] ** K.d2)
    ratios = np.asarray(ratios)

    return KernelEstimateReport(
        size_ratio_max=size_ratio,
        regularity_ratio_max=reg,
        witness_ratio_min=float(ratios.min()),
        witness_ratio_max=float(ratios.max()),
        size_ok=size_ratio <= 1.0 + 1e-12,
        witness_ok=bool(np.all(ratios >= K.nondegeneracy_constant - 1e-12)),
    )
