"""Approximate weak factorization and the oscillation lower-bound certificate.

A mean-zero f supported on a rectangle R is rewritten as two commutator-shaped
brackets plus a strictly smaller error:

    f = [h1*Tg1 - g1*T*h1] + [h2*T*g2 - g2*Th2] + f_err

with g1 = 1_{R~}, g2 = 1_R, h1 = f / Tg1, w = g1*T*h1, h2 = w / (T*g2) and
f_err = g2*Th2.  With these choices the identity telescopes cellwise exactly,
the error has zero mean, and its sup shrinks like the modulus omega(1/A) of
the kernel as the reflection distance A grows, which is what makes the
absorption step of the oscillation lower bound valid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .kernels import KernelSpec
from .lattice import (
    DyadicRectangle,
    MeshFunction,
    oscillation,
    reflect_rectangle,
)
from .sio import apply_offsupport, commutator_form

__all__ = [
    "AwfConfig",
    "AwfOutput",
    "BootstrapReport",
    "OscCertificate",
    "DivisionError",
    "bootstrap_check",
    "awf_decompose",
    "extremal_symbol_test_function",
    "osc_lower_bound_certificate",
]


class DivisionError(ArithmeticError):
    """|Tg| dipped below the safe division threshold; raise A and retry."""


@dataclass(frozen=True)
class AwfConfig:
    """Reflection distance A >= 3 and the residual-ratio target for absorption."""

    A: float = 8.0
    rho_target: float = 0.5

    def __post_init__(self) -> None:
        if self.A < 3:
            raise ValueError(f"A must be >= 3, got {self.A}")


@dataclass(frozen=True)
class BootstrapReport:
    """Measured constants behind the kernel comparabilities on (R, R~).

    All quantities are normalized by A**(d1+d2), so every field should sit in
    a band around a positive constant independent of R and A.
    """

    A: float
    center_value_normalized: float          # |K(c_R, c_R~)| * A^2 * |R|
    center_diff_normalized_max: float       # max |K(x,y)-K(c_R,c_R~)| * A^2 |R| / omega(1/A)
    center_diff_times_a2: float             # same max without the omega division
    int_over_R_signed: tuple[float, float]  # |int_R K dx| * A^2, (min, max) over y in R~
    int_over_R_abs: tuple[float, float]     # int_R |K| dx * A^2, (min, max) over y
    int_over_refl_signed: tuple[float, float]
    int_over_refl_abs: tuple[float, float]


def bootstrap_check(K: KernelSpec, rect: DyadicRectangle, A: float) -> BootstrapReport:
    """Measure the center-difference bound and the four integral comparabilities."""
    if A < 3:
        raise ValueError(f"A must be >= 3, got {A}")
    refl = reflect_rectangle(rect, A, K)
    d = K.d1 + K.d2
    an = A**d
    cx, cy = rect.center, refl.center
    kc = complex(K.evaluate(cx[0], cx[1], cy[0], cy[1]))

    x1, x2 = rect.I.centers(), rect.J.centers()
    y1, y2 = refl.I.centers(), refl.J.centers()
    xx1, xx2, yy1, yy2 = (
        x1[:, None, None, None],
        x2[None, :, None, None],
        y1[None, None, :, None],
        y2[None, None, None, :],
    )
    kvals = K.evaluate(xx1, xx2, yy1, yy2)
    omega = float(K.modulus(1.0 / A))
    diff_norm = float(np.abs(kvals - kc).max()) * an * rect.measure / omega

    hx = rect.I.grid.h * rect.J.grid.h
    # integrals over R at fixed y, and over R~ at fixed x
    int_R = kvals.sum(axis=(0, 1)) * hx
    int_R_abs = np.abs(kvals).sum(axis=(0, 1)) * hx
    int_refl = kvals.sum(axis=(2, 3)) * hx
    int_refl_abs = np.abs(kvals).sum(axis=(2, 3)) * hx

    def band(a: np.ndarray) -> tuple[float, float]:
        vals = np.abs(a) * an
        return (float(vals.min()), float(vals.max()))

    return BootstrapReport(
        A=A,
        center_value_normalized=abs(kc) * an * rect.measure,
        center_diff_normalized_max=diff_norm,
        center_diff_times_a2=diff_norm * omega,
        int_over_R_signed=band(int_R),
        int_over_R_abs=band(int_R_abs),
        int_over_refl_signed=band(int_refl),
        int_over_refl_abs=band(int_refl_abs),
    )


@dataclass(frozen=True)
class AwfOutput:
    """The five factorization functions plus measured diagnostics."""

    rect: DyadicRectangle
    reflected: DyadicRectangle
    g1: MeshFunction
    g2: MeshFunction
    h1: MeshFunction
    h2: MeshFunction
    f_err: MeshFunction
    residual: float            # cellwise reconstruction defect, relative
    err_mean_abs: float        # |int f_err|
    rho: float                 # sup|f_err| / <|f|>_R, the absorbable ratio
    h1_bound: float            # sup|h1| / (A^d sup|f|)
    h2_bound: float            # sup|h2| / (A^d <|f|>_R)
    err_bound: float           # sup|f_err| / (omega(1/A) <|f|>_R)


def awf_decompose(
    K: KernelSpec, f: MeshFunction, rect: DyadicRectangle, cfg: Optional[AwfConfig] = None
) -> AwfOutput:
    """Factor a mean-zero f supported on ``rect`` per the iterated division scheme.

    Raises :class:`DivisionError` when min|Tg1| or min|T*g2| on the relevant
    rectangle is too small for a stable division (the cure is a larger A).
    """
    cfg = cfg or AwfConfig()
    A = cfg.A
    domain = f.domain
    supp = f.values != 0
    outside = supp.copy()
    outside[rect.cells] = False
    if outside.any():
        raise ValueError("f must be supported inside the given rectangle")
    total = float(np.abs(f.values).sum()) * domain.cell_measure
    if total == 0.0:
        z = MeshFunction.zeros(domain)
        refl = reflect_rectangle(rect, A, K)
        return AwfOutput(rect, refl, MeshFunction.indicator(domain, refl),
                         MeshFunction.indicator(domain, rect), z, z, z,
                         0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    if abs(f.integral()) > 1e-10 * total:
        raise ValueError("f must have zero mean on the rectangle")

    refl = reflect_rectangle(rect, A, K)
    g1 = MeshFunction.indicator(domain, refl)
    g2 = MeshFunction.indicator(domain, rect)
    d = K.d1 + K.d2
    floor = 1e-3 * A ** (-d)  # |Tg1| ~ A^-d; anything far below means A is too small

    t_g1 = apply_offsupport(K, g1, rect)               # Tg1 on R
    t_on_R = t_g1.values[rect.cells]
    if np.abs(t_on_R).min() < floor:
        raise DivisionError("min|Tg1| on R too small; raise A")
    h1_vals = np.zeros(domain.shape, dtype=np.complex128)
    h1_vals[rect.cells] = f.values[rect.cells] / t_on_R
    h1 = MeshFunction(domain, h1_vals)

    ts_h1 = apply_offsupport(K, h1, refl, adjoint=True)  # T*h1 on R~
    w_vals = np.zeros(domain.shape, dtype=np.complex128)
    w_vals[refl.cells] = ts_h1.values[refl.cells]
    w = MeshFunction(domain, w_vals)

    ts_g2 = apply_offsupport(K, g2, refl, adjoint=True)  # T*g2 on R~
    ts_on_refl = ts_g2.values[refl.cells]
    if np.abs(ts_on_refl).min() < floor:
        raise DivisionError("min|T*g2| on R~ too small; raise A")
    h2_vals = np.zeros(domain.shape, dtype=np.complex128)
    h2_vals[refl.cells] = w_vals[refl.cells] / ts_on_refl
    h2 = MeshFunction(domain, h2_vals)

    t_h2 = apply_offsupport(K, h2, rect)                 # Th2 on R
    ferr_vals = np.zeros(domain.shape, dtype=np.complex128)
    ferr_vals[rect.cells] = t_h2.values[rect.cells]
    f_err = MeshFunction(domain, ferr_vals)

    bracket1 = h1.values * t_g1.values - g1.values * ts_h1.values
    bracket2 = h2.values * ts_g2.values - g2.values * t_h2.values
    recon = bracket1 + bracket2 + ferr_vals
    residual = float(np.abs(recon - f.values).max() / max(f.sup_norm(), 1e-300))

    avg_abs = total / rect.measure
    omega = float(K.modulus(1.0 / A))
    return AwfOutput(
        rect=rect,
        reflected=refl,
        g1=g1,
        g2=g2,
        h1=h1,
        h2=h2,
        f_err=f_err,
        residual=residual,
        err_mean_abs=abs(f_err.integral()),
        rho=f_err.sup_norm() / avg_abs,
        h1_bound=h1.sup_norm() / (A**d * f.sup_norm()),
        h2_bound=h2.sup_norm() / (A**d * avg_abs),
        err_bound=f_err.sup_norm() / (omega * avg_abs),
    )


def extremal_symbol_test_function(b: MeshFunction, rect: DyadicRectangle) -> MeshFunction:
    """Mean-zero, sup <= 1 function on ``rect`` with int(b f) ~ |R| osc(b;R).

    Phase alignment: f0 = exp(-i arg(b - <b>_R)) on R, recentred to zero mean
    and rescaled into the unit ball.  Since b - <b>_R has zero mean, the
    recentring does not disturb the pairing with b.
    """
    vals = np.zeros(b.domain.shape, dtype=np.complex128)
    block = b.values[rect.cells]
    phi = block - block.mean()
    mag = np.abs(phi)
    unit = np.where(mag > 0, np.conj(phi) / np.where(mag > 0, mag, 1.0), 1.0)
    unit = unit - unit.mean()
    peak = np.abs(unit).max()
    if peak > 1.0:
        unit = unit / peak
    vals[rect.cells] = unit
    return MeshFunction(b.domain, vals)


@dataclass(frozen=True)
class OscCertificate:
    rect: DyadicRectangle
    A: float
    residual: float
    rho: float
    lhs: float        # |R| osc(b; R)
    rhs: float        # |<[b,T]g1,h1>| + |<[b,T]h2,g2>|
    ratio: float      # lhs / rhs (0 when both vanish)

    def as_dict(self) -> dict:
        k1, i1, k2, i2 = self.rect.key()
        return {
            "R": {"level1": k1, "index1": i1, "level2": k2, "index2": i2},
            "A": self.A,
            "residual": self.residual,
            "rho": self.rho,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
        }


def osc_lower_bound_certificate(
    b: MeshFunction, K: KernelSpec, rect: DyadicRectangle, cfg: Optional[AwfConfig] = None
) -> OscCertificate:
    """Certify |R| osc(b;R) <= C (|<[b,T]g1,h1>| + |<[b,T]h2,g2>|) numerically."""
    cfg = cfg or AwfConfig()
    lhs = rect.measure * oscillation(b, rect)
    f = extremal_symbol_test_function(b, rect)
    out = awf_decompose(K, f, rect, cfg)
    if out.rho > cfg.rho_target:
        raise ArithmeticError(
            f"error ratio {out.rho:.3g} exceeds the absorption target "
            f"{cfg.rho_target}; raise A"
        )
    pair1 = commutator_form(b, K, out.g1, out.h1)
    pair2 = commutator_form(b, K, out.h2, out.g2)
    rhs = abs(pair1) + abs(pair2)
    ratio = 0.0 if rhs == 0.0 else lhs / rhs
    return OscCertificate(
        rect=rect, A=cfg.A, residual=out.residual, rho=out.rho, lhs=lhs, rhs=rhs, ratio=ratio
    )
