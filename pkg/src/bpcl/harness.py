"""Nine-case classification, two-sided case reports, the empirical commutator
norm proxy, and the JSON config schema shared by the CLI and the service.

The proxy N-hat combines (a) the off-support rectangle-pair estimate, which
carries lower-bound information straight from the kernel, and (b) commutators
of random dyadic model operators, the upper-bound surrogate; the continuous
operator is never applied on-diagonal.  Every report is deterministic under a
fixed seed and config.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .kernels import KernelSpec, kernel_by_name
from .lattice import (
    BoxDomain,
    DyadicRectangle,
    ExponentProfile,
    Grid1D,
    MeshFunction,
    mixed_norm,
    oscillation,
    read_mesh_csv,
)
from .modelops import model_commutator, random_shift
from .norms import (
    OffSupportConfig,
    holder_seminorm,
    inf_const_mixed_norm,
    little_bmo,
    offsupport_norm,
    oscillation_table,
)

__all__ = [
    "CaseSelector",
    "CaseReport",
    "HarnessConfig",
    "ShrinkReport",
    "classify_case",
    "constancy_defect",
    "two_sided_report",
    "lebesgue_shrink_test",
    "make_symbol",
    "config_from_dict",
    "CANONICAL_SYMBOLS",
]

CANONICAL_SYMBOLS = ("constant", "coord:x1", "coord:x2", "coord:x1+x2", "haar:levels")


@dataclass(frozen=True)
class CaseSelector:
    """One cell of the nine-case table and the functionals it calls for."""

    label: str
    category: str           # constant | holder1 | holder2 | bmo | inf_r2 | open_r1 | open_r1r2
    lower_name: str
    upper_name: str
    open_gap: bool
    constancy_mode: Optional[str]


def _rel(p: float, q: float) -> str:
    return "<" if p < q else (">" if p > q else "=")


def classify_case(profile: ExponentProfile) -> CaseSelector:
    """Map an exponent profile onto its table cell and functional selectors."""
    r1 = _rel(profile.p1, profile.q1)
    r2 = _rel(profile.p2, profile.q2)
    label = f"p1{r1}q1,p2{r2}q2"
    if r1 == "<" and r2 == "<":
        return CaseSelector(label, "constant", "constancy_defect", "constancy_defect", False, "global")
    if r1 == "<" and r2 == ">":
        return CaseSelector(label, "constant", "constancy_defect", "constancy_defect", False, "global")
    if r1 == ">" and r2 == "<":
        return CaseSelector(label, "constant", "constancy_defect", "constancy_defect", False, "global")
    if r1 == "<" and r2 == "=":
        return CaseSelector(label, "holder1", "holder_alpha1", "holder_alpha1", False, "x1_slices")
    if r1 == "=" and r2 == "<":
        return CaseSelector(label, "holder2", "holder_alpha2", "holder_alpha2", False, "x2_slices")
    if r1 == "=" and r2 == "=":
        return CaseSelector(label, "bmo", "little_bmo", "little_bmo", False, None)
    if r1 == "=" and r2 == ">":
        return CaseSelector(label, "inf_r2", "inf_Linf1_Lr2", "inf_Linf1_Lr2", False, None)
    if r1 == ">" and r2 == "=":
        return CaseSelector(label, "open_r1", "inf_Linf2_Lr1", "inf_Lr1_Linf2", True, None)
    return CaseSelector(label, "open_r1r2", "double_sparse_singleton_sup", "inf_Lr1_Lr2", True, None)


def constancy_defect(b: MeshFunction, mode: str = "global") -> float:
    """Maximal finest-scale oscillation: 0 iff constant at mesh resolution.

    "x1_slices" measures, per fixed x1, the variation along x2 (0 iff b
    depends on x1 only); "x2_slices" the transpose; "global" the whole box.
    """
    v = b.values
    if mode == "global":
        return float(np.abs(v - v.mean()).mean())
    if mode == "x1_slices":
        return float(np.abs(v - v.mean(axis=1, keepdims=True)).mean(axis=1).max())
    if mode == "x2_slices":
        return float(np.abs(v - v.mean(axis=0, keepdims=True)).mean(axis=0).max())
    raise ValueError(f"unknown constancy mode {mode!r}")


# ---------------------------------------------------------------------------
# symbols and configs
# ---------------------------------------------------------------------------


def make_symbol(domain: BoxDomain, kind: str, params: Optional[dict] = None) -> MeshFunction:
    """Construct a named symbol: constant, coordinate, Haar sign pattern, or CSV."""
    params = params or {}
    if kind == "constant":
        return MeshFunction.constant(domain, complex(params.get("value", 1.0)))
    if kind == "coord:x1":
        return MeshFunction.from_callable(domain, lambda x1, x2: x1 + 0.0 * x2)
    if kind == "coord:x2":
        return MeshFunction.from_callable(domain, lambda x1, x2: x2 + 0.0 * x1)
    if kind == "coord:x1+x2":
        return MeshFunction.from_callable(domain, lambda x1, x2: x1 + x2)
    if kind == "haar:levels":
        I = domain.interval(1, int(params.get("level1", 0)), int(params.get("index1", 0)))
        J = domain.interval(2, int(params.get("level2", 0)), int(params.get("index2", 0)))
        vals = np.zeros(domain.shape, dtype=np.complex128)
        s1 = np.zeros(domain.axis1.n)
        half = I.n_cells // 2
        s1[I.cells.start : I.cells.start + half] = 1.0
        s1[I.cells.start + half : I.cells.stop] = -1.0
        s2 = np.zeros(domain.axis2.n)
        half = J.n_cells // 2
        s2[J.cells.start : J.cells.start + half] = 1.0
        s2[J.cells.start + half : J.cells.stop] = -1.0
        vals[:, :] = np.outer(s1, s2)
        return MeshFunction(domain, vals)
    if kind == "csv":
        b = read_mesh_csv(params["text"])
        if b.domain != domain:
            raise ValueError("CSV symbol mesh does not match the configured domain")
        return b
    raise ValueError(f"unknown symbol kind {kind!r}")


@dataclass(frozen=True)
class HarnessConfig:
    """Everything a report needs; constructed from the JSON schema."""

    domain: BoxDomain
    kernel: KernelSpec
    symbol_kind: str
    symbol_params: dict
    profile: ExponentProfile
    A: float = 8.0
    rect_level1: int = 5
    rect_index1: int = 0
    rect_level2: int = 5
    rect_index2: int = 0
    rect_depth: Optional[int] = None
    trials: int = 3
    max_rectangles: int = 24
    seed: int = 0

    def __post_init__(self) -> None:
        # box sizing rule: the finest axis must admit at least one reflected rectangle
        for g in (self.domain.axis1, self.domain.axis2):
            if (1 << g.depth) < 2 * self.A + 2:
                raise ValueError(
                    f"domain depth {g.depth} cannot host reflections at A={self.A}; "
                    "raise the depth or shrink A"
                )

    def symbol(self) -> MeshFunction:
        return make_symbol(self.domain, self.symbol_kind, self.symbol_params)

    def rectangle(self) -> DyadicRectangle:
        return self.domain.rectangle(
            self.rect_level1, self.rect_index1, self.rect_level2, self.rect_index2
        )

    def offsupport_config(self) -> OffSupportConfig:
        D = self.rect_depth
        return OffSupportConfig(
            A=self.A,
            max_level1=D,
            max_level2=D,
            max_rectangles=self.max_rectangles,
            seed=self.seed + 101,
        )


def _pair(v, cast):
    if isinstance(v, (list, tuple)):
        return (cast(v[0]), cast(v[1]))
    return (cast(v), cast(v))


def config_from_dict(cfg: dict) -> HarnessConfig:
    """Parse the JSON config schema (see README) into a HarnessConfig."""
    dom_cfg = cfg.get("domain", {})
    e1, e2 = _pair(dom_cfg.get("extent", 32.0), float)
    l1, l2 = _pair(dom_cfg.get("depth", 7), int)
    o1, o2 = _pair(dom_cfg.get("origin", 0.0), float)
    domain = BoxDomain(Grid1D(o1, e1, l1), Grid1D(o2, e2, l2))

    ker_cfg = cfg.get("kernel", {"name": "tensor_hilbert"})
    kernel = kernel_by_name(ker_cfg.get("name", "tensor_hilbert"), ker_cfg.get("params"))

    sym_cfg = cfg.get("symbol", {"kind": "coord:x1+x2"})
    exps = cfg.get("exponents", {"p1": 2.0, "p2": 2.0, "q1": 2.0, "q2": 2.0})
    profile = ExponentProfile(
        float(exps["p1"]), float(exps["p2"]), float(exps["q1"]), float(exps["q2"])
    )
    awf_cfg = cfg.get("awf", {})
    rect = awf_cfg.get("rect", {})
    budgets = cfg.get("budgets", {})
    return HarnessConfig(
        domain=domain,
        kernel=kernel,
        symbol_kind=sym_cfg.get("kind", "coord:x1+x2"),
        symbol_params=sym_cfg.get("params", {}),
        profile=profile,
        A=float(awf_cfg.get("A", 8.0)),
        rect_level1=int(rect.get("level1", min(5, l1))),
        rect_index1=int(rect.get("index1", 0)),
        rect_level2=int(rect.get("level2", min(5, l2))),
        rect_index2=int(rect.get("index2", 0)),
        rect_depth=budgets.get("rect_depth"),
        trials=int(budgets.get("trials", 3)),
        max_rectangles=int(budgets.get("max_rectangles", 24)),
        seed=int(cfg.get("seed", 0)),
    )


# ---------------------------------------------------------------------------
# the report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CaseReport:
    label: str
    category: str
    open_gap: bool
    lower_name: str
    lower_value: float
    upper_name: str
    upper_value: float
    nhat: float
    nhat_offsupport: float
    nhat_model: float
    constancy: Optional[float]
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "category": self.category,
            "open_gap": self.open_gap,
            "lower": {"name": self.lower_name, "value": self.lower_value},
            "upper": {"name": self.upper_name, "value": self.upper_value},
            "nhat": self.nhat,
            "nhat_offsupport": self.nhat_offsupport,
            "nhat_model": self.nhat_model,
            "constancy_defect": self.constancy,
            "extras": self.extras,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def _double_sparse_singleton_sup(
    b: MeshFunction, r1: float, r2: float, max_level: Optional[int] = None
) -> float:
    """sup over single rectangles of |I|^{1/r1} |J|^{1/r2} osc(b, I x J):
    the one-term admissible double-sparse functional."""
    L1, L2 = b.domain.axis1.depth, b.domain.axis2.depth
    m1 = L1 if max_level is None else min(max_level, L1)
    m2 = L2 if max_level is None else min(max_level, L2)
    best = 0.0
    for k1 in range(m1 + 1):
        w1 = b.domain.axis1.length_at(k1) ** (1.0 / r1)
        for k2 in range(m2 + 1):
            w2 = b.domain.axis2.length_at(k2) ** (1.0 / r2)
            t = oscillation_table(b.values, k1, k2).max()
            best = max(best, w1 * w2 * float(t))
    return best


def _model_proxy(cfg: HarnessConfig, b: MeshFunction) -> float:
    """max over random shifts and test functions of ||[b,S]f||_q / ||f||_p."""
    rng = np.random.default_rng(cfg.seed + 3)
    complexities = [(0, 0, 0, 0), (1, 0, 0, 1), (1, 1, 1, 1)]
    best = 0.0
    for t in range(cfg.trials):
        comp = complexities[t % len(complexities)]
        spec = random_shift(cfg.domain, comp, seed=cfg.seed + 17 * t + 5)
        f = MeshFunction(
            cfg.domain,
            rng.standard_normal(cfg.domain.shape) + 1j * rng.standard_normal(cfg.domain.shape),
        )
        num = mixed_norm(model_commutator(b, spec, f), cfg.profile.q1, cfg.profile.q2)
        den = mixed_norm(f, cfg.profile.p1, cfg.profile.p2)
        best = max(best, num / den)
    return best


def two_sided_report(cfg: HarnessConfig) -> CaseReport:
    """Compute the cell's lower/upper functionals and the empirical proxy."""
    profile = cfg.profile
    sel = classify_case(profile)
    b = cfg.symbol()
    extras: dict = {}

    lower = upper = 0.0
    constancy: Optional[float] = None
    if sel.category == "constant":
        constancy = constancy_defect(b, "global")
        extras["defect_mode"] = "global"
    elif sel.category == "holder1":
        a1 = profile.alpha(1)
        lower = upper = holder_seminorm(b, a1, axis=1)
        constancy = constancy_defect(b, "x1_slices")
        extras["alpha1"] = a1
        extras["defect_mode"] = "x1_slices"
    elif sel.category == "holder2":
        a2 = profile.alpha(2)
        lower = upper = holder_seminorm(b, a2, axis=2)
        constancy = constancy_defect(b, "x2_slices")
        extras["alpha2"] = a2
        extras["defect_mode"] = "x2_slices"
    elif sel.category == "bmo":
        lower = upper = little_bmo(b)
    elif sel.category == "inf_r2":
        lower, _ = inf_const_mixed_norm(b, "Linf1_Lr2", r2=profile.r(2))
        upper = lower
    elif sel.category == "open_r1":
        lower, _ = inf_const_mixed_norm(b, "Linf2_Lr1", r1=profile.r(1))
        upper, _ = inf_const_mixed_norm(b, "Lr1_Linf2", r1=profile.r(1))
        extras["gap_ratio"] = upper / lower if lower > 1e-12 else 0.0
    else:  # open_r1r2
        lower = _double_sparse_singleton_sup(b, profile.r(1), profile.r(2))
        upper, _ = inf_const_mixed_norm(b, "Lr1_Lr2", r1=profile.r(1), r2=profile.r(2))
        extras["gap_ratio"] = upper / lower if lower > 1e-12 else 0.0

    nhat_off = offsupport_norm(b, cfg.kernel, profile, cfg.offsupport_config()).value
    nhat_model = _model_proxy(cfg, b)
    return CaseReport(
        label=sel.label,
        category=sel.category,
        open_gap=sel.open_gap,
        lower_name=sel.lower_name,
        lower_value=lower,
        upper_name=sel.upper_name,
        upper_value=upper,
        nhat=max(nhat_off, nhat_model),
        nhat_offsupport=nhat_off,
        nhat_model=nhat_model,
        constancy=constancy,
        extras=extras,
    )


# ---------------------------------------------------------------------------
# shrinking-rectangle diagnostic
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShrinkReport:
    rows: list          # (level, side, osc, side**(1/p2-1/q2))
    osc_slope: float    # fitted log-log decay rate of osc in side
    required_exponent: float

    def as_dict(self) -> dict:
        return {
            "rows": [
                {"level": k, "side": s, "osc": o, "bound_factor": bf}
                for (k, s, o, bf) in self.rows
            ],
            "osc_slope": self.osc_slope,
            "required_exponent": self.required_exponent,
        }


def lebesgue_shrink_test(
    b: MeshFunction,
    profile: ExponentProfile,
    I_level: int = 0,
    point_index: int = 0,
) -> ShrinkReport:
    """Track osc(b; I x J_k) along dyadic J_k shrinking to a point.

    For p2 < q2 the table forces constancy in x2: the oscillation must decay
    at least like side**(1/p2 - 1/q2) for the off-support norm to stay finite.
    """
    if not (profile.p2 < profile.q2):
        raise ValueError("shrink test applies to p2 < q2")
    expo = 1.0 / profile.p2 - 1.0 / profile.q2
    d = b.domain
    I = d.interval(1, I_level, 0)
    rows = []
    logs = []
    for k in range(d.axis2.depth + 1):
        idx = point_index >> (d.axis2.depth - k)
        J = d.interval(2, k, idx)
        osc = oscillation(b, DyadicRectangle(I, J))
        side = J.length
        rows.append((k, side, osc, side**expo))
        if osc > 1e-14:
            logs.append((math.log(side), math.log(osc)))
    if len(logs) >= 2:
        xs, ys = zip(*logs)
        slope = float(np.polyfit(xs, ys, 1)[0])
    else:
        slope = math.inf
    return ShrinkReport(rows=rows, osc_slope=slope, required_exponent=expo)
