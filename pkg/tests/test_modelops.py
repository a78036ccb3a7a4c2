import numpy as np
import pytest

from bpcl import bands
from bpcl.dyadic import haar_values_1d, tensor_haar
from bpcl.lattice import BoxDomain, Grid1D, MeshFunction, inner_product
from bpcl.modelops import (
    CoefficientError,
    ModelOperatorSpec,
    apply_model,
    commutator_decompose_model,
    dyadic_bmo_flat,
    flat_offset,
    fractional_positive_op,
    model_commutator,
    product_decompose,
    random_full_paraproduct,
    random_partial_paraproduct,
    random_shift,
    rank_one_shift,
    spec_from_json,
    spec_to_json,
)
from bpcl.sio import HypothesisError

from conftest import random_mesh


# ---------------------------------------------------------------------------
# literal-summation oracles (independent of the transform-based apply path)
# ---------------------------------------------------------------------------


def _haar(domain, axis, level, index, cancellative=True):
    return haar_values_1d(domain.interval(axis, level, index), cancellative)


def _avg_profile(domain, axis, level, index):
    iv = domain.interval(axis, level, index)
    out = np.zeros(domain.grid(axis).n)
    out[iv.cells] = 1.0 / iv.length
    return out


def naive_apply(spec, f):
    d = spec.domain
    cm = d.cell_measure
    i1, i2, j1, j2 = spec.complexity
    out = np.zeros(d.shape, dtype=complex)
    if spec.kind == "shift":
        for (a, c), alpha in spec.coefficients.items():
            for K in range(1 << a):
                for V in range(1 << c):
                    for o1 in range(1 << i1):
                        for o2 in range(1 << i2):
                            for p1 in range(1 << j1):
                                for p2 in range(1 << j2):
                                    h11 = np.outer(
                                        _haar(d, 1, a + i1, K * (1 << i1) + o1),
                                        _haar(d, 2, c + j1, V * (1 << j1) + p1),
                                    )
                                    h22 = np.outer(
                                        _haar(d, 1, a + i2, K * (1 << i2) + o2),
                                        _haar(d, 2, c + j2, V * (1 << j2) + p2),
                                    )
                                    coef = (f.values * h11).sum() * cm
                                    out += alpha[K, o1, o2, V, p1, p2] * coef * h22
        return out
    if spec.kind == "partial_paraproduct":
        swap = spec.symmetry.startswith("j0")
        e1, e2 = (i1, i2) if swap else (j1, j2)
        col_axis, top_axis = (2, 1) if swap else (1, 2)
        dcol = d.grid(col_axis)
        for c, alpha in spec.coefficients.items():
            for a in range(dcol.depth):
                for K in range(1 << a):
                    kflat = flat_offset(a) + K
                    hK = _haar(d, col_axis, a, K)
                    avgK = _avg_profile(d, col_axis, a, K)
                    for V in range(1 << c):
                        for q1 in range(1 << e1):
                            for q2 in range(1 << e2):
                                hJ1 = _haar(d, top_axis, c + e1, V * (1 << e1) + q1)
                                hJ2 = _haar(d, top_axis, c + e2, V * (1 << e2) + q2)
                                al = alpha[kflat, V, q1, q2]
                                direct = spec.symmetry.endswith("direct")
                                fprof = avgK if direct else hK
                                gprof = hK if direct else avgK
                                if col_axis == 1:
                                    fh, gh = np.outer(fprof, hJ1), np.outer(gprof, hJ2)
                                else:
                                    fh, gh = np.outer(hJ1, fprof), np.outer(hJ2, gprof)
                                coef = (f.values * fh).sum() * cm
                                out += al * coef * gh
        return out
    # full paraproducts
    for (a, c), alpha in spec.coefficients.items():
        for K in range(1 << a):
            hK, avgK = _haar(d, 1, a, K), _avg_profile(d, 1, a, K)
            for V in range(1 << c):
                hV, avgV = _haar(d, 2, c, V), _avg_profile(d, 2, c, V)
                al = alpha[K, V]
                if spec.symmetry == "avg_f":
                    coef = f.values[d.rectangle(a, K, c, V).cells].mean()
                    out += al * coef * np.outer(hK, hV)
                elif spec.symmetry == "avg_g":
                    coef = (f.values * np.outer(hK, hV)).sum() * cm
                    out += al * coef * np.outer(avgK, avgV)
                elif spec.symmetry == "mix_f1":
                    coef = (f.values * np.outer(hK, avgV)).sum() * cm
                    out += al * coef * np.outer(avgK, hV)
                else:
                    coef = (f.values * np.outer(avgK, hV)).sum() * cm
                    out += al * coef * np.outer(hK, avgV)
    return out


DOM3 = BoxDomain.square(1.0, 3)


class TestApplyAgainstOracle:
    @pytest.mark.parametrize("complexity", [(0, 0, 0, 0), (1, 0, 0, 0), (1, 2, 0, 1), (2, 2, 2, 2)])
    def test_shift(self, complexity):
        spec = random_shift(DOM3, complexity, seed=11)
        f = random_mesh(DOM3, 5)
        got = apply_model(spec, f).values
        assert np.abs(got - naive_apply(spec, f)).max() < 1e-12

    @pytest.mark.parametrize(
        "symmetry,complexity",
        [
            ("i0_direct", (0, 0, 1, 0)),
            ("i0_adjoint", (0, 0, 1, 2)),
            ("j0_direct", (1, 1, 0, 0)),
            ("j0_adjoint", (2, 0, 0, 0)),
        ],
    )
    def test_partial_paraproduct(self, symmetry, complexity):
        spec = random_partial_paraproduct(DOM3, symmetry, complexity, seed=3)
        f = random_mesh(DOM3, 6)
        got = apply_model(spec, f).values
        assert np.abs(got - naive_apply(spec, f)).max() < 1e-12

    @pytest.mark.parametrize("symmetry", ["avg_f", "avg_g", "mix_f1", "mix_f2"])
    def test_full_paraproduct(self, symmetry):
        spec = random_full_paraproduct(DOM3, symmetry, seed=4)
        f = random_mesh(DOM3, 7)
        got = apply_model(spec, f).values
        assert np.abs(got - naive_apply(spec, f)).max() < 1e-12


class TestSpecBasics:
    def test_zero_coefficients_give_zero(self):
        spec = rank_one_shift(DOM3, value=0.0)
        f = random_mesh(DOM3, 8)
        assert apply_model(spec, f).sup_norm() == 0.0

    def test_rank_one_projection(self):
        spec = rank_one_shift(DOM3)
        h = tensor_haar(DOM3, DOM3.interval(1, 0, 0), DOM3.interval(2, 0, 0))
        out = apply_model(spec, h)
        assert np.abs(out.values - h.values).max() < 1e-14

    def test_shift_size_validation(self):
        good = random_shift(DOM3, (1, 0, 0, 0), seed=1)
        bad = {k: v.copy() for k, v in good.coefficients.items()}
        key = next(iter(bad))
        bad[key][(0,) * 6] = 100.0
        with pytest.raises(CoefficientError):
            ModelOperatorSpec("shift", DOM3, (1, 0, 0, 0), "", bad)

    def test_partial_bmo_validation(self):
        good = random_partial_paraproduct(DOM3, "i0_direct", (0, 0, 1, 1), seed=2)
        bad = {k: v * 50.0 for k, v in good.coefficients.items()}
        with pytest.raises(CoefficientError):
            ModelOperatorSpec("partial_paraproduct", DOM3, (0, 0, 1, 1), "i0_direct", bad)

    def test_full_sup_validation(self):
        good = random_full_paraproduct(DOM3, "avg_f", seed=3)
        bad = {k: v * 5.0 for k, v in good.coefficients.items()}
        with pytest.raises(CoefficientError):
            ModelOperatorSpec("full_paraproduct", DOM3, (0, 0, 0, 0), "avg_f", bad)
        with pytest.raises(CoefficientError):
            ModelOperatorSpec("full_paraproduct", DOM3, (1, 0, 0, 0), "avg_f", good.coefficients)

    def test_serialization_regenerates_identically(self):
        for spec in (
            random_shift(DOM3, (1, 1, 0, 1), seed=9),
            random_partial_paraproduct(DOM3, "j0_adjoint", (1, 1, 0, 0), seed=10),
            random_full_paraproduct(DOM3, "mix_f2", seed=11),
        ):
            clone = spec_from_json(DOM3, spec_to_json(spec))
            assert set(clone.coefficients) == set(spec.coefficients)
            for k in spec.coefficients:
                assert np.array_equal(clone.coefficients[k], spec.coefficients[k])


class TestProductDecompose:
    def test_constant_b(self, unit_box5):
        f = random_mesh(unit_box5, 12)
        one = MeshFunction.constant(unit_box5, 1.0)
        a1, a2, a3, top = product_decompose(one, f, axis=2)
        assert a1.sup_norm() == 0.0 and a2.sup_norm() == 0.0
        from bpcl.dyadic import _block_mean, _upsample

        e0f = _upsample(_block_mean(f.values, 1, 0), 1, unit_box5.axis2.n)
        assert np.abs(a3.values - (f.values - e0f)).max() < 1e-12
        assert np.abs(top.values - e0f).max() < 1e-12

    def test_constant_f(self, unit_box5):
        b = random_mesh(unit_box5, 13)
        one = MeshFunction.constant(unit_box5, 1.0)
        a1, a2, a3, top = product_decompose(b, one, axis=2)
        assert a1.sup_norm() == 0.0 and a3.sup_norm() == 0.0
        from bpcl.dyadic import _block_mean, _upsample

        e0b = _upsample(_block_mean(b.values, 1, 0), 1, unit_box5.axis2.n)
        assert np.abs(a2.values - (b.values - e0b)).max() < 1e-12

    def test_reconstructs_product(self, unit_box5):
        b, f = random_mesh(unit_box5, 14), random_mesh(unit_box5, 15)
        for axis in (1, 2):
            a1, a2, a3, top = product_decompose(b, f, axis=axis)
            total = a1.values + a2.values + a3.values + top.values
            prod = b.values * f.values
            assert np.abs(total - prod).max() < 1e-12 * max(1.0, np.abs(prod).max())


class TestFractionalPositiveOp:
    def test_zero(self, unit_box5):
        assert fractional_positive_op(MeshFunction.zeros(unit_box5), 0.5, axis=1).sup_norm() == 0.0

    def test_geometric_sum_on_indicator(self, unit_box5):
        f = MeshFunction.constant(unit_box5, 1.0)
        out = fractional_positive_op(f, 0.5, axis=1)
        L = unit_box5.axis1.depth
        want = sum(2.0 ** (-k / 2.0) for k in range(L + 1))
        assert np.abs(out.values - want).max() < 1e-12
        assert want == pytest.approx((1 - 2 ** (-(L + 1) / 2.0)) / (1 - 2**-0.5))

    def test_smallest_scale_term_present(self, unit_box5):
        vals = np.zeros(unit_box5.shape)
        vals[3, 7] = 1.0
        out = fractional_positive_op(MeshFunction(unit_box5, vals), 0.5, axis=1)
        h = unit_box5.axis1.h
        assert out.values[3, 7].real >= h**0.5  # the cell's own term

    def test_alpha_validation(self, unit_box5):
        f = MeshFunction.constant(unit_box5, 1.0)
        with pytest.raises(ValueError):
            fractional_positive_op(f, 0.0, axis=1)
        with pytest.raises(ValueError):
            fractional_positive_op(f, 1.5, axis=2)
        with pytest.raises(ValueError):
            fractional_positive_op(f, 2.5, axis="both")

    def test_norm_band(self, measured):
        committed = bands.load_bands()["model/Aalpha_C"]
        value = measured("model")["model/Aalpha_C"]
        assert committed["lo"] <= value <= committed["hi"]


class TestCommutator:
    def test_constant_symbol_zero_cellwise(self, unit_box5):
        b = MeshFunction.constant(unit_box5, 2.0 - 1.0j)
        spec = random_shift(unit_box5, (1, 0, 1, 0), seed=16)
        f = random_mesh(unit_box5, 17)
        out = model_commutator(b, spec, f)
        assert out.sup_norm() < 1e-12

    def test_rank_one_hand_expansion(self):
        # [b, S]f = b <f,h> h - <b f, h> h for the rank-one projection S
        dom = DOM3
        spec = rank_one_shift(dom)
        h = tensor_haar(dom, dom.interval(1, 0, 0), dom.interval(2, 0, 0))
        b = MeshFunction.from_callable(dom, lambda x1, x2: np.sign(x2 - 0.5) + 0.0 * x1)
        f = random_mesh(dom, 18)
        got = model_commutator(b, spec, f)
        c1 = inner_product(f, h)
        c2 = inner_product(b * f, h)
        want = b.values * (c1 * h.values) - c2 * h.values
        assert np.abs(got.values - want).max() < 1e-12

    def test_holder_band(self, measured):
        committed = bands.load_bands()["model/commutator_holder_C"]
        value = measured("model")["model/commutator_holder_C"]
        assert committed["lo"] <= value <= committed["hi"]


class TestCommutatorDecomposition:
    def test_constant_b_all_zero(self, unit_box5):
        b = MeshFunction.constant(unit_box5, 5.0)
        spec = random_shift(unit_box5, (1, 0, 0, 1), seed=19)
        f, g = random_mesh(unit_box5, 20), random_mesh(unit_box5, 21)
        dec = commutator_decompose_model(b, spec, f, g)
        assert abs(dec.core) < 1e-12 and abs(dec.total) < 1e-12

    def test_zero_complexity_core_vanishes(self, unit_box5):
        # J1 = J2 = V forces <b>_{J2} - <b>_{J1} = 0
        prof = np.sin(np.arange(unit_box5.axis2.n))
        b = MeshFunction(unit_box5, np.tile(prof[None, :], (unit_box5.axis1.n, 1)))
        spec = random_shift(unit_box5, (0, 0, 0, 0), seed=22)
        f, g = random_mesh(unit_box5, 23), random_mesh(unit_box5, 24)
        dec = commutator_decompose_model(b, spec, f, g)
        assert abs(dec.core) < 1e-12
        assert dec.defect < 1e-10

    def test_labeled_terms_sum(self, unit_box5):
        prof = np.cos(3 * (np.arange(unit_box5.axis2.n) + 0.5) / unit_box5.axis2.n)
        b = MeshFunction(unit_box5, np.tile(prof[None, :], (unit_box5.axis1.n, 1)))
        spec = random_shift(unit_box5, (1, 1, 1, 1), seed=25)
        f, g = random_mesh(unit_box5, 26), random_mesh(unit_box5, 27)
        dec = commutator_decompose_model(b, spec, f, g)
        assert dec.defect < 1e-10

    def test_average_difference_holder_bound(self, unit_box5):
        # |<b>_{J2} - <b>_{J1}| <= Hol(b; alpha2) l(V)^{alpha2} for all J1, J2 in V
        from bpcl.modelops import _avg_pyramid
        from bpcl.norms import holder_seminorm

        prof = np.cos(2 * np.pi * (np.arange(32) + 0.5) / 32)
        b = MeshFunction(unit_box5, np.tile(prof[None, :], (32, 1)))
        alpha2 = 0.5
        hol = holder_seminorm(b, alpha2, axis=2)
        pyr = _avg_pyramid(prof.astype(complex), 0)
        for c in range(4):
            ell = unit_box5.axis2.length_at(c)
            for j in range(0, 5 - c):
                groups = pyr[c + j].reshape(1 << c, 1 << j)
                spread = np.abs(groups[:, :, None] - groups[:, None, :]).max()
                assert spread <= hol * ell**alpha2 + 1e-12

    def test_x1_variation_rejected(self, unit_box5):
        b = MeshFunction.from_callable(unit_box5, lambda x1, x2: x1 + 0.0 * x2)
        spec = random_shift(unit_box5, (0, 0, 0, 0), seed=28)
        f, g = random_mesh(unit_box5, 29), random_mesh(unit_box5, 30)
        with pytest.raises(HypothesisError):
            commutator_decompose_model(b, spec, f, g)


class TestBmoHelpers:
    def test_flat_bmo_single_coefficient(self):
        g = Grid1D(0.0, 1.0, 4)
        beta = np.zeros(15)
        beta[flat_offset(2) + 1] = 2.0  # one level-2 interval, |K0| = 1/4 at its own top
        assert dyadic_bmo_flat(beta, g) == pytest.approx(2.0 / (0.25**0.5))

    def test_h1bmo_band(self, measured):
        committed = bands.load_bands()["model/h1bmo_C"]
        value = measured("model")["model/h1bmo_C"]
        assert committed["lo"] <= value <= committed["hi"]


class TestBoundednessBands:
    def test_norm_ratio_bands(self, measured):
        committed = bands.load_bands()
        values = measured("model")
        for name, val in values.items():
            if "/bound_" in name:
                assert committed[name]["lo"] <= val <= committed[name]["hi"], name

    def test_pointwise_and_complexity_bands(self, measured):
        committed = bands.load_bands()
        values = measured("model")
        names = ["model/pointwise_para_C"] + [
            f"model/shift_ratio_complexity_{m}" for m in (0, 1, 2)
        ]
        for name in names:
            assert committed[name]["lo"] <= values[name] <= committed[name]["hi"], name

    def test_polynomial_envelope_over_complexity(self, measured):
        values = measured("model")
        pts = [(m, values[f"model/shift_ratio_complexity_{m}"]) for m in (0, 1, 2)]
        xs, ys = zip(*pts)
        coeffs = np.polyfit(xs, ys, 2)
        fitted = np.polyval(coeffs, xs)
        assert np.all(fitted - np.asarray(ys) >= -1e-9)
