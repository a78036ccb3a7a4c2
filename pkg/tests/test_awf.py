import numpy as np
import pytest

from bpcl import bands
from bpcl.awf import (
    AwfConfig,
    DivisionError,
    awf_decompose,
    bootstrap_check,
    extremal_symbol_test_function,
    osc_lower_bound_certificate,
)
from bpcl.lattice import BoxDomain, MeshFunction, oscillation, reflect_rectangle

from conftest import mean_zero_on, random_mesh


def haar_pattern_on(domain, rect):
    blk = np.ones((rect.I.n_cells, rect.J.n_cells))
    blk[: rect.I.n_cells // 2, :] = -1.0
    vals = np.zeros(domain.shape, dtype=np.complex128)
    vals[rect.cells] = blk
    return MeshFunction(domain, vals)


class TestBootstrap:
    def test_canonical_bands(self, field_box, kernel):
        committed = bands.load_bands()
        rep = bootstrap_check(kernel, field_box.rectangle(5, 0, 5, 0), 8.0)
        assert committed["awf/bootstrap_csize"]["lo"] <= rep.center_value_normalized
        assert rep.center_value_normalized <= committed["awf/bootstrap_csize"]["hi"]
        for lohi in (
            rep.int_over_R_signed, rep.int_over_R_abs,
            rep.int_over_refl_signed, rep.int_over_refl_abs,
        ):
            assert committed["awf/bootstrap_int_lo"]["lo"] <= lohi[0]
            assert lohi[1] <= committed["awf/bootstrap_int_hi"]["hi"]

    def test_doubling_a_shrinks_center_difference(self, kernel):
        # the unnormalized bound scales like omega(1/A) = 1/A: doubling A
        # shrinks it by a factor in [1.5, 3]
        dom = BoxDomain.square(64.0, 8)
        R = dom.rectangle(6, 0, 6, 0)
        rep8 = bootstrap_check(kernel, R, 8.0)
        rep16 = bootstrap_check(kernel, R, 16.0)
        shrink = rep8.center_diff_times_a2 / rep16.center_diff_times_a2
        assert 1.5 <= shrink <= 3.0

    def test_a_below_three_rejected(self, field_box, kernel):
        with pytest.raises(ValueError):
            bootstrap_check(kernel, field_box.rectangle(5, 0, 5, 0), 2.5)


class TestDecomposition:
    def test_zero_input(self, field_box, kernel):
        R = field_box.rectangle(5, 0, 5, 0)
        out = awf_decompose(kernel, MeshFunction.zeros(field_box), R, AwfConfig(A=8.0))
        assert out.residual == 0.0 and out.rho == 0.0
        assert out.h1.sup_norm() == 0.0 and out.f_err.sup_norm() == 0.0

    def test_haar_pattern_reconstruction(self, field_box, kernel):
        committed = bands.load_bands()
        R = field_box.rectangle(5, 0, 5, 0)
        f = haar_pattern_on(field_box, R)
        out = awf_decompose(kernel, f, R, AwfConfig(A=8.0))
        assert out.residual <= 1e-8
        assert out.err_mean_abs <= 1e-10 * f.abs_integral()
        assert out.rho <= committed["awf/rho8_haar"]["hi"]
        assert out.rho < 1.0

    def test_support_conditions_cell_exact(self, field_box, kernel):
        R = field_box.rectangle(5, 2, 5, 1)
        refl = reflect_rectangle(R, 8.0, kernel)
        f = mean_zero_on(field_box, R, 31)
        out = awf_decompose(kernel, f, R, AwfConfig(A=8.0))
        ind_R = np.zeros(field_box.shape, dtype=bool)
        ind_R[R.cells] = True
        ind_refl = np.zeros(field_box.shape, dtype=bool)
        ind_refl[refl.cells] = True
        assert np.array_equal(out.g1.values != 0, ind_refl)
        assert np.array_equal(out.g2.values != 0, ind_R)
        assert not np.any(out.h1.values[~ind_R])
        assert not np.any(out.h2.values[~ind_refl])
        assert not np.any(out.f_err.values[~ind_R])

    def test_residual_decay_in_a(self, kernel):
        dom = BoxDomain.square(64.0, 8)
        R = dom.rectangle(6, 0, 6, 0)
        f = mean_zero_on(dom, R, 32)
        rho8 = awf_decompose(kernel, f, R, AwfConfig(A=8.0)).rho
        rho16 = awf_decompose(kernel, f, R, AwfConfig(A=16.0)).rho
        assert rho16 / rho8 <= 0.67

    def test_mean_zero_required(self, field_box, kernel):
        R = field_box.rectangle(5, 0, 5, 0)
        f = MeshFunction.indicator(field_box, R)
        with pytest.raises(ValueError, match="zero mean"):
            awf_decompose(kernel, f, R, AwfConfig(A=8.0))

    def test_support_inside_rect_required(self, field_box, kernel):
        R = field_box.rectangle(5, 0, 5, 0)
        f = mean_zero_on(field_box, field_box.rectangle(5, 1, 5, 0), 33)
        with pytest.raises(ValueError, match="supported inside"):
            awf_decompose(kernel, f, R, AwfConfig(A=8.0))

    def test_degenerate_kernel_reports_division(self, field_box):
        from bpcl.kernels import KernelSpec

        # kernel that vanishes on the reflected rectangle: division must fail
        def _eval(x1, x2, y1, y2):
            return np.zeros(np.broadcast(x1, x2, y1, y2).shape)

        dead = KernelSpec(
            name="dead", size_constant=1.0, delta=1.0, nondegeneracy_constant=0.0,
            evaluate=_eval, witness=lambda x1, x2, r1, r2: (x1 + 2 * r1, x2 + 2 * r2),
        )
        R = field_box.rectangle(5, 0, 5, 0)
        f = mean_zero_on(field_box, R, 34)
        with pytest.raises(DivisionError):
            awf_decompose(dead, f, R, AwfConfig(A=8.0))

    def test_config_validates_a(self):
        with pytest.raises(ValueError):
            AwfConfig(A=2.0)


class TestSweepConstants:
    def test_size_constants_within_frozen_bands(self, measured):
        # the normalized sups of h1, h2 and the error stay below their frozen bounds
        committed = bands.load_bands()
        values = measured("awf")
        for name in (
            "awf/residual_max", "awf/err_mean_rel_max", "awf/rho_max",
            "awf/h1_bound_max", "awf/h2_bound_max", "awf/err_bound_max",
            "awf/osc_cert_rho_max", "awf/decay_ratio",
        ):
            assert values[name] <= committed[name]["hi"], name


class TestExtremalFunction:
    def test_pairing_captures_oscillation(self, field_box):
        R = field_box.rectangle(5, 0, 5, 0)
        b = random_mesh(field_box, 35)
        f = extremal_symbol_test_function(b, R)
        assert f.sup_norm() <= 1.0 + 1e-12
        assert abs(f.integral()) <= 1e-12 * max(f.abs_integral(), 1e-30)
        pairing = abs((b.values[R.cells] * f.values[R.cells]).sum()) * field_box.cell_measure
        target = R.measure * oscillation(b, R)
        assert pairing >= target / 2.0 - 1e-12


class TestCertificate:
    def test_constant_symbol_all_zero(self, field_box, kernel):
        R = field_box.rectangle(5, 0, 5, 0)
        b = MeshFunction.constant(field_box, 1.0 + 2.0j)
        cert = osc_lower_bound_certificate(b, kernel, R, AwfConfig(A=8.0))
        assert cert.lhs <= 1e-12 and cert.rhs <= 1e-12

    def test_scaling_invariance(self, field_box, kernel):
        R = field_box.rectangle(5, 1, 5, 2)
        b = random_mesh(field_box, 36)
        c1 = osc_lower_bound_certificate(b, kernel, R, AwfConfig(A=8.0))
        c2 = osc_lower_bound_certificate(7.3 * b, kernel, R, AwfConfig(A=8.0))
        assert c2.ratio == pytest.approx(c1.ratio, rel=1e-10)
        assert c2.lhs == pytest.approx(7.3 * c1.lhs, rel=1e-12)

    def test_certificate_constant_band(self, field_box, kernel):
        committed = bands.load_bands()
        b = MeshFunction.from_callable(field_box, lambda x1, x2: x1 + x2)
        cert = osc_lower_bound_certificate(
            b, kernel, field_box.rectangle(5, 0, 5, 0), AwfConfig(A=8.0)
        )
        assert cert.ratio <= committed["awf/osc_cert_C"]["hi"]
        assert cert.rho < 0.5  # absorption is numerically valid at the default A

    def test_dict_round_trip(self, field_box, kernel):
        R = field_box.rectangle(5, 0, 5, 0)
        b = random_mesh(field_box, 37)
        cert = osc_lower_bound_certificate(b, kernel, R, AwfConfig(A=8.0))
        d = cert.as_dict()
        assert set(d) == {"R", "A", "residual", "rho", "lhs", "rhs", "ratio"}
        assert d["R"] == {"level1": 5, "index1": 0, "level2": 5, "index2": 0}
