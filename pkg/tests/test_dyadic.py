import numpy as np
import pytest

from bpcl import bands
from bpcl.dyadic import (
    HaarFunction,
    haar_values_1d,
    martingale_diff,
    maximal,
    maximal_1d,
    sparse_stopping,
    square_function,
    tensor_haar,
)
from bpcl.lattice import (
    DyadicInterval,
    DyadicRectangle,
    GeometryError,
    Grid1D,
    MeshFunction,
    MeshFunction1D,
    mixed_norm,
)

from conftest import random_mesh


class TestHaar:
    def test_l2_normalization_and_mean(self, unit_box5):
        g = unit_box5.axis1
        for level, idx in ((0, 0), (2, 3), (4, 9)):
            I = unit_box5.interval(1, level, idx)
            h = HaarFunction(I).values()
            assert (np.abs(h) ** 2).sum() * g.h == pytest.approx(1.0, rel=1e-12)
            assert h.sum() * g.h == pytest.approx(0.0, abs=1e-14)

    def test_orthonormality_kronecker(self, unit_box5):
        rng = np.random.default_rng(0)
        ints = [(k, int(rng.integers(0, 1 << k))) for k in range(5) for _ in range(3)]
        g = unit_box5.axis1
        for k1, i1 in ints:
            for k2, i2 in ints:
                h1 = haar_values_1d(unit_box5.interval(1, k1, i1))
                h2 = haar_values_1d(unit_box5.interval(1, k2, i2))
                ip = (h1 * h2).sum() * g.h
                want = 1.0 if (k1, i1) == (k2, i2) else 0.0
                assert ip == pytest.approx(want, abs=1e-12)

    def test_cell_level_has_no_cancellative_haar(self, unit_box5):
        with pytest.raises(GeometryError):
            haar_values_1d(unit_box5.interval(1, 5, 0))


class TestMartingale:
    def test_constant_vanishes(self, unit_box5):
        b = MeshFunction.constant(unit_box5, 3.0)
        I = unit_box5.interval(1, 2, 1)
        assert martingale_diff(b, I).sup_norm() == 0.0

    def test_haar_eigenfunction(self, unit_box5):
        I, J = unit_box5.interval(1, 1, 0), unit_box5.interval(2, 2, 2)
        h = tensor_haar(unit_box5, I, J)
        d = martingale_diff(h, DyadicRectangle(I, J))
        assert np.abs(d.values - h.values).max() < 1e-14

    def test_depth_overflow(self, unit_box5):
        f = random_mesh(unit_box5, 1)
        with pytest.raises(GeometryError):
            martingale_diff(f, unit_box5.interval(1, 5, 0))

    def test_biparameter_reconstruction(self, unit_box5):
        from bpcl.dyadic import _block_mean, _upsample, delta_level

        f = random_mesh(unit_box5, 2)
        n1, n2 = unit_box5.shape
        e1 = _upsample(_block_mean(f.values, 0, 0), 0, n1)
        e2 = _upsample(_block_mean(f.values, 1, 0), 1, n2)
        e12 = _upsample(_block_mean(e1, 1, 0), 1, n2)
        rec = e12.copy()
        for k1 in range(5):
            rec += delta_level(e2, 0, k1)
        for k2 in range(5):
            rec += delta_level(e1, 1, k2)
        for k1 in range(5):
            d1 = delta_level(f.values, 0, k1)
            for k2 in range(5):
                rec += delta_level(d1, 1, k2)
        assert np.abs(rec - f.values).max() < 1e-12


class TestSquareFunction:
    def test_zero(self, unit_box5):
        assert square_function(MeshFunction.zeros(unit_box5)).sup_norm() == 0.0

    def test_single_haar_term(self, unit_box5):
        I, J = unit_box5.interval(1, 2, 1), unit_box5.interval(2, 3, 4)
        h = tensor_haar(unit_box5, I, J)
        s = square_function(h, "S")
        ind = MeshFunction.indicator(unit_box5, DyadicRectangle(I, J))
        want = ind.values.real / (I.length * J.length) ** 0.5
        assert np.abs(s.values - want).max() < 1e-12
        assert mixed_norm(s, 2.0, 2.0) == pytest.approx(mixed_norm(h, 2.0, 2.0), rel=1e-12)

    def test_ratio_bands(self, unit_box5):
        committed = bands.load_bands()
        rng = np.random.default_rng(22)
        for (p1, p2) in ((2, 2), (2, 3), (3, 2)):
            lo = committed[f"dyadic/square_ratio_{p1}{p2}_lo"]["lo"]
            hi = committed[f"dyadic/square_ratio_{p1}{p2}_hi"]["hi"]
            for _ in range(10):
                f = MeshFunction(
                    unit_box5,
                    rng.standard_normal(unit_box5.shape)
                    + 1j * rng.standard_normal(unit_box5.shape),
                )
                ratio = mixed_norm(square_function(f, "S"), p1, p2) / mixed_norm(f, p1, p2)
                assert lo <= ratio <= hi

    def test_one_parameter_variants(self, unit_box5):
        f = random_mesh(unit_box5, 3)
        s1 = square_function(f, "S1")
        s2 = square_function(f, "S2")
        assert s1.sup_norm() > 0 and s2.sup_norm() > 0
        with pytest.raises(ValueError):
            square_function(f, "S3")


class TestMaximal:
    def test_unit_function(self, unit_box5):
        f = MeshFunction.constant(unit_box5, 1.0)
        for which in ("M1", "M2", "M_strong"):
            assert np.abs(maximal(f, which).values - 1.0).max() < 1e-14

    def test_fractional_indicator_example(self):
        # 1d box [0,1): averages of the indicator over its own support are 1,
        # so the level-0 term l(Q)^{1/2} <1>_Q = 1 wins everywhere
        g = Grid1D(0.0, 1.0, 6)
        u = MeshFunction1D(g, np.ones(g.n))
        m = maximal_1d(u, alpha=0.5)
        assert np.abs(m.values - 1.0).max() < 1e-14

    def test_dominates_function(self, unit_box5):
        f = random_mesh(unit_box5, 4)
        m = maximal(f, "M_strong")
        assert np.all(m.values.real + 1e-12 >= np.abs(f.values))

    def test_fractional_norm_band(self):
        committed = bands.load_bands()["dyadic/maxfrac_C"]
        rng = np.random.default_rng(23)
        g = Grid1D(0.0, 1.0, 8)
        worst = 0.0
        for _ in range(100):
            u = MeshFunction1D(g, rng.standard_normal(g.n))
            worst = max(worst, maximal_1d(u, 0.25).lp_norm(4.0) / u.lp_norm(2.0))
        assert committed["lo"] <= worst <= committed["hi"]

    def test_alpha_validation(self, unit_box5):
        f = MeshFunction.constant(unit_box5, 1.0)
        with pytest.raises(ValueError):
            maximal(f, "M_alpha", alpha=1.0, axis=1)
        with pytest.raises(ValueError):
            maximal(f, "M_alpha", alpha=2.0, axis="both")


def scan_stopping_oracle(values, h, root_cells):
    """Exhaustive maximal-subinterval scan for the first stopping generation."""
    n = len(values)
    root_avg = np.abs(values).mean()
    hits = []
    for k in range(1, int(np.log2(n)) + 1):
        w = n >> k
        for m in range(1 << k):
            blk = np.abs(values[m * w : (m + 1) * w])
            if blk.mean() > 2 * root_avg:
                covered = any(
                    (m >> (k - kk)) == mm for kk, mm in hits if kk < k
                )
                if not covered:
                    hits.append((k, m))
    return hits


class TestSparseStopping:
    def test_zero_function(self):
        g = Grid1D(0.0, 1.0, 5)
        col = sparse_stopping(MeshFunction1D(g, np.zeros(g.n)))
        assert col.node_count() == 1
        assert next(iter(col.all_nodes())).piece_sup == 0.0

    def test_haar_has_no_stopping(self):
        g = Grid1D(0.0, 1.0, 5)
        h = haar_values_1d(DyadicInterval(g, 1, 0, 0))
        col = sparse_stopping(MeshFunction1D(g, h))
        assert col.node_count() == 1
        root = next(iter(col.all_nodes()))
        assert np.abs(col.reconstruct() - h).max() < 1e-14

    def test_hand_worked_example(self):
        # f = 1_[0,1/16) - 1/16 on [0,1): first stopping generation is {[0,1/4)}
        g = Grid1D(0.0, 1.0, 6)
        vals = np.full(g.n, -1.0 / 16.0)
        vals[: g.n // 16] += 1.0
        u = MeshFunction1D(g, vals)
        col = sparse_stopping(u)
        first = [(n.level, n.index[0]) for n in col.generations[1]]
        assert first == [(2, 0)]
        # cross-check by exhaustive scan of all dyadic subintervals
        assert scan_stopping_oracle(vals, g.h, None) == [(2, 0)]
        root_avg = np.abs(vals).mean()
        assert root_avg == pytest.approx(15.0 / 128.0)

    def test_decomposition_properties_on_random_inputs(self):
        committed = bands.load_bands()
        g = Grid1D(0.0, 1.0, 8)
        rng = np.random.default_rng(21)
        for t in range(20):
            vals = rng.uniform(-1, 1, g.n) + 1j * rng.uniform(-1, 1, g.n)
            vals -= vals.mean()
            u = MeshFunction1D(g, vals)
            col = sparse_stopping(u)
            assert col.half_sparse_ok()
            for node in col.all_nodes():
                assert abs(node.piece.sum() * g.h) <= 1e-10
            assert np.abs(col.reconstruct() - vals).max() < 1e-12
            m = maximal_1d(u).values.real
            for s in (0.5, 1.0, 2.0):
                dom = col.piece_sup_sum(s) / np.maximum(m**s, 1e-300)
                assert dom.max() <= committed[f"dyadic/sparse_dom_C_s{s}"]["hi"]

    def test_mean_zero_required(self):
        g = Grid1D(0.0, 1.0, 4)
        with pytest.raises(ValueError, match="zero mean"):
            sparse_stopping(MeshFunction1D(g, np.ones(g.n)))

    def test_square_mode(self, unit_box5):
        rng = np.random.default_rng(5)
        vals = rng.uniform(-1, 1, unit_box5.shape)
        vals -= vals.mean()
        col = sparse_stopping(MeshFunction(unit_box5, vals))
        assert col.mode == "square"
        assert col.half_sparse_ok()
        assert np.abs(col.reconstruct() - vals).max() < 1e-12
        tree = col.to_tree_json()
        assert {"level", "index", "avg_abs", "piece_sup", "e_set_measure"} == set(tree[0])

    def test_fefferman_stein_band(self, measured):
        committed = bands.load_bands()["dyadic/fs_frac_C"]
        value = measured("dyadic")["dyadic/fs_frac_C"]
        assert committed["lo"] <= value <= committed["hi"]
