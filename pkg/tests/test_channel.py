import math

import numpy as np
import pytest

from ris_pnc.channel import (
    CeeSpec,
    ChannelRealization,
    NodeGeometry,
    apply_cee,
    free_space_path_loss,
    sample_realization,
)

# (c / (4 pi f))^2 at 28 GHz, evaluated by hand: 8.5202e-4 squared
FSPL_1M_28GHZ = 7.2595e-7


class TestPathLoss:
    def test_one_metre(self):
        assert free_space_path_loss(1.0, 28e9) == pytest.approx(FSPL_1M_28GHZ, rel=1e-4)
        assert 10 * math.log10(free_space_path_loss(1.0, 28e9)) == pytest.approx(-61.39, abs=0.01)

    def test_inverse_square(self):
        assert free_space_path_loss(2.0, 28e9) == pytest.approx(free_space_path_loss(1.0, 28e9) / 4, rel=1e-15)

    def test_table_geometry_distance(self):
        geom = NodeGeometry()
        d = geom.distances()
        assert d["h_a"] == pytest.approx(math.sqrt(37))
        assert d["g_a"] == pytest.approx(math.sqrt(36.25))
        assert d["h_b"] == pytest.approx(math.sqrt(65))
        assert d["g_b"] == pytest.approx(math.sqrt(64.25))
        assert geom.path_losses()["h_a"] == pytest.approx(FSPL_1M_28GHZ / 37, rel=1e-4)

    @pytest.mark.parametrize("d,f", [(0.0, 28e9), (-1.0, 28e9), (1.0, 0.0)])
    def test_rejects_nonpositive(self, d, f):
        with pytest.raises(ValueError):
            free_space_path_loss(d, f)

    def test_coincident_nodes_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            NodeGeometry(ue_a=(0, 8, 2.5))


class TestSampling:
    def test_seed_reproducible(self):
        geom = NodeGeometry()
        r1 = sample_realization(geom, 1, np.random.default_rng(11))
        r2 = sample_realization(geom, 1, np.random.default_rng(11))
        for k in ("h_a", "g_a", "h_b", "g_b"):
            np.testing.assert_array_equal(getattr(r1, k), getattr(r2, k))

    def test_unit_second_moment_fading(self):
        geom = NodeGeometry()
        real = sample_realization(geom, 10_000, np.random.default_rng(3))
        for k in ("h_a", "g_a", "h_b", "g_b"):
            fading = getattr(real, k) / math.sqrt(real.path_loss[k])
            assert np.mean(np.abs(fading) ** 2) == pytest.approx(1.0, abs=0.05)
            assert abs(np.mean(fading)) < 0.05

    def test_path_loss_from_geometry(self):
        geom = NodeGeometry()
        real = sample_realization(geom, 4, np.random.default_rng(0))
        for k, d in geom.distances().items():
            assert real.path_loss[k] == pytest.approx(free_space_path_loss(d, 28e9))

    def test_perfect_csi_by_default(self):
        real = sample_realization(NodeGeometry(), 8, np.random.default_rng(0))
        assert real.h_a_est is real.h_a and real.g_b_est is real.g_b

    def test_needs_an_element(self):
        with pytest.raises(ValueError):
            sample_realization(NodeGeometry(), 0, np.random.default_rng(0))


class TestCee:
    def test_db_conversion_absolute(self):
        assert CeeSpec(-110.0).variance() == pytest.approx(1e-14)
        assert CeeSpec(None).variance() == 0.0

    def test_relative_mode_scales_with_link_power(self):
        assert CeeSpec(-10.0, "relative").variance(2e-8) == pytest.approx(2e-9)

    def test_zero_variance_is_identity(self):
        real = sample_realization(NodeGeometry(), 16, np.random.default_rng(0))
        est = apply_cee(real, CeeSpec(None), np.random.default_rng(1))
        np.testing.assert_array_equal(est.h_a_est, real.h_a)
        np.testing.assert_array_equal(est.g_b_est, real.g_b)

    def test_error_variance_and_independence(self):
        geom = NodeGeometry()
        real = sample_realization(geom, 10_000, np.random.default_rng(5))
        spec = CeeSpec(-80.0)
        v = spec.variance()
        est = apply_cee(real, spec, np.random.default_rng(6))
        errs = {k: getattr(est, k + "_est") - getattr(real, k) for k in ("h_a", "g_a", "h_b", "g_b")}
        for e in errs.values():
            assert np.mean(np.abs(e) ** 2) == pytest.approx(v, rel=0.05)
        e_h, e_g = errs["h_a"], errs["g_a"]
        rho = np.abs(np.vdot(e_h, e_g)) / np.sqrt(np.vdot(e_h, e_h).real * np.vdot(e_g, e_g).real)
        assert rho < 0.05

    def test_true_vectors_untouched(self):
        real = sample_realization(NodeGeometry(), 16, np.random.default_rng(0))
        before = real.h_a.copy()
        est = apply_cee(real, CeeSpec(-60.0), np.random.default_rng(1))
        np.testing.assert_array_equal(est.h_a, before)
        assert not np.array_equal(est.h_a_est, before)
        assert isinstance(est, ChannelRealization)

    def test_invalid_mode(self):
        with pytest.raises(ValueError):
            CeeSpec(-60.0, "bogus")
