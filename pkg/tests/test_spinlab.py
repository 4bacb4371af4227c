import math

import numpy as np
import pytest

from edur import spinlab
from edur.errors import InvalidInput

SQRT2 = math.sqrt(2)
GRID = spinlab.default_grid()


def dense_scan_minimum(assumption, step=1e-6):
    theta = np.arange(step, math.pi / 2 + step / 2, step)
    s = np.sin(theta)
    if assumption == "heisenberg_product":
        k = 1 / (2 * SQRT2 * s) + s / SQRT2
    else:
        k = np.where(s >= 1 / SQRT2, np.sqrt(s * s + 0.5) / SQRT2, (1 + 2 * s * s) / (SQRT2 + 2 * s))
    i = int(np.argmin(k))
    return float(theta[i]), float(k[i])


class TestSetting:
    @pytest.mark.parametrize("theta", GRID[::20])
    def test_unit_pauli_vectors(self, theta):
        st = spinlab.spin_setting(theta)
        assert np.max(np.abs(st.A.op @ st.A.op - np.eye(2))) <= 1e-12
        assert np.max(np.abs(st.B.op @ st.B.op - np.eye(2))) <= 1e-12

    @pytest.mark.parametrize("theta", [-0.1, 1.6, math.nan])
    def test_out_of_range(self, theta):
        with pytest.raises(InvalidInput):
            spinlab.spin_setting(theta)


class TestPaperMode:
    def test_half_pi(self):
        r = spinlab.paper_mode(math.pi / 2)
        got = (r.sigma_a, r.sigma_b, r.epsilon_paper, r.eta_paper, r.ozawa_lhs_paper, r.commutator_abs)
        assert got == pytest.approx((1, 1 / SQRT2, 0, 1, 1, SQRT2), abs=1e-15)
        assert r.ozawa_rhs == pytest.approx(1 / SQRT2)
        assert r.ozawa_ok_paper

    def test_zero(self):
        r = spinlab.paper_mode(0.0)
        assert r.sigma_a == r.eta_paper == r.ozawa_lhs_paper == r.commutator_abs == 0.0
        assert r.ozawa_ok_paper
        assert r.coeff_mochi21 is None

    def test_pi_over_six(self):
        r = spinlab.paper_mode(math.pi / 6)
        assert r.ozawa_lhs_paper == pytest.approx(0.25)
        assert r.ozawa_rhs == pytest.approx(1 / (2 * SQRT2))
        assert not r.ozawa_ok_paper

    def test_flag_on_grid(self):
        for theta in GRID:
            s = math.sin(theta)
            # no grid point sits inside the tolerance band around the boundary
            assert abs(s - 1 / SQRT2) < 1e-15 or abs(s - 1 / SQRT2) > 2e-9
            ok = spinlab.paper_mode(theta).ozawa_ok_paper
            if theta == 0.0:
                assert ok  # commuting point, 0 >= 0
            else:
                assert ok == (not s < 1 / SQRT2 - 1e-9)


class TestEpsilonBound:
    @pytest.mark.parametrize("theta", GRID[::30])
    def test_heisenberg(self, theta):
        assert spinlab.epsilon_lower_bound(theta, "heisenberg_product") == 1 / SQRT2

    def test_ozawa_boundary(self):
        assert spinlab.epsilon_lower_bound(math.pi / 4, "ozawa") == pytest.approx(0.0, abs=1e-15)

    def test_ozawa_pi_over_six(self):
        expected = (2 - SQRT2) / (2 * (2 + SQRT2))
        assert spinlab.epsilon_lower_bound(math.pi / 6, "ozawa") == pytest.approx(expected, abs=1e-15)
        assert expected == pytest.approx(0.0858, abs=1e-4)

    def test_ozawa_bound_saturates_ozawa(self):
        # at ε = bound the paper-mode Ozawa sum equals the right-hand side
        for theta in GRID[1:90]:
            s = math.sin(theta)
            e = spinlab.epsilon_lower_bound(theta, "ozawa")
            assert e * s + e / SQRT2 + s * s == pytest.approx(s / SQRT2, abs=1e-14)

    def test_unknown(self):
        with pytest.raises(InvalidInput):
            spinlab.epsilon_lower_bound(0.3, "robertson")


class TestBoundCoefficient:
    def test_heisenberg_min(self):
        assert spinlab.bound_coefficient(math.asin(1 / SQRT2), "heisenberg_product") == pytest.approx(1.0, abs=1e-15)

    def test_ozawa_min(self):
        theta = math.asin(1 - 1 / SQRT2)
        assert spinlab.bound_coefficient(theta, "ozawa") == pytest.approx(2 - SQRT2, abs=1e-15)

    def test_ozawa_upper_branch(self):
        assert spinlab.bound_coefficient(math.pi / 4, "ozawa") == pytest.approx(1 / SQRT2, abs=1e-15)

    def test_singular(self):
        with pytest.raises(ZeroDivisionError):
            spinlab.bound_coefficient(0.0, "heisenberg_product")

    @pytest.mark.parametrize("assumption", spinlab.ASSUMPTIONS)
    def test_internal_consistency(self, assumption):
        for theta in GRID[1:]:
            s = math.sin(theta)
            e = spinlab.epsilon_lower_bound(theta, assumption)
            product = math.hypot(e, s) * math.hypot(s, 1 / SQRT2)
            k = spinlab.bound_coefficient(theta, assumption)
            assert k * SQRT2 * s == pytest.approx(product, abs=1e-10)

    def test_continuous_at_branch_point(self):
        s0 = 1 / SQRT2
        lo = (1 + 2 * s0 * s0) / (SQRT2 + 2 * s0)
        hi = math.sqrt(s0 * s0 + 0.5) / SQRT2
        assert lo == pytest.approx(hi, abs=1e-15)


class TestCoefficientMinimum:
    def test_heisenberg(self):
        theta, value = spinlab.coefficient_minimum("heisenberg_product")
        assert value == pytest.approx(1.0, abs=1e-9)
        assert math.sin(theta) == pytest.approx(1 / SQRT2, abs=1e-6)

    def test_ozawa(self):
        theta, value = spinlab.coefficient_minimum("ozawa")
        assert value == pytest.approx(2 - SQRT2, abs=1e-9)
        assert math.sin(theta) == pytest.approx(1 - 1 / SQRT2, abs=1e-6)

    @pytest.mark.parametrize("assumption", spinlab.ASSUMPTIONS)
    def test_dense_scan(self, assumption):
        theta, value = spinlab.coefficient_minimum(assumption)
        scan_theta, scan_value = dense_scan_minimum(assumption)
        assert value == pytest.approx(scan_value, abs=1e-9)
        assert theta == pytest.approx(scan_theta, abs=1e-5)


class TestSweep:
    def test_paper_mode_coefficient_minimum(self):
        recs = spinlab.sweep(spinlab.default_grid(2001), "paper")
        k = min(r.coeff_mochi11 for r in recs if r.theta > 0)
        assert k == pytest.approx(2 - SQRT2, abs=1e-6)

    def test_theta_zero_not_applicable(self):
        r = spinlab.sweep([0.0], "both")[0]
        assert r.commutator_abs == 0
        assert r.ratio_model is None and r.mochi_ok_model is None and r.coeff_mochi21 is None

    def test_model_half_pi(self):
        r = spinlab.sweep([math.pi / 2], "model")[0]
        assert r.eta_model == pytest.approx(SQRT2, abs=1e-10)
        assert r.epsilon_model <= 1e-10
        assert r.ozawa_ok_model
        assert r.epsilon_paper is None

    def test_model_commutator_matches_closed_form(self):
        for r in spinlab.sweep(GRID, "model"):
            assert r.commutator_abs == pytest.approx(SQRT2 * math.sin(r.theta), abs=1e-12)
            assert r.ozawa_ok_model and r.robertson_ok_model

    def test_grid_order_with_threads(self):
        grid = GRID[::-7]
        serial = spinlab.sweep(grid, "both", workers=1)
        threaded = spinlab.sweep(grid, "both", workers=4)
        assert [r.theta for r in threaded] == grid
        assert serial == threaded

    def test_bad_inputs(self):
        with pytest.raises(InvalidInput):
            spinlab.sweep([], "both")
        with pytest.raises(InvalidInput):
            spinlab.sweep([0.1], "oracle")
        with pytest.raises(InvalidInput):
            spinlab.sweep([2.0], "paper")

    def test_failure_annotates_record(self, monkeypatch):
        def boom(theta, rec=None):
            raise ArithmeticError("forced")
        monkeypatch.setattr(spinlab, "model_quantities", boom)
        recs = spinlab.sweep([0.2, 0.4], "both")
        assert all(r.error and "forced" in r.error for r in recs)

    def test_testability(self):
        recs = spinlab.sweep(GRID, "model")
        t = spinlab.testability(recs)
        assert t["ratio_le_one_somewhere"] is True
        # the canonical apparatus breaks the independence assumption, and
        # the ratio drops to ~1/2 at small θ
        assert t["ratio_ge_mochi_everywhere"] is False
        assert min(r.ratio_model for r in recs if r.ratio_model) == pytest.approx(0.5, abs=1e-3)
