"""moment_oracle: closed forms vs the RK4 integrator, case dispatch,
Monte Carlo agreement, admissibility decay."""

import math
from dataclasses import replace

import numpy as np
import pytest

import exploratory_lq as xlq
from exploratory_lq.model import DerivedCoeffs
from conftest import DS_MODEL, S1, random_valid_model

CASE_COEFFS = {
    # Hand-picked representatives of the five dispatch branches; the
    # c/d boundary values are exact in binary (0.5^2 = 0.25).
    "a": DerivedCoeffs(a1=0.0, a2=0.7, b1=0.0, b2=0.4, c1=0.3),
    "b": DerivedCoeffs(a1=0.0, a2=0.5, b1=0.8, b2=-0.3, c1=0.2),
    "c": DerivedCoeffs(a1=-0.25, a2=0.3, b1=0.5, b2=0.2, c1=0.1),
    "d": DerivedCoeffs(a1=-0.125, a2=-0.4, b1=0.5, b2=0.1, c1=0.25),
    "e": DerivedCoeffs(a1=-0.9, a2=0.6, b1=0.5, b2=-0.2, c1=0.15),
}


def random_coeffs(rng):
    return DerivedCoeffs(
        a1=rng.uniform(-1.5, 1.0), a2=rng.uniform(-1.0, 1.0),
        b1=rng.uniform(-1.2, 1.2), b2=rng.uniform(-1.0, 1.0),
        c1=rng.uniform(0.0, 1.0))


class TestMeanCurve:
    def test_constant(self):
        coeffs = DerivedCoeffs(0.0, 0.0, 0.0, 0.0, 0.5)
        assert xlq.mean_curve(coeffs, 1.3, 2.0) == 1.3

    def test_exponential_decay(self):
        coeffs = DerivedCoeffs(-1.0, 0.0, 0.0, 0.0, 0.0)
        assert xlq.mean_curve(coeffs, 2.0, 1.0) == pytest.approx(
            2.0 * math.exp(-1.0), abs=1e-14)

    def test_linear_growth(self):
        coeffs = DerivedCoeffs(0.0, 3.0, 0.0, 0.0, 0.0)
        assert xlq.mean_curve(coeffs, 0.0, 2.0) == pytest.approx(6.0, abs=1e-14)

    def test_initial_condition(self, rng):
        for _ in range(50):
            coeffs = random_coeffs(rng)
            assert xlq.mean_curve(coeffs, 1.7, 0.0) == pytest.approx(1.7, abs=1e-14)


class TestSecondMomentClosedForms:
    def test_case_tags(self):
        for tag, coeffs in CASE_COEFFS.items():
            got, near = xlq.classify_case(coeffs)
            assert got == tag and not near

    def test_brownian_case_a(self):
        # A1 = B1 = 0, A2 = B2 = 0, c1 = sigma^2: m(t) = x0^2 + sigma^2 t.
        coeffs = DerivedCoeffs(0.0, 0.0, 0.0, 0.0, 0.7)
        assert xlq.second_moment_curve(coeffs, 1.5, 3.0) == pytest.approx(
            1.5 ** 2 + 0.7 * 3.0, abs=1e-14)

    def test_classical_equals_exploratory_without_noise(self):
        for coeffs in CASE_COEFFS.values():
            quiet = replace(coeffs, c1=0.0)
            for t in (0.3, 1.0, 4.0):
                assert xlq.second_moment_curve(quiet, 1.0, t) == \
                    xlq.second_moment_curve(quiet, 1.0, t, "classical")

    def test_s1_optimal_decay(self):
        value, policy = xlq.exploratory_solution(S1)
        coeffs = xlq.derived_coeffs(S1, policy)
        for t in (0.5, 1.0, 2.0):
            assert xlq.second_moment_curve(coeffs, 1.0, t) == pytest.approx(
                math.exp(2 * value.k2 * t), rel=1e-12)

    def test_each_case_vs_integrator(self):
        for tag, coeffs in CASE_COEFFS.items():
            for kind, noise in (("exploratory", coeffs.c1), ("classical", 0.0)):
                for t in (0.1, 1.0, 5.0):
                    closed = xlq.second_moment_curve(coeffs, 1.0, t, kind)
                    _, m_rk = xlq.integrate_moment_ode(
                        coeffs.a1, coeffs.a2, coeffs.b1, coeffs.b2, noise,
                        1.0, t)
                    assert closed == pytest.approx(float(m_rk), rel=1e-8), \
                        f"case {tag} {kind} t={t}"

    def test_randomized_vs_integrator(self, rng):
        for _ in range(200):
            coeffs = random_coeffs(rng)
            t = rng.uniform(0.1, 5.0)
            closed = xlq.second_moment_curve(coeffs, 1.0, t)
            _, m_rk = xlq.integrate_moment_ode(
                coeffs.a1, coeffs.a2, coeffs.b1, coeffs.b2, coeffs.c1, 1.0, t)
            assert closed == pytest.approx(float(m_rk), rel=1e-8, abs=1e-10)

    def test_case_b_converges_to_case_a(self):
        """Pointwise continuity of the closed forms as B1 -> 0.

        b2 = 0 keeps the forcing term independent of B1, so the gap is
        governed purely by alpha = B1^2 and shrinks quadratically.
        """
        base = DerivedCoeffs(0.0, 0.5, 0.0, 0.0, 0.2)
        target = xlq.second_moment_curve(base, 1.0, 2.0)
        prev_gap = None
        for b1 in (1e-3, 1e-5, 1e-7):
            approx = replace(base, b1=b1)
            got = xlq.second_moment_curve(approx, 1.0, 2.0)
            gap = abs(got - target)
            if prev_gap is not None:
                assert gap < prev_gap
            prev_gap = gap
        assert prev_gap < 1e-12

    def test_near_boundary_routes_to_integrator(self):
        # a1 just above the dispatch tolerance: the general closed form
        # would divide by a1 ~ 1e-8 and lose half its digits.
        coeffs = DerivedCoeffs(1e-8, 0.5, 0.0, 0.3, 0.2)
        _, near = xlq.classify_case(coeffs)
        assert near
        got = xlq.second_moment_curve(coeffs, 1.0, 2.0)
        ref = xlq.second_moment_curve(replace(coeffs, a1=0.0), 1.0, 2.0)
        assert got == pytest.approx(ref, rel=1e-7)

    def test_exact_zero_below_tolerance_uses_closed_form(self):
        # Below the dispatch tolerance the value is treated as zero.
        coeffs = DerivedCoeffs(1e-12, 0.5, 0.0, 0.3, 0.2)
        tag, near = xlq.classify_case(coeffs)
        assert tag == "a" and not near


class TestMomentInvariants:
    def test_variance_nonnegative_and_noise_ordering(self, rng):
        ts = np.array([0.1, 0.5, 1.0, 2.0, 5.0])
        for _ in range(100):
            coeffs = random_coeffs(rng)
            n = np.atleast_1d(xlq.mean_curve(coeffs, 1.0, ts))
            m = np.atleast_1d(xlq.second_moment_curve(coeffs, 1.0, ts))
            mh = np.atleast_1d(xlq.second_moment_curve(coeffs, 1.0, ts,
                                                       "classical"))
            assert np.all(m - n ** 2 > -1e-8 * np.maximum(1, np.abs(m)))
            assert np.all(mh - n ** 2 > -1e-8 * np.maximum(1, np.abs(mh)))
            if coeffs.c1 > 0:
                assert np.all(m >= mh)  # exploration only adds variance
            assert float(xlq.second_moment_curve(coeffs, 1.0, 0.0)) == 1.0

    def test_monte_carlo_agreement(self):
        value, policy = xlq.exploratory_solution(DS_MODEL)
        coeffs = xlq.derived_coeffs(DS_MODEL, policy)
        grid = xlq.PathGrid(dt=5e-4, n_steps=4000)
        nodes = (1000, 2000, 4000)
        batch = xlq.simulate_exploratory(DS_MODEL, policy, 1.0, grid, 21,
                                         8000, record_paths=False,
                                         checkpoints=nodes)
        for node in nodes:
            t = node * grid.dt
            mc_mean, mc_m2, se_mean, se_m2 = batch.checkpoint_stats(node)
            assert abs(mc_mean - float(xlq.mean_curve(coeffs, 1.0, t))) < \
                4 * se_mean + 1e-3
            assert abs(mc_m2 - float(xlq.second_moment_curve(coeffs, 1.0, t))) < \
                4 * se_m2 + 2e-3

    def test_classical_process_shares_the_mean_curve(self):
        """The unregularized process under the optimal feedback has the
        same first moment n(t) and the classical second moment m_hat(t);
        checked by Monte Carlo rather than re-derivation."""
        sol = xlq.classical_solution(DS_MODEL)
        _, policy = xlq.exploratory_solution(DS_MODEL)
        coeffs = xlq.derived_coeffs(DS_MODEL, policy)
        grid = xlq.PathGrid(dt=5e-4, n_steps=2000)
        batch = xlq.simulate_classical(DS_MODEL, sol.feedback_slope,
                                       sol.feedback_intercept, 1.0, grid, 23,
                                       8000, record_paths=False,
                                       checkpoints=(2000,))
        mc_mean, mc_m2, se_mean, se_m2 = batch.checkpoint_stats(2000)
        assert abs(mc_mean - float(xlq.mean_curve(coeffs, 1.0, 1.0))) < \
            4 * se_mean + 1e-3
        target = float(xlq.second_moment_curve(coeffs, 1.0, 1.0, "classical"))
        assert abs(mc_m2 - target) < 4 * se_m2 + 2e-3


class TestAdmissibilityDecay:
    def test_s1_exponent(self):
        value, policy = xlq.exploratory_solution(S1)
        coeffs = xlq.derived_coeffs(S1, policy)
        exponent, decays = xlq.admissibility_decay(S1, coeffs)
        assert exponent == pytest.approx(2 * value.k2 - 1.0, abs=1e-14)
        assert decays

    def test_trivial_exponent(self):
        coeffs = DerivedCoeffs(0.0, 0.3, 0.0, 0.2, 0.1)
        model = replace(S1, rho=1.0)
        exponent, decays = xlq.admissibility_decay(model, coeffs)
        assert exponent == -1.0 and decays

    def test_expanded_form_matches_direct(self, rng):
        for _ in range(200):
            model = random_valid_model(rng)
            value, policy = xlq.exploratory_solution(model)
            coeffs = xlq.derived_coeffs(model, policy)
            direct, decays = xlq.admissibility_decay(model, coeffs)
            expanded = xlq.decay_exponent_from_riccati(model, value.k2)
            assert expanded == pytest.approx(direct, rel=1e-9, abs=1e-10)
            assert decays

    def test_near_bound_models_still_decay(self, rng):
        """Discount rates barely above the bound keep the exponent
        negative (the margin comes from k2 < 0, not from slack in rho)."""
        for _ in range(100):
            model = random_valid_model(rng, rho_margin=(1e-6, 1e-3))
            value, policy = xlq.exploratory_solution(model)
            coeffs = xlq.derived_coeffs(model, policy)
            exponent, decays = xlq.admissibility_decay(model, coeffs)
            assert decays, (model, exponent)

    def test_discounted_moment_vanishes(self, rng):
        for _ in range(50):
            model = random_valid_model(rng)
            value, policy = xlq.exploratory_solution(model)
            coeffs = xlq.derived_coeffs(model, policy)
            exponent, decays = xlq.admissibility_decay(model, coeffs)
            assert decays
            horizon = 50.0 / model.rho
            tail = xlq.discounted_second_moment(model, coeffs, 1.0, horizon)
            assert tail < 1e-6 * 1.0  # below 1e-6 * m(0)


class TestMomentCurvesContainer:
    def test_rows_and_tags(self):
        value, policy = xlq.exploratory_solution(DS_MODEL)
        coeffs = xlq.derived_coeffs(DS_MODEL, policy)
        curves = xlq.moment_curves(coeffs, 1.0)
        rows = curves.rows(np.array([0.0, 0.5, 1.0]))
        assert len(rows) == 3
        t0 = rows[0]
        assert t0[0] == 0.0 and t0[1] == 1.0 and t0[2] == 1.0 and t0[3] == 1.0
        assert all(row[4] == curves.case_tag for row in rows)
