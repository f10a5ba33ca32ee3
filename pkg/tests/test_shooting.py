import math

import numpy as np
import pytest
from scipy.special import beta

from magring import shooting as S
from magring.circle import DomainError, lp_norm
from magring.forms import ProblemParams, quotient_calQ
from magring.shooting import (
    BranchTracer,
    alpha_inverse,
    bifurcation_alpha,
    dirichlet_nu,
    integrate_el,
    mu,
    mu_curve,
    rho,
    solve_branch,
)

# oracle-derived values: shooting and direct minimization agree to ~1e-12 on these
MU_02_4_1 = 0.917906795013
MU_045_4_0 = 0.191420828191


def nu4_zero():
    """nu_4(0) from the explicit solution of u'' = -u^3, u'(0) = 0, u(pi) = 0."""
    z0 = math.sqrt(2) / 4 * beta(0.25, 0.5)
    lam = z0 / math.pi
    return math.sqrt(lam**3 / math.pi * math.sqrt(2) / 4 * beta(1.25, 0.5)), lam


def check_result(res, p):
    assert res.residual_ode <= 1e-7
    values = res.profile.values
    assert np.array_equal(values[1:], values[1:][::-1])  # even about s = 0
    if res.branch == "dirichlet":
        assert values[0] == 0.0
        assert np.all(values[1:] > 0)
    else:
        assert np.all(values > 0)
    assert abs(res.mu / lp_norm(res.profile, p) ** (p - 2) - 1) <= 1e-8


@pytest.fixture(scope="module")
def branch_02():
    return solve_branch(ProblemParams(0.2, 4, 1.0))


class TestIntegrator:
    def test_constant_trajectory(self):
        params = ProblemParams(0.3, 4, 0.5)
        lam = params.constant_height
        tr = integrate_el(lam, lam**-2, params, s_max=2 * np.pi)
        assert np.abs(tr.du).max() < 1e-12
        assert np.abs(tr.u - lam).max() < 1e-12

    def test_energy_conservation(self):
        # u'' = -u^3, period 4 z0 with z0 the first zero
        params = ProblemParams(0.0, 4, 1e-300)
        z0 = math.sqrt(2) / 4 * beta(0.25, 0.5)
        tr = integrate_el(1.0, 1.0, ProblemParams(0.0, 4, 1e-300), s_max=4 * z0)
        energy = 0.5 * tr.du**2 + 0.25 * tr.u**4 - 1e-300 * tr.u**2 / 2
        assert np.abs(energy - 0.25).max() < 1e-10
        assert abs(tr.u[-1] - 1) < 1e-9
        assert params.a == 0

    def test_converged_run_has_critical_point_at_pi(self, branch_02):
        params = ProblemParams(0.2, 4, 1.0)
        tr = integrate_el(branch_02.lam, branch_02.mass, params)
        assert tr.crossed
        assert abs(rho(branch_02.lam, branch_02.mass, params) - np.pi) < 1e-12
        full = integrate_el(branch_02.lam, branch_02.mass, params, step=np.pi / 2048, s_max=np.pi)
        assert abs(full.du[-1]) < 1e-12

    def test_negative_inputs(self):
        with pytest.raises(DomainError):
            integrate_el(-1.0, 1.0, ProblemParams(0.2, 4, 1.0))


class TestRho:
    def test_linear_frequency_a_zero(self):
        alpha = 2.0
        params = ProblemParams(0.0, 4, alpha)
        lam_c = params.constant_height
        r = rho(lam_c * (1 + 1e-4), 1.0, params)
        assert r == pytest.approx(np.pi / math.sqrt(alpha * 2), rel=1e-6)

    @pytest.mark.parametrize("a, p, alpha", [(0.2, 4, 1.0), (0.45, 4, 0.3), (0.3, 6, 0.2)])
    def test_linear_frequency_with_flux(self, a, p, alpha):
        # about the constant with its own mass, omega^2 = a^2 (p+2) + alpha (p-2)
        params = ProblemParams(a, p, alpha)
        lam_c = params.constant_height
        r = rho(lam_c * (1 + 1e-4), lam_c**-2, params)
        assert r == pytest.approx(np.pi / math.sqrt(params.rigidity_index), rel=1e-6)

    def test_constant_rejected(self):
        params = ProblemParams(0.2, 4, 1.0)
        lam_c = params.constant_height
        with pytest.raises(DomainError):
            rho(lam_c, lam_c**-2, params)

    def test_no_critical_point(self):
        # alpha > 0, a = 0, tiny amplitude below the constant still oscillates; a
        # large mass makes the u^-3 term negligible and a huge start escapes quickly
        params = ProblemParams(0.0, 4, 0.1)
        assert math.isinf(rho(1e-6, 1.0, params))


class TestSolveBranch:
    def test_rigid_examples(self):
        res = solve_branch(ProblemParams(0.45, 4, -0.15))
        assert res.branch == "constant" and res.mu == pytest.approx(0.0525, abs=1e-15)
        check_result(res, 4)
        assert res.diagnostics["rho_small_amplitude"] > np.pi
        res = solve_branch(ProblemParams(0.0, 4, 0.4))
        assert res.branch == "constant" and res.mu == pytest.approx(0.4, abs=1e-15)

    def test_nonconstant(self, branch_02):
        assert branch_02.branch == "nonconstant"
        assert branch_02.mu < 1.04
        assert branch_02.mu == pytest.approx(MU_02_4_1, abs=1e-10)
        check_result(branch_02, 4)
        assert branch_02.residual_fixedpoint < 1e-12

    def test_profile_minimizes_reduced_quotient(self, branch_02):
        params = ProblemParams(0.2, 4, 1.0)
        assert quotient_calQ(branch_02.profile, params) == pytest.approx(branch_02.mu, abs=1e-10)

    def test_other_side_of_constant_is_the_shifted_branch(self, branch_02):
        params = ProblemParams(0.2, 4, 1.0)
        system = S._System(params.a, params.p, params.alpha, S.DEFAULT_STEPS)
        x, _, _ = S._newton(system, S._const_guess(params.a, params.p, params.alpha, -0.2))
        assert math.exp(x[0]) == pytest.approx(branch_02.profile.values[0], rel=1e-10)

    @pytest.mark.parametrize("a, p, alpha", [(0.0, 4, 1.0), (0.1, 3, 2.0), (0.3, 6, 0.4), (0.45, 4, 0.0),
                                             (0.49, 4, 0.0), (0.25, 10, 0.5), (0.4, 2.5, 3.0)])
    def test_invariants(self, a, p, alpha):
        params = ProblemParams(a, p, alpha)
        res = solve_branch(params)
        check_result(res, p)
        assert res.branch == ("constant" if params.is_rigid else "nonconstant")
        assert res.mu <= params.constant_value

    def test_refines_near_half(self):
        res = solve_branch(ProblemParams(0.499, 4, 0.0))
        assert res.diagnostics["n_steps"] > S.DEFAULT_STEPS
        check_result(res, 4)

    def test_step_doubling_stability(self):
        for a in (0.2, 0.45):
            params = ProblemParams(a, 4, 1.0 if a < 0.3 else 0.0)
            coarse = solve_branch(params, n_steps=2048).mu
            fine = solve_branch(params, n_steps=4096).mu
            assert abs(coarse - fine) <= 1e-10

    def test_half_flux_rejected(self):
        with pytest.raises(DomainError):
            solve_branch(ProblemParams(0.5, 4, 0.0))

    def test_tracer_reuse(self):
        tracer = BranchTracer(0.2, 4)
        a1 = tracer.result(1.0).mu
        calls = tracer.newton_calls
        assert tracer.result(1.0).mu == a1
        assert tracer.newton_calls == calls
        with pytest.raises(S.NoBranchError):
            tracer.solve(0.3)


class TestMu:
    def test_examples(self):
        assert mu(ProblemParams(0.45, 4, -0.12)) == pytest.approx(0.0825, abs=1e-15)
        assert mu(ProblemParams(0.3, 4, 0.23)) == pytest.approx(0.32, abs=1e-15)
        assert 0 < mu(ProblemParams(0.2, 4, 1.0)) < 1.04
        assert mu(ProblemParams(0.5, 4, 0.0)) == pytest.approx(nu4_zero()[0], abs=1e-12)

    def test_rigidity_grid(self):
        for a in np.linspace(0.0, 0.45, 5):
            for p in (3.0, 4.0, 6.0):
                top = (1 - a * a * (p + 2)) / (p - 2)
                for alpha in np.linspace(-a * a + 0.01, top, 5):
                    params = ProblemParams(a, p, alpha)
                    assert params.is_rigid
                    res = solve_branch(params)
                    assert res.branch == "constant"
                    assert res.mu == params.constant_value

    def test_monotone_in_a(self):
        for p, alpha in [(4, 0.5), (3, 1.0)]:
            values = [mu(ProblemParams(a, p, alpha)) for a in (0.05, 0.15, 0.25, 0.35, 0.45)]
            assert np.all(np.diff(values) > 0)

    def test_upper_bounds(self):
        for p, alpha in [(4, 0.0), (4, 0.5), (6, -0.1)]:
            nu = dirichlet_nu(p, alpha).mu
            for a in (0.1, 0.3, 0.4, 0.45):
                if alpha <= -a * a:
                    continue
                params = ProblemParams(a, p, alpha)
                m = mu(params)
                assert m <= params.constant_value
                assert m < nu

    def test_limit_toward_dirichlet(self):
        nu = dirichlet_nu(4, 0.0).mu
        values = [mu(ProblemParams(a, 4, 0.0)) for a in (0.45, 0.47, 0.49, 0.499)]
        assert np.all(np.diff(values) > 0)
        assert values[-1] < nu and nu - values[-1] < 1e-2


class TestCurve:
    def test_rigid_rows_and_switch(self):
        curve = mu_curve(0.45, 4, -0.2, 1.0, 25)
        curve.check()
        for r in curve.rows:
            if r.alpha <= -0.1075:
                assert r.branch == "constant"
            else:
                assert r.branch == "nonconstant"

    def test_switch_at_038(self):
        curve = mu_curve(0.2, 4, 0.0, 1.0, 21)
        curve.check()
        step = 1.0 / 20
        first = next(r.alpha for r in curve.rows if r.branch == "nonconstant")
        assert 0.38 < first <= 0.38 + step

    def test_parallel_agrees(self, monkeypatch):
        monkeypatch.setenv("MAGRING_THREADS", "2")
        assert S.worker_count() == 2
        seq = mu_curve(0.3, 4, 0.0, 1.5, 7)
        par = mu_curve(0.3, 4, 0.0, 1.5, 7, parallel=True)
        assert np.abs(seq.column("mu") - par.column("mu")).max() <= 1e-6

    def test_rejects_bad_ranges(self):
        with pytest.raises(DomainError):
            mu_curve(0.3, 4, -0.5, 1.0, 10)
        with pytest.raises(DomainError):
            mu_curve(0.3, 4, 0.0, 1.0, 1)

    def test_check_detects_convexity(self):
        rows = tuple(S.MuRow(al, al, None, al * al, "constant") for al in (0.0, 0.5, 1.0))
        with pytest.raises(AssertionError):
            S.MuCurve(0.1, 4.0, rows).check()


class TestBifurcation:
    @pytest.mark.parametrize("a, p, expected", [(0.45, 4, -0.1075), (0.2, 4, 0.38), (0.0, 6, 0.25)])
    def test_values(self, a, p, expected):
        b = bifurcation_alpha(a, p)
        assert b.alpha_formula == pytest.approx(expected, abs=1e-15)
        assert b.discrepancy <= 1e-3

    def test_existence_predicate(self):
        assert not S.branch_exists(0.2, 4, 0.37)
        assert S.branch_exists(0.2, 4, 0.39)


class TestDirichlet:
    def test_explicit_case(self):
        nu, lam = nu4_zero()
        res = dirichlet_nu(4, 0.0)
        assert res.lam == pytest.approx(lam, abs=1e-12)
        assert res.mu == pytest.approx(nu, abs=1e-12)
        check_result(res, 4)

    def test_above_flux_branches(self):
        nu = dirichlet_nu(4, 0.5).mu
        assert nu > mu(ProblemParams(0.4, 4, 0.5))

    def test_vanishes_at_coercivity_limit(self):
        values = [dirichlet_nu(4, al).mu for al in (-0.2, -0.24, -0.249)]
        assert values[0] > values[1] > values[2] > 0
        assert values[2] < 1e-3

    def test_rejections(self):
        with pytest.raises(DomainError):
            dirichlet_nu(4, -0.25)
        with pytest.raises(DomainError):
            dirichlet_nu(2, 0.0)


class TestAlphaInverse:
    def test_closed_forms(self):
        assert alpha_inverse(0.3, 4, 0.0) == pytest.approx(-0.09)
        assert alpha_inverse(0.3, 4, 0.05) == pytest.approx(0.05 - 0.09, abs=1e-15)

    def test_example(self):
        al = alpha_inverse(0.2, 4, 1.2)
        assert al > 1.2 - 0.04
        assert mu(ProblemParams(0.2, 4, al)) == pytest.approx(1.2, abs=1e-6)

    def test_round_trip(self):
        tracer = BranchTracer(0.3, 4)
        for m in np.linspace(0.1, 2.0, 8):
            al = alpha_inverse(0.3, 4, m, tracer=tracer)
            assert mu(ProblemParams(0.3, 4, al), tracer=tracer) == pytest.approx(m, abs=1e-6)

    def test_negative_target(self):
        with pytest.raises(DomainError):
            alpha_inverse(0.3, 4, -1.0)


class TestLargeAlpha:
    def test_branch_continues(self):
        # the minimum is exponentially small here; shooting from the maximum stalls near alpha ~ 6.6
        res = solve_branch(ProblemParams(0.2, 4, 25.0))
        check_result(res, 4)
        assert res.min_u < 1e-5
        assert res.mu < 25.04
        assert res.diagnostics["mu_step_change"] <= S.MU_STEP_TOL

    def test_inverse_large_target(self):
        tracer = BranchTracer(0.2, 4)
        al = alpha_inverse(0.2, 4, 10.0, tracer=tracer)
        assert al > 20
        assert mu(ProblemParams(0.2, 4, al), tracer=tracer) == pytest.approx(10.0, abs=1e-8)
