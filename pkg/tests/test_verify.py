import numpy as np
import pytest

from magring import verify as V
from magring.circle import DomainError, Grid, GridFunction
from magring.forms import ProblemParams
from magring.shooting import dirichlet_nu, mu


class TestOracle:
    def test_rigid_point(self):
        params = ProblemParams(0.3, 4, 0.2)
        res = V.direct_minimize(params, n=128)
        assert res.mu_hat == pytest.approx(0.29, abs=1e-6)
        mod = np.abs(res.minimizer.values)
        assert np.ptp(mod) / mod.mean() <= 1e-4

    @pytest.mark.parametrize("space", ["complex_periodic", "real_positive"])
    def test_agrees_with_shooting(self, space):
        params = ProblemParams(0.2, 4, 1.0)
        res = V.direct_minimize(params, space=space, n=256)
        assert res.mu_hat == pytest.approx(mu(params), abs=1e-6)
        assert res.gradient_norm <= V.GRAD_TOL

    def test_dirichlet(self):
        res = V.direct_minimize(ProblemParams(0.5, 4, 0.0), space="dirichlet", n=256)
        assert res.mu_hat == pytest.approx(dirichlet_nu(4, 0.0).mu, abs=1e-4)

    def test_trajectories_monotone(self):
        res = V.direct_minimize(ProblemParams(0.45, 4, 0.3), n=128, restarts=2)
        traj = np.array(res.trajectory)
        assert np.all(np.diff(traj) <= 1e-12 * np.abs(traj[:-1]))
        assert len(res.restarts) == 3

    def test_seeded_reproducible(self):
        params = ProblemParams(0.45, 4, 0.3)
        a = V.direct_minimize(params, n=128, seed=3, restarts=2)
        b = V.direct_minimize(params, n=128, seed=3, restarts=2)
        assert a.mu_hat == b.mu_hat

    def test_rejects(self):
        with pytest.raises(DomainError):
            V.direct_minimize(ProblemParams(0.2, 4, 1.0), n=100)
        with pytest.raises(DomainError):
            V.direct_minimize(ProblemParams(0.2, 4, 1.0), space="torus")

    def test_descent_failure_reported(self):
        with pytest.raises(V.DescentError) as info:
            V.direct_minimize(ProblemParams(0.2, 4, 1.0), n=128, max_iter=3, restarts=1)
        assert len(info.value.trajectory) > 0


class TestFlow:
    def test_constant_is_stationary(self):
        g = Grid(64)
        states = V.bakry_emery_flow(GridFunction(g, np.full(64, 1.3)), 4.0, t_end=0.05)
        assert np.abs(states[-1].u.values - 1.3).max() < 1e-14
        assert abs(states[-1].functional_value) < 1e-14

    def test_cosine_bump_relaxes(self):
        g = Grid(128)
        u0 = g.sample(lambda s: 1 + 0.3 * np.cos(s))
        states = V.bakry_emery_flow(u0, 4.0, t_end=2.0, record_every=50)
        f = np.array([s.functional_value for s in states])
        m = np.array([s.mass_p for s in states])
        assert f[0] > 0
        assert np.all(np.diff(f) <= 1e-10)
        assert f[-1] < 1e-2 * f[0]
        assert np.abs(m - m[0]).max() / m[0] <= 1e-8

    def test_rejects_nonpositive(self):
        g = Grid(64)
        with pytest.raises(DomainError):
            V.bakry_emery_flow(g.sample(np.cos), 4.0)

    def test_positivity_loss_detected(self):
        g = Grid(64)
        u0 = g.sample(lambda s: 1 + 0.99 * np.cos(s))
        with pytest.raises(V.PositivityLost):
            V.bakry_emery_flow(u0, 4.0, dt=0.5, t_end=1.0)


class TestChecks:
    def test_rearrangement_example(self, grid):
        f = grid.sample(lambda s: 1 + np.sin(s))
        g = grid.sample(lambda s: 1 + np.cos(s))
        lhs, rhs = V.rearrangement_check(f, g, 4.0)
        assert lhs < rhs

    def test_rearrangement_p2_equality(self, grid, rng):
        f, g = V.random_nonnegative(rng, grid), V.random_nonnegative(rng, grid)
        lhs, rhs = V.rearrangement_check(f, g, 2.0)
        assert lhs == pytest.approx(rhs, rel=1e-13)

    def test_rearrangement_rejects(self, grid):
        f = grid.sample(np.cos)
        with pytest.raises(DomainError):
            V.rearrangement_check(f, f, 4.0)
        g = grid.sample(lambda s: 1 + np.cos(s))
        with pytest.raises(DomainError):
            V.rearrangement_check(g, g, 1.5)

    def test_diamagnetic_example(self, grid):
        psi = grid.sample(lambda s: np.exp(2j * s), dtype=complex)
        lhs, rhs = V.diamagnetic_check(psi, 0.25)
        assert lhs == pytest.approx(0.0, abs=1e-12)
        assert rhs == pytest.approx(2.25, rel=1e-12)

    def test_diamagnetic_real(self, grid):
        psi = grid.sample(lambda s: 2 + np.cos(s))
        lhs, rhs = V.diamagnetic_check(psi, 0.0)
        assert lhs <= rhs + 1e-6

    @pytest.mark.parametrize("a, p, alpha", [(0.45, 4, -0.1075), (0.2, 4, 0.5), (0.3, 6, 0.5)])
    def test_taylor_coefficient(self, a, p, alpha):
        expected = 1 - a * a * (p + 2) - alpha * (p - 2)
        got = V.taylor_coefficient_check(ProblemParams(a, p, alpha))
        assert got == pytest.approx(expected, abs=1e-3)

    def test_taylor_shifted_cosine_is_half(self):
        params = ProblemParams(0.2, 4, 0.5)
        unit = V.taylor_coefficient_check(params)
        shifted = V.taylor_coefficient_check(params, perturbation="shifted_cosine")
        assert shifted == pytest.approx(unit / 2, rel=1e-3)

    def test_interp_gaps(self, grid, rng):
        u = V.random_trig(rng, grid)
        assert V.interp_zero_gap(u, 4.0, 0.5) >= -1e-12
        c = GridFunction(grid, np.full(grid.n_nodes, 2.0))
        assert abs(V.interp_zero_gap(c, 4.0, 0.5)) < 1e-12
        assert abs(V.interp_minus_two_gap(c)) < 1e-12
        assert V.interp_minus_two_gap(V.random_positive(rng, grid)) >= -1e-12


class TestSuites:
    @pytest.mark.parametrize("name", sorted(V.SUITES))
    def test_suite_passes(self, name):
        res = V.SUITES[name]() if name == "taylor" else V.SUITES[name](seed=1)
        assert res.passed, res
        assert res.cases > 0

    def test_case_counts(self):
        counts = {r.name: r.cases for r in V.run_suites(seed=0, names=["diamagnetic", "interp_zero"])}
        assert counts == {"diamagnetic": 100, "interp_zero": 100}
