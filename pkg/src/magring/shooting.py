"""Shooting solver for the nonlocal Euler-Lagrange equation on the circle.

The optimal profile u > 0 solves

    -u'' + a^2 / (u^3 M^2) + alpha u = u^(p-1),    M = mean(u^-2),

with u'(0) = u'(pi) = 0, and the constant follows from the normalization
mu = ||u||_p^(p-2).  Initial-value problems are integrated from u(0) = lam,
u'(0) = 0 with a fixed-step RK4 scheme; the height lam and the nonlocal
mass M are solved for together by Newton's method on

    rho(lam, M) - pi = 0,    log(mean u^-2) - log M = 0,

where rho is the first positive critical point.  The non-constant branch
is followed from the bifurcation point alpha* = (1 - a^2 (p+2)) / (p-2)
in the variable t = sqrt(alpha - alpha*), along which it is smooth.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from . import _kernels as K
from .circle import DomainError, Grid, GridFunction, lp_norm
from .forms import ProblemParams

#: RK4 steps per half period; the profile grid has twice as many nodes
DEFAULT_STEPS = 2048
S_MAX = 4.0 * math.pi

NEWTON_TOL = 1e-13
NEWTON_MAXIT = 50
FD_STEP = 1e-7

#: first continuation point and the largest continuation step, in t
T_START = 0.02
T_STEP_MAX = 0.08

#: step doubling continues until the Euler-Lagrange residual is below this
REFINE_TOL = 2e-8
#: largest change of mu under the final step halving
MU_STEP_TOL = 1e-11
MAX_STEPS = 1 << 16


class ConvergenceError(RuntimeError):
    """A nonlinear solve failed; ``history`` holds the residual norms."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class NoBranchError(ConvergenceError):
    """No non-constant solution could be bracketed."""


@dataclass(frozen=True)
class Trajectory:
    s: np.ndarray
    u: np.ndarray
    du: np.ndarray
    crossed: bool


@dataclass(frozen=True, eq=False)
class ShootingResult:
    """A solved profile and the constant it certifies.

    ``branch`` is one of ``"constant"``, ``"nonconstant"``, ``"dirichlet"``.
    """

    lam: float
    mass: float
    profile: GridFunction
    mu: float
    residual_ode: float
    residual_fixedpoint: float
    branch: str
    p: float
    alpha: float
    a: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def min_u(self) -> float:
        return float(self.profile.values.min())


def _grid_for(n_steps: int) -> Grid:
    return Grid(2 * n_steps)


def _step_size(n_steps: int) -> float:
    return math.pi / n_steps


def integrate_el(lam: float, mass: float, params: ProblemParams,
                 step: float = math.pi / DEFAULT_STEPS, s_max: Optional[float] = None) -> Trajectory:
    """RK4 trajectory from u(0) = lam, u'(0) = 0.

    With ``s_max=None`` it stops at the first node past the first critical
    point (``crossed`` tells whether one was found before 4 pi); otherwise it
    covers [0, s_max] with a whole number of steps.  Raises DomainError if u
    reaches zero while the nonlocal term is active.
    """
    if not lam > 0 or not mass > 0 or not step > 0:
        raise DomainError("lam, mass and step must be positive")
    c3 = params.a**2 / mass**2
    if s_max is not None:
        n = max(1, int(round(s_max / step)))
        u, v, bad = K.path(lam, c3, params.alpha, params.p, s_max / n, n)
        if bad >= 0:
            raise DomainError(f"profile left the positive cone for lam={lam}, mass={mass}")
        return Trajectory(np.linspace(0.0, s_max, n + 1), u, v, False)
    u, v, status = K.path_until(lam, c3, params.alpha, params.p, step, S_MAX, K.EVENT_CRITICAL)
    if status == K.STATUS_NONPOSITIVE:
        raise DomainError(f"profile left the positive cone for lam={lam}, mass={mass}")
    s = step * np.arange(u.size)
    return Trajectory(s, u, v, status == K.STATUS_FOUND)


def rho(lam: float, mass: float, params: ProblemParams,
        step: float = math.pi / DEFAULT_STEPS) -> float:
    """First positive critical point of u_lam, or ``inf`` if none before 4 pi."""
    lam_c = params.constant_height
    if abs(lam - lam_c) <= 1e-12 * lam_c and abs(mass * lam_c**2 - 1) <= 1e-12:
        raise DomainError("the constant height gives a constant solution")
    s, _, status = K.first_event(lam, params.a**2 / mass**2, params.alpha, params.p,
                                 step, S_MAX, K.EVENT_CRITICAL)
    if status == K.STATUS_NONPOSITIVE:
        raise DomainError(f"profile left the positive cone for lam={lam}, mass={mass}")
    return s


class _System:
    """Residual of the coupled (height, mass) shooting problem in log variables."""

    def __init__(self, a, p, alpha, n_steps):
        self.a, self.p, self.alpha = a, p, alpha
        self.h = _step_size(n_steps)

    def __call__(self, x):
        lam, mass = math.exp(x[0]), math.exp(x[1])
        s, acc, status = K.first_event(lam, self.a**2 / mass**2, self.alpha, self.p,
                                       self.h, S_MAX, K.EVENT_CRITICAL)
        if status != K.STATUS_FOUND:
            return None
        return np.array([s - math.pi, math.log(acc / s) - x[1]])

    def jacobian(self, x, r):
        J = np.empty((2, 2))
        for j in range(2):
            xe = x.copy()
            xe[j] += FD_STEP
            re = self(xe)
            if re is None:
                xe[j] -= 2 * FD_STEP
                re = self(xe)
                if re is None:
                    return None
                J[:, j] = (r - re) / FD_STEP
            else:
                J[:, j] = (re - r) / FD_STEP
        return J


def _newton(system: _System, x0):
    """Damped Newton iteration; returns (x, residual, iterations) or raises ConvergenceError."""
    x = np.array(x0, dtype=float)
    r = system(x)
    history = []
    if r is None:
        raise ConvergenceError("initial guess has no critical point", history)
    for it in range(NEWTON_MAXIT):
        norm = np.abs(r).max()
        history.append(norm)
        if norm < NEWTON_TOL:
            return x, r, it
        J = system.jacobian(x, r)
        if J is None:
            raise ConvergenceError("jacobian undefined", history)
        try:
            dx = -np.linalg.solve(J, r)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular jacobian: {exc}", history) from exc
        # keep each update inside a factor e^0.5 in lam and M
        scale = min(1.0, 0.5 / max(np.abs(dx).max(), 1e-300))
        t = scale
        while t > 1e-6:
            rn = system(x + t * dx)
            if rn is not None and np.abs(rn).max() < norm:
                break
            t *= 0.5
        else:
            if norm < 1e3 * NEWTON_TOL:
                return x, r, it
            raise ConvergenceError("line search failed", history)
        x = x + t * dx
        r = rn
        if np.abs(t * dx).max() < 1e-15:
            return x, r, it + 1
    history.append(np.abs(r).max())
    if history[-1] < 1e3 * NEWTON_TOL:
        return x, r, NEWTON_MAXIT
    raise ConvergenceError("Newton iteration did not converge", history)


def _const_guess(a, p, alpha, eps):
    """(log u(0), log M) for u(0) = lam_c e^eps; eps < 0 starts below the constant."""
    lam_c = (a * a + alpha) ** (1.0 / (p - 2.0))
    return np.array([math.log(lam_c) + eps, -2.0 * math.log(lam_c)])


class BranchTracer:
    """Follows the non-constant branch for fixed (a, p) by continuation in alpha.

    Solved points are kept in ``self.points`` as (t, x) with
    t = sqrt(alpha - alpha*) and x = (log m, log M), so repeated solves at
    nearby alpha reuse earlier work.  Instances are not thread-safe.

    Trajectories start at the minimum m = u(pi) and run up to the maximum.
    For large alpha the minimum is exponentially small and the orbit passes
    close to the saddle at u = 0; the time to leave it depends on log m with
    slope about 1 / sqrt(alpha), whereas the time to reach it from the
    maximum is exponentially sensitive to the starting height.
    """

    def __init__(self, a: float, p: float, n_steps: int = DEFAULT_STEPS):
        probe = ProblemParams(a, p, 1.0 + a * a)
        self.a, self.p = probe.a, probe.p
        if self.a >= 0.5:
            raise DomainError("a = 1/2 is handled by dirichlet_nu")
        self.n_steps = int(n_steps)
        self.alpha_star = (1.0 - self.a**2 * (self.p + 2.0)) / (self.p - 2.0)
        self.points: list[tuple[float, np.ndarray]] = []
        self.newton_calls = 0

    def alpha_of(self, t: float) -> float:
        return self.alpha_star + t * t

    def t_of(self, alpha: float) -> float:
        return math.sqrt(max(alpha - self.alpha_star, 0.0))

    def _solve_at(self, t, guess):
        self.newton_calls += 1
        system = _System(self.a, self.p, self.alpha_of(t), self.n_steps)
        x, r, _ = _newton(system, guess)
        # a solve that slid back onto the constant has no amplitude
        lam_c = (self.a**2 + self.alpha_of(t)) ** (1.0 / (self.p - 2.0))
        if abs(math.exp(x[0]) / lam_c - 1.0) < 1e-9:
            raise ConvergenceError("collapsed onto the constant solution")
        return x

    def _seed(self, t):
        last = None
        for eps in (t, 0.3 * t, 3.0 * t, 0.1 * t):
            try:
                return self._solve_at(t, _const_guess(self.a, self.p, self.alpha_of(t), -eps))
            except ConvergenceError as exc:
                last = exc
        raise NoBranchError(f"no non-constant branch found near alpha={self.alpha_of(t)}",
                            last.history if last else None)

    def _predict(self, t):
        pts = self.points
        below = [pt for pt in pts if pt[0] <= t]
        above = [pt for pt in pts if pt[0] > t]
        if below and above:
            (t0, x0), (t1, x1) = below[-1], above[0]
            return x0 + (x1 - x0) * (t - t0) / (t1 - t0)
        near = below[-2:] if below else above[:2]
        if len(near) == 1:
            return near[0][1].copy()
        (t0, x0), (t1, x1) = near
        return x1 + (x1 - x0) * (t - t1) / (t1 - t0)

    def _insert(self, t, x):
        self.points.append((t, x))
        self.points.sort(key=lambda pt: pt[0])

    def _nearest(self, t):
        return min(self.points, key=lambda pt: abs(pt[0] - t))

    def solve_t(self, t: float) -> np.ndarray:
        """Return x = (log m, log M) on the branch at parameter t > 0."""
        if t <= 0:
            raise NoBranchError("the branch starts at alpha*")
        for tp, xp in self.points:
            if tp == t:
                return xp.copy()
        if not self.points:
            t0 = min(T_START, t)
            self._insert(t0, self._seed(t0))
            if t0 == t:
                return self.points[0][1].copy()
        tc, _ = self._nearest(t)
        if abs(t - tc) <= T_STEP_MAX:
            try:
                x = self._solve_at(t, self._predict(t))
                self._insert(t, x)
                return x
            except ConvergenceError:
                pass
        # march from the nearest solved point
        direction = 1.0 if t > tc else -1.0
        step = min(T_STEP_MAX, abs(t - tc))
        cur = tc
        failures = 0
        while cur != t:
            nxt = cur + direction * step
            if direction * (nxt - t) > 0:
                nxt = t
            if nxt <= 0:
                nxt = 0.5 * cur
            try:
                x = self._solve_at(nxt, self._predict(nxt))
            except ConvergenceError as exc:
                failures += 1
                step *= 0.5
                if failures > 30 or step < 1e-8:
                    raise ConvergenceError(f"continuation stalled at t={cur}", exc.history) from exc
                continue
            self._insert(nxt, x)
            cur = nxt
            step = min(T_STEP_MAX, step * 1.5)
        return self._nearest(t)[1].copy()

    def solve(self, alpha: float) -> np.ndarray:
        if alpha <= self.alpha_star:
            raise NoBranchError(f"alpha={alpha} is at or below the bifurcation {self.alpha_star}")
        return self.solve_t(self.t_of(alpha))

    def result(self, alpha: float) -> ShootingResult:
        x = self.solve(alpha)
        return _branch_result(ProblemParams(self.a, self.p, alpha), x, self.n_steps,
                              {"newton_calls": self.newton_calls})


def _spectral_derivative(values: np.ndarray, shift: float = 0.0) -> np.ndarray:
    """d/ds of samples f with f(s + 2 pi) = exp(2 i pi shift) f(s), e.g. shift 1/2 for antiperiodic f."""
    n = values.size
    s = -math.pi + 2 * math.pi * np.arange(n) / n
    k = np.fft.fftfreq(n, d=1.0 / n) + shift
    if shift == 0:
        k[n // 2] = 0.0
    twist = np.exp(1j * shift * s)
    return (np.fft.ifft(1j * k * np.fft.fft(values / twist)) * twist).real


def _reflect(u, v):
    """Full-circle samples of (u, u') from a half trajectory on [0, pi]; u even, u' odd."""
    values = np.concatenate([u[:0:-1], u[:-1]])
    slope = np.concatenate([-v[:0:-1], v[:-1]])
    return values, slope


def _system_residual(values, slope, force, shift=0.0):
    """sup-norm residual of the first-order system u' = v, v' = force(u).

    Each grid function is differentiated once; a second spectral derivative
    of the profile would amplify roundoff like n^2, which dominates for the
    sharp profiles near a = 1/2.
    """
    r1 = np.abs(_spectral_derivative(values, shift) - slope).max()
    r2 = np.abs(_spectral_derivative(slope, shift) - force(values)).max()
    return float(max(r1, r2))


def _el_force(a, p, alpha, mass):
    return lambda u: a * a / (u**3 * mass**2) + alpha * u - u ** (p - 1)


def _node_residual(x, a, p, alpha, n_steps):
    lam, mass = math.exp(x[0]), math.exp(x[1])
    u, v, bad = K.path(lam, a * a / mass**2, alpha, p, _step_size(n_steps), n_steps)
    if bad >= 0:
        return None
    # trapezoid on [0, pi] of the even profile equals the grid mean on the circle
    w = u**-2.0
    grid_mass = (0.5 * (w[0] + w[-1]) + w[1:-1].sum()) / n_steps
    return np.array([v[-1] / max(u[0], u[-1]), math.log(grid_mass) - x[1]])


def _polish(x, a, p, alpha, n_steps, max_iter=6):
    """Newton on u'(pi) = 0 at the last RK4 node, from a solution of the rho equation.

    The rho equation is met between nodes, and the node value u'(pi) can
    retain ~1e-11 of accumulated roundoff, which the even reflection turns
    into a kink.  A few steps on the node residual remove it.
    """
    best_x = np.array(x, dtype=float)
    best_r = _node_residual(best_x, a, p, alpha, n_steps)
    if best_r is None:
        return best_x
    for _ in range(max_iter):
        J = np.empty((2, 2))
        for j in range(2):
            xe = best_x.copy()
            xe[j] += FD_STEP
            re = _node_residual(xe, a, p, alpha, n_steps)
            if re is None:
                return best_x
            J[:, j] = (re - best_r) / FD_STEP
        try:
            xn = best_x - np.linalg.solve(J, best_r)
        except np.linalg.LinAlgError:
            return best_x
        rn = _node_residual(xn, a, p, alpha, n_steps)
        if rn is None or np.abs(rn).max() >= np.abs(best_r).max() or np.abs(xn - x).max() > 1e-6:
            return best_x
        best_x, best_r = xn, rn
    return best_x


def _branch_result(params: ProblemParams, x, n_steps, diagnostics) -> ShootingResult:
    a, p, alpha = params.a, params.p, params.alpha
    x = _polish(x, a, p, alpha, n_steps)
    m, mass = math.exp(x[0]), math.exp(x[1])
    h = _step_size(n_steps)
    c3 = a * a / mass**2
    u, v, bad = K.path(m, c3, alpha, p, h, n_steps)
    if bad >= 0:
        raise ConvergenceError("converged profile is not positive")
    # the path runs from the minimum at s = pi back to the maximum at s = 0
    values, slope = _reflect(u[::-1], -v[::-1])
    lam = float(u[-1])
    profile = GridFunction(_grid_for(n_steps), values)
    mass_grid = float(np.mean(values**-2.0))
    mu = lp_norm(profile, p) ** (p - 2.0)
    s_event, _, _ = K.first_event(m, c3, alpha, p, h, S_MAX, K.EVENT_CRITICAL)
    diag = dict(diagnostics)
    diag.update(rho=float(s_event), du_end=float(v[-1]), min_u=m)
    return ShootingResult(
        lam=lam,
        mass=mass,
        profile=profile,
        mu=float(mu),
        residual_ode=_system_residual(values, slope, _el_force(a, p, alpha, mass)),
        residual_fixedpoint=abs(mass_grid / mass - 1.0),
        branch="nonconstant",
        p=p,
        alpha=alpha,
        a=a,
        diagnostics=diag,
    )


def constant_result(params: ProblemParams, n_steps: int = DEFAULT_STEPS, **diagnostics) -> ShootingResult:
    lam_c = params.constant_height
    profile = GridFunction(_grid_for(n_steps), np.full(2 * n_steps, lam_c))
    return ShootingResult(
        lam=lam_c,
        mass=lam_c**-2,
        profile=profile,
        mu=params.constant_value,
        residual_ode=_system_residual(
            profile.values, np.zeros(2 * n_steps),
            _el_force(params.a, params.p, params.alpha, lam_c**-2)),
        residual_fixedpoint=0.0,
        branch="constant",
        p=params.p,
        alpha=params.alpha,
        a=params.a,
        diagnostics=dict(diagnostics),
    )


def _small_amplitude_rho(params: ProblemParams, n_steps: int) -> float:
    """rho just above the constant; it stays >= pi exactly when constants are rigid."""
    lam_c = params.constant_height
    return rho(lam_c * (1 + 1e-4), lam_c**-2, params, _step_size(n_steps))


def _refine_steps(params: ProblemParams, result: ShootingResult, n_steps: int) -> ShootingResult:
    """Halve the RK4 step, re-solving from the coarse solution, until the residual is
    below REFINE_TOL and the last halving moved mu by at most MU_STEP_TOL."""
    x = np.array([math.log(result.diagnostics["min_u"]), math.log(result.mass)])
    change = math.inf
    while n_steps < MAX_STEPS and (result.residual_ode > REFINE_TOL or change > MU_STEP_TOL):
        n_steps *= 2
        x, _, _ = _newton(_System(params.a, params.p, params.alpha, n_steps), x)
        finer = _branch_result(params, x, n_steps, dict(result.diagnostics))
        change = abs(finer.mu - result.mu)
        result = finer
    diag = result.diagnostics
    diag["n_steps"] = n_steps
    diag["mu_step_change"] = change
    return result


def solve_branch(params: ProblemParams, n_steps: int = DEFAULT_STEPS,
                 tracer: Optional[BranchTracer] = None) -> ShootingResult:
    """Optimal profile for ``params``: the non-constant branch if it exists, else the constant.

    Raises DomainError for a = 1/2 (use :func:`dirichlet_nu`).
    """
    if params.a >= 0.5:
        raise DomainError("a = 1/2 is handled by dirichlet_nu")
    if params.is_rigid:
        return constant_result(
            params, n_steps, rho_small_amplitude=_small_amplitude_rho(params, n_steps)
        )
    if tracer is None or tracer.a != params.a or tracer.p != params.p or tracer.n_steps != n_steps:
        tracer = BranchTracer(params.a, params.p, n_steps)
    result = tracer.result(params.alpha)
    result = _refine_steps(params, result, n_steps)
    if result.mu > params.constant_value:
        # the constant is the better critical point; never expected past alpha*
        return constant_result(params, n_steps, branch_mu=result.mu)
    return result


def mu(params: ProblemParams, n_steps: int = DEFAULT_STEPS,
       tracer: Optional[BranchTracer] = None) -> float:
    """mu_{a,p}(alpha); for a = 1/2 this is nu_p(alpha)."""
    if params.a >= 0.5:
        return dirichlet_nu(params.p, params.alpha, n_steps).mu
    return min(params.constant_value, solve_branch(params, n_steps, tracer).mu)


# --------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class MuRow:
    alpha: float
    mu_constant: float
    mu_branch: Optional[float]
    mu: float
    branch: str
    error: Optional[str] = None


@dataclass(frozen=True)
class MuCurve:
    a: float
    p: float
    rows: tuple

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def concavity_defect(self) -> float:
        """Largest positive second difference (normalized to the local spacing)."""
        al, mu_ = self.column("alpha"), self.column("mu")
        if al.size < 3:
            return 0.0
        h0, h1 = np.diff(al)[:-1], np.diff(al)[1:]
        # interpolated midpoint versus actual value, non-uniform safe
        interp = (h1 * mu_[:-2] + h0 * mu_[2:]) / (h0 + h1)
        return float(np.max(interp - mu_[1:-1], initial=0.0))

    def monotonicity_defect(self) -> float:
        return float(np.max(-np.diff(self.column("mu")), initial=0.0))

    def check(self, tol: float = 1e-6) -> None:
        al = self.column("alpha")
        if np.any(np.diff(al) <= 0):
            raise AssertionError("alpha is not strictly increasing")
        for r in self.rows:
            expected = r.mu_constant if r.mu_branch is None else min(r.mu_constant, r.mu_branch)
            if r.error is None and r.mu != expected:
                raise AssertionError(f"row at alpha={r.alpha}: mu is not the minimum")
        if self.monotonicity_defect() > tol:
            raise AssertionError(f"mu decreases by {self.monotonicity_defect():.3g}")
        if self.concavity_defect() > tol:
            raise AssertionError(f"three-point concavity violated by {self.concavity_defect():.3g}")


def _row(params: ProblemParams, n_steps, tracer) -> MuRow:
    mu_c = params.constant_value
    try:
        res = solve_branch(params, n_steps, tracer)
    except (ConvergenceError, DomainError) as exc:
        return MuRow(params.alpha, mu_c, None, mu_c, "error", str(exc))
    if res.branch == "constant":
        return MuRow(params.alpha, mu_c, None, mu_c, "constant")
    return MuRow(params.alpha, mu_c, res.mu, min(mu_c, res.mu), "nonconstant")


def worker_count() -> int:
    env = os.environ.get("MAGRING_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def mu_curve(a: float, p: float, alpha_min: float, alpha_max: float, steps: int,
             parallel: bool = False, n_steps: int = DEFAULT_STEPS) -> MuCurve:
    """Sweep alpha over ``steps`` uniform values in [alpha_min, alpha_max].

    The default sequential mode continues the branch from row to row;
    ``parallel=True`` solves every row from scratch on a thread pool.
    """
    a = ProblemParams(a, p, alpha_max).a
    if not alpha_min > -a * a or steps < 2 or not alpha_max > alpha_min:
        raise DomainError("need -a^2 < alpha_min < alpha_max and steps >= 2")
    alphas = np.linspace(alpha_min, alpha_max, int(steps))
    params = [ProblemParams(a, p, al) for al in alphas]
    if parallel:
        with ThreadPoolExecutor(max_workers=worker_count()) as pool:
            rows = list(pool.map(lambda pr: _row(pr, n_steps, None), params))
    else:
        tracer = BranchTracer(a, p, n_steps) if a < 0.5 else None
        rows = [_row(pr, n_steps, tracer) for pr in params]
    return MuCurve(a, float(p), tuple(rows))


# --------------------------------------------------------------------------
# bifurcation


@dataclass(frozen=True)
class Bifurcation:
    alpha_formula: float
    alpha_empirical: float

    @property
    def discrepancy(self) -> float:
        return abs(self.alpha_formula - self.alpha_empirical)


def branch_exists(a: float, p: float, alpha: float, n_steps: int = DEFAULT_STEPS,
                  eps: float = 1e-3) -> bool:
    """Whether Newton started at a small-amplitude perturbation of the constant
    reaches a non-constant solution with rho = pi."""
    system = _System(a, p, alpha, n_steps)
    lam_c = (a * a + alpha) ** (1.0 / (p - 2.0))
    for e in (eps, 10 * eps):
        try:
            x, _, _ = _newton(system, _const_guess(a, p, alpha, e))
        except ConvergenceError:
            continue
        if abs(math.exp(x[0]) / lam_c - 1.0) > 1e-7:
            return True
    return False


def bifurcation_alpha(a: float, p: float, n_steps: int = DEFAULT_STEPS,
                      tol: float = 1e-5) -> Bifurcation:
    """alpha* = (1 - a^2 (p+2)) / (p-2) and the onset found by bisection on branch existence."""
    a = ProblemParams(a, p, 1.0 + a * a).a
    formula = (1.0 - a * a * (p + 2.0)) / (p - 2.0)
    lo = max(formula - 0.1, -a * a + 1e-3 * (1 + formula + a * a))
    hi = formula + 0.1
    if branch_exists(a, p, lo, n_steps) or not branch_exists(a, p, hi, n_steps):
        raise NoBranchError(f"branch onset not bracketed in [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if branch_exists(a, p, mid, n_steps):
            hi = mid
        else:
            lo = mid
    return Bifurcation(formula, 0.5 * (lo + hi))


# --------------------------------------------------------------------------
# Dirichlet limit


def _first_zero(lam, p, alpha, h):
    s, _, status = K.first_event(lam, 0.0, alpha, p, h, S_MAX, K.EVENT_ZERO)
    return s if status == K.STATUS_FOUND else math.inf


def dirichlet_nu(p: float, alpha: float, n_steps: int = DEFAULT_STEPS) -> ShootingResult:
    """nu_p(alpha) from -u'' + alpha u = u^(p-1), u'(0) = 0, first zero of u at pi."""
    p, alpha = float(p), float(alpha)
    if not p > 2:
        raise DomainError("p must exceed 2")
    if not alpha > -0.25:
        raise DomainError("nu_p(alpha) needs alpha > -1/4")
    h = _step_size(n_steps)
    # z(lam) decreases from > pi (small amplitude) to 0 (large amplitude)
    lam = max(alpha + 0.25, 1e-3) ** (1.0 / (p - 2.0))
    lo = hi = lam
    history = []
    for _ in range(200):
        z = _first_zero(hi, p, alpha, h)
        history.append(z)
        if z <= math.pi:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ConvergenceError("could not bracket the Dirichlet height", history)
    for _ in range(200):
        z = _first_zero(lo, p, alpha, h)
        history.append(z)
        if z > math.pi:
            break
        lo *= 0.5
    else:
        raise ConvergenceError("could not bracket the Dirichlet height", history)
    lam = brentq(lambda l: _first_zero(l, p, alpha, h) - math.pi, lo, hi, xtol=1e-15)
    u, v, _ = K.path(lam, 0.0, alpha, p, h, n_steps)
    end_value = float(u[-1])
    u[-1] = 0.0
    values, slope = _reflect(u, v)
    profile = GridFunction(_grid_for(n_steps), values)
    nu = lp_norm(profile, p) ** (p - 2.0)
    # the extension u(s + 2 pi) = -u(s) is smooth, so differentiate with a half twist
    residual = _system_residual(values, slope, lambda w: alpha * w - np.abs(w) ** (p - 2) * w, 0.5)
    return ShootingResult(
        lam=lam,
        mass=math.inf,
        profile=profile,
        mu=float(nu),
        residual_ode=residual,
        residual_fixedpoint=0.0,
        branch="dirichlet",
        p=p,
        alpha=alpha,
        a=0.5,
        diagnostics={"u_at_pi": end_value, "slope_at_pi": float(v[-1])},
    )


# --------------------------------------------------------------------------
# inverse


def alpha_inverse(a: float, p: float, mu_target: float, n_steps: int = DEFAULT_STEPS,
                  tracer: Optional[BranchTracer] = None, tol: float = 1e-13) -> float:
    """The inverse alpha_{a,p} of alpha -> mu_{a,p}(alpha)."""
    if mu_target < 0:
        raise DomainError("mu_target must be non-negative")
    a = ProblemParams(a, p, 1.0 + a * a).a
    p = float(p)
    if mu_target == 0:
        return -a * a
    if 4 * a * a + mu_target * (p - 2) <= 1:
        return mu_target - a * a
    if a >= 0.5:
        raise DomainError("alpha_inverse at a = 1/2 is outside the closed-form range")
    if tracer is None or tracer.a != a or tracer.p != p or tracer.n_steps != n_steps:
        tracer = BranchTracer(a, p, n_steps)

    mu_star = (1.0 - 4.0 * a * a) / (p - 2.0)

    def mu_at(t):
        if t == 0.0:
            return mu_star
        return _branch_result(ProblemParams(a, p, tracer.alpha_of(t)),
                              tracer.solve_t(t), n_steps, {}).mu

    # mu(alpha*) = mu_star < mu_target; march in t until mu passes the target
    t_lo, t_hi = 0.0, max(T_START, math.sqrt(mu_target - mu_star))
    while mu_at(t_hi) < mu_target:
        t_lo, t_hi = t_hi, t_hi + max(T_STEP_MAX, 0.5 * t_hi)
        if t_hi > 1e3:
            raise ConvergenceError("alpha_inverse bracket diverged")
    t = brentq(lambda t: mu_at(t) - mu_target, t_lo, t_hi, xtol=tol)
    return tracer.alpha_of(t)
