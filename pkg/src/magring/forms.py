"""Problem parameters, the magnetic quadratic form and the two Rayleigh quotients."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circle import DomainError, GridFunction, integrate, lp_norm

#: relative level below which a profile counts as vanishing in quotient_calQ
VANISH_THRESHOLD = 1e-8


def reduce_flux(a_raw: float) -> float:
    """Distance from ``a_raw`` to the nearest integer.

    The constant is invariant under a -> a + k and a -> 1 - a, so every
    flux reduces to [0, 1/2].
    """
    if not math.isfinite(a_raw):
        raise DomainError(f"flux must be finite, got {a_raw}")
    return abs(a_raw - round(a_raw))


@dataclass(frozen=True)
class ProblemParams:
    """The triple (a, p, alpha); ``a`` is reduced to [0, 1/2] on construction."""

    a: float
    p: float
    alpha: float
    q: float = field(init=False)

    def __post_init__(self):
        a = reduce_flux(float(self.a))
        p = float(self.p)
        alpha = float(self.alpha)
        if not p > 2 or not math.isfinite(p):
            raise DomainError(f"exponent p must be finite and > 2, got {p}")
        if not alpha > -a * a:
            raise DomainError(f"alpha={alpha} is not > -a^2 = {-a * a}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "q", p / (p - 2.0))

    @property
    def constant_value(self) -> float:
        """a^2 + alpha, the quotient of any constant function."""
        return self.a**2 + self.alpha

    @property
    def constant_height(self) -> float:
        """The constant solution (a^2 + alpha)^(1/(p-2)) of the Euler-Lagrange equation."""
        return self.constant_value ** (1.0 / (self.p - 2.0))

    @property
    def rigidity_index(self) -> float:
        """a^2 (p+2) + alpha (p-2); constants are optimal iff this is <= 1."""
        return self.a**2 * (self.p + 2) + self.alpha * (self.p - 2)

    @property
    def is_rigid(self) -> bool:
        return self.rigidity_index <= 1.0

    @property
    def bifurcation_alpha(self) -> float:
        return (1.0 - self.a**2 * (self.p + 2)) / (self.p - 2)


def flux_average(a_fn: GridFunction) -> float:
    """Mean of a tangential vector potential; the only gauge invariant on the circle."""
    if not a_fn.is_real:
        raise DomainError("vector potential must be real")
    return float(integrate(a_fn))


def _modes(f: GridFunction):
    n = f.grid.n_nodes
    return f.grid.wavenumbers, np.fft.fft(f.values) / n


def magnetic_form(psi: GridFunction, a: float) -> float:
    """||psi' + i a psi||_2^2 = sum_k (a + k)^2 |psi_k|^2, over the resolvable modes."""
    k, c = _modes(psi)
    return float(np.sum((a + k) ** 2 * np.abs(c) ** 2))


def dirichlet_energy(f: GridFunction) -> float:
    """||f'||_2^2 computed per Fourier mode."""
    return magnetic_form(f, 0.0)


def quotient_Q(v: GridFunction, p: float, alpha: float, twist: float = 0.0) -> float:
    """(||v'||_2^2 + alpha ||v||_2^2) / ||v||_p^2.

    ``twist`` allows quasi-periodic v with v(s + 2 pi) = exp(2 i pi twist) v(s):
    the derivative is then taken through the periodic factor
    exp(-i twist s) v, so e.g. cos(s/2) is handled exactly with twist = 1/2.
    """
    values = v.values
    if not np.any(values):
        raise DomainError("quotient of the zero function")
    if twist:
        psi = v.with_values(values * np.exp(-1j * twist * v.nodes))
        kinetic = magnetic_form(psi, twist)
    else:
        kinetic = magnetic_form(v, 0.0)
    mass = float(np.mean(np.abs(values) ** 2))
    return (kinetic + alpha * mass) / lp_norm(v, p) ** 2


def is_vanishing(u: GridFunction) -> bool:
    a = np.abs(u.values)
    return a.min() <= VANISH_THRESHOLD * a.max()


def quotient_calQ(u: GridFunction, params: ProblemParams) -> float:
    """(||u'||^2 + a^2 (mean u^-2)^-1 + alpha ||u||^2) / ||u||_p^2 for real u.

    A profile touching zero has a non-integrable u^-2; the nonlocal term is
    then dropped and the plain quotient Q is returned.
    """
    if not u.is_real:
        raise DomainError("quotient_calQ takes a real profile")
    values = u.values
    if not np.any(values):
        raise DomainError("quotient of the zero function")
    if is_vanishing(u):
        return quotient_Q(u, params.p, params.alpha)
    nonlocal_term = params.a**2 / np.mean(values**-2.0)
    numerator = dirichlet_energy(u) + nonlocal_term + params.alpha * np.mean(values**2)
    return float(numerator / lp_norm(u, params.p) ** 2)


@dataclass(frozen=True, eq=False)
class PhaseData:
    """Phase phi with phi' = multiplier / u^2 and phi(-pi) = 0."""

    winding: int
    phase: GridFunction
    multiplier: float
    mass: float  # mean of u^-2

    @property
    def increment(self) -> float:
        """phi(pi) - phi(-pi)."""
        return 2.0 * math.pi * self.multiplier * self.mass


def _cumulative(w: GridFunction) -> np.ndarray:
    """int_{-pi}^{s_j} w ds, exact for trigonometric polynomials."""
    grid = w.grid
    k = grid.wavenumbers
    c = np.fft.fft(w.values) / grid.n_nodes
    mean = c[0].real
    c[0] = 0.0
    c[grid.n_nodes // 2] = 0.0
    anti = np.zeros_like(c)
    nz = k != 0
    anti[nz] = c[nz] / (1j * k[nz])
    prim = (np.fft.ifft(anti) * grid.n_nodes).real
    s = grid.nodes
    return mean * (s + np.pi) + prim - prim[0]


def phase_reconstruct(u: GridFunction, a: float, k: int = 0) -> PhaseData:
    """Phase of the optimal v = u exp(i phi) for a positive modulus u."""
    if not u.is_real or np.any(u.values <= 0):
        raise DomainError("phase reconstruction needs a positive profile")
    w = u.with_values(u.values**-2.0)
    mass = float(integrate(w))
    multiplier = (a + k) / mass
    phase = u.with_values(multiplier * _cumulative(w))
    return PhaseData(winding=int(k), phase=phase, multiplier=multiplier, mass=mass)


def assemble_psi(u: GridFunction, a: float, k: int = 0) -> GridFunction:
    """Periodic psi = u exp(i (phi(s) - (a + k)(s + pi))) built from a positive modulus.

    Its magnetic energy at flux a + k equals ||u'||^2 + (a+k)^2 / mean(u^-2).
    """
    data = phase_reconstruct(u, a, k)
    s = u.nodes
    return u.with_values(u.values * np.exp(1j * (data.phase.values - (a + k) * (s + np.pi))))
