"""Magnetic Schrodinger operators H_a - phi on the circle in a truncated Fourier basis.

With psi = sum_k psi_k exp(iks), the operator (-i d/ds + a)^2 - phi acts on
coefficient vectors as the Hermitian Toeplitz-plus-diagonal matrix

    (a + k)^2 delta_{jk} - phi_hat(j - k),   |j|, |k| <= K.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg
from scipy.optimize import brentq

from .circle import DomainError, GridFunction, lp_norm
from .forms import ProblemParams
from .shooting import BranchTracer, alpha_inverse, solve_branch

DEFAULT_CUTOFF = 128
#: dense eigensolver up to this matrix size, inverse iteration beyond
DENSE_LIMIT = 513
KLT_TOL = 1e-8


class InequalityViolation(AssertionError):
    """A bound that must hold was violated beyond tolerance."""


@dataclass(frozen=True, eq=False)
class PotentialOperator:
    a: float
    cutoff: int
    matrix: np.ndarray

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(-self.cutoff, self.cutoff + 1)


def _phi_coefficients(phi: GridFunction, kmax: int) -> np.ndarray:
    """phi_hat(m) for m = -kmax..kmax; modes the grid cannot resolve are zero."""
    n = phi.grid.n_nodes
    raw = np.fft.fft(phi.values) / n
    m = np.arange(-kmax, kmax + 1)
    out = raw[m % n] * np.exp(1j * m * np.pi)
    out[np.abs(m) > (n - 1) // 2] = 0.0
    return out


def assemble(a: float, phi: GridFunction, cutoff: int = DEFAULT_CUTOFF) -> PotentialOperator:
    """Fourier matrix of H_a - phi for |k| <= cutoff.  ``a`` is used as given, not reduced."""
    if not phi.is_real:
        raise DomainError("the potential must be real")
    if cutoff < 1:
        raise DomainError("cutoff must be positive")
    c = _phi_coefficients(phi, 2 * cutoff)
    k = np.arange(-cutoff, cutoff + 1)
    # entry (j, k) holds phi_hat(j - k)
    col = c[2 * cutoff:]
    row = c[2 * cutoff::-1]
    T = linalg.toeplitz(col, row)
    matrix = np.diag((a + k) ** 2).astype(complex) - T
    return PotentialOperator(float(a), int(cutoff), matrix)


def _lowest(matrix: np.ndarray) -> float:
    n = matrix.shape[0]
    if n <= DENSE_LIMIT:
        return float(linalg.eigh(matrix, eigvals_only=True, subset_by_index=[0, 0])[0])
    # inverse iteration from below the Gershgorin bound
    shift = float(np.min(np.diag(matrix).real - np.abs(matrix).sum(axis=1) + np.abs(np.diag(matrix))))
    lu = linalg.lu_factor(matrix - (shift - 1.0) * np.eye(n))
    x = np.ones(n, dtype=complex) / np.sqrt(n)
    value = np.inf
    for _ in range(500):
        y = linalg.lu_solve(lu, x)
        x = y / np.linalg.norm(y)
        new = float(np.vdot(x, matrix @ x).real)
        if abs(new - value) <= 1e-15 * max(1.0, abs(new)):
            return new
        value = new
    return value


def lambda1(a: float, phi: GridFunction, cutoff: Optional[int] = None, tol: float = 1e-10) -> float:
    """Lowest eigenvalue of H_a - phi.

    With ``cutoff=None`` the cutoff starts at 128 and doubles until two
    successive values agree within ``tol`` or the potential's grid is exhausted.
    """
    if cutoff is not None:
        return _lowest(assemble(a, phi, cutoff).matrix)
    K = DEFAULT_CUTOFF
    value = _lowest(assemble(a, phi, K).matrix)
    kmax = phi.grid.n_nodes // 2
    while K < kmax:
        K *= 2
        new = _lowest(assemble(a, phi, K).matrix)
        if abs(new - value) <= tol:
            return new
        value = new
    return value


@dataclass(frozen=True)
class KltReport:
    lambda1: float
    bound: float
    margin: float
    q_norm: float
    closed_form: bool


def klt_check(params: ProblemParams, phi: GridFunction, cutoff: Optional[int] = None,
              tracer: Optional[BranchTracer] = None, strict: bool = True) -> KltReport:
    """Compare lambda1(H_a - phi) with the lower bound -alpha_{a,p}(||phi||_q).

    Raises InequalityViolation when ``strict`` and the margin is below -1e-8.
    """
    a, p = params.a, params.p
    if not phi.is_real or np.any(phi.values < 0):
        raise DomainError("klt_check needs a non-negative real potential")
    q_norm = lp_norm(phi, params.q)
    bound = -alpha_inverse(a, p, q_norm, tracer=tracer)
    lam = lambda1(a, phi, cutoff)
    report = KltReport(lam, bound, lam - bound, q_norm,
                       4 * a * a + q_norm * (p - 2) <= 1)
    if strict and report.margin < -KLT_TOL:
        raise InequalityViolation(f"lambda1 = {lam} lies below the bound {bound}")
    return report


def extremal_potential(params: ProblemParams) -> GridFunction:
    """phi = u^(p-2) for the optimal profile u at (a, p, alpha).

    The optimal function solves (H_a + alpha) psi = |psi|^(p-2) psi, so this
    potential has lambda1 = -alpha and ||phi||_q = mu, the equality case of
    the bound.
    """
    res = solve_branch(params)
    return res.profile.with_values(res.profile.values ** (params.p - 2.0))


def hardy_tau(params: ProblemParams, phi: GridFunction, tol: float = 1e-13) -> float:
    """Largest tau with H_a - tau phi >= 0 guaranteed by the bound.

    tau solves alpha_{a,p}(tau ||phi||_q) = 0, found by root bracketing with
    the upper end grown geometrically.
    """
    a, p = params.a, params.p
    if np.any(phi.values < 0):
        raise DomainError("hardy_tau needs a non-negative potential")
    norm = lp_norm(phi, params.q)
    if norm == 0:
        raise DomainError("hardy_tau needs a non-zero potential")
    if a == 0:
        return 0.0
    tracer = BranchTracer(a, p) if a < 0.5 else None

    def g(tau):
        return alpha_inverse(a, p, tau * norm, tracer=tracer)

    hi = a * a / norm
    while g(hi) < 0:
        hi *= 2.0
    if g(hi) == 0:
        return hi
    return brentq(g, 0.0, hi, xtol=tol)
