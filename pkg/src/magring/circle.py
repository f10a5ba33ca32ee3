"""Uniform periodic discretization of the circle (-pi, pi].

All integrals are taken against the probability measure ds / (2 pi), so the
constant function 1 has unit norm in every L^p.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_NODES = 512


class DomainError(ValueError):
    """Input outside the domain where an operation is defined."""


@dataclass(frozen=True)
class Grid:
    """Uniform nodes s_j = -pi + 2 pi j / n, j = 0..n-1."""

    n_nodes: int = DEFAULT_NODES

    def __post_init__(self):
        n = self.n_nodes
        if int(n) != n or n < 8 or n % 2:
            raise DomainError(f"n_nodes must be an even integer >= 8, got {n}")
        object.__setattr__(self, "n_nodes", int(n))

    @property
    def spacing(self) -> float:
        return 2.0 * np.pi / self.n_nodes

    @property
    def nodes(self) -> np.ndarray:
        return -np.pi + self.spacing * np.arange(self.n_nodes)

    @property
    def wavenumbers(self) -> np.ndarray:
        """Integer wavenumbers in numpy FFT order."""
        return np.fft.fftfreq(self.n_nodes, d=1.0 / self.n_nodes)

    def sample(self, func, dtype=None) -> "GridFunction":
        return GridFunction(self, np.asarray(func(self.nodes), dtype=dtype))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a 2 pi-periodic function on a :class:`Grid`."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, copy=True)
        if values.shape != (self.grid.n_nodes,):
            raise DomainError(
                f"expected {self.grid.n_nodes} samples, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise DomainError("grid function has non-finite samples")
        if not np.iscomplexobj(values):
            values = values.astype(float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)

    def __len__(self):
        return self.grid.n_nodes


@dataclass(frozen=True, eq=False)
class FourierVector:
    """Coefficients c_k, k = -K..K, stored in ascending k."""

    cutoff: int
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=complex, copy=True)
        if coeffs.shape != (2 * self.cutoff + 1,):
            raise DomainError(
                f"expected {2 * self.cutoff + 1} coefficients, got {coeffs.shape}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(-self.cutoff, self.cutoff + 1)

    def coeff(self, k: int) -> complex:
        if abs(k) > self.cutoff:
            return 0j
        return self.coeffs[k + self.cutoff]


def _values(f) -> np.ndarray:
    return f.values if isinstance(f, GridFunction) else np.asarray(f)


def integrate(f):
    """Rectangle rule for the integral of f against ds / (2 pi)."""
    return np.mean(_values(f))


def lp_norm(f, p: float) -> float:
    """L^p norm under ds / (2 pi).

    ``p = -2`` is accepted for nowhere-vanishing real f and returns
    ``(mean f**-2) ** -1/2``, so its square is the harmonic mean of f**2.
    ``p = np.inf`` gives the sup norm.
    """
    v = _values(f)
    if p == -2:
        if np.iscomplexobj(v):
            raise DomainError("p = -2 norm requires a real function")
        if np.any(v == 0):
            raise DomainError("p = -2 norm of a function with a zero is undefined")
        return float(np.mean(v**-2.0) ** -0.5)
    if p == np.inf:
        return float(np.max(np.abs(v)))
    if p < 1:
        raise DomainError(f"lp_norm needs p >= 1 or p = -2, got {p}")
    a = np.abs(v)
    scale = a.max()
    if scale == 0:
        return 0.0
    # scaling avoids overflow for large p
    return float(scale * np.mean((a / scale) ** p) ** (1.0 / p))


def derivative(f: GridFunction, order: int = 1) -> GridFunction:
    """Spectral derivative; the Nyquist mode is dropped for odd orders."""
    grid = f.grid
    k = grid.wavenumbers
    symbol = (1j * k) ** order
    if order % 2:
        symbol[grid.n_nodes // 2] = 0.0
    out = np.fft.ifft(symbol * np.fft.fft(f.values))
    if f.is_real:
        out = out.real
    return f.with_values(out)


def fourier(f: GridFunction, K: int) -> FourierVector:
    """Fourier coefficients c_k with f(s) = sum_k c_k exp(i k s), |k| <= K."""
    n = f.grid.n_nodes
    if 2 * K + 1 > n:
        raise DomainError(f"cutoff K={K} aliases on a grid of {n} nodes")
    # the grid starts at s = -pi, so shift the phase of the DFT
    raw = np.fft.fft(f.values) / n
    k = np.arange(-K, K + 1)
    coeffs = raw[k % n] * np.exp(1j * k * np.pi)
    return FourierVector(K, coeffs)


def inverse_fourier(c: FourierVector, grid: Grid, real: bool | None = None) -> GridFunction:
    """Evaluate a trigonometric polynomial on ``grid``.

    If ``real`` is None the result is real when the coefficients are
    conjugate-symmetric to 1e-12.
    """
    if 2 * c.cutoff + 1 > grid.n_nodes:
        raise DomainError(f"cutoff K={c.cutoff} aliases on a grid of {grid.n_nodes} nodes")
    n = grid.n_nodes
    k = c.wavenumbers
    raw = np.zeros(n, dtype=complex)
    np.add.at(raw, k % n, c.coeffs * np.exp(-1j * k * np.pi))
    values = np.fft.ifft(raw) * n
    if real is None:
        scale = max(np.abs(c.coeffs).max(), 1e-300)
        real = np.abs(c.coeffs - np.conj(c.coeffs[::-1])).max() <= 1e-12 * scale
    return GridFunction(grid, values.real if real else values)


def resample(f: GridFunction, grid: Grid) -> GridFunction:
    """Trigonometric interpolation of f onto another uniform grid."""
    if grid.n_nodes == f.grid.n_nodes:
        return f
    K = (min(grid.n_nodes, f.grid.n_nodes) - 1) // 2
    return inverse_fourier(fourier(f, K), grid, real=f.is_real)


def _placement_order(n: int) -> np.ndarray:
    """Node indices ordered by |s|: 0, +h, -h, +2h, -2h, ..., -pi."""
    mid = n // 2
    order = [mid]
    for k in range(1, mid):
        order += [mid + k, mid - k]
    order.append(0)
    return np.array(order)


def rearrange_decreasing(f: GridFunction) -> GridFunction:
    """Symmetric decreasing rearrangement about s = 0.

    The samples are sorted by descending value (equal values by ascending
    original index) and dealt out along the nodes in order of increasing
    |s|, the node at +kh before the one at -kh.
    """
    if not f.is_real:
        raise DomainError("rearrangement needs a real function")
    v = f.values
    if np.any(v < 0):
        raise DomainError("rearrangement needs a non-negative function")
    ranked = np.lexsort((np.arange(v.size), -v))
    out = np.empty_like(v)
    out[_placement_order(v.size)] = v[ranked]
    return f.with_values(out)
