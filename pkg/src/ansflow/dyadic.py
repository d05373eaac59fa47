"""Anisotropic Littlewood-Paley decomposition on the periodic box.

Horizontal bands localize |xi_h| = (xi1^2 + xi2^2)^(1/2) near 2^k, vertical
bands localize |xi3| near 2^l, isotropic bands localize |xi| near 2^j.  On
the torus only finitely many bands carry modes; everything below the lowest
band (the xi_h = 0 or xi3 = 0 modes) is lumped into the low-pass operator at
the bottom of the range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ansflow.spectral import Grid, SpectralField, VectorField


def _h(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


@dataclass(frozen=True)
class PartitionFunction:
    """phi(tau) = chi(tau) - chi(2 tau) with a smooth step chi.

    chi = 1 on [0, plateau], chi = 0 on [top, inf) and
    chi(tau) = h(top - tau) / (h(top - tau) + h(tau - plateau)) between,
    h(x) = exp(-1/x).  Telescoping gives sum_j phi(2^-j tau) = 1.

    ``exponent`` != 1 evaluates phi(tau ** (1 / exponent)), which widens the
    support and destroys the partition identity (used as a negative control).
    """

    plateau: float = 1.5
    top: float = 8.0 / 3.0
    exponent: float = 1.0

    @property
    def support(self) -> tuple:
        return ((self.plateau / 2) ** self.exponent, self.top**self.exponent)

    def chi(self, tau):
        tau = np.asarray(tau, dtype=float)
        a = _h(self.top - tau)
        b = _h(tau - self.plateau)
        with np.errstate(invalid="ignore", divide="ignore"):
            mid = a / (a + b)
        out = np.where(tau <= self.plateau, 1.0, np.where(tau >= self.top, 0.0, mid))
        return out

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        if self.exponent != 1.0:
            tau = np.abs(tau) ** (1.0 / self.exponent)
        return self.chi(tau) - self.chi(2.0 * tau)

    def low_pass(self, tau):
        """Cumulative symbol sum_{j <= 0} phi(2^-j tau) = chi(tau)."""
        tau = np.asarray(tau, dtype=float)
        if self.exponent != 1.0:
            tau = np.abs(tau) ** (1.0 / self.exponent)
        return self.chi(tau)


def make_partition(exponent: float = 1.0) -> PartitionFunction:
    return PartitionFunction(exponent=exponent)


def _band_range(smallest: float, largest: float, phi: PartitionFunction) -> tuple:
    """Bands touching the positive wavenumbers in [smallest, largest].

    The top band is the first whose plateau covers ``largest``, so that the
    partition sums to one on every resolved mode.
    """
    if smallest <= 0 or largest <= 0:
        return (0, -1)
    lo = math.floor(math.log2(smallest / phi.top)) + 1
    hi = math.ceil(math.log2(largest / phi.plateau))
    return (lo, max(lo, hi))


@dataclass(eq=False)
class DyadicDecomposition:
    """Band masks for one grid, built lazily and cached."""

    grid: Grid
    phi: PartitionFunction = field(default_factory=make_partition)
    k_range: tuple | None = None
    l_range: tuple | None = None
    j_range: tuple | None = None

    def __post_init__(self):
        g = self.grid
        kmin_h = min(2 * np.pi / g.L1, 2 * np.pi / g.L2)
        if self.k_range is None:
            self.k_range = _band_range(kmin_h, g.max_dealiased("h"), self.phi)
        if self.l_range is None:
            if g.is_planar:
                self.l_range = (0, -1)
            else:
                self.l_range = _band_range(2 * np.pi / g.L3, g.max_dealiased("v"), self.phi)
        if self.j_range is None:
            kmin = kmin_h if g.is_planar else min(kmin_h, 2 * np.pi / g.L3)
            self.j_range = _band_range(kmin, g.max_dealiased("iso"), self.phi)
        self._cache: dict = {}

    @property
    def k_bands(self) -> range:
        return range(self.k_range[0], self.k_range[1] + 1)

    @property
    def l_bands(self) -> range:
        return range(self.l_range[0], self.l_range[1] + 1)

    @property
    def j_bands(self) -> range:
        return range(self.j_range[0], self.j_range[1] + 1)

    def _mask(self, key, builder):
        m = self._cache.get(key)
        if m is None:
            m = builder()
            self._cache[key] = m
        return m

    def h_mask(self, k: int) -> np.ndarray:
        if k not in self.k_bands:
            return np.zeros((1, 1, 1))
        return self._mask(("h", k), lambda: self.phi(2.0**-k * self.grid.xi_h))

    def v_mask(self, l: int) -> np.ndarray:
        if l not in self.l_bands:
            return np.zeros((1, 1, 1))
        return self._mask(("v", l), lambda: self.phi(2.0**-l * self.grid.xi_v))

    def iso_mask(self, j: int) -> np.ndarray:
        if j not in self.j_bands:
            return np.zeros((1, 1, 1))
        return self._mask(("i", j), lambda: self.phi(2.0**-j * self.grid.xi_abs))

    def sh_mask(self, k: int) -> np.ndarray:
        """Symbol of S^h_k = sum_{k' <= k-1} Delta^h_k' (includes xi_h = 0)."""
        k = min(k, self.k_range[1] + 1)
        return self._mask(("sh", k), lambda: self.phi.low_pass(2.0 ** (1 - k) * self.grid.xi_h))

    def sv_mask(self, l: int) -> np.ndarray:
        l = min(l, self.l_range[1] + 1)
        return self._mask(("sv", l), lambda: self.phi.low_pass(2.0 ** (1 - l) * self.grid.xi_v))

    def vi_mask(self, j: int) -> np.ndarray:
        """Inhomogeneous vertical blocks: Delta^v_j for j >= 0, S^v_0 at j = -1."""
        if j <= -2:
            return np.zeros((1, 1, 1))
        if j == -1:
            return self.sv_mask(0)
        return self.v_mask(j)

    def hh_mask(self) -> np.ndarray:
        """Symbol of sum_{k >= l-1} Delta^h_k Delta^v_l (vertical residual in the lowest l)."""
        def build():
            total = np.zeros(self.grid.shape)
            for l in self.l_bands:
                vm = self.v_mask(l)
                if l == self.l_range[0]:
                    vm = vm + self.sv_mask(l)
                hsum = sum((self.h_mask(k) for k in self.k_bands if k >= l - 1),
                           np.zeros((1, 1, 1)))
                total = total + vm * hsum
            if not list(self.l_bands):
                total = total + sum((self.h_mask(k) for k in self.k_bands), np.zeros((1, 1, 1)))
            return total
        return self._mask(("hh",), build)


@lru_cache(maxsize=16)
def decomposition_for(grid: Grid) -> DyadicDecomposition:
    return DyadicDecomposition(grid)


def _apply(a, mask):
    return a.with_coeffs(a.coeffs * mask)


def _dec(a, dec):
    return dec if dec is not None else decomposition_for(a.grid)


def delta_h(a, k: int, dec: DyadicDecomposition | None = None):
    """Horizontal band: multiply by phi(2^-k |xi_h|)."""
    return _apply(a, _dec(a, dec).h_mask(k))


def delta_v(a, l: int, dec: DyadicDecomposition | None = None):
    return _apply(a, _dec(a, dec).v_mask(l))


def delta_iso(a, j: int, dec: DyadicDecomposition | None = None):
    return _apply(a, _dec(a, dec).iso_mask(j))


def s_h(a, k: int, dec: DyadicDecomposition | None = None):
    """Horizontal low-pass S^h_k."""
    return _apply(a, _dec(a, dec).sh_mask(k))


def s_v(a, l: int, dec: DyadicDecomposition | None = None):
    return _apply(a, _dec(a, dec).sv_mask(l))


def split_hh_ll(u0, dec: DyadicDecomposition | None = None):
    """Split into the horizontally dominated part and the remainder.

    hh = sum_{k >= l-1} Delta^h_k Delta^v_l u0 and ll = u0 - hh, which equals
    sum_j S^h_{j-1} Delta^v_j u0 on the resolved modes.
    """
    m = _dec(u0, dec).hh_mask()
    hh = u0.with_coeffs(u0.coeffs * m)
    ll = u0.with_coeffs(u0.coeffs * (1.0 - m))
    return hh, ll


def ll_part(u0, dec: DyadicDecomposition | None = None):
    """sum_j S^h_{j-1} Delta^v_j u0, summed band by band."""
    d = _dec(u0, dec)
    total = np.zeros(u0.grid.shape)
    for l in d.l_bands:
        vm = d.v_mask(l)
        if l == d.l_range[0]:
            vm = vm + d.sv_mask(l)
        total = total + vm * d.sh_mask(l - 1)
    return u0.with_coeffs(u0.coeffs * total)
