"""Half-spectrum kernels for real fields.

Real fields are stored by the solver as rfft halves (m3 >= 0 only); these
helpers give derivatives, products and projections on that layout.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ansflow import fft
from ansflow.spectral import Grid, _derivative_wavenumber, _expand_half


class HalfSpace:
    """Wavenumber tables and transforms for the (n1, n2, n3 // 2 + 1) layout."""

    def __init__(self, grid: Grid):
        if grid.is_planar:
            raise ValueError("half-spectrum kernels need a 3-D grid")
        self.grid = grid
        self.nh = grid.n3 // 2 + 1
        nh = self.nh
        self.ik = tuple(1j * _derivative_wavenumber(grid, ax)[..., :nh] if ax == 3
                        else 1j * _derivative_wavenumber(grid, ax) for ax in (1, 2, 3))
        x1, x2, x3 = grid.xi
        self.xi = (x1, x2, x3[..., :nh])
        self.xi_h_sq = grid.xi_h**2
        self.xi_v_sq = self.xi[2] ** 2
        self.xi_sq = self.xi_h_sq + self.xi_v_sq
        self.inv_xi_sq = np.divide(1.0, self.xi_sq, out=np.zeros_like(self.xi_sq),
                                   where=self.xi_sq > 0)
        self.dealias = grid.dealias_mask[..., :nh]
        # each interior m3 >= 1 plane stands for itself and its mirror
        w = np.full(nh, 2.0)
        w[0] = 1.0
        if grid.n3 % 2 == 0:
            w[-1] = 1.0
        self.weight3 = w

    @property
    def shape(self) -> tuple:
        return (self.grid.n1, self.grid.n2, self.nh)

    def phys(self, half: np.ndarray) -> np.ndarray:
        return fft.batched(fft.irfftn, np.ascontiguousarray(half * self.grid.size),
                           self.grid.shape)

    def spec(self, x: np.ndarray) -> np.ndarray:
        return fft.batched(fft.rfftn, np.ascontiguousarray(x)) / self.grid.size

    def to_half(self, full: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray(full[..., : self.nh])

    def to_full(self, half: np.ndarray) -> np.ndarray:
        return _expand_half(half, self.grid)

    def gradient(self, a: np.ndarray) -> np.ndarray:
        """d_j a_i for a (3, ...) half array, shape (3, 3, ...) indexed [i, j]."""
        return np.stack([np.stack([k * ai for k in self.ik]) for ai in a])

    def convect(self, u: np.ndarray, a: np.ndarray, u_phys=None) -> np.ndarray:
        """Dealiased u_j d_j a_i."""
        up = self.phys(u) if u_phys is None else u_phys
        ga = self.phys(self.gradient(a).reshape((9,) + self.shape)).reshape((3, 3) + self.grid.shape)
        prod = np.einsum("jxyz,ijxyz->ixyz", up, ga)
        return self.spec(prod) * self.dealias

    def leray(self, v: np.ndarray) -> np.ndarray:
        dot = sum(x * c for x, c in zip(self.xi, v)) * self.inv_xi_sq
        return np.stack([c - x * dot for x, c in zip(self.xi, v)])

    def energy(self, v: np.ndarray, weight=None) -> float:
        """sum over all modes of |v|^2 (times an optional per-mode weight)."""
        e = np.abs(v) ** 2
        if weight is not None:
            e = e * weight
        return float(np.sum(np.sum(e, axis=tuple(range(e.ndim - 1))) * self.weight3))


@lru_cache(maxsize=8)
def half_space(grid: Grid) -> HalfSpace:
    return HalfSpace(grid)
