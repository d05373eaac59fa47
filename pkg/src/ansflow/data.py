"""Initial-data generators: oscillatory data, random band-limited fields, shear."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ansflow.dyadic import decomposition_for, make_partition
from ansflow.spectral import (Grid, SpectralField, VectorField, dealias, forward_transform,
                              forward_vector, leray_project, partial_derivative)


@dataclass(frozen=True)
class OscillatoryDataSpec:
    """u0 = eps^{-1+2/q} sin(m x1 * 2pi/L1) (0, -d3(phi0 phi1), d2(phi0 phi1)).

    The carrier wavenumber 1/eps is snapped to the nearest wavenumber of
    the x1 axis.  phi1 and phi0 have Fourier transforms phi(|xi_h| / ring_h)
    and phi(|xi3| / ring_v), phi being the partition function, so their
    spectra sit in the rings (3/4, 8/3) * ring.
    """

    epsilon: float
    q_exponent: float = 4.0
    ring_h: float = 1.0
    ring_v: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.q_exponent < 2:
            raise ValueError("q_exponent must be >= 2")
        if not (self.ring_h > 0 and self.ring_v > 0):
            raise ValueError("ring scales must be positive")


def snapped_carrier(epsilon: float, grid: Grid) -> float:
    """1/eps rounded to the nearest x1 wavenumber of the grid."""
    dk = 2 * np.pi / grid.L1
    return float(max(1, round((1.0 / epsilon) / dk)) * dk)


def ring_profile(grid: Grid, scale: float, axis: str) -> SpectralField:
    """Real profile whose transform is phi(|xi| / scale), |xi| horizontal or vertical."""
    phi = make_partition()
    c = np.zeros(grid.shape, dtype=complex)
    if axis == "h":
        # x3-independent: only the xi3 = 0 plane
        c[:, :, 0] = phi(grid.xi_h / scale)[:, :, 0]
    else:
        # x_h-independent: only the xi_h = 0 line
        c[0, 0, :] = phi(grid.xi_v / scale)[0, 0, :]
    if not np.any(c):
        raise ValueError(f"no grid modes inside the {axis} ring of scale {scale}")
    return SpectralField(grid, c * ~grid.nyquist_mask)


def gen_oscillatory(spec: OscillatoryDataSpec, grid: Grid) -> VectorField:
    """Oscillatory divergence-free data with horizontal carrier 1/eps."""
    m = snapped_carrier(spec.epsilon, grid)
    top_h = 8.0 / 3.0 * spec.ring_h
    kmax1 = 2 * np.pi / grid.L1 * grid.mode_cutoff[0]
    if m + top_h > kmax1 or top_h > grid.max_dealiased("h"):
        raise ValueError(f"epsilon={spec.epsilon}: carrier {m} plus ring exceeds the "
                         f"resolvable wavenumber {kmax1}")
    if 8.0 / 3.0 * spec.ring_v > grid.max_dealiased("v"):
        raise ValueError("vertical ring is not resolvable")
    p1 = ring_profile(grid, spec.ring_h, "h")
    p0 = ring_profile(grid, spec.ring_v, "v")
    Phi = forward_transform(p1.to_physical() * p0.to_physical(), grid)
    d2 = partial_derivative(Phi, 2).to_physical()
    d3 = partial_derivative(Phi, 3).to_physical()
    x1, _, _ = grid.coordinates()
    s = np.sin(m * x1)
    amp = spec.amplitude * spec.epsilon ** (-1.0 + 2.0 / spec.q_exponent)
    zero = np.zeros(grid.shape)
    u = forward_vector(np.stack([zero, -amp * s * d3, amp * s * d2]), grid)
    return u.with_coeffs(u.coeffs, divergence_free=True)


def modulated_profile(epsilon: float, grid: Grid, ring: float = 1.0) -> SpectralField:
    """Planar e^{i x1 / eps} phi(x_h) with a ring-supported profile (complex)."""
    if not grid.is_planar:
        raise ValueError("modulated_profile expects a planar grid")
    m = snapped_carrier(epsilon, grid)
    if m + 8.0 / 3.0 * ring > 2 * np.pi / grid.L1 * grid.mode_cutoff[0]:
        raise ValueError(f"epsilon={epsilon} is not resolvable on this grid")
    prof = ring_profile(grid, ring, "h")
    x1, _, _ = grid.coordinates()
    return forward_transform(np.exp(1j * m * x1) * prof.to_physical(), grid)


def band_mask(grid: Grid, h_bands=None, v_bands=None) -> np.ndarray:
    """Sum of horizontal (and vertical) band symbols over inclusive ranges."""
    dec = decomposition_for(grid)
    m = np.ones((1, 1, 1))
    if h_bands is not None:
        m = m * sum((dec.h_mask(k) for k in range(h_bands[0], h_bands[1] + 1)),
                    np.zeros((1, 1, 1)))
    if v_bands is not None:
        m = m * sum((dec.v_mask(l) for l in range(v_bands[0], v_bands[1] + 1)),
                    np.zeros((1, 1, 1)))
    return np.broadcast_to(m, grid.shape)


def gen_random_bandlimited(seed: int, grid: Grid, h_bands=None, v_bands=None,
                           amplitude: float = 1.0, spectral_slope: float = 0.0) -> VectorField:
    """Seeded real divergence-free field restricted to the given dyadic bands.

    ``amplitude`` is the root-mean-square value ||u||_{L2} / |box|^{1/2};
    ``spectral_slope`` tilts the white spectrum by |xi|^slope.
    """
    rng = np.random.default_rng(seed)
    u = forward_vector(rng.standard_normal((3,) + grid.shape), grid)
    tilt = np.where(grid.xi_abs > 0, grid.xi_abs, 1.0) ** spectral_slope
    u = dealias(u.with_coeffs(u.coeffs * band_mask(grid, h_bands, v_bands) * tilt))
    u = leray_project(u)
    n = u.l2_norm()
    if n == 0:
        raise ValueError("no modes in the requested bands")
    return u * (amplitude * math.sqrt(grid.volume) / n)


def gen_shear(grid: Grid, amplitude: float = 1.0, mode: int = 1) -> VectorField:
    """u0 = (0, A sin(m x1), 0): the nonlinearity vanishes identically."""
    x1, _, _ = grid.coordinates()
    zero = np.zeros(grid.shape)
    u2 = amplitude * np.sin(mode * 2 * np.pi / grid.L1 * x1) + zero
    return forward_vector(np.stack([zero, u2, zero]), grid, divergence_free=True)
