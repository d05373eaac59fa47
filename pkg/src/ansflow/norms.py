"""Scalar norm functionals built on the dyadic decomposition.

Homogeneous sums over band indices are truncated to the bands a grid can
resolve; the xi_h = 0 / xi3 = 0 residue only enters the inhomogeneous
norms.  Vector fields are measured component by component and combined as
the root of the sum of squares.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from ansflow.dyadic import DyadicDecomposition, decomposition_for
from ansflow.spectral import Grid, SpectralField, VectorField


@dataclass(frozen=True)
class BesovParams:
    p: float = 2.0
    nu_h: float = 1.0
    nu_3: float = 0.0

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("p must be >= 2")
        if not self.nu_h > 0:
            raise ValueError("nu_h must be positive")
        if self.nu_3 < 0:
            raise ValueError("nu_3 must be non-negative")


@dataclass
class BandMatrix:
    """Per-band mixed norms ||Delta^h_k Delta^v_l a||_{L^p_h(L^2_v)}."""

    k_bands: range
    l_bands: range
    values: np.ndarray  # shape (len(k_bands), len(l_bands))
    p: float

    def __getitem__(self, kl):
        k, l = kl
        if k not in self.k_bands or l not in self.l_bands:
            return 0.0
        return float(self.values[k - self.k_bands[0], l - self.l_bands[0]])


def _as_components(a) -> list:
    if isinstance(a, VectorField):
        return list(a.coeffs)
    return [a.coeffs]


def _params_p(params) -> float:
    if isinstance(params, BesovParams):
        return params.p
    p = float(params)
    if p < 2:
        raise ValueError("p must be >= 2")
    return p


def _combine(values) -> float:
    return float(math.sqrt(sum(v * v for v in values)))


def l2_of(coeffs: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(grid.volume * np.sum(np.abs(coeffs) ** 2)))


def _lp_h_planes(planes: np.ndarray, grid: Grid, p: float) -> float:
    """L^p_h(L^2_v) of a field given by a subset of its m3 planes."""
    if planes.shape[-1] == 0:
        return 0.0
    fh = sfft.ifft2(planes, axes=(0, 1)) * (grid.n1 * grid.n2)
    if grid.is_planar:
        inner = np.abs(fh[..., 0])
    else:
        inner = np.sqrt(grid.L3 * np.sum(np.abs(fh) ** 2, axis=-1))
    dx1, dx2, _ = grid.spacing
    if np.isinf(p):
        return float(inner.max())
    return float((np.sum(inner**p) * dx1 * dx2) ** (1.0 / p))


def _live_planes(vm: np.ndarray) -> np.ndarray:
    return np.flatnonzero(np.ravel(vm) > 0)


def band_matrix(coeffs: np.ndarray, grid: Grid, p: float,
                dec: DyadicDecomposition | None = None,
                select=None, physical: bool = False) -> BandMatrix:
    """Mixed band norms for one scalar component.

    ``select(k, l)`` restricts the bands evaluated (others are left at 0).
    With p = 2 the norms come from Parseval unless ``physical`` is set.
    """
    dec = dec or decomposition_for(grid)
    kb, lb = dec.k_bands, dec.l_bands
    vals = np.zeros((len(kb), len(lb)))
    for jl, l in enumerate(lb):
        vm = dec.v_mask(l)
        planes = _live_planes(vm)
        if planes.size == 0:
            continue
        cl = coeffs[:, :, planes] * vm[:, :, planes]
        for ik, k in enumerate(kb):
            if select is not None and not select(k, l):
                continue
            block = cl * dec.h_mask(k)
            if p == 2 and not physical:
                vals[ik, jl] = l2_of(block, grid)
            else:
                vals[ik, jl] = _lp_h_planes(block, grid, p)
    return BandMatrix(kb, lb, vals, p)


def _static_terms(c: np.ndarray, grid: Grid, p: float, dec, physical=False) -> tuple:
    bm = band_matrix(c, grid, p, dec, select=lambda k, l: k >= l - 1, physical=physical)
    first = 0.0
    for l in dec.l_bands:
        s = sum(2.0 ** ((-2 + 4 / p) * k) * bm[k, l] ** 2 for k in dec.k_bands if k >= l - 1)
        first += 2.0 ** (l / 2) * math.sqrt(s)
    second = 0.0
    for j in dec.l_bands:
        block = c * dec.v_mask(j) * dec.sh_mask(j - 1)
        second += 2.0 ** (j / 2) * l2_of(block, grid)
    return first, second


def besov_static(a, params=2.0, dec: DyadicDecomposition | None = None,
                 physical: bool = False) -> float:
    """Scaling-invariant anisotropic Besov norm B^{-1+2/p,1/2}_p."""
    p = _params_p(params)
    dec = dec or decomposition_for(a.grid)
    vals = []
    for c in _as_components(a):
        f, s = _static_terms(c, a.grid, p, dec, physical)
        vals.append(f + s)
    return _combine(vals)


def besov_static_parts(a, params=2.0, dec=None) -> tuple:
    """(hh-sum, ll-sum) of besov_static, each combined over components."""
    p = _params_p(params)
    dec = dec or decomposition_for(a.grid)
    parts = [_static_terms(c, a.grid, p, dec) for c in _as_components(a)]
    return _combine([x[0] for x in parts]), _combine([x[1] for x in parts])


def vertical_band_l2(c: np.ndarray, grid: Grid, dec) -> dict:
    return {j: l2_of(c * dec.v_mask(j), grid) for j in dec.l_bands}


def besov_b012(a, dec: DyadicDecomposition | None = None) -> float:
    """B^{0,1/2} norm: sum_j 2^{j/2} ||Delta^v_j a||_{L^2}."""
    dec = dec or decomposition_for(a.grid)
    vals = []
    for c in _as_components(a):
        vals.append(sum(2.0 ** (j / 2) * n for j, n in vertical_band_l2(c, a.grid, dec).items()))
    return _combine(vals)


def h0s_norm(a, s: float, dec: DyadicDecomposition | None = None) -> float:
    dec = dec or decomposition_for(a.grid)
    vals = []
    for c in _as_components(a):
        band = vertical_band_l2(c, a.grid, dec)
        vals.append(math.sqrt(sum(2.0 ** (2 * j * s) * n**2 for j, n in band.items())))
    return _combine(vals)


def calH_norm(a, dec: DyadicDecomposition | None = None) -> float:
    """(sum_{j >= -1} 2^-j ||Delta^vi_j a||^2)^(1/2), Delta^vi_{-1} = S^v_0."""
    dec = dec or decomposition_for(a.grid)
    top = dec.l_range[1]
    vals = []
    for c in _as_components(a):
        tot = sum(2.0**-j * l2_of(c * dec.vi_mask(j), a.grid) ** 2 for j in range(-1, top + 1))
        vals.append(math.sqrt(tot))
    return _combine(vals)


def calB_norm(a, p, dec: DyadicDecomposition | None = None) -> float:
    """(sum_{k, j >= 0} 2^{j - k(2 - 4/p)} ||Delta^h_k Delta^v_j a||^2_{L^p_h(L^2_v)})^(1/2)."""
    p = _params_p(p)
    dec = dec or decomposition_for(a.grid)
    vals = []
    for c in _as_components(a):
        bm = band_matrix(c, a.grid, p, dec, select=lambda k, l: l >= 0)
        tot = sum(2.0 ** (j - k * (2 - 4 / p)) * bm[k, j] ** 2
                  for k in dec.k_bands for j in dec.l_bands if j >= 0)
        vals.append(math.sqrt(tot))
    return _combine(vals)


def _sup_norm(coeffs: np.ndarray, grid: Grid) -> float:
    return float(np.max(np.abs(sfft.ifftn(coeffs) * grid.size)))


def iso_band_sup(a, dec: DyadicDecomposition | None = None) -> dict:
    """{j: ||Delta_j a||_{L^inf}} over isotropic bands (components combined)."""
    dec = dec or decomposition_for(a.grid)
    out = {}
    for j in dec.j_bands:
        m = dec.iso_mask(j)
        out[j] = _combine([_sup_norm(c * m, a.grid) for c in _as_components(a)])
    return out


def b_neg1_inf_q(a, q: float, dec: DyadicDecomposition | None = None) -> float:
    """||2^-j ||Delta_j a||_{L^inf}||_{l^q_j}, isotropic bands."""
    seq = np.array([2.0**-j * v for j, v in iso_band_sup(a, dec).items()])
    if np.isinf(q):
        return float(seq.max(initial=0.0))
    return float(np.sum(seq**q) ** (1.0 / q))


def _planar(a) -> tuple:
    """Horizontal coefficients (n1, n2, 1) and a planar grid."""
    g = a.grid
    c = a.coeffs if isinstance(a, SpectralField) else None
    if c is None:
        raise TypeError("expected a scalar SpectralField")
    if g.is_planar:
        return c, g
    if np.any(np.abs(c[:, :, 1:]) > 1e-14 * max(1.0, np.abs(c).max())):
        raise ValueError("field depends on x3")
    return c[:, :, :1], Grid(g.n1, g.n2, 1, g.L1, g.L2)


def horizontal_band_lq(a, q: float, dec: DyadicDecomposition | None = None) -> tuple:
    """({k: ||Delta^h_k a||_{L^q}}, ||S^h_0 a||_{L^2}) for a planar field."""
    c, g = _planar(a)
    dec = dec or decomposition_for(g)
    bands = {k: _lp_h_planes(c * dec.h_mask(k), g, q) for k in dec.k_bands}
    low = l2_of(c * dec.sh_mask(0), g)
    return bands, low


def prop1_norms(a, sigma: float, alpha: float, q: float = 4.0,
                dec: DyadicDecomposition | None = None) -> tuple:
    """(tilde B^{-sigma}_{q,1}, dot B^{-alpha}_{q,1}, dot B^{-sigma}_{q,inf}) of a planar field."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if not 0 < alpha < 2 * (1 - 1 / q):
        raise ValueError("alpha must lie in (0, 2(1 - 1/q))")
    bands, low = horizontal_band_lq(a, q, dec)
    tilde = low + sum(2.0 ** (-sigma * k) * v for k, v in bands.items() if k >= 0)
    dot1 = sum(2.0 ** (-alpha * k) * v for k, v in bands.items())
    dotinf = max(2.0 ** (-sigma * k) * v for k, v in bands.items())
    return tilde, dot1, dotinf


def osgood_mu(r: float) -> float:
    """Osgood modulus r (1 - log2 r) log2(1 - log2 r) on (0, 1]."""
    if not 0 < r <= 1:
        raise ValueError("r must lie in (0, 1]")
    t = 1.0 - math.log2(r)
    return r * t * math.log2(t)


def norm_report_rows(a, params: BesovParams) -> list:
    """CSV rows (norm_name, p, q, sigma, value) for the static norms of ``a``."""
    p = params.p
    nan = float("nan")
    return [
        ("besov_static", p, nan, nan, besov_static(a, p)),
        ("besov_b012", 2.0, nan, nan, besov_b012(a)),
        ("h0s_half", nan, nan, 0.5, h0s_norm(a, 0.5)),
        ("calH", nan, nan, nan, calH_norm(a)),
        ("calB", p, nan, nan, calB_norm(a, p)),
        ("b_neg1_inf_1", nan, 1.0, nan, b_neg1_inf_q(a, 1)),
        ("b_neg1_inf_2", nan, 2.0, nan, b_neg1_inf_q(a, 2)),
        ("b_neg1_inf_inf", nan, float("inf"), nan, b_neg1_inf_q(a, np.inf)),
    ]
