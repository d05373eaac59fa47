"""Convective products, paraproduct pieces, the smallness functional and
the trilinear diagnostics F_j, G_j."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson, trapezoid

from ansflow import fft
from ansflow.accumulator import NormAccumulator
from ansflow.dyadic import DyadicDecomposition, decomposition_for
from ansflow.heat import HeatFlowParams, _rates, heat_symbol, make_uF, time_norm
from ansflow.norms import BesovParams, _lp_h_planes, _live_planes, besov_b012, besov_static
from ansflow.pseudo import half_space
from ansflow.spectral import Trajectory, VectorField, _derivative_wavenumber, _same_grid

N0 = 3
PARA_WINDOW = 5


def _convect_full(u: np.ndarray, a: np.ndarray, grid, axes=(1, 2, 3)) -> np.ndarray:
    """Complex-path u_j d_j a_i (sum over ``axes``), dealiased."""
    n = grid.size
    up = fft.batched(fft.ifftn, u * n)
    out = np.zeros_like(a)
    for i in range(3):
        acc = 0
        for j in axes:
            k = 1j * _derivative_wavenumber(grid, j)
            acc = acc + up[j - 1] * fft.ifftn(k * a[i] * n)
        out[i] = fft.fftn(acc) / n
    return out * grid.dealias_mask


def convect(u: VectorField, a: VectorField) -> VectorField:
    """Pseudo-spectral u . grad a, dealiased by the 2/3 rule."""
    _same_grid(u.grid, a.grid)
    g = u.grid
    if u.real and a.real and not g.is_planar:
        hs = half_space(g)
        out = hs.to_full(hs.convect(hs.to_half(u.coeffs), hs.to_half(a.coeffs)))
        return VectorField(g, out, False, True)
    return VectorField(g, _convect_full(u.coeffs, a.coeffs, g), False, False)


def _horizontal_convect(u: VectorField, a: VectorField) -> VectorField:
    """u^h . grad_h a (only the x1, x2 derivatives), dealiased."""
    out = _convect_full(u.coeffs, a.coeffs, u.grid, axes=(1, 2))
    return VectorField(u.grid, out, False, u.real and a.real)


def _vmask(dec: DyadicDecomposition, j: int) -> np.ndarray:
    """Extended vertical blocks: below the lowest band sits the xi3 residue."""
    lo = dec.l_range[0]
    if j == lo - 1:
        return dec.sv_mask(lo)
    if j < lo - 1:
        return np.zeros((1, 1, 1))
    return dec.v_mask(j)


def _svmask(dec: DyadicDecomposition, j: int) -> np.ndarray:
    """S^v_j = sum of the extended blocks below j."""
    if j <= dec.l_range[0] - 1:
        return np.zeros((1, 1, 1))
    return dec.sv_mask(j)


def bony_vertical_split(u: VectorField, a: VectorField, j: int,
                        dec: DyadicDecomposition | None = None) -> tuple:
    """Two paraproduct pieces of Delta^v_j (u^h . grad_h a).

    low-high: sum_{|j - j'| <= 5} Delta^v_j(S^v_{j'-1} u . grad_h Delta^v_{j'} a)
    high-low: sum_{j' >= j - N0} Delta^v_j(Delta^v_{j'} u . grad_h S^v_{j'+2} a)

    Their sum reconstructs Delta^v_j of the full product.
    """
    _same_grid(u.grid, a.grid)
    dec = dec or decomposition_for(u.grid)
    vj = dec.v_mask(j)
    lo, hi = dec.l_range[0] - 1, dec.l_range[1]
    low_high = np.zeros_like(a.coeffs)
    for jp in range(max(lo, j - PARA_WINDOW), min(hi, j + PARA_WINDOW) + 1):
        us = u.with_coeffs(u.coeffs * _svmask(dec, jp - 1))
        ad = a.with_coeffs(a.coeffs * _vmask(dec, jp))
        low_high += _horizontal_convect(us, ad).coeffs
    high_low = np.zeros_like(a.coeffs)
    for jp in range(max(lo, j - N0), hi + 1):
        ud = u.with_coeffs(u.coeffs * _vmask(dec, jp))
        as_ = a.with_coeffs(a.coeffs * _svmask(dec, jp + 2))
        high_low += _horizontal_convect(ud, as_).coeffs
    real = u.real and a.real
    return (VectorField(u.grid, low_high * vj, False, real),
            VectorField(u.grid, high_low * vj, False, real))


def _default_times(hh: VectorField, params: HeatFlowParams, T: float) -> np.ndarray:
    if params.times is not None:
        return params.times
    rr = _rates(hh, params.nu_h, params.nu_3)
    if rr is None:
        return np.array([0.0, 1.0 if math.isinf(T) else T])
    lo, hi = rr
    if math.isinf(T):
        end = 12.0 / (2 * lo)
    else:
        end = T
    t0 = min(end / 2, 0.01 / hi)
    return np.concatenate([[0.0], np.geomspace(t0, end, 63)])


def forcing_series(u0: VectorField, params, T: float = math.inf) -> tuple:
    """(times, sum_j 2^{j/2} ||Delta^v_j (u_F . grad u_F)||_{L2}) along u_F."""
    hp = _heat_params(params)
    traj = make_uF(u0, hp)
    times = _default_times(traj[0], hp, T)
    hh = traj[0]
    rate = heat_symbol(u0.grid, hp.nu_h, hp.nu_3)
    vals = []
    for t in times:
        uf = hh.with_coeffs(hh.coeffs * np.exp(-rate * t))
        vals.append(besov_b012(convect(uf, uf)))
    return np.asarray(times), np.array(vals)


def _heat_params(params) -> HeatFlowParams:
    if isinstance(params, HeatFlowParams):
        return params
    return HeatFlowParams(params.nu_h, params.nu_3)


def forcing_norm_L1T_B012(u0: VectorField, params, T: float = math.inf) -> float:
    """int_0^T sum_j 2^{j/2} ||Delta^v_j (u_F . grad u_F)||_{L2} dt.

    Simpson's rule on a geometric time grid.  T = inf integrates until the
    slowest product mode has decayed by e^-12 and adds the exponential tail
    in closed form.
    """
    hp = _heat_params(params)
    times, vals = forcing_series(u0, hp, T)
    if not np.any(vals):
        return 0.0
    total = simpson(vals, x=times)
    if math.isinf(T) and hp.times is None:
        hh = make_uF(u0, HeatFlowParams(hp.nu_h, hp.nu_3, np.array([0.0, 1.0])))[0]
        total += vals[-1] / (2 * _rates(hh, hp.nu_h, hp.nu_3)[0])
    return float(total)


@dataclass
class EFunctionalReport:
    besov_part: float
    forcing_part: float
    total: float
    T: float


def e_functional(u0: VectorField, params: BesovParams, T: float = math.inf) -> EFunctionalReport:
    """[u0]_{E^p_T}: the static Besov norm plus the forcing norm of u_F . grad u_F."""
    b = besov_static(u0, params)
    f = forcing_norm_L1T_B012(u0, params, T)
    return EFunctionalReport(b, f, b + f, T)


def _check_aligned(*trajs):
    t0 = trajs[0].times
    for tr in trajs[1:]:
        if len(tr.times) != len(t0) or np.any(np.abs(tr.times - t0) > 1e-12 * max(1.0, t0[-1])):
            raise ValueError("trajectories are sampled at different times")
        _same_grid(tr.grid, trajs[0].grid)


def _band_pairing(x: VectorField, y: VectorField, vj: np.ndarray) -> float:
    """int Delta^v_j x . Delta^v_j y dx by Parseval (real part)."""
    return float(x.grid.volume * np.real(np.vdot(y.coeffs * vj, x.coeffs * vj)))


def trilinear_Fj(u: Trajectory, a: Trajectory, j: int,
                 dec: DyadicDecomposition | None = None) -> float:
    """F_j(T) = int_0^T |int Delta^v_j(u . grad a) Delta^v_j a dx| dt."""
    _check_aligned(u, a)
    dec = dec or decomposition_for(u.grid)
    vj = dec.v_mask(j)
    vals = [abs(_band_pairing(convect(uf, af), af, vj)) for uf, af in zip(u.fields, a.fields)]
    return float(trapezoid(vals, u.times)) if len(vals) > 1 else 0.0


def trilinear_Gj(a: Trajectory, b: Trajectory, uF: Trajectory, j: int,
                 dec: DyadicDecomposition | None = None) -> float:
    """G_j(T) = int_0^T |int Delta^v_j(a . grad u_F) Delta^v_j b dx| dt."""
    _check_aligned(a, b, uF)
    dec = dec or decomposition_for(a.grid)
    vj = dec.v_mask(j)
    vals = [abs(_band_pairing(convect(af, uf), bf, vj))
            for af, bf, uf in zip(a.fields, b.fields, uF.fields)]
    return float(trapezoid(vals, a.times)) if len(vals) > 1 else 0.0


def tilde_L_norm(u: Trajectory, p: float, dec: DyadicDecomposition | None = None,
                 tail_rate: float = 0.0) -> float:
    """sum_j 2^{j/2} ||Delta^v_j u||_{L^{2p/(p-1)}_T(L^{2p}_h(L^2_v))}."""
    if p <= 1:
        raise ValueError("p must exceed 1")
    dec = dec or decomposition_for(u.grid)
    r = 2 * p / (p - 1)
    comps_total = []
    for comp in range(3):
        tot = 0.0
        for j in dec.l_bands:
            vm = dec.v_mask(j)
            planes = _live_planes(vm)
            vals = [_lp_h_planes(f.coeffs[comp][:, :, planes] * vm[:, :, planes], u.grid, 2 * p)
                    for f in u.fields]
            tot += 2.0 ** (j / 2) * time_norm(vals, u.times, r, tail_rate)
        comps_total.append(tot)
    return float(np.sqrt(np.sum(np.square(comps_total))))


def b012_time_norm(a: Trajectory, nu_h: float, nu_3: float) -> float:
    """||a||_{B^{0,1/2}(T)} from the snapshots (trapezoid in time)."""
    acc = NormAccumulator.from_trajectory(a, 2.0, nu_h, nu_3, track_hh=False)
    return acc.b012()


@dataclass
class TrilinearRow:
    j: int
    F: float
    G: float
    bound_rhs: float
    fitted_C: float


def trilinear_diagnostics(u: Trajectory, a: Trajectory, uF: Trajectory, p: float,
                          nu_h: float, nu_3: float,
                          dec: DyadicDecomposition | None = None) -> list:
    """Per-band F_j(u, a), G_j(a, a, u_F) and the aggregate bound.

    bound_rhs = nu_h^{-1/2-1/(2p)} ||a||^2_{B^{0,1/2}(T)} ||u||_{tilde L}; the
    fitted constant of each row is 2^j F_j / bound_rhs, and the last row
    (j = None) carries the aggregate sum_j 2^j F_j / bound_rhs.
    """
    dec = dec or decomposition_for(u.grid)
    rhs = (nu_h ** (-0.5 - 1 / (2 * p)) * b012_time_norm(a, nu_h, nu_3) ** 2
           * tilde_L_norm(u, p, dec))
    rows = []
    agg = 0.0
    for j in dec.l_bands:
        F = trilinear_Fj(u, a, j, dec)
        G = trilinear_Gj(a, a, uF, j, dec)
        agg += 2.0**j * F
        rows.append(TrilinearRow(j, F, G, rhs, 2.0**j * F / rhs if rhs > 0 else 0.0))
    rows.append(TrilinearRow(None, agg, float("nan"), rhs, agg / rhs if rhs > 0 else 0.0))
    return rows
