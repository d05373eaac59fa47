"""Anisotropic heat semigroup, the free evolution u_F and decay diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from ansflow.dyadic import DyadicDecomposition, decomposition_for, split_hh_ll
from ansflow.norms import _as_components, _combine, _lp_h_planes, _live_planes, besov_static
from ansflow.spectral import Grid, Trajectory, VectorField

TAIL_DECAY = 12.0


def heat_symbol(grid: Grid, nu_h: float, nu_3: float) -> np.ndarray:
    """Decay rate nu_h |xi_h|^2 + nu_3 xi_3^2 per mode."""
    return nu_h * grid.xi_h**2 + nu_3 * grid.xi_v**2


def semigroup(a, t: float, nu_h: float, nu_3: float):
    """exp(t (nu_h Delta_h + nu_3 d_3^2)) applied as an exact multiplier."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return a.with_coeffs(a.coeffs * np.exp(-heat_symbol(a.grid, nu_h, nu_3) * t))


@dataclass
class HeatFlowParams:
    nu_h: float
    nu_3: float = 0.0
    times: np.ndarray | None = None

    def __post_init__(self):
        if not self.nu_h > 0:
            raise ValueError("nu_h must be positive")
        if self.nu_3 < 0:
            raise ValueError("nu_3 must be non-negative")
        if self.times is not None:
            t = np.asarray(self.times, dtype=float)
            if t[0] != 0 or np.any(np.diff(t) <= 0) or t[-1] <= 0:
                raise ValueError("times must start at 0 and increase strictly to T > 0")
            self.times = t


def decay_times(rate_lo: float, rate_hi: float, n: int = 64,
                decay: float = TAIL_DECAY) -> np.ndarray:
    """0 followed by a geometric grid reaching the e^-decay time of the slowest rate."""
    T = decay / rate_lo
    t0 = min(T, 0.02 / rate_hi)
    return np.concatenate([[0.0], np.geomspace(t0, T, n - 1)])


def _rates(a, nu_h, nu_3) -> tuple:
    r = np.broadcast_to(heat_symbol(a.grid, nu_h, nu_3), a.grid.shape)
    live = np.any(np.abs(np.reshape(a.coeffs, (-1,) + a.grid.shape)) > 0, axis=0) & (r > 0)
    if not live.any():
        return None
    return float(r[live].min()), float(r[live].max())


def make_uF(u0: VectorField, params: HeatFlowParams,
            dec: DyadicDecomposition | None = None) -> Trajectory:
    """Free heat evolution of the hh part of ``u0`` on ``params.times``.

    Without explicit times, a geometric grid out to the e^-12 decay time of
    the slowest populated mode is used.
    """
    hh, _ = split_hh_ll(u0, dec)
    times = params.times
    if times is None:
        rr = _rates(hh, params.nu_h, params.nu_3)
        times = np.array([0.0, 1.0]) if rr is None else decay_times(*rr)
    rate = heat_symbol(u0.grid, params.nu_h, params.nu_3)
    snaps = [hh.with_coeffs(hh.coeffs * np.exp(-rate * t), divergence_free=u0.divergence_free)
             for t in times]
    return Trajectory(times, snaps)


def time_norm(values: np.ndarray, times: np.ndarray, q: float, tail_rate: float = 0.0) -> float:
    """L^q in time by trapezoid; optional exponential tail beyond the last time.

    ``tail_rate`` is the decay rate of ``values`` themselves; the tail of
    values**q is integrated in closed form.
    """
    values = np.asarray(values, dtype=float)
    if np.isinf(q):
        return float(values.max(initial=0.0))
    integ = trapezoid(values**q, times)
    if tail_rate > 0:
        integ += values[-1] ** q / (q * tail_rate)
    return float(integ ** (1.0 / q))


@dataclass
class DecayRow:
    k: int
    l: int
    q: float
    p: float
    lhs: float
    bound: float
    ratio: float
    raw_ratio: float


@dataclass
class DecayReport:
    rows: list = field(default_factory=list)
    vertical_branch_skipped: bool = False

    @property
    def ratios(self) -> np.ndarray:
        return np.array([r.ratio for r in self.rows])

    @property
    def spread(self) -> float:
        r = self.ratios
        return float(r.max() / r.min()) if r.size else float("nan")

    @property
    def max_ratio(self) -> float:
        return float(self.ratios.max()) if self.rows else float("nan")

    def csv_rows(self) -> list:
        return [(r.k, r.l, r.q, r.p, r.lhs, r.bound, r.ratio) for r in self.rows]


def _band_min_factor(k, l, q, nu_h, nu_3) -> float:
    if np.isinf(q):
        return 1.0
    h = nu_h ** (-1 / q) * 2.0 ** (-2 * k / q)
    if nu_3 == 0:
        return h
    return min(h, nu_3 ** (-1 / q) * 2.0 ** (-2 * l / q))


def verify_decay_lemma24(u0: VectorField, params: HeatFlowParams, q: float, p: float,
                         dec: DyadicDecomposition | None = None,
                         n_times: int = 48, rel_floor: float = 1e-6) -> DecayReport:
    """Per-band L^q_T(L^p_h(L^2_v)) size of u_F against the heat-decay bound.

    For each band (k, l) with k >= l - 1 the left side is measured on a
    band-adapted geometric time grid (plus the closed-form exponential tail).
    ``bound`` is the band's initial mixed norm times
    min(nu_h^{-1/q} 2^{-2k/q}, nu_3^{-1/q} 2^{-2l/q}); ``raw_ratio`` divides by
    2^{(1-2/p)k} 2^{-l/2} min(...) only.  Bands holding less than
    ``rel_floor`` of the largest band are not reported.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if p < 2:
        raise ValueError("p must be >= 2")
    dec = dec or decomposition_for(u0.grid)
    g = u0.grid
    hh, _ = split_hh_ll(u0, dec)
    comps = _as_components(hh)
    rate = np.broadcast_to(heat_symbol(g, params.nu_h, params.nu_3), g.shape)
    report = DecayReport(vertical_branch_skipped=params.nu_3 == 0)
    pending = []
    for l in dec.l_bands:
        vm = dec.v_mask(l)
        planes = _live_planes(vm)
        for k in dec.k_bands:
            if k < l - 1:
                continue
            m = (dec.h_mask(k) * vm)[:, :, planes]
            blocks = [c[:, :, planes] * m for c in comps]
            live = np.any([np.abs(b) > 0 for b in blocks], axis=0)
            if not live.any():
                continue
            r = rate[:, :, planes][live]
            if r.min() <= 0:
                continue
            a0 = _combine([_lp_h_planes(b, g, p) for b in blocks])
            pending.append((k, l, planes, blocks, float(r.min()), float(r.max()), a0))
    if not pending:
        return report
    top = max(x[-1] for x in pending)
    for k, l, planes, blocks, r_lo, r_hi, a0 in pending:
        if a0 < rel_floor * top:
            continue
        times = decay_times(r_lo, r_hi, n_times) if not np.isinf(q) else np.array([0.0])
        rp = rate[:, :, planes]
        vals = np.array([
            _combine([_lp_h_planes(b * np.exp(-rp * t), g, p) for b in blocks]) for t in times
        ])
        lhs = time_norm(vals, times, q, tail_rate=r_lo)
        fac = _band_min_factor(k, l, q, params.nu_h, params.nu_3)
        bound = a0 * fac
        raw = lhs / (2.0 ** ((1 - 2 / p) * k) * 2.0 ** (-l / 2) * fac)
        report.rows.append(DecayRow(k, l, q, p, lhs, bound, lhs / bound, raw))
    return report


@dataclass
class LinfL2Report:
    j: list
    lhs: list
    normalized: list
    besov_norm: float
    sequence_sum: float
    linf_l2: float
    fitted_constant: float

    def csv_rows(self) -> list:
        return [(j, a, b) for j, a, b in zip(self.j, self.lhs, self.normalized)]


def verify_linf_l2_lemma25(u0: VectorField, params: HeatFlowParams, p: float = 2.0,
                           dec: DyadicDecomposition | None = None,
                           n_times: int = 48) -> LinfL2Report:
    """L^2(R+; L^inf_h(L^2_v)) size of Delta^v_j u_F and L^2(R+; L^inf) of u_F.

    ``normalized[j]`` = lhs_j / (nu_h^{-1/2} 2^{-j/2}) should form a summable
    sequence whose sum is controlled by the Besov norm of u0;
    ``fitted_constant`` = ||u_F||_{L^2 L^inf} nu_h^{1/2} / ||u0||_B.
    """
    dec = dec or decomposition_for(u0.grid)
    g = u0.grid
    bnorm = besov_static(u0, p, dec)
    traj = make_uF(u0, HeatFlowParams(params.nu_h, params.nu_3, params.times), dec)
    hh = traj[0]
    rr = _rates(hh, params.nu_h, params.nu_3)
    js, lhs, normed = [], [], []
    if rr is None:
        return LinfL2Report(js, lhs, normed, bnorm, 0.0, 0.0, 0.0)
    times = traj.times
    for j in dec.l_bands:
        vm = dec.v_mask(j)
        planes = _live_planes(vm)
        vals = []
        for u in traj.fields:
            blocks = [c[:, :, planes] * vm[:, :, planes] for c in u.coeffs]
            vals.append(_linf_h_l2_v(blocks, g))
        vals = np.array(vals)
        if vals[0] == 0:
            continue
        v = time_norm(vals, times, 2.0, tail_rate=rr[0])
        js.append(j)
        lhs.append(v)
        normed.append(v / (params.nu_h**-0.5 * 2.0 ** (-j / 2)))
    sup_vals = np.array([np.max(np.sqrt(np.sum(u.to_physical() ** 2, axis=0)))
                         for u in traj.fields])
    linf = time_norm(sup_vals, times, 2.0, tail_rate=rr[0])
    fitted = linf * math.sqrt(params.nu_h) / bnorm if bnorm > 0 else 0.0
    return LinfL2Report(js, lhs, normed, bnorm, float(sum(normed)), linf, fitted)


def _linf_h_l2_v(blocks, g: Grid) -> float:
    """L^inf_h(L^2_v) of a vector field given by m3 planes, pointwise Euclidean."""
    if blocks[0].shape[-1] == 0:
        return 0.0
    tot = 0.0
    for b in blocks:
        fh = np.fft.ifft2(b, axes=(0, 1)) * (g.n1 * g.n2)
        tot = tot + g.L3 * np.sum(np.abs(fh) ** 2, axis=-1)
    return float(np.sqrt(np.max(tot)))
