"""Property suites with fitted constants, shared by ``check`` and the tests.

Every suite returns a ``SuiteResult`` holding a pass flag, the fitted
constants it measured and a few diagnostic numbers.  Suites take a grid
size so the same code runs at 32^3 (quick check) and 64^3 (acceptance).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ansflow.data import gen_random_bandlimited
from ansflow.dyadic import DyadicDecomposition, make_partition
from ansflow.heat import HeatFlowParams, verify_decay_lemma24, verify_linf_l2_lemma25
from ansflow.nonlinear import convect, e_functional, trilinear_Fj
from ansflow.norms import BesovParams, b_neg1_inf_q, besov_b012, besov_static
from ansflow.solver import SolverConfig, solve_u, solve_w
from ansflow.spectral import (Grid, SpectralField, Trajectory, VectorField, dealias,
                              forward_transform, mixed_norm, partial_derivative)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    constants: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed),
                "constants": _jsonable(self.constants), "details": _jsonable(self.details)}


def _jsonable(d):
    out = {}
    for k, v in d.items():
        if isinstance(v, (np.floating, np.integer)):
            v = v.item()
        if isinstance(v, float) and not math.isfinite(v):
            v = str(v)
        if isinstance(v, np.ndarray):
            v = v.tolist()
        out[k] = v
    return out


def spread(values) -> float:
    v = np.asarray(values, dtype=float)
    return float(v.max() / v.min())


def max_over_median(values) -> float:
    v = np.asarray(values, dtype=float)
    return float(v.max() / np.median(v))


# ------------------------------------------------------------------ partition

def suite_partition(phi=None, J: int = 8, n_tau: int = 2000) -> SuiteResult:
    """sum_{|j| <= J} phi(2^-j tau) = 1 on [2^{-J+2}, 2^{J-2}] and support checks."""
    phi = phi or make_partition()
    tau = np.geomspace(2.0 ** (-J + 2), 2.0 ** (J - 2), n_tau)
    total = sum(phi(2.0**-j * tau) for j in range(-J, J + 1))
    err = float(np.max(np.abs(total - 1)))
    lo, hi = 3 / 4, 8 / 3
    probe = np.concatenate([np.linspace(0, lo, 50), np.linspace(hi, 10, 50)])
    outside = float(np.max(np.abs(phi(probe))))
    vals = phi(np.linspace(0, 10, 2001))
    bounded = bool(vals.min() >= 0 and vals.max() <= 1)
    ok = err <= 1e-10 and outside == 0 and bounded
    return SuiteResult("partition", ok, {}, {"max_error": err, "outside_support": outside,
                                             "bounded": bounded})


# ------------------------------------------------------------------ oracles

def dft_oracle(f: np.ndarray) -> np.ndarray:
    """coeff(m) = N^-1 sum_x f(x) e^{-i m.x} by explicit summation."""
    n1, n2, n3 = f.shape
    idx = [np.arange(n) for n in f.shape]
    E = [np.exp(-2j * np.pi * np.outer(i, i) / n) for i, n in zip(idx, f.shape)]
    return np.einsum("ai,bj,ck,ijk->abc", E[0], E[1], E[2], f) / f.size


def convolution_oracle(u: np.ndarray, a: np.ndarray, grid: Grid) -> np.ndarray:
    """Dealiased coefficients of u . grad a by direct summation over mode pairs."""
    modes = grid.modes
    xi = grid.wavenumbers
    live = [np.flatnonzero(np.abs(m) <= c) for m, c in zip(modes, grid.mode_cutoff)]
    out = np.zeros_like(a)
    pts = list(itertools.product(*live))
    for p in pts:
        mp = np.array([modes[d][p[d]] for d in range(3)])
        for q in pts:
            mq = np.array([modes[d][q[d]] for d in range(3)])
            m = mp + mq
            if np.any(np.abs(m) > np.array(grid.mode_cutoff)):
                continue
            tgt = tuple(int(x) % n for x, n in zip(m, grid.shape))
            kq = np.array([xi[d][q[d]] for d in range(3)])
            for i in range(3):
                out[i][tgt] += sum(u[j][p] * 1j * kq[j] * a[i][q] for j in range(3))
    return out


def mixed_norm_oracle(f: np.ndarray, grid: Grid, p: float, q: float) -> float:
    dx1, dx2, dx3 = grid.spacing
    total = 0.0
    for i in range(f.shape[0]):
        for j in range(f.shape[1]):
            inner = 0.0
            for k in range(f.shape[2]):
                inner += abs(f[i, j, k]) ** q * dx3
            total += inner ** (p / q) * dx1 * dx2
    return total ** (1 / p)


def trilinear_oracle(u: VectorField, a: VectorField, j: int, T: float,
                     dec: DyadicDecomposition) -> float:
    """T |int Delta^v_j(u . grad a) . Delta^v_j a dx| by physical quadrature."""
    g = u.grid
    up = u.to_physical()
    grads = [[partial_derivative(c, ax).to_physical() for ax in (1, 2, 3)] for c in a.components]
    prod = np.stack([sum(up[k] * grads[i][k] for k in range(3)) for i in range(3)])
    vj = dec.v_mask(j)
    lhs = [forward_transform(prod[i], g) for i in range(3)]
    lhs = [dealias(c) for c in lhs]
    band_prod = [c.with_coeffs(c.coeffs * vj).to_physical() for c in lhs]
    band_a = [c.with_coeffs(c.coeffs * vj).to_physical() for c in a.components]
    dV = np.prod(g.spacing)
    return T * abs(float(sum(np.sum(x * y) for x, y in zip(band_prod, band_a)) * dV))


def suite_oracles(seed: int = 0) -> SuiteResult:
    g = Grid.cube(8)
    rng = np.random.default_rng(seed)
    f = rng.standard_normal(g.shape)
    c = forward_transform(f, g).coeffs
    dft_err = float(np.max(np.abs(c - dft_oracle(f))) / np.max(np.abs(c)))

    def rand_vec():
        v = VectorField(g, np.stack([forward_transform(rng.standard_normal(g.shape), g).coeffs
                                     for _ in range(3)]))
        return dealias(v)

    u, a = rand_vec(), rand_vec()
    conv = convect(u, a).coeffs
    conv_err = float(np.max(np.abs(conv - convolution_oracle(u.coeffs, a.coeffs, g)))
                     / np.max(np.abs(conv)))
    gm = Grid.cube(8)
    fm = rng.standard_normal(gm.shape)
    sf = forward_transform(fm, gm)
    mix_err = 0.0
    for p, q in ((4, 2), (2, 2), (3, 1.5), (np.inf, 2)):
        if np.isinf(p):
            ref = float(np.max(np.sqrt(np.sum(fm**2, axis=2) * gm.spacing[2])))
        else:
            ref = mixed_norm_oracle(fm, gm, p, q)
        mix_err = max(mix_err, abs(mixed_norm(sf, p, q) - ref) / ref)
    from ansflow.dyadic import decomposition_for
    from ansflow.spectral import leray_project

    g16 = Grid.cube(16)
    dec = decomposition_for(g16)
    uu = gen_random_bandlimited(seed + 1, g16, h_bands=(0, 2), v_bands=(-1, 2))
    aa = gen_random_bandlimited(seed + 2, g16, h_bands=(0, 2), v_bands=(-1, 2))
    T = 0.7
    tri_err = 0.0
    for j in dec.l_bands:
        num = trilinear_Fj(Trajectory.frozen(uu, T), Trajectory.frozen(aa, T), j, dec)
        ref = trilinear_oracle(uu, aa, j, T, dec)
        tri_err = max(tri_err, abs(num - ref) / max(ref, 1e-300))
    ok = dft_err <= 1e-12 and conv_err <= 1e-10 and mix_err <= 1e-12 and tri_err <= 1e-8
    return SuiteResult("oracles", ok, {}, {"fft_vs_dft": dft_err, "product_vs_convolution": conv_err,
                                          "mixed_norm_vs_loops": mix_err,
                                          "trilinear_vs_quadrature": tri_err})


# ------------------------------------------------------------------ scaling

def suite_scale_invariance(n: int = 32, p_values=(2.0, 4.0, 8.0), seed: int = 0) -> SuiteResult:
    """besov_static(a) vs besov_static(2 a(2 .)) realized on the half-size box."""
    g = Grid.cube(n)
    from ansflow.dyadic import decomposition_for

    dec = decomposition_for(g)
    kb = (dec.k_range[0] + 2, dec.k_range[1] - 1)
    lb = (dec.l_range[0] + 2, dec.l_range[1] - 1)
    a = gen_random_bandlimited(seed, g, h_bands=kb, v_bands=lb)
    g2 = Grid(n, n, n, g.L1 / 2, g.L2 / 2, g.L3 / 2)
    a2 = VectorField(g2, 2.0 * a.coeffs, True, True)
    changes = {}
    for p in p_values:
        b1, b2 = besov_static(a, p), besov_static(a2, p)
        changes[f"p={p:g}"] = abs(b2 - b1) / b1
    ok = max(changes.values()) <= 0.01
    return SuiteResult("scale_invariance", ok, {}, {"relative_change": changes,
                                                   "h_bands": kb, "v_bands": lb})


# ------------------------------------------------------------------ Bernstein

def _lp_h_l2_v_vec(comps: list, g: Grid, p: float) -> float:
    """L^p_h(L^2_v) of the pointwise Euclidean norm of several real arrays."""
    sq = sum(c**2 for c in comps)
    dx1, dx2, dx3 = g.spacing
    inner = np.sqrt(np.sum(sq, axis=2) * dx3)
    return float((np.sum(inner**p) * dx1 * dx2) ** (1 / p))


def bernstein_ranges(n: int) -> tuple:
    hi = int(math.floor(math.log2(n / 3))) - 2
    return (min(2, hi), hi)


def suite_bernstein(n: int = 32, corpus: int = 100, p: float = 4.0, seed: int = 0) -> SuiteResult:
    """||d_h a|| / (2^k ||a||) and ||d_3 a|| / (2^l ||a||) in L^p_h(L^2_v) on ring fields."""
    g = Grid.cube(n)
    from ansflow.dyadic import decomposition_for

    dec = decomposition_for(g)
    lo, hi = bernstein_ranges(n)
    rng = np.random.default_rng(seed)
    rh, rv = [], []
    for i in range(corpus):
        k = int(rng.integers(lo, hi + 1))
        l = int(rng.integers(lo, hi + 1))
        f = forward_transform(rng.standard_normal(g.shape), g)
        a = f.with_coeffs(f.coeffs * dec.h_mask(k))
        ap = a.to_physical()
        d1 = partial_derivative(a, 1).to_physical()
        d2 = partial_derivative(a, 2).to_physical()
        rh.append(_lp_h_l2_v_vec([d1, d2], g, p) / (2.0**k * _lp_h_l2_v_vec([ap], g, p)))
        b = f.with_coeffs(f.coeffs * dec.v_mask(l))
        bp = b.to_physical()
        d3 = partial_derivative(b, 3).to_physical()
        rv.append(_lp_h_l2_v_vec([d3], g, p) / (2.0**l * _lp_h_l2_v_vec([bp], g, p)))
    sh, sv = spread(rh), spread(rv)
    ok = sh <= 10 and sv <= 10
    return SuiteResult("bernstein", ok,
                       {"C_h_median": float(np.median(rh)), "C_v_median": float(np.median(rv))},
                       {"spread_h": sh, "spread_v": sv, "bands": (lo, hi), "corpus": corpus})


# ------------------------------------------------------------------ embeddings

def embedding_corpus(n: int, size: int, seed: int) -> list:
    """Random fields over every resolvable band with a random spectral tilt.

    Each field gets its own seed, an RMS amplitude in [e^-2, e^2] and a
    spectral slope in [-1.5, 1.5].
    """
    g = Grid.cube(n)
    from ansflow.dyadic import decomposition_for

    dec = decomposition_for(g)
    rng = np.random.default_rng(seed)
    out = []
    for i in range(size):
        amp = float(np.exp(rng.uniform(-2, 2)))
        slope = float(rng.uniform(-1.5, 1.5))
        out.append(gen_random_bandlimited(int(rng.integers(2**31)), g, dec.k_range, dec.l_range,
                                          amp, slope))
    return out


def suite_embedding(n: int = 32, corpus: int = 100, p_values=(2.0, 4.0, 8.0),
                    seed: int = 0) -> SuiteResult:
    """B^{0,1/2} in B^{-1+2/p,1/2}_p in B^{-1}_{inf,2}: fitted constants over a corpus."""
    fields = embedding_corpus(n, corpus, seed)
    b012 = np.array([besov_b012(a) for a in fields])
    binf = np.array([b_neg1_inf_q(a, 2) for a in fields])
    constants, details = {}, {}
    ok = True
    prev = None
    for p in p_values:
        bp = np.array([besov_static(a, p) for a in fields])
        c1 = bp / b012
        c3 = binf / bp
        constants[f"C_b012_to_p{p:g}"] = float(np.median(c1))
        constants[f"C_p{p:g}_to_binf2"] = float(np.median(c3))
        details[f"max_over_median_b012_to_p{p:g}"] = max_over_median(c1)
        details[f"max_over_median_p{p:g}_to_binf2"] = max_over_median(c3)
        ok &= max_over_median(c1) <= 5 and max_over_median(c3) <= 5
        if prev is not None:
            c2 = np.array([besov_static(a, 2 * prev) for a in fields]) / prev_vals
            constants[f"C_p{prev:g}_to_p{2 * prev:g}"] = float(np.median(c2))
            details[f"max_over_median_p{prev:g}_to_p{2 * prev:g}"] = max_over_median(c2)
            ok &= max_over_median(c2) <= 5
        prev, prev_vals = p, bp
    return SuiteResult("embedding", bool(ok), constants, details)


# ------------------------------------------------------------------ heat flow

def hh_data(n: int, seed: int, nu_3_bands=None) -> VectorField:
    g = Grid.cube(n)
    from ansflow.dyadic import decomposition_for, split_hh_ll

    dec = decomposition_for(g)
    a = gen_random_bandlimited(seed, g, (dec.k_range[0] + 1, dec.k_range[1]),
                               (dec.l_range[0], dec.l_range[1] - 1))
    return split_hh_ll(a)[0]


def suite_heat_decay(n: int = 32, seed: int = 0, nu_h: float = 1.0, nu_3: float = 0.1,
                     p: float = 4.0) -> SuiteResult:
    u0 = hh_data(n, seed)
    constants, details = {}, {}
    ok = True
    for q in (1.0, 2.0):
        rep = verify_decay_lemma24(u0, HeatFlowParams(nu_h, nu_3), q, p)
        r = rep.ratios
        med = float(np.median(r))
        constants[f"median_ratio_q{q:g}"] = med
        details[f"spread_q{q:g}"] = rep.spread
        details[f"max_over_median_q{q:g}"] = float(r.max() / med)
        details[f"bands_q{q:g}"] = len(r)
        ok &= rep.spread <= 10 and r.max() / med <= 5
    return SuiteResult("heat_decay", bool(ok), constants, details)


def suite_linf_l2(n: int = 32, corpus: int = 10, seed: int = 0, nu_h: float = 1.0,
                  nu_3: float = 0.1) -> SuiteResult:
    rng = np.random.default_rng(seed)
    fitted, sums = [], []
    for i in range(corpus):
        rep = verify_linf_l2_lemma25(hh_data(n, int(rng.integers(2**31))),
                                     HeatFlowParams(nu_h, nu_3))
        fitted.append(rep.fitted_constant)
        sums.append(rep.sequence_sum / rep.besov_norm)
    ok = spread(fitted) <= 5 and spread(sums) <= 5
    return SuiteResult("linf_l2", ok, {"C_median": float(np.median(fitted)),
                                       "sum_over_besov_median": float(np.median(sums))},
                       {"spread_C": spread(fitted), "spread_sum": spread(sums)})


def suite_product_bound(n: int = 32, corpus: int = 10, seed: int = 0, nu_h: float = 1.0,
                        nu_3: float = 0.1, p: float = 4.0) -> SuiteResult:
    """forcing_part <= C nu_h^-1 besov_part^2 with a stable fitted C (p in [2, 4])."""
    rng = np.random.default_rng(seed)
    C = []
    for i in range(corpus):
        u0 = hh_data(n, int(rng.integers(2**31)))
        r = e_functional(u0, BesovParams(p, nu_h, nu_3))
        C.append(r.forcing_part * nu_h / r.besov_part**2)
    ok = max_over_median(C) <= 5
    return SuiteResult("product_bound", ok, {"C_median": float(np.median(C))},
                       {"max_over_median": max_over_median(C), "spread": spread(C)})


# ------------------------------------------------------------------ divergence

def suite_divergence(n: int = 32, seed: int = 0, steps: int = 20) -> SuiteResult:
    g = Grid.cube(n)
    u0 = gen_random_bandlimited(seed, g, amplitude=0.5)
    cfg = SolverConfig(g, 0.1, 0.01, 1e-2, steps * 1e-2)
    ru = solve_u(u0, cfg).record
    rw = solve_w(u0, cfg).record
    worst = max(ru.max_div_residual, rw.max_div_residual)
    ok = worst <= 1e-8 and not (ru.blew_up or rw.blew_up)
    return SuiteResult("divergence", ok, {}, {"max_residual_u": ru.max_div_residual,
                                              "max_residual_w": rw.max_div_residual})


SUITES = {
    "partition": lambda n, seed, phi: suite_partition(phi),
    "divergence": lambda n, seed, phi: suite_divergence(n, seed),
    "scale_invariance": lambda n, seed, phi: suite_scale_invariance(n, seed=seed),
    "bernstein": lambda n, seed, phi: suite_bernstein(n, seed=seed),
    "embedding": lambda n, seed, phi: suite_embedding(n, seed=seed),
    "oracles": lambda n, seed, phi: suite_oracles(seed),
    "heat_decay": lambda n, seed, phi: suite_heat_decay(n, seed),
    "linf_l2": lambda n, seed, phi: suite_linf_l2(n, seed=seed),
    "product_bound": lambda n, seed, phi: suite_product_bound(n, seed=seed),
}
