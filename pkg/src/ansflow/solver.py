"""Time integration of the anisotropic Navier-Stokes system.

Two solvers share one integrating-factor RK4 stepper on rfft-half arrays:

* ``solve_u`` evolves u directly, u_t = P(u x curl u) + viscous part;
* ``solve_w`` evolves the Friedrichs-truncated remainder w = u - u_F, where
  u_F is the free heat evolution of the hh part of the data, known in
  closed form at every stage time.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ansflow.accumulator import BandProbe, NormAccumulator
from ansflow.dyadic import split_hh_ll
from ansflow.io import format_float, write_ansf
from ansflow.kernels import FastIFRK4, FastRotational
from ansflow.fft import HAVE_FFTW
from ansflow.pseudo import HalfSpace, half_space
from ansflow.spectral import Grid, VectorField

BLOWUP_NORM = 1e12


class BlowUpError(RuntimeError):
    pass


def max_friedrichs_radius(grid: Grid) -> float:
    """Radius of the largest ball inside the 2/3-rule cube."""
    return float(min(2 * np.pi / L * c for L, c in zip(grid.lengths, grid.mode_cutoff)))


@dataclass
class SolverConfig:
    grid: Grid
    nu_h: float = 0.1
    nu_3: float = 0.0
    dt: float = 1e-3
    T: float = 1.0
    n_cutoff: float | None = None
    integrator: str = "IF-RK4"
    p: float = 2.0
    record_every: int = 0
    accumulate_every: int = 1
    track_besov: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.T < self.dt:
            raise ValueError("T must be at least dt")
        if not self.nu_h > 0 or self.nu_3 < 0:
            raise ValueError("need nu_h > 0 and nu_3 >= 0")
        if self.integrator.upper() != "IF-RK4":
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if self.p < 2:
            raise ValueError("p must be >= 2")
        if self.n_cutoff is not None:
            rmax = max_friedrichs_radius(self.grid)
            if not 0 < self.n_cutoff <= rmax + 1e-12:
                raise ValueError(f"n_cutoff must lie in (0, {rmax}] for this grid")
        if self.accumulate_every < 1:
            raise ValueError("accumulate_every must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))

    @property
    def cutoff(self) -> float:
        return self.n_cutoff if self.n_cutoff is not None else max_friedrichs_radius(self.grid)


def friedrichs_projectors(grid: Grid, n: float) -> tuple:
    """0/1 masks of P_n (|xi| <= n), P_1n (|xi| <= n, |xi3| >= 1/n), P_2n (|xi3| < 1/n)."""
    if not 0 < n <= max_friedrichs_radius(grid) + 1e-12:
        raise ValueError(f"cutoff {n} is not resolvable on {grid.shape}")
    ball = grid.xi_abs <= n
    low3 = np.broadcast_to(grid.xi_v < 1.0 / n, grid.shape)
    Pn = ball.astype(float)
    P1n = (ball & ~low3).astype(float)
    P2n = low3.astype(float)
    return Pn, P1n, P2n


# ---------------------------------------------------------------- kernels

class _UFCache:
    """Physical-space data of u_F at recent stage times."""

    def __init__(self, hs: HalfSpace, hh_half: np.ndarray, rate: np.ndarray, P2: np.ndarray):
        self.hs, self.hh, self.rate, self.P2 = hs, hh_half, rate, P2
        self._store: dict = {}

    def at(self, t: float) -> dict:
        hit = self._store.get(t)
        if hit is not None:
            return hit
        hs = self.hs
        uf = self.hh * np.exp(-self.rate * t)
        up = hs.phys(uf)
        gp = hs.phys(hs.gradient(uf).reshape((9,) + hs.shape)).reshape((3, 3) + hs.grid.shape)
        conv = hs.spec(np.einsum("jxyz,ijxyz->ixyz", up, gp)) * hs.dealias
        pairs = _pair_products(hs, up) * self.P2
        entry = {"u": uf, "up": up, "gp": gp, "conv": conv, "pairs2": pairs}
        if len(self._store) > 4:
            self._store.pop(next(iter(self._store)))
        self._store[t] = entry
        return entry


_PAIRS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))


def _pair_products(hs: HalfSpace, up: np.ndarray) -> np.ndarray:
    prods = np.stack([up[a] * up[b] for a, b in _PAIRS])
    return hs.spec(prods) * hs.dealias


def _pressure_gradient(hs: HalfSpace, Q: np.ndarray) -> np.ndarray:
    """-grad (-Delta)^{-1} d_j d_k Q_jk = i xi (xi_j xi_k Q_jk) / |xi|^2."""
    x = hs.xi
    s = 0
    for (a, b), q in zip(_PAIRS, Q):
        w = 1.0 if a == b else 2.0
        s = s + w * x[a] * x[b] * q
    s = s * hs.inv_xi_sq
    return np.stack([1j * xa * s for xa in x])


def _rhs_w_half(hs: HalfSpace, w: np.ndarray, ufd: dict, masks: tuple) -> np.ndarray:
    Pn, P1n, _ = masks
    wp = hs.phys(w)
    gw = hs.phys(hs.gradient(w).reshape((9,) + hs.shape)).reshape((3, 3) + hs.grid.shape)
    up, gu = ufd["up"], ufd["gp"]
    # w.grad w + w.grad u_F + u_F.grad w
    mixed = np.einsum("jxyz,ijxyz->ixyz", wp, gw + gu) + np.einsum("jxyz,ijxyz->ixyz", up, gw)
    A = hs.spec(mixed) * hs.dealias
    Q = _pair_products(hs, wp + up) - ufd["pairs2"]
    return -Pn * A - P1n * ufd["conv"] + Pn * _pressure_gradient(hs, Q)


def rhs_w(w: VectorField, uF: VectorField, masks: tuple, config: SolverConfig) -> VectorField:
    """Right-hand side of the Friedrichs system for w, viscous terms excluded."""
    g = w.grid
    hs = half_space(g)
    Pn = masks[0]
    outside = np.abs(w.coeffs * (1 - Pn))
    if outside.max(initial=0.0) > 1e-14 * max(1.0, np.abs(w.coeffs).max(initial=0.0)):
        raise ValueError("w is not supported in B(0, n)")
    hm = tuple(m[..., : hs.nh] for m in masks)
    ufh = hs.to_half(uF.coeffs)
    cache = _UFCache(hs, ufh, np.zeros(1), hm[2])
    out = _rhs_w_half(hs, hs.to_half(w.coeffs), cache.at(0.0), hm)
    return VectorField(g, hs.to_full(out), True, True)


def _rhs_u_half(hs: HalfSpace, u: np.ndarray) -> np.ndarray:
    """P(u x omega), dealiased: equals -P(u . grad u)."""
    ik = hs.ik
    om = np.stack([ik[1] * u[2] - ik[2] * u[1],
                   ik[2] * u[0] - ik[0] * u[2],
                   ik[0] * u[1] - ik[1] * u[0]])
    phys = hs.phys(np.concatenate([u, om]))
    up, op = phys[:3], phys[3:]
    cross = np.stack([up[1] * op[2] - up[2] * op[1],
                      up[2] * op[0] - up[0] * op[2],
                      up[0] * op[1] - up[1] * op[0]])
    return hs.leray(hs.spec(cross) * hs.dealias)


# ---------------------------------------------------------------- stepping

class IFRK4:
    """Integrating-factor RK4 for v' = -rate v + N(v, t)."""

    def __init__(self, rate: np.ndarray, dt: float, nonlinear):
        self.dt = dt
        self.E = np.exp(-rate * dt)
        self.Eh = np.exp(-rate * dt / 2)
        self.N = nonlinear

    def __call__(self, v: np.ndarray, t: float) -> np.ndarray:
        h, E, Eh, N = self.dt, self.E, self.Eh, self.N
        k1 = N(v, t)
        vh = Eh * v
        k2 = N(vh + 0.5 * h * Eh * k1, t + h / 2)
        k3 = N(vh + 0.5 * h * k2, t + h / 2)
        k4 = N(E * v + h * Eh * k3, t + h)
        return E * v + h / 6 * (E * k1 + 2 * Eh * (k2 + k3) + k4)


def step(state: np.ndarray, t: float, rhs, config: SolverConfig, rate: np.ndarray) -> np.ndarray:
    """One IF-RK4 step of size config.dt; raises BlowUpError on NaN/Inf or norm > 1e12."""
    new = IFRK4(rate, config.dt, rhs)(state, t)
    _check_finite(new)
    return new


def _check_finite(v: np.ndarray):
    n = float(np.sqrt(np.sum(np.abs(v) ** 2)))
    if not math.isfinite(n) or n > BLOWUP_NORM:
        raise BlowUpError(f"field norm {n:g} left the resolvable regime")


# ---------------------------------------------------------------- records

@dataclass
class RunRecord:
    times: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    diss_h: list = field(default_factory=list)
    diss_v: list = field(default_factory=list)
    div_residual: list = field(default_factory=list)
    b012_accum: list = field(default_factory=list)
    besov_T_accum: list = field(default_factory=list)
    blew_up: bool = False
    message: str = ""

    HEADER = ("t", "energy", "diss_h", "diss_v", "div_residual", "b012_accum", "besov_T_accum")

    @property
    def max_div_residual(self) -> float:
        return float(max(self.div_residual, default=0.0))

    def rows(self):
        return zip(self.times, self.energy, self.diss_h, self.diss_v, self.div_residual,
                   self.b012_accum, self.besov_T_accum)

    def to_csv(self, path, extra: dict | None = None) -> None:
        extra = extra or {}
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(list(self.HEADER) + list(extra))
            for row in self.rows():
                w.writerow([format_float(v) for v in row] + [extra[k] for k in extra])

    def energy_defect(self) -> float:
        """|E(T) + 2 int (diss_h + diss_v) dt - E(0)| / E(0), Simpson in time."""
        from scipy.integrate import simpson

        t = np.asarray(self.times)
        d = np.asarray(self.diss_h) + np.asarray(self.diss_v)
        e0 = self.energy[0]
        if e0 == 0:
            return 0.0
        return abs(self.energy[-1] + 2 * simpson(d, x=t) - e0) / e0


@dataclass
class RunResult:
    record: RunRecord
    accumulator: NormAccumulator
    snapshots: list  # (t, VectorField)
    final: VectorField


class _Recorder:
    def __init__(self, hs: HalfSpace, config: SolverConfig, track_besov: bool):
        self.hs, self.config = hs, config
        self.rec = RunRecord()
        self.acc = NormAccumulator(BandProbe(hs.grid, config.p if track_besov else 2.0),
                                   config.nu_h, config.nu_3, track_hh=track_besov)
        self.track_besov = track_besov
        self.snaps = []

    def __call__(self, i: int, t: float, v: np.ndarray, force_acc=False):
        hs, c = self.hs, self.config
        vol = hs.grid.volume
        r = self.rec
        r.times.append(t)
        r.energy.append(vol * hs.energy(v))
        r.diss_h.append(c.nu_h * vol * hs.energy(v, hs.xi_h_sq))
        r.diss_v.append(c.nu_3 * vol * hs.energy(v, hs.xi_v_sq))
        dot = np.abs(sum(x * comp for x, comp in zip(hs.xi, v)))
        amp = np.sqrt(np.sum(np.abs(v) ** 2, axis=0))
        r.div_residual.append(float(np.max(dot / np.maximum(1.0, amp))))
        if i % c.accumulate_every == 0 or force_acc:
            self.acc.update(t, v)
        r.b012_accum.append(self.acc.b012())
        r.besov_T_accum.append(self.acc.besov_T() if self.track_besov else float("nan"))
        if c.record_every and i % c.record_every == 0:
            self.snaps.append((t, VectorField(hs.grid, hs.to_full(v), True, True)))


def _stepper(rate: np.ndarray, dt: float, nonlinear):
    if HAVE_FFTW:
        return FastIFRK4(rate, dt, nonlinear)
    return IFRK4(rate, dt, nonlinear)


def _rotational(hs: HalfSpace):
    if HAVE_FFTW:
        return FastRotational(hs)
    return lambda v, t: _rhs_u_half(hs, v)


def _integrate(v0: np.ndarray, rate: np.ndarray, nonlinear, config: SolverConfig,
               recorder: _Recorder, post=None) -> tuple:
    stepper = _stepper(rate, config.dt, nonlinear)
    v, t = np.ascontiguousarray(v0, dtype=complex), 0.0
    n = config.n_steps
    recorder(0, 0.0, v)
    try:
        for i in range(1, n + 1):
            v = stepper(v, t)
            if post is not None:
                v = post(v)
            _check_finite(v)
            t = i * config.dt
            recorder(i, t, v, force_acc=(i == n))
    except BlowUpError as exc:
        recorder.rec.blew_up = True
        recorder.rec.message = str(exc)
    return v, t


def _rate(hs: HalfSpace, config: SolverConfig) -> np.ndarray:
    r = config.nu_h * hs.xi_h_sq + config.nu_3 * hs.xi_v_sq
    return np.ascontiguousarray(np.broadcast_to(r, hs.shape))


def _prepare_u0(u0: VectorField, hs: HalfSpace) -> np.ndarray:
    if not u0.real:
        raise ValueError("initial data must be real-valued")
    v = hs.to_half(u0.coeffs) * hs.dealias
    return np.ascontiguousarray(hs.leray(v))


def solve_u(u0: VectorField, config: SolverConfig) -> RunResult:
    """Direct pseudo-spectral solve of the anisotropic system from u0."""
    g = u0.grid
    if g != config.grid:
        raise ValueError("u0 grid differs from config grid")
    hs = half_space(g)
    rate = _rate(hs, config)
    rec = _Recorder(hs, config, config.track_besov)
    v, t = _integrate(_prepare_u0(u0, hs), rate, _rotational(hs), config, rec)
    final = VectorField(g, hs.to_full(v), True, True)
    return RunResult(rec.rec, rec.acc, rec.snaps, final)


def solve_w(u0: VectorField, config: SolverConfig) -> RunResult:
    """Friedrichs system for w with w(0) = P_n u_0ll and u_F from the hh part."""
    g = u0.grid
    if g != config.grid:
        raise ValueError("u0 grid differs from config grid")
    hs = half_space(g)
    masks = tuple(m[..., : hs.nh] for m in friedrichs_projectors(g, config.cutoff))
    hh, ll = split_hh_ll(u0)
    rate = _rate(hs, config)
    cache = _UFCache(hs, hs.to_half(hh.coeffs) * hs.dealias, rate, masks[2])
    w0 = hs.to_half(ll.coeffs) * masks[0]
    rec = _Recorder(hs, config, track_besov=False)
    Pn = masks[0]

    def support(v):
        if np.any(v * (1 - Pn)):
            raise AssertionError("w left the Friedrichs ball")
        return v

    v, t = _integrate(w0, rate, lambda v, t: _rhs_w_half(hs, v, cache.at(t), masks),
                      config, rec, post=support)
    final = VectorField(g, hs.to_full(v), True, True)
    return RunResult(rec.rec, rec.acc, rec.snaps, final)


# ---------------------------------------------------------------- stability

@dataclass
class ContinuousDependenceReport:
    times: np.ndarray
    ratio: np.ndarray
    sup_ratio: float
    delta0: float
    norms: tuple
    exponent_base: float
    fitted_C: float
    blew_up: bool


def continuous_dependence_run(u01: VectorField, u02: VectorField,
                              config: SolverConfig) -> ContinuousDependenceReport:
    """Evolve two data side by side and track ||u1 - u2||(t) / ||u1 - u2||(0).

    The fitted constant solves sup ratio = exp(C X) with
    X = nu_h^-1 (nu_h^{-(p+1)/(p-1)} + nu_3^{-(p+1)/(p-1)}) (sum_i ||u_i||)^{2p/(p-1)},
    the norms being the space-time Besov norms of the two solutions.
    """
    if config.nu_3 <= 0:
        raise ValueError("continuous dependence needs nu_3 > 0 (the L2 stability "
                         "estimate is only available with vertical viscosity)")
    g = config.grid
    hs = half_space(g)
    stepper = _stepper(_rate(hs, config), config.dt, _rotational(hs))
    v1, v2 = _prepare_u0(u01, hs), _prepare_u0(u02, hs)
    vol = g.volume
    d0 = math.sqrt(vol * hs.energy(v1 - v2))
    accs = [NormAccumulator(BandProbe(g, config.p), config.nu_h, config.nu_3)
            for _ in range(2)]
    times, ratio = [0.0], [1.0]
    for a, v in zip(accs, (v1, v2)):
        a.update(0.0, v)
    blew = False
    n = config.n_steps
    try:
        for i in range(1, n + 1):
            v1 = stepper(v1, (i - 1) * config.dt)
            v2 = stepper(v2, (i - 1) * config.dt)
            _check_finite(v1)
            _check_finite(v2)
            t = i * config.dt
            d = math.sqrt(vol * hs.energy(v1 - v2))
            times.append(t)
            ratio.append(d / d0 if d0 > 0 else (1.0 if d == 0 else math.inf))
            if i % config.accumulate_every == 0 or i == n:
                for a, v in zip(accs, (v1, v2)):
                    a.update(t, v)
    except BlowUpError:
        blew = True
    norms = tuple(a.besov_T() for a in accs)
    p = config.p
    e = (p + 1) / (p - 1)
    X = (config.nu_h**-e + config.nu_3**-e) / config.nu_h * sum(norms) ** (2 * p / (p - 1))
    sup = float(max(ratio))
    fitted = math.log(sup) / X if X > 0 and sup > 0 else 0.0
    return ContinuousDependenceReport(np.array(times), np.array(ratio), sup, d0, norms, X,
                                      fitted, blew)


def write_snapshots(result: RunResult, directory, stem: str = "snap") -> list:
    from pathlib import Path

    out = []
    for i, (t, f) in enumerate(result.snapshots):
        path = Path(directory) / f"{stem}_{i:05d}.ansf"
        write_ansf(path, f)
        out.append((t, path))
    return out
