"""Running per-band time statistics for the space-time Besov norms.

For every band a snapshot norm X(t) is reduced to sup_t X (the L^inf_T
piece) and int X^2 dt (the L^2_T piece, trapezoid between updates).  The
three families tracked per vector component are

* ``hh[k, l]``  = ||Delta^h_k Delta^v_l a||_{L^p_h(L^2_v)}
* ``ll0/llh/llv[j]`` = L2 norms of S^h_{j-1} Delta^v_j a, of its grad_h and of its d_3
* ``b0/bh/bv[j]``  = L2 norms of Delta^v_j a, grad_h Delta^v_j a and d_3 Delta^v_j a
"""
from __future__ import annotations

import math

import numpy as np
import scipy.fft as sfft

from ansflow.dyadic import DyadicDecomposition, decomposition_for
from ansflow.pseudo import HalfSpace, half_space
from ansflow.spectral import Trajectory, VectorField


class BandProbe:
    """Snapshot band norms of real vector fields stored as rfft halves."""

    def __init__(self, grid, p: float = 2.0, dec: DyadicDecomposition | None = None):
        self.grid = grid
        self.p = float(p)
        self.dec = dec or decomposition_for(grid)
        self.hs: HalfSpace = half_space(grid)
        d, hs = self.dec, self.hs
        nh, n12 = hs.nh, grid.n1 * grid.n2
        self.k_bands, self.l_bands = d.k_bands, d.l_bands
        xh2 = (grid.xi_h**2).reshape(n12)
        self.H = np.stack([np.broadcast_to(d.h_mask(k), (grid.n1, grid.n2, 1)).reshape(n12)
                           for k in self.k_bands])
        self.V = np.stack([d.v_mask(l).reshape(-1)[:nh] for l in self.l_bands])
        SH = np.stack([np.broadcast_to(d.sh_mask(j - 1), (grid.n1, grid.n2, 1)).reshape(n12)
                       for j in self.l_bands])
        self.H2 = self.H**2
        self.SH2 = SH**2
        self.SH2X = self.SH2 * xh2
        self.V2 = self.V**2
        self.V2X = self.V2 * hs.xi_v_sq.reshape(-1)
        self.XH2 = xh2
        kk = np.array(list(self.k_bands))[:, None]
        ll = np.array(list(self.l_bands))[None, :]
        self.hh_select = kk >= ll - 1

    def _energy(self, c: np.ndarray) -> np.ndarray:
        g = self.grid
        return (np.abs(c) ** 2).reshape(g.n1 * g.n2, self.hs.nh) * self.hs.weight3

    def snapshot(self, half: np.ndarray, want_hh: bool = True) -> dict:
        """Band norms of each component of a (3, n1, n2, nh) half array."""
        vol = self.grid.volume
        out = {name: [] for name in ("hh", "ll0", "llh", "llv", "b0", "bh", "bv")}
        for c in half:
            E = self._energy(c)
            SE = self.SH2 @ E
            SXE = self.SH2X @ E
            colsum = E.sum(axis=0)
            colx = self.XH2 @ E
            out["ll0"].append(np.sqrt(vol * np.sum(SE * self.V2, axis=1)))
            out["llh"].append(np.sqrt(vol * np.sum(SXE * self.V2, axis=1)))
            out["llv"].append(np.sqrt(vol * np.sum(SE * self.V2X, axis=1)))
            out["b0"].append(np.sqrt(vol * self.V2 @ colsum))
            out["bh"].append(np.sqrt(vol * self.V2 @ colx))
            out["bv"].append(np.sqrt(vol * self.V2X @ colsum))
            if want_hh:
                out["hh"].append(self._hh(c, E))
        return {k: np.array(v) for k, v in out.items() if v}

    def _hh(self, c: np.ndarray, E: np.ndarray) -> np.ndarray:
        if self.p == 2:
            return np.sqrt(self.grid.volume * np.maximum(self.H2 @ E @ self.V2.T, 0.0)) * self.hh_select
        g, hs = self.grid, self.hs
        vals = np.zeros((len(self.k_bands), len(self.l_bands)))
        dx1, dx2, _ = g.spacing
        for il, l in enumerate(self.l_bands):
            planes = np.flatnonzero(self.V[il] > 0)
            if planes.size == 0:
                continue
            block = c[:, :, planes] * self.V[il, planes]
            w = hs.weight3[planes]
            for ik, k in enumerate(self.k_bands):
                if not self.hh_select[ik, il]:
                    continue
                hk = self.H[ik].reshape(g.n1, g.n2, 1)
                fh = sfft.ifft2(block * hk, axes=(0, 1)) * (g.n1 * g.n2)
                inner = np.sqrt(g.L3 * np.sum(w * np.abs(fh) ** 2, axis=-1))
                if np.isinf(self.p):
                    vals[ik, il] = inner.max()
                else:
                    vals[ik, il] = (np.sum(inner**self.p) * dx1 * dx2) ** (1 / self.p)
        return vals


class NormAccumulator:
    """sup_t and int_0^t (.)^2 of every band statistic, updated in time order."""

    def __init__(self, probe: BandProbe, nu_h: float, nu_3: float, track_hh: bool = True):
        self.probe = probe
        self.nu_h, self.nu_3 = float(nu_h), float(nu_3)
        self.track_hh = track_hh
        self.sup: dict = {}
        self.int2: dict = {}
        self._last: dict | None = None
        self.t: float | None = None
        self.t0: float | None = None

    @property
    def elapsed(self) -> float:
        return 0.0 if self.t is None else self.t - self.t0

    def update(self, t: float, half: np.ndarray) -> None:
        snap = self.probe.snapshot(half, want_hh=self.track_hh)
        if self.t is None:
            self.t0 = self.t = float(t)
            self.sup = {k: v.copy() for k, v in snap.items()}
            self.int2 = {k: np.zeros_like(v) for k, v in snap.items()}
        else:
            dt = float(t) - self.t
            if dt <= 0:
                raise ValueError("accumulator updates must move forward in time")
            for k, v in snap.items():
                inc = 0.5 * dt * (self._last[k] ** 2 + v**2)
                assert np.all(inc >= 0)
                self.int2[k] += inc
                np.maximum(self.sup[k], v, out=self.sup[k])
            self.t = float(t)
        self._last = snap

    def update_field(self, t: float, field: VectorField) -> None:
        self.update(t, self.probe.hs.to_half(field.coeffs))

    @classmethod
    def from_trajectory(cls, traj: Trajectory, p: float, nu_h: float, nu_3: float,
                        track_hh: bool = True) -> "NormAccumulator":
        acc = cls(BandProbe(traj.grid, p), nu_h, nu_3, track_hh)
        for t, f in traj:
            acc.update_field(t, f)
        return acc

    def _l2t(self, key):
        return np.sqrt(self.int2[key])

    def b012_per_band(self) -> np.ndarray:
        """(components, j) values of the B^{0,1/2}(T) bracket before weighting."""
        if not self.sup:
            return np.zeros((3, 0))
        return (self.sup["b0"] + math.sqrt(self.nu_h) * self._l2t("bh")
                + math.sqrt(self.nu_3) * self._l2t("bv"))

    def b012(self) -> float:
        if not self.sup:
            return 0.0
        w = 2.0 ** (np.array(list(self.probe.l_bands)) / 2)
        per = self.b012_per_band() @ w
        return float(np.sqrt(np.sum(per**2)))

    def besov_T(self) -> float:
        """Space-time norm B^{-1+2/p,1/2}_p(T) from the tracked statistics."""
        if not self.sup:
            return 0.0
        if not self.track_hh:
            raise RuntimeError("hh statistics were not tracked")
        p = self.probe.p
        k = np.array(list(self.probe.k_bands), dtype=float)[:, None]
        l = np.array(list(self.probe.l_bands), dtype=float)[None, :]
        w_sup = 2.0 ** ((-2 + 4 / p) * k) * np.ones_like(l)
        w_l2 = self.nu_h * 2.0 ** (4 * k / p) + self.nu_3 * 2.0 ** ((-2 + 4 / p) * k + 2 * l)
        wl = 2.0 ** (l[0] / 2)
        vals = []
        for sup_c, int_c, ll0, llh, llv in zip(self.sup["hh"], self.int2["hh"], self.sup["ll0"],
                                               self._l2t("llh"), self._l2t("llv")):
            inner = np.sum((w_sup * sup_c**2 + w_l2 * int_c) * self.probe.hh_select, axis=0)
            first = float(np.sum(wl * np.sqrt(inner)))
            second = float(np.sum(wl * (ll0 + math.sqrt(self.nu_h) * llh
                                        + math.sqrt(self.nu_3) * llv)))
            vals.append(first + second)
        return float(np.sqrt(np.sum(np.square(vals))))
