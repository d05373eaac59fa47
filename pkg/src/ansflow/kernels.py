"""Fused loops for the direct solver's hot path.

Each rhs evaluation of u_t = P(u x curl u) needs six inverse and three
forward real FFTs plus a handful of pointwise passes; the passes are fused
here with numba and the FFTs run as batched FFTW plans writing straight
into their own buffers.
"""
from __future__ import annotations

import numba
import numpy as np

from ansflow.pseudo import HalfSpace


@numba.njit(cache=True)
def _pack_u_curl(u, k1, k2, k3, scale, out):
    n1, n2, nh = u.shape[1], u.shape[2], u.shape[3]
    for i in range(n1):
        a = 1j * k1[i]
        for j in range(n2):
            b = 1j * k2[j]
            for l in range(nh):
                c = 1j * k3[l]
                u0 = u[0, i, j, l]
                u1 = u[1, i, j, l]
                u2 = u[2, i, j, l]
                out[0, i, j, l] = u0 * scale
                out[1, i, j, l] = u1 * scale
                out[2, i, j, l] = u2 * scale
                out[3, i, j, l] = (b * u2 - c * u1) * scale
                out[4, i, j, l] = (c * u0 - a * u2) * scale
                out[5, i, j, l] = (a * u1 - b * u0) * scale


@numba.njit(cache=True)
def _cross(p, out):
    n1, n2, n3 = p.shape[1], p.shape[2], p.shape[3]
    for i in range(n1):
        for j in range(n2):
            for l in range(n3):
                u0 = p[0, i, j, l]
                u1 = p[1, i, j, l]
                u2 = p[2, i, j, l]
                w0 = p[3, i, j, l]
                w1 = p[4, i, j, l]
                w2 = p[5, i, j, l]
                out[0, i, j, l] = u1 * w2 - u2 * w1
                out[1, i, j, l] = u2 * w0 - u0 * w2
                out[2, i, j, l] = u0 * w1 - u1 * w0


@numba.njit(cache=True)
def _leray_dealias(s, x1, x2, x3, d1, d2, d3, scale, out):
    n1, n2, nh = s.shape[1], s.shape[2], s.shape[3]
    for i in range(n1):
        for j in range(n2):
            for l in range(nh):
                if not (d1[i] and d2[j] and d3[l]):
                    out[0, i, j, l] = 0.0
                    out[1, i, j, l] = 0.0
                    out[2, i, j, l] = 0.0
                    continue
                a = s[0, i, j, l] * scale
                b = s[1, i, j, l] * scale
                c = s[2, i, j, l] * scale
                q = x1[i] * x1[i] + x2[j] * x2[j] + x3[l] * x3[l]
                if q > 0:
                    dot = (x1[i] * a + x2[j] * b + x3[l] * c) / q
                    a = a - x1[i] * dot
                    b = b - x2[j] * dot
                    c = c - x3[l] * dot
                out[0, i, j, l] = a
                out[1, i, j, l] = b
                out[2, i, j, l] = c


@numba.njit(cache=True)
def _stage(v, E, k, h, out):
    """out = E * (v + h k)."""
    n1, n2, nh = v.shape[1], v.shape[2], v.shape[3]
    for m in range(3):
        for i in range(n1):
            for j in range(n2):
                for l in range(nh):
                    out[m, i, j, l] = E[i, j, l] * (v[m, i, j, l] + h * k[m, i, j, l])


@numba.njit(cache=True)
def _axpy(x, k, h, out):
    """out = x + h k."""
    n1, n2, nh = x.shape[1], x.shape[2], x.shape[3]
    for m in range(3):
        for i in range(n1):
            for j in range(n2):
                for l in range(nh):
                    out[m, i, j, l] = x[m, i, j, l] + h * k[m, i, j, l]


@numba.njit(cache=True)
def _stage4(v, E, Eh, k, h, out):
    """out = E v + h Eh k."""
    n1, n2, nh = v.shape[1], v.shape[2], v.shape[3]
    for m in range(3):
        for i in range(n1):
            for j in range(n2):
                for l in range(nh):
                    out[m, i, j, l] = E[i, j, l] * v[m, i, j, l] + h * Eh[i, j, l] * k[m, i, j, l]


@numba.njit(cache=True)
def _final(v, E, Eh, k1, k2, k3, k4, h, out):
    n1, n2, nh = v.shape[1], v.shape[2], v.shape[3]
    c = h / 6.0
    for m in range(3):
        for i in range(n1):
            for j in range(n2):
                for l in range(nh):
                    e = E[i, j, l]
                    out[m, i, j, l] = e * v[m, i, j, l] + c * (
                        e * k1[m, i, j, l] + 2.0 * Eh[i, j, l] * (k2[m, i, j, l] + k3[m, i, j, l])
                        + k4[m, i, j, l])


class FastRotational:
    """rhs(u) = P dealias(u x curl u) on rfft halves with preplanned FFTW."""

    def __init__(self, hs: HalfSpace):
        import pyfftw

        g = hs.grid
        self.hs = hs
        self.shape = g.shape
        self.N = float(g.size)
        w1, w2, w3 = (np.ascontiguousarray(np.ravel(k)) for k in hs.ik)
        self.k = (w1.imag.copy(), w2.imag.copy(), w3.imag.copy())
        x1, x2, x3 = hs.xi
        self.x = tuple(np.ascontiguousarray(np.ravel(x)) for x in (x1, x2, x3))
        m1, m2, m3 = g.modes
        c1, c2, c3 = g.mode_cutoff
        self.d = (np.abs(m1) <= c1, np.abs(m2) <= c2, (np.abs(m3) <= c3)[: hs.nh])
        half6 = (6,) + hs.shape
        real6 = (6,) + g.shape
        self.a6 = pyfftw.empty_aligned(half6, dtype="complex128")
        self.p6 = pyfftw.empty_aligned(real6, dtype="float64")
        self.inv = pyfftw.FFTW(self.a6, self.p6, axes=(1, 2, 3), direction="FFTW_BACKWARD",
                               flags=("FFTW_MEASURE", "FFTW_DESTROY_INPUT"),
                               normalise_idft=False)
        self.r3 = pyfftw.empty_aligned((3,) + g.shape, dtype="float64")
        self.s3 = pyfftw.empty_aligned((3,) + hs.shape, dtype="complex128")
        self.fwd = pyfftw.FFTW(self.r3, self.s3, axes=(1, 2, 3), flags=("FFTW_MEASURE",))

    def __call__(self, u: np.ndarray, t: float = 0.0) -> np.ndarray:
        _pack_u_curl(u, *self.k, 1.0, self.a6)
        self.inv()
        _cross(self.p6, self.r3)
        self.fwd()
        out = np.empty((3,) + self.hs.shape, dtype=complex)
        _leray_dealias(self.s3, *self.x, *self.d, 1.0 / self.N, out)
        return out


class FastIFRK4:
    """Integrating-factor RK4 using the fused update loops."""

    def __init__(self, rate: np.ndarray, dt: float, nonlinear):
        self.dt = dt
        self.E = np.ascontiguousarray(np.broadcast_to(np.exp(-rate * dt), rate.shape))
        self.Eh = np.ascontiguousarray(np.broadcast_to(np.exp(-rate * dt / 2), rate.shape))
        self.N = nonlinear

    def __call__(self, v: np.ndarray, t: float) -> np.ndarray:
        h, N = self.dt, self.N
        tmp = np.empty_like(v)
        k1 = N(v, t)
        _stage(v, self.Eh, k1, 0.5 * h, tmp)
        k2 = N(tmp, t + h / 2)
        vh = np.empty_like(v)
        _stage(v, self.Eh, k1, 0.0, vh)
        _axpy(vh, k2, 0.5 * h, tmp)
        k3 = N(tmp, t + h / 2)
        _stage4(v, self.E, self.Eh, k3, h, tmp)
        k4 = N(tmp, t + h)
        out = np.empty_like(v)
        _final(v, self.E, self.Eh, k1, k2, k3, k4, h, out)
        return out
