"""Periodic-box spectral fields.

Coefficients follow the convention

    coeff(m) = (1 / (n1 n2 n3)) * sum_x f(x) exp(-i xi_m . x),

stored in FFT order along every axis, so ``coeffs[i, j, k]`` is the mode
``(m1, m2, m3) = (fftfreq(n1)[i] * n1, ...)`` with physical wavevector
``xi = 2 pi m / L``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ansflow import fft

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on the box [0, L1) x [0, L2) x [0, L3).

    ``n3 == 1`` is accepted for purely horizontal (planar) fields.
    """

    n1: int
    n2: int
    n3: int
    L1: float = TWO_PI
    L2: float = TWO_PI
    L3: float = TWO_PI

    def __post_init__(self):
        for name in ("n1", "n2", "n3"):
            n = getattr(self, name)
            if name == "n3" and n == 1:
                continue
            if n < 8 or n % 2:
                raise ValueError(f"{name}={n}: points per axis must be even and >= 8")
        for name in ("L1", "L2", "L3"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def cube(cls, n: int, box_scale=1.0) -> "Grid":
        s = np.broadcast_to(np.asarray(box_scale, dtype=float), (3,))
        return cls(n, n, n, *(TWO_PI * s))

    @classmethod
    def planar(cls, n1: int, n2: int | None = None, box_scale=1.0) -> "Grid":
        s = np.broadcast_to(np.asarray(box_scale, dtype=float), (2,))
        return cls(n1, n1 if n2 is None else n2, 1, TWO_PI * s[0], TWO_PI * s[1])

    @property
    def shape(self) -> tuple:
        return (self.n1, self.n2, self.n3)

    @property
    def lengths(self) -> tuple:
        return (self.L1, self.L2, self.L3)

    @property
    def size(self) -> int:
        return self.n1 * self.n2 * self.n3

    @property
    def volume(self) -> float:
        if self.n3 == 1:
            return self.L1 * self.L2
        return self.L1 * self.L2 * self.L3

    @property
    def spacing(self) -> tuple:
        return tuple(L / n for L, n in zip(self.lengths, self.shape))

    @property
    def is_planar(self) -> bool:
        return self.n3 == 1

    @cached_property
    def modes(self) -> tuple:
        """Integer mode numbers per axis, FFT order."""
        return tuple(np.rint(np.fft.fftfreq(n) * n).astype(int) for n in self.shape)

    @cached_property
    def wavenumbers(self) -> tuple:
        """1-D physical wavenumbers per axis, FFT order."""
        return tuple(TWO_PI / L * m for L, m in zip(self.lengths, self.modes))

    @cached_property
    def xi(self) -> tuple:
        """Broadcastable wavevector components (xi1, xi2, xi3)."""
        k1, k2, k3 = self.wavenumbers
        return (k1[:, None, None], k2[None, :, None], k3[None, None, :])

    @cached_property
    def xi_h(self) -> np.ndarray:
        """|xi_h| with shape (n1, n2, 1)."""
        k1, k2, _ = self.xi
        return np.sqrt(k1**2 + k2**2)

    @cached_property
    def xi_v(self) -> np.ndarray:
        """|xi_3| with shape (1, 1, n3)."""
        return np.abs(self.xi[2])

    @cached_property
    def xi_abs(self) -> np.ndarray:
        return np.sqrt(self.xi_h**2 + self.xi_v**2)

    @cached_property
    def xi_sq(self) -> np.ndarray:
        return self.xi_h**2 + self.xi_v**2

    @property
    def mode_cutoff(self) -> tuple:
        """Largest |m_i| kept by the 2/3 rule: the largest integer below n_i / 3.

        Strictly below, so that two kept modes never alias onto a kept mode
        even when 3 divides n_i.
        """
        return tuple((n - 1) // 3 for n in self.shape)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: keep |m_i| < n_i / 3 on every axis."""
        m1, m2, m3 = self.modes
        keep = [np.abs(m) <= c for m, c in zip((m1, m2, m3), self.mode_cutoff)]
        return keep[0][:, None, None] & keep[1][None, :, None] & keep[2][None, None, :]

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """True on modes whose index equals -n/2 on some axis."""
        out = np.zeros(self.shape, dtype=bool)
        for ax, (m, n) in enumerate(zip(self.modes, self.shape)):
            if n == 1:
                continue
            sl = [slice(None)] * 3
            sl[ax] = np.flatnonzero(m == -n // 2)
            out[tuple(sl)] = True
        return out

    def max_dealiased(self, which: str = "h") -> float:
        """Largest |xi_h|, |xi_3| or |xi| kept by the 2/3 rule."""
        kmax = [2 * np.pi / L * c for L, c in zip(self.lengths, self.mode_cutoff)]
        if which == "h":
            return float(np.hypot(kmax[0], kmax[1]))
        if which == "v":
            return float(kmax[2])
        return float(np.sqrt(kmax[0] ** 2 + kmax[1] ** 2 + kmax[2] ** 2))

    def coordinates(self) -> tuple:
        """Broadcastable physical coordinates (x1, x2, x3)."""
        x = [np.arange(n) * L / n for n, L in zip(self.shape, self.lengths)]
        return (x[0][:, None, None], x[1][None, :, None], x[2][None, None, :])


def _same_grid(a: Grid, b: Grid):
    if a != b:
        raise ValueError(f"grid mismatch: {a} vs {b}")


def _to_physical(coeffs: np.ndarray, grid: Grid, real: bool) -> np.ndarray:
    scaled = coeffs * grid.size
    if real:
        half = scaled[..., : grid.n3 // 2 + 1]
        return fft.batched(fft.irfftn, np.ascontiguousarray(half), grid.shape)
    return fft.batched(fft.ifftn, scaled)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """One scalar field as Fourier amplitudes on a periodic grid.

    ``real`` records that the field represents real physical data, i.e.
    the coefficients are conjugate-symmetric.
    """

    grid: Grid
    coeffs: np.ndarray
    real: bool = True

    def __post_init__(self):
        if self.coeffs.shape != self.grid.shape:
            raise ValueError(f"coefficient shape {self.coeffs.shape} != grid {self.grid.shape}")

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls(grid, np.zeros(grid.shape, dtype=complex))

    def with_coeffs(self, coeffs, real=None) -> "SpectralField":
        return SpectralField(self.grid, coeffs, self.real if real is None else real)

    def to_physical(self) -> np.ndarray:
        return _to_physical(self.coeffs, self.grid, self.real)

    def l2_norm(self) -> float:
        """L2 norm over the box, via Parseval."""
        return float(np.sqrt(self.grid.volume * np.sum(np.abs(self.coeffs) ** 2)))

    def inner(self, other: "SpectralField") -> complex:
        """L2 inner product <self, other> = int self * conj(other) dx."""
        _same_grid(self.grid, other.grid)
        return complex(self.grid.volume * np.vdot(other.coeffs, self.coeffs))

    def __add__(self, other):
        _same_grid(self.grid, other.grid)
        return SpectralField(self.grid, self.coeffs + other.coeffs, self.real and other.real)

    def __sub__(self, other):
        _same_grid(self.grid, other.grid)
        return SpectralField(self.grid, self.coeffs - other.coeffs, self.real and other.real)

    def __mul__(self, c):
        real = self.real and np.isreal(c)
        return SpectralField(self.grid, self.coeffs * c, bool(real))

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField(self.grid, -self.coeffs, self.real)


@dataclass(frozen=True, eq=False)
class VectorField:
    """Three spectral components on a shared grid, stacked as (3, n1, n2, n3)."""

    grid: Grid
    coeffs: np.ndarray
    divergence_free: bool = False
    real: bool = True

    def __post_init__(self):
        if self.coeffs.shape != (3,) + self.grid.shape:
            raise ValueError(f"vector coefficient shape {self.coeffs.shape} invalid for {self.grid}")

    @classmethod
    def from_components(cls, u1, u2, u3, divergence_free=False) -> "VectorField":
        _same_grid(u1.grid, u2.grid)
        _same_grid(u1.grid, u3.grid)
        return cls(u1.grid, np.stack([u1.coeffs, u2.coeffs, u3.coeffs]),
                   divergence_free, u1.real and u2.real and u3.real)

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(grid, np.zeros((3,) + grid.shape, dtype=complex), True)

    @property
    def components(self) -> tuple:
        return tuple(SpectralField(self.grid, c, self.real) for c in self.coeffs)

    @property
    def u1(self) -> SpectralField:
        return self.components[0]

    @property
    def u2(self) -> SpectralField:
        return self.components[1]

    @property
    def u3(self) -> SpectralField:
        return self.components[2]

    def with_coeffs(self, coeffs, divergence_free=None) -> "VectorField":
        df = self.divergence_free if divergence_free is None else divergence_free
        return VectorField(self.grid, coeffs, df, self.real)

    def to_physical(self) -> np.ndarray:
        return _to_physical(self.coeffs, self.grid, self.real)

    def l2_norm(self) -> float:
        return float(np.sqrt(self.grid.volume * np.sum(np.abs(self.coeffs) ** 2)))

    def inner(self, other: "VectorField") -> complex:
        _same_grid(self.grid, other.grid)
        return complex(self.grid.volume * np.vdot(other.coeffs, self.coeffs))

    def divergence(self) -> SpectralField:
        xi = self.grid.xi
        div = 1j * sum(x * c for x, c in zip(xi, self.coeffs))
        return SpectralField(self.grid, div, self.real)

    def divergence_residual(self) -> float:
        """max over modes of |xi . u(xi)| / max(1, |u(xi)|)."""
        xi = self.grid.xi
        dot = np.abs(sum(x * c for x, c in zip(xi, self.coeffs)))
        amp = np.sqrt(np.sum(np.abs(self.coeffs) ** 2, axis=0))
        return float(np.max(dot / np.maximum(1.0, amp)))

    def __add__(self, other):
        _same_grid(self.grid, other.grid)
        return VectorField(self.grid, self.coeffs + other.coeffs,
                           self.divergence_free and other.divergence_free,
                           self.real and other.real)

    def __sub__(self, other):
        _same_grid(self.grid, other.grid)
        return VectorField(self.grid, self.coeffs - other.coeffs,
                           self.divergence_free and other.divergence_free,
                           self.real and other.real)

    def __mul__(self, c):
        return VectorField(self.grid, self.coeffs * c, self.divergence_free,
                           bool(self.real and np.isreal(c)))

    __rmul__ = __mul__

    def __neg__(self):
        return VectorField(self.grid, -self.coeffs, self.divergence_free, self.real)


def forward_transform(samples: np.ndarray, grid: Grid) -> SpectralField:
    """Physical samples on ``grid`` to Fourier coefficients."""
    samples = np.asarray(samples)
    if samples.shape != grid.shape:
        raise ValueError(f"samples shape {samples.shape} does not match grid {grid.shape}")
    if np.iscomplexobj(samples):
        return SpectralField(grid, fft.fftn(samples.astype(complex)) / grid.size, real=False)
    half = fft.rfftn(samples.astype(float)) / grid.size
    return SpectralField(grid, _expand_half(half, grid), real=True)


def forward_vector(samples: np.ndarray, grid: Grid, divergence_free=False) -> VectorField:
    comps = [forward_transform(s, grid) for s in samples]
    return VectorField.from_components(*comps, divergence_free=divergence_free)


def _expand_half(half: np.ndarray, grid: Grid) -> np.ndarray:
    """Rebuild the full spectrum of a real field from its rfft half."""
    n1, n2, n3 = grid.shape
    nh = n3 // 2 + 1
    full = np.empty(half.shape[:-1] + (n3,), dtype=complex)
    full[..., :nh] = half
    if n3 > 1:
        # coeff(-m) = conj(coeff(m)) for the missing m3 < 0 half
        idx1 = (-np.arange(n1)) % n1
        idx2 = (-np.arange(n2)) % n2
        mirror = np.conj(half[..., idx1[:, None], idx2[None, :], :])
        m3_missing = np.arange(nh, n3)
        full[..., m3_missing] = mirror[..., (n3 - m3_missing)]
    return full


def partial_derivative(f: SpectralField, axis: int) -> SpectralField:
    """Spectral derivative along axis 1, 2 or 3 (multiplier i xi_axis).

    The unpaired Nyquist wavenumber is treated as zero so that derivatives of
    real fields stay real.
    """
    if axis not in (1, 2, 3):
        raise ValueError("axis must be 1, 2 or 3")
    k = _derivative_wavenumber(f.grid, axis)
    return f.with_coeffs(1j * k * f.coeffs)


def _derivative_wavenumber(grid: Grid, axis: int) -> np.ndarray:
    k = grid.wavenumbers[axis - 1].copy()
    n = grid.shape[axis - 1]
    if n > 1:
        k[grid.modes[axis - 1] == -n // 2] = 0.0
    shape = [1, 1, 1]
    shape[axis - 1] = n
    return k.reshape(shape)


def _lp(values: np.ndarray, p: float, axis, weight: float) -> np.ndarray:
    if np.isinf(p):
        return np.max(values, axis=axis)
    return (np.sum(values**p, axis=axis) * weight) ** (1.0 / p)


def mixed_norm(f: SpectralField, p_h: float = 2, q_v: float = 2) -> float:
    """Anisotropic norm ||f||_{L^p_h(L^q_v)}: L^q in x3 first, then L^p in x_h."""
    if p_h < 1 or q_v < 1:
        raise ValueError("exponents must be >= 1")
    g = f.grid
    vals = np.abs(f.to_physical())
    dx1, dx2, dx3 = g.spacing
    if g.is_planar:
        inner = vals[..., 0]
    else:
        inner = _lp(vals, q_v, -1, dx3)
    return float(_lp(inner, p_h, (-2, -1), dx1 * dx2))


def lp_h_l2_v(coeffs: np.ndarray, grid: Grid, p: float) -> float:
    """||f||_{L^p_h(L^2_v)} straight from coefficients.

    The vertical L2 norm is taken by Parseval in x3, so only the m3 planes
    carrying energy are transformed (horizontally).  Agrees with
    ``mixed_norm(f, p, 2)``.
    """
    dx1, dx2, _ = grid.spacing
    if grid.is_planar:
        planes = coeffs
    else:
        live = np.flatnonzero(np.any(coeffs != 0, axis=(0, 1)))
        if live.size == 0:
            return 0.0
        planes = coeffs[:, :, live]
    n12 = grid.n1 * grid.n2
    fh = np.fft.ifft2(planes, axes=(0, 1)) * n12
    if grid.is_planar:
        inner = np.abs(fh[..., 0])
    else:
        inner = np.sqrt(grid.L3 * np.sum(np.abs(fh) ** 2, axis=-1))
    return float(_lp(inner, p, (0, 1), dx1 * dx2))


def leray_project(v: VectorField) -> VectorField:
    """Project onto divergence-free fields: u - xi (xi . u) / |xi|^2.

    The xi = 0 mode passes through unchanged.
    """
    g = v.grid
    xi = g.xi
    xi_sq = g.xi_sq
    inv = np.divide(1.0, xi_sq, out=np.zeros_like(xi_sq), where=xi_sq > 0)
    dot = sum(x * c for x, c in zip(xi, v.coeffs)) * inv
    out = np.stack([c - x * dot for x, c in zip(xi, v.coeffs)])
    return VectorField(g, out, True, v.real)


def dealias(f):
    """Zero every mode with |m_i| >= n_i / 3 on some axis (2/3 rule)."""
    return f.with_coeffs(f.coeffs * f.grid.dealias_mask)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Snapshots of a field at increasing times."""

    times: np.ndarray
    fields: tuple

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if len(t) != len(self.fields):
            raise ValueError("times and fields differ in length")
        if len(t) > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "fields", tuple(self.fields))

    @classmethod
    def frozen(cls, field, T: float, n: int = 2) -> "Trajectory":
        """A time-independent field sampled on [0, T]."""
        times = np.linspace(0.0, T, n)
        return cls(times, (field,) * n)

    def __len__(self):
        return len(self.fields)

    def __iter__(self):
        return iter(zip(self.times, self.fields))

    def __getitem__(self, i):
        return self.fields[i]

    @property
    def grid(self) -> Grid:
        return self.fields[0].grid
