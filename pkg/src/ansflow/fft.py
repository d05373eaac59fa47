"""Planned FFTs over all three axes.

FFTW plans (through pyFFTW) are built once per shape and reused; without
pyFFTW the functions fall back to ``scipy.fft``.  All transforms are
unnormalized in the forward direction and carry the 1/N factor in the
inverse direction, as in numpy.
"""
from __future__ import annotations

import numpy as np
import scipy.fft as _sfft

try:
    import pyfftw

    HAVE_FFTW = True
except ImportError:  # pragma: no cover - exercised only without pyFFTW
    pyfftw = None
    HAVE_FFTW = False

_plans: dict = {}
_PLANNER = ("FFTW_MEASURE",)


def _plan(kind: str, shape: tuple):
    key = (kind, shape)
    plan = _plans.get(key)
    if plan is not None:
        return plan
    half = shape[:-1] + (shape[-1] // 2 + 1,)
    axes = tuple(range(len(shape)))
    if kind == "rfft":
        a = pyfftw.empty_aligned(shape, dtype="float64")
        b = pyfftw.empty_aligned(half, dtype="complex128")
        plan = pyfftw.FFTW(a, b, axes=axes, flags=_PLANNER)
    elif kind == "irfft":
        a = pyfftw.empty_aligned(half, dtype="complex128")
        b = pyfftw.empty_aligned(shape, dtype="float64")
        plan = pyfftw.FFTW(a, b, axes=axes, direction="FFTW_BACKWARD", flags=_PLANNER)
    elif kind == "fft":
        a = pyfftw.empty_aligned(shape, dtype="complex128")
        b = pyfftw.empty_aligned(shape, dtype="complex128")
        plan = pyfftw.FFTW(a, b, axes=axes, flags=_PLANNER)
    else:
        a = pyfftw.empty_aligned(shape, dtype="complex128")
        b = pyfftw.empty_aligned(shape, dtype="complex128")
        plan = pyfftw.FFTW(a, b, axes=axes, direction="FFTW_BACKWARD", flags=_PLANNER)
    _plans[key] = plan
    return plan


def _run(kind, shape, x):
    plan = _plan(kind, shape)
    plan.input_array[...] = x
    # FFTW normalizes backward transforms by 1/N by default
    plan()
    return plan.output_array.copy()


def fftn(x: np.ndarray) -> np.ndarray:
    if not HAVE_FFTW:
        return _sfft.fftn(x)
    return _run("fft", x.shape, x)


def ifftn(x: np.ndarray) -> np.ndarray:
    if not HAVE_FFTW:
        return _sfft.ifftn(x)
    return _run("ifft", x.shape, x)


def rfftn(x: np.ndarray) -> np.ndarray:
    if not HAVE_FFTW:
        return _sfft.rfftn(x)
    return _run("rfft", x.shape, x)


def irfftn(x: np.ndarray, shape: tuple) -> np.ndarray:
    shape = tuple(shape)
    if not HAVE_FFTW:
        return _sfft.irfftn(x, s=shape)
    return _run("irfft", shape, x)


def batched(fn, x: np.ndarray, *args) -> np.ndarray:
    """Apply a 3-axis transform to every leading slice of ``x``."""
    lead = x.shape[:-3]
    if not lead:
        return fn(x, *args)
    flat = x.reshape((-1,) + x.shape[-3:])
    out = [fn(s, *args) for s in flat]
    return np.stack(out).reshape(lead + out[0].shape)
