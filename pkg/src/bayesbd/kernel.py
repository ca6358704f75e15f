r"""Squared-exponential periodic kernel on the circle and its Fourier expansion.

The kernel

.. math::
    G_a(t_1, t_2) = \exp\{-4a^2 \sin^2(\pi t_1 - \pi t_2)\}

has eigenfunctions given by the orthonormal Fourier basis on [0, 1] and
eigenvalues :math:`e^{-2a^2} I_j(2a^2)`, each non-constant order appearing
twice (cosine and sine).  Only the exponentially scaled Bessel values are
ever formed, so large ``a`` does not overflow.
"""
import math
from dataclasses import dataclass

import numba
import numpy as np

from .geometry import TWO_PI, RadialBoundary

SQRT2 = math.sqrt(2.0)

_SERIES_CUTOFF = 1.0
_RESCALE = 1e200


@numba.njit(cache=True)
def _scaled_bessel_series(nmax, x):
    out = np.zeros(nmax + 1)
    h = 0.5 * x
    h2 = h * h
    lead = math.exp(-x)
    for k in range(nmax + 1):
        term = lead
        total = 0.0
        for m in range(60):
            total += term
            term *= h2 / ((m + 1) * (m + 1 + k))
            if term < 1e-18 * total:
                break
        out[k] = total
        lead *= h / (k + 1)
    return out


@numba.njit(cache=True)
def _scaled_bessel_miller(nmax, x):
    # backward recurrence I_{k-1} = (2k/x) I_k + I_{k+1} from an arbitrary
    # start, normalized with e^{-x} (I_0 + 2 sum_k I_k) = 1
    start = nmax + 20 + int(12.0 * math.sqrt(x))
    out = np.empty(nmax + 1)
    inv = 2.0 / x
    i_next = 0.0
    i_cur = 1e-30
    tail = 0.0
    k = start
    while k > 0:
        i_prev = (k * inv) * i_cur + i_next
        tail += i_cur
        i_next = i_cur
        i_cur = i_prev
        k -= 1
        if k <= nmax:
            out[k] = i_cur
        if i_cur > _RESCALE:
            i_cur /= _RESCALE
            i_next /= _RESCALE
            tail /= _RESCALE
            for q in range(k, nmax + 1):
                out[q] /= _RESCALE
    norm = out[0] + 2.0 * tail
    for q in range(nmax + 1):
        out[q] /= norm
    return out


@numba.njit(cache=True)
def scaled_bessel_orders_unchecked(nmax, x):
    if x == 0.0:
        out = np.zeros(nmax + 1)
        out[0] = 1.0
        return out
    if x <= _SERIES_CUTOFF:
        return _scaled_bessel_series(nmax, x)
    return _scaled_bessel_miller(nmax, x)


def bessel_i_scaled_orders(nmax: int, x: float) -> np.ndarray:
    """``exp(-x) * I_k(x)`` for ``k = 0..nmax`` from a single recurrence pass."""
    if x < 0 or not math.isfinite(x):
        raise ValueError(f"bessel argument must be finite and nonnegative, got {x}")
    if nmax < 0:
        raise ValueError("order must be nonnegative")
    return scaled_bessel_orders_unchecked(int(nmax), float(x))


def bessel_i_scaled(order: int, x: float) -> float:
    """Exponentially scaled modified Bessel function of the first kind.

    Parameters
    ----------
    order : int
        Nonnegative integer order ``n``.
    x : float
        Nonnegative argument.

    Returns
    -------
    float
        ``exp(-x) * I_n(x)``.
    """
    if order < 0 or int(order) != order:
        raise ValueError("order must be a nonnegative integer")
    return float(bessel_i_scaled_orders(int(order), float(x))[int(order)])


@dataclass(frozen=True)
class EigenSpectrum:
    a: float
    J: int
    v: np.ndarray

    @property
    def L(self):
        return 2 * self.J + 1


def eigenvalues(a: float, J: int) -> EigenSpectrum:
    """Kernel eigenvalues ``v_1..v_{2J+1}`` at smoothness ``a``."""
    if not a > 0:
        raise ValueError(f"smoothness a must be positive, got {a}")
    if J < 1:
        raise ValueError("J must be a positive integer")
    s = bessel_i_scaled_orders(J, 2.0 * a * a)
    v = np.empty(2 * J + 1)
    v[0] = s[0]
    v[1::2] = s[1:]
    v[2::2] = s[1:]
    v.setflags(write=False)
    return EigenSpectrum(float(a), int(J), v)


def basis(t, J: int) -> np.ndarray:
    """Orthonormal Fourier basis on [0, 1].

    Returns an array of shape ``t.shape + (2J+1,)`` ordered
    ``1, sqrt2 cos(2 pi t), sqrt2 sin(2 pi t), sqrt2 cos(4 pi t), ...``.
    """
    t = np.mod(np.asarray(t, dtype=float), 1.0)
    j = np.arange(1, J + 1)
    arg = TWO_PI * t[..., None] * j
    out = np.empty(t.shape + (2 * J + 1,))
    out[..., 0] = 1.0
    out[..., 1::2] = SQRT2 * np.cos(arg)
    out[..., 2::2] = SQRT2 * np.sin(arg)
    return out


def kernel_value(a, t1, t2):
    s = np.sin(np.pi * (np.asarray(t1, dtype=float) - np.asarray(t2, dtype=float)))
    return np.exp(-4.0 * a * a * s * s)


def mercer_sum(spectrum: EigenSpectrum, t1, t2):
    """Truncated expansion ``sum_k v_k psi_k(t1) psi_k(t2)``."""
    return np.sum(spectrum.v * basis(t1, spectrum.J) * basis(t2, spectrum.J), axis=-1)


@dataclass(frozen=True)
class BoundaryCoefficients(RadialBoundary):
    """Constant mean radius plus Fourier coefficients; callable on angles."""

    mu: float
    z: np.ndarray
    J: int

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        if z.shape != (2 * self.J + 1,):
            raise ValueError(f"expected {2 * self.J + 1} coefficients, got {z.shape}")
        object.__setattr__(self, "z", z)

    def __call__(self, omega):
        return boundary_eval(self, omega)

    def describe(self):
        return {"kind": "fourier", "mu": float(self.mu), "J": self.J, "z": self.z.tolist()}


def boundary_eval(c: BoundaryCoefficients, omega):
    """``mu + sum_k z_k psi_k(omega / 2pi)``; may be nonpositive for extreme ``z``."""
    omega = np.asarray(omega, dtype=float)
    out = c.mu + basis(omega / TWO_PI, c.J) @ c.z
    return out if omega.ndim else float(out)
