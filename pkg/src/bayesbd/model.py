"""Observations, region sufficient statistics and the conditional log-densities of z."""
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import xlogy

from .geometry import TWO_PI, as_reference, rect_to_polar_arrays
from ._numeric import quad_form
from .kernel import BoundaryCoefficients, EigenSpectrum, basis

N_GRID = 200
ANGLE_GRID = np.linspace(0.0, TWO_PI, N_GRID, endpoint=False)
ANGLE_GRID.setflags(write=False)

BINARY = "binary"
GAUSSIAN = "gaussian"
FAMILIES = (BINARY, GAUSSIAN)


@dataclass(frozen=True)
class PolarObservation:
    """Pixel intensities with polar coordinates about a reference point.

    ``x`` and ``y`` are the rectangular locations when known; they allow the
    observation to be re-centered.  ``mask`` marks pixels to include.
    """

    intensity: np.ndarray
    theta: np.ndarray
    r: np.ndarray
    center: tuple
    mask: np.ndarray = None
    x: np.ndarray = None
    y: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)
        set_("intensity", np.asarray(self.intensity, dtype=float))
        set_("theta", np.asarray(self.theta, dtype=float))
        set_("r", np.asarray(self.r, dtype=float))
        set_("center", as_reference(self.center).as_tuple())
        n = self.intensity.size
        if n < 1:
            raise ValueError("observation must contain at least one pixel")
        if self.theta.shape != (n,) or self.r.shape != (n,):
            raise ValueError("intensity, theta and r must have the same length")
        if self.mask is not None:
            mask = np.asarray(self.mask, dtype=bool)
            if mask.shape != (n,):
                raise ValueError("mask length does not match the number of pixels")
            if not mask.any():
                raise ValueError("mask excludes every pixel")
            set_("mask", mask)
        for k in ("x", "y"):
            v = getattr(self, k)
            if v is not None:
                v = np.asarray(v, dtype=float)
                if v.shape != (n,):
                    raise ValueError(f"{k} length does not match the number of pixels")
                set_(k, v)

    @property
    def n(self):
        return self.intensity.size

    def active(self):
        """Boolean selector of included pixels."""
        return np.ones(self.n, dtype=bool) if self.mask is None else self.mask

    def subset(self):
        """``(intensity, theta, r)`` restricted to included pixels."""
        if self.mask is None:
            return self.intensity, self.theta, self.r
        m = self.mask
        return self.intensity[m], self.theta[m], self.r[m]

    def with_mask(self, mask):
        return replace(self, mask=None if mask is None else np.asarray(mask, dtype=bool))

    def recenter(self, center):
        if self.x is None or self.y is None:
            raise ValueError("observation has no rectangular coordinates to re-center")
        r, theta = rect_to_polar_arrays(self.x, self.y, center)
        return replace(self, r=r, theta=theta, center=as_reference(center).as_tuple())


def observation_from_xy(x, y, intensity, center, mask=None, meta=None):
    r, theta = rect_to_polar_arrays(x, y, center)
    return PolarObservation(intensity, theta, r, center, mask=mask, x=x, y=y,
                            meta=dict(meta or {}))


def check_binary(intensity):
    y = np.asarray(intensity)
    bad = np.flatnonzero((y != 0) & (y != 1))
    if bad.size:
        i = int(bad[0])
        raise ValueError(f"non-binary intensity {float(y[i])!r} at pixel {i}")


@dataclass(frozen=True)
class BinaryStats:
    n1: int
    N1: int
    n2: int
    N2: int


@dataclass(frozen=True)
class GaussianStats:
    n1: int
    sum1: float
    sumsq1: float
    n2: int
    sum2: float
    sumsq2: float


def _inside_mask(obs, c):
    _, theta, r = obs.subset()
    return r < c(theta)


def partition_stats_binary(obs: PolarObservation, c: BoundaryCoefficients) -> BinaryStats:
    y, _, _ = obs.subset()
    check_binary(y)
    ins = _inside_mask(obs, c)
    n1 = int(np.count_nonzero(ins))
    N1 = int(np.count_nonzero(y[ins]))
    N = int(np.count_nonzero(y))
    return BinaryStats(n1, N1, y.size - n1, N - N1)


def partition_stats_gaussian(obs: PolarObservation, c: BoundaryCoefficients) -> GaussianStats:
    y, _, _ = obs.subset()
    ins = _inside_mask(obs, c)
    y1, y2 = y[ins], y[~ins]
    return GaussianStats(int(y1.size), float(y1.sum()), float((y1 * y1).sum()),
                         int(y2.size), float(y2.sum()), float((y2 * y2).sum()))


_GRID_BASIS = {}


def grid_basis(J):
    if J not in _GRID_BASIS:
        b = basis(ANGLE_GRID / TWO_PI, J)
        b.setflags(write=False)
        _GRID_BASIS[J] = b
    return _GRID_BASIS[J]


def valid_boundary(c: BoundaryCoefficients) -> bool:
    """True when the radius is positive on the 200-angle check grid."""
    return bool(np.all(c.mu + grid_basis(c.J) @ c.z > 0.0))


def prior_quadratic(z, spectrum: EigenSpectrum):
    """``z' Sigma_a^{-1} z`` for the diagonal prior covariance."""
    z = np.ascontiguousarray(z, dtype=float)
    return float(quad_form(z, np.ascontiguousarray(spectrum.v)))


def _coef(z, spectrum):
    if isinstance(z, BoundaryCoefficients):
        return z
    raise TypeError("z must be BoundaryCoefficients (the mean radius is needed for validity)")


def log_cond_z_binary(stats: BinaryStats, pi1, pi2, z, spectrum: EigenSpectrum, tau) -> float:
    """Log conditional posterior of the coefficients for binary images, up to a constant.

    ``-inf`` if the boundary is nonpositive somewhere on the check grid.
    """
    c = _coef(z, spectrum)
    if not valid_boundary(c):
        return -np.inf
    lik = (stats.N1 * np.log(pi1 * (1.0 - pi2) / (pi2 * (1.0 - pi1)))
           + stats.n1 * np.log((1.0 - pi1) / (1.0 - pi2)))
    return float(lik - 0.5 * tau * prior_quadratic(c.z, spectrum))


def _region_ss(n, s, ss, mu):
    return ss - 2.0 * mu * s + n * mu * mu


def log_cond_z_gaussian(stats: GaussianStats, mu1, sigma1, mu2, sigma2, z,
                        spectrum: EigenSpectrum, tau) -> float:
    """Gaussian-image analogue of :func:`log_cond_z_binary`."""
    c = _coef(z, spectrum)
    if not valid_boundary(c):
        return -np.inf
    ss1 = _region_ss(stats.n1, stats.sum1, stats.sumsq1, mu1)
    ss2 = _region_ss(stats.n2, stats.sum2, stats.sumsq2, mu2)
    lik = (-stats.n1 * (np.log(sigma1) - np.log(sigma2))
           - ss1 / (2.0 * sigma1 * sigma1) - ss2 / (2.0 * sigma2 * sigma2))
    return float(lik - 0.5 * tau * prior_quadratic(c.z, spectrum))


@dataclass(frozen=True)
class MLEInit:
    radius: float
    nuisance: tuple
    degenerate: bool = False


MLE_GRID_SIZE = 50


def _binary_profile(y, r, radii):
    y = y.astype(bool)
    order = np.argsort(r, kind="stable")
    rs, ys = r[order], y[order]
    cum = np.concatenate([[0], np.cumsum(ys)])
    n_tot, N_tot = rs.size, int(ys.sum())
    ll = np.empty(radii.size)
    est = []
    for i, rad in enumerate(radii):
        n1 = int(np.searchsorted(rs, rad, side="left"))  # strict r < rad
        N1 = int(cum[n1])
        n2, N2 = n_tot - n1, N_tot - N1
        ll[i] = (xlogy(N1, N1 / max(n1, 1)) + xlogy(n1 - N1, (n1 - N1) / max(n1, 1))
                 + xlogy(N2, N2 / max(n2, 1)) + xlogy(n2 - N2, (n2 - N2) / max(n2, 1)))
        p_all = N_tot / n_tot
        est.append((N1 / n1 if n1 else p_all, N2 / n2 if n2 else p_all))
    return ll, est


def _gaussian_profile(y, r, radii):
    floor = 1e-6 * max(float(np.std(y)), 1e-12)
    ll = np.empty(radii.size)
    est = []
    for i, rad in enumerate(radii):
        ins = r < rad
        parts = []
        total = 0.0
        for sel in (ins, ~ins):
            yy = y[sel]
            if yy.size:
                m, s = float(yy.mean()), max(float(yy.std()), floor)
                total -= yy.size * np.log(s)
            else:
                m, s = float(y.mean()), max(float(y.std()), floor)
            parts.append((m, s))
        ll[i] = total
        est.append((parts[0][0], parts[0][1], parts[1][0], parts[1][1]))
    return ll, est


def mle_init(obs: PolarObservation, family: str) -> MLEInit:
    """Initial radius and nuisance values by profile likelihood over 50 circles.

    Candidate radii are equally spaced on ``[0.05, 0.95 * max r]``.  A constant
    image cannot inform the radius; the mid-grid radius is then returned with
    ``degenerate=True``.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    y, _, r = obs.subset()
    upper = 0.95 * float(r.max())
    radii = np.linspace(0.05, max(upper, 0.05 + 1e-6), MLE_GRID_SIZE)
    if family == BINARY:
        check_binary(y)
        ll, est = _binary_profile(y, r, radii)
    else:
        ll, est = _gaussian_profile(y, r, radii)
    if np.all(y == y[0]):
        warnings.warn("constant image: initial radius is not identifiable", RuntimeWarning)
        i = MLE_GRID_SIZE // 2
        return MLEInit(float(radii[i]), tuple(est[i]), True)
    i = int(np.argmax(ll))
    return MLEInit(float(radii[i]), tuple(float(v) for v in est[i]), False)
