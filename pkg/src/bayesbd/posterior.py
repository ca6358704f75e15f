"""Posterior mean boundary and uniform credible bands."""
from dataclasses import dataclass, field

import numpy as np

from .geometry import TWO_PI, sampled_curve

SD_FLOOR = 1e-8
EDGES = ("outer", "mean", "inner")


@dataclass(frozen=True)
class PosteriorSummary:
    theta: np.ndarray
    estimate: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    L0: float
    level: float
    sd: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def curve(self, edge="mean"):
        """Radial function through the chosen edge (periodic linear interpolation)."""
        values = {"outer": self.upper, "mean": self.estimate, "inner": self.lower}[edge]
        return sampled_curve(self.theta, values)


def unique_fraction(boundaries):
    """Fraction of kept sweeps whose boundary differs from the previous sweep."""
    b = np.asarray(boundaries)
    if b.shape[0] < 2:
        return 1.0
    changed = np.any(b[1:] != b[:-1], axis=1)
    return float((1 + np.count_nonzero(changed)) / b.shape[0])


def summarize(chain, level=0.95) -> PosteriorSummary:
    """Posterior mean and ``level`` uniform credible band from kept boundaries.

    ``chain`` is a :class:`~bayesbd.sampler.ChainOutput` or an ``(nrun, ngrid)``
    array of radii on an equally spaced angle grid.

    The band is ``mean +/- L0 * sd`` where ``L0`` is the ``level`` quantile
    (linear interpolation between order statistics) of the per-draw sup-norm
    deviations ``max |draw - mean| / sd``.
    """
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    boundaries = np.asarray(getattr(chain, "boundaries", chain), dtype=float)
    if boundaries.ndim != 2 or boundaries.shape[0] < 2:
        raise ValueError("at least two kept samples are needed for a credible band")
    theta = getattr(chain, "theta", None)
    if theta is None:
        theta = np.linspace(0.0, TWO_PI, boundaries.shape[1], endpoint=False)
    # shifted mean: exact when every draw is the same curve
    est = boundaries[0] + (boundaries - boundaries[0]).mean(axis=0)
    sd = boundaries.std(axis=0, ddof=1)
    u = np.max(np.abs(boundaries - est) / np.maximum(sd, SD_FLOOR), axis=1)
    L0 = float(np.quantile(u, level, method="linear"))
    diag = dict(getattr(chain, "diagnostics", None) or {})
    diag["unique_fraction"] = unique_fraction(boundaries)
    return PosteriorSummary(np.asarray(theta, dtype=float).copy(), est, est - L0 * sd,
                            est + L0 * sd, L0, float(level), sd, diag)


def membership_export(summary: PosteriorSummary, obs, edge="outer") -> np.ndarray:
    """Per-pixel membership ``r_i < band(theta_i)`` for every pixel of ``obs``.

    ``edge`` picks the outer band edge, the posterior mean, or the inner edge.
    Masked-out pixels are reported too (geometry only).
    """
    if edge not in EDGES:
        raise ValueError(f"edge must be one of {EDGES}")
    curve = summary.curve(edge)
    return np.asarray(obs.r) < curve(np.asarray(obs.theta))
