"""Discrepancies between two star-shaped regions sharing a reference point.

For a region bounded by a radial function g, the area is ``(1/2) int g^2``,
so every area-based measure reduces to a one-dimensional periodic integral,
evaluated here with the trapezoid rule on an equally spaced angle grid
(spectrally accurate for periodic integrands).
"""
import numpy as np
from scipy.spatial.distance import directed_hausdorff

from .geometry import TWO_PI

AREA_POINTS = 10_000
HAUSDORFF_POINTS = 2000


def _grid(n):
    return np.linspace(0.0, TWO_PI, n, endpoint=False)


def _periodic_integral(values):
    return TWO_PI * float(np.mean(values))


def region_area(g):
    w = _grid(AREA_POINTS)
    return 0.5 * _periodic_integral(np.asarray(g(w)) ** 2)


def lebesgue_error(g1, g2) -> float:
    """Area of the symmetric difference of the two regions."""
    w = _grid(AREA_POINTS)
    r1, r2 = np.asarray(g1(w)), np.asarray(g2(w))
    return 0.5 * _periodic_integral(np.abs(r1 * r1 - r2 * r2))


def dsm_error(g1, g2) -> float:
    """One minus the Dice similarity coefficient of the two regions."""
    w = _grid(AREA_POINTS)
    r1, r2 = np.asarray(g1(w)), np.asarray(g2(w))
    both = np.minimum(r1, r2) ** 2
    denom = float(np.sum(r1 * r1) + np.sum(r2 * r2))
    if denom == 0.0:
        return 0.0
    return 1.0 - 2.0 * float(np.sum(both)) / denom


def boundary_points(g, n=HAUSDORFF_POINTS):
    w = _grid(n)
    r = np.asarray(g(w))
    return np.column_stack([r * np.cos(w), r * np.sin(w)])


def hausdorff_error(g1, g2) -> float:
    """Symmetric Hausdorff distance between the two boundary curves."""
    p, q = boundary_points(g1), boundary_points(g2)
    return float(max(directed_hausdorff(p, q)[0], directed_hausdorff(q, p)[0]))


def all_errors(g1, g2) -> dict:
    return {"lebesgue": lebesgue_error(g1, g2), "dsm": dsm_error(g1, g2),
            "hausdorff": hausdorff_error(g1, g2)}
