import numpy as np
import pytest

from bayesbd.geometry import circle_boundary, ellipse_boundary, triangle_boundary
from bayesbd.kernel import BoundaryCoefficients
from bayesbd.metrics import all_errors, dsm_error, hausdorff_error, lebesgue_error

from oracles import raster_area_errors

c2, c3 = circle_boundary(0.2), circle_boundary(0.3)


def fourier_curve(seed, mu=0.3, scale=0.02, J=10):
    z = np.random.default_rng(seed).normal(0, scale, 2 * J + 1) / (1 + np.arange(2 * J + 1))
    return BoundaryCoefficients(mu, z, J)


def test_identical_curves():
    g = triangle_boundary(0.5)
    assert lebesgue_error(g, g) == 0.0
    assert dsm_error(g, g) == 0.0
    assert hausdorff_error(g, g) == 0.0


def test_concentric_circles():
    assert lebesgue_error(c2, c3) == pytest.approx(np.pi * 0.05, abs=1e-12)
    assert lebesgue_error(c2, c3) == pytest.approx(0.15708, abs=1e-4)
    assert dsm_error(c2, c3) == pytest.approx(1 - 8 / 13, abs=1e-12)
    assert hausdorff_error(c2, c3) == pytest.approx(0.1, abs=1e-12)


def test_ellipse_vs_circle_monte_carlo():
    e = ellipse_boundary(0.35, 0.25)
    rng = np.random.default_rng(0)
    n = 1_000_000
    p = rng.uniform(-0.4, 0.4, (n, 2))
    r = np.hypot(p[:, 0], p[:, 1])
    w = np.mod(np.arctan2(p[:, 1], p[:, 0]), 2 * np.pi)
    frac = np.mean((r < e(w)) ^ (r < 0.3))
    est, sd = 0.64 * frac, 0.64 * np.sqrt(frac * (1 - frac) / n)
    assert abs(lebesgue_error(e, c3) - est) < 3 * sd


@pytest.mark.parametrize("seed", range(3))
def test_raster_oracle_random_curves(seed):
    g1, g2 = fourier_curve(seed), fourier_curve(seed + 50)
    sym, dsm = raster_area_errors(g1, g2, n=2000)
    assert lebesgue_error(g1, g2) == pytest.approx(sym, abs=1e-3)
    assert dsm_error(g1, g2) == pytest.approx(dsm, abs=1e-3)


def test_hausdorff_shifted_circle():
    shifted = ellipse_boundary(0.3, 0.3, 0.0, (0.05, 0.0))
    assert hausdorff_error(c3, shifted) == pytest.approx(0.05, abs=1e-3)


@pytest.mark.parametrize("seed", range(3))
def test_symmetry(seed):
    g1, g2 = fourier_curve(seed), triangle_boundary(0.55)
    assert lebesgue_error(g1, g2) == pytest.approx(lebesgue_error(g2, g1), abs=1e-9)
    assert dsm_error(g1, g2) == pytest.approx(dsm_error(g2, g1), abs=1e-9)
    assert hausdorff_error(g1, g2) == hausdorff_error(g2, g1)


def test_nonnegative_and_indiscernible():
    g1 = fourier_curve(7)
    g2 = BoundaryCoefficients(g1.mu + 1e-3, g1.z, g1.J)
    for f in (lebesgue_error, dsm_error, hausdorff_error):
        assert f(g1, g2) > 1e-6
        assert f(g1, g1) < 1e-6


def test_lebesgue_monotone_in_gap():
    vals = [lebesgue_error(c2, circle_boundary(0.2 + d)) for d in np.linspace(0.0, 0.2, 21)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_all_errors_keys():
    assert set(all_errors(c2, c3)) == {"lebesgue", "dsm", "hausdorff"}
