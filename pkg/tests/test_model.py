import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bayesbd.geometry import circle_boundary, wrap_angle
from bayesbd.kernel import BoundaryCoefficients, eigenvalues
from bayesbd.model import (PolarObservation, log_cond_z_binary, log_cond_z_gaussian, mle_init,
                           observation_from_xy, partition_stats_binary, partition_stats_gaussian,
                           prior_quadratic)
from bayesbd.simulate import gen_binary, gen_gaussian

J = 3


def coef(mu, z=None):
    return BoundaryCoefficients(mu, np.zeros(2 * J + 1) if z is None else np.asarray(z), J)


def obs(y, r, theta=None, mask=None):
    theta = np.zeros(len(r)) if theta is None else theta
    return PolarObservation(y, theta, r, (0.5, 0.5), mask=mask)


def random_obs(seed, n=20, binary=True):
    rng = np.random.default_rng(seed)
    r = rng.uniform(0, 0.6, n)
    th = rng.uniform(0, 2 * np.pi, n)
    y = rng.integers(0, 2, n).astype(float) if binary else rng.normal(0, 2, n)
    return obs(y, r, th)


def random_coef(seed):
    z = np.random.default_rng(seed + 1).normal(0, 0.03, 2 * J + 1)
    return coef(0.3, z)


def naive_binary(o, c):
    n1 = N1 = n2 = N2 = 0
    for yi, ri, ti in zip(o.intensity, o.r, o.theta):
        if ri < c(ti):
            n1 += 1
            N1 += int(yi)
        else:
            n2 += 1
            N2 += int(yi)
    return n1, N1, n2, N2


def test_binary_stats_example():
    o = obs([1, 0, 1], [0.1, 0.2, 0.9])
    s = partition_stats_binary(o, coef(0.5))
    assert (s.n1, s.N1, s.n2, s.N2) == (2, 1, 1, 1)


def test_binary_stats_all_outside():
    o = obs([1, 0, 1], [0.1, 0.2, 0.9])
    s = partition_stats_binary(o, coef(0.01))
    assert (s.n1, s.N1) == (0, 0)


@pytest.mark.parametrize("seed", range(5))
def test_binary_stats_naive_loop(seed):
    o, c = random_obs(seed), random_coef(seed)
    s = partition_stats_binary(o, c)
    assert (s.n1, s.N1, s.n2, s.N2) == naive_binary(o, c)


def test_binary_stats_rejects_nonbinary():
    with pytest.raises(ValueError, match="pixel 1"):
        partition_stats_binary(obs([1, 0.5, 0], [0.1, 0.2, 0.3]), coef(0.3))


def test_gaussian_stats_example():
    s = partition_stats_gaussian(obs([1.0, -1.0], [0.1, 0.9]), coef(0.5))
    assert (s.n1, s.sum1, s.sumsq1, s.n2, s.sum2, s.sumsq2) == (1, 1.0, 1.0, 1, -1.0, 1.0)


def test_gaussian_stats_empty_inside():
    s = partition_stats_gaussian(obs([1.0, -1.0], [0.1, 0.9]), coef(0.01))
    assert (s.n1, s.sum1, s.sumsq1) == (0, 0.0, 0.0)


@pytest.mark.parametrize("seed", range(5))
def test_gaussian_stats_naive_loop(seed):
    o, c = random_obs(seed, binary=False), random_coef(seed)
    s = partition_stats_gaussian(o, c)
    ins = [ri < c(ti) for ri, ti in zip(o.r, o.theta)]
    y1 = [yi for yi, f in zip(o.intensity, ins) if f]
    y2 = [yi for yi, f in zip(o.intensity, ins) if not f]
    assert s.n1 == len(y1) and s.n2 == len(y2)
    assert s.sum1 == pytest.approx(sum(y1)) and s.sum2 == pytest.approx(sum(y2))
    assert s.sumsq1 == pytest.approx(sum(v * v for v in y1))
    assert s.sumsq2 == pytest.approx(sum(v * v for v in y2))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_stats_permutation_invariant(seed):
    o, c = random_obs(seed), random_coef(seed)
    p = np.random.default_rng(seed).permutation(o.n)
    o2 = obs(o.intensity[p], o.r[p], o.theta[p])
    assert partition_stats_binary(o, c) == partition_stats_binary(o2, c)


def test_mask_equals_filtered_subset():
    o, c = random_obs(3), random_coef(3)
    mask = np.random.default_rng(9).random(o.n) < 0.6
    masked = o.with_mask(mask)
    filtered = obs(o.intensity[mask], o.r[mask], o.theta[mask])
    assert partition_stats_binary(masked, c) == partition_stats_binary(filtered, c)
    assert partition_stats_gaussian(masked, c) == partition_stats_gaussian(filtered, c)


def test_prior_quadratic_diagonal():
    s = eigenvalues(1.0, J)
    z = np.arange(1.0, 2 * J + 2)
    assert prior_quadratic(z, s) == pytest.approx(np.sum(z * z / s.v))


def test_log_cond_binary_trivial():
    s = eigenvalues(1.0, J)
    o = obs([0, 0], [0.9, 0.95])
    st_ = partition_stats_binary(o, coef(0.3))
    assert log_cond_z_binary(st_, 0.6, 0.4, coef(0.3), s, 500.0) == 0.0
    # equal probabilities remove the likelihood
    st_ = partition_stats_binary(obs([1, 0, 1], [0.1, 0.2, 0.9]), coef(0.3))
    assert log_cond_z_binary(st_, 0.5, 0.5, coef(0.3), s, 500.0) == 0.0


def test_log_cond_invalid_boundary():
    s = eigenvalues(1.0, J)
    z = np.zeros(2 * J + 1)
    z[1] = 1.0  # radius 0.3 + sqrt2 cos(w) goes negative
    st_ = partition_stats_binary(obs([1], [0.1]), coef(0.3))
    assert log_cond_z_binary(st_, 0.6, 0.4, coef(0.3, z), s, 1.0) == -np.inf
    gs = partition_stats_gaussian(obs([1.0], [0.1]), coef(0.3))
    assert log_cond_z_gaussian(gs, 1, 1, 0, 1, coef(0.3, z), s, 1.0) == -np.inf


def full_binary(o, c, p1, p2, s, tau):
    ll = 0.0
    for yi, ri, ti in zip(o.intensity, o.r, o.theta):
        p = p1 if ri < c(ti) else p2
        ll += yi * np.log(p) + (1 - yi) * np.log(1 - p)
    return ll - 0.5 * tau * np.sum(c.z ** 2 / s.v)


def full_gaussian(o, c, m1, s1, m2, s2, s, tau):
    ll = 0.0
    for yi, ri, ti in zip(o.intensity, o.r, o.theta):
        m, sd = (m1, s1) if ri < c(ti) else (m2, s2)
        ll += -np.log(sd) - (yi - m) ** 2 / (2 * sd * sd)
    return ll - 0.5 * tau * np.sum(c.z ** 2 / s.v)


@pytest.mark.parametrize("seed", range(10))
def test_log_cond_binary_differences(seed):
    o = random_obs(seed)
    s = eigenvalues(0.8, J)
    c1, c2 = random_coef(seed), random_coef(seed + 100)
    f = lambda c: log_cond_z_binary(partition_stats_binary(o, c), 0.7, 0.2, c, s, 50.0)
    g = lambda c: full_binary(o, c, 0.7, 0.2, s, 50.0)
    assert f(c1) - f(c2) == pytest.approx(g(c1) - g(c2), abs=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_log_cond_gaussian_differences(seed):
    o = random_obs(seed, binary=False)
    s = eigenvalues(0.8, J)
    c1, c2 = random_coef(seed), random_coef(seed + 100)
    f = lambda c: log_cond_z_gaussian(partition_stats_gaussian(o, c), 1.0, 0.7, -0.5, 1.3, c, s, 50.0)
    g = lambda c: full_gaussian(o, c, 1.0, 0.7, -0.5, 1.3, s, 50.0)
    assert f(c1) - f(c2) == pytest.approx(g(c1) - g(c2), abs=1e-9)


def test_log_cond_gaussian_equal_params_constant():
    o = random_obs(1, binary=False)
    s = eigenvalues(1.0, J)
    c1, c2 = random_coef(1), random_coef(2)
    f = lambda c: log_cond_z_gaussian(partition_stats_gaussian(o, c), 0.3, 1.1, 0.3, 1.1, c, s, 0.0)
    assert f(c1) == pytest.approx(f(c2), abs=1e-9)


def test_mle_init_noiseless_disk():
    o = gen_binary(60, 1.0, 0.0, "D", circle_boundary(0.3), (0.5, 0.5), np.random.default_rng(0))
    init = mle_init(o, "binary")
    step = (0.95 * o.r.max() - 0.05) / 49
    assert abs(init.radius - 0.3) <= step
    assert not init.degenerate
    assert init.nuisance[0] == pytest.approx(1.0, abs=0.05)


def test_mle_init_gaussian_disk():
    o = gen_gaussian(60, 5.0, 0.0, 0.1, 0.1, "D", circle_boundary(0.25), (0.5, 0.5),
                     np.random.default_rng(1))
    init = mle_init(o, "gaussian")
    step = (0.95 * o.r.max() - 0.05) / 49
    assert abs(init.radius - 0.25) <= step
    m1, s1, m2, s2 = init.nuisance
    # the winning grid circle may include a rim of background pixels
    assert m1 > 4.0 and m2 == pytest.approx(0.0, abs=0.05)


def test_mle_init_constant_image_flag():
    o = obs(np.ones(50), np.linspace(0.01, 0.5, 50))
    with pytest.warns(RuntimeWarning):
        init = mle_init(o, "binary")
    assert init.degenerate
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert mle_init(o, "gaussian").degenerate


def test_observation_validation_and_recenter():
    with pytest.raises(ValueError):
        obs([1, 0], [0.1])
    with pytest.raises(ValueError):
        obs([1, 0], [0.1, 0.2], mask=[False, False])
    o = observation_from_xy([0.7, 0.5], [0.5, 0.9], [1.0, 0.0], (0.5, 0.5))
    o2 = o.recenter((0.7, 0.5))
    assert o2.r[0] == 0.0 and o2.center == (0.7, 0.5)
    assert o2.r[1] == pytest.approx(np.hypot(0.2, 0.4))
    assert o2.theta[1] == pytest.approx(wrap_angle(np.arctan2(0.4, -0.2)))
