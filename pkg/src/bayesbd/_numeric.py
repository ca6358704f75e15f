"""Compiled numeric cores shared by the reference and compiled Gibbs samplers.

Both samplers draw from the same ``numpy.random.Generator`` in the same order
and do their arithmetic through the functions below, so a chain run through
:func:`run_chain` matches the pure-Python reference chain draw for draw.
"""
import math

import numba
import numpy as np

from .kernel import scaled_bessel_orders_unchecked

NONE, INSIDE_HIGHER, OUTSIDE_HIGHER = 0, 1, 2
ORDER_CODES = {"none": NONE, "inside_higher": INSIDE_HIGHER, "outside_higher": OUTSIDE_HIGHER}

MAX_SHRINK = 1000
PROB_EPS = 1e-12
PREC_MIN, PREC_MAX = 1e-300, 1e300

# counters layout
MH_PROPOSED, MH_ACCEPTED, SLICE_CALLS, SLICE_EVALS, SHRINK_FAILURES, JEFFREYS, EMPTY = range(7)
N_COUNTERS = 7

# hyperparameter vector layout
H_ALPHA_A, H_BETA_A, H_ALPHA_TAU, H_BETA_TAU, H_ALPHA1, H_BETA1, H_MU0, H_SIGMA0, \
    H_ALPHA2, H_BETA2 = range(10)


@numba.njit(fastmath=True, cache=True)
def inside_weight_sum(w, r, g, d, psi):
    """Sum of ``w_i`` over pixels with ``r_i < g_i + d * psi_i``."""
    s = 0.0
    for i in range(r.size):
        s += w[i] * (r[i] < g[i] + d * psi[i])
    return s


@numba.njit(fastmath=True, parallel=True, cache=True)
def inside_weight_sum_parallel(w, r, g, d, psi):
    s = 0.0
    for i in numba.prange(r.size):
        s += w[i] * (r[i] < g[i] + d * psi[i])
    return s


@numba.njit(cache=True)
def inside_sums(y, r, g):
    n1 = 0
    s1 = 0.0
    ss1 = 0.0
    for i in range(r.size):
        if r[i] < g[i]:
            n1 += 1
            s1 += y[i]
            ss1 += y[i] * y[i]
    return n1, s1, ss1


@numba.njit(cache=True)
def totals(y):
    s = 0.0
    ss = 0.0
    for i in range(y.size):
        s += y[i]
        ss += y[i] * y[i]
    return s, ss


@numba.njit(cache=True)
def eval_radii(mu, z, basis_t, out):
    """``out = mu + z @ basis_t`` with a fixed summation order."""
    n = basis_t.shape[1]
    for i in range(n):
        out[i] = mu
    for k in range(z.size):
        zk = z[k]
        for i in range(n):
            out[i] += zk * basis_t[k, i]
    return out


@numba.njit(cache=True)
def add_scaled(out, d, x):
    for i in range(out.size):
        out[i] = out[i] + d * x[i]


@numba.njit(cache=True)
def add_scaled_min(out, d, x):
    """``out += d * x`` in place; returns the new minimum of ``out``."""
    m = np.inf
    for i in range(out.size):
        out[i] = out[i] + d * x[i]
        if out[i] < m:
            m = out[i]
    return m


@numba.njit(cache=True)
def quad_form(z, v):
    s = 0.0
    for k in range(z.size):
        s += z[k] * z[k] / v[k]
    return s


@numba.njit(cache=True)
def fill_eigenvalues(a, J, out):
    s = scaled_bessel_orders_unchecked(J, 2.0 * a * a)
    out[0] = s[0]
    for j in range(1, J + 1):
        out[2 * j - 1] = s[j]
        out[2 * j] = s[j]
    return out


@numba.njit(cache=True)
def log_density_a(a, z, tau, alpha_a, beta_a):
    if not a > 0.0:
        return -np.inf
    J = (z.size - 1) // 2
    s = scaled_bessel_orders_unchecked(J, 2.0 * a * a)
    # v_{2j} = v_{2j+1}, so group the terms by Bessel order
    if not s[0] > 0.0:
        return -np.inf
    total = -0.5 * math.log(s[0]) - 0.5 * tau * z[0] * z[0] / s[0]
    for j in range(1, J + 1):
        vj = s[j]
        if not vj > 0.0:
            return -np.inf
        zz = z[2 * j - 1] * z[2 * j - 1] + z[2 * j] * z[2 * j]
        total -= math.log(vj) + 0.5 * tau * zz / vj
    return total + (alpha_a - 1.0) * math.log(a) - beta_a * a


@numba.njit(cache=True)
def pixel_weights_binary(y, p1, p2, out):
    slope = math.log(p1 * (1.0 - p2) / (p2 * (1.0 - p1)))
    icpt = math.log((1.0 - p1) / (1.0 - p2))
    for i in range(y.size):
        out[i] = y[i] * slope + icpt
    return out


@numba.njit(cache=True)
def pixel_weights_gaussian(y, m1, s1, m2, s2, out):
    c = -(math.log(s1) - math.log(s2))
    h1 = 1.0 / (2.0 * s1 * s1)
    h2 = 1.0 / (2.0 * s2 * s2)
    for i in range(y.size):
        d1 = y[i] - m1
        d2 = y[i] - m2
        out[i] = c - d1 * d1 * h1 + d2 * d2 * h2
    return out


@numba.njit(fastmath=True, cache=True)
def coef_logf(x, zk, prec, gmin, cmax, ggrid, gk, w, r, base_g, psik, parallel):
    """Log conditional density of one coefficient, up to a constant."""
    d = x - zk
    # the grid check is only needed when the move could reach zero
    if abs(d) * cmax >= gmin:
        for j in range(ggrid.size):
            if ggrid[j] + d * gk[j] <= 0.0:
                return -np.inf
    if parallel:
        s = inside_weight_sum_parallel(w, r, base_g, d, psik)
    else:
        s = inside_weight_sum(w, r, base_g, d, psik)
    return s - 0.5 * prec * x * x


# The steps below mirror the reference implementations in ``sampler`` exactly
# (same draws in the same order); they are specialised per target density
# because passing jitted functions as arguments defeats on-disk caching.

@numba.njit(cache=True)
def slice_step_coef(args, x0, fx0, width, max_steps, rng, counters):
    logy = fx0 - rng.standard_exponential()
    left = x0 - width * rng.random()
    right = left + width
    j = int(max_steps * rng.random())
    k = max_steps - 1 - j
    evals = 0
    while j > 0:
        evals += 1
        if not coef_logf(left, *args) > logy:
            break
        left -= width
        j -= 1
    while k > 0:
        evals += 1
        if not coef_logf(right, *args) > logy:
            break
        right += width
        k -= 1
    for _ in range(MAX_SHRINK):
        x1 = left + (right - left) * rng.random()
        fx1 = coef_logf(x1, *args)
        evals += 1
        if fx1 > logy:
            counters[SLICE_CALLS] += 1
            counters[SLICE_EVALS] += evals
            return x1, fx1
        if x1 < x0:
            left = x1
        else:
            right = x1
    counters[SLICE_CALLS] += 1
    counters[SLICE_EVALS] += evals
    counters[SHRINK_FAILURES] += 1
    return x0, fx0


@numba.njit(cache=True)
def slice_step_a(args, x0, fx0, width, max_steps, rng, counters):
    logy = fx0 - rng.standard_exponential()
    left = x0 - width * rng.random()
    right = left + width
    j = int(max_steps * rng.random())
    k = max_steps - 1 - j
    evals = 0
    while j > 0:
        evals += 1
        if not log_density_a(left, *args) > logy:
            break
        left -= width
        j -= 1
    while k > 0:
        evals += 1
        if not log_density_a(right, *args) > logy:
            break
        right += width
        k -= 1
    for _ in range(MAX_SHRINK):
        x1 = left + (right - left) * rng.random()
        fx1 = log_density_a(x1, *args)
        evals += 1
        if fx1 > logy:
            counters[SLICE_CALLS] += 1
            counters[SLICE_EVALS] += evals
            return x1, fx1
        if x1 < x0:
            left = x1
        else:
            right = x1
    counters[SLICE_CALLS] += 1
    counters[SLICE_EVALS] += evals
    counters[SHRINK_FAILURES] += 1
    return x0, fx0


@numba.njit(cache=True)
def mh_step_coef(args, x0, fx0, proposal_sd, rng):
    x1 = x0 + proposal_sd * rng.standard_normal()
    fx1 = coef_logf(x1, *args)
    diff = fx1 - fx0
    if diff >= 0.0 or (diff > -np.inf and -rng.standard_exponential() < diff):
        return x1, fx1, True
    return x0, fx0, False


@numba.njit(cache=True)
def out_of_order(first, second, code):
    if code == INSIDE_HIGHER:
        return first < second
    if code == OUTSIDE_HIGHER:
        return first > second
    return False


@numba.njit(cache=True)
def beta_params(alpha1, beta1, N, n, counters):
    a = alpha1 + N
    b = beta1 + n - N
    if a <= 0.0 or b <= 0.0:
        counters[JEFFREYS] += 1
        a += 0.5
        b += 0.5
    return a, b


@numba.njit(cache=True)
def clip_prob(p):
    return min(max(p, PROB_EPS), 1.0 - PROB_EPS)


@numba.njit(cache=True)
def draw_binary(n1, N1, n2, N2, alpha1, beta1, order, rng, counters):
    a1, b1 = beta_params(alpha1, beta1, N1, n1, counters)
    a2, b2 = beta_params(alpha1, beta1, N2, n2, counters)
    p1 = clip_prob(rng.beta(a1, b1))
    p2 = clip_prob(rng.beta(a2, b2))
    if out_of_order(p1, p2, order):
        return p2, p1
    return p1, p2


@numba.njit(cache=True)
def nig_draw(n, s, ss, mu0, kappa0, alpha2, beta2, rng, counters):
    if n > 0:
        ybar = s / n
        scatter = max(ss - n * ybar * ybar, 0.0)
        dev = ybar - mu0
        shape = alpha2 + 0.5 * n
        rate = beta2 + 0.5 * scatter + 0.5 * kappa0 * n / (n + kappa0) * (dev * dev)
        post_mean = (kappa0 * mu0 + s) / (n + kappa0)
    else:
        counters[EMPTY] += 1
        shape = alpha2
        rate = beta2
        post_mean = mu0
    prec = min(max(rng.gamma(shape, 1.0 / rate), PREC_MIN), PREC_MAX)
    sigma = 1.0 / math.sqrt(prec)
    mu = rng.normal(post_mean, sigma / math.sqrt(n + kappa0))
    return mu, sigma


@numba.njit(cache=True)
def order_gaussian(m1, s1, m2, s2, order_mean, order_sd):
    if out_of_order(m1, m2, order_mean):
        m1, s1, m2, s2 = m2, s2, m1, s1
    if out_of_order(s1, s2, order_sd):
        if order_mean == NONE:
            m1, s1, m2, s2 = m2, s2, m1, s1
        else:
            s1, s2 = s2, s1
    return m1, s1, m2, s2


@numba.njit(cache=True)
def draw_gaussian(n1, sum1, sumsq1, n2, sum2, sumsq2, mu0, sigma0, alpha2, beta2,
                  order_mean, order_sd, rng, counters):
    kappa0 = sigma0 ** -2.0
    m1, s1 = nig_draw(n1, sum1, sumsq1, mu0, kappa0, alpha2, beta2, rng, counters)
    m2, s2 = nig_draw(n2, sum2, sumsq2, mu0, kappa0, alpha2, beta2, rng, counters)
    return order_gaussian(m1, s1, m2, s2, order_mean, order_sd)


@numba.njit(cache=True)
def run_chain(y, r, psi_t, grid_t, col_max, mu, nuisance, gaussian, use_slice, per_move,
              parallel, orders, hyper, nburn, kept, trace_z, trace_a, trace_tau, trace_nu,
              refresh_every, slice_max_steps, a_width, mh_scale, init_tau, init_a,
              rng, counters):
    """Whole Gibbs chain; fills ``kept`` (and traces when they have rows)."""
    n = y.size
    L = psi_t.shape[0]
    J = (L - 1) // 2
    nrun = kept.shape[0]
    output_all = trace_z.shape[0] > 0
    z = np.zeros(L)
    v = np.empty(L)
    w = np.empty(n)
    gamma = np.empty(n)
    gamma_ref = np.empty(n)
    ggrid = np.empty(grid_t.shape[1])
    nu = nuisance.copy()
    tau = init_tau
    a = init_a
    gmin = 0.0
    tot_n = n
    tot_s, tot_ss = totals(y)

    for it in range(nburn + nrun):
        fill_eigenvalues(a, J, v)
        if gaussian:
            pixel_weights_gaussian(y, nu[0], nu[1], nu[2], nu[3], w)
        else:
            pixel_weights_binary(y, nu[0], nu[1], w)
        if it % refresh_every == 0:
            eval_radii(mu, z, psi_t, gamma)
            eval_radii(mu, z, grid_t, ggrid)
            gmin = ggrid.min()
        if parallel:
            lik = inside_weight_sum_parallel(w, r, gamma, 0.0, gamma)
        else:
            lik = inside_weight_sum(w, r, gamma, 0.0, gamma)
        if not per_move:
            gamma_ref[:] = gamma

        for k in range(L):
            psik = psi_t[k]
            gk = grid_t[k]
            zk = z[k]
            prec = tau / v[k]
            base_g = gamma if per_move else gamma_ref
            args = (zk, prec, gmin, col_max[k], ggrid, gk, w, r, base_g, psik, parallel)
            fx0 = lik - 0.5 * prec * zk * zk
            if use_slice:
                x1, fx1 = slice_step_coef(args, zk, fx0, math.sqrt(v[k] / tau),
                                          slice_max_steps, rng, counters)
                moved = x1 != zk
            else:
                x1, fx1, moved = mh_step_coef(args, zk, fx0, math.sqrt(v[k] / tau) * mh_scale,
                                              rng)
                counters[MH_PROPOSED] += 1
                if moved:
                    counters[MH_ACCEPTED] += 1
            if moved:
                d = x1 - zk
                gmin = add_scaled_min(ggrid, d, gk)
                z[k] = x1
                if per_move:
                    add_scaled(gamma, d, psik)
                    lik = fx1 + 0.5 * prec * x1 * x1

        shape = hyper[H_ALPHA_TAU] + 0.5 * L
        rate = hyper[H_BETA_TAU] + 0.5 * quad_form(z, v)
        tau = rng.gamma(shape, 1.0 / rate)

        if not per_move:
            eval_radii(mu, z, psi_t, gamma)
        n1, s1, ss1 = inside_sums(y, r, gamma)
        if gaussian:
            m1, sd1, m2, sd2 = draw_gaussian(
                n1, s1, ss1, tot_n - n1, tot_s - s1, tot_ss - ss1,
                hyper[H_MU0], hyper[H_SIGMA0], hyper[H_ALPHA2], hyper[H_BETA2],
                orders[1], orders[2], rng, counters)
            nu[0] = m1
            nu[1] = sd1
            nu[2] = m2
            nu[3] = sd2
        else:
            N1 = round(s1)
            p1, p2 = draw_binary(n1, N1, tot_n - n1, round(tot_s - s1),
                                 hyper[H_ALPHA1], hyper[H_BETA1], orders[0], rng, counters)
            nu[0] = p1
            nu[1] = p2

        a_args = (z, tau, hyper[H_ALPHA_A], hyper[H_BETA_A])
        fa = log_density_a(a, z, tau, hyper[H_ALPHA_A], hyper[H_BETA_A])
        a, _ = slice_step_a(a_args, a, fa, a_width, slice_max_steps, rng, counters)

        t = it - nburn
        if t >= 0:
            eval_radii(mu, z, grid_t, kept[t])
            if output_all:
                trace_z[t] = z
                trace_a[t] = a
                trace_tau[t] = tau
                trace_nu[t, :nu.size] = nu
    return nu
