"""Univariate MCMC kernels and the Gibbs samplers for binary and Gaussian images.

One sweep of either sampler updates, in order:

1. each Fourier coefficient ``z_k`` (ascending ``k``) by a Metropolis-Hastings
   or slice step on its conditional log-density, the pixel radii being
   refreshed after every accepted move;
2. the prior precision ``tau`` from its Gamma conditional;
3. the intensity parameters from their (ordered) conjugate conditionals;
4. the kernel smoothness ``a`` by a slice step.
"""
import math
import os
from dataclasses import asdict, dataclass, field, replace

import numba
import numpy as np

from .geometry import TWO_PI
from . import _numeric as _nm
from .kernel import basis, eigenvalues
from .model import (ANGLE_GRID, BINARY, GAUSSIAN, BinaryStats, GaussianStats, check_binary,
                    grid_basis, mle_init, prior_quadratic)

ORDERINGS = ("inside_higher", "outside_higher", "none")
_ORDER_ALIASES = {"I": "inside_higher", "O": "outside_higher", "N": "none"}
SAMPLERS = ("mh", "slice")

ENGINES = ("compiled", "python")

MAX_SHRINK = _nm.MAX_SHRINK
INIT_TAU = 500.0
INIT_A = 1.0
A_SLICE_WIDTH = 1.0
SLICE_MAX_STEPS = 50
MH_SCALE = 0.5
PROB_EPS = _nm.PROB_EPS
# pixel radii are rebuilt from the coefficients this often to stop drift
REFRESH_EVERY = 100


def _threaded():
    """``BAYESBD_THREADS > 1`` opts into the threaded pixel reduction."""
    try:
        threads = int(os.environ.get("BAYESBD_THREADS", "1"))
    except ValueError:
        threads = 1
    if threads > 1:
        numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))
        return True
    return False


def normalize_ordering(value):
    value = _ORDER_ALIASES.get(value, value)
    if value not in ORDERINGS:
        raise ValueError(f"ordering must be one of {ORDERINGS} or I/O/N, got {value!r}")
    return value


@dataclass(frozen=True)
class Hyper:
    alpha_a: float = 2.0
    beta_a: float = 1.0
    alpha_tau: float = 500.0
    beta_tau: float = 1.0
    alpha1: float = 0.0
    beta1: float = 0.0
    mu0: float = None  # None: mean of the (included) intensities
    sigma0: float = 1e3
    alpha2: float = 1e-2
    beta2: float = 1e-2

    def __post_init__(self):
        for k in ("alpha_a", "beta_a", "alpha_tau", "beta_tau", "sigma0", "alpha2", "beta2"):
            if not getattr(self, k) > 0:
                raise ValueError(f"hyperparameter {k} must be positive")
        if self.alpha1 < 0 or self.beta1 < 0:
            raise ValueError("alpha1 and beta1 must be nonnegative")


@dataclass(frozen=True)
class FitConfig:
    """Sampler settings.

    ``ordering`` applies to binary fits; ``ordering_mean``/``ordering_sd``
    to Gaussian fits.  ``stats_refresh="sweep"`` holds pixel radii fixed for a
    whole coefficient sweep, a faster approximation of the exact per-move
    refresh.  ``engine="python"`` runs the reference implementation built
    from the public update functions; it reproduces the compiled chain
    draw for draw, only slower.
    """

    nrun: int = 4000
    nburn: int = 1000
    J: int = 10
    sampler: str = "slice"
    ordering: str = "inside_higher"
    ordering_mean: str = "inside_higher"
    ordering_sd: str = "none"
    hyper: Hyper = field(default_factory=Hyper)
    seed: int = 0
    inimean: float = None
    output_all: bool = False
    stats_refresh: str = "move"
    engine: str = "compiled"

    def __post_init__(self):
        if int(self.nrun) != self.nrun or self.nrun < 1:
            raise ValueError("nrun must be a positive integer")
        if int(self.nburn) != self.nburn or self.nburn < 0:
            raise ValueError("nburn must be a nonnegative integer")
        if int(self.J) != self.J or self.J < 1:
            raise ValueError("J must be a positive integer")
        if self.sampler not in SAMPLERS:
            raise ValueError(f"sampler must be one of {SAMPLERS}")
        for k in ("ordering", "ordering_mean", "ordering_sd"):
            object.__setattr__(self, k, normalize_ordering(getattr(self, k)))
        if self.inimean is not None and not self.inimean > 0:
            raise ValueError("inimean must be positive")
        if self.stats_refresh not in ("move", "sweep"):
            raise ValueError("stats_refresh must be 'move' or 'sweep'")
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["hyper"] = Hyper(**d.get("hyper", {}))
        return cls(**d)


def make_rng(seed, chain=0):
    """Independent stream for ``(seed, chain)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(chain,))))


class Diagnostics:
    """Counters filled in while a chain runs."""

    _FIELDS = ("mh_proposed", "mh_accepted", "slice_calls", "slice_evals", "shrink_failures",
               "jeffreys_fallbacks", "empty_region_draws")

    def __init__(self):
        self.counters = np.zeros(_nm.N_COUNTERS, dtype=np.int64)

    def __getattr__(self, name):
        if name in Diagnostics._FIELDS:
            return int(self.counters[Diagnostics._FIELDS.index(name)])
        raise AttributeError(name)

    def as_dict(self):
        d = {k: getattr(self, k) for k in self._FIELDS}
        d["mh_acceptance"] = (self.mh_accepted / self.mh_proposed) if self.mh_proposed else None
        return d


def _counters(diag):
    return Diagnostics().counters if diag is None else diag.counters


# ---------------------------------------------------------------- kernels

def _slice_step(logf, x0, fx0, width, max_steps, rng, counters):
    logy = fx0 - rng.standard_exponential()
    left = x0 - width * rng.random()
    right = left + width
    j = int(max_steps * rng.random())
    k = max_steps - 1 - j
    evals = 0
    while j > 0:
        evals += 1
        if not logf(left) > logy:
            break
        left -= width
        j -= 1
    while k > 0:
        evals += 1
        if not logf(right) > logy:
            break
        right += width
        k -= 1
    for _ in range(MAX_SHRINK):
        x1 = left + (right - left) * rng.random()
        fx1 = logf(x1)
        evals += 1
        if fx1 > logy:
            counters[_nm.SLICE_CALLS] += 1
            counters[_nm.SLICE_EVALS] += evals
            return x1, fx1
        if x1 < x0:
            left = x1
        else:
            right = x1
    counters[_nm.SLICE_CALLS] += 1
    counters[_nm.SLICE_EVALS] += evals
    counters[_nm.SHRINK_FAILURES] += 1
    return x0, fx0


def slice_univariate(logf, x0, width, max_steps, rng, logf0=None, diag=None):
    """One stepping-out and shrinkage slice update of ``x0``.

    Parameters
    ----------
    logf : callable
        Log of an unnormalized density; may return ``-inf``.
    x0 : float
        Current state, ``logf(x0) > -inf``.
    width : float
        Initial bracket width.
    max_steps : int
        Cap on the bracket size, in multiples of ``width``.
    rng : numpy.random.Generator

    Returns
    -------
    float
        The new state.  If shrinkage fails after 1000 contractions the old
        state is returned and ``diag.shrink_failures`` is incremented.
    """
    fx0 = logf(x0) if logf0 is None else logf0
    if not fx0 > -np.inf:
        raise ValueError("slice sampling must start from a state of positive density")
    if not width > 0:
        raise ValueError("slice width must be positive")
    return _slice_step(logf, x0, fx0, width, max_steps, rng, _counters(diag))[0]


def _mh_step(logf, x0, fx0, proposal_sd, rng):
    x1 = x0 + proposal_sd * rng.standard_normal()
    fx1 = logf(x1)
    diff = fx1 - fx0
    if diff >= 0.0 or (diff > -np.inf and -rng.standard_exponential() < diff):
        return x1, fx1, True
    return x0, fx0, False


def mh_univariate(logf, x0, proposal_sd, rng, logf0=None):
    """Gaussian random-walk Metropolis-Hastings step; returns ``(x1, accepted)``."""
    fx0 = logf(x0) if logf0 is None else logf0
    x1, _, acc = _mh_step(logf, x0, fx0, proposal_sd, rng)
    return x1, acc


# ------------------------------------------------------- conditional draws

def sample_tau(z, spectrum, hyper: Hyper, rng):
    shape = hyper.alpha_tau + 0.5 * spectrum.L
    rate = hyper.beta_tau + 0.5 * prior_quadratic(z, spectrum)
    return float(rng.gamma(shape, 1.0 / rate))


def _code(ordering):
    return _nm.ORDER_CODES[normalize_ordering(ordering)]


def sample_nuisance_binary(stats: BinaryStats, hyper: Hyper, ordering, rng, diag=None):
    """Draw ``(pi1, pi2)`` from independent Beta conditionals, swapped into order.

    An improper Beta parameter (zero prior count with no data) falls back to
    adding the Jeffreys half count.
    """
    p1, p2 = _nm.draw_binary(stats.n1, stats.N1, stats.n2, stats.N2, float(hyper.alpha1),
                             float(hyper.beta1), _code(ordering), rng, _counters(diag))
    return float(p1), float(p2)


def sample_nuisance_gaussian(stats: GaussianStats, hyper: Hyper, ordering_mean, ordering_sd,
                             rng, diag=None):
    """Draw ``(mu1, sigma1, mu2, sigma2)`` from the normal-inverse-gamma conditionals.

    Means are ordered by swapping whole ``(mu, sigma)`` pairs; an sd ordering
    then reorders the sigmas (or the pairs, when means are unordered).
    """
    if hyper.mu0 is None:
        raise ValueError("hyper.mu0 must be resolved before sampling")
    out = _nm.draw_gaussian(stats.n1, float(stats.sum1), float(stats.sumsq1), stats.n2,
                            float(stats.sum2), float(stats.sumsq2), float(hyper.mu0),
                            float(hyper.sigma0), float(hyper.alpha2), float(hyper.beta2),
                            _code(ordering_mean), _code(ordering_sd), rng, _counters(diag))
    return tuple(float(v) for v in out)


def log_density_a(a, z, tau, hyper: Hyper):
    """Conditional log-density of the smoothness ``a`` (up to a constant).

    ``-sum log v_k(a) / 2 - tau sum z_k^2 / (2 v_k(a)) + (alpha_a - 1) log a - beta_a a``
    """
    z = np.ascontiguousarray(z, dtype=float)
    return float(_nm.log_density_a(float(a), z, float(tau), float(hyper.alpha_a),
                                   float(hyper.beta_a)))


def sample_a(z, tau, hyper: Hyper, rng, current_a, diag=None):
    """One slice update of ``a`` (width 1, at most 50 stepping-out steps)."""
    if not current_a > 0:
        raise ValueError("current_a must be positive")
    z = np.ascontiguousarray(z, dtype=float)
    args = (z, float(tau), float(hyper.alpha_a), float(hyper.beta_a))
    logf = lambda a: _nm.log_density_a(a, *args)
    return float(slice_univariate(logf, float(current_a), A_SLICE_WIDTH, SLICE_MAX_STEPS, rng,
                                  diag=diag))


# ------------------------------------------------------------ Gibbs loops

@dataclass
class ChainOutput:
    """Posterior boundary draws on the fixed 200-angle grid."""

    boundaries: np.ndarray
    theta: np.ndarray
    mu: float
    family: str
    center: tuple
    config: FitConfig
    init: dict
    diagnostics: dict
    traces: dict = None

    @property
    def nrun(self):
        return self.boundaries.shape[0]


def _nuisance_at_radius(y, r, radius, family):
    ins = r < radius
    if family == BINARY:
        out = []
        for sel in (ins, ~ins):
            out.append(float(y[sel].mean()) if sel.any() else float(y.mean()))
        return tuple(float(np.clip(p, 1e-3, 1 - 1e-3)) for p in out)
    floor = 1e-6 * max(float(np.std(y)), 1e-12)
    out = []
    for sel in (ins, ~ins):
        yy = y[sel] if sel.any() else y
        out += [float(yy.mean()), max(float(yy.std()), floor)]
    return tuple(out)


def _initial_nuisance(y, r, mu, family, cfg):
    nu = _nuisance_at_radius(y, r, mu, family)
    if family == BINARY:
        p1, p2 = nu
        if _nm.out_of_order(p1, p2, _code(cfg.ordering)):
            p1, p2 = p2, p1
        return (p1, p2)
    return tuple(float(v) for v in _nm.order_gaussian(*nu, _code(cfg.ordering_mean),
                                                      _code(cfg.ordering_sd)))


def _pixel_weights(y, nuisance, family, out=None):
    # log-likelihood of the image = sum of weights over inside pixels + const
    out = np.empty(y.size) if out is None else out
    if family == BINARY:
        return _nm.pixel_weights_binary(y, *nuisance, out)
    return _nm.pixel_weights_gaussian(y, *nuisance, out)


def _region_stats(y, r, gamma, family, totals):
    n1, s1, ss1 = _nm.inside_sums(y, r, gamma)
    n, s, ss = totals
    if family == BINARY:
        return BinaryStats(n1, int(round(s1)), n - n1, int(round(s - s1)))
    return GaussianStats(n1, s1, ss1, n - n1, s - s1, ss - ss1)


@dataclass
class _Setup:
    y: np.ndarray
    r: np.ndarray
    psi_t: np.ndarray
    grid_t: np.ndarray
    col_max: np.ndarray
    mu: float
    nuisance: tuple
    hyper: Hyper
    degenerate: bool


def _setup(obs, cfg, family):
    y, theta, r = obs.subset()
    y = np.ascontiguousarray(y, dtype=float)
    r = np.ascontiguousarray(r, dtype=float)
    if family == BINARY:
        check_binary(y)
    hyper = cfg.hyper
    if family == GAUSSIAN and hyper.mu0 is None:
        hyper = replace(hyper, mu0=float(y.mean()))
    if cfg.inimean is None:
        init = mle_init(obs, family)
        mu, degenerate = init.radius, init.degenerate
    else:
        mu, degenerate = float(cfg.inimean), False
    psi_t = np.ascontiguousarray(basis(theta / TWO_PI, cfg.J).T)
    grid_t = np.ascontiguousarray(grid_basis(cfg.J).T)
    col_max = np.max(np.abs(grid_t), axis=1)
    return _Setup(y, r, psi_t, grid_t, col_max, mu, _initial_nuisance(y, r, mu, family, cfg),
                  hyper, degenerate)


def _empty_traces(cfg, n_nuisance):
    L = 2 * cfg.J + 1
    rows = cfg.nrun if cfg.output_all else 0
    return {"z": np.zeros((rows, L)), "a": np.zeros(rows), "tau": np.zeros(rows),
            "nuisance": np.zeros((rows, n_nuisance))}


def _hyper_vector(hyper):
    mu0 = 0.0 if hyper.mu0 is None else hyper.mu0
    return np.array([hyper.alpha_a, hyper.beta_a, hyper.alpha_tau, hyper.beta_tau, hyper.alpha1,
                     hyper.beta1, mu0, hyper.sigma0, hyper.alpha2, hyper.beta2], dtype=float)


def _compiled_chain(s, cfg, family, rng, diag, kept, traces):
    orders = np.array([_code(cfg.ordering), _code(cfg.ordering_mean), _code(cfg.ordering_sd)],
                      dtype=np.int64)
    nu = _nm.run_chain(
        s.y, s.r, s.psi_t, s.grid_t, s.col_max, s.mu, np.array(s.nuisance, dtype=float),
        family == GAUSSIAN, cfg.sampler == "slice", cfg.stats_refresh == "move", _threaded(),
        orders, _hyper_vector(s.hyper), cfg.nburn, kept, traces["z"], traces["a"],
        traces["tau"], traces["nuisance"], REFRESH_EVERY, SLICE_MAX_STEPS, A_SLICE_WIDTH,
        MH_SCALE, INIT_TAU, INIT_A, rng, diag.counters)
    return tuple(float(v) for v in nu)


def _python_chain(s, cfg, family, rng, diag, kept, traces):
    """Reference sweep built from the public update functions."""
    y, r, psi_t, grid_t, mu, hyper = s.y, s.r, s.psi_t, s.grid_t, s.mu, s.hyper
    J, L = cfg.J, 2 * cfg.J + 1
    counters = diag.counters
    threaded = _threaded()
    wsum = _nm.inside_weight_sum_parallel if threaded else _nm.inside_weight_sum
    per_move = cfg.stats_refresh == "move"
    use_slice = cfg.sampler == "slice"
    totals = (y.size,) + _nm.totals(y)
    nuisance = s.nuisance
    z = np.zeros(L)
    tau, a = INIT_TAU, INIT_A
    gamma = np.empty(y.size)
    ggrid = np.empty(grid_t.shape[1])
    w = np.empty(y.size)

    for it in range(cfg.nburn + cfg.nrun):
        v = eigenvalues(a, J).v
        _pixel_weights(y, nuisance, family, w)
        if it % REFRESH_EVERY == 0:
            _nm.eval_radii(mu, z, psi_t, gamma)
            _nm.eval_radii(mu, z, grid_t, ggrid)
            gmin = ggrid.min()
        lik = wsum(w, r, gamma, 0.0, gamma)
        base_g = gamma if per_move else gamma.copy()

        for k in range(L):
            zk = z[k]
            prec = tau / v[k]
            args = (zk, prec, gmin, s.col_max[k], ggrid, grid_t[k], w, r, base_g,
                    psi_t[k], threaded)
            logf = lambda x: _nm.coef_logf(x, *args)
            fx0 = lik - 0.5 * prec * zk * zk
            if use_slice:
                x1, fx1 = _slice_step(logf, zk, fx0, math.sqrt(v[k] / tau), SLICE_MAX_STEPS,
                                      rng, counters)
                moved = x1 != zk
            else:
                x1, fx1, moved = _mh_step(logf, zk, fx0, math.sqrt(v[k] / tau) * MH_SCALE, rng)
                counters[_nm.MH_PROPOSED] += 1
                counters[_nm.MH_ACCEPTED] += moved
            if moved:
                d = x1 - zk
                gmin = _nm.add_scaled_min(ggrid, d, grid_t[k])
                z[k] = x1
                if per_move:
                    _nm.add_scaled(gamma, d, psi_t[k])
                    lik = fx1 + 0.5 * prec * x1 * x1

        tau = sample_tau(z, eigenvalues(a, J), hyper, rng)
        if not per_move:
            _nm.eval_radii(mu, z, psi_t, gamma)
        stats = _region_stats(y, r, gamma, family, totals)
        if family == BINARY:
            nuisance = sample_nuisance_binary(stats, hyper, cfg.ordering, rng, diag)
        else:
            nuisance = sample_nuisance_gaussian(stats, hyper, cfg.ordering_mean,
                                                cfg.ordering_sd, rng, diag)
        a = sample_a(z, tau, hyper, rng, a, diag)

        t = it - cfg.nburn
        if t >= 0:
            _nm.eval_radii(mu, z, grid_t, kept[t])
            if cfg.output_all:
                traces["z"][t] = z
                traces["a"][t] = a
                traces["tau"][t] = tau
                traces["nuisance"][t] = nuisance
    return nuisance


def _run_chain(obs, cfg: FitConfig, family, chain=0):
    s = _setup(obs, cfg, family)
    rng = make_rng(cfg.seed, chain)
    diag = Diagnostics()
    kept = np.empty((cfg.nrun, ANGLE_GRID.size))
    traces = _empty_traces(cfg, len(s.nuisance))
    run = _compiled_chain if cfg.engine == "compiled" else _python_chain
    nuisance = run(s, cfg, family, rng, diag, kept, traces)
    info = {"mu": s.mu, "nuisance": list(s.nuisance), "degenerate_init": s.degenerate,
            "final_nuisance": [float(v) for v in nuisance]}
    return ChainOutput(kept, ANGLE_GRID.copy(), s.mu, family, obs.center, cfg, info,
                       diag.as_dict(), traces if cfg.output_all else None)


def gibbs_binary(obs, cfg: FitConfig, chain=0) -> ChainOutput:
    """Posterior sampling of the boundary of a binary image."""
    return _run_chain(obs, cfg, BINARY, chain)


def gibbs_gaussian(obs, cfg: FitConfig, chain=0) -> ChainOutput:
    """Posterior sampling of the boundary of a Gaussian-noised image."""
    return _run_chain(obs, cfg, GAUSSIAN, chain)


def fit_chain(obs, cfg: FitConfig, family, chain=0) -> ChainOutput:
    if family == BINARY:
        return gibbs_binary(obs, cfg, chain)
    if family == GAUSSIAN:
        return gibbs_gaussian(obs, cfg, chain)
    raise ValueError(f"unknown family {family!r}")
