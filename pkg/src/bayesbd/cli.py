"""Command-line interface: ``bayesbd {simulate,fit,metrics,bench,multifit}``.

Exit status is 0 when every requested output was written, 1 on a runtime
error (bad input file, family mismatch, partial multifit) and 2 on a usage
error.
"""
import argparse
import math
import os
import sys
import time
import warnings
from dataclasses import replace

import numpy as np
from scipy import stats as sps

from . import imageio
from .geometry import as_reference, circle_boundary, ellipse_boundary, sampled_curve, triangle_boundary
from .metrics import all_errors
from .model import BINARY, FAMILIES, GAUSSIAN
from .posterior import EDGES, membership_export, summarize
from .sampler import FitConfig, fit_chain
from .simulate import DESIGNS, gen_binary, gen_gaussian

MIN_STAGE_PIXELS = 100
CENTER_TOL = 1e-9

_SHAPES = {
    "circle": {"r": 0.3},
    "ellipse": {"a": 0.35, "b": 0.25, "rotation": 0.0, "dx": 0.0, "dy": 0.0},
    "triangle": {"height": 0.5},
}
_ALIASES = {"radius": "r", "h": "height", "rot": "rotation"}


class CLIError(Exception):
    pass


# ------------------------------------------------------------- arg parsing

def parse_center(text):
    try:
        x, y = (float(v) for v in text.split(","))
        return as_reference((x, y)).as_tuple()
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"bad center {text!r}: expected x,y in [0,1] ({e})")


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be a nonnegative integer, got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def parse_shape(text):
    """Boundary from ``name[:key=value,...]``.

    ``circle:r=0.3``, ``ellipse:a=0.35,b=0.25,rotation=60,dx=0.1,dy=0.1``
    (rotation in degrees, ``dx,dy`` = ellipse center minus reference point),
    ``triangle:height=0.5``.  Omitted keys take the defaults shown.
    """
    name, _, rest = text.partition(":")
    name = name.strip().lower()
    if name not in _SHAPES:
        raise ValueError(f"unknown shape {name!r}; expected one of {sorted(_SHAPES)}")
    params = dict(_SHAPES[name])
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        key = _ALIASES.get(key.strip(), key.strip())
        if not eq or key not in params:
            raise ValueError(f"bad {name} parameter {item!r}; allowed: {sorted(params)}")
        params[key] = float(value)
    if name == "circle":
        if not params["r"] > 0:
            raise ValueError("circle radius must be positive")
        return circle_boundary(params["r"])
    if name == "triangle":
        if not params["height"] > 0:
            raise ValueError("triangle height must be positive")
        return triangle_boundary(params["height"])
    return ellipse_boundary(params["a"], params["b"], math.radians(params["rotation"]),
                            (params["dx"], params["dy"]))


def _add_fit_flags(p):
    p.add_argument("--input", required=True, help="observation file or .png/.jpg image")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--binarize", type=float, default=None, metavar="T",
                   help="images only: threshold rescaled [0,10] intensities to {0,1}")
    p.add_argument("--inimean", type=_positive_float, default=None,
                   help="initial mean radius (default: maximum likelihood over circles)")
    p.add_argument("--nrun", type=_positive_int, default=4000, help="kept sweeps")
    p.add_argument("--nburn", type=_nonneg_int, default=1000, help="burn-in sweeps")
    p.add_argument("--J", type=_positive_int, default=10, help="Fourier order (L = 2J+1)")
    p.add_argument("--ordering", choices=("I", "O", "N"), default="I",
                   help="binary: I = inside more likely 1, O = outside, N = none")
    p.add_argument("--ordering-mean", choices=("I", "O", "N"), default="I")
    p.add_argument("--ordering-sd", choices=("I", "O", "N"), default="N")
    p.add_argument("--sampler", choices=("mh", "slice"), default="slice")
    p.add_argument("--refresh", choices=("move", "sweep"), default="move",
                   help="recompute region statistics after every move (exact) or once per sweep")
    p.add_argument("--engine", choices=("compiled", "python"), default="compiled")
    p.add_argument("--output-all", action="store_true", help="store full parameter traces")
    p.add_argument("--level", type=float, default=0.95, help="credible band level")
    p.add_argument("--edge", choices=EDGES, default="outer",
                   help="band curve used for the per-pixel membership table")
    p.add_argument("--seed", type=_seed, default=0)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bayesbd", description="Bayesian boundary estimation for star-shaped regions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic observation file")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--m", type=int, default=100, help="image is m x m pixels")
    p.add_argument("--boundary", default="ellipse", help="shape spec, e.g. triangle:height=0.5")
    p.add_argument("--design", choices=sorted(DESIGNS), default="J",
                   help="D = grid, U = uniform, J = jittered")
    p.add_argument("--center", type=parse_center, default=(0.5, 0.5))
    p.add_argument("--pi-in", type=float)
    p.add_argument("--pi-out", type=float)
    p.add_argument("--mu-in", type=float)
    p.add_argument("--mu-out", type=float)
    p.add_argument("--sd-in", type=float)
    p.add_argument("--sd-out", type=float)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", help="also plot the data")

    p = sub.add_parser("fit", help="sample the posterior boundary and write a fit file")
    _add_fit_flags(p)
    p.add_argument("--center", type=parse_center, default=None,
                   help="reference point (default: the observation file's, or 0.5,0.5)")
    p.add_argument("--mask", help="fit, observation or 0/1 text file selecting pixels")
    p.add_argument("--out", required=True)
    p.add_argument("--svg", help="also plot the result")
    p.add_argument("--svg-mode", choices=imageio.SVG_MODES, default="overlay")

    p = sub.add_parser("metrics", help="errors of a fitted boundary against a truth")
    p.add_argument("--fit", required=True)
    p.add_argument("--truth", required=True,
                   help="shape spec (see simulate --boundary) or a fit/curve file")
    p.add_argument("--truth-center", type=parse_center, default=None,
                   help="reference point of a shape spec (must equal the fit's)")
    p.add_argument("--out", help="also write the report here")

    p = sub.add_parser("bench", help="runtime against image size")
    p.add_argument("--sizes", type=_positive_int, nargs="+", default=[40, 60, 80, 100],
                   help="image side lengths m (n = m*m pixels)")
    p.add_argument("--family", choices=FAMILIES, default=BINARY)
    p.add_argument("--sampler", choices=("mh", "slice"), default="slice")
    p.add_argument("--iters", type=_positive_int, default=500, help="sweeps per fit")
    p.add_argument("--repeats", type=_positive_int, default=3,
                   help="timed fits per size; the fastest is reported")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", help="also write the report here")

    p = sub.add_parser("multifit", help="nested fits, each on the previous outer band")
    _add_fit_flags(p)
    p.add_argument("--centers", type=parse_center, nargs="+", required=True,
                   help="reference point per stage (a single one is reused)")
    p.add_argument("--stages", type=int, default=2)
    p.add_argument("--out-prefix", required=True,
                   help="stage j is written to PREFIX_stage<j>.txt")
    p.add_argument("--svg", action="store_true", help="also plot each stage")
    return parser


# ----------------------------------------------------------------- helpers

def _is_image(path):
    return os.path.splitext(path)[1].lower() in (".png", ".jpg", ".jpeg")


def load_input(path, center=None, binarize=None):
    if not os.path.exists(path):
        raise CLIError(f"{path}: no such file")
    if _is_image(path):
        return imageio.load_image(path, center or (0.5, 0.5), binarize)
    kind = imageio.file_kind(path)
    if kind != imageio.OBS_HEADER:
        raise CLIError(f"{path}: not an observation file or PNG/JPEG image")
    obs = imageio.read_observation(path)
    if center is not None and np.max(np.abs(np.subtract(center, obs.center))) > CENTER_TOL:
        obs = obs.recenter(center)
    return obs


def read_mask(path, n):
    kind = imageio.file_kind(path)
    if kind == imageio.FIT_HEADER:
        mask = imageio.read_fit(path).membership
    elif kind == imageio.OBS_HEADER:
        obs = imageio.read_observation(path)
        mask = obs.active()
    else:
        with open(path, encoding="utf-8") as f:
            tokens = f.read().split()
        lookup = {"0": False, "1": True, "false": False, "true": True}
        try:
            mask = np.array([lookup[t.lower()] for t in tokens], dtype=bool)
        except KeyError as e:
            raise CLIError(f"{path}: mask entries must be 0/1, found {e.args[0]!r}") from None
    if mask.size != n:
        raise CLIError(f"{path}: mask has {mask.size} entries but the image has {n} pixels")
    return mask


def _config(args, seed=None):
    return FitConfig(nrun=args.nrun, nburn=args.nburn, J=args.J, sampler=args.sampler,
                     ordering=args.ordering, ordering_mean=args.ordering_mean,
                     ordering_sd=args.ordering_sd, seed=args.seed if seed is None else seed,
                     inimean=args.inimean, output_all=args.output_all,
                     stats_refresh=args.refresh, engine=args.engine)


def run_fit(obs, args, cfg, chain=0):
    """Fit, summarize and export; returns ``(summary, membership, chain_output)``."""
    out = fit_chain(obs, cfg, args.family, chain)
    summary = summarize(out, args.level)
    return summary, membership_export(summary, obs, args.edge), out


def _write_fit(path, obs, args, cfg, summary, membership, out):
    imageio.write_fit(summary, membership, path, center=obs.center, family=args.family,
                      seed=cfg.seed, config=cfg.to_dict(), init=out.init, edge=args.edge,
                      mask=obs.mask, traces=out.traces)


def _emit(lines, out_path=None):
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)


# ---------------------------------------------------------------- commands

def cmd_simulate(args, parser):
    if args.family == BINARY:
        missing = [f for f in ("pi_in", "pi_out") if getattr(args, f) is None]
    else:
        missing = [f for f in ("mu_in", "mu_out", "sd_in", "sd_out") if getattr(args, f) is None]
    if missing:
        flags = ", ".join("--" + f.replace("_", "-") for f in missing)
        parser.error(f"simulate --family {args.family} requires {flags}")
    if args.m < 2:
        parser.error("--m must be at least 2")
    try:
        boundary = parse_shape(args.boundary)
    except ValueError as e:
        parser.error(f"--boundary: {e}")
    rng = np.random.default_rng(args.seed)
    if args.family == BINARY:
        if not (0 <= args.pi_in <= 1 and 0 <= args.pi_out <= 1):
            parser.error("--pi-in and --pi-out must lie in [0, 1]")
        obs = gen_binary(args.m, args.pi_in, args.pi_out, args.design, boundary, args.center, rng)
    else:
        if not (args.sd_in > 0 and args.sd_out > 0):
            parser.error("--sd-in and --sd-out must be positive")
        obs = gen_gaussian(args.m, args.mu_in, args.mu_out, args.sd_in, args.sd_out, args.design,
                           boundary, args.center, rng)
    config = {k: getattr(args, k) for k in ("family", "m", "boundary", "design", "seed")}
    config["center"] = list(args.center)
    for k in ("pi_in", "pi_out", "mu_in", "mu_out", "sd_in", "sd_out"):
        if getattr(args, k) is not None:
            config[k] = getattr(args, k)
    obs = replace(obs, meta={**obs.meta, "config": config})
    imageio.write_observation(obs, args.out)
    if args.svg:
        imageio.render_svg(obs, None, "data_only", args.svg)
    print(f"wrote {args.out} ({obs.n} pixels)")
    return 0


def cmd_fit(args, parser):
    obs = load_input(args.input, args.center, args.binarize)
    if args.mask:
        obs = obs.with_mask(read_mask(args.mask, obs.n))
    cfg = _config(args)
    t0 = time.perf_counter()
    summary, membership, out = run_fit(obs, args, cfg)
    elapsed = time.perf_counter() - t0
    _write_fit(args.out, obs, args, cfg, summary, membership, out)
    if args.svg:
        imageio.render_svg(obs, summary, args.svg_mode, args.svg)
    acc = out.diagnostics.get("mh_acceptance")
    print(f"wrote {args.out}: {int(membership.sum())} of {obs.n} pixels inside the {args.edge} "
          f"edge, L0 = {summary.L0:.4f}" + (f", MH acceptance {acc:.3f}" if acc else ""))
    print(f"sampling took {elapsed:.2f} s", file=sys.stderr)
    return 0


def load_truth(spec):
    """``(curve, center or None)`` from a shape spec or a fit/curve/two-column file."""
    if os.path.exists(spec):
        kind = imageio.file_kind(spec)
        if kind == imageio.FIT_HEADER:
            rec = imageio.read_fit(spec)
            return rec.summary.curve("mean"), tuple(rec.center)
        if kind == imageio.CURVE_HEADER:
            return imageio.read_curve(spec)
        try:
            data = np.loadtxt(spec, ndmin=2)
        except ValueError:
            raise CLIError(f"{spec}: not a fit file, curve file or two-column theta/radius table")
        if data.shape[1] != 2:
            raise CLIError(f"{spec}: expected two columns (theta, radius)")
        return sampled_curve(data[:, 0], data[:, 1]), None
    try:
        return parse_shape(spec), None
    except ValueError as e:
        raise CLIError(f"--truth: {e}") from None


def cmd_metrics(args, parser):
    rec = imageio.read_fit(args.fit)
    truth, truth_center = load_truth(args.truth)
    for c in (truth_center, args.truth_center):
        if c is not None and np.max(np.abs(np.subtract(c, rec.center))) > CENTER_TOL:
            raise CLIError(f"reference points differ: fit uses {tuple(rec.center)}, "
                           f"truth uses {tuple(c)}")
    errs = all_errors(rec.summary.curve("mean"), truth)
    _emit([f"{k} = {errs[k]!r}" for k in ("lebesgue", "dsm", "hausdorff")], args.out)
    return 0


def _bench_obs(family, m, rng):
    truth = triangle_boundary(0.5)
    if family == BINARY:
        return gen_binary(m, 0.5, 0.2, "J", truth, (0.5, 0.5), rng)
    return gen_gaussian(m, 4.0, 1.0, 1.5, 1.0, "J", truth, (0.5, 0.5), rng)


def bench_sizes(sizes, family, sampler, iters, repeats=3, seed=0):
    """Fastest wall time of a fixed-length chain per image size: list of ``(n, seconds)``."""
    cfg = FitConfig(nrun=iters, nburn=0, sampler=sampler, seed=seed)
    # compile outside the timed region
    fit_chain(_bench_obs(family, 8, np.random.default_rng(seed)),
              FitConfig(nrun=2, nburn=0, sampler=sampler), family)
    rows = []
    for m in sizes:
        obs = _bench_obs(family, m, np.random.default_rng([seed, m]))
        best = math.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            fit_chain(obs, cfg, family)
            best = min(best, time.perf_counter() - t0)
        rows.append((m * m, best))
    return rows


def linear_fit(rows):
    """Least-squares ``seconds = intercept + slope * n``; ``None`` for fewer than two sizes."""
    n = np.array([r[0] for r in rows], dtype=float)
    t = np.array([r[1] for r in rows], dtype=float)
    if np.unique(n).size < 2:
        return None
    res = sps.linregress(n, t)
    return {"slope": float(res.slope), "intercept": float(res.intercept),
            "r2": float(res.rvalue ** 2)}


def cmd_bench(args, parser):
    rows = bench_sizes(args.sizes, args.family, args.sampler, args.iters, args.repeats, args.seed)
    lines = [f"# {args.family} {args.sampler}, {args.iters} sweeps per fit, best of {args.repeats}",
             "n\tseconds"]
    lines += [f"{n}\t{t:.6f}" for n, t in rows]
    fit = linear_fit(rows)
    if fit is None:
        lines.append("# linear fit needs at least two sizes")
    else:
        lines += [f"slope = {fit['slope']:.6e}", f"intercept = {fit['intercept']:.6e}",
                  f"r2 = {fit['r2']:.6f}"]
    _emit(lines, args.out)
    return 0


def cmd_multifit(args, parser):
    if args.stages < 2:
        parser.error("--stages must be at least 2")
    centers = list(args.centers)
    if len(centers) == 1:
        centers *= args.stages
    if len(centers) != args.stages:
        parser.error(f"--centers needs 1 or {args.stages} points, got {len(centers)}")
    base = load_input(args.input, centers[0], args.binarize)
    mask = base.active()
    for stage, center in enumerate(centers, start=1):
        obs = base
        if np.max(np.abs(np.subtract(center, obs.center))) > CENTER_TOL:
            obs = obs.recenter(center)
        kept = int(mask.sum())
        if kept < MIN_STAGE_PIXELS:
            print(f"bayesbd: stage {stage}: only {kept} pixels remain inside the previous band "
                  f"(need {MIN_STAGE_PIXELS}); stopping after {stage - 1} stages",
                  file=sys.stderr)
            return 1
        obs = obs.with_mask(None if mask.all() else mask)
        cfg = _config(args)
        summary, membership, out = run_fit(obs, args, cfg, chain=stage - 1)
        path = f"{args.out_prefix}_stage{stage}.txt"
        _write_fit(path, obs, args, cfg, summary, membership, out)
        if args.svg:
            imageio.render_svg(obs, summary, "overlay", f"{args.out_prefix}_stage{stage}.svg")
        print(f"stage {stage}: wrote {path} ({kept} pixels fitted, "
              f"{int((membership & mask).sum())} inside the {args.edge} edge)")
        mask = membership & mask
    return 0


COMMANDS = {"simulate": cmd_simulate, "fit": cmd_fit, "metrics": cmd_metrics,
            "bench": cmd_bench, "multifit": cmd_multifit}


def main(argv=None):
    # numba probes for an optional threading backend; the fallback is fine
    warnings.filterwarnings("ignore", message="The TBB threading layer")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args, parser)
    except (CLIError, ValueError, OSError) as e:
        print(f"bayesbd: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
