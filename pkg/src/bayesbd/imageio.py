"""Image ingestion, observation/fit text files and SVG plots.

Both text formats start with a version line followed by one ``key = <json>``
line per field, keys in a fixed order.  Floats are written with Python's
shortest round-trip repr, so reading a file back reproduces every array
exactly and a fixed input always yields identical bytes.

Observation file (``bayesbd-obs v1``)::

    bayesbd-obs v1
    meta = {...}                 generating configuration / provenance
    center = [x, y]
    intensity = [...]
    mask = null | [true, ...]
    r = [...]
    theta = [...]
    x = null | [...]
    y = null | [...]

Fit file (``bayesbd-fit v1``)::

    bayesbd-fit v1
    family, center, seed, config, init, level, L0, diagnostics,
    theta, estimate, lower, upper, sd, edge, membership, mask, traces
"""
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .geometry import TWO_PI, as_reference, sampled_curve
from .model import PolarObservation, observation_from_xy
from .posterior import PosteriorSummary

OBS_HEADER = "bayesbd-obs v1"
FIT_HEADER = "bayesbd-fit v1"
CURVE_HEADER = "bayesbd-curve v1"

LUMA = (0.2126, 0.7152, 0.0722)
INTENSITY_MAX = 10.0
IMAGE_FORMATS = ("PNG", "JPEG", "MPO")
SVG_MODES = ("data_only", "bands_only", "overlay")


class FormatError(ValueError):
    """A file does not follow the expected text format."""


# ------------------------------------------------------------------ images

def _decode(path):
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as im:
            if im.format not in IMAGE_FORMATS:
                raise ValueError(f"{path}: unsupported image format {im.format} "
                                 "(expected PNG or JPEG)")
            im.load()
            mode = im.mode
            if mode in ("I", "I;16", "I;16B", "I;16L", "F"):
                raise ValueError(f"{path}: only 8-bit grayscale or RGB images are supported")
            if mode == "L":
                return np.asarray(im, dtype=float)
            if mode == "LA":
                return np.asarray(im.getchannel("L"), dtype=float)
            rgb = np.asarray(im.convert("RGB"), dtype=float)
    except FileNotFoundError:
        raise FileNotFoundError(f"{path}: no such image file") from None
    except UnidentifiedImageError:
        raise ValueError(f"{path}: cannot decode as PNG or JPEG") from None
    except OSError as e:
        raise ValueError(f"{path}: cannot read image ({e})") from None
    return rgb @ np.array(LUMA)


def image_grid(height, width):
    """Pixel-center coordinates in the unit square, row-major, row 0 at the top."""
    i, j = np.meshgrid(np.arange(height), np.arange(width), indexing="ij")
    x = (j.ravel() + 0.5) / width
    y = 1.0 - (i.ravel() + 0.5) / height
    return x, y


def load_image(path, center, binarize_threshold=None) -> PolarObservation:
    """Read a PNG/JPEG as a :class:`PolarObservation`.

    Color images are reduced to luminance ``0.2126 R + 0.7152 G + 0.0722 B``
    and intensities are rescaled affinely onto ``[0, 10]``.  With
    ``binarize_threshold`` the rescaled intensities become ``1`` where they
    exceed the threshold and ``0`` elsewhere.

    Pixel ``(row i, column j)`` of an ``H x W`` image sits at
    ``x = (j + 0.5) / W``, ``y = 1 - (i + 0.5) / H``, so the top row is near
    ``y = 1``; pixels are listed row by row.
    """
    gray = _decode(os.fspath(path))
    lo, hi = float(gray.min()), float(gray.max())
    if not hi > lo:
        raise ValueError(f"{path}: image has zero dynamic range (all pixels equal {lo:g})")
    scaled = (gray.ravel() - lo) * (INTENSITY_MAX / (hi - lo))
    meta = {"source": os.path.basename(os.fspath(path)), "height": int(gray.shape[0]),
            "width": int(gray.shape[1])}
    if binarize_threshold is not None:
        scaled = (scaled > binarize_threshold).astype(float)
        meta["binarize_threshold"] = float(binarize_threshold)
    x, y = image_grid(*gray.shape)
    return observation_from_xy(x, y, scaled, center, meta=meta)


def save_png(path, values, height, width):
    """Write row-major intensities (any range) as an 8-bit grayscale PNG."""
    from PIL import Image

    v = np.asarray(values, dtype=float).reshape(height, width)
    lo, hi = float(v.min()), float(v.max())
    scale = 255.0 / (hi - lo) if hi > lo else 0.0
    Image.fromarray(np.round((v - lo) * scale).astype(np.uint8), mode="L").save(path)


# -------------------------------------------------------------- text files

def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _write_doc(path, header, items):
    lines = [header]
    for key, value in items:
        lines.append(f"{key} = {json.dumps(_jsonable(value), sort_keys=True)}")
    data = "\n".join(lines) + "\n"
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(data)
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from None


def _read_doc(path, header):
    with open(path, encoding="utf-8") as f:
        text = f.read()
    lines = text.splitlines()
    if not lines or lines[0].strip() != header:
        found = lines[0].strip() if lines else "<empty file>"
        raise FormatError(f"{path}: expected header {header!r}, found {found!r}")
    doc = {}
    for n, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.startswith("#"):
            continue
        key, sep, value = line.partition(" = ")
        if not sep:
            raise FormatError(f"{path}:{n}: expected 'key = value'")
        try:
            doc[key.strip()] = json.loads(value)
        except json.JSONDecodeError as e:
            raise FormatError(f"{path}:{n}: bad value for {key.strip()!r}: {e}") from None
    return doc


def file_kind(path):
    """Header line of a text file, or ``None`` for binary/unknown files."""
    try:
        with open(path, encoding="utf-8") as f:
            return f.readline().strip()
    except (UnicodeDecodeError, OSError):
        return None


def write_observation(obs: PolarObservation, path):
    _write_doc(path, OBS_HEADER, [
        ("meta", obs.meta), ("center", list(obs.center)), ("intensity", obs.intensity),
        ("mask", None if obs.mask is None else obs.mask), ("r", obs.r), ("theta", obs.theta),
        ("x", obs.x), ("y", obs.y)])


def read_observation(path) -> PolarObservation:
    d = _read_doc(path, OBS_HEADER)
    try:
        return PolarObservation(d["intensity"], d["theta"], d["r"], tuple(d["center"]),
                                mask=d.get("mask"), x=d.get("x"), y=d.get("y"),
                                meta=d.get("meta") or {})
    except KeyError as e:
        raise FormatError(f"{path}: missing field {e.args[0]!r}") from None


@dataclass
class FitRecord:
    """Contents of a fit file."""

    summary: PosteriorSummary
    membership: np.ndarray
    center: tuple
    family: str = None
    seed: int = None
    config: dict = field(default_factory=dict)
    init: dict = field(default_factory=dict)
    edge: str = "outer"
    mask: np.ndarray = None
    traces: dict = None


def write_fit(summary: PosteriorSummary, membership, path, *, center, family=None, seed=None,
              config=None, init=None, edge="outer", mask=None, traces=None):
    """Write a posterior summary and per-pixel membership as a ``bayesbd-fit v1`` file."""
    membership = np.asarray(membership, dtype=bool).ravel()
    _write_doc(path, FIT_HEADER, [
        ("family", family), ("center", list(as_reference(center).as_tuple())),
        ("seed", None if seed is None else int(seed)), ("config", config or {}),
        ("init", init or {}), ("level", summary.level), ("L0", summary.L0),
        ("diagnostics", summary.diagnostics), ("theta", summary.theta),
        ("estimate", summary.estimate), ("lower", summary.lower), ("upper", summary.upper),
        ("sd", summary.sd), ("edge", edge), ("membership", membership.astype(int)),
        ("mask", None if mask is None else np.asarray(mask, dtype=bool)),
        ("traces", traces)])


def read_fit(path) -> FitRecord:
    d = _read_doc(path, FIT_HEADER)
    try:
        arr = lambda k: np.asarray(d[k], dtype=float)
        summary = PosteriorSummary(arr("theta"), arr("estimate"), arr("lower"), arr("upper"),
                                   float(d["L0"]), float(d["level"]), arr("sd"),
                                   d.get("diagnostics") or {})
        membership = np.asarray(d["membership"], dtype=bool).ravel()
        center = tuple(d["center"])
    except KeyError as e:
        raise FormatError(f"{path}: missing field {e.args[0]!r}") from None
    mask = d.get("mask")
    traces = d.get("traces")
    if traces is not None:
        traces = {k: np.asarray(v, dtype=float) for k, v in traces.items()}
    return FitRecord(summary, membership, center, d.get("family"), d.get("seed"),
                     d.get("config") or {}, d.get("init") or {}, d.get("edge", "outer"),
                     None if mask is None else np.asarray(mask, dtype=bool), traces)


def write_curve(theta, radius, center, path):
    _write_doc(path, CURVE_HEADER, [("center", list(as_reference(center).as_tuple())),
                                    ("theta", np.asarray(theta, dtype=float)),
                                    ("radius", np.asarray(radius, dtype=float))])


def read_curve(path):
    """Sampled radial curve from a curve file; returns ``(curve, center)``."""
    d = _read_doc(path, CURVE_HEADER)
    center = d.get("center")
    return sampled_curve(d["theta"], d["radius"]), (None if center is None else tuple(center))


# --------------------------------------------------------------------- SVG

_CANVAS = 500.0


def _xy(obs):
    if obs.x is not None and obs.y is not None:
        return obs.x, obs.y
    cx, cy = obs.center
    return cx + obs.r * np.cos(obs.theta), cy + obs.r * np.sin(obs.theta)


def _curve_xy(summary, values, center):
    theta = np.asarray(summary.theta)
    r = np.asarray(values)
    return center[0] + r * np.cos(theta), center[1] + r * np.sin(theta)


def _fmt(v):
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


def render_svg(obs: PolarObservation, summary: PosteriorSummary = None, mode="overlay",
               path=None):
    """Plot pixels and/or the posterior mean with its uniform band as SVG 1.1.

    ``data_only`` draws one circle per pixel (gray level = intensity),
    ``bands_only`` the estimate (solid) and band edges (dashed) as closed
    paths, ``overlay`` both.  Returns the SVG text; writes it when ``path``
    is given.  The view box covers the unit square and every curve point.
    """
    if mode not in SVG_MODES:
        raise ValueError(f"mode must be one of {SVG_MODES}")
    if mode != "data_only" and summary is None:
        raise ValueError(f"mode {mode!r} needs a posterior summary")
    S = _CANVAS
    xs, ys = [0.0, 1.0], [0.0, 1.0]
    curves = []
    if mode != "data_only":
        for name, values in (("estimate", summary.estimate), ("lower", summary.lower),
                             ("upper", summary.upper)):
            cx, cy = _curve_xy(summary, values, obs.center)
            curves.append((name, cx, cy))
            xs += [float(cx.min()), float(cx.max())]
            ys += [float(cy.min()), float(cy.max())]
    pad = 0.02
    x0, x1 = min(xs) - pad, max(xs) + pad
    y0, y1 = min(ys) - pad, max(ys) + pad
    view = f"{_fmt(S * x0)} {_fmt(S * (1.0 - y1))} {_fmt(S * (x1 - x0))} {_fmt(S * (y1 - y0))}"
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{view}" '
           f'width="{_fmt(S * (x1 - x0))}" height="{_fmt(S * (y1 - y0))}">',
           f"<title>boundary plot ({mode})</title>"]
    if mode != "bands_only":
        px, py = _xy(obs)
        v = obs.intensity
        lo, hi = float(v.min()), float(v.max())
        level = np.zeros(v.size) if hi == lo else (v - lo) / (hi - lo)
        gray = np.round(255 * level).astype(int)
        rad = 0.5 * S / math.sqrt(obs.n)
        active = obs.active()
        out.append('<g class="pixels" stroke="none">')
        for i in range(obs.n):
            g = gray[i]
            opacity = "" if active[i] else ' fill-opacity="0.3"'
            out.append(f'<circle class="px" cx="{_fmt(S * px[i])}" cy="{_fmt(S * (1.0 - py[i]))}" '
                       f'r="{_fmt(rad)}" fill="rgb({g},{g},{g})"{opacity}/>')
        out.append("</g>")
    styles = {"estimate": 'stroke="#d62728" stroke-width="2"',
              "lower": 'stroke="#1f77b4" stroke-width="1.5" stroke-dasharray="6,4"',
              "upper": 'stroke="#1f77b4" stroke-width="1.5" stroke-dasharray="6,4"'}
    for name, cx, cy in curves:
        pts = " L ".join(f"{_fmt(S * a)} {_fmt(S * (1.0 - b))}" for a, b in zip(cx, cy))
        out.append(f'<path class="{name}" d="M {pts} Z" fill="none" {styles[name]}/>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
        except OSError as e:
            raise OSError(f"cannot write {path}: {e.strerror or e}") from None
    return text


def summary_from_curve(g, level=0.95, n=200):
    """Degenerate summary whose estimate and band all equal the curve ``g``."""
    theta = np.linspace(0.0, TWO_PI, n, endpoint=False)
    r = np.asarray(g(theta), dtype=float)
    return PosteriorSummary(theta, r, r.copy(), r.copy(), 0.0, level, np.zeros(n), {})
