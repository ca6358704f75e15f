"""Synthetic binary and Gaussian-noised images with a known boundary."""
from dataclasses import dataclass

import numpy as np

from .geometry import as_reference, inside, rect_to_polar_arrays
from .model import PolarObservation

DESIGNS = {"D": "deterministic_grid", "U": "uniform_random", "J": "jittered"}


@dataclass(frozen=True)
class DesignSpec:
    kind: str
    m: int

    def __post_init__(self):
        object.__setattr__(self, "kind", DESIGNS.get(self.kind, self.kind))
        if self.kind not in DESIGNS.values():
            raise ValueError(f"unknown design {self.kind!r}")
        if int(self.m) != self.m or self.m < 2:
            raise ValueError("design size m must be an integer >= 2")


def _design(design, m=None):
    if isinstance(design, DesignSpec):
        return design
    return DesignSpec(design, m)


def sample_locations(design: DesignSpec, rng) -> np.ndarray:
    """``m*m`` pixel locations in the unit square, shape ``(m*m, 2)``.

    Grid cells are enumerated with x varying slowest.
    """
    m = design.m
    if design.kind == "uniform_random":
        return rng.random((m * m, 2))
    i, j = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    corner = np.column_stack([i.ravel(), j.ravel()]).astype(float)
    if design.kind == "deterministic_grid":
        return (corner + 0.5) / m
    return (corner + rng.random((m * m, 2))) / m


def _locate(m, design, boundary, center, rng):
    spec = _design(design, m)
    if spec.m != m:
        raise ValueError("design size does not match m")
    xy = sample_locations(spec, rng)
    r, theta = rect_to_polar_arrays(xy[:, 0], xy[:, 1], center)
    return xy, r, theta, inside(boundary, r, theta)


def gen_binary(m, pi_in, pi_out, design, boundary, center, rng) -> PolarObservation:
    """Binary image: ``Y ~ Bernoulli(pi_in)`` inside the boundary, ``pi_out`` outside."""
    for p in (pi_in, pi_out):
        if not 0.0 <= p <= 1.0:
            raise ValueError("success probabilities must lie in [0, 1]")
    xy, r, theta, ins = _locate(m, design, boundary, center, rng)
    p = np.where(ins, pi_in, pi_out)
    y = (rng.random(p.size) < p).astype(float)
    meta = {"family": "binary", "m": int(m), "pi_in": float(pi_in), "pi_out": float(pi_out),
            "design": _design(design, m).kind, "boundary": boundary.describe()}
    return PolarObservation(y, theta, r, as_reference(center).as_tuple(),
                            x=xy[:, 0], y=xy[:, 1], meta=meta)


def gen_gaussian(m, mu_in, mu_out, sd_in, sd_out, design, boundary, center, rng) -> PolarObservation:
    """Gaussian-noised image with region-wise mean and standard deviation."""
    if not (sd_in > 0 and sd_out > 0):
        raise ValueError("standard deviations must be positive")
    xy, r, theta, ins = _locate(m, design, boundary, center, rng)
    y = np.where(ins, mu_in, mu_out) + np.where(ins, sd_in, sd_out) * rng.standard_normal(r.size)
    meta = {"family": "gaussian", "m": int(m), "mu_in": float(mu_in), "mu_out": float(mu_out),
            "sd_in": float(sd_in), "sd_out": float(sd_out), "design": _design(design, m).kind,
            "boundary": boundary.describe()}
    return PolarObservation(y, theta, r, as_reference(center).as_tuple(),
                            x=xy[:, 0], y=xy[:, 1], meta=meta)
