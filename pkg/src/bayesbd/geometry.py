"""Polar coordinates about a reference point and reference boundary curves.

Every boundary here is a *radial function*: a callable mapping angles in
radians to the distance from the reference point to the boundary along that
ray.  Callables accept scalars or arrays and return the same shape.
"""
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ReferencePoint:
    x: float
    y: float

    def __post_init__(self):
        if not (0.0 <= self.x <= 1.0 and 0.0 <= self.y <= 1.0):
            raise ValueError(f"reference point ({self.x}, {self.y}) lies outside [0,1]^2")

    def as_tuple(self):
        return (float(self.x), float(self.y))


@dataclass(frozen=True)
class PolarPoint:
    r: float
    theta: float


def as_reference(center) -> ReferencePoint:
    if isinstance(center, ReferencePoint):
        return center
    x, y = center
    return ReferencePoint(float(x), float(y))


def wrap_angle(theta):
    """Reduce angles into [0, 2*pi)."""
    out = np.mod(theta, TWO_PI)
    # np.mod can return exactly 2*pi for tiny negative inputs
    return np.where(out >= TWO_PI, 0.0, out)


def rect_to_polar_arrays(x, y, center):
    """Vectorized rectangular to polar conversion, returns ``(r, theta)``."""
    c = as_reference(center)
    dx = np.asarray(x, dtype=float) - c.x
    dy = np.asarray(y, dtype=float) - c.y
    r = np.hypot(dx, dy)
    theta = wrap_angle(np.arctan2(dy, dx))
    theta = np.where(r == 0.0, 0.0, theta)
    return r, theta


def rect_to_polar(points, center):
    """Convert ``(x, y)`` pairs to :class:`PolarPoint` about ``center``.

    A point exactly at the center gets ``r = 0, theta = 0``.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    r, theta = rect_to_polar_arrays(pts[:, 0], pts[:, 1], center)
    return [PolarPoint(float(ri), float(ti)) for ri, ti in zip(r, theta)]


def polar_to_rect(r, theta, center):
    c = as_reference(center)
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return c.x + r * np.cos(theta), c.y + r * np.sin(theta)


class RadialBoundary:
    """Base class for radial boundary functions ``omega -> radius``."""

    def __call__(self, omega):
        raise NotImplementedError

    def describe(self) -> dict:
        """JSON-serializable description (used in file headers)."""
        return {"kind": type(self).__name__}


@dataclass(frozen=True)
class Circle(RadialBoundary):
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("circle radius must be positive")

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        return np.full(omega.shape, float(self.radius)) if omega.ndim else float(self.radius)

    def describe(self):
        return {"kind": "circle", "r": float(self.radius)}


@dataclass(frozen=True)
class Ellipse(RadialBoundary):
    """Rotated ellipse whose center sits at ``offset`` relative to the reference point."""

    a: float
    b: float
    rotation: float = 0.0
    offset: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("ellipse semi-axes must be positive")
        # reference point (origin) must be strictly inside the ellipse
        if self._origin_level() >= 0.0:
            raise ValueError(
                f"offset {tuple(self.offset)} places the reference point outside the ellipse"
            )

    def _origin_level(self):
        cr, sr = np.cos(self.rotation), np.sin(self.rotation)
        dx, dy = self.offset
        # origin relative to the ellipse center, in the ellipse frame
        qx = cr * (-dx) + sr * (-dy)
        qy = -sr * (-dx) + cr * (-dy)
        return (qx / self.a) ** 2 + (qy / self.b) ** 2 - 1.0

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        cr, sr = np.cos(self.rotation), np.sin(self.rotation)
        ux, uy = np.cos(omega), np.sin(omega)
        px = cr * ux + sr * uy
        py = -sr * ux + cr * uy
        dx, dy = self.offset
        qx = cr * (-dx) + sr * (-dy)
        qy = -sr * (-dx) + cr * (-dy)
        ia2, ib2 = 1.0 / self.a**2, 1.0 / self.b**2
        A = px * px * ia2 + py * py * ib2
        B = 2.0 * (px * qx * ia2 + py * qy * ib2)
        C = qx * qx * ia2 + qy * qy * ib2 - 1.0
        sq = np.sqrt(B * B - 4.0 * A * C)
        # C < 0 so exactly one root is positive; pick the cancellation-free form
        t = np.where(B >= 0.0, -2.0 * C / (B + sq), (-B + sq) / (2.0 * A))
        return t if omega.ndim else float(t)

    def describe(self):
        return {
            "kind": "ellipse",
            "a": float(self.a),
            "b": float(self.b),
            "rotation": float(self.rotation),
            "offset": [float(self.offset[0]), float(self.offset[1])],
        }


@dataclass(frozen=True)
class Triangle(RadialBoundary):
    """Equilateral triangle with centroid at the reference point, one vertex at pi/2."""

    height: float

    def __post_init__(self):
        if self.height <= 0:
            raise ValueError("triangle height must be positive")

    # outward edge normals point away from the vertices: 3pi/2, pi/6, 5pi/6
    _normals = (1.5 * np.pi, np.pi / 6.0, 5.0 * np.pi / 6.0)

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        d = self.height / 3.0
        cosmax = np.max([np.cos(omega - n) for n in self._normals], axis=0)
        out = d / cosmax
        return out if omega.ndim else float(out)

    def vertices(self):
        R = 2.0 * self.height / 3.0
        ang = np.pi / 2.0 + np.array([0.0, 2.0, 4.0]) * np.pi / 3.0
        return np.column_stack([R * np.cos(ang), R * np.sin(ang)])

    def describe(self):
        return {"kind": "triangle", "height": float(self.height)}


@dataclass(frozen=True)
class SampledCurve(RadialBoundary):
    """Radial function from samples, linearly interpolated with periodic wrap."""

    theta: tuple
    radius: tuple

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        out = np.interp(wrap_angle(omega), np.asarray(self.theta), np.asarray(self.radius),
                        period=TWO_PI)
        return out if omega.ndim else float(out)

    def describe(self):
        return {"kind": "sampled", "n": len(self.theta)}


def sampled_curve(theta, radius) -> SampledCurve:
    theta = np.asarray(theta, dtype=float)
    radius = np.asarray(radius, dtype=float)
    if theta.shape != radius.shape or theta.ndim != 1 or theta.size < 2:
        raise ValueError("sampled curve needs matching 1-d theta/radius arrays")
    return SampledCurve(tuple(theta.tolist()), tuple(radius.tolist()))


def circle_boundary(radius: float) -> Circle:
    return Circle(float(radius))


def ellipse_boundary(semi_axis_a, semi_axis_b, rotation=0.0, offset=(0.0, 0.0)) -> Ellipse:
    """Radial function of a rotated, offset ellipse.

    Parameters
    ----------
    semi_axis_a, semi_axis_b : float
        Semi-axes along the ellipse's own x and y directions.
    rotation : float
        Counter-clockwise rotation in radians.
    offset : (float, float)
        Ellipse center relative to the reference point.

    Raises
    ------
    ValueError
        If the reference point is not strictly inside the ellipse.
    """
    return Ellipse(float(semi_axis_a), float(semi_axis_b), float(rotation),
                   (float(offset[0]), float(offset[1])))


def triangle_boundary(height: float) -> Triangle:
    return Triangle(float(height))


def inside(boundary, r, theta=None):
    """Strict membership ``r < boundary(theta)``.

    Accepts either a :class:`PolarPoint` or arrays ``r, theta``.
    """
    if isinstance(r, PolarPoint):
        return bool(r.r < boundary(r.theta))
    return np.asarray(r) < boundary(theta)


def boundary_from_description(desc: dict) -> RadialBoundary:
    kind = desc["kind"]
    if kind == "circle":
        return Circle(desc["r"])
    if kind == "ellipse":
        return ellipse_boundary(desc["a"], desc["b"], desc.get("rotation", 0.0),
                                tuple(desc.get("offset", (0.0, 0.0))))
    if kind == "triangle":
        return Triangle(desc["height"])
    raise ValueError(f"cannot rebuild boundary of kind {kind!r}")
