"""Tangent-point plane parameterization, slicing, and localization metrics.

Conventions used throughout the package:
  * spherical angles: theta is the polar angle from +z, eta the azimuth
    from +x in the xy-plane; the unit normal is
    n = (sin(theta)cos(eta), sin(theta)sin(eta), cos(theta))
  * a parameter triple (r, eta, theta) denotes the plane {x : n.x = r},
    tangent to the sphere of radius r at the point r*n
  * (r, n) and (-r, -n) denote the same unoriented plane; metrics and
    slicing fold this alias away, the diffusion-facing normalization does
    not (orientation is part of the regression target).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PlaneParam:
    """Tangent-point plane: signed distance r (mm), azimuth eta, polar theta."""

    r: float
    eta: float
    theta: float

    def canonicalize(self):
        """Return the same oriented plane with eta in [0, 2pi) and theta in [0, pi]."""
        r, eta, theta = self.r, self.eta, self.theta
        theta = math.fmod(theta, TWO_PI)
        if theta < 0.0:
            theta += TWO_PI
        # reflect theta back into [0, pi]; each reflection keeps the normal
        if theta > math.pi:
            theta = TWO_PI - theta
            eta += math.pi
        eta = math.fmod(eta, TWO_PI)
        if eta < 0.0:
            eta += TWO_PI
        return PlaneParam(r, eta, theta)

    def normal(self):
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.eta),
                         st * math.sin(self.eta),
                         math.cos(self.theta)])


def to_cartesian(p: PlaneParam):
    """Plane as (unit normal, tangent point r*n)."""
    n = p.normal()
    return n, p.r * n


def from_normal(normal, r):
    """PlaneParam with canonical angles from a (not necessarily unit) normal."""
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    theta = math.acos(min(1.0, max(-1.0, n[2])))
    eta = math.atan2(n[1], n[0])
    if eta < 0.0:
        eta += TWO_PI
    return PlaneParam(float(r), eta, theta)


def flip_alias(p: PlaneParam):
    """The other representation of the same unoriented plane: (-r, -n)."""
    return PlaneParam(-p.r, p.eta + math.pi, math.pi - p.theta).canonicalize()


def canonical_alias(p: PlaneParam, tol=1e-9):
    """Pick a deterministic representative of the unoriented plane.

    Rule: keep r > 0; for |r| <= tol fall back to the normal hemisphere
    (n_z > 0, then n_x > 0, then n_y > 0). Slicing and the training
    targets go through this, so sign-flipped inputs behave identically.
    """
    p = p.canonicalize()
    if p.r > tol:
        return p
    if p.r < -tol:
        return flip_alias(p)
    n = p.normal()
    for comp in n:
        if comp > tol:
            return p
        if comp < -tol:
            return flip_alias(p)
    return p


def in_plane_basis(normal):
    """Deterministic in-plane frame (u, v) for a unit normal.

    u = normalize(n x z); if ||n x z|| < 1e-6 use u = normalize(n x x);
    v = n x u.
    """
    n = np.asarray(normal, dtype=float)
    u = np.cross(n, np.array([0.0, 0.0, 1.0]))
    norm = np.linalg.norm(u)
    if norm < 1e-6:
        u = np.cross(n, np.array([1.0, 0.0, 0.0]))
        norm = np.linalg.norm(u)
    u = u / norm
    v = np.cross(n, u)
    return u, v


@dataclass
class SliceImage:
    """2D resampled plane: pixels[row, col] in [0, 1] for normalized volumes."""

    width: int
    height: int
    fov_mm: float
    pixels: np.ndarray


def default_fov(volume):
    """Volume extent along its largest axis, in mm."""
    return float(max(n * s for n, s in zip(volume.dims, volume.spacing)))


def slice_volume(volume, p: PlaneParam, size=224, fov=None):
    """Resample a size x size, fov x fov mm slice centered at the tangent point.

    The plane alias is canonicalized first, so p and its (-r,-n) twin give
    pixel-identical images.
    """
    if size < 2:
        raise ValueError("slice size must be >= 2")
    if fov is None:
        fov = default_fov(volume)
    if fov <= 0:
        raise ValueError("fov must be positive")
    p = canonical_alias(p)
    n, point = to_cartesian(p)
    u, v = in_plane_basis(n)
    step = fov / (size - 1)
    corner = point - (size - 1) / 2.0 * step * (u + v)
    pixels = kernels.sample_plane(volume.data, volume.spacing, corner,
                                  step * u, step * v, size, size)
    return SliceImage(width=size, height=size, fov_mm=float(fov), pixels=pixels)


def angle_metric(p1: PlaneParam, p2: PlaneParam):
    """Unoriented angle between plane normals, degrees in [0, 90]."""
    d = abs(float(np.dot(p1.normal(), p2.normal())))
    return math.degrees(math.acos(min(1.0, d)))


def distance_metric(p1: PlaneParam, p2: PlaneParam):
    """Absolute difference of the planes' distances to the origin, mm."""
    return abs(abs(p1.r) - abs(p2.r))


def normalize_param(p: PlaneParam, r_max):
    """Map a canonical PlaneParam into the diffused [-1, 1]^3 cube."""
    p = p.canonicalize()
    return np.array([p.r / r_max,
                     p.eta / math.pi - 1.0,
                     2.0 * p.theta / math.pi - 1.0])


def denormalize_param(x, r_max):
    """Inverse of normalize_param; clamps r and theta, wraps eta."""
    x = np.asarray(x, dtype=float)
    r = float(np.clip(x[0], -1.0, 1.0)) * r_max
    eta = math.fmod((x[1] + 1.0) * math.pi, TWO_PI)
    if eta < 0.0:
        eta += TWO_PI
    theta = (float(np.clip(x[2], -1.0, 1.0)) + 1.0) * math.pi / 2.0
    return PlaneParam(r, eta, theta)


def mean_param(params):
    """Average plane: arithmetic r and theta, circular eta."""
    if not params:
        raise ValueError("mean_param of an empty list")
    r = sum(p.r for p in params) / len(params)
    theta = sum(p.theta for p in params) / len(params)
    s = sum(math.sin(p.eta) for p in params)
    c = sum(math.cos(p.eta) for p in params)
    eta = math.atan2(s, c)
    if eta < 0.0:
        eta += TWO_PI
    return PlaneParam(r, eta, theta)


def write_pgm(img: SliceImage, path):
    """Export a slice as 8-bit binary PGM (assumes pixels in [0, 1])."""
    data = np.clip(np.rint(img.pixels * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.width} {img.height}\n255\n".encode("ascii"))
        fh.write(data.tobytes())
