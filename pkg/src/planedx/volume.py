"""3D volumes: representation, trilinear sampling, phantom generation, file I/O.

Volumes are scalar intensity grids with physical spacing; the physical
origin sits at the volume center and the flat layout is x-fastest
(internally a (nz, ny, nx) float32 array). Phantoms are procedurally
generated shapes with a single mirror-symmetry plane, which doubles as the
ground-truth standard plane, plus class-specific geometry (lobe count /
septum) that is visible in that plane.
"""

import json
import math
import struct
from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import PlaneParam, from_normal

MAGIC = b"PDVF"
FORMAT_VERSION = 1

DEFAULT_LABELS = ("single-lobe", "bifurcated", "septated")


class VolumeFormatError(ValueError):
    """Raised for malformed or truncated volume files."""


@dataclass
class Volume:
    dims: tuple          # (nx, ny, nz)
    spacing: tuple       # mm per voxel along x, y, z
    data: np.ndarray     # (nz, ny, nx) float32

    def __post_init__(self):
        nx, ny, nz = self.dims
        if min(nx, ny, nz) < 8:
            raise ValueError("volume dims must be >= 8 along every axis")
        self.data = np.ascontiguousarray(self.data, dtype=np.float32)
        if self.data.shape != (nz, ny, nx):
            raise ValueError(f"data shape {self.data.shape} does not match dims {self.dims}")

    @property
    def r_max(self):
        """Half the physical diagonal, mm; bound for |r| of intersecting planes."""
        ext = [n * s for n, s in zip(self.dims, self.spacing)]
        return 0.5 * math.sqrt(sum(e * e for e in ext))


@dataclass(frozen=True)
class PhantomSpec:
    class_label: str
    rotation: tuple = (0.0, 0.0, 0.0)   # Euler angles (rad), R = Rz @ Ry @ Rx
    scale: float = 26.0                 # mm
    noise_sigma: float = 8.0            # raw (0-255) intensity units
    seed: int = 0
    labels: tuple = DEFAULT_LABELS

    def validate(self):
        if self.class_label not in self.labels:
            raise ValueError(f"unknown class label {self.class_label!r}")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


@dataclass
class GroundTruth:
    plane: PlaneParam
    label: int


def rotation_matrix(angles):
    """R = Rz(c) @ Ry(b) @ Rx(a) for angles (a, b, c)."""
    a, b, c = angles
    ca, sa = math.cos(a), math.sin(a)
    cb, sb = math.cos(b), math.sin(b)
    cc, sc = math.cos(c), math.sin(c)
    rx = np.array([[1, 0, 0], [0, ca, -sa], [0, sa, ca]], dtype=float)
    ry = np.array([[cb, 0, sb], [0, 1, 0], [-sb, 0, cb]], dtype=float)
    rz = np.array([[cc, -sc, 0], [sc, cc, 0], [0, 0, 1]], dtype=float)
    return rz @ ry @ rx


def _smooth(x):
    """Smoothstep of a clipped implicit value; 1 inside, 0 outside."""
    t = np.clip(x, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def _ellipsoid(q, center, axes, edge=0.12):
    d = (q - center) / axes
    g = np.einsum("...i,...i->...", d, d)
    return _smooth((1.0 - g) / edge + 0.5)


def _sphere(q, center, radius, edge=0.12):
    d = q - center
    g = np.einsum("...i,...i->...", d, d) / (radius * radius)
    return _smooth((1.0 - g) / edge + 0.5)


def generate_phantom(spec: PhantomSpec, dims=(64, 64, 64), spacing=(1.0, 1.0, 1.0)):
    """Build a raw (0-255) phantom volume and its ground truth.

    The canonical shape is mirror-symmetric about z=0 and nowhere else
    (class features are placed asymmetrically in-plane), so after rotation
    the unique symmetry plane has normal R @ z. The shape center is offset
    from the volume origin with a 3-8 mm component along that normal, which
    keeps the tangent distance r of every ground-truth plane positive.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    s = spec.scale
    # seeded per-phantom jitter (draw order is part of the format)
    axes_jit = rng.uniform(0.9, 1.1, size=3)
    lobe_jit = rng.uniform(0.88, 1.12, size=4)
    d_normal = rng.uniform(3.0, 8.0)
    w_inplane = rng.uniform(-3.0, 3.0, size=2)

    rot = rotation_matrix(spec.rotation)
    n_axis = rot @ np.array([0.0, 0.0, 1.0])
    u = rot @ np.array([1.0, 0.0, 0.0])
    v = rot @ np.array([0.0, 1.0, 0.0])
    offset = d_normal * n_axis + w_inplane[0] * u + w_inplane[1] * v

    nx, ny, nz = dims
    xs = (np.arange(nx) - (nx - 1) / 2.0) * spacing[0]
    ys = (np.arange(ny) - (ny - 1) / 2.0) * spacing[1]
    zs = (np.arange(nz) - (nz - 1) / 2.0) * spacing[2]
    zz, yy, xx = np.meshgrid(zs, ys, xs, indexing="ij")
    world = np.stack([xx, yy, zz], axis=-1)
    q = (world - offset) @ rot  # == R^T (x - offset) per voxel

    body_axes = np.array([0.46, 0.36, 0.18]) * s * axes_jit
    body = _ellipsoid(q, np.zeros(3), body_axes)
    img = 20.0 + 120.0 * body

    label = spec.labels.index(spec.class_label)
    if spec.class_label == "single-lobe":
        lobe = _sphere(q, np.array([0.18, 0.22, 0.0]) * s, 0.16 * s * lobe_jit[0])
        notch = _sphere(q, np.array([-0.28, -0.12, 0.0]) * s, 0.12 * s * lobe_jit[1])
        img += 80.0 * lobe - 60.0 * notch * body
    elif spec.class_label == "bifurcated":
        lobe_a = _sphere(q, np.array([0.26, 0.20, 0.0]) * s, 0.15 * s * lobe_jit[0])
        lobe_b = _sphere(q, np.array([-0.22, 0.26, 0.0]) * s, 0.11 * s * lobe_jit[1])
        img += 80.0 * lobe_a + 80.0 * lobe_b
    elif spec.class_label == "septated":
        septum = (_smooth((0.045 * s - np.abs(q[..., 0] - 0.06 * s)) / (0.02 * s) + 0.5)
                  * _smooth((q[..., 1] + 0.05 * s) / (0.02 * s) + 0.5))
        marker = _sphere(q, np.array([0.30, -0.18, 0.0]) * s, 0.09 * s * lobe_jit[0])
        img += 80.0 * marker - 90.0 * septum * body
    else:
        # extra configured classes reuse the single-lobe geometry with a
        # label-dependent lobe position so they stay distinguishable
        ang = 0.8 + 1.1 * label
        center = np.array([0.26 * math.cos(ang), 0.26 * math.sin(ang), 0.0]) * s
        lobe = _sphere(q, center, 0.14 * s * lobe_jit[0])
        img += 80.0 * lobe

    if spec.noise_sigma > 0:
        img = img + rng.normal(0.0, spec.noise_sigma, size=img.shape)
    img = np.clip(img, 0.0, 255.0)

    vol = Volume(dims=dims, spacing=tuple(float(x) for x in spacing),
                 data=img.astype(np.float32))
    plane = from_normal(n_axis, float(np.dot(n_axis, offset)))
    return vol, GroundTruth(plane=plane, label=label)


def normalize_intensity(volume: Volume):
    """Scale raw 0-255 intensities to [0, 1] by dividing by 255."""
    data = volume.data
    if float(data.min()) < 0.0 or float(data.max()) > 255.0:
        raise ValueError("raw intensities must lie in [0, 255]")
    return Volume(dims=volume.dims, spacing=volume.spacing,
                  data=(data / np.float32(255.0)))


def trilinear_sample(volume: Volume, point):
    """Trilinear interpolation at a physical point (mm); 0 outside the grid."""
    return float(kernels.trilinear_points(
        volume.data, volume.spacing, np.asarray(point, dtype=float).reshape(1, 3))[0])


def _sidecar_path(path):
    return str(path) + ".meta.json"


def save_volume(path, volume: Volume, ground_truth: GroundTruth = None,
                label_names=None, seed=None):
    """Write the binary volume file, plus a ground-truth sidecar if given."""
    nx, ny, nz = volume.dims
    header = MAGIC + struct.pack("<IIII", FORMAT_VERSION, nx, ny, nz)
    header += struct.pack("<fff", *volume.spacing)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(volume.data.astype("<f4").tobytes())
    if ground_truth is not None:
        p = ground_truth.plane
        meta = {
            "plane": {"r": p.r, "eta": p.eta, "theta": p.theta},
            "label": int(ground_truth.label),
            "label_names": list(label_names if label_names is not None else DEFAULT_LABELS),
            "seed": int(seed) if seed is not None else 0,
        }
        with open(_sidecar_path(path), "w") as fh:
            json.dump(meta, fh, sort_keys=True, indent=2)
            fh.write("\n")


def load_volume(path):
    """Read a volume file; returns (Volume, GroundTruth or None, meta or None)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 32:
        raise VolumeFormatError("file shorter than the 32-byte header")
    if blob[:4] != MAGIC:
        raise VolumeFormatError("bad magic; not a PDVF volume")
    version, nx, ny, nz = struct.unpack("<IIII", blob[4:20])
    if version != FORMAT_VERSION:
        raise VolumeFormatError(f"unsupported format version {version}")
    spacing = struct.unpack("<fff", blob[20:32])
    expected = nx * ny * nz * 4
    payload = blob[32:]
    if len(payload) != expected:
        raise VolumeFormatError(
            f"payload holds {len(payload) // 4} floats, expected {nx * ny * nz}")
    data = np.frombuffer(payload, dtype="<f4").reshape(nz, ny, nx)
    volume = Volume(dims=(nx, ny, nz), spacing=tuple(float(s) for s in spacing),
                    data=data.copy())

    meta_path = _sidecar_path(path)
    try:
        with open(meta_path) as fh:
            meta = json.load(fh)
    except FileNotFoundError:
        return volume, None, None
    plane = PlaneParam(meta["plane"]["r"], meta["plane"]["eta"], meta["plane"]["theta"])
    return volume, GroundTruth(plane=plane, label=int(meta["label"])), meta
