"""Pure-numpy sampling kernels (fallback for the Cython extension).

Both backends implement the same contract with the same arithmetic
ordering: volumes are float32 grids indexed (z, y, x), physical
coordinates are mm with the origin at the volume center, voxel centers
sit at index*spacing - (n-1)/2*spacing, and samples outside the grid of
voxel centers blend to 0 (zero padding).
"""

import numpy as np

BACKEND = "python"


def trilinear_points(data, spacing, points):
    """Trilinearly sample `points` (N, 3) physical mm from a (nz, ny, nx) grid."""
    nz, ny, nx = data.shape
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    gx = pts[:, 0] / spacing[0] + (nx - 1) / 2.0
    gy = pts[:, 1] / spacing[1] + (ny - 1) / 2.0
    gz = pts[:, 2] / spacing[2] + (nz - 1) / 2.0

    i0 = np.floor(gx).astype(np.int64)
    j0 = np.floor(gy).astype(np.int64)
    k0 = np.floor(gz).astype(np.int64)
    fx = gx - i0
    fy = gy - j0
    fz = gz - k0

    def corner(i, j, k):
        inside = (i >= 0) & (i < nx) & (j >= 0) & (j < ny) & (k >= 0) & (k < nz)
        v = np.zeros(pts.shape[0], dtype=np.float64)
        ii = np.where(inside, i, 0)
        jj = np.where(inside, j, 0)
        kk = np.where(inside, k, 0)
        v[inside] = data[kk[inside], jj[inside], ii[inside]].astype(np.float64)
        return v

    c000 = corner(i0, j0, k0)
    c100 = corner(i0 + 1, j0, k0)
    c010 = corner(i0, j0 + 1, k0)
    c110 = corner(i0 + 1, j0 + 1, k0)
    c001 = corner(i0, j0, k0 + 1)
    c101 = corner(i0 + 1, j0, k0 + 1)
    c011 = corner(i0, j0 + 1, k0 + 1)
    c111 = corner(i0 + 1, j0 + 1, k0 + 1)

    low = (c000 * (1.0 - fx) + c100 * fx) * (1.0 - fy) + (c010 * (1.0 - fx) + c110 * fx) * fy
    high = (c001 * (1.0 - fx) + c101 * fx) * (1.0 - fy) + (c011 * (1.0 - fx) + c111 * fx) * fy
    return low * (1.0 - fz) + high * fz


def sample_plane(data, spacing, corner, du, dv, rows, cols):
    """Sample a rows x cols pixel grid; pixel (i, j) sits at corner + j*du + i*dv."""
    jj = np.arange(cols, dtype=np.float64)
    ii = np.arange(rows, dtype=np.float64)
    pts = (np.asarray(corner, dtype=np.float64)[None, None, :]
           + jj[None, :, None] * np.asarray(du, dtype=np.float64)[None, None, :]
           + ii[:, None, None] * np.asarray(dv, dtype=np.float64)[None, None, :])
    return trilinear_points(data, spacing, pts.reshape(-1, 3)).reshape(rows, cols)
