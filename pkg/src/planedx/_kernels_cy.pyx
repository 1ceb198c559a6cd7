# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython sampling kernels; see _kernels_py for the contract."""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor

BACKEND = "cython"


cdef inline double _corner(const float[:, :, ::1] data, Py_ssize_t nx,
                           Py_ssize_t ny, Py_ssize_t nz, Py_ssize_t i,
                           Py_ssize_t j, Py_ssize_t k) noexcept nogil:
    if i < 0 or i >= nx or j < 0 or j >= ny or k < 0 or k >= nz:
        return 0.0
    return <double>data[k, j, i]


cdef inline double _sample(const float[:, :, ::1] data, Py_ssize_t nx,
                           Py_ssize_t ny, Py_ssize_t nz, double gx,
                           double gy, double gz) noexcept nogil:
    cdef Py_ssize_t i0 = <Py_ssize_t>floor(gx)
    cdef Py_ssize_t j0 = <Py_ssize_t>floor(gy)
    cdef Py_ssize_t k0 = <Py_ssize_t>floor(gz)
    cdef double fx = gx - i0
    cdef double fy = gy - j0
    cdef double fz = gz - k0
    cdef double c000 = _corner(data, nx, ny, nz, i0, j0, k0)
    cdef double c100 = _corner(data, nx, ny, nz, i0 + 1, j0, k0)
    cdef double c010 = _corner(data, nx, ny, nz, i0, j0 + 1, k0)
    cdef double c110 = _corner(data, nx, ny, nz, i0 + 1, j0 + 1, k0)
    cdef double c001 = _corner(data, nx, ny, nz, i0, j0, k0 + 1)
    cdef double c101 = _corner(data, nx, ny, nz, i0 + 1, j0, k0 + 1)
    cdef double c011 = _corner(data, nx, ny, nz, i0, j0 + 1, k0 + 1)
    cdef double c111 = _corner(data, nx, ny, nz, i0 + 1, j0 + 1, k0 + 1)
    cdef double low = (c000 * (1.0 - fx) + c100 * fx) * (1.0 - fy) \
        + (c010 * (1.0 - fx) + c110 * fx) * fy
    cdef double high = (c001 * (1.0 - fx) + c101 * fx) * (1.0 - fy) \
        + (c011 * (1.0 - fx) + c111 * fx) * fy
    return low * (1.0 - fz) + high * fz


def trilinear_points(const float[:, :, ::1] data, spacing, points):
    cdef Py_ssize_t nz = data.shape[0]
    cdef Py_ssize_t ny = data.shape[1]
    cdef Py_ssize_t nx = data.shape[2]
    cdef double sx = spacing[0]
    cdef double sy = spacing[1]
    cdef double sz = spacing[2]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pts = \
        np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 3)
    cdef Py_ssize_t n = pts.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double ox = (nx - 1) / 2.0
    cdef double oy = (ny - 1) / 2.0
    cdef double oz = (nz - 1) / 2.0
    cdef Py_ssize_t idx
    with nogil:
        for idx in range(n):
            out[idx] = _sample(data, nx, ny, nz,
                               pts[idx, 0] / sx + ox,
                               pts[idx, 1] / sy + oy,
                               pts[idx, 2] / sz + oz)
    return out


def sample_plane(const float[:, :, ::1] data, spacing, corner, du, dv,
                 Py_ssize_t rows, Py_ssize_t cols):
    cdef Py_ssize_t nz = data.shape[0]
    cdef Py_ssize_t ny = data.shape[1]
    cdef Py_ssize_t nx = data.shape[2]
    cdef double sx = spacing[0]
    cdef double sy = spacing[1]
    cdef double sz = spacing[2]
    cdef double cx = corner[0], cy = corner[1], cz = corner[2]
    cdef double dux = du[0], duy = du[1], duz = du[2]
    cdef double dvx = dv[0], dvy = dv[1], dvz = dv[2]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = \
        np.empty((rows, cols), dtype=np.float64)
    cdef double ox = (nx - 1) / 2.0
    cdef double oy = (ny - 1) / 2.0
    cdef double oz = (nz - 1) / 2.0
    cdef Py_ssize_t i, j
    cdef double px, py, pz
    with nogil:
        for i in range(rows):
            for j in range(cols):
                px = cx + j * dux + i * dvx
                py = cy + j * duy + i * dvy
                pz = cz + j * duz + i * dvz
                out[i, j] = _sample(data, nx, ny, nz,
                                    px / sx + ox, py / sy + oy, pz / sz + oz)
    return out
