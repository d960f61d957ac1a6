# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled ``lhs_batch``: identical contract to ``_kernels_py.lhs_batch``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, sin

cnp.import_array()

ctypedef double complex cplx

cdef double R2 = 0.7071067811865475244


cdef inline void _triad(double theta, double phi, cplx v[3][2][2]) noexcept nogil:
    cdef double c = cos(0.5 * theta)
    cdef double s = sin(0.5 * theta)
    cdef cplx e = cos(phi) - 1j * sin(phi)
    cdef cplx zp0 = c, zp1 = e * s
    cdef cplx zm0 = s, zm1 = -e * c
    v[0][0][0] = R2 * (zp0 + zm0); v[0][0][1] = R2 * (zp1 + zm1)
    v[0][1][0] = R2 * (zp0 - zm0); v[0][1][1] = R2 * (zp1 - zm1)
    v[1][0][0] = R2 * (zp0 + 1j * zm0); v[1][0][1] = R2 * (zp1 + 1j * zm1)
    v[1][1][0] = R2 * (zp0 - 1j * zm0); v[1][1][1] = R2 * (zp1 - 1j * zm1)
    v[2][0][0] = zp0; v[2][0][1] = zp1
    v[2][1][0] = zm0; v[2][1][1] = zm1


cdef inline void _coh(cplx s00, cplx s11, cplx s01, double out[3]) noexcept nogil:
    cdef double x = 2.0 * s01.real
    cdef double y = -2.0 * s01.imag
    cdef double z = (s00 - s11).real
    out[0] = sqrt(y * y + z * z)
    out[1] = sqrt(x * x + z * z)
    out[2] = sqrt(x * x + y * y)


cdef inline void _reduce(const cplx[:, ::1] rho, int sub, const cplx *w,
                         cplx *s00, cplx *s11, cplx *s01) noexcept nogil:
    # rho has Alice as the most significant qubit and a ``sub``-dim register below it
    cdef int q, p
    cdef cplx acc00 = 0, acc11 = 0, acc01 = 0, wq
    for q in range(sub):
        wq = w[q].conjugate()
        for p in range(sub):
            acc00 = acc00 + wq * rho[q, p] * w[p]
            acc11 = acc11 + wq * rho[sub + q, sub + p] * w[p]
            acc01 = acc01 + wq * rho[q, sub + p] * w[p]
    s00[0] = acc00
    s11[0] = acc11
    s01[0] = acc01


def lhs_batch(rho, rho_ab, rho_ac, frames):
    cdef const cplx[:, ::1] r8 = np.ascontiguousarray(rho, dtype=np.complex128)
    cdef const cplx[:, ::1] rab = np.ascontiguousarray(rho_ab, dtype=np.complex128)
    cdef const cplx[:, ::1] rac = np.ascontiguousarray(rho_ac, dtype=np.complex128)
    cdef const double[:, ::1] fr = np.ascontiguousarray(np.atleast_2d(frames), dtype=np.float64)
    from ._catalog import PAIR_MASKS
    cdef const double[:, :, :, ::1] masks = np.ascontiguousarray(PAIR_MASKS, dtype=np.float64)
    cdef Py_ssize_t n_frames = fr.shape[0]
    result = np.zeros((n_frames, 10), dtype=np.float64)
    cdef double[:, ::1] out = result
    cdef cplx vb[3][2][2]
    cdef cplx vc[3][2][2]
    cdef cplx w[4]
    cdef double q[3][3][3]
    cdef double qb[3][3]
    cdef double qc[3][3]
    cdef double coh[3]
    cdef cplx s00, s11, s01
    cdef Py_ssize_t n
    cdef int i, j, k, b, c, m, tag
    cdef double acc
    with nogil:
        for n in range(n_frames):
            _triad(fr[n, 0], fr[n, 1], vb)
            _triad(fr[n, 2], fr[n, 3], vc)
            for i in range(3):
                for j in range(3):
                    for k in range(3):
                        q[i][j][k] = 0.0
                for k in range(3):
                    qb[i][k] = 0.0
                    qc[i][k] = 0.0
            for i in range(3):
                for b in range(2):
                    for j in range(3):
                        for c in range(2):
                            w[0] = vb[i][b][0] * vc[j][c][0]
                            w[1] = vb[i][b][0] * vc[j][c][1]
                            w[2] = vb[i][b][1] * vc[j][c][0]
                            w[3] = vb[i][b][1] * vc[j][c][1]
                            _reduce(r8, 4, w, &s00, &s11, &s01)
                            _coh(s00, s11, s01, coh)
                            for k in range(3):
                                q[i][j][k] += coh[k]
                    _reduce(rab, 2, &vb[i][b][0], &s00, &s11, &s01)
                    _coh(s00, s11, s01, coh)
                    for k in range(3):
                        qb[i][k] += coh[k]
                    _reduce(rac, 2, &vc[i][b][0], &s00, &s11, &s01)
                    _coh(s00, s11, s01, coh)
                    for k in range(3):
                        qc[i][k] += coh[k]
            for m in range(6):
                acc = 0.0
                for i in range(3):
                    for j in range(3):
                        for k in range(3):
                            acc += masks[m, i, j, k] * q[i][j][k]
                out[n, m] = acc
            for tag in range(2):
                for m in range(2):
                    acc = 0.0
                    for i in range(3):
                        for k in range(3):
                            if (i == k) == (m == 0):
                                acc += qb[i][k] if tag == 0 else qc[i][k]
                    out[n, 6 + 2 * tag + m] = acc
    return result
