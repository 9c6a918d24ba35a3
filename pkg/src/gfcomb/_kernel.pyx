# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled propagation kernel; same contract as ``_kernel_py.propagate``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def propagate(a_in, E, c, kz, kick_steps, kick_values, Py_ssize_t nz, wz,
              double inv_b, snap_steps):
    cdef double complex[::1] ain = np.ascontiguousarray(a_in, dtype=np.complex128)
    cdef Py_ssize_t nt = ain.shape[0]
    cdef double complex[:, ::1] Ev = np.ascontiguousarray(E, dtype=np.complex128)
    cdef double complex[:, ::1] cv = np.ascontiguousarray(c, dtype=np.complex128)
    cdef double[::1] kv = np.ascontiguousarray(kz, dtype=np.float64)
    cdef long long[::1] ks = np.ascontiguousarray(kick_steps, dtype=np.int64)
    cdef double complex[:, ::1] kvals = np.ascontiguousarray(kick_values, dtype=np.complex128)
    cdef long long[::1] ss = np.ascontiguousarray(snap_steps, dtype=np.int64)
    cdef double[::1] w = np.ascontiguousarray(wz, dtype=np.float64)
    cdef Py_ssize_t M = kvals.shape[1] if Ev.shape[0] == 0 else Ev.shape[1]
    cdef Py_ssize_t npts = nz + 1

    a_np = np.empty((M, npts), dtype=np.complex128)
    a_np[...] = a_in[0]
    S_np = np.zeros((M, npts), dtype=np.complex128)
    F_np = np.zeros(npts, dtype=np.complex128)
    out_np = np.empty(nt, dtype=np.complex128)
    spin_np = np.zeros(nt)
    snap_a_np = np.zeros((ss.shape[0], M, npts), dtype=np.complex128)
    snap_S_np = np.zeros((ss.shape[0], M, npts), dtype=np.complex128)

    cdef double complex[:, ::1] a = a_np
    cdef double complex[:, ::1] S = S_np
    cdef double complex[::1] F = F_np
    cdef double complex[::1] out = out_np
    cdef double[::1] spin = spin_np
    cdef double complex[:, :, ::1] snap_a = snap_a_np
    cdef double complex[:, :, ::1] snap_S = snap_S_np

    cdef Py_ssize_t n, m, j, ki = 0, si = 0
    cdef Py_ssize_t nk = ks.shape[0], ns = ss.shape[0]
    cdef double complex En, cn, kick, a_prev, S_prev, inv_den, one_minus
    cdef double k, acc

    out[0] = ain[0]
    with nogil:
        for n in range(nt - 1):
            while ki < nk and ks[ki] < n:
                ki += 1
            while ki < nk and ks[ki] == n:
                for m in range(M):
                    kick = kvals[ki, m]
                    for j in range(npts):
                        S[m, j] = S[m, j] * kick
                ki += 1
            while si < ns and ss[si] == n:
                for m in range(M):
                    for j in range(npts):
                        snap_a[si, m, j] = a[m, j]
                        snap_S[si, m, j] = S[m, j]
                si += 1

            k = kv[n]
            a_prev = ain[n + 1]
            acc = 0.0
            for m in range(M):
                En = Ev[n, m]
                cn = cv[n, m]
                inv_den = 1.0 / (1.0 + k * cn)
                one_minus = 1.0 - k * cn
                for j in range(npts):
                    F[j] = En * S[m, j] + cn * a[m, j]
                # first node continues from the previous section (gaps are transparent)
                a[m, 0] = a_prev
                S[m, 0] = F[0] + cn * a_prev
                for j in range(1, npts):
                    a[m, j] = (a[m, j - 1] * one_minus - k * (F[j - 1] + F[j])) * inv_den
                    S[m, j] = F[j] + cn * a[m, j]
                a_prev = a[m, npts - 1]
                for j in range(npts):
                    acc = acc + w[j] * (S[m, j].real * S[m, j].real + S[m, j].imag * S[m, j].imag)
            out[n + 1] = a_prev
            spin[n + 1] = inv_b * acc

    while si < ns and ss[si] == nt - 1:
        snap_a_np[si] = a_np
        snap_S_np[si] = S_np
        si += 1
    return out_np, spin_np, snap_a_np, snap_S_np
