"""Pure numpy propagation kernel (fallback for the compiled ``_kernel``).

Scheme, per time step n -> n+1 and node j of a section with constant
coefficients:

    S'_j = E S_j + c (a_j + a'_j)                     (exact exponential step)
    a'_j = a'_{j-1} - k (S'_{j-1} + S'_j)             (trapezoid along z)

Eliminating S' gives a first-order linear recurrence in j for a', solved
here with cumulative products; the compiled kernel walks it node by node.
``wz`` holds the quadrature weights used for the stored spin-wave energy.
"""

import numpy as np


def propagate(a_in, E, c, kz, kick_steps, kick_values, nz, wz, inv_b, snap_steps):
    a_in = np.asarray(a_in, dtype=complex)
    nt = a_in.shape[0]
    M = E.shape[1] if E.ndim == 2 and E.shape[0] else kick_values.shape[1]
    npts = nz + 1
    N = M * npts

    first = np.zeros(N, dtype=bool)
    first[::npts] = True
    w = np.tile(np.asarray(wz, dtype=float), M)

    a = np.full(N, a_in[0], dtype=complex)
    S = np.zeros(N, dtype=complex)
    a_out = np.empty(nt, dtype=complex)
    spin = np.zeros(nt)
    a_out[0] = a_in[0]

    snap_steps = list(np.asarray(snap_steps, dtype=np.int64))
    snap_a = np.zeros((len(snap_steps), M, npts), dtype=complex)
    snap_S = np.zeros((len(snap_steps), M, npts), dtype=complex)
    kicks = {int(k): np.repeat(np.asarray(v), npts) for k, v in zip(kick_steps, kick_values)}
    si = 0

    for n in range(nt - 1):
        if n in kicks:
            S = S * kicks[n]
        while si < len(snap_steps) and snap_steps[si] == n:
            snap_a[si] = a.reshape(M, npts)
            snap_S[si] = S.reshape(M, npts)
            si += 1
        En = np.repeat(E[n], npts)
        cn = np.repeat(c[n], npts)
        k = kz[n]
        F = En * S + cn * a
        denom = 1.0 + k * cn
        alpha = (1.0 - k * cn) / denom
        beta = np.empty(N, dtype=complex)
        beta[1:] = -k * (F[:-1] + F[1:]) / denom[1:]
        alpha[first] = 1.0
        beta[first] = 0.0
        beta[0] = 0.0
        alpha[0] = 1.0
        P = np.cumprod(alpha)
        a = P * (a_in[n + 1] + np.cumsum(beta / P))
        S = F + cn * a
        a_out[n + 1] = a[-1]
        spin[n + 1] = inv_b * np.sum(w * np.abs(S) ** 2)

    while si < len(snap_steps) and snap_steps[si] == nt - 1:
        snap_a[si] = a.reshape(M, npts)
        snap_S[si] = S.reshape(M, npts)
        si += 1
    return a_out, spin, snap_a, snap_S
