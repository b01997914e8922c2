"""Numba-compiled inner loops.

Everything here is pure numerics on contiguous arrays: a 4x4 complex
Hermitian Jacobi eigensolver, batched propagator exponentials, and the
per-realization sliced-evolution loop.  The sandbox runs on a single
core, so these loops are the difference between minutes and hours.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def eigh4(a, w, v):
    """In-place cyclic Jacobi eigendecomposition of a 4x4 Hermitian matrix.

    `a` is destroyed (diagonalized), eigenvalues land in `w`, eigenvectors
    in the columns of `v`.  Converges to ~1e-15 in at most a few sweeps.
    """
    n = 4
    for i in range(n):
        for j in range(n):
            v[i, j] = 1.0 + 0j if i == j else 0j
    for _sweep in range(16):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += abs(a[p, q].real) + abs(a[p, q].imag)
        if off < 1e-14 * (1.0 + abs(a[0, 0].real)):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq.real) + abs(apq.imag) < 1e-300:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                mag = abs(apq)
                phase = apq / mag
                tau = (aqq - app) / (2.0 * mag)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                sp = s * phase
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - np.conj(sp) * akq
                    a[k, q] = sp * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - sp * aqk
                    a[q, k] = np.conj(sp) * apk + c * aqk
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - np.conj(sp) * vkq
                    v[k, q] = sp * vkp + c * vkq
    for i in range(n):
        w[i] = a[i, i].real


@njit(cache=True)
def eigh4_batch(h):
    """Eigendecomposition of a stack of 4x4 Hermitian matrices.

    Returns (w, v) with shapes (..., 4) and (..., 4, 4); `h` is not modified.
    """
    b = h.shape[0]
    w = np.empty((b, 4), np.float64)
    v = np.empty((b, 4, 4), np.complex128)
    a = np.empty((4, 4), np.complex128)
    wi = np.empty(4, np.float64)
    vi = np.empty((4, 4), np.complex128)
    for i in range(b):
        for r in range(4):
            for c in range(4):
                a[r, c] = h[i, r, c]
        eigh4(a, wi, vi)
        for r in range(4):
            w[i, r] = wi[r]
            for c in range(4):
                v[i, r, c] = vi[r, c]
    return w, v


@njit(cache=True)
def expm_hermitian_batch(h, dt):
    """exp(-1j*dt*h) for a stack (b,4,4) of Hermitian matrices."""
    b = h.shape[0]
    out = np.empty((b, 4, 4), np.complex128)
    a = np.empty((4, 4), np.complex128)
    w = np.empty(4, np.float64)
    v = np.empty((4, 4), np.complex128)
    ph = np.empty(4, np.complex128)
    for i in range(b):
        for r in range(4):
            for c in range(4):
                a[r, c] = h[i, r, c]
        eigh4(a, w, v)
        for k in range(4):
            ph[k] = np.exp(-1j * dt * w[k])
        for r in range(4):
            for c in range(4):
                s = 0j
                for k in range(4):
                    s += v[r, k] * ph[k] * np.conj(v[c, k])
                out[i, r, c] = s
    return out


@njit(cache=True)
def hierarchy_rhs(y, out, h, up, down, damping, cup_row, cup_col, cdn_row, cdn_col):
    """Derivative of the (possibly rescaled) hierarchy stack.

    y        : (n_adm, 4, 4) current auxiliary blocks
    out      : (n_adm, 4, 4) output buffer
    up/down  : (n_adm, 4) neighbor indices, -1 where absent
    damping  : (n_adm,) sum_j n_j gam_j
    cup_*,cdn_* : (n_adm, 4) complex ladder coefficients; the row tables
        multiply V_j sigma (writes row j), the col tables sigma V_j
        (writes column j)
    """
    n = y.shape[0]
    for i in range(n):
        for r in range(4):
            for c in range(4):
                s = 0j
                for k in range(4):
                    s += h[r, k] * y[i, k, c] - y[i, r, k] * h[k, c]
                out[i, r, c] = -1j * s - damping[i] * y[i, r, c]
        for j in range(4):
            iu = up[i, j]
            if iu >= 0:
                aru = cup_row[i, j]
                acu = cup_col[i, j]
                for c in range(4):
                    out[i, j, c] += aru * y[iu, j, c]
                for r in range(4):
                    out[i, r, j] += acu * y[iu, r, j]
            idn = down[i, j]
            if idn >= 0:
                ard = cdn_row[i, j]
                acd = cdn_col[i, j]
                for c in range(4):
                    out[i, j, c] += ard * y[idn, j, c]
                for r in range(4):
                    out[i, r, j] += acd * y[idn, r, j]


@njit(cache=True)
def hierarchy_rk4(y, h, up, down, damping, cup_row, cup_col, cdn_row, cdn_col, dt, n_steps):
    """Advance the hierarchy stack in place by n_steps of classical RK4."""
    n = y.shape[0]
    k1 = np.empty((n, 4, 4), np.complex128)
    k2 = np.empty((n, 4, 4), np.complex128)
    k3 = np.empty((n, 4, 4), np.complex128)
    k4 = np.empty((n, 4, 4), np.complex128)
    tmp = np.empty((n, 4, 4), np.complex128)
    for _ in range(n_steps):
        hierarchy_rhs(y, k1, h, up, down, damping, cup_row, cup_col, cdn_row, cdn_col)
        for i in range(n):
            for r in range(4):
                for c in range(4):
                    tmp[i, r, c] = y[i, r, c] + 0.5 * dt * k1[i, r, c]
        hierarchy_rhs(tmp, k2, h, up, down, damping, cup_row, cup_col, cdn_row, cdn_col)
        for i in range(n):
            for r in range(4):
                for c in range(4):
                    tmp[i, r, c] = y[i, r, c] + 0.5 * dt * k2[i, r, c]
        hierarchy_rhs(tmp, k3, h, up, down, damping, cup_row, cup_col, cdn_row, cdn_col)
        for i in range(n):
            for r in range(4):
                for c in range(4):
                    tmp[i, r, c] = y[i, r, c] + dt * k3[i, r, c]
        hierarchy_rhs(tmp, k4, h, up, down, damping, cup_row, cup_col, cdn_row, cdn_col)
        for i in range(n):
            for r in range(4):
                for c in range(4):
                    y[i, r, c] += (dt / 6.0) * (
                        k1[i, r, c]
                        + 2.0 * k2[i, r, c]
                        + 2.0 * k3[i, r, c]
                        + k4[i, r, c]
                    )


@njit(cache=True)
def propagate_realizations(h_sys, shifts, dt, rho0, out_every, rho_out):
    """Sliced unitary evolution of a batch of noisy realizations.

    h_sys     : (4,4) complex Hermitian, shared drift Hamiltonian
    shifts    : (B, L, 4) float64, per-slice diagonal energy shifts
    dt        : slice duration
    rho0      : (4,4) complex initial state
    out_every : record the state every `out_every` slices
    rho_out   : (B, L//out_every + 1, 4, 4) complex output buffer

    Each slice propagator is the exact exponential of the Hermitian slice
    Hamiltonian, so every realization stays exactly unitary.
    """
    nb = shifts.shape[0]
    nl = shifts.shape[1]
    a = np.empty((4, 4), np.complex128)
    w = np.empty(4, np.float64)
    v = np.empty((4, 4), np.complex128)
    ph = np.empty(4, np.complex128)
    uj = np.empty((4, 4), np.complex128)
    u = np.empty((4, 4), np.complex128)
    tmp = np.empty((4, 4), np.complex128)
    for b in range(nb):
        for r in range(4):
            for c in range(4):
                u[r, c] = 1.0 + 0j if r == c else 0j
                rho_out[b, 0, r, c] = rho0[r, c]
        oi = 1
        for j in range(nl):
            for r in range(4):
                for c in range(4):
                    a[r, c] = h_sys[r, c]
            for r in range(4):
                a[r, r] += shifts[b, j, r]
            eigh4(a, w, v)
            for k in range(4):
                ph[k] = np.exp(-1j * dt * w[k])
            for r in range(4):
                for c in range(4):
                    s = 0j
                    for k in range(4):
                        s += v[r, k] * ph[k] * np.conj(v[c, k])
                    uj[r, c] = s
            for r in range(4):
                for c in range(4):
                    s = 0j
                    for k in range(4):
                        s += uj[r, k] * u[k, c]
                    tmp[r, c] = s
            for r in range(4):
                for c in range(4):
                    u[r, c] = tmp[r, c]
            if (j + 1) % out_every == 0:
                for r in range(4):
                    for c in range(4):
                        s = 0j
                        for k in range(4):
                            s += u[r, k] * rho0[k, c]
                        tmp[r, c] = s
                for r in range(4):
                    for c in range(4):
                        s = 0j
                        for k in range(4):
                            s += tmp[r, k] * np.conj(u[c, k])
                        rho_out[b, oi, r, c] = s
                oi += 1
