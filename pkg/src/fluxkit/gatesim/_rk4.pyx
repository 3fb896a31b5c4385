# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled fixed-step RK4 propagator for a driven few-level system.

Mirrors ``_rk4_py.propagate`` exactly; see that module for the equations.
"""
import numpy as np

from libc.math cimport M_PI, cos

DEF MAXN = 16


cdef inline double _shape(double t_loc, double t_glob, double t_g, double f_d,
                          double phase) noexcept nogil:
    return 0.5 * (1.0 - cos(2.0 * M_PI * t_loc / t_g)) * cos(2.0 * M_PI * f_d * t_glob + phase)


cdef inline void _rhs(int n, const double* e, const double complex* d, double s,
                      const double complex* psi, double complex* out) noexcept nogil:
    cdef int i, j
    cdef double complex acc
    cdef double complex mtwopi_i = -2.0j * M_PI
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc = acc + d[i * n + j] * psi[j]
        out[i] = mtwopi_i * (e[i] * psi[i] + s * acc)


def propagate(const double[::1] energies, const double complex[:, ::1] drive,
              const double[::1] eps, const double complex[:, ::1] psi0, double t_g, double f_d, double phase,
              long n_steps, long n_pulses=1):
    """Integrate a batch of initial states; returns an array shaped like ``psi0``."""
    cdef int n = energies.shape[0]
    cdef Py_ssize_t nb = psi0.shape[0]
    if n > MAXN:
        raise ValueError(f"compiled kernel supports at most {MAXN} levels")
    if drive.shape[0] != n or drive.shape[1] != n or psi0.shape[1] != n or eps.shape[0] != nb:
        raise ValueError("inconsistent array shapes")

    out_arr = np.array(psi0, dtype=np.complex128, copy=True)
    cdef double complex[:, ::1] out = out_arr
    cdef double complex psi[MAXN]
    cdef double complex k1[MAXN]
    cdef double complex k2[MAXN]
    cdef double complex k3[MAXN]
    cdef double complex k4[MAXN]
    cdef double complex tmp[MAXN]
    cdef double dt = t_g / n_steps
    cdef double half = 0.5 * dt
    cdef double t_loc, t_glob, t0, s0, s_mid, s1, amp
    cdef Py_ssize_t b
    cdef long p, k
    cdef int i
    cdef const double* e = &energies[0]
    cdef const double complex* d = &drive[0, 0]

    with nogil:
        for b in range(nb):
            amp = eps[b]
            for i in range(n):
                psi[i] = out[b, i]
            for p in range(n_pulses):
                t0 = p * t_g
                for k in range(n_steps):
                    t_loc = k * dt
                    t_glob = t0 + t_loc
                    s0 = amp * _shape(t_loc, t_glob, t_g, f_d, phase)
                    s_mid = amp * _shape(t_loc + half, t_glob + half, t_g, f_d, phase)
                    s1 = amp * _shape(t_loc + dt, t_glob + dt, t_g, f_d, phase)

                    _rhs(n, e, d, s0, psi, k1)
                    for i in range(n):
                        tmp[i] = psi[i] + half * k1[i]
                    _rhs(n, e, d, s_mid, tmp, k2)
                    for i in range(n):
                        tmp[i] = psi[i] + half * k2[i]
                    _rhs(n, e, d, s_mid, tmp, k3)
                    for i in range(n):
                        tmp[i] = psi[i] + dt * k3[i]
                    _rhs(n, e, d, s1, tmp, k4)
                    for i in range(n):
                        psi[i] = psi[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            for i in range(n):
                out[b, i] = psi[i]
    return out_arr
