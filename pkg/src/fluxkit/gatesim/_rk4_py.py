"""Pure numpy fixed-step RK4 propagator (fallback when the compiled kernel is absent).

Solves, for every batch member b,

    dψ/dt = −2πi [E ψ + ε_b · s(t) · D ψ]

with E the diagonal level energies (GHz), D the drive matrix, t in ns and

    s(t) = ½(1 − cos(2π t_loc / t_g)) · cos(2π f_d t + phase)

where t_loc is the time since the start of the current pulse and t the time
since the start of the train, so the carrier stays phase-continuous across
back-to-back pulses. The batch is vectorised; the time loop is Python.
"""
import math

import numpy as np


def _shape(t_loc, t_glob, t_g, f_d, phase):
    return 0.5 * (1.0 - math.cos(2.0 * math.pi * t_loc / t_g)) * math.cos(2.0 * math.pi * f_d * t_glob + phase)


def propagate(energies, drive, eps, psi0, t_g, f_d, phase, n_steps, n_pulses=1):
    energies = np.ascontiguousarray(energies, dtype=float)
    drive_t = np.ascontiguousarray(drive, dtype=complex).T
    eps = np.ascontiguousarray(eps, dtype=float)
    psi = np.array(psi0, dtype=complex, copy=True)
    if psi.shape != (eps.shape[0], energies.shape[0]):
        raise ValueError("inconsistent array shapes")
    mtwopi_i = -2j * math.pi
    dt = t_g / n_steps
    half = 0.5 * dt
    amp = eps[:, None]

    def rhs(s, y):
        return mtwopi_i * (energies * y + (s * amp) * (y @ drive_t))

    for p in range(n_pulses):
        t0 = p * t_g
        for k in range(n_steps):
            t_loc = k * dt
            t_glob = t0 + t_loc
            s0 = _shape(t_loc, t_glob, t_g, f_d, phase)
            s_mid = _shape(t_loc + half, t_glob + half, t_g, f_d, phase)
            s1 = _shape(t_loc + dt, t_glob + dt, t_g, f_d, phase)
            k1 = rhs(s0, psi)
            k2 = rhs(s_mid, psi + half * k1)
            k3 = rhs(s_mid, psi + half * k2)
            k4 = rhs(s1, psi + dt * k3)
            psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return psi
