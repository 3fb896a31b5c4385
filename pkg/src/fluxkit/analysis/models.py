"""Model functions shared by the fitters and the synthetic generators.

Times are in µs, frequencies of oscillations in MHz.
"""
import numpy as np


def exponential(t, a, b, tau):
    return a * np.exp(-t / tau) + b


def gaussian_decay(t, a, b, tau):
    return a * np.exp(-((t / tau) ** 2)) + b


def damped_cosine(t, a, b, tau, f, phi):
    return a * np.exp(-t / tau) * np.cos(2 * np.pi * f * t + phi) + b


def lorentzian(x, f0, fwhm, depth, offset):
    hw2 = (0.5 * fwhm) ** 2
    return offset + depth * hw2 / ((x - f0) ** 2 + hw2)


def rb_decay(m, a, b, p):
    return a + b * np.power(p, m)


MODELS = {
    "exp": (exponential, ("A", "B", "T")),
    "gauss": (gaussian_decay, ("A", "B", "T")),
    "cos": (damped_cosine, ("A", "B", "T", "f", "phi")),
    "lorentz": (lorentzian, ("f0", "fwhm", "depth", "offset")),
    "rb": (rb_decay, ("A", "B", "p")),
}
