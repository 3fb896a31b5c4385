"""Levenberg-Marquardt damped least squares with finite-difference Jacobians.

Marquardt's diagonal scaling is used for the damping term, which makes the
iteration invariant under rescaling of individual parameters and of the
residual vector.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class LMResult:
    x: np.ndarray
    residuals: np.ndarray
    jac: np.ndarray
    cost: float
    n_iter: int
    converged: bool
    message: str
    grad_norm: float


def fd_jacobian(fun, x, r0=None, rel_step=1e-6, scale=None):
    """Central-difference Jacobian of ``fun`` at ``x``.

    The step for parameter i is ``rel_step * max(|x_i|, scale_i)``.
    """
    x = np.asarray(x, dtype=float)
    if scale is None:
        scale = np.ones_like(x)
    cols = []
    for i in range(x.size):
        h = rel_step * max(abs(x[i]), scale[i])
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        cols.append((np.asarray(fun(xp)) - np.asarray(fun(xm))) / (xp[i] - xm[i]))
    return np.column_stack(cols)


def _scaled_gradient(jac, r):
    """max_i |J_iᵀ r| / (‖J_i‖ ‖r‖): cosine between residual and each Jacobian column."""
    rn = np.linalg.norm(r)
    if rn == 0:
        return 0.0
    cn = np.linalg.norm(jac, axis=0)
    g = np.abs(jac.T @ r)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(cn > 0, g / (cn * rn), 0.0)
    return float(np.max(ratio)) if ratio.size else 0.0


def levenberg_marquardt(
    fun,
    x0,
    *,
    max_iter: int = 200,
    gtol: float = 1e-10,
    xtol: float = 1e-13,
    ftol: float = 1e-15,
    rel_step: float = 1e-6,
    scale=None,
    mu0: float = 1e-3,
) -> LMResult:
    """Minimise ½‖fun(x)‖².

    Stops successfully when the scaled gradient drops below ``gtol``, the
    relative step below ``xtol`` or the relative cost decrease below
    ``ftol``; otherwise ``converged`` is False after ``max_iter`` iterations.
    Non-finite residuals end the fit with ``converged=False``.
    """
    x = np.array(x0, dtype=float)
    if scale is None:
        scale = np.where(x != 0, np.abs(x), 1.0)
    r = np.asarray(fun(x), dtype=float)
    if not np.all(np.isfinite(r)):
        return LMResult(x, r, np.zeros((r.size, x.size)), np.inf, 0, False, "non-finite residuals at start", np.inf)
    cost = 0.5 * float(r @ r)
    jac = fd_jacobian(fun, x, r, rel_step, scale)
    mu, nu = mu0, 2.0
    n_iter = 0
    message = "maximum iterations reached"
    converged = False
    gnorm = _scaled_gradient(jac, r)

    while n_iter < max_iter:
        if cost == 0.0 or gnorm <= gtol:
            converged, message = True, "gradient tolerance reached"
            break
        n_iter += 1
        a = jac.T @ jac
        g = jac.T @ r
        diag = np.diag(a).copy()
        diag[diag <= 0] = np.finfo(float).tiny
        try:
            step = np.linalg.solve(a + mu * np.diag(diag), -g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(a + mu * np.diag(diag), -g, rcond=None)[0]
        x_new = x + step
        r_new = np.asarray(fun(x_new), dtype=float)
        cost_new = 0.5 * float(r_new @ r_new) if np.all(np.isfinite(r_new)) else np.inf
        predicted = -(step @ g) - 0.5 * step @ (a @ step)
        rho = (cost - cost_new) / predicted if predicted > 0 else -1.0

        if rho > 0:
            small_step = np.linalg.norm(step) <= xtol * (np.linalg.norm(x) + xtol)
            small_gain = (cost - cost_new) <= ftol * cost
            x, r, cost = x_new, r_new, cost_new
            jac = fd_jacobian(fun, x, r, rel_step, scale)
            gnorm = _scaled_gradient(jac, r)
            mu *= max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3)
            nu = 2.0
            if small_step or small_gain:
                converged, message = True, "step or cost change below tolerance"
                break
        else:
            if np.linalg.norm(step) <= xtol * (np.linalg.norm(x) + xtol):
                converged, message = True, "no further decrease possible at machine precision"
                break
            mu *= nu
            nu *= 2.0
            if not np.isfinite(mu) or mu > 1e300:
                message = "damping diverged"
                break
    else:
        if gnorm <= gtol:
            converged, message = True, "gradient tolerance reached"

    return LMResult(x, r, jac, cost, n_iter, converged, message, gnorm)


def covariance(jac, residuals, absolute_sigma=False):
    """Parameter covariance (JᵀJ)⁻¹, scaled by the reduced χ² unless ``absolute_sigma``."""
    n, p = jac.shape
    cov = np.linalg.pinv(jac.T @ jac)
    if not absolute_sigma:
        dof = max(n - p, 1)
        cov = cov * float(residuals @ residuals) / dof
    return cov
