"""Damped Newton iteration shared by the space-time and time-stepping solvers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NewtonDiverged

# residual tolerances used by default for linear / nonlinear problems
DEFAULT_TOL_LINEAR = 1e-10
DEFAULT_TOL_NONLINEAR = 1e-8

_MAX_HALVINGS = 30


@dataclass(frozen=True)
class NewtonOptions:
    tol_residual: float = DEFAULT_TOL_NONLINEAR
    max_iters: int = 25
    damping: bool = True
    min_step: float = 1e-10

    def __post_init__(self):
        if not self.tol_residual > 0:
            raise ValueError("tol_residual must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.min_step > 0:
            raise ValueError("min_step must be positive")


def damped_newton(x0, residual, solve_step, opts: NewtonOptions):
    """Run Newton with halving line search on the sup-norm of the residual.

    residual(x) -> array, solve_step(x, r) -> dx solving J(x) dx = -r.
    Returns (x, trace); raises NewtonDiverged with the residual trace.
    """
    x = np.array(x0, dtype=float, copy=True)
    r = residual(x)
    rn = float(np.max(np.abs(r))) if r.size else 0.0
    trace = [rn]
    for _ in range(opts.max_iters):
        if rn <= opts.tol_residual:
            return x, trace
        dx = solve_step(x, r)
        lam = 1.0
        accepted = False
        for _h in range(_MAX_HALVINGS + 1):
            xn = x + lam * dx
            r_new = residual(xn)
            rn_new = float(np.max(np.abs(r_new)))
            if np.isfinite(rn_new) and (rn_new < rn or not opts.damping):
                accepted = True
                break
            lam *= 0.5
            if lam < opts.min_step:
                break
        if not accepted:
            raise NewtonDiverged(
                f"line search stalled at residual {rn:.3e}", trace
            )
        x, r, rn = xn, r_new, rn_new
        trace.append(rn)
    if rn <= opts.tol_residual:
        return x, trace
    raise NewtonDiverged(
        f"no convergence in {opts.max_iters} iterations, residual {rn:.3e}", trace
    )
