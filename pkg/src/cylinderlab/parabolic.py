"""Limit parabolic reaction-diffusion dynamics.

Integrates gamma u_t = a u_xx - f(u) + g(t) with backward Euler; the
time-dependent forcing is sampled at the right endpoint of each step.
The implicit step is the gradient flow of the discrete energy behind
lyapunov_value, so for autonomous forcing the energy is non-increasing
whenever dt <= 2 lambda_min(gamma) / k_mono.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import AsymmetricA, MissingPotential, ShapeMismatch
from .forcing import Constant, Forcing, eval_forcing
from .model import (
    CouplingMatrices,
    Field,
    Nonlinearity,
    SpatialGrid,
    Trajectory,
    grad_cells,
    laplacian,
)
from .newton import NewtonOptions, damped_newton


@dataclass(frozen=True)
class StepOptions:
    dt: float = 1e-3
    newton: NewtonOptions = NewtonOptions()

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")


class _BandedStepper:
    """Assembles the banded residual/Jacobian of one backward-Euler step."""

    def __init__(self, sgrid: SpatialGrid, mats: CouplingMatrices, nl: Nonlinearity, dt: float):
        if mats.k != nl.k:
            raise ShapeMismatch(f"matrix k={mats.k} vs nonlinearity k={nl.k}")
        self.sgrid = sgrid
        self.mats = mats
        self.nl = nl
        self.dt = dt
        self.n = sgrid.n_interior
        self.k = mats.k
        self.hb = 2 * self.k - 1  # half bandwidth of the block-tridiagonal system

    def residual(self, v: np.ndarray, u: np.ndarray, gval: np.ndarray) -> np.ndarray:
        lap = laplacian(v, self.sgrid.h)
        r = (
            np.einsum("cd,nd->nc", self.mats.gamma, v - u) / self.dt
            - np.einsum("cd,nd->nc", self.mats.a, lap)
            + self.nl.f(v)
            - gval
        )
        return r

    def solve(self, v: np.ndarray, r: np.ndarray) -> np.ndarray:
        n, k, hb = self.n, self.k, self.hb
        h2 = self.sgrid.h**2
        N = n * k
        ab = np.zeros((2 * hb + 1, N))
        jac = self.nl.jac_f(v)  # (n, k, k)
        for c in range(k):
            for cp in range(k):
                diag = self.mats.gamma[c, cp] / self.dt + 2.0 * self.mats.a[c, cp] / h2
                # same-node block rows
                cols = np.arange(n) * k + cp
                ab[hb + (c - cp), cols] = diag + jac[:, c, cp]
                # neighbor blocks
                off = self.mats.a[c, cp] / h2
                cols_r = np.arange(1, n) * k + cp  # j = i+1
                ab[hb + (c - cp) - k, cols_r] += -off
                cols_l = np.arange(0, n - 1) * k + cp  # j = i-1
                ab[hb + (c - cp) + k, cols_l] += -off
        dx = solve_banded((hb, hb), ab, -r.ravel())
        return dx.reshape(n, k)


def implicit_step(
    u: Field,
    t: float,
    opts: StepOptions,
    mats: CouplingMatrices,
    nl: Nonlinearity,
    g: Forcing,
) -> Field:
    """One backward-Euler step from time t to t + dt."""
    stepper = _BandedStepper(u.grid, mats, nl, opts.dt)
    gval = eval_forcing(g, t + opts.dt).values
    u_arr = u.values

    def res(v):
        return stepper.residual(v, u_arr, gval)

    def step(v, r):
        return stepper.solve(v, r)

    v, _ = damped_newton(u_arr, res, step, opts.newton)
    return Field(u.grid, v)


def semigroup_evolve(
    u0: Field,
    t_end: float,
    opts: StepOptions,
    mats: CouplingMatrices,
    nl: Nonlinearity,
    g: Forcing,
    tau: float = 0.0,
) -> Trajectory:
    """March from tau to tau + t_end, returning every step."""
    if t_end < 0:
        raise ValueError("t_end must be >= 0")
    if t_end == 0:
        return Trajectory(u0.grid, np.array([tau]), u0.values[None])
    steps = max(1, int(math.ceil(t_end / opts.dt - 1e-12)))
    dt = t_end / steps
    eff = StepOptions(dt=dt, newton=opts.newton)
    stepper = _BandedStepper(u0.grid, mats, nl, dt)
    vals = np.empty((steps + 1, u0.grid.n_interior, u0.k))
    vals[0] = u0.values
    cur = u0.values
    for j in range(steps):
        t_next = tau + (j + 1) * dt
        gval = eval_forcing(g, t_next).values
        cur, _ = damped_newton(
            cur,
            lambda v, _c=cur, _g=gval: stepper.residual(v, _c, _g),
            stepper.solve,
            eff.newton,
        )
        vals[j + 1] = cur
    times = tau + dt * np.arange(steps + 1)
    return Trajectory(u0.grid, times, vals)


def variational_evolve(
    base: Trajectory,
    xi: Field,
    opts: StepOptions,
    mats: CouplingMatrices,
    nl: Nonlinearity,
) -> Trajectory:
    """Exact tangent of the discrete backward-Euler flow along a base trajectory.

    Each step solves (gamma/dt - a Delta + f'(base_{j+1})) w' = gamma w / dt,
    the linearization at the new base point, so divided differences of the
    nonlinear flow converge to this at rate O(delta).
    """
    if base.grid != xi.grid or base.k != xi.k:
        raise ShapeMismatch("xi does not match the base trajectory")
    steps = base.times.shape[0] - 1
    vals = np.empty_like(base.values)
    vals[0] = xi.values
    if steps:
        stepper = _BandedStepper(base.grid, mats, nl, float(base.times[1] - base.times[0]))
        w = xi.values
        for j in range(steps):
            rhs = np.einsum("cd,nd->nc", mats.gamma, w) / stepper.dt
            # J(base_{j+1}) w' = rhs, one direct banded solve
            w = stepper.solve(base.values[j + 1], -rhs)
            vals[j + 1] = w
    return Trajectory(base.grid, base.times.copy(), vals)


def lyapunov_value(u: Field, mats: CouplingMatrices, nl: Nonlinearity, gbar: Field) -> float:
    """Energy integral a grad u . grad u + 2 F(u) + 2 gbar . u over omega.

    Gradient term by the cell midpoint rule, the rest by trapezoid; this is
    exactly twice the discrete energy whose gradient flow the implicit step
    integrates.
    """
    if nl.potential_F is None:
        raise MissingPotential(f"nonlinearity {nl.name} has no potential")
    if not np.allclose(mats.a, mats.a.T, atol=1e-12):
        raise AsymmetricA("a must be symmetric for the energy to exist")
    if u.grid != gbar.grid or u.k != gbar.k:
        raise ShapeMismatch("gbar does not match u")
    h = u.grid.h
    d = grad_cells(u.values, h)
    grad_term = float(np.einsum("nc,cd,nd->", d, mats.a, d)) * h
    zero = np.zeros((1, u.k))
    f_interior = float(np.sum(nl.potential_F(u.values)))
    f_boundary = float(nl.potential_F(zero)[0])  # both endpoints at half weight
    pot_term = 2.0 * h * (f_interior + f_boundary)
    force_term = 2.0 * h * float(np.sum(gbar.values * u.values))
    return grad_term + pot_term + force_term


@dataclass(frozen=True)
class LimitContext:
    """Evolution context for the limit semigroup, duck-typed with the
    elliptic ProcessContext for the dynamics layer."""

    sgrid: SpatialGrid
    mats: CouplingMatrices
    nl: Nonlinearity
    forcing: Forcing
    step: StepOptions = StepOptions()

    @property
    def eps(self) -> float:
        return 0.0

    def map(self, u0: Field, tau: float, t: float) -> Field:
        if t < tau:
            raise ValueError("t must be >= tau")
        if t == tau:
            return u0
        traj = semigroup_evolve(u0, t - tau, self.step, self.mats, self.nl, self.forcing, tau=tau)
        return traj.field(-1)

    def evolve(self, u0: Field, tau: float, t_end: float, stride: float) -> Trajectory:
        """Forward evolution keeping slices every `stride` time units."""
        traj = semigroup_evolve(u0, t_end, self.step, self.mats, self.nl, self.forcing, tau=tau)
        dt = float(traj.times[1] - traj.times[0]) if traj.times.shape[0] > 1 else stride
        every = max(1, int(round(stride / dt)))
        idx = np.arange(0, traj.times.shape[0], every)
        if idx[-1] != traj.times.shape[0] - 1:
            idx = np.append(idx, traj.times.shape[0] - 1)
        return Trajectory(traj.grid, traj.times[idx], traj.values[idx])


def limit_context_from_mean(
    sgrid: SpatialGrid,
    mats: CouplingMatrices,
    nl: Nonlinearity,
    gbar: Field,
    step: StepOptions = StepOptions(),
) -> LimitContext:
    """Limit dynamics driven by the averaged forcing gbar."""
    return LimitContext(sgrid, mats, nl, Constant(gbar), step)
