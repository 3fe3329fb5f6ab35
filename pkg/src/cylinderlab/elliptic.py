"""Space-time Newton solver for the perturbed elliptic problem on a cylinder.

Solves a (eps^2 u_tt + u_xx) - gamma u_t - f(u) = g(t) on [tau, tau + t_len]
with u(tau) = u_tau, homogeneous Dirichlet in x, and a far condition at the
right end of the truncated cylinder.  All time slices are unknowns of one
sparse block-tridiagonal system; the Jacobian is refactorized per Newton
step with a sparse direct solver.

At eps = 0 the time-second-derivative block vanishes and the problem is an
initial-value problem; solves delegate to the backward-Euler march of the
parabolic module (with the forcing sign flipped: the elliptic convention
puts g on the right-hand side, the parabolic one adds it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import DegenerateData, ShapeMismatch, SingularJacobian
from .forcing import Constant, Forcing, eval_forcing, negate_forcing
from .model import (
    CouplingMatrices,
    CylinderField,
    CylinderGrid,
    Field,
    Nonlinearity,
    SpatialGrid,
    Trajectory,
    surrogate_v_norm,
    weighted_norm,
    zero_nonlinearity,
)
from .newton import NewtonOptions, damped_newton
from .parabolic import StepOptions, semigroup_evolve, variational_evolve

DT_CAP = 1.0 / 64.0
MARGIN_MIN = 2.0


@dataclass(frozen=True)
class ZeroTimeDerivative:
    """Homogeneous du/dt = 0 at the far end (one-sided second order)."""


@dataclass(frozen=True)
class Clamp:
    """Pin the far slice to a fixed profile."""

    profile: Field


FarBoundary = ZeroTimeDerivative | Clamp


def default_dt(eps: float) -> float:
    """Step target resolving the eps^2 u_tt layer: eps/4, capped at 1/64."""
    if eps <= 0.0:
        return 1e-3
    return min(eps / 4.0, DT_CAP)


class _SpaceTimeSystem:
    """Linear part, forcing vector, and Jacobian pattern of one cylinder solve.

    Unknowns are ordered (time slice, space node, component); rows are the
    initial condition (j=0), the PDE at interior slices, and the far
    condition (j=m).
    """

    def __init__(
        self,
        sgrid: SpatialGrid,
        cgrid: CylinderGrid,
        mats: CouplingMatrices,
        nl: Nonlinearity,
        g: Forcing,
        u_tau: Field,
        far: FarBoundary,
    ):
        m = cgrid.m_steps
        if m < 2:
            raise ValueError("space-time solve needs at least 2 time steps")
        n, k = sgrid.n_interior, mats.k
        if mats.k != nl.k:
            raise ShapeMismatch(f"matrix k={mats.k} vs nonlinearity k={nl.k}")
        if u_tau.grid != sgrid or u_tau.k != k:
            raise ShapeMismatch("u_tau does not match the declared grids")
        dt, eps, h = cgrid.dt, cgrid.eps, sgrid.h
        self.shape3 = (m + 1, n, k)
        self.m, self.n, self.k = m, n, k
        self.nl = nl

        rows = np.arange(1, m)
        one = np.ones(m - 1)
        sz = (m + 1, m + 1)
        t2 = sp.coo_matrix(
            (
                np.concatenate([one, -2.0 * one, one]),
                (np.tile(rows, 3), np.concatenate([rows - 1, rows, rows + 1])),
            ),
            shape=sz,
        )
        t1 = sp.coo_matrix(
            (
                np.concatenate([-0.5 * one, 0.5 * one]),
                (np.tile(rows, 2), np.concatenate([rows - 1, rows + 1])),
            ),
            shape=sz,
        )
        t0 = sp.coo_matrix((one, (rows, rows)), shape=sz)
        lap = sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(n, n)) / h**2
        eye_n = sp.identity(n)
        a = sp.csr_matrix(mats.a)
        gam = sp.csr_matrix(mats.gamma)
        lin = (
            (eps**2 / dt**2) * sp.kron(t2, sp.kron(eye_n, a))
            + sp.kron(t0, sp.kron(lap, a))
            - (1.0 / dt) * sp.kron(t1, sp.kron(eye_n, gam))
        )
        e0 = sp.coo_matrix(([1.0], ([0], [0])), shape=sz)
        lin = lin + sp.kron(e0, sp.identity(n * k))
        if isinstance(far, ZeroTimeDerivative):
            c = 0.5 / dt
            efar = sp.coo_matrix(
                ([3.0 * c, -4.0 * c, c], ([m, m, m], [m, m - 1, m - 2])), shape=sz
            )
        elif isinstance(far, Clamp):
            if far.profile.grid != sgrid or far.profile.k != k:
                raise ShapeMismatch("clamp profile does not match the grids")
            efar = sp.coo_matrix(([1.0], ([m], [m])), shape=sz)
        else:
            raise TypeError(f"not a far boundary: {type(far)!r}")
        self.lin = (lin + sp.kron(efar, sp.identity(n * k))).tocsc()

        b = np.zeros(self.shape3)
        b[0] = u_tau.values
        times = cgrid.times
        for j in range(1, m):
            b[j] = eval_forcing(g, float(times[j])).values
        if isinstance(far, Clamp):
            b[m] = far.profile.values
        self.b = b.ravel()

        # index pattern of the f' blocks on the PDE rows, (j, i, c, d) order
        jj, ii, cc, dd = np.meshgrid(
            np.arange(1, m), np.arange(n), np.arange(k), np.arange(k), indexing="ij"
        )
        base = jj * (n * k) + ii * k
        self._jac_rows = (base + cc).ravel()
        self._jac_cols = (base + dd).ravel()

    def residual(self, u: np.ndarray) -> np.ndarray:
        r = self.lin @ u - self.b
        v = u.reshape(self.shape3)
        r3 = r.reshape(self.shape3)
        r3[1 : self.m] -= self.nl.f(v[1 : self.m])
        return r

    def solve_step(self, u: np.ndarray, r: np.ndarray) -> np.ndarray:
        v = u.reshape(self.shape3)
        vals = self.nl.jac_f(v[1 : self.m]).ravel()
        nuk = (self.m + 1) * self.n * self.k
        bump = sp.coo_matrix((vals, (self._jac_rows, self._jac_cols)), shape=(nuk, nuk))
        jac = (self.lin - bump).tocsc()
        try:
            lu = splu(jac)
        except RuntimeError as exc:
            raise SingularJacobian(str(exc)) from exc
        dx = lu.solve(-r)
        if not np.all(np.isfinite(dx)):
            raise SingularJacobian("linear solve produced non-finite values")
        return dx


def _march_parabolic(
    sgrid: SpatialGrid,
    cgrid: CylinderGrid,
    mats: CouplingMatrices,
    nl: Nonlinearity,
    g: Forcing,
    u_tau: Field,
    opts: NewtonOptions,
) -> CylinderField:
    step = StepOptions(dt=cgrid.dt, newton=opts)
    traj = semigroup_evolve(
        u_tau, cgrid.t_len, step, mats, nl, negate_forcing(g), tau=cgrid.tau
    )
    return CylinderField(sgrid, cgrid, traj.values)


def solve_truncated_bvp(
    sgrid: SpatialGrid,
    cgrid: CylinderGrid,
    mats: CouplingMatrices,
    nl: Nonlinearity,
    g: Forcing,
    u_tau: Field,
    far: FarBoundary = ZeroTimeDerivative(),
    opts: NewtonOptions | None = None,
    guess: np.ndarray | None = None,
) -> CylinderField:
    """Solve the truncated cylinder problem; initial slice is met exactly.

    The optional guess (same shape as the unknowns) warm-starts Newton;
    default is the constant-in-time extension of u_tau.
    """
    opts = opts or NewtonOptions()
    if cgrid.eps == 0.0:
        return _march_parabolic(sgrid, cgrid, mats, nl, g, u_tau, opts)
    system = _SpaceTimeSystem(sgrid, cgrid, mats, nl, g, u_tau, far)
    if guess is None:
        u0 = np.broadcast_to(u_tau.values, system.shape3).ravel().copy()
    else:
        u0 = np.asarray(guess, dtype=float).reshape(-1).copy()
        u0[: sgrid.n_interior * mats.k] = u_tau.values.ravel()
    u, _ = damped_newton(u0, system.residual, system.solve_step, opts)
    vals = u.reshape(system.shape3)
    vals[0] = u_tau.values  # exact by the identity row; rewrite to kill round-off
    return CylinderField(sgrid, cgrid, vals)


@dataclass(frozen=True)
class ProcessContext:
    """Everything a solving-process evaluation needs besides the data slice.

    Duck-typed with the parabolic LimitContext: map/evolve have the same
    signatures so the dynamics layer runs both.
    """

    sgrid: SpatialGrid
    mats: CouplingMatrices
    nl: Nonlinearity
    forcing: Forcing
    eps: float
    far: FarBoundary = ZeroTimeDerivative()
    opts: NewtonOptions = NewtonOptions()
    margin: float = MARGIN_MIN
    dt: float | None = None

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError("eps must be >= 0")
        if self.eps > 0 and self.margin <= 0:
            raise ValueError("margin must be positive")

    @property
    def dt_target(self) -> float:
        return self.dt if self.dt is not None else default_dt(self.eps)

    def map(self, u0: Field, tau: float, t: float) -> Field:
        return process_map(u0, tau, t, self)

    def evolve(self, u0: Field, tau: float, t_end: float, stride: float) -> Trajectory:
        """March in unit windows, harvesting slices every stride time units.

        Consecutive windows warm-start from the shifted previous solution,
        which keeps Newton at one or two steps once transients decay.
        """
        if self.eps == 0.0:
            step = StepOptions(dt=self.dt_target, newton=self.opts)
            traj = semigroup_evolve(
                u0, t_end, step, self.mats, self.nl, negate_forcing(self.forcing), tau=tau
            )
            dt = float(traj.times[1] - traj.times[0]) if traj.times.shape[0] > 1 else stride
            every = max(1, int(round(stride / dt)))
            idx = np.arange(0, traj.times.shape[0], every)
            if idx[-1] != traj.times.shape[0] - 1:
                idx = np.append(idx, traj.times.shape[0] - 1)
            return Trajectory(traj.grid, traj.times[idx], traj.values[idx])

        if not stride > 0:
            raise ValueError("stride must be positive")
        spw_unit = 1.0 / stride
        if abs(spw_unit - round(spw_unit)) > 1e-9:
            raise ValueError("stride must divide one time unit")
        n_strides = t_end / stride
        if abs(n_strides - round(n_strides)) > 1e-9:
            raise ValueError("t_end must be a multiple of stride")
        n_strides = int(round(n_strides))
        dt = stride / math.ceil(stride / self.dt_target - 1e-12)
        spw = int(round(stride / dt))
        margin_steps = int(math.ceil(self.margin / dt - 1e-12))

        times = [tau]
        slices = [u0.values]
        cur = u0
        guess = None
        done = 0  # strides consumed
        while done < n_strides:
            win = min(n_strides - done, int(round(spw_unit)))  # strides this window
            m_inner = win * spw
            m = m_inner + margin_steps
            start = tau + done * stride
            cgrid = CylinderGrid(start, m * dt, m, self.eps)
            u = solve_truncated_bvp(
                self.sgrid, cgrid, self.mats, self.nl, self.forcing, cur,
                far=self.far, opts=self.opts, guess=guess,
            )
            for j in range(1, win + 1):
                times.append(start + j * stride)
                slices.append(u.values[j * spw])
            cur = u.slice(m_inner)
            if m - m_inner >= m_inner:
                tail = u.values[m_inner:]
                ext = np.broadcast_to(u.values[m], (m + 1 - tail.shape[0],) + tail.shape[1:])
                guess = np.concatenate([tail, ext])
            else:
                guess = None
            done += win
        return Trajectory(self.sgrid, np.array(times), np.stack(slices))


def process_map(u_tau: Field, tau: float, t: float, context: ProcessContext) -> Field:
    """Slice at time t of the solving process started from u_tau at tau.

    Solves on [tau, t + margin] so the far condition sits a margin away
    from the reported slice.
    """
    if t < tau:
        raise ValueError("t must be >= tau")
    if t == tau:
        return u_tau
    if context.eps == 0.0:
        step = StepOptions(dt=context.dt_target, newton=context.opts)
        traj = semigroup_evolve(
            u_tau, t - tau, step, context.mats, context.nl,
            negate_forcing(context.forcing), tau=tau,
        )
        return traj.field(-1)
    span = t - tau
    dt = span / math.ceil(span / context.dt_target - 1e-12)
    span_steps = int(round(span / dt))
    m = span_steps + int(math.ceil(context.margin / dt - 1e-12))
    cgrid = CylinderGrid(tau, m * dt, m, context.eps)
    u = solve_truncated_bvp(
        context.sgrid, cgrid, context.mats, context.nl, context.forcing, u_tau,
        far=context.far, opts=context.opts,
    )
    return u.slice(span_steps)


def variational_process(
    base: CylinderField,
    xi: Field,
    mats: CouplingMatrices,
    nl: Nonlinearity,
    far: FarBoundary = ZeroTimeDerivative(),
) -> CylinderField:
    """Linearized flow along a converged base solution: one Jacobian solve.

    Solves a (eps^2 v_tt + v_xx) - gamma v_t - f'(u(t)) v = 0 with
    v(tau) = xi and the homogeneous version of the far condition.
    """
    if xi.grid != base.sgrid or xi.k != base.k:
        raise ShapeMismatch("xi does not match the base solution")
    if base.cgrid.eps == 0.0:
        traj = Trajectory(base.sgrid, base.cgrid.times, base.values)
        opts = StepOptions(dt=base.cgrid.dt)
        out = variational_evolve(traj, xi, opts, mats, nl)
        return CylinderField(base.sgrid, base.cgrid, out.values)
    if isinstance(far, Clamp):
        far = Clamp(Field.zeros(base.sgrid, base.k))
    zero_g = Constant(Field.zeros(base.sgrid, base.k))
    system = _SpaceTimeSystem(base.sgrid, base.cgrid, mats, nl, zero_g, xi, far)
    # rows are linear with Jacobian evaluated on the base solution
    jac_vals = nl.jac_f(base.values[1 : base.cgrid.m_steps]).ravel()
    nuk = (base.cgrid.m_steps + 1) * base.sgrid.n_interior * base.k
    bump = sp.coo_matrix(
        (jac_vals, (system._jac_rows, system._jac_cols)), shape=(nuk, nuk)
    )
    jac = (system.lin - bump).tocsc()
    rhs = np.zeros(system.shape3)
    rhs[0] = xi.values
    try:
        lu = splu(jac)
    except RuntimeError as exc:
        raise SingularJacobian(str(exc)) from exc
    v = lu.solve(rhs.ravel())
    if not np.all(np.isfinite(v)):
        raise SingularJacobian("linear solve produced non-finite values")
    return CylinderField(base.sgrid, base.cgrid, v.reshape(system.shape3))


def discrete_cascade(l: int, m: int, u_m: Field, context: ProcessContext) -> Field:
    """Iterate the process over unit time steps from slice m to slice l."""
    if int(l) != l or int(m) != m:
        raise ValueError("cascade indices must be integers")
    if l < m:
        raise ValueError("l must be >= m")
    u = u_m
    for j in range(int(m), int(l)):
        u = context.map(u, float(j), float(j + 1))
    return u


_SLAB_STARTS = (0.0, 1.0, 2.0)


def regularity_probe(eps_list, h: Forcing, u0: Field, context: ProcessContext):
    """Ratios rho(eps) = slab norm of the linear solution over the data norm.

    Solves the f = 0 problem from u0 with right-hand side h on a cylinder
    long enough that every reported slab sits a full margin from the far
    end, then reports (eps, rho) rows.  The interesting output is the
    spread max rho / min rho across eps.
    """
    zero_f = zero_nonlinearity(u0.k)
    t_len = _SLAB_STARTS[-1] + 1.0 + context.margin
    h_times = np.linspace(0.0, t_len, 97)
    h_sq = np.array([eval_forcing(h, float(t)).l2() ** 2 for t in h_times])
    h_norm = math.sqrt(float(np.trapezoid(h_sq, h_times)))
    if u0.l2() == 0.0 and h_norm == 0.0:
        raise DegenerateData("u0 and h both vanish")
    rows = []
    for eps in eps_list:
        dt = 1.0 / math.ceil(1.0 / default_dt(eps) - 1e-12)
        m = int(round(t_len / dt))
        cgrid = CylinderGrid(0.0, t_len, m, float(eps))
        u = solve_truncated_bvp(
            context.sgrid, cgrid, context.mats, zero_f, h, u0,
            far=context.far, opts=context.opts,
        )
        num = max(weighted_norm(u, 2.0, s) for s in _SLAB_STARTS)
        den = surrogate_v_norm(u0, float(eps)) + h_norm
        rows.append((float(eps), num / den))
    return rows


def lambda0_margin(
    mats: CouplingMatrices, nl: Nonlinearity, eps: float, lambda0: float
) -> float:
    """Minimal eigenvalue of Lambda0 gamma - eps^2 Lambda0^2 (a+ - 2 a- a+^{-1} a-) - K I.

    Diagnostic only: nonnegative values certify the exponential weight
    Lambda0 used in the uniqueness estimates; no solver logic depends on it.
    """
    ap, am = mats.a_plus, mats.a_minus
    expr = (
        lambda0 * mats.gamma
        - eps**2 * lambda0**2 * (ap - 2.0 * am @ np.linalg.inv(ap) @ am)
        - nl.k_mono * np.eye(mats.k)
    )
    sym = 0.5 * (expr + expr.T)
    return float(np.linalg.eigvalsh(sym)[0])
