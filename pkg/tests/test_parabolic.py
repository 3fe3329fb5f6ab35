import math

import numpy as np
import pytest

from cylinderlab import (
    AsymmetricA,
    Constant,
    CouplingMatrices,
    Field,
    LimitContext,
    MissingPotential,
    Nonlinearity,
    Periodic,
    ShapeMismatch,
    StepOptions,
    cubic_nonlinearity,
    find_equilibria,
    implicit_step,
    laplacian,
    limit_context_from_mean,
    linear_nonlinearity,
    lyapunov_value,
    semigroup_evolve,
    sine_field,
    variational_evolve,
    zero_nonlinearity,
)
from conftest import PI, disc_eig


def manufactured_equilibrium(grid, nl, profile):
    """Forcing that makes `profile` a steady state: gbar = f(z) - Delta_h z."""
    z = sine_field(grid, profile)
    gbar = Field(grid, nl.f(z.values) - laplacian(z.values, grid.h))
    return z, gbar


def test_step_fixes_manufactured_equilibrium(grid64, scalar_mats, chafee2):
    z, gbar = manufactured_equilibrium(grid64, chafee2, [0.7, 0.0, 0.2])
    out = implicit_step(z, 0.0, StepOptions(dt=0.05), scalar_mats, chafee2, Constant(gbar))
    # the equilibrium is a fixed point of the step up to the Newton tolerance
    assert (out - z).l2() <= 10 * 1e-8


def test_step_linear_mode_exact_discrete(grid64, scalar_mats):
    # linear f(u) = u: one backward-Euler step scales the discrete sine mode
    # by exactly 1 / (1 + dt (lambda_h + 1))
    nl = linear_nonlinearity(1.0)
    u = sine_field(grid64, [1.0])
    dt = 0.02
    g = Constant(Field.zeros(grid64))
    out = implicit_step(u, 0.0, StepOptions(dt=dt), scalar_mats, nl, g)
    shrink = 1.0 / (1.0 + dt * (disc_eig(grid64, 1) + 1.0))
    np.testing.assert_allclose(out.values, shrink * u.values, rtol=1e-9)


def test_step_first_order_consistency(grid48, scalar_mats, chafee2):
    # error against a tiny-step reference at fixed time 0.2 shrinks like dt
    u0 = sine_field(grid48, [0.8, 0.3])
    g = Constant(Field.zeros(grid48))
    t_end = 0.2

    def final(dt):
        traj = semigroup_evolve(u0, t_end, StepOptions(dt=dt), scalar_mats, chafee2, g)
        return traj.field(-1)

    ref = final(1e-4)
    errs = [(final(dt) - ref).l2() for dt in (2e-2, 1e-2)]
    assert errs[1] <= errs[0] * 0.65  # halving dt roughly halves the error
    assert errs[1] >= errs[0] * 0.35


def test_semigroup_zero_span(grid32, scalar_mats, chafee2):
    u0 = sine_field(grid32, [1.0])
    traj = semigroup_evolve(
        u0, 0.0, StepOptions(), scalar_mats, chafee2, Constant(Field.zeros(grid32)), tau=2.5
    )
    assert traj.times.shape == (1,)
    assert traj.times[0] == 2.5
    np.testing.assert_array_equal(traj.values[0], u0.values)


def test_semigroup_linear_decay_rate(grid64, scalar_mats):
    # gamma u_t = Delta u - u decays the first mode like e^{-2t} in the
    # continuum; dt = 1e-3 backward Euler lands within 1% at t = 1
    nl = linear_nonlinearity(1.0)
    u0 = sine_field(grid64, [1.0])
    traj = semigroup_evolve(
        u0, 1.0, StepOptions(dt=1e-3), scalar_mats, nl, Constant(Field.zeros(grid64))
    )
    final = traj.at_time(1.0)
    expect = math.exp(-2.0)
    got = final.l2() / u0.l2()
    assert got == pytest.approx(expect, rel=1e-2)


def test_semigroup_converges_to_positive_state(grid48, scalar_mats, chafee2):
    # above the first bifurcation a positive bump settles onto the positive
    # equilibrium; steady states of the implicit step are dt-exact
    u0 = sine_field(grid48, [1.2])
    traj = semigroup_evolve(
        u0, 14.0, StepOptions(dt=5e-3), scalar_mats, chafee2, Constant(Field.zeros(grid48))
    )
    records = find_equilibria(scalar_mats, chafee2, Field.zeros(grid48))
    positive = [r for r in records if float(np.sum(r.z.values)) > 0.5]
    assert len(positive) == 1
    assert (traj.field(-1) - positive[0].z).l2() <= 1e-6


def test_variational_zero_direction(grid32, scalar_mats, chafee2):
    u0 = sine_field(grid32, [0.5])
    base = semigroup_evolve(
        u0, 0.5, StepOptions(dt=1e-2), scalar_mats, chafee2, Constant(Field.zeros(grid32))
    )
    w = variational_evolve(base, Field.zeros(grid32), StepOptions(dt=1e-2), scalar_mats, chafee2)
    assert np.all(w.values == 0.0)


def test_variational_matches_linear_flow(grid48, scalar_mats):
    # for linear f the flow is affine, so the variational solution equals the
    # difference of two nonlinear solves with no delta -> 0 limit needed
    nl = linear_nonlinearity(1.0)
    g = Constant(sine_field(grid48, [0.3]))
    u0 = sine_field(grid48, [0.8])
    xi = sine_field(grid48, [0.0, 1.0])
    opts = StepOptions(dt=5e-3)
    base = semigroup_evolve(u0, 0.5, opts, scalar_mats, nl, g)
    shifted = semigroup_evolve(u0 + xi, 0.5, opts, scalar_mats, nl, g)
    w = variational_evolve(base, xi, opts, scalar_mats, nl)
    diff = shifted.values[-1] - base.values[-1]
    np.testing.assert_allclose(w.values[-1], diff, atol=1e-8)


def test_variational_divided_difference_rate(grid48, scalar_mats, chafee2):
    # || (S(u + delta xi) - S(u)) / delta - W xi || = O(delta)
    g = Constant(Field.zeros(grid48))
    u0 = sine_field(grid48, [0.9])
    xi = sine_field(grid48, [1.0])
    opts = StepOptions(dt=5e-3)
    base = semigroup_evolve(u0, 0.5, opts, scalar_mats, chafee2, g)
    w = variational_evolve(base, xi, opts, scalar_mats, chafee2)

    def dd_err(delta):
        shifted = semigroup_evolve(u0 + delta * xi, 0.5, opts, scalar_mats, chafee2, g)
        dd = (shifted.values[-1] - base.values[-1]) / delta
        return float(
            math.sqrt(grid48.h * np.sum((dd - w.values[-1]) ** 2))
        )

    e2, e3 = dd_err(1e-2), dd_err(1e-3)
    assert 5.0 <= e2 / e3 <= 20.0


# ---------------------------------------------------------------------------
# Lyapunov energy


def test_lyapunov_zero_state(grid64, scalar_mats, chafee2):
    zero = Field.zeros(grid64)
    assert lyapunov_value(zero, scalar_mats, chafee2, zero) == 0.0


def test_lyapunov_sine_linear_potential(grid64, scalar_mats):
    # f(u) = u with F = u^2/2: integral of |u_x|^2 + u^2 for u = sin x is pi;
    # the discrete quadratures reproduce (lambda_h + 1) pi / 2 exactly
    nl = linear_nonlinearity(1.0)
    u = sine_field(grid64, [1.0])
    got = lyapunov_value(u, scalar_mats, nl, Field.zeros(grid64))
    exact = (disc_eig(grid64, 1) + 1.0) * PI / 2
    assert got == pytest.approx(exact, rel=1e-12)
    assert abs(got - PI) <= 2e-3


def test_lyapunov_decreases_along_flow(grid48, scalar_mats, chafee2):
    rng = np.random.default_rng(11)
    gbar = Field.zeros(grid48)
    coeffs = rng.standard_normal((4, 1)) / np.arange(1, 5)[:, None] ** 2
    u0 = sine_field(grid48, coeffs)
    traj = semigroup_evolve(
        u0, 0.5, StepOptions(dt=1e-3), scalar_mats, chafee2, Constant(gbar)
    )
    lvals = [
        lyapunov_value(traj.field(j), scalar_mats, chafee2, gbar)
        for j in range(0, traj.times.shape[0], 25)
    ]
    increases = [b - a for a, b in zip(lvals, lvals[1:])]
    assert max(increases) <= 1e-8
    # away from equilibrium the decrease is strict
    assert lvals[-1] < lvals[0] - 1e-6


def test_lyapunov_requires_structure(grid32, chafee2):
    u = sine_field(grid32, [1.0])
    zero = Field.zeros(grid32)
    no_potential = Nonlinearity(
        k=1, f=chafee2.f, jac_f=chafee2.jac_f, c_diss=chafee2.c_diss,
        k_mono=chafee2.k_mono, growth_q=3.0,
    )
    with pytest.raises(MissingPotential):
        lyapunov_value(u, CouplingMatrices.scalar(), no_potential, zero)
    skew = CouplingMatrices(2, np.array([[1.0, 0.4], [-0.4, 1.0]]), np.eye(2))
    u2 = sine_field(grid32, [[1.0, 1.0]], k=2)
    with pytest.raises(AsymmetricA):
        lyapunov_value(u2, skew, cubic_nonlinearity(1.0, k=2), Field.zeros(grid32, 2))
    with pytest.raises(ShapeMismatch):
        lyapunov_value(u, CouplingMatrices.scalar(), chafee2, Field.zeros(grid32, 2))


def test_odd_symmetry_is_exact(grid48, scalar_mats, chafee2):
    # odd f and zero forcing: the floating-point flow commutes with the
    # global sign flip to the last ulp of the Newton stopping rule
    u0 = sine_field(grid48, [0.9, -0.4])
    opts = StepOptions(dt=1e-2)
    g = Constant(Field.zeros(grid48))
    a = semigroup_evolve(u0, 1.0, opts, scalar_mats, chafee2, g)
    b = semigroup_evolve(-1.0 * u0, 1.0, opts, scalar_mats, chafee2, g)
    np.testing.assert_allclose(a.values, -b.values, atol=1e-12)


# ---------------------------------------------------------------------------
# limit context


def test_limit_context_map_and_evolve(grid32, scalar_mats, chafee2):
    ctx = limit_context_from_mean(
        grid32, scalar_mats, chafee2, Field.zeros(grid32), StepOptions(dt=1e-2)
    )
    u0 = sine_field(grid32, [0.5])
    assert ctx.map(u0, 1.0, 1.0) is u0
    assert ctx.eps == 0.0
    traj = ctx.evolve(u0, 0.0, 1.0, stride=0.25)
    np.testing.assert_allclose(traj.times, [0.0, 0.25, 0.5, 0.75, 1.0], atol=1e-12)
    end = ctx.map(u0, 0.0, 1.0)
    np.testing.assert_allclose(traj.values[-1], end.values, atol=1e-12)
    with pytest.raises(ValueError):
        ctx.map(u0, 1.0, 0.5)


def test_limit_context_periodic_forcing(grid32, scalar_mats):
    # forced linear problem: response of the first mode tends to the known
    # harmonic amplitude; crude tolerance since dt is first order
    nl = linear_nonlinearity(0.0)
    omega = 2.0
    g = Periodic(Field.zeros(grid32), sine_field(grid32, [1.0]), omega)
    ctx = LimitContext(grid32, scalar_mats, nl, g, StepOptions(dt=1e-3))
    u0 = Field.zeros(grid32)
    traj = ctx.evolve(u0, 0.0, 12.0, stride=0.05)
    lam = disc_eig(grid32, 1)
    amp_expect = 1.0 / math.hypot(lam, omega)
    tail = traj.values[traj.times > 6.0]
    # discrete sine-mode coefficient: <u, sin>_h / ||sin||_h^2
    coeff = (tail[:, :, 0] @ np.sin(grid32.nodes)) * grid32.h / (PI / 2)
    amp_got = 0.5 * (coeff.max() - coeff.min())
    assert amp_got == pytest.approx(amp_expect, rel=2e-2)
