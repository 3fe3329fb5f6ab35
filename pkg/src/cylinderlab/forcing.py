"""Time-dependent forcing families and their time averages.

Variants form a closed tagged union; eval_forcing dispatches on type.
The patchwork family switches between two forcings on intervals whose
endpoints are consecutive integer squares; all endpoints are nonnegative,
so the literal switching rule covers t >= 0 and is extended evenly in |t|
for negative times (children are still evaluated at t itself).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import AverageNotConverged, ShapeMismatch
from .model import Field

__all__ = [
    "Constant",
    "Heteroclinic",
    "Periodic",
    "Quasiperiodic",
    "Patchwork",
    "FastScaled",
    "Forcing",
    "eval_forcing",
    "time_average",
    "forcing_grid",
    "forcing_period",
    "finest_scale",
    "negate_forcing",
    "forcing_mean",
]


@dataclass(frozen=True)
class Constant:
    mean: Field


@dataclass(frozen=True)
class Heteroclinic:
    """Smooth blend g_minus -> g_plus via (1 + tanh(t/scale))/2."""

    g_minus: Field
    g_plus: Field
    scale: float

    def __post_init__(self):
        if self.g_minus.grid != self.g_plus.grid or self.g_minus.k != self.g_plus.k:
            raise ShapeMismatch("heteroclinic endpoints live on different grids")
        if not self.scale > 0:
            raise ValueError("scale must be positive")


@dataclass(frozen=True)
class Periodic:
    """mean + sin(omega t) * osc."""

    mean: Field
    osc: Field
    omega: float

    def __post_init__(self):
        if self.mean.grid != self.osc.grid or self.mean.k != self.osc.k:
            raise ShapeMismatch("periodic mean/osc live on different grids")
        if not self.omega > 0:
            raise ValueError("omega must be positive")


@dataclass(frozen=True)
class Quasiperiodic:
    """mean + sin(omega1 t) * osc1 + sin(omega2 t) * osc2."""

    mean: Field
    osc1: Field
    omega1: float
    osc2: Field
    omega2: float

    def __post_init__(self):
        for f in (self.osc1, self.osc2):
            if f.grid != self.mean.grid or f.k != self.mean.k:
                raise ShapeMismatch("quasiperiodic fields live on different grids")
        if not (self.omega1 > 0 and self.omega2 > 0):
            raise ValueError("frequencies must be positive")


@dataclass(frozen=True)
class Patchwork:
    """g1 on [4k^2, (2k+1)^2), g2 on [(2k-1)^2, 4k^2), k integer."""

    g1: "Forcing"
    g2: "Forcing"

    def __post_init__(self):
        if forcing_grid(self.g1) != forcing_grid(self.g2):
            raise ShapeMismatch("patchwork children live on different grids")


@dataclass(frozen=True)
class FastScaled:
    """g(t / eps)."""

    inner: "Forcing"
    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")


Forcing = Union[Constant, Heteroclinic, Periodic, Quasiperiodic, Patchwork, FastScaled]


def forcing_grid(g: Forcing):
    """Spatial grid shared by all profile fields of the forcing."""
    if isinstance(g, Constant):
        return g.mean.grid
    if isinstance(g, Heteroclinic):
        return g.g_minus.grid
    if isinstance(g, (Periodic, Quasiperiodic)):
        return g.mean.grid
    if isinstance(g, Patchwork):
        return forcing_grid(g.g1)
    if isinstance(g, FastScaled):
        return forcing_grid(g.inner)
    raise TypeError(f"not a forcing: {type(g)!r}")


def _patchwork_first(t: float) -> bool:
    """True when t falls in a g1 interval [m^2, (m+1)^2) with m even."""
    m = int(math.floor(math.sqrt(abs(t))))
    # floating guard at square boundaries
    if (m + 1) ** 2 <= abs(t):
        m += 1
    elif m**2 > abs(t):
        m -= 1
    return m % 2 == 0


def eval_forcing(g: Forcing, t: float) -> Field:
    """Value of the forcing at time t."""
    if not math.isfinite(t):
        raise ValueError(f"t must be finite, got {t}")
    if isinstance(g, Constant):
        return g.mean
    if isinstance(g, Heteroclinic):
        w = 0.5 * (1.0 + math.tanh(t / g.scale))
        return Field(g.g_minus.grid, g.g_minus.values + w * (g.g_plus.values - g.g_minus.values))
    if isinstance(g, Periodic):
        return Field(g.mean.grid, g.mean.values + math.sin(g.omega * t) * g.osc.values)
    if isinstance(g, Quasiperiodic):
        return Field(
            g.mean.grid,
            g.mean.values
            + math.sin(g.omega1 * t) * g.osc1.values
            + math.sin(g.omega2 * t) * g.osc2.values,
        )
    if isinstance(g, Patchwork):
        return eval_forcing(g.g1 if _patchwork_first(t) else g.g2, t)
    if isinstance(g, FastScaled):
        return eval_forcing(g.inner, t / g.eps)
    raise TypeError(f"not a forcing: {type(g)!r}")


def finest_scale(g: Forcing) -> float:
    """Shortest intrinsic time scale; inf for autonomous forcing."""
    if isinstance(g, Constant):
        return math.inf
    if isinstance(g, Heteroclinic):
        return g.scale
    if isinstance(g, Periodic):
        return 2.0 * math.pi / g.omega
    if isinstance(g, Quasiperiodic):
        return 2.0 * math.pi / max(g.omega1, g.omega2)
    if isinstance(g, Patchwork):
        return min(1.0, finest_scale(g.g1), finest_scale(g.g2))
    if isinstance(g, FastScaled):
        return g.eps * finest_scale(g.inner)
    raise TypeError(f"not a forcing: {type(g)!r}")


def forcing_mean(g: Forcing) -> Field:
    """Infinite-horizon time average, where one exists in the strong sense.

    Sinusoidal oscillations average to zero exactly; a patchwork has a mean
    only when both children share one (zero-mean 1-periodic children give
    zero over every integer window, hence in the limit).
    """
    if isinstance(g, Constant):
        return g.mean
    if isinstance(g, (Periodic, Quasiperiodic)):
        return g.mean
    if isinstance(g, FastScaled):
        return forcing_mean(g.inner)
    if isinstance(g, Patchwork):
        m1, m2 = forcing_mean(g.g1), forcing_mean(g.g2)
        if (m1 - m2).l2() <= 1e-12:
            return m1
        raise AverageNotConverged("patchwork children have different means")
    if isinstance(g, Heteroclinic):
        raise AverageNotConverged("heteroclinic forcing has no time mean")
    raise TypeError(f"not a forcing: {type(g)!r}")


def negate_forcing(g: Forcing) -> Forcing:
    """Forcing whose value is -g(t) for every t, same variant structure."""
    if isinstance(g, Constant):
        return Constant(-g.mean)
    if isinstance(g, Heteroclinic):
        return Heteroclinic(-g.g_minus, -g.g_plus, g.scale)
    if isinstance(g, Periodic):
        return Periodic(-g.mean, -g.osc, g.omega)
    if isinstance(g, Quasiperiodic):
        return Quasiperiodic(-g.mean, -g.osc1, g.omega1, -g.osc2, g.omega2)
    if isinstance(g, Patchwork):
        return Patchwork(negate_forcing(g.g1), negate_forcing(g.g2))
    if isinstance(g, FastScaled):
        return FastScaled(negate_forcing(g.inner), g.eps)
    raise TypeError(f"not a forcing: {type(g)!r}")


def forcing_period(g: Forcing):
    """Exact period, 0.0 for autonomous forcing, None when not periodic."""
    if isinstance(g, Constant):
        return 0.0
    if isinstance(g, Periodic):
        return 2.0 * math.pi / g.omega
    if isinstance(g, FastScaled):
        p = forcing_period(g.inner)
        return None if p is None else g.eps * p
    return None


# nodes per intrinsic scale for the composite quadrature
_NODES_PER_SCALE = 48


def _average_smooth(g: Forcing, t0: float, window: float) -> np.ndarray:
    """Trapezoid average of a smooth (non-patchwork) forcing over [t0, t0+window]."""
    scale = finest_scale(g)
    if math.isinf(scale):
        return eval_forcing(g, t0).values.copy()
    steps = max(32, int(math.ceil(window / scale * _NODES_PER_SCALE)))
    steps = min(steps, 4_000_000)
    ts = t0 + window * np.arange(steps + 1) / steps
    acc = np.zeros_like(eval_forcing(g, t0).values)
    # chunked accumulation keeps memory flat for very long windows
    chunk = 65536
    dt = window / steps
    for lo in range(0, steps + 1, chunk):
        hi = min(lo + chunk, steps + 1)
        block = np.stack([eval_forcing(g, float(t)).values for t in ts[lo:hi]])
        w = np.ones(hi - lo)
        if lo == 0:
            w[0] = 0.5
        if hi == steps + 1:
            w[-1] = 0.5
        acc += np.einsum("t,tnk->nk", w, block) * dt
    return acc / window


def _patchwork_breaks(t0: float, t1: float):
    """Integer-square switch points strictly inside (t0, t1), plus 0 if crossed."""
    pts = set()
    if t0 < 0.0 < t1:
        pts.add(0.0)
    m = 0
    while m * m <= max(abs(t0), abs(t1)):
        for s in (m * m, -m * m):
            if t0 < s < t1:
                pts.add(float(s))
        m += 1
    return sorted(pts)


def time_average(g: Forcing, t0: float, window: float) -> Field:
    """(1/window) integral of g over [t0, t0 + window] by composite quadrature.

    FastScaled averages reduce exactly by change of variables; patchwork
    windows are split at the switch points so each piece is smooth.
    """
    if not window > 0:
        raise ValueError(f"window must be positive, got {window}")
    grid = forcing_grid(g)
    if isinstance(g, Constant):
        return g.mean
    if isinstance(g, FastScaled):
        return time_average(g.inner, t0 / g.eps, window / g.eps)
    if isinstance(g, Patchwork):
        t1 = t0 + window
        cuts = [t0] + _patchwork_breaks(t0, t1) + [t1]
        acc = np.zeros((grid.n_interior, eval_forcing(g, t0).values.shape[1]))
        for a, b in zip(cuts[:-1], cuts[1:]):
            child = g.g1 if _patchwork_first(0.5 * (a + b)) else g.g2
            acc += _average_smooth(child, a, b - a) * (b - a)
        return Field(grid, acc / window)
    return Field(grid, _average_smooth(g, t0, window))
