"""Supersolution barrier built from a 1D profile in the x_1 direction.

g is even, g(s) = |s| - 1/2 for |s| >= 1 and 0 <= g'' <= 2.  We take g'' to be
a smootherstep ramp 0 -> 2 on [0.05, 0.45], flat 2 on [0.45, 0.55] and the
mirror ramp down to 0 on [0.55, 0.95].  Because g'' is symmetric about 1/2
and integrates to 1, integrating twice from g(0) = g'(0) = 0 gives exactly
g'(1) = 1 and g(1) = 1/2, so the linear branch continues it with g'' in C^2
and g in C^4.
"""

import math

import numpy as np
from scipy.interpolate import PPoly

from ..field import ScalarField
from ..model import q_profile

_BREAKS = np.array([0.0, 0.05, 0.45, 0.55, 0.95, 1.0])
_SMOOTHERSTEP = np.array([6.0, -15.0, 10.0, 0.0, 0.0, 0.0])  # 6u^5 - 15u^4 + 10u^3


def _g2_pieces():
    L = 0.4
    up = 2.0 * _SMOOTHERSTEP / L ** np.arange(5, -1, -1)  # in x - x_left, x in [0, L]
    # mirror: S((L - x)/L) expanded in powers of x
    down = np.polynomial.polynomial.Polynomial(_SMOOTHERSTEP[::-1])(
        np.polynomial.polynomial.Polynomial([1.0, -1.0 / L]))
    down = 2.0 * down.coef[::-1]
    down = np.concatenate([np.zeros(6 - len(down)), down])
    zero = np.zeros(6)
    two = np.zeros(6)
    two[-1] = 2.0
    return np.stack([zero, up, two, down, zero], axis=1)


G2 = PPoly(_g2_pieces(), _BREAKS)
G1 = G2.antiderivative(1)
G0 = G2.antiderivative(2)


def _eval(pp, s, tail):
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    inner = pp(np.minimum(a, 1.0))
    return np.where(a >= 1.0, tail(a), inner)


def g(s):
    return _eval(G0, s, lambda a: a - 0.5)


def g_prime(s):
    s = np.asarray(s, dtype=float)
    return np.sign(s) * _eval(G1, s, lambda a: np.ones_like(a))


def _smootherstep(u):
    u = np.clip(u, 0.0, 1.0)
    return np.clip(u * u * u * (u * (6.0 * u - 15.0) + 10.0), 0.0, 1.0)


def g_second(s):
    """Closed form of G2 (the PPoly copy can round a few ulps outside [0, 2])."""
    a = np.abs(np.asarray(s, dtype=float))
    up = _smootherstep((a - 0.05) / 0.4)
    down = _smootherstep((0.95 - a) / 0.4)
    return 2.0 * np.minimum(up, down)


def check_g(samples=None):
    """Property violations of g on a sample grid (empty list if none)."""
    s = np.linspace(-3.0, 3.0, 60001) if samples is None else np.asarray(samples)
    bad = []
    if g(0.0) != 0.0:
        bad.append("g(0) = 0")
    if not np.array_equal(g(s), g(-s)):
        bad.append("g even")
    far = np.abs(s) >= 1
    if not np.allclose(g(s[far]), np.abs(s[far]) - 0.5, rtol=0, atol=0):
        bad.append("g(s) = |s| - 1/2 for |s| >= 1")
    g2 = g_second(s)
    if np.any(g2 < 0) or np.any(g2 > 2):
        bad.append("0 <= g'' <= 2")
    if np.any(g(s) < 0):
        bad.append("g >= 0")
    return bad


def plane_distance(grid):
    """Periodic signed coordinate of x_1 relative to the plane x_1 = 0, in [-1/2, 1/2)."""
    x1 = grid.mesh()[0]
    return x1 - np.floor(x1 + 0.5)


def barrier_field(grid, eps, delta, gamma, t, int_lambda):
    """phi~ = q(delta g(x_1/delta) + int_0^t lambda + 2t/delta - gamma)."""
    s = plane_distance(grid)
    r = delta * g(s / delta) + int_lambda + 2.0 * t / delta - gamma
    return ScalarField(grid, q_profile(r, eps))


class BarrierMonitor:
    """record_hook collecting min(phi~ - phi) at every record."""

    def __init__(self, grid, eps, delta, gamma):
        if not delta < gamma:
            raise ValueError("barrier needs delta < gamma")
        self.grid, self.eps, self.delta, self.gamma = grid, eps, delta, gamma
        self.margins = []  # (t, min(phi~ - phi))

    def __call__(self, state, record):
        bt = barrier_field(self.grid, self.eps, self.delta, self.gamma, state.t,
                           state.int_lambda)
        self.margins.append((state.t, float(np.min(bt.values - state.phi.values))))

    def report(self, tol=1e-3):
        worst = min(self.margins, key=lambda x: x[1]) if self.margins else (math.nan, math.nan)
        first = next((t for t, m in self.margins if m < -tol), None)
        return {"min_margin": worst[1], "t_of_min": worst[0], "first_violation_t": first,
                "tolerance": tol, "margins": self.margins}


def precondition(phi0: ScalarField, eps, delta, gamma):
    """min over x of phi~(x, 0) - phi0(x); the comparison needs this >= 0."""
    bt = barrier_field(phi0.grid, eps, delta, gamma, 0.0, 0.0)
    return float(np.min(bt.values - phi0.values))
