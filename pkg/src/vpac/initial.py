"""Well-prepared initial data: tanh profiles of clamped signed distances."""

import itertools
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import GeometryError, ResolutionError
from .field import Grid, ScalarField, grad_sq_array
from .model import mass, q_profile, well_W

MARGIN = 0.05
UNION_GAP = 0.02


def _images(dim):
    return np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=dim)))


def _pts(x, dim):
    x = np.asarray(x, dtype=float)
    if dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != dim:
        raise ValueError(f"points must have trailing dimension {dim}")
    return x


class Shape:
    dim = None

    def local_sd(self, p):
        """Signed distance of points p (..., d) ignoring periodicity."""
        raise NotImplementedError

    def check(self):
        pass

    def signed_distance(self, x):
        """Positive inside; maximized over the 3^d nearest periodic images."""
        x = _pts(x, self.dim)
        best = None
        for off in _images(self.dim):
            v = self.local_sd(x - off)
            best = v if best is None else np.maximum(best, v)
        return best if best.ndim else float(best)

    def bbox(self):
        """(lo, hi) per axis; None entries mean unbounded along that axis."""
        raise NotImplementedError

    def _check_margin(self):
        for ax, (lo, hi) in enumerate(self.bbox()):
            if lo is None:
                continue
            if lo < MARGIN - 1e-12 or hi > 1.0 - MARGIN + 1e-12:
                raise GeometryError(
                    f"{type(self).__name__} extends to [{lo:.4g}, {hi:.4g}] on axis {ax}; "
                    f"needs margin {MARGIN} from the cell faces")


@dataclass(frozen=True)
class Ball(Shape):
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0:
            raise GeometryError("ball radius must be positive")
        self._check_margin()

    @property
    def dim(self):
        return len(self.center)

    def bbox(self):
        return [(c - self.radius, c + self.radius) for c in self.center]

    def local_sd(self, p):
        d = p - np.asarray(self.center)
        return self.radius - np.sqrt(np.sum(d * d, axis=-1))


@dataclass(frozen=True)
class BallUnion(Shape):
    balls: tuple

    def __post_init__(self):
        balls = tuple(b if isinstance(b, Ball) else Ball(**b) for b in self.balls)
        object.__setattr__(self, "balls", balls)
        if not balls:
            raise GeometryError("empty ball union")
        if len({b.dim for b in balls}) != 1:
            raise GeometryError("balls of mixed dimension")
        for b1, b2 in itertools.combinations(balls, 2):
            gap = math.dist(b1.center, b2.center) - b1.radius - b2.radius
            if gap <= UNION_GAP:
                raise GeometryError(f"balls too close: gap {gap:.4g} <= {UNION_GAP}")

    @property
    def dim(self):
        return self.balls[0].dim

    def bbox(self):
        return [(min(b.bbox()[a][0] for b in self.balls), max(b.bbox()[a][1] for b in self.balls))
                for a in range(self.dim)]

    def local_sd(self, p):
        return np.max([b.local_sd(p) for b in self.balls], axis=0)


def ellipsoid_sd(p, axes, iters=200):
    """Signed distance (positive inside) from points p (..., d) to the
    ellipsoid sum (x_i/a_i)^2 = 1 centred at the origin.

    The closest boundary point is x_i = a_i^2 p_i / (t + a_i^2) where t is the
    root of F(t) = sum (a_i p_i / (t + a_i^2))^2 - 1 on (-min a^2, inf).  F is
    strictly decreasing there, so plain bisection is robust.  If p has no
    component along the shortest axes the root may not exist (F stays below
    zero); then the closest point lies on the shortest-axis direction.
    """
    a = np.asarray(axes, dtype=float)
    p = np.asarray(p, dtype=float)
    a2 = a * a
    amin2 = a2.min()
    short = np.isclose(a2, amin2, rtol=1e-12, atol=0.0)
    pn = np.sqrt(np.sum(p * p, axis=-1))
    inside = np.sum((p / a) ** 2, axis=-1) < 1.0

    def F(t):
        return np.sum((a * p / (t[..., None] + a2)) ** 2, axis=-1) - 1.0

    lo = np.full(pn.shape, -amin2)
    hi = np.maximum(a.max() * pn, 0.0) + 1e-300
    # degenerate: no weight on the shortest axes and F(-amin^2) from the rest < 0
    pshort = np.sqrt(np.sum(np.where(short, p, 0.0) ** 2, axis=-1))
    with np.errstate(divide="ignore", invalid="ignore"):
        rest = np.where(short, 0.0, a * p / (a2 - amin2 + np.where(short, 1.0, 0.0)))
        frest = np.sum(rest ** 2, axis=-1)
    degen = (pshort <= 1e-14 * np.maximum(pn, 1e-300)) & (frest <= 1.0)
    # 0/0 can appear on the degenerate rows; those are replaced below
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            pos = F(mid) > 0
            lo = np.where(pos, mid, lo)
            hi = np.where(pos, hi, mid)
        t = 0.5 * (lo + hi)
        x = a2 * p / (t[..., None] + a2)
    if np.any(degen):
        xd = np.where(short, 0.0, a2 * p / np.where(short, 1.0, a2 - amin2))
        fill = np.sqrt(np.maximum(1.0 - np.sum((xd / a) ** 2, axis=-1), 0.0)) * np.sqrt(amin2)
        first = int(np.argmax(short))
        xd[..., first] = fill
        x = np.where(degen[..., None], xd, x)
    dist = np.sqrt(np.sum((p - x) ** 2, axis=-1))
    return np.where(inside, dist, -dist)


@dataclass(frozen=True)
class Ellipsoid(Shape):
    center: tuple
    axes: tuple

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        object.__setattr__(self, "axes", tuple(float(a) for a in np.atleast_1d(self.axes)))
        if len(self.axes) != len(self.center):
            raise GeometryError("ellipsoid needs one semi-axis per dimension")
        if min(self.axes) <= 0:
            raise GeometryError("semi-axes must be positive")
        self._check_margin()

    @property
    def dim(self):
        return len(self.center)

    def bbox(self):
        return [(c - a, c + a) for c, a in zip(self.center, self.axes)]

    def local_sd(self, p):
        return ellipsoid_sd(p - np.asarray(self.center), self.axes)


@dataclass(frozen=True)
class Slab(Shape):
    """{x : |x_axis - center| < half_width}, unbounded along the other axes."""
    axis: int
    center: float
    half_width: float
    ndim: int = 1

    def __post_init__(self):
        if not 0 <= self.axis < self.ndim:
            raise GeometryError(f"slab axis {self.axis} outside dimension {self.ndim}")
        if self.half_width <= 0:
            raise GeometryError("slab half-width must be positive")
        self._check_margin()

    @property
    def dim(self):
        return self.ndim

    def bbox(self):
        out = [(None, None)] * self.ndim
        out[self.axis] = (self.center - self.half_width, self.center + self.half_width)
        return out

    def local_sd(self, p):
        return self.half_width - np.abs(p[..., self.axis] - self.center)


@dataclass(frozen=True)
class Complement(Shape):
    """Inside and outside of another shape swapped."""
    inner: Shape

    @property
    def dim(self):
        return self.inner.dim

    def bbox(self):
        return self.inner.bbox()

    def signed_distance(self, x):
        return -self.inner.signed_distance(x)

    def local_sd(self, p):
        return -self.inner.local_sd(p)


def signed_distance(s: Shape, x):
    return s.signed_distance(x)


def clamp(r, b):
    """Smooth, odd, 1-Lipschitz truncation b*tanh(r/b); identity for b = inf."""
    r = np.asarray(r, dtype=float)
    if math.isinf(b):
        return r
    if b <= 0:
        raise ValueError("clamp width must be positive")
    return b * np.tanh(r / b)


def default_b(eps):
    return max(10.0 * eps, 0.05)


@dataclass(frozen=True, eq=False)
class PreparedData:
    phi0: ScalarField
    m0: float
    b: float
    shape: Shape
    surface_energy0: float
    eps: float
    r: np.ndarray = dc_field(repr=False, default=None)

    @property
    def grid(self):
        return self.phi0.grid


def grid_distance(s: Shape, g: Grid):
    pts = np.stack(g.mesh(), axis=-1)
    return np.asarray(s.signed_distance(pts)).reshape(g.shape)


def profile_field(r, g: Grid, eps, b):
    """tanh(clamp(r, b)/eps) on the grid from precomputed signed distances r.

    No saturation check: with b = inf the far field rounds to exactly +-1.
    """
    return ScalarField(g, q_profile(clamp(r, b), eps))


def build_phi0(s: Shape, g: Grid, eps: float, b=None) -> PreparedData:
    from .diagnostics import surface_energy

    if s.dim != g.dim:
        raise GeometryError(f"shape dimension {s.dim} does not match grid dimension {g.dim}")
    if g.h > eps / 4 * (1 + 1e-12):
        raise ResolutionError(f"h = {g.h:.4g} exceeds eps/4 = {eps / 4:.4g}; refine the grid")
    b = default_b(eps) if b is None else float(b)
    if b < 10 * eps * (1 - 1e-12):
        raise ValueError(f"clamp width b = {b} must be at least 10*eps = {10 * eps}")
    s.check()
    r = grid_distance(s, g)
    phi0 = profile_field(r, g, eps, b)
    if not np.max(np.abs(phi0.values)) < 1.0:
        raise ResolutionError("initial profile saturates at |phi| = 1; eps too small for float64")
    m0 = mass(phi0)
    if not 2.0 / 3.0 - abs(m0) > 0:
        raise GeometryError(f"initial mass {m0} at the bound 2/3")
    return PreparedData(phi0, m0, b, s, surface_energy(phi0, eps), eps, r)


def discrepancy_field(phi: ScalarField, eps: float):
    """eps|grad phi|^2/2 - W(phi)/eps with the compact squared gradient."""
    return 0.5 * eps * grad_sq_array(phi.values, phi.grid.n) - well_W(phi.values) / eps


def verify_well_prepared(pd: PreparedData, eps: float) -> float:
    return float(np.max(discrepancy_field(pd.phi0, eps)))


def analytic_discrepancy(r, eps, b):
    """Pointwise discrepancy of tanh(clamp(r,b)/eps) with exact derivatives.

    Where |grad r| = 1 the chain rule gives |grad phi|^2 = clamp'(r)^2 (1-phi^2)^2/eps^2,
    so the discrepancy factors as (W(phi)/eps)(clamp'(r)^2 - 1) with
    clamp' = sech^2(r/b).  The factor is <= 0 and vanishes identically for b = inf.
    """
    r = np.asarray(r, dtype=float)
    phi = q_profile(clamp(r, b), eps)
    dprime_sq = 1.0 if math.isinf(b) else np.cosh(r / b) ** -4
    return well_W(phi) / eps * (dprime_sq - 1.0)

