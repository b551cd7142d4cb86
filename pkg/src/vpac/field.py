"""Periodic uniform grids on the unit torus and finite-difference operators."""

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _kernels as K


@dataclass(frozen=True)
class Grid:
    dim: int
    n: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if int(self.n) != self.n or self.n < 8:
            raise ValueError(f"n must be an integer >= 8, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if (1.0 / self.n) * self.n != 1.0:
            raise ValueError(f"n={self.n}: (1/n)*n != 1 in float64, pick another n")

    @property
    def h(self):
        return 1.0 / self.n

    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def size(self):
        return self.n ** self.dim

    @property
    def cell_volume(self):
        return self.h ** self.dim

    def coords(self):
        return np.arange(self.n) * self.h

    def mesh(self):
        """Coordinate arrays x_1..x_d, each of full grid shape (ij indexing)."""
        x = self.coords()
        return np.meshgrid(*([x] * self.dim), indexing="ij")

    def zeros(self):
        return ScalarField(self, np.zeros(self.shape))

    def full(self, c):
        return ScalarField(self, np.full(self.shape, float(c)))

    def sample(self, fn):
        """ScalarField with values fn(x_1, ..., x_d) on the mesh."""
        return ScalarField(self, np.broadcast_to(fn(*self.mesh()), self.shape))


def _check_finite(a, what):
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{what} contains non-finite values")


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.shape != self.grid.shape:
            if v.size != self.grid.size:
                raise ValueError(f"values of shape {v.shape} do not fit grid {self.grid.shape}")
            v = v.reshape(self.grid.shape)
        _check_finite(v, "ScalarField")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def map(self, fn):
        return ScalarField(self.grid, fn(self.values))

    def __add__(self, other):
        return ScalarField(self.grid, self.values + _vals(other))

    def __sub__(self, other):
        return ScalarField(self.grid, self.values - _vals(other))

    def __mul__(self, other):
        return ScalarField(self.grid, self.values * _vals(other))

    __rmul__ = __mul__
    __radd__ = __add__

    def __neg__(self):
        return ScalarField(self.grid, -self.values)

    def sup(self):
        return float(np.max(np.abs(self.values)))


def _vals(x):
    return x.values if isinstance(x, ScalarField) else x


@dataclass(frozen=True, eq=False)
class VectorField:
    grid: Grid
    components: tuple = dc_field(default=())

    def __post_init__(self):
        comps = tuple(np.ascontiguousarray(c, dtype=np.float64) for c in self.components)
        if len(comps) != self.grid.dim:
            raise ValueError(f"need {self.grid.dim} components, got {len(comps)}")
        for c in comps:
            if c.shape != self.grid.shape:
                raise ValueError("component shape does not match grid")
            _check_finite(c, "VectorField")
            c.flags.writeable = False
        object.__setattr__(self, "components", comps)

    def __getitem__(self, i):
        return self.components[i]

    def norm_sq(self):
        return sum(c * c for c in self.components)

    def norm(self):
        return np.sqrt(self.norm_sq())


# -- raw array operators (used by the stepper and diagnostics hot paths) --

def lap_array(a, n):
    """Periodic (2d+1)-point Laplacian of an array with spacing 1/n."""
    p2 = 2.0 * a
    acc = None
    for ax in range(a.ndim):
        term = (np.roll(a, -1, axis=ax) + np.roll(a, 1, axis=ax)) - p2
        acc = term if acc is None else acc + term
    return acc * float(n * n)


def grad_arrays(a, n):
    inv2h = 0.5 * n
    return tuple((np.roll(a, -1, axis=ax) - np.roll(a, 1, axis=ax)) * inv2h
                 for ax in range(a.ndim))


def grad_sq_array(a, n):
    """Mean of forward and backward squared differences, summed over axes.

    Summed over the grid this equals the sum of squared forward differences,
    which is the quadratic form of the Laplacian stencil.  That is what makes
    the discrete energy a Lyapunov functional of the discrete flow.
    """
    n2 = float(n * n)
    acc = np.zeros_like(a)
    for ax in range(a.ndim):
        d = np.roll(a, -1, axis=ax) - a
        d2 = d * d
        acc += 0.5 * (d2 + np.roll(d2, 1, axis=ax))
    return acc * n2


def div_arrays(comps, n):
    inv2h = 0.5 * n
    acc = None
    for ax, c in enumerate(comps):
        t = (np.roll(c, -1, axis=ax) - np.roll(c, 1, axis=ax)) * inv2h
        acc = t if acc is None else acc + t
    return acc


def integrate_array(a, grid):
    return grid.cell_volume * K.fsum(np.ascontiguousarray(a, dtype=np.float64))


# -- public field operators --

def laplacian(f: ScalarField) -> ScalarField:
    return ScalarField(f.grid, lap_array(f.values, f.grid.n))


def gradient(f: ScalarField) -> VectorField:
    """Centered differences (f[i+1] - f[i-1]) / 2h on each axis."""
    return VectorField(f.grid, grad_arrays(f.values, f.grid.n))


def grad_sq(f: ScalarField) -> ScalarField:
    """|grad f|^2 in the compact (energy-consistent) form, see grad_sq_array."""
    return ScalarField(f.grid, grad_sq_array(f.values, f.grid.n))


def divergence(v: VectorField) -> ScalarField:
    return ScalarField(v.grid, div_arrays(v.components, v.grid.n))


def integrate(f) -> float:
    """Midpoint rule h^d * sum(values) with a fixed summation order."""
    return integrate_array(f.values, f.grid)


def shift(f: ScalarField, offsets) -> ScalarField:
    """Cyclic index shift by integer offsets (one per axis)."""
    offsets = tuple(int(o) for o in offsets)
    if len(offsets) != f.grid.dim:
        raise ValueError("one offset per axis required")
    return ScalarField(f.grid, np.roll(f.values, offsets, axis=tuple(range(f.grid.dim))))
