"""Finite-eps diagnostics: energies, discrepancy, diffuse measures,
the backward heat kernel functional, velocity, curvature and level sets.

Energy densities use the compact squared gradient (field.grad_sq_array) so
that the discrete energy is exactly the Lyapunov functional of the discrete
flow.  Normals, velocities and the first variation use the centered gradient.
"""

import math
from dataclasses import dataclass, fields, astuple

import numpy as np

from . import _kernels as K
from .errors import EmptyInterfaceError
from .field import (ScalarField, VectorField, grad_arrays, grad_sq_array, integrate_array,
                    lap_array)
from .geometry import interface_measure, radius_samples
from .model import SIGMA, Kind, ModelParams, mass, well_W, well_Wprime

THETA_GRAD = 1e-8
KERNEL_TAIL = 1e-14


@dataclass
class DiagnosticsRecord:
    t: float
    E_S: float
    E_P: float
    E: float
    lambda_: float
    int_lambda_sq: float
    mass: float
    mass_deficit: float
    mass_bound: float
    sup_abs_phi: float
    sup_xi: float
    xi_pos_l1: float
    xi_l1: float
    mu_total: float
    volume: float
    dissipation: float
    willmore_proxy: float

    @staticmethod
    def columns():
        return [("lambda" if f.name == "lambda_" else f.name) for f in fields(DiagnosticsRecord)]

    def values(self):
        return astuple(self)

    def as_dict(self):
        return dict(zip(self.columns(), self.values()))


def surface_energy(phi: ScalarField, eps):
    g, w = K.energy_sums(K.as3d(phi.values))
    n = phi.grid.n
    return phi.grid.cell_volume * (0.5 * eps * g * float(n * n) + w / eps)


def penalty_energy(phi: ScalarField, p: ModelParams):
    if p.kind is Kind.RS:
        return 0.0
    d = p.m0 - mass(phi)
    return d * d / (2.0 * p.eps ** p.alpha)


def energies(phi: ScalarField, p: ModelParams):
    return surface_energy(phi, p.eps), penalty_energy(phi, p)


def energy_density(phi: ScalarField, eps):
    """eps|grad phi|^2/2 + W(phi)/eps, the density of sigma * mu."""
    return 0.5 * eps * grad_sq_array(phi.values, phi.grid.n) + well_W(phi.values) / eps


def discrepancy(phi: ScalarField, eps):
    """(xi field, sup xi, integral of xi_+, integral of |xi|)."""
    xi = 0.5 * eps * grad_sq_array(phi.values, phi.grid.n) - well_W(phi.values) / eps
    g = phi.grid
    return (ScalarField(g, xi), float(xi.max()),
            integrate_array(np.maximum(xi, 0.0), g), integrate_array(np.abs(xi), g))


def varifold_mass(phi: ScalarField, p, window=None):
    eps = p.eps if isinstance(p, ModelParams) else float(p)
    dens = energy_density(phi, eps)
    if window is not None:
        w = window.values if isinstance(window, ScalarField) else np.asarray(window)
        if np.any(w < 0):
            raise ValueError("window must be nonnegative")
        dens = dens * w
    return integrate_array(dens, phi.grid) / SIGMA


def periodic_dist_sq(grid, center):
    """|x - center|^2 with the minimum-image convention on each axis."""
    out = np.zeros(grid.shape)
    for ax, x in enumerate(grid.mesh()):
        d = np.abs(x - center[ax])
        d = np.minimum(d, 1.0 - d)
        out += d * d
    return out


OMEGA = {1: 1.0, 2: 2.0, 3: math.pi}  # omega_{d-1}: measure of the unit (d-1)-ball


def density_ratio(phi: ScalarField, p, center, r):
    return density_ratios(phi, p, [center], [r])[0]


def density_ratios(phi: ScalarField, p, centers, radii):
    """mu(B_r(c)) / (omega_{d-1} r^(d-1)) for every (c, r), centre-major order.

    The energy density is formed once and reused for all balls.
    """
    if not all(0 < r < 0.5 for r in radii):
        raise ValueError("radius must lie in (0, 1/2)")
    eps = p.eps if isinstance(p, ModelParams) else float(p)
    g = phi.grid
    d = g.dim
    dens = energy_density(phi, eps)
    out = []
    for c in centers:
        dist = periodic_dist_sq(g, np.atleast_1d(np.asarray(c, dtype=float)))
        for r in radii:
            m = integrate_array(np.where(dist < r * r, dens, 0.0), g) / SIGMA
            out.append(m / (OMEGA[d] * r ** (d - 1)))
    return out


@dataclass(frozen=True)
class KernelQuery:
    y: tuple
    s: float
    t: float

    def __post_init__(self):
        if not self.s - self.t > 0:
            raise ValueError("kernel needs s > t")


def _theta_1d(x, y, tau):
    """sum over k of exp(-(x - y + k)^2 / (4 tau)), truncated at relative tail 1e-14."""
    d = x - y
    total = np.exp(-d * d / (4 * tau))
    k = 1
    while True:
        add = np.exp(-(d + k) ** 2 / (4 * tau)) + np.exp(-(d - k) ** 2 / (4 * tau))
        total = total + add
        if np.all(add <= KERNEL_TAIL * total) or k > 200:
            break
        k += 1
    return total


def heat_kernel(grid, y, tau):
    """Periodized rho_(y,s)(x,t) with tau = s - t, on the grid."""
    d = grid.dim
    x = grid.coords()
    rho = np.ones((1,) * d)
    for ax in range(d):
        th = _theta_1d(x, float(y[ax]), tau)
        shape = [1] * d
        shape[ax] = grid.n
        rho = rho * th.reshape(shape)
    return rho * (4 * math.pi * tau) ** (-(d - 1) / 2)


def heat_kernel_functional(phi: ScalarField, p, q: KernelQuery):
    eps = p.eps if isinstance(p, ModelParams) else float(p)
    rho = heat_kernel(phi.grid, np.atleast_1d(q.y), q.s - q.t)
    return integrate_array(rho * energy_density(phi, eps), phi.grid) / SIGMA


def monotonicity_check(t1, t2, v1, v2, ils1, ils2):
    """value(t1) * exp((int_lambda_sq(t2) - int_lambda_sq(t1)) / 2) - value(t2)."""
    if t2 < t1:
        raise ValueError("need t1 <= t2")
    return v1 * math.exp(0.5 * (ils2 - ils1)) - v2


def velocity_field(phi: ScalarField, phi_t: ScalarField) -> VectorField:
    g = grad_arrays(phi.values, phi.grid.n)
    gn2 = sum(c * c for c in g)
    ok = gn2 > THETA_GRAD * THETA_GRAD
    safe = np.where(ok, gn2, 1.0)
    comps = [np.where(ok, -phi_t.values * c / safe, 0.0) for c in g]
    return VectorField(phi.grid, comps)


def curvature_proxy(phi: ScalarField, eps):
    """(H_eps = lap phi - W'(phi)/eps^2, integral of eps H_eps^2)."""
    H = lap_array(phi.values, phi.grid.n) - well_Wprime(phi.values) / (eps * eps)
    return ScalarField(phi.grid, H), eps * integrate_array(H * H, phi.grid)


def _jacobian(test: VectorField):
    n = test.grid.n
    return [grad_arrays(c, n) for c in test.components]  # J[i][j] = d_j phi_i


def first_variation(phi: ScalarField, p, test: VectorField):
    """delta V(test) of the diffuse varifold, measured against the energy
    density (so a flat profile contributes sigma per unit area).

    Assembled after integration by parts as
      int (test.grad phi)(eps lap phi - W'/eps)
      - int_{|grad phi| <= theta} (W/eps) div test
      + int_{|grad phi| > theta} grad test : (nu x nu) xi .
    The W' term is written as the centered difference of W(phi) so that
    constant test fields give zero up to rounding.
    """
    eps = p.eps if isinstance(p, ModelParams) else float(p)
    g = phi.grid
    n = g.n
    a = phi.values
    grad = grad_arrays(a, n)
    gradW = grad_arrays(well_W(a), n)
    lap = lap_array(a, n)
    tdotg = sum(tc * gc for tc, gc in zip(test.components, grad))
    tdotgW = sum(tc * gc for tc, gc in zip(test.components, gradW))
    term1 = integrate_array(eps * tdotg * lap - tdotgW / eps, g)
    gn2 = sum(c * c for c in grad)
    ok = gn2 > THETA_GRAD * THETA_GRAD
    J = _jacobian(test)
    div = sum(J[i][i] for i in range(g.dim))
    term2 = -integrate_array(np.where(ok, 0.0, well_W(a) / eps * div), g)
    xi = 0.5 * eps * grad_sq_array(a, n) - well_W(a) / eps
    safe = np.where(ok, gn2, 1.0)
    nn = sum(J[i][j] * grad[i] * grad[j] for i in range(g.dim) for j in range(g.dim)) / safe
    term3 = integrate_array(np.where(ok, nn * xi, 0.0), g)
    return term1 + term2 + term3


def first_variation_direct(phi: ScalarField, p, test: VectorField):
    """Same quantity from its definition: int grad test : (I - nu x nu) over
    {|grad phi| > theta} against the energy density."""
    eps = p.eps if isinstance(p, ModelParams) else float(p)
    g = phi.grid
    grad = grad_arrays(phi.values, g.n)
    gn2 = sum(c * c for c in grad)
    ok = gn2 > THETA_GRAD * THETA_GRAD
    safe = np.where(ok, gn2, 1.0)
    J = _jacobian(test)
    div = sum(J[i][i] for i in range(g.dim))
    nn = sum(J[i][j] * grad[i] * grad[j] for i in range(g.dim) for j in range(g.dim)) / safe
    dens = energy_density(phi, eps)
    return integrate_array(np.where(ok, (div - nn) * dens, 0.0), g)


def volume_pos(phi: ScalarField):
    return integrate_array(0.5 * (phi.values + 1.0), phi.grid)


@dataclass
class LevelSetGeometry:
    volume_pos: float
    perimeter: float
    radius_samples: list


def level_set_geometry(phi: ScalarField, center=None):
    g = phi.grid
    if g.dim not in (2, 3):
        raise ValueError("level-set geometry needs d = 2 or 3")
    v = phi.values
    if not (np.any(v > 0) and np.any(v <= 0)):
        raise EmptyInterfaceError("phi has no sign change")
    per = interface_measure(v, g.h)
    radii = [] if center is None else radius_samples(v, center, g.dim)
    return LevelSetGeometry(volume_pos(phi), per, radii)


def make_record(phi: ScalarField, p: ModelParams, t, lam, int_lambda_sq, dissipation, es0):
    eps = p.eps
    es = surface_energy(phi, eps)
    m = mass(phi)
    deficit = abs(p.m0 - m)
    ep = 0.0 if p.kind is Kind.RS else (p.m0 - m) ** 2 / (2.0 * eps ** p.alpha)
    _, sup_xi, xpos, xl1 = discrepancy(phi, eps)
    _, willmore = curvature_proxy(phi, eps)
    return DiagnosticsRecord(
        t=float(t), E_S=es, E_P=ep, E=es + ep, lambda_=float(lam),
        int_lambda_sq=float(int_lambda_sq), mass=m, mass_deficit=deficit,
        mass_bound=math.sqrt(2.0 * eps ** p.alpha * es0),
        sup_abs_phi=float(np.max(np.abs(phi.values))), sup_xi=sup_xi, xi_pos_l1=xpos,
        xi_l1=xl1, mu_total=es / SIGMA, volume=volume_pos(phi),
        dissipation=float(dissipation), willmore_proxy=willmore)


def invariant_violations(rec: DiagnosticsRecord, p: ModelParams, es0, e0=None):
    """Names of the per-record invariants that fail (empty list when all hold)."""
    bad = []
    if p.kind is Kind.TAKASAO:
        if rec.mass_deficit > rec.mass_bound:
            bad.append("mass_deficit <= mass_bound")
        if abs(rec.lambda_) > p.lambda_bound:
            bad.append("|lambda| <= (4/3) eps^-alpha")
        lhs = rec.mass_deficit ** 2
        rhs = 2.0 * p.eps ** p.alpha * rec.E_P
        if abs(lhs - rhs) > 1e-12 * max(lhs, rhs, 1e-300):
            bad.append("mass_deficit^2 == 2 eps^alpha E_P")
        # the L-infinity bound needs the sqrt(2W) factor on the forcing; the
        # constant RS forcing moves the far field off +-1
        if rec.sup_abs_phi > 1.0 + 1e-8:
            bad.append("sup|phi| <= 1 + 1e-8")
    if min(rec.E_S, rec.E_P) < 0:
        bad.append("energies >= 0")
    if e0 is not None and rec.E > e0 * (1 + 1e-7):
        bad.append("E(t) <= E(0)")
    return bad
