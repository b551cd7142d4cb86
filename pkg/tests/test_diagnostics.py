import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vpac.diagnostics import (KernelQuery, curvature_proxy, density_ratio, discrepancy,
                              energies, first_variation, first_variation_direct,
                              heat_kernel, heat_kernel_functional, level_set_geometry,
                              make_record, monotonicity_check, surface_energy,
                              varifold_mass, velocity_field, invariant_violations)
from vpac.errors import EmptyInterfaceError
from vpac.field import Grid, ScalarField, VectorField, shift
from vpac.geometry import contour_length_2d, radius_samples, surface_area_3d
from vpac.harness.runner import radial_test_field
from vpac.initial import Ball, Slab, build_phi0, grid_distance, profile_field
from vpac.model import SIGMA, ModelParams, q_profile, rate_array


def _disk(n=512, eps=0.01, r=0.2):
    g = Grid(2, n)
    pd = build_phi0(Ball((0.5, 0.5), r), g, eps)
    return pd, ModelParams(eps, 0.5, "takasao", pd.m0)


@pytest.fixture(scope="module")
def disk():
    return _disk()


def _slab2d(n, eps):
    g = Grid(2, n)
    r = grid_distance(Slab(0, 0.5, 0.25, ndim=2), g)
    return ScalarField(g, q_profile(r, eps))


# energies

def test_energies_of_constants():
    g = Grid(2, 16)
    p = ModelParams(0.1, 0.5, "takasao", 0.25)
    assert surface_energy(g.full(1.0), 0.1) == 0.0
    assert surface_energy(g.full(-1.0), 0.1) == 0.0
    # W(0) = 1/2, so E_S = 1/(2 eps)
    assert surface_energy(g.zeros(), 0.1) == pytest.approx(5.0, rel=1e-14)
    es, ep = energies(g.zeros(), p)
    # mass of 0 is k(0) = 0, deficit 0.25
    assert ep == pytest.approx(0.25 ** 2 / (2 * 0.1 ** 0.5), rel=1e-14)
    assert energies(g.zeros(), ModelParams(0.1, 0.5, "rs", 0.25))[1] == 0.0


def test_disk_varifold_mass_is_perimeter(disk):
    pd, p = disk
    assert varifold_mass(pd.phi0, p) == pytest.approx(2 * math.pi * 0.2, rel=0.02)


def test_varifold_window_extremes(disk):
    pd, p = disk
    g = pd.grid
    assert varifold_mass(pd.phi0, p, g.zeros()) == 0.0
    assert varifold_mass(pd.phi0, p, g.full(1.0)) == varifold_mass(pd.phi0, p)
    with pytest.raises(ValueError):
        varifold_mass(pd.phi0, p, g.full(-1.0))


def test_discrepancy_of_constant():
    g = Grid(2, 16)
    xi, sup, pos, l1 = discrepancy(g.full(0.5), 0.1)
    w = (1 - 0.25) ** 2 / 2 / 0.1
    assert np.allclose(xi.values, -w) and sup == pytest.approx(-w)
    assert pos == 0.0 and l1 == pytest.approx(w)


# density ratio

def test_density_flat_interface():
    phi = _slab2d(512, 0.005)
    p = ModelParams(0.005)
    for r in (0.05, 0.1, 0.2):
        assert density_ratio(phi, p, (0.25, 0.5), r) == pytest.approx(1.0, abs=0.05)


def test_density_away_from_interface(disk):
    pd, p = disk
    assert density_ratio(pd.phi0, p, (0.05, 0.05), 0.05) <= 1e-6
    with pytest.raises(ValueError):
        density_ratio(pd.phi0, p, (0.5, 0.5), 0.5)


@given(st.integers(0, 127), st.integers(0, 127))
def test_density_translation_equivariant(i, j):
    g = Grid(2, 128)
    pd = build_phi0(Ball((0.5, 0.5), 0.2), g, 0.04)
    p = ModelParams(0.04)
    c = (0.3, 0.5)
    moved = shift(pd.phi0, (i, j))
    a = density_ratio(pd.phi0, p, c, 0.1)
    b = density_ratio(moved, p, ((c[0] + i / 128) % 1, (c[1] + j / 128) % 1), 0.1)
    assert b == pytest.approx(a, rel=1e-9, abs=1e-12)


# heat kernel

def test_heat_kernel_constant_field_is_zero():
    g = Grid(2, 64)
    assert heat_kernel_functional(g.full(1.0), ModelParams(0.1),
                                  KernelQuery((0.3, 0.3), 0.05, 0.0)) == 0.0


def test_heat_kernel_normalisation():
    # over a line the (d-1)-dimensional kernel integrates to one
    g = Grid(2, 256)
    tau = 0.003
    rho = heat_kernel(g, (104 / 256, 0.7), tau)
    line = rho[104, :].sum() * g.h
    assert line == pytest.approx(1.0, rel=1e-10)
    g3 = Grid(3, 64)
    rho3 = heat_kernel(g3, (0.5, 0.5, 0.5), 0.01)
    plane = rho3[32].sum() * g3.h ** 2
    assert plane == pytest.approx(1.0, rel=1e-10)


def _two_line(tau):
    k = np.arange(-50, 51)
    return float(np.exp(-k ** 2 / (4 * tau)).sum() + np.exp(-(0.5 + k) ** 2 / (4 * tau)).sum())


@pytest.mark.parametrize("tau", [0.001, 0.01, 0.05, 0.2])
def test_heat_kernel_flat_interface(tau):
    phi = _slab2d(512, 0.005)
    v = heat_kernel_functional(phi, ModelParams(0.005), KernelQuery((0.25, 0.5), tau, 0.0))
    assert v == pytest.approx(_two_line(tau), rel=0.05)


def test_kernel_query_rejects_past():
    with pytest.raises(ValueError):
        KernelQuery((0.5,), 0.1, 0.1)


def test_monotonicity_check_examples():
    assert monotonicity_check(0.0, 1.0, 2.0, 1.0, 0.0, 0.0) == 1.0
    assert monotonicity_check(0.0, 1.0, 2.0, 3.0, 1.0, 1.0 + 2 * math.log(2)) == pytest.approx(1.0)
    assert monotonicity_check(0.0, 1.0, 1.0, 1.5, 0.0, 0.0) == -0.5
    with pytest.raises(ValueError):
        monotonicity_check(1.0, 0.0, 1.0, 1.0, 0.0, 0.0)


# velocity

def test_velocity_constant_field_is_zero():
    g = Grid(2, 16)
    v = velocity_field(g.full(0.3), g.full(5.0))
    assert all(np.all(c == 0) for c in v.components)


def test_velocity_traveling_front():
    # q(r0 - x + lam t) moves right at speed lam exactly; one instant of it
    eps, n, lam = 0.01, 512, 3.0
    g = Grid(1, n)
    phi = ScalarField(g, q_profile(grid_distance(Slab(0, 0.5, 0.25), g), eps))
    p = ModelParams(eps)
    phi_t = ScalarField(g, rate_array(phi.values, n, p, lam))
    v = velocity_field(phi, phi_t).components[0]
    right, left = round(0.75 * n), round(0.25 * n)
    assert v[right] == pytest.approx(lam, rel=0.1)
    assert v[left] == pytest.approx(-lam, rel=0.1)


def test_velocity_stationary_profile_is_small():
    eps, n = 0.01, 512
    g = Grid(1, n)
    phi = ScalarField(g, q_profile(grid_distance(Slab(0, 0.5, 0.25), g), eps))
    phi_t = ScalarField(g, rate_array(phi.values, n, ModelParams(eps), 0.0))
    v = velocity_field(phi, phi_t).components[0]
    assert abs(v[round(0.75 * n)]) < 0.1


# curvature

def test_flat_curvature_refines():
    eps = 0.02
    w = []
    for n in (256, 512, 1024):
        g = Grid(1, n)
        phi = profile_field(grid_distance(Slab(0, 0.5, 0.25), g), g, eps, math.inf)
        w.append(curvature_proxy(phi, eps)[1])
    assert all(x >= 0 for x in w)
    assert w[0] / w[1] == pytest.approx(16, rel=0.15)
    assert w[1] / w[2] == pytest.approx(16, rel=0.15)


def test_disk_willmore(disk):
    pd, p = disk
    H, w = curvature_proxy(pd.phi0, p.eps)
    assert w >= 0
    assert w / SIGMA == pytest.approx(2 * math.pi / 0.2, rel=0.1)


# first variation

def test_first_variation_constant_field(disk):
    pd, p = disk
    g = pd.grid
    es = surface_energy(pd.phi0, p.eps)
    tf = VectorField(g, [g.full(0.3).values, g.full(-1.2).values])
    assert abs(first_variation(pd.phi0, p, tf)) <= 1e-8 * es


def test_first_variation_constant_phi_divfree():
    g = Grid(2, 64)
    x, y = g.mesh()
    tf = VectorField(g, [np.sin(2 * np.pi * y), np.cos(2 * np.pi * x)])
    assert first_variation(g.full(0.3), 0.1, tf) == pytest.approx(0.0, abs=1e-12)


def _sharp_circle(r, c, m=20000):
    th = np.arange(m) * 2 * np.pi / m
    nu = np.stack([np.cos(th), np.sin(th)])
    d = r * nu
    divm = sum((1 - nu[i] ** 2) * np.cos(2 * np.pi * d[i]) for i in range(2))
    return SIGMA * divm.mean() * 2 * np.pi * r


def test_first_variation_disk(disk):
    pd, p = disk
    tf = radial_test_field(pd.grid, (0.5, 0.5))
    a = first_variation(pd.phi0, p, tf)
    b = first_variation_direct(pd.phi0, p, tf)
    assert a == pytest.approx(b, rel=5e-3)
    assert a == pytest.approx(_sharp_circle(0.2, (0.5, 0.5)), rel=0.1)


# level-set geometry

def test_level_set_geometry_disk(disk):
    pd, _ = disk
    geo = level_set_geometry(pd.phi0, (0.5, 0.5))
    assert geo.perimeter == pytest.approx(2 * math.pi * 0.2, rel=0.01)
    assert np.allclose(geo.radius_samples, 0.2, rtol=0.01)
    assert abs(geo.volume_pos - math.pi * 0.04) <= 2 * 0.01 * 2 * math.pi * 0.2


def test_level_set_geometry_empty():
    g = Grid(2, 16)
    with pytest.raises(EmptyInterfaceError):
        level_set_geometry(g.full(1.0))
    with pytest.raises(ValueError):
        level_set_geometry(Grid(1, 16).full(0.5))


def test_radius_samples_outside_center():
    g = Grid(2, 128)
    pd = build_phi0(Ball((0.5, 0.5), 0.2), g, 0.05)
    assert np.all(np.asarray(radius_samples(pd.phi0.values, (0.05, 0.05), 2)) == 0)


def test_saddle_contour_length():
    n = 128
    x = np.arange(n) / n
    v = np.cos(2 * np.pi * x)[:, None] * np.cos(2 * np.pi * x)[None, :]
    assert contour_length_2d(v, 1 / n) == pytest.approx(4.0, rel=1e-3)


def test_sphere_area():
    n = 64
    g = Grid(3, n)
    d = np.sqrt(sum((c - 0.5) ** 2 for c in g.mesh()))
    assert surface_area_3d(0.3 - d, 1 / n) == pytest.approx(4 * math.pi * 0.09, rel=0.01)


# records

def test_record_of_initial_disk(disk):
    pd, p = disk
    rec = make_record(pd.phi0, p, 0.0, 0.0, 0.0, 0.0, pd.surface_energy0)
    assert rec.E_P == 0.0 and rec.mass_deficit == 0.0
    assert rec.E == rec.E_S == pd.surface_energy0
    assert rec.mu_total == pytest.approx(rec.E_S / SIGMA)
    assert invariant_violations(rec, p, pd.surface_energy0) == []
    assert list(rec.as_dict())[4] == "lambda"


def test_invariant_violation_names(disk):
    pd, p = disk
    rec = make_record(pd.phi0, p, 0.0, 100.0, 0.0, 0.0, pd.surface_energy0)
    assert "|lambda| <= (4/3) eps^-alpha" in invariant_violations(rec, p, pd.surface_energy0)


def test_sup_invariant_only_for_penalised_model(disk):
    from dataclasses import replace
    pd, p = disk
    rec = replace(make_record(pd.phi0, p, 0.0, 0.0, 0.0, 0.0, pd.surface_energy0),
                  sup_abs_phi=1.01)
    assert "sup|phi| <= 1 + 1e-8" in invariant_violations(rec, p, pd.surface_energy0)
    rs = ModelParams(p.eps, p.alpha, "rs", p.m0)
    assert invariant_violations(replace(rec, E_P=0.0), rs, pd.surface_energy0) == []
