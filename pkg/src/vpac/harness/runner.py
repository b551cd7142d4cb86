"""Drive one configured run: prepare data, integrate, collect diagnostics, write files."""

import math
import os
from dataclasses import dataclass, field

import numpy as np

from ..diagnostics import (KernelQuery, density_ratios, first_variation, first_variation_direct,
                           heat_kernel_functional, invariant_violations, level_set_geometry,
                           monotonicity_check)
from ..errors import EmptyInterfaceError
from ..field import VectorField, integrate_array
from ..geometry import radius_samples
from ..initial import build_phi0
from ..model import ModelParams
from ..stepper import StepControl, run
from . import io


def radial_test_field(grid, center):
    """Smooth periodic field ~ (x - c) near c: components sin(2 pi (x_i - c_i)) / (2 pi)."""
    mesh = grid.mesh()
    comps = [np.sin(2 * np.pi * (x - c)) / (2 * np.pi) for x, c in zip(mesh, center)]
    return VectorField(grid, comps)


def interface_points(phi, k, rng):
    """k grid points (as coordinates) adjacent to a sign change, spread by random choice."""
    v = phi.values
    near = np.zeros(v.shape, dtype=bool)
    for ax in range(v.ndim):
        near |= (v > 0) != (np.roll(v, -1, axis=ax) > 0)
    idx = np.argwhere(near)
    if len(idx) == 0 or k <= 0:
        return []
    pick = rng.choice(len(idx), size=min(k, len(idx)), replace=False)
    return [list(idx[i] * phi.grid.h) for i in sorted(pick)]


@dataclass
class RunOutcome:
    config: object
    prepared: object
    params: ModelParams
    result: object
    records: list
    summary: dict
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.failures


class _Monitor:
    def __init__(self, cfg, pd, params):
        self.cfg, self.pd, self.p = cfg, pd, params
        self.es0 = pd.surface_energy0
        self.e0 = None
        self.prev_E = None
        self.failures = []
        self.radii = []
        self.kernel = {}  # (center idx, s) -> list of (t, value, int_lambda_sq)
        self.density_cap = 0.0
        self.density = []
        rng = np.random.default_rng(cfg.density_seed)
        nc = cfg.density_n_centers
        if nc > 0:
            pts = interface_points(pd.phi0, nc - nc // 2, rng)
            pts += [list(rng.uniform(0, 1, cfg.dim)) for _ in range(nc - len(pts))]
            self.density_centers = pts
        else:
            self.density_centers = []
        self.extra_hooks = []

    def __call__(self, state, rec):
        p = self.p
        if self.e0 is None:
            self.e0 = rec.E
        for name in invariant_violations(rec, p, self.es0):
            self.failures.append(f"t={rec.t!r}: {name}")
        if self.prev_E is not None and rec.E > self.prev_E + 1e-7 * self.e0:
            self.failures.append(f"t={rec.t!r}: energy increased between records")
        self.prev_E = rec.E
        phi = state.phi
        cfg = self.cfg
        if cfg.radius_centers:
            try:
                geo = level_set_geometry(phi, None)
                per = geo.perimeter
            except EmptyInterfaceError:
                per = 0.0
            self.radii.append({"t": rec.t, "perimeter": per,
                               "radii": [radius_samples(phi.values, c, cfg.dim)
                                         for c in cfg.radius_centers]})
        for i, y in enumerate(cfg.kernel_centers):
            for s in cfg.kernel_horizons:
                v = heat_kernel_functional(phi, p, KernelQuery(tuple(y), s, rec.t))
                self.kernel.setdefault((i, s), []).append((rec.t, v, rec.int_lambda_sq))
        if self.density_centers:
            m = max(density_ratios(phi, p, self.density_centers, cfg.density_radii))
            self.density.append((rec.t, m))
            self.density_cap = max(self.density_cap, m)
        for h in self.extra_hooks:
            h(state, rec)

    def kernel_summary(self):
        out = []
        worst = math.inf
        for (i, s), series in sorted(self.kernel.items()):
            margins = []
            for (t1, v1, l1), (t2, v2, l2) in zip(series, series[1:]):
                m = monotonicity_check(t1, t2, v1, v2, l1, l2)
                rel = m / v1 if v1 > 0 else (0.0 if m >= 0 else -math.inf)
                margins.append(rel)
            wm = min(margins) if margins else 0.0
            worst = min(worst, wm)
            out.append({"center": self.cfg.kernel_centers[i], "s": s,
                        "values": [v for _, v, _ in series], "min_rel_margin": wm})
        return out, (worst if out else None)


def execute(cfg, outdir=None, write=True, hooks=(), max_failures=50):
    """Run a validated RunConfig; returns RunOutcome (never raises on invariant failures)."""
    g = cfg.grid
    pd = build_phi0(cfg.shape, g, cfg.eps, cfg.b)
    params = ModelParams(cfg.eps, cfg.alpha, cfg.kind, pd.m0)
    ctrl = StepControl.default(g, cfg.eps, cfg.safety, cfg.scheme)
    mon = _Monitor(cfg, pd, params)
    mon.extra_hooks = list(hooks)
    res = run(pd, params, ctrl, cfg.T, cfg.cadence, cfg.snapshot_times,
              energy_every_step=cfg.energy_every_step, record_hook=mon)
    recs = res.records
    failures = list(mon.failures[:max_failures])
    if cfg.energy_every_step and res.energy_series:
        E = np.asarray(res.energy_series)
        worst = float(np.max(np.diff(E))) / E[0] if len(E) > 1 else 0.0
        if worst > 1e-7:
            failures.append(f"per-step energy increase {worst:.3g} E(0) > 1e-7 E(0)")
    else:
        worst = None
    kern, kern_worst = mon.kernel_summary()
    summary = {
        "n_steps": res.n_steps, "dt": res.dt, "T": cfg.T, "eps": cfg.eps, "alpha": cfg.alpha,
        "n": cfg.n, "dim": cfg.dim, "kind": cfg.kind.value, "m0": pd.m0, "b": pd.b,
        "E0": recs[0].E, "ET": recs[-1].E, "ES0": pd.surface_energy0,
        "int_lambda_sq_T": recs[-1].int_lambda_sq, "int_lambda_T": res.final.int_lambda,
        "dissipation_T": recs[-1].dissipation,
        "energy_identity_residual": recs[0].E - recs[-1].E - recs[-1].dissipation,
        "max_mass_deficit_ratio": max(r.mass_deficit / r.mass_bound for r in recs),
        "max_sup_abs_phi": max(r.sup_abs_phi for r in recs),
        "max_xi_pos_l1": max(r.xi_pos_l1 for r in recs),
        "integral_phi_0": integrate_array(pd.phi0.values, g),
        "integral_phi_T": integrate_array(res.final.phi.values, g),
        "max_step_energy_increase": worst,
        "radii": mon.radii, "kernel": kern, "kernel_worst_rel_margin": kern_worst,
        "density_cap": mon.density_cap if mon.density_centers else None,
        "density_series": mon.density,
        "failures": failures,
    }
    if cfg.first_variation and cfg.radius_centers:
        c = cfg.radius_centers[0]
        tf = radial_test_field(g, c)
        summary["first_variation"] = {
            "t0": first_variation(pd.phi0, params, tf),
            "t0_direct": first_variation_direct(pd.phi0, params, tf),
            "T": first_variation(res.final.phi, params, tf),
            "T_direct": first_variation_direct(res.final.phi, params, tf),
        }
    out = RunOutcome(cfg, pd, params, res, recs, summary, failures)
    if write:
        write_outputs(out, outdir)
    return out


def _resolve(path, outdir):
    if outdir is None or os.path.isabs(path):
        return path
    return os.path.join(outdir, path)


def write_outputs(out, outdir=None):
    cfg = out.config
    io.write_csv(out.records, _resolve(cfg.csv, outdir))
    p = out.params
    sdir = _resolve(cfg.snapshot_dir, outdir)
    for t, phi, st in out.result.snapshots:
        io.write_snapshot(os.path.join(sdir, f"phi_t{t:.6e}.bin"), phi, eps=p.eps,
                          alpha=p.alpha, kind=p.kind.value, t=t, m0=p.m0,
                          es0=out.prepared.surface_energy0, int_lambda=st.int_lambda,
                          int_lambda_sq=st.int_lambda_sq, dissipation=st.dissipation)
    io.write_json(_resolve(cfg.summary, outdir), out.summary)
