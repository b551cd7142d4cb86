"""Named scenarios: default configurations plus the assertions each one makes."""

import math

import numpy as np

from ..model import Kind
from .barrier import BarrierMonitor, check_g, precondition
from .config import apply_overrides, deep_merge, from_dict
from .runner import execute

DISK = {
    "grid": {"dim": 2, "n": 256},
    "model": {"kind": "takasao", "eps": 0.02, "alpha": 0.5},
    "shape": {"type": "ball", "center": [0.5, 0.5], "radius": 0.2},
    "stepping": {"T": 0.05, "cadence": 1000},
}

TWO_DISKS_SHAPE = {"type": "balls", "balls": [{"center": [0.3, 0.5], "radius": 0.15},
                                              {"center": [0.72, 0.5], "radius": 0.1}]}


def _kernel_centers_two_disks():
    return [[0.82, 0.5], [0.72, 0.6], [0.62, 0.5], [0.45, 0.5], [0.3, 0.65]]


BASE = {
    "stationary-disk": deep_merge(DISK, {
        "outputs": {"csv": "stationary-disk.csv", "summary": "stationary-disk.json"},
        "diagnostics": {"density": {"n_centers": 20}, "first_variation": True,
                        "energy_every_step": True},
    }),
    "two-disks": deep_merge(DISK, {
        "shape": TWO_DISKS_SHAPE,
        "stepping": {"T": 0.004, "cadence": 100},
        "outputs": {"csv": "two-disks.csv", "summary": "two-disks.json"},
        "diagnostics": {"kernel": {"centers": _kernel_centers_two_disks(),
                                   "horizons": [0.014, 0.024, 0.054]},
                        "energy_every_step": True},
    }),
    "dumbbell": deep_merge(DISK, {
        "shape": {"type": "balls", "balls": [{"center": [0.3375, 0.5], "radius": 0.15},
                                             {"center": [0.6625, 0.5], "radius": 0.15}]},
        "stepping": {"T": 0.01, "cadence": 500},
        "outputs": {"csv": "dumbbell.csv", "summary": "dumbbell.json"},
    }),
    "slab-1d": {
        "grid": {"dim": 1, "n": 512},
        "model": {"kind": "takasao", "eps": 0.02, "alpha": 0.5},
        "shape": {"type": "slab", "axis": 0, "center": 0.5, "half_width": 0.25},
        "stepping": {"T": 0.05, "cadence": 1000},
        "outputs": {"csv": "slab-1d.csv", "summary": "slab-1d.json"},
        "diagnostics": {"energy_every_step": True},
    },
    "rs-comparison": deep_merge(DISK, {
        "stepping": {"T": 0.01, "cadence": 500},
        "outputs": {"csv": "rs-comparison.csv", "summary": "rs-comparison.json"},
        "diagnostics": {"energy_every_step": True},
    }),
    "barrier": deep_merge(DISK, {
        "stepping": {"T": 0.002, "cadence": 50},
        "outputs": {"csv": "barrier.csv", "summary": "barrier.json"},
        "barrier": {"gamma": 0.1, "delta": 0.05},
    }),
}

NAMES = tuple(BASE)


def _mean_radius(entry, i):
    r = [x for x in entry["radii"][i] if not math.isnan(x)]
    return float(np.mean(r)) if r else math.nan


def check_stationary(out):
    bad = []
    r0 = 0.2
    for e in out.summary["radii"]:
        rs = e["radii"][0]
        worst = max(abs(r - r0) / r0 if not math.isnan(r) else math.inf for r in rs)
        if worst > 0.05:
            bad.append(f"t={e['t']!r}: radius drift {worst:.3g} > 5%")
            break
    return bad


def monotone_after(seq, transient, decreasing=True):
    """True if seq is monotone (non-strict) from some index <= transient on."""
    for k in range(min(transient, len(seq) - 1) + 1):
        tail = np.asarray(seq[k:])
        d = np.diff(tail)
        if np.all(d <= 0) if decreasing else np.all(d >= 0):
            return True
    return False


def check_two_disks(out):
    bad = []
    recs = out.records
    v0 = recs[0].volume
    for r in recs:
        if abs(r.volume - v0) > 0.75 * r.mass_bound:
            bad.append(f"t={r.t!r}: volume drift {abs(r.volume - v0):.3g} > 3/4 mass_bound")
            break
    radii = out.summary["radii"]
    big = [_mean_radius(e, 0) for e in radii]
    small = [_mean_radius(e, 1) for e in radii]
    if not monotone_after(small, 10, decreasing=True):
        bad.append("small disk radius not monotone decreasing after 10 records")
    if not monotone_after(big, 10, decreasing=False):
        bad.append("large disk radius not eventually monotone increasing")
    return bad


def check_slab(out):
    from ..model import SIGMA
    ratio = out.prepared.surface_energy0 / SIGMA
    return [] if abs(ratio - 2) <= 0.01 else [f"E_S(0)/sigma = {ratio:.5g} not within 2 +- 0.01"]


def _scenario_dict(name, overrides):
    if name not in BASE:
        raise KeyError(f"unknown scenario {name!r}; choose from {', '.join(NAMES)}")
    return apply_overrides(BASE[name], overrides)


def run_scenario(name, overrides=(), outdir=None, write=True):
    """Run a scenario; returns (exit status, list of RunOutcome, list of failures)."""
    d = _scenario_dict(name, overrides)
    outs, bad = [], []
    if name == "rs-comparison":
        for kind in ("takasao", "rubinstein-sternberg"):
            dk = apply_overrides(d, [("model.kind", kind),
                                     ("outputs.csv", f"rs-comparison-{kind}.csv"),
                                     ("outputs.summary", f"rs-comparison-{kind}.json")])
            o = execute(from_dict(dk), outdir, write)
            outs.append(o)
            bad += [f"[{kind}] {f}" for f in o.failures]
        tak, rs = outs
        drift = abs(rs.summary["integral_phi_T"] - rs.summary["integral_phi_0"])
        if drift > 1e-9:
            bad.append(f"[rubinstein-sternberg] integral of phi drifted by {drift:.3g} > 1e-9")
        if tak.summary["max_mass_deficit_ratio"] > 1:
            bad.append("[takasao] mass deficit exceeded the bound")
        return (1 if bad else 0), outs, bad
    if name == "barrier":
        bcfg = d.pop("barrier", {})
        cfg = from_dict(d)
        if cfg.kind is not Kind.TAKASAO or cfg.dim not in (1, 2):
            raise ValueError("barrier scenario needs a 1D/2D Takasao run")
        mon = BarrierMonitor(cfg.grid, cfg.eps, float(bcfg.get("delta", 0.05)),
                             float(bcfg.get("gamma", 0.1)))
        out = run_barrier(cfg, mon, outdir, write)
        outs.append(out)
        bad += out.failures
        return (1 if bad else 0), outs, bad
    d.pop("barrier", None)
    out = execute(from_dict(d), outdir, write)
    outs.append(out)
    bad += out.failures
    extra = {"stationary-disk": check_stationary, "two-disks": check_two_disks,
             "slab-1d": check_slab}.get(name)
    if extra:
        bad += extra(out)
    return (1 if bad else 0), outs, bad


def run_barrier(cfg, mon, outdir=None, write=True, tol=1e-3):
    from ..initial import build_phi0
    pd = build_phi0(cfg.shape, cfg.grid, cfg.eps, cfg.b)
    pre = precondition(pd.phi0, cfg.eps, mon.delta, mon.gamma)
    out = execute(cfg, outdir, write=False, hooks=[mon])
    rep = mon.report(tol)
    rep["precondition_margin"] = pre
    rep["g_violations"] = check_g()
    out.summary["barrier"] = rep
    if pre < 0:
        out.failures.append(f"barrier precondition phi~(0) >= phi0 fails by {pre:.3g}")
    if rep["min_margin"] < -tol:
        out.failures.append(f"barrier margin {rep['min_margin']:.3g} < -{tol}")
    out.failures += [f"g property: {v}" for v in rep["g_violations"]]
    out.summary["failures"] = out.failures
    if write:
        from .runner import write_outputs
        write_outputs(out, outdir)
    return out
