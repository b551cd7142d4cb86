"""Run configuration: YAML schema, defaults, validation and overrides.

Schema (all sections optional except grid/model/shape/stepping.T)::

    grid:     {dim: 2, n: 256}            # n may be "auto": smallest 2^k >= 4/eps
    model:    {kind: takasao, eps: 0.02, alpha: 0.5}
    shape:    {type: ball, center: [0.5, 0.5], radius: 0.2}
              # or {type: balls, balls: [{center: .., radius: ..}, ..]}
              # or {type: ellipsoid, center: .., axes: ..}
              # or {type: slab, axis: 0, center: 0.5, half_width: 0.25}
              # any shape may carry complement: true
    clamp:    {b: null}                   # null -> max(10 eps, 0.05)
    stepping: {scheme: euler, safety: 0.2, T: 0.05, cadence: 1000}
    outputs:  {csv: run.csv, snapshot_times: [], snapshot_dir: snapshots, summary: summary.json}
    diagnostics:
      radius_centers: auto                # list of points, or auto (shape centres)
      kernel: {centers: [], horizons: []} # centers: points or "auto"; horizons: absolute s
      density: {n_centers: 20, radii: [2eps, 4eps, 0.1, 0.2], seed: 0}
      first_variation: false
      energy_every_step: false
"""

import copy
import math
from dataclasses import dataclass, field

import yaml

from ..errors import ConfigError, GeometryError
from ..field import Grid
from ..initial import Ball, BallUnion, Complement, Ellipsoid, Slab, default_b
from ..model import Kind
from ..stepper import Scheme

DEFAULTS = {
    "grid": {"dim": 2, "n": "auto"},
    "model": {"kind": "takasao", "alpha": 0.5},
    "clamp": {"b": None},
    "stepping": {"scheme": "euler", "safety": 0.2, "cadence": 1000},
    "outputs": {"csv": "run.csv", "snapshot_times": [], "snapshot_dir": "snapshots",
                "summary": "summary.json"},
    "diagnostics": {"radius_centers": "auto",
                    "kernel": {"centers": [], "horizons": []},
                    "density": {"n_centers": 0, "radii": ["2eps", "4eps", 0.1, 0.2], "seed": 0},
                    "first_variation": False,
                    "energy_every_step": False},
}


@dataclass
class RunConfig:
    dim: int
    n: int
    kind: Kind
    eps: float
    alpha: float
    shape: object
    b: float
    scheme: Scheme
    safety: float
    T: float
    cadence: int
    csv: str
    snapshot_times: list
    snapshot_dir: str
    summary: str
    radius_centers: list
    kernel_centers: list
    kernel_horizons: list
    density_n_centers: int
    density_radii: list
    density_seed: int
    first_variation: bool
    energy_every_step: bool
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def grid(self):
        return Grid(self.dim, self.n)


def deep_merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def set_path(d, path, value):
    keys = path.split(".")
    cur = d
    for k in keys[:-1]:
        nxt = cur.get(k)
        if not isinstance(nxt, dict):
            nxt = {}
            cur[k] = nxt
        cur = nxt
    cur[keys[-1]] = value


def get_path(d, path, default=None):
    cur = d
    for k in path.split("."):
        if not isinstance(cur, dict) or k not in cur:
            return default
        cur = cur[k]
    return cur


def parse_override(text):
    if "=" not in text:
        raise ConfigError([(text, "override must look like key=value")])
    key, val = text.split("=", 1)
    return key.strip(), yaml.safe_load(val)


def apply_overrides(d, overrides):
    d = copy.deepcopy(d)
    for o in overrides or ():
        if isinstance(o, str):
            k, v = parse_override(o)
        else:
            k, v = o
        set_path(d, k, v)
    return d


def auto_n(eps):
    n = 8
    while n < 4.0 / eps * (1 - 1e-12):
        n *= 2
    return n


def _num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _radius(v, eps):
    if isinstance(v, str) and v.endswith("eps"):
        return float(v[:-3] or 1) * eps
    return float(v)


def build_shape(desc, dim):
    if not isinstance(desc, dict) or "type" not in desc:
        raise ConfigError([("shape.type", "required (ball, balls, ellipsoid, slab)")])
    t = str(desc["type"]).lower()
    try:
        if t == "ball":
            s = Ball(desc["center"], desc["radius"])
        elif t in ("balls", "ball_union", "union"):
            s = BallUnion(tuple(Ball(b["center"], b["radius"]) for b in desc["balls"]))
        elif t == "ellipsoid":
            s = Ellipsoid(desc["center"], desc["axes"])
        elif t == "slab":
            s = Slab(int(desc.get("axis", 0)), float(desc["center"]), float(desc["half_width"]),
                     ndim=dim)
        else:
            raise ConfigError([("shape.type", f"unknown shape {t!r}")])
    except KeyError as e:
        raise ConfigError([(f"shape.{e.args[0]}", "required")]) from None
    except (GeometryError, ValueError, TypeError) as e:
        raise ConfigError([("shape", str(e))]) from None
    if s.dim != dim:
        raise ConfigError([("shape", f"dimension {s.dim} does not match grid.dim {dim}")])
    if desc.get("complement"):
        s = Complement(s)
    return s


def shape_centers(shape):
    if isinstance(shape, Complement):
        return shape_centers(shape.inner)
    if isinstance(shape, (Ball, Ellipsoid)):
        return [list(shape.center)]
    if isinstance(shape, BallUnion):
        return [list(b.center) for b in shape.balls]
    return []


def from_dict(d) -> RunConfig:
    if not isinstance(d, dict):
        raise ConfigError([("<root>", "configuration must be a mapping")])
    d = deep_merge(DEFAULTS, d)
    bad = []

    dim = get_path(d, "grid.dim")
    if dim not in (1, 2, 3):
        bad.append(("grid.dim", "must be 1, 2 or 3"))
    kind = get_path(d, "model.kind")
    try:
        kind = Kind.parse(kind)
    except ValueError:
        bad.append(("model.kind", "takasao or rubinstein-sternberg"))
    eps = get_path(d, "model.eps")
    if not _num(eps) or not 0 < eps < 1:
        bad.append(("model.eps", "(0,1)"))
        eps = None
    alpha = get_path(d, "model.alpha")
    if not _num(alpha) or not 0 < alpha < 1:
        bad.append(("model.alpha", "(0,1)"))

    n = get_path(d, "grid.n")
    if n == "auto":
        n = auto_n(eps) if eps else None
    elif not isinstance(n, int) or isinstance(n, bool) or n < 8:
        bad.append(("grid.n", "integer >= 8 or 'auto'"))
        n = None
    grid = None
    if n is not None and dim in (1, 2, 3):
        try:
            grid = Grid(dim, n)
        except ValueError as e:
            bad.append(("grid.n", str(e)))
    if grid is not None and eps is not None and grid.h > eps / 4 * (1 + 1e-12):
        bad.append(("resolution", f"h > eps/4 (h = {grid.h:.6g}, eps/4 = {eps / 4:.6g})"))

    b = get_path(d, "clamp.b")
    if b is None:
        b = default_b(eps) if eps else None
    elif (isinstance(b, str) and b.lower() in ("inf", "infinity")) or b == math.inf:
        b = math.inf
    elif not _num(b):
        bad.append(("clamp.b", "positive number or inf"))
        b = None
    if b is not None and eps is not None and b < 10 * eps * (1 - 1e-12):
        bad.append(("clamp.b", f"b >= 10*eps = {10 * eps:.6g}"))

    scheme = get_path(d, "stepping.scheme")
    try:
        scheme = Scheme.parse(scheme)
    except ValueError:
        bad.append(("stepping.scheme", "euler or rk4"))
    safety = get_path(d, "stepping.safety")
    if not _num(safety) or not 0 < safety <= 1:
        bad.append(("stepping.safety", "(0,1]"))
    T = get_path(d, "stepping.T")
    if not _num(T) or T < 0:
        bad.append(("stepping.T", "required, >= 0"))
    cadence = get_path(d, "stepping.cadence")
    if not isinstance(cadence, int) or isinstance(cadence, bool) or cadence < 1:
        bad.append(("stepping.cadence", "integer >= 1"))

    shape = None
    if dim in (1, 2, 3):
        try:
            shape = build_shape(d.get("shape"), dim)
        except ConfigError as e:
            bad.extend(e.violations)

    snaps = get_path(d, "outputs.snapshot_times") or []
    if not isinstance(snaps, list) or not all(_num(x) and x >= 0 for x in snaps):
        bad.append(("outputs.snapshot_times", "list of times >= 0"))
        snaps = []

    diag = d["diagnostics"]
    rc = diag.get("radius_centers", "auto")
    if rc == "auto":
        rc = shape_centers(shape) if (shape is not None and dim in (2, 3)) else []
    elif rc is None:
        rc = []
    kc = get_path(diag, "kernel.centers") or []
    if kc == "auto":
        kc = []
    kh = get_path(diag, "kernel.horizons") or []
    if not all(_num(s) and (not _num(T) or s > T) for s in kh):
        bad.append(("diagnostics.kernel.horizons", "numbers s > stepping.T"))
    dens = diag.get("density") or {}
    radii = []
    for r in dens.get("radii", []):
        try:
            rr = _radius(r, eps or 0.0)
        except (TypeError, ValueError):
            bad.append(("diagnostics.density.radii", f"bad radius {r!r}"))
            continue
        if not 0 < rr < 0.5:
            bad.append(("diagnostics.density.radii", f"radius {rr} outside (0, 1/2)"))
        radii.append(rr)

    if bad:
        raise ConfigError(bad)
    out = d.get("outputs", {})
    return RunConfig(
        dim=dim, n=n, kind=kind, eps=float(eps), alpha=float(alpha), shape=shape, b=float(b),
        scheme=scheme, safety=float(safety), T=float(T), cadence=int(cadence),
        csv=str(out.get("csv")), snapshot_times=[float(x) for x in snaps],
        snapshot_dir=str(out.get("snapshot_dir")), summary=str(out.get("summary")),
        radius_centers=[list(map(float, c)) for c in rc],
        kernel_centers=[list(map(float, c)) for c in kc],
        kernel_horizons=[float(s) for s in kh],
        density_n_centers=int(dens.get("n_centers", 0)), density_radii=radii,
        density_seed=int(dens.get("seed", 0)),
        first_variation=bool(diag.get("first_variation")),
        energy_every_step=bool(diag.get("energy_every_step")), raw=d)


def parse_config(text) -> RunConfig:
    try:
        d = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError([("<yaml>", str(e))]) from None
    return from_dict(d)


def load_config(path, overrides=()):
    from ..errors import IoError
    try:
        with open(path) as fh:
            d = yaml.safe_load(fh)
    except OSError as e:
        raise IoError(path, e.strerror or str(e)) from None
    except yaml.YAMLError as e:
        raise ConfigError([("<yaml>", str(e))]) from None
    return from_dict(apply_overrides(d, overrides))
