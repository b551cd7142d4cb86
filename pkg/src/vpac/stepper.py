"""Explicit time stepping with an RK4 oracle and the driver loop."""

import math
from dataclasses import dataclass, field as dc_field, replace
from enum import Enum

import numpy as np

from . import _kernels as K
from .diagnostics import make_record, surface_energy
from .errors import BlowupError
from .field import Grid, ScalarField
from .model import Kind, ModelParams, multiplier, rate_array

BLOWUP = 1.1


class Scheme(str, Enum):
    EULER = "euler"
    RK4 = "rk4"

    @classmethod
    def parse(cls, s):
        if isinstance(s, cls):
            return s
        key = str(s).strip().lower().replace("_", "").replace("-", "")
        table = {"euler": cls.EULER, "expliciteuler": cls.EULER, "rk4": cls.RK4,
                 "rk4oracle": cls.RK4}
        if key not in table:
            raise ValueError(f"unknown scheme {s!r}")
        return table[key]


def stable_dt(g: Grid, eps, safety=0.2):
    if not 0 < safety <= 1:
        raise ValueError("safety must lie in (0, 1]")
    return safety * min(g.h * g.h / (2 * g.dim), eps * eps / 4)


@dataclass(frozen=True)
class StepControl:
    dt: float
    safety: float = 0.2
    scheme: Scheme = Scheme.EULER

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    @classmethod
    def default(cls, g, eps, safety=0.2, scheme=Scheme.EULER):
        return cls(stable_dt(g, eps, safety), safety, scheme)

    def check(self, g, eps):
        lim = stable_dt(g, eps, self.safety)
        if self.dt > lim * (1 + 1e-12):
            raise ValueError(f"dt = {self.dt:.6g} exceeds the stability limit {lim:.6g}")


@dataclass(frozen=True, eq=False)
class SimState:
    phi: ScalarField
    params: ModelParams
    t: float = 0.0
    int_lambda: float = 0.0
    int_lambda_sq: float = 0.0
    dissipation: float = 0.0
    steps: int = 0


def _check_blowup(a, t):
    s = K.absmax(a)
    if s == np.inf:
        raise BlowupError("non-finite values in phi", t)
    if s > BLOWUP:
        raise BlowupError(f"sup|phi| = {s:.6g} exceeds {BLOWUP}", t)


def _euler(a, p, n, dt, lam):
    out = np.empty_like(a)
    rate = np.empty_like(a)
    K.euler_update(K.as3d(a), K.as3d(out), K.as3d(rate), float(dt), float(n * n),
                   1.0 / (p.eps * p.eps), lam / p.eps, p.kind is Kind.TAKASAO)
    return out, rate


def _rk4(a, p, g, dt):
    def f(x):
        return rate_array(x, g.n, p, multiplier(x, p, g))

    k1 = f(a)
    k2 = f(a + 0.5 * dt * k1)
    k3 = f(a + 0.5 * dt * k2)
    k4 = f(a + dt * k3)
    return a + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), k1


def step(s: SimState, ctrl: StepControl) -> SimState:
    """One step; accumulators use the left endpoint (start-of-step lambda and rate)."""
    p = s.params
    g = s.phi.grid
    ctrl.check(g, p.eps)
    a = s.phi.values
    lam = multiplier(a, p, g)
    if ctrl.scheme is Scheme.EULER:
        new, rate = _euler(a, p, g.n, ctrl.dt, lam)
    else:
        new, rate = _rk4(a, p, g, ctrl.dt)
    t = s.t + ctrl.dt
    _check_blowup(new, t)
    diss = ctrl.dt * p.eps * g.cell_volume * K.fsum_sq(rate)
    return replace(s, phi=ScalarField(g, new), t=t,
                   int_lambda=s.int_lambda + ctrl.dt * lam,
                   int_lambda_sq=s.int_lambda_sq + ctrl.dt * lam * lam,
                   dissipation=s.dissipation + diss, steps=s.steps + 1)


@dataclass
class RunResult:
    final: SimState
    records: list
    snapshots: list = dc_field(default_factory=list)  # (t, ScalarField, SimState)
    energy_series: list = None  # E after every step when requested
    lambda_series: list = None  # (t, lambda, int_lambda) after every step when requested
    dt: float = 0.0
    n_steps: int = 0

    def __iter__(self):
        return iter((self.final, self.records, self.snapshots))


def plan_steps(T, dt):
    """Number of steps and the equalized step so that n*dt lands on T."""
    if T < 0:
        raise ValueError("T must be nonnegative")
    if T == 0:
        return 0, dt
    n = max(1, math.ceil(T / dt - 1e-9))
    return n, T / n


def run(pd, p: ModelParams, ctrl: StepControl, T, cadence=1, snapshot_times=(),
        energy_every_step=False, track_lambda=False, record_hook=None):
    """Integrate from the prepared data to time T.

    Records are emitted at t=0, every `cadence` steps and at T.  Snapshots are
    taken at the first step whose time reaches each requested time.
    ``record_hook(state, record)`` may inspect each record as it is produced.
    """
    if cadence < 1:
        raise ValueError("cadence must be >= 1")
    phi0 = pd.phi0 if hasattr(pd, "phi0") else pd
    g = phi0.grid
    ctrl.check(g, p.eps)
    n_steps, dt = plan_steps(T, ctrl.dt)
    es0 = surface_energy(phi0, p.eps)
    state = SimState(phi0, p)
    lam = multiplier(phi0.values, p, g)
    records = [make_record(phi0, p, 0.0, lam, 0.0, 0.0, es0)]
    if record_hook:
        record_hook(state, records[-1])
    snaps = []
    pending = sorted(float(x) for x in snapshot_times)
    while pending and pending[0] <= 0.0:
        snaps.append((0.0, phi0, state))
        pending.pop(0)
    energy = [records[0].E] if energy_every_step else None
    lam_series = [(0.0, lam, 0.0)] if track_lambda else None

    if ctrl.scheme is Scheme.RK4:
        cur = state
        for k in range(n_steps):
            cur = step(cur, replace(ctrl, dt=dt))
            lam = multiplier(cur.phi.values, p, g)
            t = T if k + 1 == n_steps else cur.t
            cur = replace(cur, t=t)
            _after(k, cur, lam, n_steps, cadence, p, es0, records, record_hook,
                   pending, snaps, energy, lam_series)
        return RunResult(cur, records, snaps, energy, lam_series, dt, n_steps)

    a = np.array(phi0.values)
    b = np.empty_like(a)
    rate = np.empty_like(a)
    a3, b3, r3 = K.as3d(a), K.as3d(b), K.as3d(rate)
    inv_h2 = float(g.n * g.n)
    inv_eps2 = 1.0 / (p.eps * p.eps)
    takasao = p.kind is Kind.TAKASAO
    hd = g.cell_volume
    il = ils = diss = 0.0
    t = 0.0
    for k in range(n_steps):
        K.euler_update(a3, b3, r3, dt, inv_h2, inv_eps2, lam / p.eps, takasao)
        diss += dt * p.eps * hd * K.fsum_sq(rate)
        il += dt * lam
        ils += dt * lam * lam
        t = T if k + 1 == n_steps else (k + 1) * dt
        _check_blowup(b, t)
        a, b = b, a
        a3, b3 = b3, a3
        lam = multiplier(a, p, g)
        need_rec = (k + 1) % cadence == 0 or k + 1 == n_steps
        need_snap = bool(pending) and t >= pending[0] - 1e-12 * max(T, 1.0)
        if need_rec or need_snap or energy is not None or lam_series is not None:
            cur = SimState(ScalarField(g, a.copy()) if (need_rec or need_snap) else None, p, t,
                           il, ils, diss, k + 1)
            _after(k, cur, lam, n_steps, cadence, p, es0, records, record_hook, pending, snaps,
                   energy, lam_series, raw=a)
    final = SimState(ScalarField(g, a.copy()), p, t, il, ils, diss, n_steps)
    return RunResult(final, records, snaps, energy, lam_series, dt, n_steps)


def _after(k, cur, lam, n_steps, cadence, p, es0, records, hook, pending, snaps, energy,
           lam_series, raw=None):
    if energy is not None:
        arr = raw if raw is not None else cur.phi.values
        gsum, wsum = K.energy_sums(K.as3d(arr))
        n = int(round(arr.shape[0]))
        es = (1.0 / n) ** arr.ndim * (0.5 * p.eps * gsum * float(n * n) + wsum / p.eps)
        ep = 0.0
        if p.kind is Kind.TAKASAO:
            d = p.m0 - (1.0 / n) ** arr.ndim * K.fsum_k(arr)
            ep = d * d / (2.0 * p.eps ** p.alpha)
        energy.append(es + ep)
    if lam_series is not None:
        lam_series.append((cur.t, lam, cur.int_lambda))
    if (k + 1) % cadence == 0 or k + 1 == n_steps:
        rec = make_record(cur.phi, p, cur.t, lam, cur.int_lambda_sq, cur.dissipation, es0)
        records.append(rec)
        if hook:
            hook(cur, rec)
    while pending and cur.phi is not None and cur.t >= pending[0] - 1e-12:
        snaps.append((cur.t, cur.phi, cur))
        pending.pop(0)
