"""Double-well potential, tanh profile and the two non-local multipliers."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels as K
from .errors import BlowupError
from .field import ScalarField, lap_array

SIGMA = 4.0 / 3.0
K_MAX = 2.0 / 3.0


class Kind(str, Enum):
    TAKASAO = "takasao"
    RS = "rubinstein-sternberg"

    @classmethod
    def parse(cls, s):
        if isinstance(s, cls):
            return s
        key = str(s).strip().lower().replace("_", "-")
        aliases = {"takasao": cls.TAKASAO, "rs": cls.RS, "rubinstein-sternberg": cls.RS,
                   "rubinsteinsternberg": cls.RS}
        if key not in aliases:
            raise ValueError(f"unknown model kind {s!r}")
        return aliases[key]


@dataclass(frozen=True)
class ModelParams:
    eps: float
    alpha: float = 0.5
    kind: Kind = Kind.TAKASAO
    m0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind.parse(self.kind))
        for name in ("eps", "alpha", "m0"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not 0.0 < self.eps < 1.0:
            raise ValueError(f"eps must lie in (0,1), got {self.eps}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0,1), got {self.alpha}")
        if not K_MAX - abs(self.m0) > 0.0:
            raise ValueError(f"|m0| must be < 2/3, got {self.m0}")

    @property
    def penalty(self):
        """eps^(-alpha)."""
        return self.eps ** (-self.alpha)

    @property
    def lambda_bound(self):
        return 2.0 * K_MAX * self.penalty

    def with_m0(self, m0):
        return ModelParams(self.eps, self.alpha, self.kind, m0)


def well_W(a):
    a = np.asarray(a, dtype=float)
    q = 1.0 - a * a
    return 0.5 * q * q


def well_Wprime(a):
    a = np.asarray(a, dtype=float)
    return -2.0 * a * (1.0 - a * a)


def sqrt_two_W(a):
    c = np.clip(np.asarray(a, dtype=float), -1.0, 1.0)
    return 1.0 - c * c


def k_antideriv(s):
    s = np.asarray(s, dtype=float)
    return s - s * s * s / 3.0


def sigma():
    return SIGMA


def q_profile(r, eps):
    return np.tanh(np.asarray(r, dtype=float) / eps)


def q_profile_dr(r, eps):
    q = q_profile(r, eps)
    return (1.0 - q * q) / eps


def _arr(phi):
    return phi.values if isinstance(phi, ScalarField) else np.ascontiguousarray(phi, dtype=float)


def mass(phi, grid=None):
    """integral of k(phi); used for m0 and for the running mass alike."""
    a = _arr(phi)
    g = phi.grid if grid is None else grid
    return g.cell_volume * K.fsum_k(a)


def lambda_takasao(phi, p: ModelParams, grid=None) -> float:
    return p.penalty * (p.m0 - mass(phi, grid))


def lambda_rs(phi, eps, grid=None) -> float:
    a = _arr(phi)
    g = phi.grid if grid is None else grid
    return g.cell_volume * K.fsum_wprime(a) / eps


def multiplier(phi, p: ModelParams, grid=None) -> float:
    if p.kind is Kind.TAKASAO:
        return lambda_takasao(phi, p, grid)
    return lambda_rs(phi, p.eps, grid)


def rate_array(a, n, p: ModelParams, lam):
    """dphi/dt for raw array a given an already evaluated multiplier."""
    inv_eps2 = 1.0 / (p.eps * p.eps)
    forcing = lam / p.eps
    out = lap_array(a, n) - well_Wprime(a) * inv_eps2
    if p.kind is Kind.TAKASAO:
        return out + forcing * sqrt_two_W(a)
    return out + forcing


def rhs(phi: ScalarField, p: ModelParams):
    """(dphi/dt, multiplier) with the multiplier taken from the current phi."""
    a = phi.values
    if K.absmax(a) == np.inf:
        raise BlowupError("phi contains non-finite values")
    lam = multiplier(phi, p)
    return ScalarField(phi.grid, rate_array(a, phi.grid.n, p, lam)), lam
