"""Thermal disentanglement by bath-photon recoils.

Absorption-reemission cycles driven by thermal photons at rate 2*D*Gamma_a
each give the atom two independent +-k_a kicks, so every momentum variance
grows by 4*D*k_a^2*Gamma_a per unit time.  Applying the same diffusion to
the unconditional variance dq0 and to the conditional one dq0/R0 gives

    R(t) = R0 (A + Gamma_a t) / (A + R0 Gamma_a t),   A = dq0/(4 D k_a^2).

SI units throughout: times in s, momenta in 1/m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SeedRequired
from .physics import CONSTANTS, thermal_occupation


@dataclass(frozen=True)
class HeatbathScenario:
    D: float
    k_a: float
    gamma_a: float
    r0: float
    dq0: float

    def __post_init__(self):
        bad = [n for n in ("k_a", "gamma_a", "dq0") if not getattr(self, n) > 0]
        if not self.D >= 0 or not math.isfinite(self.D):
            bad.append("D")
        if not self.r0 >= 1:
            bad.append("r0")
        if bad:
            raise DomainError(*bad)

    @classmethod
    def thermal(cls, T: float, omega_a: float, gamma_a: float, r0: float, dq0: float, k_a=None):
        """Scenario at bath temperature T; k_a defaults to omega_a/c."""
        k = omega_a / CONSTANTS.c if k_a is None else k_a
        return cls(D=thermal_occupation(T, omega_a), k_a=k, gamma_a=gamma_a, r0=r0, dq0=dq0)

    @property
    def diffusion(self) -> float:
        """Variance growth rate 4*D*k_a^2*Gamma_a (1/m^2/s)."""
        return 4.0 * self.D * self.k_a**2 * self.gamma_a

    @property
    def a_param(self) -> float:
        if self.D == 0:
            return math.inf
        return self.dq0 / (4.0 * self.D * self.k_a**2)


def dq_single(scn: HeatbathScenario, t):
    return scn.dq0 + scn.diffusion * np.asarray(t, dtype=float)


def r_of_t(scn: HeatbathScenario, t):
    """Closed-form R(t); R(0) = R0, decreasing to 1."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t", detail="t must be >= 0")
    if scn.D == 0:
        return np.full(t.shape, float(scn.r0)) if t.ndim else float(scn.r0)
    a = scn.a_param
    g = scn.gamma_a
    out = scn.r0 * (a + g * t) / (a + scn.r0 * g * t)
    return out if t.ndim else float(out)


@dataclass(frozen=True)
class DisentanglingTime:
    exact: float  # root of R(t) = R0/2
    approx: float  # dq0/(4 D R0 k_a^2 Gamma_a)


def disentangling_time(scn: HeatbathScenario) -> DisentanglingTime:
    if not scn.r0 > 2:
        raise DomainError("r0", detail="half-time undefined for R0 <= 2")
    if scn.D == 0:
        return DisentanglingTime(math.inf, math.inf)
    a = scn.a_param
    return DisentanglingTime(
        exact=a / ((scn.r0 - 2.0) * scn.gamma_a),
        approx=a / (scn.r0 * scn.gamma_a),
    )


@dataclass(frozen=True)
class EntanglementBound:
    r_max: float
    satisfied: bool  # R0 < R_max/10


def entanglement_bound(scn: HeatbathScenario, delta_p: float, mass: float, omega_1c: float):
    """Largest R0 that survives the entanglement time: 0.2*sqrt(hbar k1c dp^3/(D m k_a^2 Gamma_a))."""
    bad = [n for n, v in (("delta_p", delta_p), ("mass", mass), ("omega_1c", omega_1c)) if not v > 0]
    if bad:
        raise DomainError(*bad)
    if scn.D == 0:
        return EntanglementBound(math.inf, True)
    k1c = omega_1c / CONSTANTS.c
    r_max = 0.2 * math.sqrt(
        CONSTANTS.hbar * k1c * delta_p**3 / (scn.D * mass * scn.k_a**2 * scn.gamma_a)
    )
    return EntanglementBound(r_max, scn.r0 < r_max / 10.0)


@dataclass(frozen=True)
class DisentanglementTrace:
    times: np.ndarray
    r_values: np.ndarray
    dq_single_t: np.ndarray
    dt_dis: float
    r_bound: float


def trace(scn: HeatbathScenario, t_max: float, n: int = 50, bound=None) -> DisentanglementTrace:
    """Closed-form R(t) and dq_single(t) sampled on [0, t_max]."""
    t = np.linspace(0.0, t_max, n)
    dt = disentangling_time(scn).exact if scn.r0 > 2 else math.nan
    return DisentanglementTrace(
        times=t,
        r_values=r_of_t(scn, t),
        dq_single_t=dq_single(scn, t),
        dt_dis=dt,
        r_bound=math.nan if bound is None else bound,
    )


@dataclass(frozen=True)
class KickEstimate:
    times: np.ndarray
    var_single: np.ndarray
    var_coin: np.ndarray
    r_values: np.ndarray
    r_err: np.ndarray  # one standard error


def _var_and_m4(x: np.ndarray) -> tuple[float, float]:
    d = x - x.mean()
    return float(np.mean(d**2)), float(np.mean(d**4))


def kick_oracle(
    scn: HeatbathScenario,
    times,
    n_traj: int = 100_000,
    seed: int | None = None,
    deterministic: bool = True,
) -> KickEstimate:
    """Monte-Carlo momentum diffusion by random +-k_a recoils.

    Cycles arrive as a Poisson process at rate 2*D*Gamma_a; each cycle adds
    two independent +-k_a kicks.  Two ensembles start from Gaussian momenta
    with variances dq0 and dq0/R0 and share no random numbers.  The error of
    R is propagated from the fourth central moments (delta method).
    """
    if deterministic and seed is None:
        raise SeedRequired("seed", detail="deterministic run needs --seed")
    if n_traj < 2:
        raise DomainError("n_traj")
    t = np.asarray(times, dtype=float)
    if np.any(np.diff(t) < 0) or np.any(t < 0):
        raise DomainError("times", detail="must be nonnegative and sorted")
    rng = np.random.default_rng(seed)
    rate = 2.0 * scn.D * scn.gamma_a
    out = []
    for var0 in (scn.dq0, scn.dq0 / scn.r0):
        p = rng.normal(0.0, math.sqrt(var0), n_traj)
        prev = 0.0
        rows = []
        for ti in t:
            cycles = rng.poisson(rate * (ti - prev), n_traj)
            kicks = 2 * cycles
            # sum of k independent +-1 signs = 2*Binomial(k, 1/2) - k
            p = p + scn.k_a * (2.0 * rng.binomial(kicks, 0.5) - kicks)
            rows.append(_var_and_m4(p))
            prev = ti
        out.append(np.array(rows))
    vs, m4s = out[0][:, 0], out[0][:, 1]
    vc, m4c = out[1][:, 0], out[1][:, 1]
    r = vs / vc
    # Var(sample variance) ~ (m4 - v^2)/n
    rel2 = (m4s - vs**2) / (n_traj * vs**2) + (m4c - vc**2) / (n_traj * vc**2)
    return KickEstimate(times=t, var_single=vs, var_coin=vc, r_values=r, r_err=r * np.sqrt(rel2))
