"""Physical constants, scenario parameters and their validation.

All model computations run in reduced units: rates and frequencies of the
three-level problem are measured in units of the upper-level linewidth
``gamma`` and momenta are the dimensionless offsets ``dq``/``dk``.  The SI
fields of :class:`ScenarioParams` are anchors used only to derive ``eta``,
the thermal occupation ``D`` and the heat-bath time scales.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Mapping

import numpy as np
from scipy import constants as _codata

from .errors import DomainError


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float
    c: float
    k_B: float


CONSTANTS = PhysicalConstants(hbar=_codata.hbar, c=_codata.c, k_B=_codata.k)

_REL_TOL = 1e-9


@dataclass(frozen=True)
class ScenarioParams:
    """Physical inputs of one scenario.

    Model fields (reduced units): ``gamma``, ``epsilon``, ``omega`` (Rabi
    frequency / gamma), ``delta_big`` (detuning / gamma), ``delta_rel``,
    ``omega_12`` (upper-level splitting / gamma), ``eta``.

    SI anchors: ``delta_p`` (1/m), ``mass`` (kg), ``omega_1c`` (rad/s),
    ``bath_T`` (K), ``omega_a`` (rad/s), ``gamma_a`` (1/s), ``k_a`` (1/m).
    When SI anchors are used, ``gamma`` is read as a rate in 1/s.
    """

    gamma: float = 1.0
    epsilon: float = 1.0
    omega: float | None = None
    delta_big: float | None = None
    delta_rel: float | None = None
    omega_12: float | None = None
    eta: float | None = None
    delta_p: float | None = None
    mass: float | None = None
    omega_1c: float | None = None
    bath_T: float | None = None
    omega_a: float | None = None
    gamma_a: float | None = None
    k_a: float | None = None

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "ScenarioParams":
        unknown = sorted(set(values) - set(cls.field_names()))
        if unknown:
            raise DomainError(*unknown, detail="unknown scenario key")
        return cls(**{k: (None if v is None else float(v)) for k, v in values.items()})

    def to_dict(self) -> dict[str, float | None]:
        return asdict(self)

    def replace(self, **changes: Any) -> "ScenarioParams":
        # Always returns a raw (unvalidated) scenario.
        return ScenarioParams(**{**self.to_dict(), **changes})

    def require(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise DomainError(*missing, detail="required but not set")


@dataclass(frozen=True)
class ValidatedScenario(ScenarioParams):
    """Scenario that passed :func:`validate`; derived fields are filled in."""


def _eta_from_anchors(p: ScenarioParams) -> float:
    return CONSTANTS.hbar * p.omega_1c * p.delta_p / (p.mass * p.gamma * CONSTANTS.c)


def validate(params: ScenarioParams) -> ValidatedScenario:
    """Check invariants and fill derived fields.

    Derived: ``eta`` from the SI anchors, ``delta_rel`` from ``omega_12`` and
    ``delta_big`` (or ``omega_12`` from the other two), ``k_a = omega_a/c``.
    Raises :class:`DomainError` naming every violated invariant.
    """
    if isinstance(params, ValidatedScenario):
        return params

    bad: list[str] = []
    for f in fields(params):
        v = getattr(params, f.name)
        if v is not None and not math.isfinite(v):
            bad.append(f.name)

    def check(name: str, ok) -> None:
        v = getattr(params, name)
        if v is not None and name not in bad and not ok(v):
            bad.append(name)

    check("gamma", lambda v: v > 0)
    check("epsilon", lambda v: abs(v) <= 1)
    check("omega", lambda v: v >= 0)
    check("eta", lambda v: v > 0)
    check("bath_T", lambda v: v >= 0)
    check("gamma_a", lambda v: v > 0)
    check("k_a", lambda v: v > 0)
    for name in ("delta_p", "mass", "omega_1c", "omega_a"):
        check(name, lambda v: v > 0)
    if bad:
        raise DomainError(*bad)

    updates: dict[str, float] = {}
    p = params

    anchors = (p.delta_p, p.mass, p.omega_1c)
    if all(a is not None for a in anchors):
        eta_si = _eta_from_anchors(p)
        if p.eta is None:
            updates["eta"] = eta_si
        elif abs(p.eta - eta_si) > _REL_TOL * eta_si:
            bad.append("eta")

    if p.delta_big is not None:
        if p.delta_rel is None and p.omega_12 is not None:
            if p.delta_big == 0:
                bad.append("delta_big")
            else:
                updates["delta_rel"] = p.omega_12 / p.delta_big - 2.0
        elif p.delta_rel is not None and p.omega_12 is None:
            updates["omega_12"] = (2.0 + p.delta_rel) * p.delta_big
        elif p.delta_rel is not None and p.omega_12 is not None:
            expect = (2.0 + p.delta_rel) * p.delta_big
            if abs(p.omega_12 - expect) > _REL_TOL * max(abs(expect), 1.0):
                bad.append("omega_12")

    if p.k_a is None and p.omega_a is not None:
        updates["k_a"] = p.omega_a / CONSTANTS.c

    if bad:
        raise DomainError(*bad, detail="inconsistent with derived value")
    return ValidatedScenario(**{**p.to_dict(), **updates})


def thermal_occupation(T: float, omega_a: float) -> float:
    """Mean photon number 1/(exp(hbar*omega_a/(k_B*T)) - 1) of a thermal mode."""
    if not omega_a > 0:
        raise DomainError("omega_a")
    if T < 0:
        raise DomainError("bath_T")
    if T == 0:
        return 0.0
    x = CONSTANTS.hbar * omega_a / (CONSTANTS.k_B * T)
    if x > 700.0:
        return math.exp(-x)
    return 1.0 / math.expm1(x)


@dataclass(frozen=True)
class InitialWavepacket:
    """Gaussian momentum amplitude G(q) ~ exp(-((q - center)/delta_p)^2), unit L2 norm."""

    delta_p: float
    center: float = 0.0

    def __post_init__(self):
        if not self.delta_p > 0:
            raise DomainError("delta_p")

    def amplitude(self, q):
        q = np.asarray(q, dtype=float)
        norm = (2.0 / (math.pi * self.delta_p**2)) ** 0.25
        return norm * np.exp(-(((q - self.center) / self.delta_p) ** 2))

    @property
    def variance(self) -> float:
        # second central moment of |G|^2
        return self.delta_p**2 / 4.0


def load_scenario(path: str | Path) -> ScenarioParams:
    """Read a ``key = value`` scenario file (``#`` comments, no sections)."""
    text = Path(path).read_text(encoding="utf-8")
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#",), inline_comment_prefixes=("#",)
    )
    parser.optionxform = str  # keys are case-sensitive field names
    try:
        parser.read_string("[scenario]\n" + text)
    except configparser.Error as exc:
        raise DomainError("scenario_file", detail=str(exc)) from exc
    raw: dict[str, float] = {}
    for key, value in parser["scenario"].items():
        try:
            raw[key] = float(value)
        except ValueError as exc:
            raise DomainError(key, detail=f"not a number: {value!r}") from exc
    return ScenarioParams.from_mapping(raw)


def dump_scenario(params: ScenarioParams) -> str:
    lines = [f"{k} = {v!r}" for k, v in params.to_dict().items() if v is not None]
    return "\n".join(lines) + "\n"
