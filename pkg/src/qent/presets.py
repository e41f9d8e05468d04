"""Figure presets, the sodium-dimer scenario and parameter sweeps."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .disentangle import HeatbathScenario, disentangling_time, entanglement_bound, r_of_t
from .errors import DomainError, QentError, UnknownPreset
from .metrics import entanglement_report, r_analytic
from .physics import CONSTANTS, ScenarioParams, thermal_occupation, validate
from .spectrum import ZERO_RATE, k_analytic, spectrum_for
from .wavefunction import GridConfig, build_grid

FIG2 = ScenarioParams(gamma=1.0, epsilon=1.0, omega=1.0, delta_big=10.0, delta_rel=0.01, eta=1e-3)
FIG3 = dict(gamma=1.0, epsilon=1.0, omega_12=20.0, eta=1e-3)
FIG3A_OMEGAS = (0.1, 2.0, 4.0)
FIG3B_DELTAS = (9.97, 9.98, 9.99)
FIG2C_DELTAS = (5.0, 15.0, 40.0)
FIG2D_OMEGAS = (0.5, 3.0, 10.0)
FIG4B = dict(dq0_ka2=16.0, r0=3000.0, temperatures=(300.0, 270.0, 250.0), omega_a=5e14, gamma_a=1e7)

# sodium-dimer scenario (SI anchors; model rates in units of gamma = 1e7/s)
SODIUM_GAMMA = 1e7
SODIUM_MASS = 7.6e-26
SODIUM_VELOCITY_SPREAD = 1.0  # hbar*delta_p/m in m/s
SODIUM = ScenarioParams(
    gamma=SODIUM_GAMMA,
    epsilon=1.0,
    omega=1.0,
    delta_big=5.0,
    delta_rel=1e-2,
    delta_p=SODIUM_MASS * SODIUM_VELOCITY_SPREAD / CONSTANTS.hbar,
    mass=SODIUM_MASS,
    omega_1c=1e14,
    bath_T=150.0,
    omega_a=5e14,
    gamma_a=1e7,
)
REFERENCE_SODIUM = {"R": 4600.0, "K": 2100.0, "R_max": 5e6, "dt_dis": 1e4, "dt_ent": 1e-3, "D": 1e-11}

PRESET_IDS = ("2a", "2b", "2c", "2d", "3a", "3b", "4b", "sodium")


def _thread_cap() -> int:
    raw = os.environ.get("QENT_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise DomainError("QENT_THREADS", detail=f"not an integer: {raw!r}") from None
    return os.cpu_count() or 1


# ---------------------------------------------------------------- sweeps

SWEEP_OUTPUTS = (
    "re_lambda1",
    "im_lambda1",
    "theta",
    "K_analytic",
    "R_analytic",
    "dt_ent",
    "K_svd",
    "R_numeric",
    "dq_single",
    "dq_coin",
)
_CHEAP = {"re_lambda1", "im_lambda1", "theta", "K_analytic", "R_analytic", "dt_ent"}


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    fixed: ScenarioParams = FIG2
    outputs: tuple = ("re_lambda1", "theta", "K_analytic")
    grid: GridConfig | None = None

    def __post_init__(self):
        bad = []
        if self.axis not in ScenarioParams.field_names():
            bad.append("axis")
        vals = tuple(float(v) for v in self.values)
        if not vals or not all(math.isfinite(v) for v in vals):
            bad.append("values")
        unknown = [o for o in self.outputs if o not in SWEEP_OUTPUTS]
        if unknown:
            bad.append("outputs")
        if bad:
            raise DomainError(*bad)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "outputs", tuple(self.outputs))

    @property
    def columns(self) -> tuple[str, ...]:
        return (self.axis,) + self.outputs + ("error",)


def point_metrics(params: ScenarioParams, outputs, grid_cfg=None) -> dict:
    p = validate(params)
    spec = spectrum_for(p)
    lam = spec.lambda1
    out: dict = {}
    a = abs(lam.real)
    cheap = {
        "re_lambda1": lambda: lam.real,
        "im_lambda1": lambda: lam.imag,
        "theta": lambda: spec.theta,
        "K_analytic": lambda: k_analytic(spec, p.eta),
        "R_analytic": lambda: r_analytic(spec, p.eta)[0],
        "dt_ent": lambda: 1.0 / a if a > ZERO_RATE else math.inf,
    }
    for o in outputs:
        if o in _CHEAP:
            if o in ("K_analytic", "R_analytic"):
                p.require("eta")
            out[o] = cheap[o]()
    if any(o not in _CHEAP for o in outputs):
        p.require("eta")
        rep = entanglement_report(spec, p.eta, grid_cfg)
        for o in outputs:
            if o not in _CHEAP:
                out[o] = getattr(rep, o)
    return out


def run_sweep(spec: SweepSpec) -> list[dict]:
    """One row per axis value in input order; failures go to ``error``."""

    def one(v):
        row = {spec.axis: v}
        try:
            # keep (delta_big, delta_rel, omega_12) consistent: with omega_12
            # fixed and no delta_rel, sweeping delta_big moves delta_rel
            fx = spec.fixed
            changes = {spec.axis: v}
            if spec.axis == "delta_rel" or (spec.axis == "delta_big" and fx.delta_rel is not None):
                changes["omega_12"] = None
            elif spec.axis == "omega_12":
                changes["delta_rel"] = None
            row.update(point_metrics(spec.fixed.replace(**changes), spec.outputs, spec.grid))
            row["error"] = ""
        except QentError as exc:
            for o in spec.outputs:
                row.setdefault(o, math.nan)
            row["error"] = f"{type(exc).__name__}: {exc}"
        return row

    workers = min(_thread_cap(), len(spec.values))
    if workers <= 1:
        return [one(v) for v in spec.values]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, spec.values))


# ---------------------------------------------------------------- figures


@dataclass(frozen=True)
class FigurePreset:
    id: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Table:
    """A CSV panel: file stem, header and rows."""

    name: str
    columns: tuple
    rows: list


def _fig2_grid_table(name: str, stride: int, window: float | None) -> Table:
    p = validate(FIG2)
    spec = spectrum_for(p)
    grid = build_grid(spec, p.eta)
    u, s = grid.u_axis, grid.s_axis
    rows = []
    lam1 = spec.lambda1
    for i in range(0, u.size, stride):
        for k in range(0, s.size, stride):
            if window is not None:
                # local view around the central ridge
                if abs(u[i]) > window * p.eta or abs(s[k] - lam1.imag) > window * abs(lam1.real) * 50:
                    continue
            c = grid.amps[i, k]
            rows.append([u[i], s[k], u[i], s[k] - u[i], c.real, c.imag, abs(c) ** 2])
    return Table(name, ("u", "s", "dq", "dk", "re_amp", "im_amp", "abs2"), rows)


def fig_2a() -> list[Table]:
    return [_fig2_grid_table("fig_2a", 4, None)]


def fig_2b() -> list[Table]:
    return [_fig2_grid_table("fig_2b", 1, 0.5)]


def _theta_curve(delta_big, omega) -> float:
    return spectrum_for(FIG2.replace(delta_big=delta_big, omega=omega)).theta


def fig_2c(n: int = 60) -> list[Table]:
    omegas = np.linspace(0.1, 10.0, n)
    rows = [[om] + [_theta_curve(d, om) for d in FIG2C_DELTAS] for om in omegas]
    cols = ("omega",) + tuple(f"theta_delta_big_{d:g}" for d in FIG2C_DELTAS)
    return [Table("fig_2c", cols, rows)]


def fig_2d(n: int = 60) -> list[Table]:
    deltas = np.linspace(2.0, 40.0, n)
    rows = [[d] + [_theta_curve(d, om) for om in FIG2D_OMEGAS] for d in deltas]
    cols = ("delta_big",) + tuple(f"theta_omega_{om:g}" for om in FIG2D_OMEGAS)
    return [Table("fig_2d", cols, rows)]


def _fig3_k(delta_big: float, omega: float) -> tuple[float, float]:
    p = validate(ScenarioParams(omega=omega, delta_big=delta_big, **FIG3))
    spec = spectrum_for(p)
    return p.delta_rel, k_analytic(spec, p.eta)


def fig_3a(n: int = 40) -> list[Table]:
    # Delta approaches omega_12/2 = 10 from below
    deltas = 10.0 - np.geomspace(0.3, 1e-3, n)
    rows = []
    for d in deltas:
        row = [d, 20.0 / d - 2.0]
        for om in FIG3A_OMEGAS:
            row.append(_fig3_k(d, om)[1])
        rows.append(row)
    cols = ("delta_big", "delta_rel") + tuple(f"K_omega_{om:g}" for om in FIG3A_OMEGAS)
    return [Table("fig_3a", cols, rows)]


def fig_3b(n: int = 40) -> list[Table]:
    omegas = np.linspace(0.1, 5.0, n)
    rows = [[om] + [_fig3_k(d, om)[1] for d in FIG3B_DELTAS] for om in omegas]
    cols = ("omega",) + tuple(f"K_delta_big_{d:g}" for d in FIG3B_DELTAS)
    return [Table("fig_3b", cols, rows)]


def fig4b_scenarios() -> list[HeatbathScenario]:
    k_a = FIG4B["omega_a"] / CONSTANTS.c
    return [
        HeatbathScenario.thermal(
            T, FIG4B["omega_a"], FIG4B["gamma_a"], FIG4B["r0"], FIG4B["dq0_ka2"] * k_a**2
        )
        for T in FIG4B["temperatures"]
    ]


def fig_4b(n: int = 100) -> list[Table]:
    scns = fig4b_scenarios()
    # span three half-times of the coldest (slowest) curve
    t_max = 3.0 * max(disentangling_time(s).exact for s in scns)
    t = np.linspace(0.0, t_max, n)
    curves = [r_of_t(s, t) for s in scns]
    rows = [[t[i]] + [c[i] for c in curves] for i in range(n)]
    cols = ("t",) + tuple(f"R_T{T:g}" for T in FIG4B["temperatures"])
    return [Table("fig_4b", cols, rows)]


# ---------------------------------------------------------------- sodium


@dataclass(frozen=True)
class SodiumReport:
    D: float
    eta: float
    theta: float
    re_lambda1: float
    R_analytic: float
    K_analytic: float
    dt_ent: float  # s
    dq0: float  # 1/m^2
    dt_dis: float  # s, with R0 = R_analytic
    dt_dis_r0_reference: float  # s, with R0 = 4600
    R_max: float

    def items(self) -> list[tuple[str, float]]:
        ref = REFERENCE_SODIUM
        return [
            ("D", self.D),
            ("D_reference", ref["D"]),
            ("eta", self.eta),
            ("theta", self.theta),
            ("re_lambda1", self.re_lambda1),
            ("R_analytic", self.R_analytic),
            ("R_reference", ref["R"]),
            ("K_analytic", self.K_analytic),
            ("K_reference", ref["K"]),
            ("dt_ent_s", self.dt_ent),
            ("dt_ent_reference_s", ref["dt_ent"]),
            ("dq0_per_m2", self.dq0),
            ("dt_dis_s", self.dt_dis),
            ("dt_dis_r0_4600_s", self.dt_dis_r0_reference),
            ("dt_dis_reference_s", ref["dt_dis"]),
            ("R_max", self.R_max),
            ("R_max_reference", ref["R_max"]),
        ]


def sodium_report(params: ScenarioParams = SODIUM) -> SodiumReport:
    p = validate(params)
    spec = spectrum_for(p)
    R, _ = r_analytic(spec, p.eta)
    K = k_analytic(spec, p.eta)
    a = abs(spec.lambda1.real)
    dq0 = p.delta_p**2 / 4.0  # variance of |G|^2
    D = thermal_occupation(p.bath_T, p.omega_a)

    def bath(r0):
        return HeatbathScenario(D=D, k_a=p.k_a, gamma_a=p.gamma_a, r0=r0, dq0=dq0)

    bound = entanglement_bound(bath(R), p.delta_p, p.mass, p.omega_1c)
    return SodiumReport(
        D=D,
        eta=p.eta,
        theta=spec.theta,
        re_lambda1=spec.lambda1.real,
        R_analytic=R,
        K_analytic=K,
        dt_ent=1.0 / (p.gamma * a),
        dq0=dq0,
        dt_dis=disentangling_time(bath(R)).exact,
        dt_dis_r0_reference=disentangling_time(bath(REFERENCE_SODIUM["R"])).exact,
        R_max=bound.r_max,
    )


def sodium_table() -> list[Table]:
    rep = sodium_report()
    return [Table("sodium", ("quantity", "value"), [list(kv) for kv in rep.items()])]


PRESETS = {
    "2a": FigurePreset("2a", FIG2.to_dict()),
    "2b": FigurePreset("2b", FIG2.to_dict()),
    "2c": FigurePreset("2c", {"delta_big": FIG2C_DELTAS, "delta_rel": FIG2.delta_rel}),
    "2d": FigurePreset("2d", {"omega": FIG2D_OMEGAS, "delta_rel": FIG2.delta_rel}),
    "3a": FigurePreset("3a", {**FIG3, "omega": FIG3A_OMEGAS}),
    "3b": FigurePreset("3b", {**FIG3, "delta_big": FIG3B_DELTAS}),
    "4b": FigurePreset("4b", dict(FIG4B)),
    "sodium": FigurePreset("sodium", SODIUM.to_dict()),
}

_BUILDERS = {
    "2a": fig_2a,
    "2b": fig_2b,
    "2c": fig_2c,
    "2d": fig_2d,
    "3a": fig_3a,
    "3b": fig_3b,
    "4b": fig_4b,
    "sodium": sodium_table,
}


def run_preset(preset_id: str) -> list[Table]:
    key = str(preset_id).lower()
    if key not in PRESETS:
        raise UnknownPreset("id", detail=f"unknown preset {preset_id!r}; choose from {', '.join(PRESET_IDS)}")
    return _BUILDERS[key]()
