"""Steady-state joint momentum amplitude of the atom-photon pair.

In effective coordinates the amplitude is

    C(dq, dk) ~ sum_j c_j exp(-(dq/eta)^2) / (-lambda_j + i*(dq + dk))

with c_j the emission weights of the dressed spectrum.  It depends on dq
and on s = dq + dk only, so grids are laid out in the rotated coordinates
(u, s) = (dq, dq + dk): Gaussian along u, a sum of Lorentzian poles along s.

The s-axis is uniform in the mapped coordinate
x(s) = mean_j asinh((s - Im lambda_j)/Re lambda_j), which concentrates points
around every pole at its own width.  Trapezoid weights in x times ds/dx give
spectrally accurate quadrature even when the pole widths span ten decades.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import DomainError, GridTooCoarse, InfiniteEntanglement, PoleOnGrid, ZeroState
from .spectrum import DressedSpectrum

Form = Literal["full", "peak"]

# narrowest pole width (units of gamma) a grid will resolve
WIDTH_FLOOR = 1e-13
MASS_TOL = 1e-6
POLE_TOL = 1e-14


@dataclass(frozen=True)
class GridConfig:
    """Grid sizes and half-ranges.

    u in [-w_u*eta, w_u*eta]; s spans all included poles padded by
    w_s times the widest pole width.
    """

    n_u: int = 512
    n_s: int = 512
    w_u: float = 5.0
    w_s: float = 1e4

    def __post_init__(self):
        bad = []
        if self.n_u < 3:
            bad.append("n_u")
        if self.n_s < 3:
            bad.append("n_s")
        if not self.w_u > 0:
            bad.append("w_u")
        if not self.w_s > 0:
            bad.append("w_s")
        if bad:
            raise DomainError(*bad)

    @classmethod
    def parse(cls, text: str) -> "GridConfig":
        parts = [t.strip() for t in text.split(",")]
        if len(parts) != 4:
            raise DomainError("grid", detail="expected n_u,n_s,W_u,W_s")
        try:
            return cls(int(parts[0]), int(parts[1]), float(parts[2]), float(parts[3]))
        except ValueError as exc:
            raise DomainError("grid", detail=str(exc)) from exc

    def doubled(self) -> "GridConfig":
        return GridConfig(2 * self.n_u - 1, 2 * self.n_s - 1, self.w_u, self.w_s)


@dataclass(frozen=True)
class PoleTerms:
    """Poles (lambda_j) and weights (c_j) that make up an amplitude."""

    c: np.ndarray
    lam: np.ndarray
    eta: float

    def raw(self, u, s):
        u = np.asarray(u, dtype=float)
        s = np.asarray(s, dtype=float)
        env = np.exp(-((u / self.eta) ** 2))
        total = np.zeros(np.broadcast(u, s).shape, dtype=complex)
        for cj, lj in zip(self.c, self.lam):
            den = -lj + 1j * s
            if np.any(np.abs(den) < POLE_TOL):
                raise PoleOnGrid("dk", detail=f"pole at lambda = {lj:.6g}")
            total = total + cj / den
        return env * total

    @property
    def centers(self) -> np.ndarray:
        return self.lam.imag

    @property
    def widths(self) -> np.ndarray:
        return np.maximum(self.lam.real, WIDTH_FLOOR)


def _terms(spectrum: DressedSpectrum, eta: float, form: Form) -> PoleTerms:
    if not eta > 0:
        raise DomainError("eta")
    c = np.asarray(spectrum.emission_weights)
    lam = np.asarray(spectrum.lambdas)
    cmax = float(np.max(np.abs(c)))
    if cmax == 0.0 or cmax < 1e-300:
        raise ZeroState("omega", detail="no emission: amplitude vanishes identically")
    if form == "peak":
        idx = [spectrum.dominant_index]
        if abs(c[idx[0]]) <= 1e-14 * cmax:
            raise InfiniteEntanglement("lambda1", detail="dominant mode does not emit")
    elif form == "full":
        idx = [j for j in range(len(c)) if abs(c[j]) > 1e-14 * cmax]
    else:
        raise DomainError("form", detail=f"unknown form {form!r}")
    lam_sel = lam[idx]
    if np.any(lam_sel.real < WIDTH_FLOOR):
        raise InfiniteEntanglement("lambda1", detail="emitting pole with vanishing width")
    return PoleTerms(c=c[idx].copy(), lam=lam_sel.copy(), eta=float(eta))


def amplitude_full(spectrum: DressedSpectrum, dq, dk, eta: float):
    """Unnormalized three-pole amplitude at (dq, dk)."""
    dq = np.asarray(dq, dtype=float)
    s = dq + np.asarray(dk, dtype=float)
    c = np.asarray(spectrum.emission_weights)
    lam = np.asarray(spectrum.lambdas)
    keep = np.abs(c) > 0
    if not np.any(keep):
        return np.zeros(np.broadcast(dq, s).shape, dtype=complex)
    return PoleTerms(c=c[keep], lam=lam[keep], eta=float(eta)).raw(dq, s)


def amplitude_peak(spectrum: DressedSpectrum, dq, dk, eta: float):
    """Unnormalized single-pole amplitude built from the dominant pole only."""
    j = spectrum.dominant_index
    terms = PoleTerms(
        c=np.array([1.0 + 0j]), lam=np.array([spectrum.lambdas[j]]), eta=float(eta)
    )
    dq = np.asarray(dq, dtype=float)
    return terms.raw(dq, dq + np.asarray(dk, dtype=float))


def uniform_axis(lo: float, hi: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.linspace(lo, hi, n)
    w = np.full(n, (hi - lo) / (n - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    return x, w


def pole_adapted_axis(centers, widths, lo: float, hi: float, n: int):
    """Nodes uniform in x(s) = mean_j asinh((s - c_j)/w_j) on [lo, hi].

    Returns (nodes, weights) with trapezoid weights in x times ds/dx.
    """
    centers = np.atleast_1d(np.asarray(centers, dtype=float))
    widths = np.atleast_1d(np.asarray(widths, dtype=float))

    def xmap(s):
        s = np.asarray(s, dtype=float)[..., None]
        return np.mean(np.arcsinh((s - centers) / widths), axis=-1)

    def dxds(s):
        s = np.asarray(s, dtype=float)[..., None]
        return np.mean(1.0 / np.hypot(widths, s - centers), axis=-1)

    x_nodes, wx = uniform_axis(float(xmap(lo)), float(xmap(hi)), n)
    # invert the monotone map by bisection
    a = np.full(n, lo, dtype=float)
    b = np.full(n, hi, dtype=float)
    for _ in range(200):
        mid = 0.5 * (a + b)
        below = xmap(mid) < x_nodes
        a = np.where(below, mid, a)
        b = np.where(below, b, mid)
        if np.all((b - a) <= 4 * np.spacing(np.maximum(np.abs(a), np.abs(b)))):
            break
    s = 0.5 * (a + b)
    s[0], s[-1] = lo, hi
    return s, wx / dxds(s)


def _s_window(terms: PoleTerms, w_s: float) -> tuple[float, float]:
    span = w_s * float(np.max(terms.widths))
    return float(np.min(terms.centers)) - span, float(np.max(terms.centers)) + span


def _axes(terms: PoleTerms, cfg: GridConfig):
    u, wu = uniform_axis(-cfg.w_u * terms.eta, cfg.w_u * terms.eta, cfg.n_u)
    lo, hi = _s_window(terms, cfg.w_s)
    s, ws = pole_adapted_axis(terms.centers, terms.widths, lo, hi, cfg.n_s)
    return u, wu, s, ws


def _mass(terms: PoleTerms, cfg: GridConfig) -> float:
    u, wu, s, ws = _axes(terms, cfg)
    raw = terms.raw(u[:, None], s[None, :])
    return float(np.einsum("i,j,ij->", wu, ws, np.abs(raw) ** 2))


@dataclass(frozen=True)
class JointAmplitudeGrid:
    """Normalized amplitude on the rotated (u, s) tensor grid.

    ``amps[i, k]`` is C at dq = u_axis[i], dk = s_axis[k] - u_axis[i];
    ``sum(weights * |amps|^2) = 1``.
    """

    u_axis: np.ndarray
    s_axis: np.ndarray
    u_weights: np.ndarray
    s_weights: np.ndarray
    amps: np.ndarray
    norm_chi0: float
    mass_error: float
    terms: PoleTerms
    spectrum: DressedSpectrum
    form: str
    config: GridConfig = field(default_factory=GridConfig)

    @property
    def eta(self) -> float:
        return self.terms.eta

    @property
    def weights(self) -> np.ndarray:
        return np.outer(self.u_weights, self.s_weights)

    @property
    def dq(self) -> np.ndarray:
        return np.broadcast_to(self.u_axis[:, None], self.amps.shape)

    @property
    def dk(self) -> np.ndarray:
        return self.s_axis[None, :] - self.u_axis[:, None]

    def amplitude(self, dq, dk):
        """Normalized amplitude at arbitrary (dq, dk)."""
        dq = np.asarray(dq, dtype=float)
        return self.norm_chi0 * self.terms.raw(dq, dq + np.asarray(dk, dtype=float))

    def total_mass(self) -> float:
        return float(np.einsum("i,j,ij->", self.u_weights, self.s_weights, np.abs(self.amps) ** 2))


def build_grid(
    spectrum: DressedSpectrum,
    eta: float,
    grid_cfg: GridConfig | None = None,
    form: Form = "full",
    check: bool = True,
) -> JointAmplitudeGrid:
    """Sample and normalize the amplitude; verify the mass by grid doubling.

    Raises :class:`GridTooCoarse` when the doubled grid changes the total
    (unnormalized) mass by more than 1e-6 relative.
    """
    cfg = grid_cfg or GridConfig()
    terms = _terms(spectrum, eta, form)
    u, wu, s, ws = _axes(terms, cfg)
    raw = terms.raw(u[:, None], s[None, :])
    mass = float(np.einsum("i,j,ij->", wu, ws, np.abs(raw) ** 2))
    if not mass > 0:
        raise ZeroState("omega", detail="zero mass on grid")
    err = 0.0
    if check:
        fine = _mass(terms, cfg.doubled())
        err = abs(fine - mass) / fine
        if err > MASS_TOL:
            raise GridTooCoarse(
                "grid", detail=f"doubling changed the mass by {err:.2e} (> {MASS_TOL:g})"
            )
    chi0 = 1.0 / np.sqrt(mass)
    amps = chi0 * raw
    for arr in (u, wu, s, ws, amps):
        arr.setflags(write=False)
    return JointAmplitudeGrid(
        u_axis=u,
        s_axis=s,
        u_weights=wu,
        s_weights=ws,
        amps=amps,
        norm_chi0=float(chi0),
        mass_error=err,
        terms=terms,
        spectrum=spectrum,
        form=form,
        config=cfg,
    )


@dataclass(frozen=True)
class TermDecomposition:
    l1_mass: float
    l2_mass: float
    l3_mass: float
    overlap_residual: float  # (|sum L|^2 - sum |L_j|^2) / |sum L|^2


def term_masses(
    spectrum: DressedSpectrum, eta: float, grid_cfg: GridConfig | None = None
) -> TermDecomposition:
    """Fractional L2 mass of each pole term (l1 = dominant pole).

    Cross terms are excluded from the fractions and reported separately.
    """
    grid = build_grid(spectrum, eta, grid_cfg, form="full")
    u, s = grid.u_axis, grid.s_axis
    w = grid.weights
    env = np.exp(-((u / eta) ** 2))[:, None]
    c = spectrum.emission_weights
    masses = []
    for j in range(3):
        if c[j] == 0:
            masses.append(0.0)
            continue
        lj = env * (c[j] / (-spectrum.lambdas[j] + 1j * s[None, :]))
        masses.append(float(np.sum(w * np.abs(lj) ** 2)))
    masses = np.array(masses)
    total_raw = grid.total_mass() / grid.norm_chi0**2
    dom = spectrum.dominant_index
    others = [j for j in range(3) if j != dom]
    frac = masses / masses.sum()
    return TermDecomposition(
        l1_mass=float(frac[dom]),
        l2_mass=float(frac[others[0]]),
        l3_mass=float(frac[others[1]]),
        overlap_residual=float((total_raw - masses.sum()) / total_raw),
    )
