"""Dressed three-level spectrum.

The internal amplitudes (A1, A2, B) of the driven atom evolve under the
constant generator ``-M`` once the oscillating phases of the coupling field
are absorbed into the frame.  ``M`` is the 3x3 complex matrix

    [[1/2 + i*D1,  eps/2,       i*Om],
     [eps/2,       1/2 + i*D2,  i*Om],
     [i*Om,        i*Om,        0   ]]

in units of the linewidth, with D1 = (1 + delta)*Delta and D2 = -Delta.
Its eigenpairs give the decaying modes of the atom; the mode weights p_j
follow from the atom starting in |b>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrum, DomainError, InfiniteEntanglement, InfiniteTimescale
from .physics import ScenarioParams, validate

# eigenvector-matrix condition number beyond which the mode expansion fails
COND_LIMIT = 1e12
# An exactly defective matrix comes back from LAPACK with two eigenvectors
# about sqrt(eps) apart (condition ~1e8), so near-parallel pairs are also
# rejected.
PARALLEL_TOL = 1e-12
# a mode participates in the initial state when |p_j| exceeds this
WEIGHT_TOL = 1e-12
TIE_TOL = 1e-12
# |Re lambda_1| at or below this is the ideal non-decaying limit
ZERO_RATE = 1e-14
K_COEFF = 0.28
R_COEFF = 1.6


@dataclass(frozen=True)
class DressedMatrix:
    entries: np.ndarray
    delta_rel: float
    epsilon: float = 1.0

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.shape != (3, 3):
            raise DomainError("entries", detail="dressed matrix must be 3x3")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)


@dataclass(frozen=True)
class DressedSpectrum:
    """Eigen-decomposition of the dressed matrix.

    ``vectors[:, j]`` is the eigenvector (alpha_j, beta_j, zeta_j) of
    ``lambdas[j]``; eigenvalues are sorted by imaginary part, then real part.
    ``coupling_amplitudes[j] = alpha_j + beta_j`` (g1 = g2 = 1) and
    ``emission_weights[j] = coupling_amplitudes[j] * weights[j]`` is the
    normalization-independent amplitude of pole j.
    """

    matrix: DressedMatrix
    lambdas: np.ndarray
    vectors: np.ndarray
    weights: np.ndarray
    dominant_index: int
    coupling_amplitudes: np.ndarray

    @property
    def emission_weights(self) -> np.ndarray:
        return self.coupling_amplitudes * self.weights

    @property
    def lambda1(self) -> complex:
        return complex(self.lambdas[self.dominant_index])

    @property
    def delta_rel(self) -> float:
        return self.matrix.delta_rel

    @property
    def theta(self) -> float:
        """Re(lambda_1)/delta^2 at the matrix's own delta (nan when delta = 0)."""
        d = self.matrix.delta_rel
        if d == 0:
            return math.nan
        return self.lambda1.real / d**2


def build_matrix(params: ScenarioParams) -> DressedMatrix:
    p = validate(params)
    p.require("omega", "delta_big", "delta_rel")
    eps = p.epsilon
    om = p.omega
    d1 = (1.0 + p.delta_rel) * p.delta_big
    d2 = -p.delta_big
    # gamma_1 = gamma_2 = 1 in reduced units; Omega is real so Omega* = Omega
    m = np.array(
        [
            [0.5 + 1j * d1, eps / 2.0, 1j * om],
            [eps / 2.0, 0.5 + 1j * d2, 1j * om],
            [1j * om, 1j * om, 0.0],
        ],
        dtype=complex,
    )
    return DressedMatrix(entries=m, delta_rel=float(p.delta_rel), epsilon=float(eps))


def _fix_phase(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def _select_dominant(lambdas: np.ndarray, weights: np.ndarray) -> int:
    eligible = [j for j in range(3) if abs(weights[j]) > WEIGHT_TOL]
    if not eligible:
        raise DegenerateSpectrum("weights", detail="no mode overlaps the initial state")
    re_min = min(abs(lambdas[j].real) for j in eligible)
    tied = [j for j in eligible if abs(lambdas[j].real) - re_min <= TIE_TOL]
    return min(tied, key=lambda j: (abs(lambdas[j].imag), j))


def eigendecompose(m: DressedMatrix) -> DressedSpectrum:
    """Eigenpairs, initial-state weights and the dominant (longest-lived) pole.

    The dominant index picks the smallest |Re lambda| among modes that carry
    population of the initial state |b>; ties go to the smaller |Im lambda|.
    """
    lam, vec = np.linalg.eig(m.entries)
    order = np.lexsort((lam.real, lam.imag))
    lam = lam[order]
    vec = np.column_stack([_fix_phase(vec[:, j]) for j in order])

    cond = np.linalg.cond(vec)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise DegenerateSpectrum("lambdas", detail=f"eigenvector condition number {cond:.3g}")
    overlap = np.abs(vec.conj().T @ vec) - np.eye(3)
    if np.max(overlap) > 1.0 - PARALLEL_TOL:
        raise DegenerateSpectrum("lambdas", detail="coalescing eigenvectors (defective matrix)")

    p = np.linalg.solve(vec, np.array([0.0, 0.0, 1.0], dtype=complex))
    coupling = vec[0, :] + vec[1, :]
    dom = _select_dominant(lam, p)
    for arr in (lam, vec, p, coupling):
        arr.setflags(write=False)
    return DressedSpectrum(
        matrix=m,
        lambdas=lam,
        vectors=vec,
        weights=p,
        dominant_index=dom,
        coupling_amplitudes=coupling,
    )


def spectrum_for(params: ScenarioParams) -> DressedSpectrum:
    return eigendecompose(build_matrix(params))


def theta(params: ScenarioParams, delta_probe: float | None = None) -> float:
    """Theta(Delta, Omega) = Re(lambda_1)/delta^2, evaluated at a probe delta.

    The probe defaults to the scenario's own ``delta_rel``.  No extrapolation
    to delta -> 0 is attempted.
    """
    p = validate(params)
    if delta_probe is not None:
        p = validate(p.replace(delta_rel=delta_probe, omega_12=None))
    p.require("delta_rel")
    if p.delta_rel == 0:
        raise DomainError("delta_rel", detail="theta needs a nonzero probe delta")
    return spectrum_for(p).theta


def k_analytic(spectrum: DressedSpectrum, eta: float) -> float:
    """Schmidt number 1 + 0.28*(eta/|Re lambda_1| - 1)."""
    a = abs(spectrum.lambda1.real)
    if a <= ZERO_RATE:
        raise InfiniteEntanglement("lambda1", detail="Re(lambda_1) = 0: K diverges")
    return 1.0 + K_COEFF * (eta / a - 1.0)


@dataclass(frozen=True)
class EntanglementTime:
    dt_ent: float  # 1/|Re lambda_1|, units of 1/gamma
    dt_ent_from_r: float  # 1.6 R/eta with the supplied (or 2.2 K) ratio
    r_used: float


def entanglement_time(params: ScenarioParams, r_ratio: float | None = None) -> EntanglementTime:
    """Time to build up the entanglement, 1/|Re lambda_1|.

    The cross-check form 1.6*R/eta uses ``r_ratio`` when given, else
    R = 2.2*K_analytic, so the two forms are not identical by construction.
    """
    p = validate(params)
    spec = spectrum_for(p)
    a = abs(spec.lambda1.real)
    if a <= ZERO_RATE:
        raise InfiniteTimescale("lambda1", detail="Re(lambda_1) = 0")
    dt = 1.0 / a
    if p.eta is None:
        return EntanglementTime(dt_ent=dt, dt_ent_from_r=math.nan, r_used=math.nan)
    r = r_ratio if r_ratio is not None else 2.2 * k_analytic(spec, p.eta)
    return EntanglementTime(dt_ent=dt, dt_ent_from_r=R_COEFF * r / p.eta, r_used=r)
