"""Entanglement measures of the pure joint amplitude.

Schmidt number
--------------
The Schmidt spectrum is that of the atom's reduced density operator

    rho_A(u, u') = g(u) g(u') H(u - u'),
    H(x) = 2*pi * sum_jk c_j conj(c_k) / (lambda_j + conj(lambda_k) - i*x),

obtained by integrating C(u, u + k) conj(C(u', u' + k)) over the photon
momentum k in closed form.  rho_A is discretized (Nystrom, uniform trapezoid)
on an atom-momentum axis fine enough to resolve the narrowest pole width.
The Toeplitz structure gives the purity in O(N log N); K = 1/Tr(rho_A^2).

The rotated (u, s) grid cannot be used for this directly: s = dq + dk mixes
atom and photon, so an SVD over (u, s) would factor the wrong bipartition.

Variance ratio
--------------
R = (atomic momentum variance) / (atomic variance conditioned on the photon
at dk0).  The conditional slice of a Gaussian-cut Lorentzian has variance
~ eta*a/sqrt(2*pi), which gives R ~ eta/(1.6*a).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh, matmul_toeplitz, toeplitz
from scipy.optimize import minimize_scalar
from scipy.signal import fftconvolve
from scipy.sparse.linalg import LinearOperator, eigsh

from .errors import InfiniteEntanglement, NotConverged, SliceUnderresolved
from .spectrum import K_COEFF, R_COEFF, ZERO_RATE, DressedSpectrum, k_analytic
from .wavefunction import JointAmplitudeGrid, PoleTerms, pole_adapted_axis

K_TOL = 0.02


@dataclass(frozen=True)
class SchmidtResult:
    coefficients: np.ndarray  # descending mu_n
    K_svd: float
    K_analytic: float
    K_refined: float = math.nan  # K on the doubled-resolution axis
    complete: bool = True  # False when only the leading modes were computed


@dataclass(frozen=True)
class VarianceReport:
    dq_single: float
    dq_coin: float
    k0_used: float
    R_numeric: float
    R_analytic: float


def schmidt_svd(kernel, row_weights=None, col_weights=None) -> tuple[np.ndarray, float]:
    """Schmidt coefficients and participation ratio of a sampled bipartite kernel.

    ``kernel[i, j]`` samples psi(x_i, y_j); quadrature weights are folded in
    as sqrt(w_i * w_j) before the SVD.
    """
    a = np.asarray(kernel, dtype=complex)
    if row_weights is not None:
        a = a * np.sqrt(np.asarray(row_weights, dtype=float))[:, None]
    if col_weights is not None:
        a = a * np.sqrt(np.asarray(col_weights, dtype=float))[None, :]
    sv = np.linalg.svd(a, compute_uv=False)
    mu = sv**2
    mu = mu / mu.sum()
    return mu, float(1.0 / np.sum(mu**2))


def _kernel_column(terms: PoleTerms, x: np.ndarray) -> np.ndarray:
    c, lam = terms.c, terms.lam
    h = np.zeros(x.shape, dtype=complex)
    for j in range(len(c)):
        for k in range(len(c)):
            h += c[j] * np.conj(c[k]) / (lam[j] + np.conj(lam[k]) - 1j * x)
    return 2 * np.pi * h


def _reduced_density_axis(terms: PoleTerms, step: float, halfwidth: float):
    n_half = int(math.ceil(halfwidth * terms.eta / step))
    u = step * np.arange(-n_half, n_half + 1)
    g = np.exp(-((u / terms.eta) ** 2))
    col = _kernel_column(terms, step * np.arange(u.size))
    return u, g, col


def _purity_k(terms: PoleTerms, step: float, halfwidth: float) -> float:
    _, g, col = _reduced_density_axis(terms, step, halfwidth)
    g2 = g**2
    n = g2.size
    # A_d = sum_i g_i^2 g_{i+d}^2 for d = -(n-1) .. n-1
    auto = fftconvolve(g2, g2[::-1])
    h2 = np.abs(col) ** 2
    h2_full = np.concatenate([h2[:0:-1], h2])
    purity = step**2 * float(np.dot(auto, h2_full))
    trace = step * float(np.sum(g2)) * col[0].real
    return trace**2 / purity if n > 0 else math.nan


def schmidt_number(
    grid: JointAmplitudeGrid,
    points_per_width: float = 1.5,
    halfwidth: float = 3.0,
    max_dense: int = 4000,
    n_modes: int = 64,
    tol: float = K_TOL,
) -> SchmidtResult:
    """Schmidt number of the amplitude represented by ``grid``.

    The atom axis spans +-halfwidth*eta with spacing
    min(narrowest pole width/points_per_width, eta/20).  Halving the spacing
    must change K by at most ``tol`` or :class:`NotConverged` is raised.
    """
    terms = grid.terms
    step = min(float(np.min(terms.widths)) / points_per_width, terms.eta / 20.0)
    K = _purity_k(terms, step, halfwidth)
    K_fine = _purity_k(terms, step / 2.0, halfwidth)
    if abs(K_fine - K) > tol * K_fine:
        raise NotConverged(
            "K_svd", detail=f"K changed from {K:.6g} to {K_fine:.6g} on refinement"
        )

    u, g, col = _reduced_density_axis(terms, step, halfwidth)
    scale = g * math.sqrt(step)
    n = u.size
    if n <= max_dense:
        rho = toeplitz(col, np.conj(col)) * np.outer(scale, scale)
        ev = eigvalsh(rho)[::-1]
        complete = True
    else:
        cr = (col, np.conj(col))

        def matvec(v):
            v = np.asarray(v).reshape(-1)
            return scale * matmul_toeplitz(cr, scale * v)

        op = LinearOperator((n, n), matvec=matvec, dtype=complex)
        k = min(n_modes, n - 2)
        ev = np.sort(eigsh(op, k=k, which="LA", return_eigenvectors=False))[::-1]
        complete = False
    trace = float(np.sum(scale**2) * col[0].real)
    mu = np.clip(ev / trace, 0.0, None)
    mu.setflags(write=False)
    return SchmidtResult(
        coefficients=mu,
        K_svd=float(K),
        K_analytic=k_analytic(grid.spectrum, terms.eta),
        K_refined=float(K_fine),
        complete=complete,
    )


def _moments(x: np.ndarray, p: np.ndarray) -> tuple[float, float, float]:
    m0 = float(np.sum(p))
    m1 = float(np.sum(p * x)) / m0
    var = float(np.sum(p * (x - m1) ** 2)) / m0
    return m0, m1, var


def _slice_axis(terms: PoleTerms, k0: float, halfwidth: float, n: int):
    # poles of C(q, q + k0) in q sit at Im(lambda_j) - k0
    lo, hi = -halfwidth * terms.eta, halfwidth * terms.eta
    return pole_adapted_axis(terms.centers - k0, terms.widths, lo, hi, n)


def photon_marginal(grid: JointAmplitudeGrid, k, n: int = 2048) -> float:
    """Photon momentum density at dk = k (atom momentum integrated out)."""
    q, w = _slice_axis(grid.terms, float(k), grid.config.w_u, n)
    return float(np.sum(w * np.abs(grid.amplitude(q, k)) ** 2))


def photon_mode(grid: JointAmplitudeGrid, n: int = 2048) -> float:
    """Photon momentum dk maximizing the photon marginal."""
    eta = grid.eta
    b = float(grid.spectrum.lambda1.imag)
    cands = np.concatenate([b + eta * np.linspace(-2.0, 2.0, 41), grid.terms.centers])
    vals = np.array([photon_marginal(grid, k, n) for k in cands])
    best = float(cands[int(np.argmax(vals))])
    res = minimize_scalar(
        lambda k: -photon_marginal(grid, k, n),
        bounds=(best - 0.1 * eta, best + 0.1 * eta),
        method="bounded",
        options={"xatol": 1e-6 * eta},
    )
    return float(res.x) if -res.fun >= vals.max() else best


def conditional_slice(grid: JointAmplitudeGrid, k0: float, n: int = 4096):
    """Nodes, weights and density |C(q, k0)|^2 along the conditional slice."""
    q, w = _slice_axis(grid.terms, k0, grid.config.w_u, n)
    dens = np.abs(grid.amplitude(q, k0)) ** 2
    return q, w, dens


def variances(
    grid: JointAmplitudeGrid, k0: float | None = None, n_slice: int = 4096
) -> VarianceReport:
    """Unconditional and coincidence variances of the atomic momentum dq.

    ``k0`` defaults to the mode of the photon marginal.  The slice must put
    99% of its mass on at least 32 nodes, else :class:`SliceUnderresolved`.
    """
    marg = np.sum(np.abs(grid.amps) ** 2 * grid.s_weights[None, :], axis=1)
    _, _, dq_single = _moments(grid.u_axis, grid.u_weights * marg)

    if k0 is None:
        k0 = photon_mode(grid)
    q, w, dens = conditional_slice(grid, k0, n_slice)
    pm = w * dens
    if not pm.sum() > 0:
        raise SliceUnderresolved("k0", detail="conditional slice carries no mass")
    cum = np.cumsum(np.sort(pm)[::-1]) / pm.sum()
    carrying = int(np.searchsorted(cum, 0.99) + 1)
    if carrying < 32:
        raise SliceUnderresolved(
            "k0", detail=f"only {carrying} nodes carry 99% of the slice mass"
        )
    _, _, dq_coin = _moments(q, pm)
    return VarianceReport(
        dq_single=dq_single,
        dq_coin=dq_coin,
        k0_used=float(k0),
        R_numeric=dq_single / dq_coin,
        R_analytic=r_analytic(grid.spectrum, grid.eta)[0],
    )


def r_analytic(spectrum: DressedSpectrum, eta: float, delta: float | None = None):
    """(R, 2.2*K) with R = eta/(1.6*|Re lambda_1|) = eta/(1.6*|Theta|*delta^2).

    With ``delta`` given, Re(lambda_1) is rebuilt as Theta*delta^2 from the
    spectrum's own Theta (useful when rescaling delta).
    """
    if delta is None:
        a = abs(spectrum.lambda1.real)
    else:
        a = abs(spectrum.theta) * delta**2
    if a <= ZERO_RATE or not math.isfinite(a):
        raise InfiniteEntanglement("lambda1", detail="Theta*delta^2 = 0")
    R = eta / (R_COEFF * a)
    K = 1.0 + K_COEFF * (eta / a - 1.0)
    return R, 2.2 * K


def k_peak_exact(eta: float, a: float) -> float:
    """Closed-form Schmidt number of the single-pole amplitude with width a."""
    from scipy.special import erfcx

    return eta / (2.0 * math.sqrt(math.pi) * a * erfcx(2.0 * a / eta))


@dataclass(frozen=True)
class EntanglementReport:
    K_svd: float
    K_analytic: float
    R_numeric: float
    R_analytic: float
    dq_single: float
    dq_coin: float
    k0_used: float
    theta: float
    re_lambda1: float
    dt_ent: float
    mass_error: float  # grid-doubling estimate of the normalization error
    tail_mass: float  # l2 + l3 fraction of the full amplitude

    COLUMNS = (
        "K_svd",
        "K_analytic",
        "R_numeric",
        "R_analytic",
        "dq_single",
        "dq_coin",
        "k0_used",
        "theta",
        "re_lambda1",
        "dt_ent",
    )

    def row(self) -> list[float]:
        return [getattr(self, c) for c in self.COLUMNS]


def entanglement_report(
    spectrum: DressedSpectrum, eta: float, grid_cfg=None, form="full", k0=None
) -> EntanglementReport:
    """All entanglement measures of one scenario, from a single grid."""
    from .wavefunction import build_grid, term_masses

    grid = build_grid(spectrum, eta, grid_cfg, form=form)
    sch = schmidt_number(grid)
    var = variances(grid, k0)
    a = abs(spectrum.lambda1.real)
    tm = term_masses(spectrum, eta, grid_cfg)
    return EntanglementReport(
        K_svd=sch.K_svd,
        K_analytic=sch.K_analytic,
        R_numeric=var.R_numeric,
        R_analytic=var.R_analytic,
        dq_single=var.dq_single,
        dq_coin=var.dq_coin,
        k0_used=var.k0_used,
        theta=spectrum.theta,
        re_lambda1=spectrum.lambda1.real,
        dt_ent=1.0 / a,
        mass_error=grid.mass_error,
        tail_mass=tm.l2_mass + tm.l3_mass,
    )
