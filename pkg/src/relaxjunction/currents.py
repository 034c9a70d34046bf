"""
Steady-state currents for junctions with relaxed reservoirs.

Sign convention: a positive current is net particle flow from the left to
the right lead, so ``mu_L > mu_R`` gives ``I > 0`` for symmetric junctions.

The integral forms use :func:`~relaxjunction.quadrature.integrate_omega`;
the pole sum and the two asymptotic forms are closed-form sums over modes.
None of the asymptotic forms is ever selected automatically.
"""

from __future__ import annotations

import enum
from typing import NamedTuple

import numpy as np

from .errors import AccuracyError, DomainError, UsageError
from .model import ChainGeometry, CurrentResult, FermiParameters, JunctionModel, Method, fermi
from .quadrature import QuadratureConfig, integrate_omega
from .spectral import (
    _require_positive_gamma,
    green_ret,
    lorentzian,
)

__all__ = [
    "TransmissionCaveat",
    "EffectiveTransmission",
    "current_trace_integral",
    "current_compact_integral",
    "current_pole_sum",
    "lead_self_energy_semiinfinite",
    "landauer_transmission",
    "current_landauer_semiinfinite",
    "transmission",
    "current_nonmarkovian",
    "current_large_gamma",
    "current_small_gamma",
    "effective_transmission",
    "bias_window",
]

TWO_PI = 2.0 * np.pi
# Fermi tails beyond this many temperatures are dropped from finite-T windows.
FERMI_TAIL = 40.0
# Rounding of omega - omega_k near a peak of width gamma_k leaves a relative
# error up to about ROUNDOFF_GAIN * eps * |omega_k| / gamma_k that the embedded
# error estimate cannot see (measured on random Lorentzian sums).
ROUNDOFF_GAIN = 1.0


def _require_identical(junction: JunctionModel):
    mismatch = junction.lead_mismatch()
    if mismatch is not None:
        raise UsageError(f"identical reservoirs required ({mismatch})")


def _require_resolvable(junction: JunctionModel, config: QuadratureConfig | None):
    """Refuse peaks too narrow for quadrature to reach ``rel_tol`` in double precision."""
    rel_tol = (config or QuadratureConfig()).rel_tol
    w, g = junction.all_omegas(), junction.all_gammas()
    floor = ROUNDOFF_GAIN * np.finfo(float).eps * np.maximum(1.0, np.abs(w)) / rel_tol
    bad = g < floor
    if np.any(bad):
        i = int(np.argmin(np.where(bad, g / floor, np.inf)))
        raise AccuracyError(
            f"relaxation {g[i]:.3g} at omega={w[i]:.6g} is below the width "
            f"{floor[i]:.3g} resolvable at rel_tol={rel_tol:g}; use a closed-form method"
        )


def _lead_arrays(lead, fermi_params):
    occ = fermi(lead.omegas, fermi_params.mu(lead.label), fermi_params.temperature)
    return lead.couplings, lead.omegas, lead.gammas, np.atleast_1d(occ)


def _gamma_batch(w, V, omegas, gammas, weights=None):
    lor = lorentzian(w, omegas, gammas)
    if weights is not None:
        lor = lor * weights[None, :]
    return np.einsum("ik,nk,jk->nij", V, lor, V.conj(), optimize=True)


def _dagger(A):
    return np.conj(np.swapaxes(A, -1, -2))


def _result(res, method, **extra):
    diag = {"error_estimate": float(res.error), "panels": float(res.panels)}
    diag.update(extra)
    return CurrentResult(float(np.real(res.value)), method, diag)


def current_trace_integral(junction: JunctionModel, fermi_params: FermiParameters,
                           config: QuadratureConfig | None = None) -> CurrentResult:
    """General current for arbitrary (not necessarily identical) leads.

    ``I = int domega/2pi tr[Gt^L G^a Gamma^R G^r - Gamma^L G^r Gt^R G^a]``
    where ``Gt`` are the occupation-weighted spectral densities.
    """
    _require_positive_gamma(junction.all_gammas())
    _require_resolvable(junction, config)
    VL, wL, gL, fL = _lead_arrays(junction.lead_L, fermi_params)
    VR, wR, gR, fR = _lead_arrays(junction.lead_R, fermi_params)

    def integrand(w):
        GamL = _gamma_batch(w, VL, wL, gL)
        GamR = _gamma_batch(w, VR, wR, gR)
        GtL = _gamma_batch(w, VL, wL, gL, fL)
        GtR = _gamma_batch(w, VR, wR, gR, fR)
        Gr = green_ret(w, junction)
        Ga = _dagger(Gr)
        first = np.einsum("nij,nji->n", GtL, Ga @ GamR @ Gr)
        second = np.einsum("nij,nji->n", GamL, Gr @ GtR @ Ga)
        return (first - second).real / TWO_PI

    gammas = junction.all_gammas()
    res = integrate_omega(integrand, junction.all_omegas(), config,
                          width=float(np.max(gammas)), pole_widths=gammas)
    return _result(res, Method.TRACE_INTEGRAL)


def current_compact_integral(junction: JunctionModel, fermi_params: FermiParameters,
                             config: QuadratureConfig | None = None) -> CurrentResult:
    """Identical-reservoir form ``(i/2) int domega/2pi tr[(Gt^L - Gt^R)(G^r - G^a)]``."""
    _require_identical(junction)
    _require_positive_gamma(junction.all_gammas())
    _require_resolvable(junction, config)
    V, w_k, g_k, fL = _lead_arrays(junction.lead_L, fermi_params)
    fR = np.atleast_1d(fermi(w_k, fermi_params.mu_R, fermi_params.temperature))
    dF = fL - fR

    def integrand(w):
        dGt = _gamma_batch(w, V, w_k, g_k, dF)
        Gr = green_ret(w, junction)
        val = 0.5j * np.einsum("nij,nji->n", dGt, Gr - _dagger(Gr))
        return val.real / TWO_PI

    res = integrate_omega(integrand, w_k, config, width=float(np.max(g_k)), pole_widths=g_k)
    return _result(res, Method.COMPACT_INTEGRAL)


def current_pole_sum(junction: JunctionModel, fermi_params: FermiParameters) -> CurrentResult:
    """Closed-form current for identical reservoirs.

    ``I = -sum_k (f_k^L - f_k^R) Im[v_k^dagger G^r(omega_k + i gamma_k/2) v_k]``,
    summed over the modes of one lead.
    """
    _require_identical(junction)
    V, w_k, g_k, fL = _lead_arrays(junction.lead_L, fermi_params)
    _require_positive_gamma(g_k)
    fR = np.atleast_1d(fermi(w_k, fermi_params.mu_R, fermi_params.temperature))
    dF = fL - fR
    active = dF != 0
    if not np.any(active):
        return CurrentResult(0.0, Method.POLE_SUM, {"error_estimate": 0.0, "modes": 0.0})
    z = w_k[active] + 0.5j * g_k[active]
    G = green_ret(z, junction)
    Va = V[:, active]
    quad = np.einsum("in,nij,jn->n", Va.conj(), G, Va)
    value = -np.sum(dF[active] * quad.imag)
    return CurrentResult(value, Method.POLE_SUM,
                         {"error_estimate": 0.0, "modes": float(np.count_nonzero(active))})


def current_large_gamma(junction: JunctionModel, fermi_params: FermiParameters) -> CurrentResult:
    """Large-relaxation asymptote ``2 sum_k (f_k^L - f_k^R) |v_k|^2 / gamma_k``."""
    _require_identical(junction)
    V, w_k, g_k, fL = _lead_arrays(junction.lead_L, fermi_params)
    _require_positive_gamma(g_k)
    fR = np.atleast_1d(fermi(w_k, fermi_params.mu_R, fermi_params.temperature))
    norms = np.einsum("ik,ik->k", V.conj(), V).real
    value = 2.0 * np.sum((fL - fR) * norms / g_k)
    return CurrentResult(value, Method.LARGE_GAMMA, {"error_estimate": 0.0, "asymptotic": 1.0})


def current_small_gamma(junction: JunctionModel, fermi_params: FermiParameters) -> CurrentResult:
    """Small-relaxation asymptote ``(1/2) sum_k gamma_k (f_k^L - f_k^R)``.

    Independent of the system Hamiltonian: only the modes in the bias window
    and their relaxation rates enter.
    """
    _require_identical(junction)
    _, w_k, g_k, fL = _lead_arrays(junction.lead_L, fermi_params)
    _require_positive_gamma(g_k)
    fR = np.atleast_1d(fermi(w_k, fermi_params.mu_R, fermi_params.temperature))
    value = 0.5 * np.sum(g_k * (fL - fR))
    return CurrentResult(value, Method.SMALL_GAMMA, {"error_estimate": 0.0, "asymptotic": 1.0})


# --- Landauer forms -------------------------------------------------------


def lead_self_energy_semiinfinite(omega, t_hop: float, v0: complex):
    """Retarded surface self-energy of a semi-infinite chain attached by ``v0``.

    Inside the band ``|omega| <= 2 t`` the imaginary part is
    ``-|v0|^2/t^2 sqrt(t^2 - omega^2/4)``; outside it the real, decaying
    branch is taken.
    """
    if not t_hop > 0:
        raise DomainError(f"t_hop must be > 0, got {t_hop!r}")
    w = np.asarray(omega, dtype=float)
    pref = abs(complex(v0)) ** 2 / t_hop**2
    disc = t_hop**2 - 0.25 * w * w
    inside = disc >= 0
    root_in = np.sqrt(np.where(inside, disc, 0.0))
    root_out = np.sign(w) * np.sqrt(np.where(inside, 0.0, -disc))
    sigma = np.where(inside, 0.5 * w - 1j * root_in, 0.5 * w - root_out + 0j)
    sigma = pref * sigma
    return complex(sigma) if sigma.ndim == 0 else sigma


def _landauer_parts(w, geometry: ChainGeometry):
    H = geometry.system.matrix
    n = H.shape[0]
    sL = np.atleast_1d(lead_self_energy_semiinfinite(w, geometry.left.t_hop, geometry.left.v0))
    sR = np.atleast_1d(lead_self_energy_semiinfinite(w, geometry.right.t_hop, geometry.right.v0))
    A = np.atleast_1d(w)[:, None, None] * np.eye(n) - H[None].astype(complex)
    a, b = geometry.left.site, geometry.right.site
    A[:, a, a] -= sL
    A[:, b, b] -= sR
    G = np.linalg.inv(A)
    return G, -2.0 * sL.imag, -2.0 * sR.imag


def landauer_transmission(omega, geometry: ChainGeometry):
    """Transmission ``Gamma^L Gamma^R |G^r_ab|^2`` of the semi-infinite chain junction."""
    G, gL, gR = _landauer_parts(omega, geometry)
    a, b = geometry.left.site, geometry.right.site
    T = gL * gR * np.abs(G[:, a, b]) ** 2
    return float(T[0]) if np.ndim(omega) == 0 else T


def bias_window(fermi_params: FermiParameters):
    """Frequency window outside which ``f_L - f_R`` is negligible."""
    lo = min(fermi_params.mu_L, fermi_params.mu_R)
    hi = max(fermi_params.mu_L, fermi_params.mu_R)
    pad = FERMI_TAIL * fermi_params.temperature
    return lo - pad, hi + pad


def _window_integral(integrand, fermi_params, config, breakpoints=(), poles=(), widths=None):
    lo, hi = bias_window(fermi_params)
    if hi == lo:
        return integrate_omega(integrand, (), config, window=(lo, hi), tails=False)
    bp = list(breakpoints) + [fermi_params.mu_L, fermi_params.mu_R]
    return integrate_omega(integrand, poles, config, window=(lo, hi), tails=False,
                           breakpoints=bp, pole_widths=widths)


def current_landauer_semiinfinite(geometry: ChainGeometry, fermi_params: FermiParameters,
                                  config: QuadratureConfig | None = None) -> CurrentResult:
    """Zero-relaxation, infinite-reservoir reference current."""
    T = fermi_params.temperature

    def integrand(w):
        df = fermi(w, fermi_params.mu_L, T) - fermi(w, fermi_params.mu_R, T)
        return df * landauer_transmission(w, geometry) / TWO_PI

    edges = [s * 2 * a.t_hop for a in (geometry.left, geometry.right) for s in (-1, 1)]
    res = _window_integral(integrand, fermi_params, config, edges)
    return _result(res, Method.LANDAUER_SEMIINFINITE)


def transmission(omega, junction: JunctionModel):
    """Finite-relaxation transmission ``tr[Gamma^L G^r Gamma^R G^a]`` at real ``omega``."""
    _require_positive_gamma(junction.all_gammas())
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    VL, wL, gL = junction.lead_L.couplings, junction.lead_L.omegas, junction.lead_L.gammas
    VR, wR, gR = junction.lead_R.couplings, junction.lead_R.omegas, junction.lead_R.gammas
    GamL = _gamma_batch(w, VL, wL, gL)
    GamR = _gamma_batch(w, VR, wR, gR)
    Gr = green_ret(w, junction)
    T = np.einsum("nij,nji->n", GamL, Gr @ GamR @ _dagger(Gr)).real
    return float(T[0]) if np.ndim(omega) == 0 else T


def current_nonmarkovian(junction: JunctionModel, fermi_params: FermiParameters,
                         config: QuadratureConfig | None = None) -> CurrentResult:
    """Landauer form at finite relaxation with occupations ``f(omega)``.

    ``I = int domega/2pi (f_L(omega) - f_R(omega)) tr[Gamma^L G^r Gamma^R G^a]``
    using the Lorentzian-broadened spectral densities of the finite leads.
    """
    _require_positive_gamma(junction.all_gammas())
    _require_resolvable(junction, config)
    T = fermi_params.temperature

    def integrand(w):
        df = fermi(w, fermi_params.mu_L, T) - fermi(w, fermi_params.mu_R, T)
        return df * transmission(w, junction) / TWO_PI

    res = _window_integral(integrand, fermi_params, config,
                           poles=junction.all_omegas(), widths=junction.all_gammas())
    return _result(res, Method.NONMARKOVIAN)


class TransmissionCaveat(enum.Enum):
    """Marks an effective transmission as not a proper transmission probability."""

    NOT_PROPER_TRANSMISSION = (
        "not a proper transmission: relaxed reservoirs hold full and empty states "
        "outside the bandwidth"
    )


class EffectiveTransmission(NamedTuple):
    value: float
    caveat: TransmissionCaveat


def effective_transmission(omega: float, junction: JunctionModel) -> EffectiveTransmission:
    """Transmission-like function implied by Markovian relaxation.

    A reservoir mode at ``omega`` probes the junction at ``omega + i gamma/2``
    (the pole-sum evaluation point), so the system propagator is taken there
    while the spectral densities stay on the real axis::

        T_eff(omega) = tr[Gamma^L(omega) G^r(omega + i gamma/2) Gamma^R(omega) G^a(omega - i gamma/2)]

    with ``gamma`` the mean relaxation rate.  Out-of-band values are reported
    unclamped; they are nonzero whenever ``gamma > 0``.
    """
    gammas = junction.all_gammas()
    _require_positive_gamma(gammas)
    w = float(omega)
    z = w + 0.5j * float(np.mean(gammas))
    VL, VR = junction.lead_L.couplings, junction.lead_R.couplings
    GamL = _gamma_batch(w, VL, junction.lead_L.omegas, junction.lead_L.gammas)[0]
    GamR = _gamma_batch(w, VR, junction.lead_R.omegas, junction.lead_R.gammas)[0]
    Gr = green_ret(z, junction)
    value = float(np.trace(GamL @ Gr @ GamR @ Gr.conj().T).real)
    return EffectiveTransmission(value, TransmissionCaveat.NOT_PROPER_TRANSMISSION)
