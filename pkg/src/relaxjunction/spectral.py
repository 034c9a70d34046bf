"""
Mode Green's functions, self-energies and system Green's functions.

Every function accepts a scalar frequency or a 1D array of frequencies.  For
array input the matrix-valued results gain a leading frequency axis, i.e.
shape ``(n_omega, N_S, N_S)``.

Matrix ``Im``: for any matrix ``M`` we use ``Im M = (M - M^dagger) / 2i``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ComputationError, DomainError, UsageError
from .model import FermiParameters, JunctionModel, Lead, ReservoirMode, fermi

__all__ = [
    "LesserKind",
    "SpectralSample",
    "g_mode_ret",
    "g_mode_adv",
    "g_mode_lesser",
    "lorentzian",
    "self_energy_ret",
    "lead_self_energy_ret",
    "green_ret",
    "green_adv",
    "spectral_density",
    "weighted_spectral_density",
    "spectral_sample",
    "verify_resolvent_identity",
    "verify_identical_reservoir_identity",
]

# Inversions beyond this condition number are reported, not regularized.
MAX_CONDITION = 1e13


class LesserKind(enum.Enum):
    MARKOVIAN = "markovian"
    NONMARKOVIAN = "nonmarkovian"


def _require_positive_gamma(gammas):
    gammas = np.asarray(gammas)
    if not np.all(gammas > 0):
        raise DomainError("Markovian relaxation requires every gamma_k > 0")


def g_mode_ret(omega, mode: ReservoirMode):
    """Isolated retarded Green's function ``1 / (omega - omega_k + i gamma_k/2)``."""
    _require_positive_gamma(mode.gamma)
    return 1.0 / (np.asarray(omega) - mode.omega + 0.5j * mode.gamma)


def g_mode_adv(omega, mode: ReservoirMode):
    return np.conj(g_mode_ret(omega, mode))


def lorentzian(omega, omegas, gammas):
    """``gamma_k / ((omega - omega_k)^2 + gamma_k^2/4)`` with shape ``(n_omega, K)``."""
    w = np.atleast_1d(np.asarray(omega, dtype=float))[:, None]
    x = w - omegas[None, :]
    return gammas[None, :] / (x * x + 0.25 * gammas[None, :] ** 2)


def g_mode_lesser(omega, mode: ReservoirMode, mu: float, T: float, kind=LesserKind.MARKOVIAN):
    """Lesser function of one relaxed mode.

    The Markovian variant weights the Lorentzian by ``f(omega_k)``; the
    non-Markovian one by ``f(omega)``.
    """
    _require_positive_gamma(mode.gamma)
    omega = np.asarray(omega, dtype=float)
    lor = mode.gamma / ((omega - mode.omega) ** 2 + 0.25 * mode.gamma**2)
    kind = LesserKind(kind)
    if kind is LesserKind.MARKOVIAN:
        occ = fermi(mode.omega, mu, T)
    else:
        occ = fermi(omega, mu, T)
    return 1j * occ * lor


def _outer_sum(couplings, weights):
    # sum_k w[n, k] v_k v_k^dagger  ->  (n, N_S, N_S)
    return np.einsum("ik,nk,jk->nij", couplings, weights, couplings.conj(), optimize=True)


def _squeeze(omega, arr):
    return arr[0] if np.ndim(omega) == 0 else arr


def lead_self_energy_ret(omega, lead: Lead):
    """Retarded self-energy of one lead; ``omega`` may be complex with ``Im >= 0``."""
    _require_positive_gamma(lead.gammas)
    z = np.atleast_1d(np.asarray(omega, dtype=complex))
    if np.any(z.imag < 0):
        raise DomainError("retarded functions are only continued into the upper half-plane")
    g = 1.0 / (z[:, None] - lead.omegas[None, :] + 0.5j * lead.gammas[None, :])
    return _squeeze(omega, _outer_sum(lead.couplings, g))


def self_energy_ret(omega, junction: JunctionModel):
    """Total retarded self-energy from all modes of both leads."""
    return lead_self_energy_ret(omega, junction.lead_L) + lead_self_energy_ret(
        omega, junction.lead_R
    )


def _inverse(A):
    """Batched inverse with a 1-norm condition estimate guard."""
    try:
        inv = np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise ComputationError(f"singular resolvent: {exc}", condition=np.inf) from None
    cond = np.linalg.norm(A, 1, axis=(-2, -1)) * np.linalg.norm(inv, 1, axis=(-2, -1))
    worst = float(np.max(cond)) if np.size(cond) else 0.0
    if not np.all(np.isfinite(inv)) or not worst < MAX_CONDITION:
        raise ComputationError(
            f"resolvent inversion ill-conditioned (condition ~ {worst:.3e})", condition=worst
        )
    return inv


def green_ret(omega, junction: JunctionModel):
    """System retarded Green's function ``(omega - H_S - Sigma^r)^-1``.

    ``omega`` may be complex with non-negative imaginary part, which the
    pole-sum current needs at ``omega_k + i gamma_k/2``.
    """
    z = np.atleast_1d(np.asarray(omega, dtype=complex))
    if np.any(z.imag < 0):
        raise DomainError("green_ret is only defined for Im(omega) >= 0")
    n = junction.n_sites
    sigma = self_energy_ret(z, junction)
    A = z[:, None, None] * np.eye(n) - junction.system.matrix[None] - sigma
    return _squeeze(omega, _inverse(A))


def green_adv(omega, junction: JunctionModel):
    """Advanced Green's function at real ``omega`` (conjugate transpose of ``green_ret``)."""
    G = green_ret(omega, junction)
    return np.conj(np.swapaxes(G, -1, -2))


def spectral_density(omega, lead: Lead):
    """Unweighted spectral density ``Gamma(omega) = sum_k v_k v_k^dagger L_k(omega)``."""
    _require_positive_gamma(lead.gammas)
    lor = lorentzian(omega, lead.omegas, lead.gammas)
    return _squeeze(omega, _outer_sum(lead.couplings, lor))


def weighted_spectral_density(omega, lead: Lead, fermi_params: FermiParameters, side=None):
    """Spectral density with each mode weighted by its occupation ``f(omega_k)``.

    The occupation is taken at the mode frequency, not at ``omega``.
    """
    _require_positive_gamma(lead.gammas)
    side = lead.label if side is None else side
    occ = fermi(lead.omegas, fermi_params.mu(side), fermi_params.temperature)
    lor = lorentzian(omega, lead.omegas, lead.gammas) * occ[None, :]
    return _squeeze(omega, _outer_sum(lead.couplings, lor))


@dataclass(frozen=True, eq=False)
class SpectralSample:
    """All frequency-resolved matrices entering the current formulas at one omega."""

    omega: float
    gamma_L: np.ndarray
    gamma_R: np.ndarray
    gamma_L_weighted: np.ndarray
    gamma_R_weighted: np.ndarray
    g_ret: np.ndarray
    g_adv: np.ndarray


def spectral_sample(omega: float, junction: JunctionModel, fermi_params: FermiParameters):
    G = green_ret(float(omega), junction)
    return SpectralSample(
        omega=float(omega),
        gamma_L=spectral_density(float(omega), junction.lead_L),
        gamma_R=spectral_density(float(omega), junction.lead_R),
        gamma_L_weighted=weighted_spectral_density(float(omega), junction.lead_L, fermi_params),
        gamma_R_weighted=weighted_spectral_density(float(omega), junction.lead_R, fermi_params),
        g_ret=G,
        g_adv=G.conj().T,
    )


def verify_resolvent_identity(omega: float, junction: JunctionModel) -> float:
    """Max-norm residual of ``G^r - G^a = -i G^r (Gamma^L + Gamma^R) G^a`` and its
    mirrored form ``-i G^a (Gamma^L + Gamma^R) G^r``."""
    omega = float(omega)
    Gr = green_ret(omega, junction)
    Ga = Gr.conj().T
    gam = spectral_density(omega, junction.lead_L) + spectral_density(omega, junction.lead_R)
    diff = Gr - Ga
    r1 = np.max(np.abs(diff + 1j * Gr @ gam @ Ga))
    r2 = np.max(np.abs(diff + 1j * Ga @ gam @ Gr))
    return float(max(r1, r2))


def verify_identical_reservoir_identity(omega: float, junction: JunctionModel) -> float:
    """Max-norm residual of ``G^r - G^a = -2i G^a Gamma^alpha G^r`` for both leads.

    Raises
    ------
    UsageError
        If the reservoirs are not identical.
    """
    mismatch = junction.lead_mismatch()
    if mismatch is not None:
        raise UsageError(f"identical reservoirs required ({mismatch})")
    omega = float(omega)
    Gr = green_ret(omega, junction)
    Ga = Gr.conj().T
    diff = Gr - Ga
    res = 0.0
    for lead in junction.leads:
        gam = spectral_density(omega, lead)
        res = max(res, float(np.max(np.abs(diff + 2j * Ga @ gam @ Gr))))
    return res
