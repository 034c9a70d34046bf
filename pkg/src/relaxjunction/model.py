"""
Domain types for non-interacting junctions attached to finite, relaxed reservoirs.

Units are fixed throughout the package: hbar = e = k_B = 1.  Energies and
frequencies are measured in units of the lead hopping, temperatures in the
same energy units, and currents in units of e * energy / hbar.

Basis conventions
-----------------
A junction has ``N_S`` system sites.  Each reservoir mode ``k`` couples to the
system through a length-``N_S`` vector ``v_k`` with ``(v_k)_i`` the hopping
matrix element between system site ``i`` and mode ``k``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np
from scipy.special import expit

from .errors import DomainError, ModelError

__all__ = [
    "Units",
    "SystemHamiltonian",
    "ReservoirMode",
    "Lead",
    "FermiParameters",
    "JunctionModel",
    "Method",
    "CurrentResult",
    "Uniform",
    "ProportionalToSpacing",
    "LeadAttachment",
    "ChainGeometry",
    "fermi",
    "compare_leads",
    "build_single_site_junction",
    "build_two_site_interference_junction",
    "discretize_lead_chain",
    "chain_level_spacing",
]


class Units:
    """Unit convention marker: hbar = e = k_B = 1, lead hopping sets the energy scale."""

    hbar = 1.0
    e = 1.0
    k_B = 1.0


def fermi(omega, mu, T):
    """Fermi-Dirac occupation.

    Parameters
    ----------
    omega : float or array_like
        Frequency (energy) at which to evaluate.
    mu : float
        Chemical potential.
    T : float
        Temperature, ``T >= 0``.  ``T == 0`` gives the step function with
        value 1/2 exactly at ``omega == mu``.

    Returns
    -------
    float or ndarray
    """
    if not T >= 0:
        raise DomainError(f"temperature must be >= 0, got {T!r}")
    omega = np.asarray(omega, dtype=float)
    if T == 0:
        out = np.where(omega < mu, 1.0, np.where(omega > mu, 0.0, 0.5))
    else:
        out = expit(-(omega - mu) / T)
    return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class SystemHamiltonian:
    """Single-particle Hamiltonian of the junction region.

    The matrix must be exactly Hermitian.  Use :meth:`symmetrized` to build
    one from an approximately Hermitian input.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex, copy=True)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ModelError(f"system Hamiltonian must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ModelError("system Hamiltonian has non-finite entries")
        if not np.array_equal(m, m.conj().T):
            dev = np.max(np.abs(m - m.conj().T))
            raise ModelError(
                f"system Hamiltonian is not Hermitian (max |H - H^dagger| = {dev:.3e}); "
                "use SystemHamiltonian.symmetrized() to symmetrize explicitly"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def symmetrized(cls, matrix) -> "SystemHamiltonian":
        m = np.asarray(matrix, dtype=complex)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        return cls(0.5 * (m + m.conj().T))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class ReservoirMode:
    """One relaxed reservoir eigenmode.

    ``gamma`` is stored as given; formulas that need Markovian relaxation
    check ``gamma > 0`` themselves.
    """

    omega: float
    gamma: float
    coupling: np.ndarray

    def __post_init__(self):
        v = np.array(self.coupling, dtype=complex, copy=True).reshape(-1)
        if v.size < 1:
            raise ModelError("coupling vector must be non-empty")
        if not np.all(np.isfinite(v)):
            raise ModelError("coupling vector has non-finite entries")
        if not np.isfinite(self.omega):
            raise ModelError(f"mode frequency must be finite, got {self.omega!r}")
        if not (np.isfinite(self.gamma) and self.gamma >= 0):
            raise ModelError(f"mode relaxation must be finite and >= 0, got {self.gamma!r}")
        v.setflags(write=False)
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "coupling", v)

    def same_as(self, other: "ReservoirMode") -> bool:
        return (
            self.omega == other.omega
            and self.gamma == other.gamma
            and np.array_equal(self.coupling, other.coupling)
        )


@dataclass(frozen=True, eq=False)
class Lead:
    """Ordered collection of reservoir modes forming one electrode."""

    modes: tuple
    label: str = "L"

    def __post_init__(self):
        modes = tuple(self.modes)
        if not modes:
            raise ModelError(f"lead {self.label} has no modes")
        if self.label not in ("L", "R"):
            raise ModelError(f"lead label must be 'L' or 'R', got {self.label!r}")
        n = modes[0].coupling.size
        for k, m in enumerate(modes):
            if m.coupling.size != n:
                raise ModelError(
                    f"lead {self.label}: mode {k} coupling length {m.coupling.size} != {n}"
                )
        object.__setattr__(self, "modes", modes)

    @classmethod
    def from_arrays(cls, omegas, gammas, couplings, label="L") -> "Lead":
        """Build a lead from arrays.

        ``couplings`` has shape ``(N_S, K)``; column ``k`` is ``v_k``.
        """
        omegas = np.asarray(omegas, dtype=float).reshape(-1)
        gammas = np.broadcast_to(np.asarray(gammas, dtype=float), omegas.shape)
        couplings = np.asarray(couplings, dtype=complex)
        if couplings.ndim == 1:
            couplings = couplings.reshape(1, -1)
        if couplings.shape[1] != omegas.size:
            raise ModelError(
                f"couplings have {couplings.shape[1]} columns for {omegas.size} modes"
            )
        modes = tuple(
            ReservoirMode(w, g, couplings[:, k]) for k, (w, g) in enumerate(zip(omegas, gammas))
        )
        return cls(modes, label)

    def __len__(self):
        return len(self.modes)

    @property
    def n_sites(self) -> int:
        return self.modes[0].coupling.size

    @cached_property
    def omegas(self) -> np.ndarray:
        return np.array([m.omega for m in self.modes])

    @cached_property
    def gammas(self) -> np.ndarray:
        return np.array([m.gamma for m in self.modes])

    @cached_property
    def couplings(self) -> np.ndarray:
        """Coupling matrix of shape ``(N_S, K)``."""
        return np.stack([m.coupling for m in self.modes], axis=1)

    def relabeled(self, label: str) -> "Lead":
        return Lead(self.modes, label)

    def with_gammas(self, gammas) -> "Lead":
        return Lead.from_arrays(self.omegas, gammas, self.couplings, self.label)


@dataclass(frozen=True)
class FermiParameters:
    """Chemical potentials of both leads and the common temperature."""

    mu_L: float
    mu_R: float
    temperature: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.mu_L) and np.isfinite(self.mu_R)):
            raise DomainError("chemical potentials must be finite")
        if not self.temperature >= 0:
            raise DomainError(f"temperature must be >= 0, got {self.temperature!r}")

    def mu(self, side: str) -> float:
        if side == "L":
            return self.mu_L
        if side == "R":
            return self.mu_R
        raise ValueError(f"side must be 'L' or 'R', got {side!r}")

    def swapped(self) -> "FermiParameters":
        return FermiParameters(self.mu_R, self.mu_L, self.temperature)

    @property
    def bias(self) -> float:
        return self.mu_L - self.mu_R


def compare_leads(lead_L: Lead, lead_R: Lead):
    """Return ``None`` if the leads are mode-by-mode identical, else a description
    of the first mismatch."""
    if len(lead_L) != len(lead_R):
        return f"mode counts differ ({len(lead_L)} vs {len(lead_R)})"
    for k, (a, b) in enumerate(zip(lead_L.modes, lead_R.modes)):
        if a.omega != b.omega:
            return f"mode {k}: omega differs ({a.omega!r} vs {b.omega!r})"
        if a.gamma != b.gamma:
            return f"mode {k}: gamma differs ({a.gamma!r} vs {b.gamma!r})"
        if not np.array_equal(a.coupling, b.coupling):
            return f"mode {k}: coupling vectors differ"
    return None


@dataclass(frozen=True, eq=False)
class JunctionModel:
    """Full transport problem: system plus left and right leads.

    ``identical_reservoirs`` is derived by exact comparison of the stored
    mode data and cannot be set by hand.
    """

    system: SystemHamiltonian
    lead_L: Lead
    lead_R: Lead
    identical_reservoirs: bool = field(init=False)

    def __post_init__(self):
        if not isinstance(self.system, SystemHamiltonian):
            object.__setattr__(self, "system", SystemHamiltonian(self.system))
        n = self.system.dim
        for lead in (self.lead_L, self.lead_R):
            if lead.n_sites != n:
                raise ModelError(
                    f"lead {lead.label} coupling length {lead.n_sites} != system dimension {n}"
                )
        object.__setattr__(self, "lead_L", self.lead_L.relabeled("L"))
        object.__setattr__(self, "lead_R", self.lead_R.relabeled("R"))
        object.__setattr__(
            self, "identical_reservoirs", compare_leads(self.lead_L, self.lead_R) is None
        )

    @property
    def n_sites(self) -> int:
        return self.system.dim

    @property
    def leads(self):
        return (self.lead_L, self.lead_R)

    def lead_mismatch(self):
        return compare_leads(self.lead_L, self.lead_R)

    def swapped(self) -> "JunctionModel":
        """Exchange the roles of the left and right leads."""
        return JunctionModel(self.system, self.lead_R, self.lead_L)

    def all_omegas(self) -> np.ndarray:
        return np.concatenate([self.lead_L.omegas, self.lead_R.omegas])

    def all_gammas(self) -> np.ndarray:
        return np.concatenate([self.lead_L.gammas, self.lead_R.gammas])


class Method(str, enum.Enum):
    TRACE_INTEGRAL = "trace_integral"
    COMPACT_INTEGRAL = "compact_integral"
    POLE_SUM = "pole_sum"
    LANDAUER_SEMIINFINITE = "landauer_semiinfinite"
    NONMARKOVIAN = "nonmarkovian"
    LARGE_GAMMA = "large_gamma"
    SMALL_GAMMA = "small_gamma"
    ORACLE_SYLVESTER = "oracle_sylvester"
    ORACLE_TIME_EVOLUTION = "oracle_time_evolution"


@dataclass(frozen=True)
class CurrentResult:
    """A steady-state current and how it was obtained."""

    value: float
    method: Method
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        diag = dict(self.diagnostics)
        diag.setdefault("error_estimate", 0.0)
        object.__setattr__(self, "diagnostics", diag)
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "method", Method(self.method))

    @property
    def error_estimate(self) -> float:
        return self.diagnostics["error_estimate"]


# --- 1D chain leads -------------------------------------------------------


@dataclass(frozen=True)
class Uniform:
    """Every mode relaxes at the same rate ``gamma``."""

    gamma: float

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ModelError(f"gamma must be > 0, got {self.gamma!r}")


@dataclass(frozen=True)
class ProportionalToSpacing:
    """``gamma_k = c * (local level spacing at omega_k)``."""

    c: float

    def __post_init__(self):
        if not (np.isfinite(self.c) and self.c > 0):
            raise ModelError(f"spacing factor must be > 0, got {self.c!r}")


GammaPolicy = Union[Uniform, ProportionalToSpacing]


def chain_level_spacing(N: int, t_hop: float) -> np.ndarray:
    """Local level spacing |d omega_k / d k| of an open N-site chain."""
    k = np.arange(1, N + 1)
    theta = k * np.pi / (N + 1)
    return 2.0 * t_hop * np.pi / (N + 1) * np.sin(theta)


def discretize_lead_chain(
    N: int,
    t_hop: float,
    v0: complex,
    gamma_policy: GammaPolicy,
    label: str = "L",
    n_sites: int = 1,
    site: int = 0,
) -> Lead:
    """Eigenmodes of an open N-site tight-binding chain attached at its end.

    Parameters
    ----------
    N : int
        Number of chain sites (= number of modes).
    t_hop : float
        Nearest-neighbour hopping, ``> 0``.
    v0 : complex
        Hopping between the chain's end site and the system site ``site``.
    gamma_policy : Uniform or ProportionalToSpacing
        How the per-mode relaxation rates are assigned.
    label : {'L', 'R'}
    n_sites, site : int
        System dimension and the site the chain is attached to.

    Returns
    -------
    Lead
        Modes with ``omega_k = -2 t cos(k pi/(N+1))`` and coupling
        ``v0 sqrt(2/(N+1)) sin(k pi/(N+1))`` on ``site``.
    """
    if int(N) != N or N < 1:
        raise ModelError(f"chain length must be a positive integer, got {N!r}")
    N = int(N)
    if not (np.isfinite(t_hop) and t_hop > 0):
        raise ModelError(f"t_hop must be > 0, got {t_hop!r}")
    if not 0 <= site < n_sites:
        raise ModelError(f"attachment site {site} outside system of dimension {n_sites}")
    k = np.arange(1, N + 1)
    theta = k * np.pi / (N + 1)
    omegas = -2.0 * t_hop * np.cos(theta)
    amp = complex(v0) * np.sqrt(2.0 / (N + 1)) * np.sin(theta)
    if isinstance(gamma_policy, Uniform):
        gammas = np.full(N, float(gamma_policy.gamma))
    elif isinstance(gamma_policy, ProportionalToSpacing):
        gammas = gamma_policy.c * chain_level_spacing(N, t_hop)
    else:
        raise ModelError(f"unknown gamma policy {gamma_policy!r}")
    couplings = np.zeros((n_sites, N), dtype=complex)
    couplings[site] = amp
    return Lead.from_arrays(omegas, gammas, couplings, label)


@dataclass(frozen=True)
class LeadAttachment:
    """A 1D chain lead: hopping, contact hopping, and the system site it attaches to."""

    t_hop: float = 1.0
    v0: complex = 0.2
    site: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.t_hop) and self.t_hop > 0):
            raise ModelError(f"t_hop must be > 0, got {self.t_hop!r}")


@dataclass(frozen=True, eq=False)
class ChainGeometry:
    """System plus chain-lead attachments, before the leads are discretized.

    Serves both the semi-infinite Landauer reference and finite-reservoir
    junctions of any size via :meth:`discretize`.
    """

    system: SystemHamiltonian
    left: LeadAttachment
    right: LeadAttachment

    def __post_init__(self):
        if not isinstance(self.system, SystemHamiltonian):
            object.__setattr__(self, "system", SystemHamiltonian(self.system))
        for a in (self.left, self.right):
            if not 0 <= a.site < self.system.dim:
                raise ModelError(f"attachment site {a.site} outside system")

    def discretize(self, N: int, gamma_policy: GammaPolicy) -> JunctionModel:
        n = self.system.dim
        lead_L = discretize_lead_chain(
            N, self.left.t_hop, self.left.v0, gamma_policy, "L", n, self.left.site
        )
        lead_R = discretize_lead_chain(
            N, self.right.t_hop, self.right.v0, gamma_policy, "R", n, self.right.site
        )
        return JunctionModel(self.system, lead_L, lead_R)


# --- example systems ------------------------------------------------------


def _lead_pair(leads: Sequence[Lead]):
    lead_L, lead_R = leads
    return lead_L, lead_R


def build_single_site_junction(eps0: float, leads) -> JunctionModel:
    """Single level ``eps0`` between two leads whose couplings have length 1."""
    lead_L, lead_R = _lead_pair(leads)
    for lead in (lead_L, lead_R):
        if lead.n_sites != 1:
            raise ModelError(
                f"single-site junction needs coupling length 1, lead {lead.label} has {lead.n_sites}"
            )
    return JunctionModel(SystemHamiltonian([[eps0]]), lead_L, lead_R)


def build_two_site_interference_junction(eps1: float, eps2: float, h12: complex, leads) -> JunctionModel:
    """Site 1 carries both leads, site 2 is a side-coupled interferer.

    Any mode with a nonzero coupling to site 2 is rejected.
    """
    lead_L, lead_R = _lead_pair(leads)
    for lead in (lead_L, lead_R):
        if lead.n_sites != 2:
            raise ModelError(
                f"two-site junction needs coupling length 2, lead {lead.label} has {lead.n_sites}"
            )
        bad = np.flatnonzero(lead.couplings[1] != 0)
        if bad.size:
            raise ModelError(
                f"lead {lead.label} mode {bad[0]} couples to site 2; only site 1 may carry leads"
            )
    h12 = complex(h12)
    H = np.array([[eps1, h12], [np.conj(h12), eps2]], dtype=complex)
    return JunctionModel(SystemHamiltonian(H), lead_L, lead_R)
