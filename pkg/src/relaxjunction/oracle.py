"""
Brute-force reference on the full system + reservoir single-particle space.

The correlation matrix ``C_ab = <c_b^dagger c_a>`` obeys

    dC/dt = -i [h, C] - 1/2 {R, C} + B

with ``R = diag(gamma)`` on the reservoir modes and ``B = diag(gamma f)``.
Its stationary point solves the Lyapunov equation ``M C + C M^dagger = B``
with ``M = i h + R/2``.

Basis order is fixed: system sites, then left modes, then right modes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ComputationError, ConsistencyError, StepSizeError, UsageError
from .model import CurrentResult, FermiParameters, JunctionModel, Method, fermi
from .spectral import _require_positive_gamma

__all__ = [
    "FullSpaceModel",
    "SteadyState",
    "Trajectory",
    "assemble_full_space",
    "solve_steady_state",
    "lyapunov_residual",
    "lead_injection",
    "bond_current",
    "current_from_state",
    "time_evolve",
    "oracle_current",
    "current_time_evolution",
    "default_time_step",
    "write_correlations_csv",
]

MAX_DIM = 2000
# Kronecker (vectorized) fallback is only attempted below this dimension.
KRON_MAX_DIM = 48
STEADY_RESIDUAL = 1e-10
# Modes decaying slower than this (relative to ||M||) make the steady state non-unique.
UNIQUE_DECAY = 1e-12
SPREAD_FLAG = 1e-8
SPREAD_ERROR = 1e-6


@dataclass(frozen=True, eq=False)
class FullSpaceModel:
    h_full: np.ndarray
    relax_diag: np.ndarray
    target_diag: np.ndarray
    n_system: int
    n_left: int
    n_right: int

    @property
    def dim(self) -> int:
        return self.h_full.shape[0]

    @property
    def left(self) -> slice:
        return slice(self.n_system, self.n_system + self.n_left)

    @property
    def right(self) -> slice:
        return slice(self.n_system + self.n_left, self.dim)

    @property
    def system(self) -> slice:
        return slice(0, self.n_system)

    @property
    def generator(self) -> np.ndarray:
        """``M = i h + R/2``."""
        return 1j * self.h_full + 0.5 * np.diag(self.relax_diag)


def assemble_full_space(junction: JunctionModel, fermi_params: FermiParameters) -> FullSpaceModel:
    _require_positive_gamma(junction.all_gammas())
    nS = junction.n_sites
    L, R = junction.lead_L, junction.lead_R
    nL, nR = len(L), len(R)
    n = nS + nL + nR
    if n > MAX_DIM:
        raise UsageError(f"full space dimension {n} exceeds cap {MAX_DIM}")
    h = np.zeros((n, n), dtype=complex)
    h[:nS, :nS] = junction.system.matrix
    sl = slice(nS, nS + nL)
    sr = slice(nS + nL, n)
    h[sl, sl] = np.diag(L.omegas)
    h[sr, sr] = np.diag(R.omegas)
    h[:nS, sl] = L.couplings
    h[:nS, sr] = R.couplings
    h[sl, :nS] = L.couplings.conj().T
    h[sr, :nS] = R.couplings.conj().T
    T = fermi_params.temperature
    occ_L = np.atleast_1d(fermi(L.omegas, fermi_params.mu_L, T))
    occ_R = np.atleast_1d(fermi(R.omegas, fermi_params.mu_R, T))
    relax = np.concatenate([np.zeros(nS), L.gammas, R.gammas])
    target = np.concatenate([np.zeros(nS), L.gammas * occ_L, R.gammas * occ_R])
    return FullSpaceModel(h, relax, target, nS, nL, nR)


def lyapunov_residual(model: FullSpaceModel, C: np.ndarray) -> float:
    M = model.generator
    return float(np.max(np.abs(M @ C + C @ M.conj().T - np.diag(model.target_diag))))


@dataclass(frozen=True, eq=False)
class SteadyState:
    """Stationary correlation matrix with solver bookkeeping."""

    C: np.ndarray
    residual: float
    solver: str

    def occupations(self) -> np.ndarray:
        return np.diag(self.C).real


def _solve_eig(M, B):
    lam, V = np.linalg.eig(M)
    Vinv = np.linalg.inv(V)
    Bp = Vinv @ B @ Vinv.conj().T
    Cp = Bp / (lam[:, None] + lam.conj()[None, :])
    return V @ Cp @ V.conj().T


def _solve_kron(M, B):
    n = M.shape[0]
    eye = np.eye(n)
    # row-major vec: vec(M C) = (M kron I) vec C, vec(C M^H) = (I kron conj(M)) vec C
    A = np.kron(M, eye) + np.kron(eye, M.conj())
    return np.linalg.solve(A, B.reshape(-1)).reshape(n, n)


def _solve_schur(M, B):
    from scipy.linalg import solve_continuous_lyapunov

    return solve_continuous_lyapunov(M, B)


def solve_steady_state(model: FullSpaceModel) -> SteadyState:
    """Stationary correlation matrix.

    Diagonalizes ``M`` and divides in its eigenbasis; falls back to a dense
    Kronecker solve (small systems) or a Schur-based Lyapunov solve when the
    eigenbasis is too ill-conditioned to reach the residual target.
    """
    M = model.generator
    B = np.diag(model.target_diag).astype(complex)
    decay = float(np.min(np.linalg.eigvals(M).real))
    if decay <= UNIQUE_DECAY * max(1.0, float(np.linalg.norm(M, 1))):
        raise ComputationError(
            f"no unique steady state: slowest decay rate {decay:.3e}; some state is "
            "not connected to any relaxed reservoir mode"
        )
    scale = max(1.0, float(np.max(np.abs(B))))
    best = None
    solvers = [("eig", _solve_eig)]
    if model.dim <= KRON_MAX_DIM:
        solvers.append(("kron", _solve_kron))
    solvers.append(("schur", _solve_schur))
    for name, solver in solvers:
        try:
            C = solver(M, B)
        except (np.linalg.LinAlgError, ValueError):
            continue
        C = 0.5 * (C + C.conj().T)
        res = lyapunov_residual(model, C)
        if best is None or res < best.residual:
            best = SteadyState(C, res, name)
        if res < STEADY_RESIDUAL * scale:
            return best
    raise ComputationError(
        "steady-state solve failed to reach residual target",
        residual=None if best is None else best.residual,
    )


def lead_injection(model: FullSpaceModel, C: np.ndarray, side: str = "L") -> float:
    """Particles injected per unit time by the relaxation of one lead's modes."""
    sl = model.left if side == "L" else model.right
    occ = np.diag(C).real[sl]
    return float(np.sum(model.target_diag[sl] - model.relax_diag[sl] * occ))


def bond_current(model: FullSpaceModel, C: np.ndarray, side: str = "L") -> float:
    """Coherent particle flow from one lead's modes into the system, ``2 sum Im(h_ik C_ki)``."""
    sl = model.left if side == "L" else model.right
    h_sk = model.h_full[model.system, sl]
    C_ks = C[sl, model.system]
    return float(2.0 * np.sum(np.imag(h_sk * C_ks.T)))


def current_from_state(model: FullSpaceModel, state) -> CurrentResult:
    """Mean of the injection and bond estimators for the left lead.

    Raises
    ------
    ConsistencyError
        If the two estimators disagree beyond 1e-6 relative.
    """
    C = state.C if isinstance(state, SteadyState) else np.asarray(state)
    residual = state.residual if isinstance(state, SteadyState) else lyapunov_residual(model, C)
    inj = lead_injection(model, C, "L")
    bond = bond_current(model, C, "L")
    spread = abs(inj - bond)
    scale = max(abs(inj), abs(bond))
    rel = spread / scale if scale > 0 else 0.0
    if rel > SPREAD_ERROR and spread > 1e-13:
        raise ConsistencyError(
            f"current estimators disagree: injection {inj!r}, bond {bond!r} (relative {rel:.2e})"
        )
    diag = {
        "error_estimate": spread,
        "estimator_spread": rel,
        "residual": residual,
        "injection_L": inj,
        "injection_R": lead_injection(model, C, "R"),
        "bond_L": bond,
        "flagged": float(rel > SPREAD_FLAG and spread > 1e-13),
    }
    return CurrentResult(0.5 * (inj + bond), Method.ORACLE_SYLVESTER, diag)


def oracle_current(junction: JunctionModel, fermi_params: FermiParameters) -> CurrentResult:
    model = assemble_full_space(junction, fermi_params)
    return current_from_state(model, solve_steady_state(model))


# --- time propagation -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    currents: np.ndarray
    states: list = field(repr=False)
    final: np.ndarray = field(repr=False)

    def __iter__(self):
        return iter(zip(self.times, self.states, self.currents))


def default_time_step(model: FullSpaceModel) -> float:
    """``1 / ||M||_2``, inside the RK4 stability region of ``C -> M C + C M^dagger``.

    The RK4 fixed point of a linear equation is its exact stationary point
    for any stable step, so the step only sets how fast transients are
    followed, not the accuracy of the long-time state.
    """
    return 1.0 / float(np.linalg.norm(model.generator, 2))


def time_evolve(model: FullSpaceModel, C0, t_final: float, dt: float | None = None,
                record_every: int = 1) -> Trajectory:
    """Fixed-step RK4 propagation of the correlation matrix.

    ``I(t)`` is the bond current from the left lead into the system.
    States are stored every ``record_every`` steps; the final state is
    always kept.  The last step is shortened to end exactly at ``t_final``.
    """
    dt = default_time_step(model) if dt is None else float(dt)
    if not dt > 0:
        raise StepSizeError(f"time step must be > 0, got {dt!r}")
    M = model.generator
    # the generator acts on both sides of C, so its spectrum reaches 2 ||M||
    if 2.0 * dt * np.linalg.norm(M, 2) > 2.5:
        raise StepSizeError(
            f"dt={dt:.3e} exceeds the RK4 stability bound for ||M|| = {np.linalg.norm(M, 2):.3e}"
        )
    Md = M.conj().T
    B = np.diag(model.target_diag).astype(complex)

    def rhs(C):
        return B - M @ C - C @ Md

    C = np.array(C0, dtype=complex, copy=True)
    n_steps = int(np.ceil(t_final / dt - 1e-12))
    norm0 = max(1.0, float(np.max(np.abs(C))))
    times, currents, states = [0.0], [bond_current(model, C)], [C.copy()]
    for step in range(1, n_steps + 1):
        h = dt if step < n_steps else t_final - (n_steps - 1) * dt
        k1 = rhs(C)
        k2 = rhs(C + 0.5 * h * k1)
        k3 = rhs(C + 0.5 * h * k2)
        k4 = rhs(C + h * k3)
        C = C + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(C)) or np.max(np.abs(C)) > 10 * norm0:
            raise StepSizeError(f"norm growth detected at t={step * dt:.3e}")
        if step % record_every == 0 or step == n_steps:
            times.append(t_final if step == n_steps else step * dt)
            currents.append(bond_current(model, C))
            states.append(C.copy())
    return Trajectory(np.array(times), np.array(currents), states, C)


def current_time_evolution(junction: JunctionModel, fermi_params: FermiParameters,
                           t_final: float, dt: float | None = None, C0=None) -> CurrentResult:
    """Current after propagating from ``C0`` (default: empty system, reservoirs at target)."""
    model = assemble_full_space(junction, fermi_params)
    if C0 is None:
        occ = np.divide(model.target_diag, model.relax_diag,
                        out=np.zeros(model.dim), where=model.relax_diag > 0)
        C0 = np.diag(occ).astype(complex)
    traj = time_evolve(model, C0, t_final, dt, record_every=10**9)
    C = traj.final
    inj = lead_injection(model, C, "L")
    bond = traj.currents[-1]
    return CurrentResult(
        bond, Method.ORACLE_TIME_EVOLUTION,
        {"error_estimate": abs(inj - bond), "residual": lyapunov_residual(model, C),
         "t_final": float(t_final)},
    )


def write_correlations_csv(path, C: np.ndarray) -> None:
    """Dump ``C`` as ``row,col,re,im`` lines (basis order S, L, R)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("row,col,re,im\n")
        for (i, j), z in np.ndenumerate(C):
            fh.write(f"{i},{j},{float(z.real)!r},{float(z.imag)!r}\n")
