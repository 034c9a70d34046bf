"""
Convergence studies and the Markovian vs non-Markovian lesser-function error.
"""

from __future__ import annotations

import enum
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import currents, oracle
from .errors import DomainError, JunctionError, UsageError
from .model import (
    ChainGeometry,
    CurrentResult,
    FermiParameters,
    JunctionModel,
    Method,
    ProportionalToSpacing,
    ReservoirMode,
    Uniform,
    fermi,
)
from .quadrature import QuadratureConfig, integrate_omega

__all__ = [
    "gless_error_bound",
    "gless_error_norm",
    "SweepParameter",
    "SweepSpec",
    "SweepRow",
    "run_sweep",
    "iter_sweep",
    "evaluate_method",
    "ConstantGamma",
    "GammaOverN",
    "SpacingGamma",
    "ConvergenceRow",
    "landauer_convergence_report",
]


def gless_error_bound(gamma: float, T: float) -> float:
    """Bound ``(gamma / 4T) ln(T / gamma)`` on the integrated lesser-function error.

    Only defined for ``0 < gamma <= T``.
    """
    if not (T > 0 and gamma > 0):
        raise DomainError(f"need gamma > 0 and T > 0, got gamma={gamma!r}, T={T!r}")
    if gamma > T:
        raise DomainError(f"bound requires gamma <= T, got gamma/T = {gamma / T:.3g}")
    return gamma / (4.0 * T) * np.log(T / gamma)


def gless_error_norm(mode: ReservoirMode, mu: float, T: float,
                     config: QuadratureConfig | None = None) -> float:
    """One-norm ``int domega/2pi |g<_Markov - g<_nonMarkov|`` for a single mode.

    Equals ``int domega/2pi gamma |f(omega_k) - f(omega)| / ((omega - omega_k)^2 + gamma^2/4)``.
    """
    if not T > 0:
        raise DomainError("gless_error_norm needs T > 0; at T = 0 there is no small parameter")
    g = mode.gamma
    if not g > 0:
        raise DomainError("mode relaxation must be > 0")
    wk = mode.omega
    fk = fermi(wk, mu, T)

    def integrand(w):
        lor = g / ((w - wk) ** 2 + 0.25 * g * g)
        return lor * np.abs(fk - fermi(w, mu, T)) / (2 * np.pi)

    res = integrate_omega(integrand, [wk], config, width=max(g, T), breakpoints=[mu],
                         pole_widths=[g])
    return float(res.value)


# --- sweeps ---------------------------------------------------------------


class SweepParameter(str, enum.Enum):
    GAMMA = "gamma"
    RESERVOIR_SIZE = "reservoir_size"
    BIAS = "bias"


@dataclass(frozen=True, eq=False)
class SweepSpec:
    """What to sweep, over which values, and which current methods to evaluate.

    ``geometry`` plus ``n_modes`` and ``gamma_policy`` describe the template
    junction; the swept parameter overrides one of them (or the bias, which
    is applied symmetrically about the template's mean chemical potential).
    """

    parameter: SweepParameter
    values: tuple
    methods: tuple
    geometry: ChainGeometry
    n_modes: int
    gamma_policy: object
    fermi: FermiParameters
    config: QuadratureConfig = field(default_factory=QuadratureConfig)
    reference_landauer: bool = False

    def __post_init__(self):
        object.__setattr__(self, "parameter", SweepParameter(self.parameter))
        object.__setattr__(self, "values", tuple(self.values))
        try:
            object.__setattr__(self, "methods", tuple(Method(m) for m in self.methods))
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def validate(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.size == 0:
            raise UsageError("sweep values must be non-empty")
        if not self.methods:
            raise UsageError("sweep needs at least one method")
        d = np.diff(vals)
        if vals.size > 1 and not (np.all(d > 0) or np.all(d < 0)):
            raise UsageError("sweep values must be strictly monotone")
        if not np.all(np.isfinite(vals)):
            raise UsageError("sweep values must be finite")
        if self.parameter is SweepParameter.GAMMA and np.any(vals <= 0):
            raise UsageError("gamma sweep values must be > 0")
        if self.parameter is SweepParameter.RESERVOIR_SIZE and (
            np.any(vals < 1) or np.any(vals != np.round(vals))
        ):
            raise UsageError("reservoir sizes must be positive integers")

    def point(self, value):
        """Junction and Fermi parameters for one sweep value."""
        N, policy, fp = self.n_modes, self.gamma_policy, self.fermi
        if self.parameter is SweepParameter.GAMMA:
            policy = Uniform(float(value))
        elif self.parameter is SweepParameter.RESERVOIR_SIZE:
            N = int(value)
        else:
            center = 0.5 * (fp.mu_L + fp.mu_R)
            fp = FermiParameters(center + 0.5 * value, center - 0.5 * value, fp.temperature)
        return self.geometry.discretize(N, policy), fp


@dataclass
class SweepRow:
    """Results at one sweep value; failed or missing methods are ``None``."""

    value: float
    results: dict
    errors: dict
    deviations: dict
    reference: Optional[CurrentResult] = None
    reference_deviation: dict = field(default_factory=dict)

    def current(self, method):
        r = self.results.get(Method(method))
        return None if r is None else r.value


def evaluate_method(method, junction: JunctionModel, fermi_params: FermiParameters,
                    config: QuadratureConfig | None = None,
                    geometry: ChainGeometry | None = None) -> CurrentResult:
    """Dispatch one current method by tag."""
    method = Method(method)
    if method is Method.TRACE_INTEGRAL:
        return currents.current_trace_integral(junction, fermi_params, config)
    if method is Method.COMPACT_INTEGRAL:
        return currents.current_compact_integral(junction, fermi_params, config)
    if method is Method.POLE_SUM:
        return currents.current_pole_sum(junction, fermi_params)
    if method is Method.NONMARKOVIAN:
        return currents.current_nonmarkovian(junction, fermi_params, config)
    if method is Method.LARGE_GAMMA:
        return currents.current_large_gamma(junction, fermi_params)
    if method is Method.SMALL_GAMMA:
        return currents.current_small_gamma(junction, fermi_params)
    if method is Method.LANDAUER_SEMIINFINITE:
        if geometry is None:
            raise UsageError("landauer_semiinfinite needs a chain geometry")
        return currents.current_landauer_semiinfinite(geometry, fermi_params, config)
    if method is Method.ORACLE_SYLVESTER:
        return oracle.oracle_current(junction, fermi_params)
    if method is Method.ORACLE_TIME_EVOLUTION:
        t_final = 50.0 / float(np.min(junction.all_gammas()))
        return oracle.current_time_evolution(junction, fermi_params, t_final)
    raise UsageError(f"unknown method {method!r}")


def _describe(exc: Exception) -> str:
    cat = getattr(exc, "category", "computation")
    return f"{cat}: {exc}"


def _deviations(results: dict):
    ok = {m: r.value for m, r in results.items() if r is not None}
    scale = max((abs(v) for v in ok.values()), default=0.0)
    out = {}
    for a, b in itertools.combinations(results, 2):
        if a in ok and b in ok:
            diff = abs(ok[a] - ok[b])
            out[(a, b)] = diff / scale if scale > 0 else 0.0
        else:
            out[(a, b)] = None
    return out


def _relative_to(value, ref):
    if value is None or ref is None:
        return None
    diff = abs(value - ref)
    if ref == 0:
        return 0.0 if diff == 0 else None
    return diff / abs(ref)


def _sweep_cell(spec: SweepSpec, value) -> SweepRow:
    results, errors = {}, {}
    try:
        junction, fp = spec.point(value)
    except JunctionError as exc:
        msg = _describe(exc)
        return SweepRow(value, {m: None for m in spec.methods}, {m: msg for m in spec.methods},
                        {})
    for m in spec.methods:
        try:
            results[m] = evaluate_method(m, junction, fp, spec.config, spec.geometry)
            errors[m] = None
        except (JunctionError, np.linalg.LinAlgError, FloatingPointError) as exc:
            results[m] = None
            errors[m] = _describe(exc)
    row = SweepRow(value, results, errors, _deviations(results))
    if spec.reference_landauer:
        try:
            row.reference = currents.current_landauer_semiinfinite(spec.geometry, fp, spec.config)
        except JunctionError:
            row.reference = None
        ref = None if row.reference is None else row.reference.value
        row.reference_deviation = {
            m: _relative_to(None if r is None else r.value, ref) for m, r in results.items()
        }
    return row


def iter_sweep(spec: SweepSpec, jobs: int = 1):
    """Yield sweep rows in input order as they become available."""
    spec.validate()
    if jobs <= 1:
        for v in spec.values:
            yield _sweep_cell(spec, v)
        return
    with ThreadPoolExecutor(max_workers=int(jobs)) as pool:
        yield from pool.map(lambda v: _sweep_cell(spec, v), spec.values)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list:
    """Evaluate every method at every sweep value.

    Cells fail independently; a failure is recorded in ``SweepRow.errors``
    and never aborts the sweep.  Rows come back in input order whatever
    ``jobs`` is.
    """
    spec.validate()
    return list(iter_sweep(spec, jobs))


# --- Landauer convergence -------------------------------------------------


@dataclass(frozen=True)
class ConstantGamma:
    gamma: float

    def __call__(self, N):
        return Uniform(self.gamma)


@dataclass(frozen=True)
class GammaOverN:
    """``gamma = c / N``: relaxation shrinks with reservoir size."""

    c: float

    def __call__(self, N):
        return Uniform(self.c / N)


@dataclass(frozen=True)
class SpacingGamma:
    c: float

    def __call__(self, N):
        return ProportionalToSpacing(self.c)


@dataclass
class ConvergenceRow:
    N: int
    gamma: float
    spacing_over_gamma: float
    dlvn: Optional[float]
    nonmarkovian: Optional[float]
    landauer: Optional[float]
    dlvn_abs_err: Optional[float]
    dlvn_rel_err: Optional[float]
    nonmarkovian_abs_err: Optional[float]
    nonmarkovian_rel_err: Optional[float]
    error: Optional[str] = None


def landauer_convergence_report(geometry: ChainGeometry, fermi_params: FermiParameters,
                                N_list, gamma_rule: Callable,
                                config: QuadratureConfig | None = None, jobs: int = 1) -> list:
    """Markovian and non-Markovian currents against the semi-infinite Landauer current.

    The Markovian (DLvN) current is the pole sum for identical leads and the
    trace integral otherwise.  ``spacing_over_gamma`` uses the band-centre
    level spacing ``2 pi t / (N + 1)`` of the left lead.
    """
    N_list = [int(n) for n in N_list]
    if not N_list or any(b <= a for a, b in zip(N_list, N_list[1:])) or N_list[0] < 1:
        raise UsageError("N_list must be a non-empty increasing list of positive integers")
    landauer = currents.current_landauer_semiinfinite(geometry, fermi_params, config).value

    def one(N):
        try:
            junction = geometry.discretize(N, gamma_rule(N))
        except JunctionError as exc:
            return ConvergenceRow(N, float("nan"), float("nan"), None, None, landauer,
                                  None, None, None, None, _describe(exc))
        g_mean = float(np.mean(junction.all_gammas()))
        spacing = 2 * np.pi * geometry.left.t_hop / (N + 1)
        errors = []
        try:
            if junction.identical_reservoirs:
                dlvn = currents.current_pole_sum(junction, fermi_params).value
            else:
                dlvn = currents.current_trace_integral(junction, fermi_params, config).value
        except JunctionError as exc:
            dlvn = None
            errors.append("dlvn " + _describe(exc))
        try:
            nm = currents.current_nonmarkovian(junction, fermi_params, config).value
        except JunctionError as exc:
            nm = None
            errors.append("nonmarkovian " + _describe(exc))
        return ConvergenceRow(
            N, g_mean, spacing / g_mean, dlvn, nm, landauer,
            None if dlvn is None else abs(dlvn - landauer), _relative_to(dlvn, landauer),
            None if nm is None else abs(nm - landauer), _relative_to(nm, landauer),
            "; ".join(errors) or None,
        )

    if jobs <= 1:
        return [one(N) for N in N_list]
    with ThreadPoolExecutor(max_workers=int(jobs)) as pool:
        return list(pool.map(one, N_list))
