"""
Command-line front end.

Subcommands: ``current``, ``validate``, ``sweep``, ``converge``.  Each reads a
configuration file (see :mod:`relaxjunction.config`) and writes CSV, preceded
by the fully resolved configuration as ``#``-prefixed echo lines.

Exit codes: 0 success, 1 usage or parse error, 2 numerical-accuracy failure,
3 validation failure.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
from dataclasses import dataclass

import numpy as np

from . import analysis, currents, oracle, spectral
from .config import RunConfig, describe_keys, echo_config, parse_config
from .errors import (
    AccuracyError,
    ComputationError,
    ConsistencyError,
    JunctionError,
    ModelError,
    StepSizeError,
    UsageError,
)
from .model import (
    ChainGeometry,
    FermiParameters,
    JunctionModel,
    Lead,
    LeadAttachment,
    Method,
    ProportionalToSpacing,
    SystemHamiltonian,
    Uniform,
    build_single_site_junction,
    build_two_site_interference_junction,
    discretize_lead_chain,
)
from .quadrature import QuadratureConfig

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VALIDATION = 0, 1, 2, 3

CSV_HEADER = "param_name,param_value,method,current,error_estimate,diag_panels,diag_residual,error"
CONVERGE_HEADER = (
    "N,gamma,spacing_over_gamma,dlvn,nonmarkovian,landauer,"
    "dlvn_abs_err,dlvn_rel_err,nonmarkovian_abs_err,nonmarkovian_rel_err,error"
)
NUMERIC_ERRORS = (AccuracyError, ComputationError, ConsistencyError, StepSizeError)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _csv_field(text) -> str:
    text = "" if text is None else str(text)
    if any(c in text for c in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


# --- building model objects from a RunConfig ------------------------------


def _gamma_policy(lead_cfg):
    if "gamma" in lead_cfg:
        return Uniform(lead_cfg["gamma"])
    return ProportionalToSpacing(lead_cfg["gamma_spacing"])


def _n_sites(config: RunConfig) -> int:
    return 1 if config.get("system", "builder") == "single_site" else 2


def build_system(config: RunConfig) -> SystemHamiltonian:
    s = config.sections["system"]
    if s["builder"] == "single_site":
        return SystemHamiltonian([[s["eps0"]]])
    h12 = complex(s["h12"])
    return SystemHamiltonian([[s["eps1"], h12], [np.conj(h12), s["eps2"]]])


def build_geometry(config: RunConfig):
    """Chain geometry, or ``None`` when either lead is given as raw modes."""
    lc, rc = config.sections["lead_L"], config.sections["lead_R"]
    if "N" not in lc or "N" not in rc:
        return None
    return ChainGeometry(
        build_system(config),
        LeadAttachment(lc["t_hop"], lc["v0"], lc["site"]),
        LeadAttachment(rc["t_hop"], rc["v0"], rc["site"]),
    )


def _build_lead(config: RunConfig, name: str, label: str) -> Lead:
    c = config.sections[name]
    n = _n_sites(config)
    if "N" in c:
        return discretize_lead_chain(c["N"], c["t_hop"], c["v0"], _gamma_policy(c), label, n, c["site"])
    if not 0 <= c["site"] < n:
        raise ModelError(f"[{name}] site {c['site']} outside system of dimension {n}")
    couplings = np.zeros((n, len(c["omegas"])), dtype=complex)
    couplings[c["site"]] = c["couplings"]
    return Lead.from_arrays(c["omegas"], c["gammas"], couplings, label)


def build_junction(config: RunConfig) -> JunctionModel:
    leads = (_build_lead(config, "lead_L", "L"), _build_lead(config, "lead_R", "R"))
    s = config.sections["system"]
    if s["builder"] == "single_site":
        return build_single_site_junction(s["eps0"], leads)
    return build_two_site_interference_junction(s["eps1"], s["eps2"], s["h12"], leads)


def build_fermi(config: RunConfig) -> FermiParameters:
    f = config.sections["fermi"]
    return FermiParameters(f["mu_L"], f["mu_R"], f["T"])


def build_quadrature(config: RunConfig) -> QuadratureConfig:
    return QuadratureConfig(**config.sections["quadrature"])


def applicable_methods(junction: JunctionModel, geometry) -> list:
    methods = [Method.TRACE_INTEGRAL]
    if junction.identical_reservoirs:
        methods += [Method.COMPACT_INTEGRAL, Method.POLE_SUM, Method.LARGE_GAMMA, Method.SMALL_GAMMA]
    methods.append(Method.NONMARKOVIAN)
    if geometry is not None:
        methods.append(Method.LANDAUER_SEMIINFINITE)
    methods.append(Method.ORACLE_SYLVESTER)
    return methods


# --- output ---------------------------------------------------------------


def _echo_lines(config: RunConfig):
    yield f"# mode = {config.mode}\n"
    for line in echo_config(config).splitlines():
        yield f"# {line}\n" if line else "#\n"


def _result_row(param_name, param_value, method, result, error) -> str:
    if result is None:
        fields = [param_name, _fmt(param_value), method.value, "", "", "", "", _csv_field(error)]
    else:
        d = result.diagnostics
        fields = [
            param_name,
            _fmt(param_value),
            method.value,
            _fmt(result.value),
            _fmt(d.get("error_estimate")),
            _fmt(d.get("panels")),
            _fmt(d.get("residual")),
            "",
        ]
    return ",".join(fields) + "\n"


def _report(exc: Exception, stream=None):
    stream = stream or sys.stderr
    category = getattr(exc, "category", "error")
    print(f"ERROR {category}: {exc}", file=stream)


def _exit_code_for(exc: Exception) -> int:
    if isinstance(exc, NUMERIC_ERRORS):
        return EXIT_NUMERIC
    return EXIT_USAGE


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


# --- commands -------------------------------------------------------------


def cmd_current(config: RunConfig, out=None, dump_correlations=None) -> int:
    """Evaluate each selected method once and write one CSV row per method."""
    junction = build_junction(config)
    geometry = build_geometry(config)
    fp = build_fermi(config)
    quad = build_quadrature(config)
    methods = config.sections["run"]["methods"]
    if methods == ("all",):
        methods = applicable_methods(junction, geometry)
    else:
        methods = [Method(m) for m in methods]
    code = EXIT_OK
    with _output(out) as fh:
        fh.writelines(_echo_lines(config))
        fh.write(CSV_HEADER + "\n")
        for m in methods:
            try:
                res = analysis.evaluate_method(m, junction, fp, quad, geometry)
                err = None
            except JunctionError as exc:
                res, err = None, f"{exc.category}: {exc}"
                _report(exc)
                c = _exit_code_for(exc)
                code = c if code == EXIT_OK else min(code, c)
            fh.write(_result_row("", "", m, res, err))
            fh.flush()
    if dump_correlations:
        model = oracle.assemble_full_space(junction, fp)
        oracle.write_correlations_csv(dump_correlations, oracle.solve_steady_state(model).C)
    return code


@dataclass
class Check:
    name: str
    status: str  # "pass", "fail" or "skipped (precondition)"
    value: float | None
    threshold: float | None
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.status != "fail"


def _grid(junction: JunctionModel, n=32):
    w = junction.all_omegas()
    return np.linspace(w.min() - 1.0, w.max() + 1.0, n)


def validation_checks(junction: JunctionModel, fp: FermiParameters, quad: QuadratureConfig,
                      corrupt_hermiticity: bool = False, dump_correlations=None) -> list:
    """Identity residuals on a 32-point grid plus the oracle cross-check."""
    checks = []
    model = oracle.assemble_full_space(junction, fp)
    if corrupt_hermiticity:
        h = model.h_full.copy()
        h[0, -1] += 1e-3
        model = oracle.FullSpaceModel(h, model.relax_diag, model.target_diag,
                                      model.n_system, model.n_left, model.n_right)
    herm = float(np.max(np.abs(model.h_full - model.h_full.conj().T)))
    checks.append(Check("full_hamiltonian_hermitian", "pass" if herm == 0 else "fail", herm, 0.0))

    grid = _grid(junction)
    res2 = max(spectral.verify_resolvent_identity(w, junction) for w in grid)
    checks.append(Check("resolvent_identity", "pass" if res2 < 1e-10 else "fail", res2, 1e-10))
    if junction.identical_reservoirs:
        res3 = max(spectral.verify_identical_reservoir_identity(w, junction) for w in grid)
        checks.append(Check("identical_reservoir_identity", "pass" if res3 < 1e-10 else "fail",
                            res3, 1e-10))
    else:
        checks.append(Check("identical_reservoir_identity", "skipped (precondition)", None, 1e-10,
                            junction.lead_mismatch()))

    try:
        state = oracle.solve_steady_state(model)
    except ComputationError as exc:
        checks.append(Check("oracle_residual", "fail", exc.residual, 1e-10, str(exc)))
        return checks
    if dump_correlations:
        oracle.write_correlations_csv(dump_correlations, state.C)
    checks.append(Check("oracle_residual", "pass" if state.residual < 1e-10 else "fail",
                        state.residual, 1e-10))
    ev = np.linalg.eigvalsh(state.C)
    bad = float(max(0.0, -ev.min(), ev.max() - 1.0))
    checks.append(Check("correlation_physical", "pass" if bad <= 1e-9 else "fail", bad, 1e-9))
    inj_L = oracle.lead_injection(model, state.C, "L")
    inj_R = oracle.lead_injection(model, state.C, "R")
    cons = abs(inj_L + inj_R)
    checks.append(Check("particle_conservation", "pass" if cons < 1e-10 else "fail", cons, 1e-10))
    bond = oracle.bond_current(model, state.C, "L")
    spread = abs(inj_L - bond)
    tol_s = max(1e-6 * abs(inj_L), 1e-12)
    checks.append(Check("oracle_estimators", "pass" if spread <= tol_s else "fail", spread, tol_s))
    I_or = 0.5 * (inj_L + bond)
    I_tr = currents.current_trace_integral(junction, fp, quad).value
    diff = abs(I_tr - I_or)
    tol = max(1e-6 * abs(I_or), 1e-10)
    checks.append(Check("oracle_vs_trace_integral", "pass" if diff <= tol else "fail", diff, tol))
    return checks


def random_junction(rng: np.random.Generator, identical: bool = False) -> JunctionModel:
    """Random dense junction with N_S <= 3 and 4-20 modes per lead."""
    nS = int(rng.integers(1, 4))
    H = rng.normal(size=(nS, nS)) + 1j * rng.normal(size=(nS, nS))

    def lead(label):
        K = int(rng.integers(4, 21))
        V = 0.3 * (rng.normal(size=(nS, K)) + 1j * rng.normal(size=(nS, K)))
        return Lead.from_arrays(rng.uniform(-2, 2, K), rng.uniform(0.01, 1.0, K), V, label)

    left = lead("L")
    right = left.relabeled("R") if identical else lead("R")
    return JunctionModel(SystemHamiltonian.symmetrized(H), left, right)


def cmd_validate(config: RunConfig, out=None, seed=None, dump_correlations=None,
                 corrupt_hermiticity: bool = False) -> int:
    """Run the validation table; exit 3 naming every failed check."""
    junction = build_junction(config)
    fp = build_fermi(config)
    quad = build_quadrature(config)
    checks = [("config", c) for c in validation_checks(
        junction, fp, quad, corrupt_hermiticity, dump_correlations)]
    if seed is not None:
        rng = np.random.default_rng(seed)
        for i in range(4):
            j = random_junction(rng, identical=bool(i % 2))
            rfp = FermiParameters(*rng.uniform(-1, 1, 2), float(rng.choice([0.0, 0.1])))
            checks += [(f"random{i}", c) for c in validation_checks(j, rfp, quad)]
    with _output(out) as fh:
        fh.writelines(_echo_lines(config))
        fh.write("junction,check,status,value,threshold,note\n")
        for tag, c in checks:
            fh.write(",".join([tag, c.name, c.status, _fmt(c.value), _fmt(c.threshold),
                               _csv_field(c.note)]) + "\n")
    failed = [f"{tag}:{c.name}" for tag, c in checks if not c.ok]
    if failed:
        print(f"ERROR validation: failed checks: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def _sweep_spec(config: RunConfig) -> analysis.SweepSpec:
    geometry = build_geometry(config)
    if geometry is None:
        raise UsageError("sweeps need chain leads (N, t_hop, v0) on both sides")
    lc, rc = config.sections["lead_L"], config.sections["lead_R"]
    if lc["N"] != rc["N"] or _gamma_policy(lc) != _gamma_policy(rc):
        raise UsageError("sweeps need lead_L and lead_R with the same N and gamma setting")
    run = config.sections["run"]
    if run.get("sweep_methods", ("all",)) != ("all",):
        methods = [Method(m) for m in run["sweep_methods"]]
    else:
        junction = geometry.discretize(lc["N"], _gamma_policy(lc))
        methods = [m for m in applicable_methods(junction, geometry)
                   if m is not Method.ORACLE_SYLVESTER]
    return analysis.SweepSpec(
        parameter=run["sweep_parameter"],
        values=run["sweep_values"],
        methods=methods,
        geometry=geometry,
        n_modes=lc["N"],
        gamma_policy=_gamma_policy(lc),
        fermi=build_fermi(config),
        config=build_quadrature(config),
    )


def cmd_sweep(config: RunConfig, out=None, jobs: int = 1) -> int:
    """Stream one CSV row per (sweep value, method)."""
    spec = _sweep_spec(config)
    spec.validate()
    code = EXIT_OK
    with _output(out) as fh:
        fh.writelines(_echo_lines(config))
        fh.write(CSV_HEADER + "\n")
        for row in analysis.iter_sweep(spec, jobs):
            for m in spec.methods:
                err = row.errors.get(m)
                if err is not None:
                    code = EXIT_NUMERIC
                fh.write(_result_row(spec.parameter.value, row.value, m, row.results.get(m), err))
            fh.flush()
    return code


_RULES = {
    "constant": analysis.ConstantGamma,
    "over_n": analysis.GammaOverN,
    "spacing": analysis.SpacingGamma,
}


def cmd_converge(config: RunConfig, out=None, jobs: int = 1) -> int:
    """Landauer convergence table, one CSV row per reservoir size."""
    geometry = build_geometry(config)
    if geometry is None:
        raise UsageError("convergence runs need chain leads (N, t_hop, v0) on both sides")
    run = config.sections["run"]
    rule = _RULES[run["converge_gamma_rule"]](run["converge_gamma_c"])
    rows = analysis.landauer_convergence_report(
        geometry, build_fermi(config), run["converge_N"], rule, build_quadrature(config), jobs
    )
    code = EXIT_OK
    with _output(out) as fh:
        fh.writelines(_echo_lines(config))
        fh.write(CONVERGE_HEADER + "\n")
        for r in rows:
            if r.error is not None:
                code = EXIT_NUMERIC
            fh.write(",".join([
                str(r.N), _fmt(r.gamma), _fmt(r.spacing_over_gamma), _fmt(r.dlvn),
                _fmt(r.nonmarkovian), _fmt(r.landauer), _fmt(r.dlvn_abs_err),
                _fmt(r.dlvn_rel_err), _fmt(r.nonmarkovian_abs_err),
                _fmt(r.nonmarkovian_rel_err), _csv_field(r.error),
            ]) + "\n")
    return code


# --- entry point ----------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relaxjunction",
        description="Steady-state currents through junctions with finite relaxed reservoirs.",
        epilog="configuration keys:\n" + describe_keys(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("current", "single-point currents, one CSV row per method"),
        ("validate", "identity residuals and oracle cross-check"),
        ("sweep", "parameter sweep over gamma, reservoir size or bias"),
        ("converge", "convergence towards the semi-infinite Landauer current"),
    ]:
        p = sub.add_parser(name, help=help_, epilog="configuration keys:\n" + describe_keys(),
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", required=True, metavar="PATH", help="configuration file")
        p.add_argument("--out", metavar="PATH", help="write CSV here instead of stdout")
        p.add_argument("--jobs", type=int, default=1, metavar="N", help="concurrent sweep cells")
        p.add_argument("--dump-correlations", metavar="PATH",
                       help="write the oracle correlation matrix as row,col,re,im CSV")
        p.add_argument("--seed", type=int, metavar="N",
                       help="also validate randomized junctions from this seed")
        p.add_argument("--rel-tol", type=float, metavar="TOL",
                       help="quadrature rel_tol (overrides config and $RJ_DEFAULT_TOL)")
        p.add_argument("--corrupt-hermiticity", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"ERROR usage: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        config = parse_config(text, mode=args.command)
        if args.rel_tol is not None:
            if not args.rel_tol > 0:
                raise UsageError("--rel-tol must be > 0")
            config = config.with_value("quadrature", "rel_tol", float(args.rel_tol))
        if args.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        if args.command == "current":
            return cmd_current(config, args.out, args.dump_correlations)
        if args.command == "validate":
            return cmd_validate(config, args.out, args.seed, args.dump_correlations,
                                args.corrupt_hermiticity)
        if args.command == "sweep":
            return cmd_sweep(config, args.out, args.jobs)
        return cmd_converge(config, args.out, args.jobs)
    except JunctionError as exc:
        _report(exc)
        return _exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
