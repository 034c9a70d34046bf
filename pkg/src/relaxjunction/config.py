"""
Run configuration: a flat key-value text format with bracketed sections.

Example::

    [system]
    builder = single_site
    eps0 = 0.0

    [lead_L]
    N = 32
    t_hop = 1.0
    v0 = 0.2
    gamma = 0.05

    [lead_R]
    N = 32
    t_hop = 1.0
    v0 = 0.2
    gamma = 0.05

    [fermi]
    mu_L = 0.25
    mu_R = -0.25
    T = 0.0

    [run]
    methods = pole_sum, trace_integral

``#`` starts a comment.  Unknown sections or keys are errors.  The ``[run]``
section selects exactly one mode through its keys: ``methods`` (single
point), ``sweep_parameter`` + ``sweep_values`` (sweep), ``converge_N``
(convergence report), or ``validate = true``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .errors import UsageError
from .model import Method

__all__ = [
    "ConfigParseError",
    "RunConfig",
    "SCHEMA",
    "parse_config",
    "echo_config",
    "default_rel_tol",
    "describe_keys",
]

ENV_TOL = "RJ_DEFAULT_TOL"
REQUIRED = object()


class ConfigParseError(UsageError):
    category = "parse"

    def __init__(self, message, line=None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


def _float(s):
    return float(s)


def _pos_float(s):
    v = float(s)
    if not v > 0:
        raise ValueError("must be > 0")
    return v


def _nonneg_float(s):
    v = float(s)
    if not v >= 0:
        raise ValueError("must be >= 0")
    return v


def _pos_int(s):
    v = int(s)
    if v < 1:
        raise ValueError("must be a positive integer")
    return v


def _complex(s):
    return complex(s.replace(" ", ""))


def _bool(s):
    low = s.strip().lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError("must be true or false")


def _floats(s):
    return tuple(float(x) for x in s.split(",") if x.strip())


def _pos_floats(s):
    vals = _floats(s)
    if any(not v > 0 for v in vals):
        raise ValueError("all values must be > 0")
    return vals


def _complexes(s):
    return tuple(_complex(x) for x in s.split(",") if x.strip())


def _ints(s):
    return tuple(_pos_int(x) for x in s.split(",") if x.strip())


def _methods(s):
    items = [x.strip() for x in s.split(",") if x.strip()]
    if items == ["all"]:
        return ("all",)
    return tuple(Method(x).value for x in items)


def _choice(*options):
    def parse(s):
        s = s.strip()
        if s not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return s

    return parse


_LEAD = {
    "N": (_pos_int, None, "number of chain sites (chain lead)"),
    "t_hop": (_pos_float, 1.0, "chain hopping"),
    "v0": (_complex, 0.2, "contact hopping to the system"),
    "site": (int, 0, "system site the chain attaches to"),
    "gamma": (_pos_float, None, "uniform relaxation rate"),
    "gamma_spacing": (_pos_float, None, "relaxation = factor * local level spacing"),
    "omegas": (_floats, None, "raw mode frequencies"),
    "gammas": (_pos_floats, None, "raw mode relaxation rates"),
    "couplings": (_complexes, None, "raw mode couplings to the attachment site"),
}

# section -> key -> (parser, default, help); default None means optional, no default
SCHEMA = {
    "system": {
        "builder": (_choice("single_site", "two_site"), "single_site", "junction builder"),
        "eps0": (_float, 0.0, "single-site level"),
        "eps1": (_float, 0.0, "two-site: level of the contacted site"),
        "eps2": (_float, 0.0, "two-site: level of the side site"),
        "h12": (_complex, 0.5 + 0j, "two-site: inter-site hopping"),
    },
    "lead_L": _LEAD,
    "lead_R": _LEAD,
    "fermi": {
        "mu_L": (_float, REQUIRED, "left chemical potential"),
        "mu_R": (_float, REQUIRED, "right chemical potential"),
        "T": (_nonneg_float, 0.0, "temperature"),
    },
    "quadrature": {
        "rel_tol": (_pos_float, None, "relative tolerance (default from $RJ_DEFAULT_TOL or 1e-8)"),
        "abs_tol": (_pos_float, 1e-12, "absolute tolerance"),
        "window_pad": (_nonneg_float, 40.0, "window padding in units of max gamma"),
        "max_panels": (_pos_int, 20000, "panel budget"),
        "split_at_poles": (_bool, True, "start panels at every reservoir pole"),
    },
    "run": {
        "methods": (_methods, None, "single point: comma list of methods or 'all'"),
        "sweep_parameter": (_choice("gamma", "reservoir_size", "bias"), None, "sweep parameter"),
        "sweep_values": (_floats, None, "sweep values"),
        "sweep_methods": (_methods, None, "sweep: comma list of methods (default: applicable)"),
        "converge_N": (_ints, None, "convergence: increasing reservoir sizes"),
        "converge_gamma_rule": (_choice("constant", "over_n", "spacing"), "over_n",
                                "convergence: gamma(N) rule"),
        "converge_gamma_c": (_pos_float, 8.0, "convergence: gamma rule constant"),
        "validate": (_bool, None, "validation suite"),
    },
}

_MODE_KEYS = {
    "current": ("methods",),
    "sweep": ("sweep_parameter", "sweep_values", "sweep_methods"),
    "converge": ("converge_N", "converge_gamma_rule", "converge_gamma_c"),
    "validate": ("validate",),
}
# keys whose mere presence selects a mode (defaults do not count)
_MODE_TRIGGERS = {
    "current": ("methods",),
    "sweep": ("sweep_parameter", "sweep_values"),
    "converge": ("converge_N",),
    "validate": ("validate",),
}
_SECTION_ORDER = ("system", "lead_L", "lead_R", "fermi", "quadrature", "run")


def default_rel_tol() -> float:
    raw = os.environ.get(ENV_TOL)
    if raw is None or not raw.strip():
        return 1e-8
    try:
        return _pos_float(raw)
    except ValueError:
        raise UsageError(f"{ENV_TOL}={raw!r} is not a positive number") from None


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration: one dict of typed values per section plus the mode."""

    sections: dict = field(default_factory=dict)
    mode: str = "current"

    def get(self, section, key, default=None):
        return self.sections.get(section, {}).get(key, default)

    def with_value(self, section, key, value) -> "RunConfig":
        secs = {k: dict(v) for k, v in self.sections.items()}
        secs.setdefault(section, {})[key] = value
        return RunConfig(secs, self.mode)


def _check_lead(name, values, lines):
    chain = "N" in values
    raw = any(k in values for k in ("omegas", "gammas", "couplings"))
    where = lines.get(name)
    if chain and raw:
        raise ConfigParseError(f"[{name}] mixes chain keys (N) with raw mode lists", where)
    if not chain and not raw:
        raise ConfigParseError(f"[{name}] needs either N (chain lead) or omegas/gammas/couplings", where)
    if chain:
        if ("gamma" in values) == ("gamma_spacing" in values):
            raise ConfigParseError(f"[{name}] needs exactly one of gamma, gamma_spacing", where)
        for k in ("omegas", "gammas", "couplings"):
            values.pop(k, None)
    else:
        for k in ("omegas", "gammas", "couplings"):
            if k not in values:
                raise ConfigParseError(f"[{name}] missing required key '{k}'", where)
        n = len(values["omegas"])
        if n == 0 or len(values["gammas"]) != n or len(values["couplings"]) != n:
            raise ConfigParseError(f"[{name}] omegas, gammas, couplings must have equal nonzero length", where)
        for k in ("N", "t_hop", "v0", "gamma", "gamma_spacing"):
            values.pop(k, None)


def parse_config(text: str, mode: str | None = None) -> RunConfig:
    """Parse and validate configuration text.

    Parameters
    ----------
    text : str
    mode : str, optional
        Mode requested by the caller (the CLI subcommand).  It must agree
        with the mode selected by the ``[run]`` keys, and selects the mode
        when the file names none.

    Raises
    ------
    ConfigParseError
        Unknown section or key, duplicate or missing key, or a bad value;
        the message carries the line number.
    UsageError
        Keys from more than one run mode, or a mode that disagrees with
        ``mode``.
    """
    raw: dict = {}
    key_lines: dict = {}
    section_lines: dict = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigParseError(f"malformed section header {stripped!r}", lineno)
            section = stripped[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigParseError(f"unknown section [{section}]", lineno)
            if section in raw:
                raise ConfigParseError(f"duplicate section [{section}]", lineno)
            raw[section] = {}
            section_lines[section] = lineno
            continue
        if "=" not in stripped:
            raise ConfigParseError(f"expected 'key = value', got {stripped!r}", lineno)
        if section is None:
            raise ConfigParseError("key outside of any section", lineno)
        key, value = (s.strip() for s in stripped.split("=", 1))
        if key not in SCHEMA[section]:
            raise ConfigParseError(f"unknown key '{key}' in [{section}]", lineno)
        if key in raw[section]:
            raise ConfigParseError(f"duplicate key '{key}' in [{section}]", lineno)
        parser = SCHEMA[section][key][0]
        try:
            raw[section][key] = parser(value)
        except ValueError as exc:
            raise ConfigParseError(f"bad value for '{key}' in [{section}]: {exc}", lineno) from None
        key_lines[(section, key)] = lineno

    for required in ("lead_L", "lead_R", "fermi"):
        if required not in raw:
            raise ConfigParseError(f"missing required section [{required}]")

    sections = {}
    for name in _SECTION_ORDER:
        given = raw.get(name, {})
        values = {}
        for key, (_, default, _) in SCHEMA[name].items():
            if key in given:
                values[key] = given[key]
            elif default is REQUIRED:
                raise ConfigParseError(
                    f"missing required key '{key}' in [{name}]", section_lines.get(name)
                )
            elif default is not None and not (name == "run" and key.startswith("converge_")):
                values[key] = default
        if name.startswith("lead_"):
            _check_lead(name, values, section_lines)
        sections[name] = values

    quad = sections["quadrature"]
    quad.setdefault("rel_tol", default_rel_tol())

    run = raw.get("run", {})
    selected = [m for m, keys in _MODE_TRIGGERS.items() if any(k in run for k in keys)]
    if len(selected) > 1:
        raise UsageError(f"config selects more than one run mode: {', '.join(selected)}")
    file_mode = selected[0] if selected else None
    if mode is not None and file_mode is not None and mode != file_mode:
        raise UsageError(f"config selects mode '{file_mode}' but '{mode}' was requested")
    final = file_mode or mode or "current"
    run_values = {k: v for k, v in sections["run"].items() if k in _MODE_KEYS[final]}
    if final == "converge":
        for k in ("converge_gamma_rule", "converge_gamma_c"):
            run_values.setdefault(k, SCHEMA["run"][k][1])
        if "converge_N" not in run_values:
            raise UsageError("convergence mode needs converge_N")
    if final == "sweep" and not all(k in run_values for k in ("sweep_parameter", "sweep_values")):
        raise UsageError("sweep mode needs both sweep_parameter and sweep_values")
    if final == "current":
        run_values.setdefault("methods", ("all",))
    if final == "validate":
        run_values["validate"] = True
    sections["run"] = run_values
    return RunConfig(sections, final)


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, complex):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    return str(value)


def echo_config(config: RunConfig) -> str:
    """Canonical text for ``config``; ``parse_config(echo_config(c)) == c``."""
    out = []
    for name in _SECTION_ORDER:
        values = config.sections.get(name, {})
        out.append(f"[{name}]")
        for key in SCHEMA[name]:
            if key in values:
                out.append(f"{key} = {_format(values[key])}")
        out.append("")
    return "\n".join(out)


def describe_keys() -> str:
    lines = []
    for name in _SECTION_ORDER:
        lines.append(f"[{name}]")
        for key, (_, default, help_) in SCHEMA[name].items():
            if default is REQUIRED:
                d = "required"
            elif default is None:
                d = "optional"
            else:
                d = f"default {_format(default)}"
            lines.append(f"  {key:20s} {help_} ({d})")
    return "\n".join(lines)
