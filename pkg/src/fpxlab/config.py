"""Sectioned key=value run configuration.

The format is flat text with ``[section]`` headers and ``key = value``
lines; ``#`` starts a comment.  Parsing validates eagerly and aggregates
every problem into one :class:`ConfigError` so a bad file reports all its
defects at once.  ``serialize`` emits the normalized form (sorted sections
and keys, 17-significant-digit floats); parse(serialize(c)) == c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .solve import SolveConfig

__all__ = ["RunConfig", "DiagnosticsSpec", "ConfigError", "parse_config", "parse_text", "serialize"]


class ConfigError(ValueError):
    """Aggregated configuration problems; ``problems`` lists {field, message}."""

    def __init__(self, problems):
        self.problems = list(problems)
        lines = "; ".join(f"{p['field']}: {p['message']}" for p in self.problems)
        super().__init__(f"invalid configuration: {lines}")


@dataclass
class DiagnosticsSpec:
    center: tuple = (0.0,)
    radius: float = 0.5
    inner_factor: float = 0.5
    levels: str = "quartiles"
    dyadic_levels: int = 3
    scales: tuple = (1e-1, 1e-2, 1e-3, 1e-4)
    gamma: float = 0.25
    delta: str = "auto"


@dataclass
class RunConfig:
    solve: SolveConfig
    diagnostics: DiagnosticsSpec
    seed: int = 0


_GRID_KEYS = {"dim", "center", "halfwidth", "r_trunc", "nodes_per_axis"}
_FIELD_KEYS = {"preset", "value", "table"}
_PROBLEM_KEYS = {"s", "sigma", "q", "exterior", "grad_tol", "max_iter", "step0", "backtrack", "seed"}
_DIAG_KEYS = {"center", "radius", "inner_factor", "levels", "dyadic_levels", "scales", "gamma", "delta"}
_SECTIONS = {"grid": _GRID_KEYS, "field": _FIELD_KEYS, "problem": _PROBLEM_KEYS, "diagnostics": _DIAG_KEYS}


def _read_sections(text: str, problems: list) -> dict:
    sections: dict = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in _SECTIONS:
                problems.append({"field": current, "message": f"unknown section (line {lineno})"})
                sections.setdefault(current, {})
                continue
            sections.setdefault(current, {})
            continue
        if "=" not in line or current is None:
            problems.append({"field": f"line {lineno}", "message": f"expected key = value inside a section, got {raw!r}"})
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        known = _SECTIONS.get(current)
        if known is not None and key not in known:
            problems.append({"field": f"{current}.{key}", "message": "unknown key"})
            continue
        sections[current][key] = value
    return sections


def _get(sections, section, key, cast, default, problems, check=None, describe=""):
    raw = sections.get(section, {}).get(key)
    if raw is None:
        value = default
    else:
        try:
            value = cast(raw)
        except (TypeError, ValueError):
            problems.append({"field": f"{section}.{key}", "message": f"cannot parse {raw!r}"})
            return default
    if check is not None and value is not None and not check(value):
        problems.append({"field": f"{section}.{key}", "message": describe or "out of range"})
    return value


def _floats(raw) -> tuple:
    return tuple(float(part) for part in str(raw).split(","))


def parse_text(text: str) -> RunConfig:
    problems: list = []
    sections = _read_sections(text, problems)

    dim = _get(sections, "grid", "dim", int, 1, problems, lambda v: v in (1, 2), "dim must be 1 or 2")
    center = _get(sections, "grid", "center", _floats, (0.0,) * dim, problems,
                  lambda v: len(v) == dim, "one entry per axis")
    halfwidth = _get(sections, "grid", "halfwidth", _floats, (1.0,) * dim, problems,
                     lambda v: len(v) == dim and all(x > 0 for x in v), "positive, one entry per axis")
    r_trunc = _get(sections, "grid", "r_trunc", float, 4.0, problems, lambda v: v > 0, "must be positive")
    nodes = _get(sections, "grid", "nodes_per_axis", int, 201, problems,
                 lambda v: v >= 9 and v % 2 == 1, "must be odd and >= 9")
    if not problems and r_trunc <= math.sqrt(sum(x**2 for x in halfwidth)):
        problems.append({"field": "grid.r_trunc", "message": "must exceed the domain circumradius"})

    preset = _get(sections, "field", "preset", str, "constant", problems,
                  lambda v: v in ("constant", "radial", "product", "tabulated"), "unknown preset")
    value = _get(sections, "field", "value", float, 2.0, problems, lambda v: v > 1, "must exceed 1")
    table = _get(sections, "field", "table", str, None, problems)
    if preset == "tabulated" and table is None:
        problems.append({"field": "field.table", "message": "required for the tabulated preset"})

    s = _get(sections, "problem", "s", float, 0.5, problems, lambda v: 0 < v < 1, "must lie in (0, 1)")
    sigma = _get(sections, "problem", "sigma", float, 0.25, problems, lambda v: 0 < v, "must be positive")
    if sigma is not None and s is not None and not sigma < s:
        problems.append({"field": "problem.sigma", "message": "must be smaller than s"})
    q = _get(sections, "problem", "q", float, 1.25, problems, lambda v: v >= 1, "must be >= 1")
    exterior = _get(sections, "problem", "exterior", str, "constant:0", problems)
    grad_tol = _get(sections, "problem", "grad_tol", float, 1e-8, problems, lambda v: v > 0, "must be positive")
    max_iter = _get(sections, "problem", "max_iter", int, 50_000, problems, lambda v: v >= 1, "must be >= 1")
    step0 = _get(sections, "problem", "step0", float, 1.0, problems, lambda v: v > 0, "must be positive")
    backtrack = _get(sections, "problem", "backtrack", float, 0.5, problems,
                     lambda v: 0 < v < 1, "must lie in (0, 1)")
    seed = _get(sections, "problem", "seed", int, 0, problems, lambda v: v >= 0, "must be nonnegative")

    diag_center = _get(sections, "diagnostics", "center", _floats, (0.0,) * dim, problems,
                       lambda v: len(v) == dim, "one entry per axis")
    radius = _get(sections, "diagnostics", "radius", float, 0.5, problems, lambda v: v > 0, "must be positive")
    inner_factor = _get(sections, "diagnostics", "inner_factor", float, 0.5, problems,
                        lambda v: 0 < v < 1, "must lie in (0, 1)")
    levels = _get(sections, "diagnostics", "levels", str, "quartiles", problems)
    if levels != "quartiles":
        try:
            _floats(levels)
        except ValueError:
            problems.append({"field": "diagnostics.levels", "message": "quartiles or a comma list of numbers"})
    dyadic = _get(sections, "diagnostics", "dyadic_levels", int, 3, problems, lambda v: v >= 3, "must be >= 3")
    scales = _get(sections, "diagnostics", "scales", _floats, (1e-1, 1e-2, 1e-3, 1e-4), problems,
                  lambda v: len(v) >= 2 and all(0 < x < 1 for x in v), "need >= 2 scales in (0, 1)")
    gamma = _get(sections, "diagnostics", "gamma", float, 0.25, problems,
                 lambda v: 0 < v < 1, "must lie in (0, 1)")
    delta = _get(sections, "diagnostics", "delta", str, "auto", problems)
    if delta != "auto":
        try:
            dv = float(delta)
            if not 0 < dv <= 0.125:
                problems.append({"field": "diagnostics.delta", "message": "must lie in (0, 1/8] or be auto"})
        except ValueError:
            problems.append({"field": "diagnostics.delta", "message": "must be a number or auto"})

    if problems:
        raise ConfigError(problems)

    field_params = {}
    if preset == "constant":
        field_params["value"] = value
    if preset == "tabulated":
        field_params["table"] = table
    solve = SolveConfig(
        s=s, sigma=sigma, q=q, dim=dim, center=center, halfwidths=halfwidth,
        r_trunc=r_trunc, nodes_per_axis=nodes, field_kind=preset,
        field_params=field_params, exterior=exterior, grad_tol=grad_tol,
        max_iter=max_iter, step0=step0, backtrack=backtrack, seed=seed,
    )
    diagnostics = DiagnosticsSpec(
        center=diag_center, radius=radius, inner_factor=inner_factor, levels=levels,
        dyadic_levels=dyadic, scales=scales, gamma=gamma, delta=delta,
    )
    return RunConfig(solve=solve, diagnostics=diagnostics, seed=seed)


def parse_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_text(fh.read())


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def serialize(config: RunConfig) -> str:
    """Emit the normalized sectioned form of a configuration."""
    sv = config.solve
    dg = config.diagnostics
    sections = {
        "grid": {
            "dim": sv.dim, "center": tuple(sv.center), "halfwidth": tuple(sv.halfwidths),
            "r_trunc": sv.r_trunc, "nodes_per_axis": sv.nodes_per_axis,
        },
        "field": {"preset": sv.field_kind},
        "problem": {
            "s": sv.s, "sigma": sv.sigma, "q": sv.q, "exterior": sv.exterior,
            "grad_tol": sv.grad_tol, "max_iter": sv.max_iter, "step0": sv.step0,
            "backtrack": sv.backtrack, "seed": sv.seed,
        },
        "diagnostics": {
            "center": tuple(dg.center), "radius": dg.radius, "inner_factor": dg.inner_factor,
            "levels": dg.levels, "dyadic_levels": dg.dyadic_levels,
            "scales": tuple(dg.scales), "gamma": dg.gamma, "delta": dg.delta,
        },
    }
    if sv.field_kind == "constant":
        sections["field"]["value"] = sv.field_params.get("value", 2.0)
    if sv.field_kind == "tabulated":
        sections["field"]["table"] = sv.field_params.get("table", "")
    out = []
    for name in sorted(sections):
        out.append(f"[{name}]")
        for key in sorted(sections[name]):
            out.append(f"{key} = {_fmt(sections[name][key])}")
        out.append("")
    return "\n".join(out)
