"""System definition files.

The format is sectioned plain text, one `key = "value"` pair per line:

    # free particle on the plane
    [system]
    name = "free"
    dim = "2"
    lagrangian = "0.5*(v1^2+v2^2)"

    [constants]
    m = "1.0"

    [atlas]
    type = "rn"            # or "circle" (dim 1)

    [gauge]
    chi = "sin(x1)*cos(x2)"

Multi-chart Lagrangians use `lagrangian_<chart> = "..."` keys in
[system].  The circle atlas takes `gauge`, `winding` and an optional
`gauge_10` override in [atlas]; the override replaces the reverse
cochain on the shared-coordinate overlap component, which is how a
config can describe an inconsistent atlas (validation then fails with
the measured defect).  Optional sections: [forcing] with keys f1..fn,
and [curve] with either `t0`/`t1`/`exprs` for one segment or
`segment_1 = "chart : t0 : t1 : e1; e2; ..."` lines for a schedule.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from . import exprlang
from .dynamics import GaugeClassLagrangian
from .errors import ConfigSyntaxError, ExprSyntaxError, ValidationError
from .geometry import CurveSegment, CurveSpec, circle_atlas, euclidean_atlas
from .systems import System, chi_set

_SECTION_RE = re.compile(r"^\s*\[([A-Za-z_][\w-]*)\]\s*$")
_PAIR_RE = re.compile(r"^\s*([A-Za-z_]\w*)\s*=\s*\"([^\"]*)\"\s*$")
_KNOWN_SECTIONS = {"system", "constants", "atlas", "gauge", "forcing", "curve"}


@dataclass
class SystemConfig:
    """Parsed and validated system definition."""

    path: str
    sections: dict  # section -> {key: raw string value}
    system: System = field(repr=False, default=None)


def _strip_comment(line: str) -> str:
    # comments start at a '#' that is not inside the quoted value
    in_quote = False
    for i, ch in enumerate(line):
        if ch == '"':
            in_quote = not in_quote
        elif ch == "#" and not in_quote:
            return line[:i]
    return line


def _parse_lines(text: str, path: str) -> dict:
    sections = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        m = _SECTION_RE.match(line)
        if m:
            name = m.group(1)
            if name not in _KNOWN_SECTIONS:
                raise ConfigSyntaxError(
                    f"{path}: unknown section [{name}]", lineno, line.index("[") + 1
                )
            current = sections.setdefault(name, {})
            continue
        m = _PAIR_RE.match(line)
        if m:
            if current is None:
                raise ConfigSyntaxError(
                    f"{path}: key outside any [section]", lineno, 1
                )
            key = m.group(1)
            if key in current:
                raise ConfigSyntaxError(f"{path}: duplicate key '{key}'", lineno, 1)
            current[key] = m.group(2)
            continue
        col = len(line) - len(line.lstrip()) + 1
        raise ConfigSyntaxError(
            f"{path}: expected [section] or key = \"value\"", lineno, col
        )
    return sections


def _parse_expr(text: str, where: str):
    try:
        return exprlang.parse(text)
    except ExprSyntaxError as e:
        raise ConfigSyntaxError(f"bad expression in {where}: {e}", 0, e.offset + 1) from e


def _check_free_vars(ast, allowed, where: str):
    extra = sorted(exprlang.free_variables(ast) - allowed)
    if extra:
        raise ValidationError(
            "expression variables", f"unbound variable '{extra[0]}' in {where}", float("inf")
        )


def split_top_level(text: str, seps=(";", ",")):
    """Split on separators at parenthesis depth zero (so 'pow(a,b)'
    survives comma-separated coordinate lists)."""
    parts, depth, start = [], 0, 0
    sep = ";" if ";" in text else seps[-1]
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == sep and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return [p.strip() for p in parts]


def _float(sections_value: str, where: str) -> float:
    try:
        return float(sections_value)
    except ValueError:
        raise ValidationError("numeric value", f"{where} = \"{sections_value}\"", float("inf"))


def _build_atlas(atlas_sec: dict, dim: int):
    kind = atlas_sec.get("type", "rn")
    if kind == "rn":
        half = _float(atlas_sec.get("half_width", "1e6"), "atlas.half_width")
        return euclidean_atlas(dim, half)
    if kind == "circle":
        if dim != 1:
            raise ValidationError("atlas dimension", "circle atlas needs dim = 1", float(dim))
        return circle_atlas(
            atlas_sec.get("gauge", "0"),
            winding=_float(atlas_sec.get("winding", "0"), "atlas.winding"),
            gauge_reverse_a=atlas_sec.get("gauge_10"),
            validate=True,
        )
    raise ValidationError("atlas type", f"unknown atlas type '{kind}'", float("inf"))


def _build_curve(curve_sec: dict, constants: dict) -> CurveSpec:
    seg_keys = sorted(k for k in curve_sec if k.startswith("segment"))
    if seg_keys:
        segments = []
        for key in seg_keys:
            fields = [p.strip() for p in curve_sec[key].split(":")]
            if len(fields) != 4:
                raise ValidationError(
                    "curve segment", f"{key} needs 'chart : t0 : t1 : exprs'", float("inf")
                )
            chart, t0, t1, exprs = fields
            parsed = []
            for e in split_top_level(exprs):
                ast = exprlang.substitute_constants(_parse_expr(e, key), constants)
                _check_free_vars(ast, {"t"}, key)
                parsed.append(ast)
            segments.append(
                CurveSegment(_float(t0, key), _float(t1, key), chart, tuple(parsed))
            )
        return CurveSpec(tuple(segments))
    parsed = []
    for e in split_top_level(curve_sec["exprs"]):
        ast = exprlang.substitute_constants(_parse_expr(e, "curve.exprs"), constants)
        _check_free_vars(ast, {"t"}, "curve.exprs")
        parsed.append(ast)
    return CurveSpec(
        (
            CurveSegment(
                _float(curve_sec.get("t0", "0"), "curve.t0"),
                _float(curve_sec.get("t1", "1"), "curve.t1"),
                curve_sec.get("chart", "0"),
                tuple(parsed),
            ),
        )
    )


def load_config(path: str) -> SystemConfig:
    """Parse and validate a system definition file."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    sections = _parse_lines(text, path)

    system_sec = sections.get("system")
    if not system_sec:
        raise ConfigSyntaxError(f"{path}: missing [system] section", 0, 1)
    try:
        dim = int(system_sec.get("dim", ""))
    except ValueError:
        raise ValidationError("system dimension", "system.dim must be an integer", float("inf"))
    if dim < 1:
        raise ValidationError("system dimension", "system.dim must be positive", float(dim))

    constants = {
        k: _float(v, f"constants.{k}") for k, v in sections.get("constants", {}).items()
    }

    atlas = _build_atlas(sections.get("atlas", {}), dim)
    chart_ids = {c.id for c in atlas.charts}

    coords = {f"x{j}" for j in range(1, dim + 1)}
    vels = {f"v{j}" for j in range(1, dim + 1)}

    lag_exprs = {}
    if "lagrangian" in system_sec:
        ast = _parse_expr(system_sec["lagrangian"], "system.lagrangian")
        ast = exprlang.substitute_constants(ast, constants)
        _check_free_vars(ast, coords | vels, "system.lagrangian")
        lag_exprs = {cid: ast for cid in chart_ids}
    for key, value in system_sec.items():
        if not key.startswith("lagrangian_"):
            continue
        cid = key[len("lagrangian_"):]
        if cid not in chart_ids:
            raise ValidationError("lagrangian chart", f"no chart '{cid}' for {key}", float("inf"))
        ast = exprlang.substitute_constants(_parse_expr(value, key), constants)
        _check_free_vars(ast, coords | vels, key)
        lag_exprs[cid] = ast
    if set(lag_exprs) != chart_ids:
        missing = sorted(chart_ids - set(lag_exprs))
        raise ValidationError(
            "lagrangian coverage", f"no Lagrangian for chart '{missing[0]}'", float("inf")
        )
    lam = GaugeClassLagrangian(atlas, lag_exprs)
    if atlas.transitions:
        lam.validate()

    chis = []
    for value in sections.get("gauge", {}).values():
        ast = exprlang.substitute_constants(_parse_expr(value, "gauge"), constants)
        _check_free_vars(ast, coords, "gauge")
        chis.append(value)

    forcing = None
    forcing_sec = sections.get("forcing")
    if forcing_sec:
        comps = []
        for j in range(1, dim + 1):
            e = forcing_sec.get(f"f{j}", "0")
            ast = exprlang.substitute_constants(_parse_expr(e, f"forcing.f{j}"), constants)
            _check_free_vars(ast, coords | vels, f"forcing.f{j}")
            comps.append(ast)
        forcing = tuple(comps)

    curve = None
    if "curve" in sections:
        curve = _build_curve(sections["curve"], constants)
        curve.validate(atlas)

    system = System(
        name=system_sec.get("name", "config"),
        atlas=atlas,
        lagrangian=lam,
        constants=constants,
        curve=curve,
        chis=tuple(chis) or tuple(chi_set(dim) if not atlas.transitions else ()),
        forcing=forcing,
        v_halfwidth=_float(system_sec.get("v_halfwidth", "1.0"), "system.v_halfwidth"),
        description=system_sec.get("description", ""),
    )
    return SystemConfig(path=path, sections=sections, system=system)
