"""Run configuration: a small key/value text format.

Grammar, one statement per line::

    # comment (also allowed after a value)
    [section]            # optional; prefixes the keys that follow
    key = value          # dotted keys allowed: kernel.s = 0.5
    list.key = 1, 2, 3   # comma-separated lists

Keys are validated against ``SCHEMA``; every error names the file, line and key.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .field import FieldKind, FieldSpec


class ConfigError(ValueError):
    pass


def _floats(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text):
    return [int(t) for t in text.split(",") if t.strip()]


def _start(text):
    text = text.strip()
    return "auto" if text == "auto" else int(text)


def _choice(*options):
    def parse(text):
        text = text.strip()
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    return parse


FORMATS = ("points-csv", "trajectory-csv", "report-json")


def _formats(text):
    vals = [t.strip() for t in text.split(",") if t.strip()]
    bad = [v for v in vals if v not in FORMATS]
    if bad:
        raise ValueError(f"unknown format(s) {bad}; expected a subset of {FORMATS}")
    return tuple(vals)


# key -> (parser, default); a default of REQUIRED marks a mandatory key
REQUIRED = object()
SCHEMA = {
    "kernel.s": (float, REQUIRED),
    "field.kind": (_choice(*(k.value for k in FieldKind)), "zero"),
    "field.lambda1": (float, None),
    "field.lambda2": (float, None),
    "field.exponent": (float, None),
    "field.coefficient": (float, None),
    "conductor.kind": (_choice("interval", "box", "ball", "sphere", "file"), REQUIRED),
    "conductor.a": (float, -1.0),
    "conductor.b": (float, 1.0),
    "conductor.M": (int, None),
    "conductor.lower": (_floats, None),
    "conductor.upper": (_floats, None),
    "conductor.radius": (float, None),
    "conductor.radius_factor": (float, 1.5),
    "conductor.dimension": (int, 3),
    "conductor.path": (str, None),
    "run.N": (int, REQUIRED),
    "run.m": (int, 1),
    "run.start": (_start, "auto"),
    "run.method": (_choice("greedy", "optimal"), "greedy"),
    "run.strategy": (_choice("exhaustive", "alternating"), "exhaustive"),
    "run.restarts": (int, 8),
    "analysis.reference": (_choice("none", "riesz", "jacobi", "radial", "discrete"), "none"),
    "analysis.ladder": (_ints, [101, 201, 401]),
    "analysis.solver_M": (int, None),
    "analysis.tol": (float, 1e-7),
    "analysis.cells": (int, 4),
    "output.dir": (str, "out"),
    "output.formats": (_formats, FORMATS),
    "seed": (int, 0),
}


@dataclass
class RunConfig:
    values: dict
    lines: dict = field(default_factory=dict)
    source: str = "<config>"

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)

    def where(self, key) -> str:
        line = self.lines.get(key)
        return f"{self.source}:{line}" if line else self.source

    def error(self, key, msg) -> ConfigError:
        return ConfigError(f"{self.where(key)}: {key}: {msg}")

    def field_spec(self, dimension: int) -> FieldSpec:
        kind = FieldKind(self["field.kind"])
        try:
            if kind is FieldKind.JACOBI_LOG_WEIGHT:
                return FieldSpec.jacobi(self["field.lambda1"], self["field.lambda2"])
            if kind is FieldKind.RADIAL_POWER:
                coef = self["field.coefficient"]
                return FieldSpec.radial_power(self["field.exponent"],
                                              1.0 if coef is None else coef, dimension)
            return FieldSpec(kind, dimension)
        except (TypeError, ValueError) as exc:
            raise self.error("field.kind", str(exc)) from None


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    values, lines = {}, {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (t.strip() for t in line.split("=", 1))
        if section:
            key = f"{section}.{key}"
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in lines:
            raise ConfigError(f"{source}:{lineno}: {key} already set on line {lines[key]}")
        parser, _ = SCHEMA[key]
        try:
            values[key] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: {key}: invalid value {value!r} ({exc})") \
                from None
        lines[key] = lineno
    for key, (_, default) in SCHEMA.items():
        if key not in values:
            if default is REQUIRED:
                raise ConfigError(f"{source}: missing required key {key!r}")
            values[key] = list(default) if isinstance(default, list) else default
    cfg = RunConfig(values, lines, source)
    _check(cfg)
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(), str(path))


def _check(cfg: RunConfig):
    if cfg["kernel.s"] < 0:
        raise cfg.error("kernel.s", "must be >= 0")
    if cfg["run.N"] < 1:
        raise cfg.error("run.N", "must be >= 1")
    m = cfg["run.m"]
    if m < 1:
        raise cfg.error("run.m", "must be >= 1")
    if cfg["run.N"] % m:
        raise cfg.error("run.N", f"must be a multiple of run.m = {m}")
    if cfg["run.method"] == "optimal" and m != 1:
        raise cfg.error("run.method", "optimal configurations ignore blocks; set run.m = 1")
    kind = cfg["conductor.kind"]
    if kind in ("interval", "box", "sphere") and cfg["conductor.M"] is None:
        raise cfg.error("conductor.kind", f"{kind} conductor needs conductor.M")
    if kind == "box" and (cfg["conductor.lower"] is None or cfg["conductor.upper"] is None):
        raise cfg.error("conductor.kind", "box conductor needs conductor.lower and conductor.upper")
    if kind == "ball":
        if cfg["conductor.M"] is None:
            raise cfg.error("conductor.kind", "ball conductor needs conductor.M")
        if cfg["conductor.radius"] is None and cfg["analysis.reference"] != "radial":
            raise cfg.error("conductor.kind", "ball conductor needs conductor.radius "
                            "unless analysis.reference = radial")
    if kind == "file" and not cfg["conductor.path"]:
        raise cfg.error("conductor.kind", "file conductor needs conductor.path")
    fk = cfg["field.kind"]
    if fk == "jacobi" and (cfg["field.lambda1"] is None or cfg["field.lambda2"] is None):
        raise cfg.error("field.kind", "jacobi field needs field.lambda1 and field.lambda2")
    if fk == "radial_power" and cfg["field.exponent"] is None:
        raise cfg.error("field.kind", "radial_power field needs field.exponent")
    ref = cfg["analysis.reference"]
    if ref == "riesz" and (fk != "zero" or not 0 <= cfg["kernel.s"] < 1):
        raise cfg.error("analysis.reference", "riesz reference needs field.kind = zero "
                        "and 0 <= kernel.s < 1")
    if ref == "jacobi" and (fk != "jacobi" or cfg["kernel.s"] != 0):
        raise cfg.error("analysis.reference", "jacobi reference needs field.kind = jacobi "
                        "and kernel.s = 0")
    if ref in ("riesz", "jacobi") and kind != "interval":
        raise cfg.error("analysis.reference", f"{ref} reference needs an interval conductor")
    if ref == "radial" and kind != "ball":
        raise cfg.error("analysis.reference", "radial reference needs a ball conductor")
    if cfg["run.strategy"] == "alternating" and m < 2:
        raise cfg.error("run.strategy", "alternating strategy applies to run.m >= 2")
