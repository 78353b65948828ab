"""Flat ``key = value`` experiment configuration files.

One assignment per line, ``#`` starts a comment. Keys are checked against the
schema of the chosen preset; unknown or repeated keys are errors. Keys of the
form ``assert_<metric>_min`` / ``assert_<metric>_max`` declare pass/fail
thresholds on a measured metric of the preset.
"""

from __future__ import annotations

import ast
import math
import operator
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

_KEY_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_ASSERT_RE = re.compile(r"^assert_(?P<metric>[A-Za-z0-9_]+)_(?P<op>min|max)$")


class ConfigError(ValueError):
    """Invalid configuration; carries the offending key and line when known."""

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.key = key
        self.line = line


# --- value parsers ---------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_NAMES = {"pi": math.pi, "e": math.e}


def _eval_real(node):
    if isinstance(node, ast.Expression):
        return _eval_real(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_real(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_real(node.left), _eval_real(node.right))
    raise ValueError("not a real-number expression")


def parse_real(text: str) -> float:
    """A float literal or arithmetic in ``pi`` and ``e``, e.g. ``3*pi/2``."""
    try:
        v = _eval_real(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot read {text!r} as a real number") from exc
    if not math.isfinite(v):
        raise ValueError(f"{text!r} is not finite")
    return v


def parse_int(text: str) -> int:
    t = text.strip().replace("_", "")
    m = re.fullmatch(r"([+-]?\d+)(?:e(\d+))?", t, flags=re.IGNORECASE)
    if m is None:
        raise ValueError(f"cannot read {text!r} as an integer")
    return int(m.group(1)) * 10 ** int(m.group(2) or 0)


def parse_complex(text: str) -> complex:
    try:
        return complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ValueError(f"cannot read {text!r} as a complex number") from exc


def _list_of(parse):
    def parser(text):
        items = [t for t in text.split(",") if t.strip()]
        if not items:
            raise ValueError("empty list")
        return tuple(parse(t) for t in items)

    return parser


def parse_str(text: str) -> str:
    return text.strip()


PARSERS: dict[str, Callable[[str], Any]] = {
    "int": parse_int,
    "real": parse_real,
    "str": parse_str,
    "complex": parse_complex,
    "reals": _list_of(parse_real),
    "ints": _list_of(parse_int),
    "complexes": _list_of(parse_complex),
}


@dataclass(frozen=True)
class Param:
    kind: str
    default: Any
    help: str = ""
    choices: Optional[tuple] = None
    minimum: Optional[float] = None


COMMON_PARAMS: dict[str, Param] = {
    "seed": Param("int", 0, "Monte Carlo seed", minimum=0),
    "threads": Param("int", 1, "worker threads (speed only)", minimum=1),
    "output_dir": Param("str", None, "directory for CSV files and the manifest"),
}


@dataclass(frozen=True)
class Assertion:
    metric: str
    op: str  # "min" or "max"
    threshold: float
    key: str
    line: int

    def check(self, value: float) -> bool:
        if value is None or (isinstance(value, float) and math.isnan(value)):
            return False
        return value >= self.threshold if self.op == "min" else value <= self.threshold


@dataclass
class ExperimentConfig:
    preset: str
    params: dict
    assertions: list
    raw: dict = field(default_factory=dict)  # key -> (text, line)
    source: Optional[str] = None

    def echo(self) -> dict:
        out = {"preset": self.preset}
        out.update({k: _jsonable(v) for k, v in sorted(self.params.items())})
        for a in self.assertions:
            out[a.key] = a.threshold
        return out


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    return v


def read_pairs(text: str) -> list[tuple[str, str, int]]:
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (s.strip() for s in body.split("=", 1))
        if not _KEY_RE.match(key):
            raise ConfigError("malformed key", key=key, line=lineno)
        if not value:
            raise ConfigError("missing value", key=key, line=lineno)
        pairs.append((key, value, lineno))
    return pairs


def parse_config(text: str, schemas: dict, source: Optional[str] = None) -> ExperimentConfig:
    """Validate ``text`` against ``schemas[preset] = (params, metrics)``."""
    pairs = read_pairs(text)
    seen: dict[str, int] = {}
    for key, _, lineno in pairs:
        if key in seen:
            raise ConfigError(f"repeated (first set on line {seen[key]})", key=key, line=lineno)
        seen[key] = lineno
    by_key = {k: (v, ln) for k, v, ln in pairs}
    if "preset" not in by_key:
        raise ConfigError("missing required key 'preset'")
    preset, pline = by_key["preset"]
    if preset not in schemas:
        raise ConfigError(f"unknown preset {preset!r}", key="preset", line=pline)
    own, metrics = schemas[preset]
    schema = dict(COMMON_PARAMS)
    schema.update(own)
    params = {k: p.default for k, p in schema.items()}
    assertions = []
    for key, (text_value, lineno) in by_key.items():
        if key == "preset":
            continue
        m = _ASSERT_RE.match(key)
        if m is not None:
            if m.group("metric") not in metrics:
                raise ConfigError(
                    f"preset {preset!r} has no metric {m.group('metric')!r} "
                    f"(known: {', '.join(metrics)})", key=key, line=lineno)
            try:
                threshold = parse_real(text_value)
            except ValueError as exc:
                raise ConfigError(str(exc), key=key, line=lineno) from None
            assertions.append(Assertion(m.group("metric"), m.group("op"), threshold, key, lineno))
            continue
        if key not in schema:
            raise ConfigError(f"unknown key for preset {preset!r}", key=key, line=lineno)
        spec = schema[key]
        try:
            value = PARSERS[spec.kind](text_value)
        except ValueError as exc:
            raise ConfigError(str(exc), key=key, line=lineno) from None
        if spec.choices is not None and value not in spec.choices:
            raise ConfigError(f"must be one of {', '.join(map(str, spec.choices))}",
                              key=key, line=lineno)
        if spec.minimum is not None and value < spec.minimum:
            raise ConfigError(f"must be >= {spec.minimum}", key=key, line=lineno)
        params[key] = value
    return ExperimentConfig(preset, params, assertions, by_key, source)


def load_config(path, schemas: dict) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, schemas, source=str(path))
