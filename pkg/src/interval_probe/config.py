"""Experiment configuration: the record type, form strings and flat ``key = value`` files.

Form strings describe closed-form data as text, e.g.::

    zero
    sine:1,pi/2            # 1 * sin(pi/2 * x)
    sin3:5                 # 5 * sin(x)^3
    sin3:3,2               # 3 * sin(2x)^3
    poly:0,0.4,0.2         # 0.4 t + 0.2 t^2
    sampled:u0.csv         # two columns, linearly interpolated
    sine:1,pi + poly:0,1   # terms joined by " + "

Numbers may be written as arithmetic on literals and ``pi``.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .core import Grid, HeatProblem, InvalidInputError, Problem, Signal, WaveProblem, as_time_grid
from .forms import Polynomial, Profile, ProfileError, Sampled, Sine, Sum, sine_cubed, zero

EQUATIONS = ("heat", "wave")

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_NAMES = {"pi": math.pi}


def parse_number(text: str) -> float:
    """A float literal or arithmetic (+ - * / **) on literals and ``pi``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError

    try:
        value = ev(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError, OverflowError):
        raise InvalidInputError(f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise InvalidInputError(f"not a finite number: {text!r}")
    return value


def _numbers(args: str) -> list[float]:
    return [parse_number(a) for a in args.split(",")] if args.strip() else []


def _load_columns(path: Path, what: str) -> tuple[np.ndarray, np.ndarray]:
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2, comments="#", skiprows=_header_rows(path))
    except (OSError, ValueError) as exc:
        raise InvalidInputError(f"cannot read {what} file {str(path)!r}: {exc}") from exc
    if data.shape[1] != 2:
        raise InvalidInputError(f"{what} file {str(path)!r} must have exactly two columns")
    return data[:, 0], data[:, 1]


def _header_rows(path: Path) -> int:
    try:
        with open(path, encoding="utf-8") as fh:
            first = fh.readline()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {str(path)!r}: {exc}") from exc
    try:
        [float(v) for v in first.split(",")]
        return 0
    except ValueError:
        return 1


def parse_form(text: str, base_dir: Path | None = None) -> Profile:
    """Profile described by a form string (see module docstring)."""
    terms = [t.strip() for t in text.split(" + ")]
    if not text.strip() or any(not t for t in terms):
        raise InvalidInputError(f"empty form string in {text!r}")
    out = [_parse_term(t, base_dir) for t in terms]
    return out[0] if len(out) == 1 else Sum(tuple(out))


def _parse_term(term: str, base_dir: Path | None) -> Profile:
    kind, _, args = term.partition(":")
    kind = kind.strip().lower()
    if kind == "zero" and not args.strip():
        return zero()
    if kind == "sine":
        v = _numbers(args)
        if len(v) != 2:
            raise InvalidInputError(f"sine needs amplitude,omega: {term!r}")
        return Sine(*v)
    if kind == "sin3":
        v = _numbers(args)
        if len(v) not in (1, 2):
            raise InvalidInputError(f"sin3 needs amplitude[,omega]: {term!r}")
        return sine_cubed(*v)
    if kind == "poly":
        v = _numbers(args)
        if not v:
            raise InvalidInputError(f"poly needs at least one coefficient: {term!r}")
        return Polynomial(tuple(v))
    if kind == "sampled":
        path = Path(args.strip())
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        x, v = _load_columns(path, "sampled profile")
        try:
            return Sampled(x, v)
        except ProfileError as exc:
            raise InvalidInputError(f"{str(path)!r}: {exc}") from exc
    raise InvalidInputError(f"unknown form {term!r}; expected zero, sine, sin3, poly or sampled")


def load_signal(path: Path) -> Signal:
    """A ``t,flux`` CSV (optional header) on a uniform time grid."""
    t, v = _load_columns(path, "target")
    t0, dt, _ = as_time_grid(t)
    return Signal(v, dt, t0)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to run one reconstruction experiment."""

    name: str
    equation: str
    horizon: float
    eta: Profile
    u0: Profile
    u1: Profile | None
    bracket: tuple[float, float]
    ell_init: float
    L_d: float | None = None
    target_file: str | None = None
    noise_levels: tuple[float, ...] = (1.0, 0.1, 0.01, 0.001, 0.0)
    seed: int = 0
    nx: int = 200
    nt: int = 1000
    scan_samples: int = 41
    multistart: int = 1
    out: str | None = None
    title: str = ""
    notes: tuple[str, ...] = field(default_factory=tuple)

    def validate(self) -> "ExperimentConfig":
        if self.equation not in EQUATIONS:
            raise InvalidInputError(f"equation must be one of {EQUATIONS}, got {self.equation!r}")
        lo, hi = self.bracket
        if not (0 < lo < hi):
            raise InvalidInputError(f"bracket must satisfy 0 < lo < hi, got {self.bracket}")
        if not (lo < self.ell_init < hi):
            raise InvalidInputError(f"ell_init {self.ell_init} must lie inside bracket ({lo}, {hi})")
        if (self.L_d is None) == (self.target_file is None):
            raise InvalidInputError("give exactly one of L_d (synthetic target) or target (file)")
        if self.L_d is not None and not (self.L_d > 0):
            raise InvalidInputError(f"L_d must be positive, got {self.L_d}")
        if any(not (v >= 0) for v in self.noise_levels):
            raise InvalidInputError("noise levels must be >= 0")
        if self.scan_samples < 10:
            raise InvalidInputError("scan samples must be >= 10")
        if self.multistart < 1:
            raise InvalidInputError("multistart must be >= 1")
        self.grid  # validates nx, nt
        self.template()  # validates the problem data
        return self

    @property
    def grid(self) -> Grid:
        return Grid(self.nx, self.nt)

    def template(self) -> Problem:
        length = self.L_d if self.L_d is not None else self.ell_init
        if self.equation == "heat":
            return HeatProblem(length, self.horizon, self.eta, self.u0)
        return WaveProblem(length, self.horizon, self.eta, self.u0, self.u1 or zero()).at_length(length)

    def with_overrides(self, **changes) -> "ExperimentConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes)


_KEYS = {
    "preset", "name", "equation", "T", "horizon", "eta", "u0", "u1", "L_d", "target",
    "bracket", "ell_init", "noise", "seed", "nx", "nt", "samples", "multistart", "out", "title",
}


def parse_config_text(text: str, base_dir: Path | None = None, presets: dict | None = None) -> ExperimentConfig:
    """Config from ``key = value`` lines; ``preset = NAME`` starts from a compiled-in preset."""
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise InvalidInputError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key not in _KEYS:
            raise InvalidInputError(f"line {lineno}: unknown key {key!r}")
        if key in entries:
            raise InvalidInputError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value

    base: dict = {}
    if "preset" in entries:
        if presets is None or entries["preset"] not in presets:
            raise InvalidInputError(f"unknown preset {entries['preset']!r}")
        base = dict(presets[entries["preset"]].__dict__)
    fields: dict = dict(base)

    def number_list(v):
        return tuple(parse_number(x) for x in v.replace(";", ",").split(",") if x.strip())

    conv = {
        "name": ("name", str),
        "title": ("title", str),
        "equation": ("equation", str.lower),
        "T": ("horizon", parse_number),
        "horizon": ("horizon", parse_number),
        "eta": ("eta", lambda v: parse_form(v, base_dir)),
        "u0": ("u0", lambda v: parse_form(v, base_dir)),
        "u1": ("u1", lambda v: parse_form(v, base_dir)),
        "L_d": ("L_d", parse_number),
        "bracket": ("bracket", number_list),
        "ell_init": ("ell_init", parse_number),
        "noise": ("noise_levels", number_list),
        "seed": ("seed", _parse_int),
        "nx": ("nx", _parse_int),
        "nt": ("nt", _parse_int),
        "samples": ("scan_samples", _parse_int),
        "multistart": ("multistart", _parse_int),
        "out": ("out", str),
    }
    for key, value in entries.items():
        if key == "preset":
            continue
        if key == "target":
            path = Path(value)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            fields["target_file"] = str(path)
            fields["L_d"] = None
            continue
        name, fn = conv[key]
        fields[name] = fn(value)
        if key == "L_d":
            fields["target_file"] = None

    if "bracket" in fields and len(fields["bracket"]) != 2:
        raise InvalidInputError("bracket needs exactly two numbers")
    missing = [k for k in ("equation", "horizon", "eta", "u0", "bracket", "ell_init") if k not in fields]
    if missing:
        raise InvalidInputError(f"config is missing {', '.join(missing)}")
    fields.setdefault("name", "custom")
    fields.setdefault("u1", None)
    fields["bracket"] = tuple(fields["bracket"])
    try:
        return ExperimentConfig(**fields).validate()
    except TypeError as exc:
        raise InvalidInputError(str(exc)) from exc


def _parse_int(text: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise InvalidInputError(f"not an integer: {text!r}") from None


def load_config(path: Path, presets: dict | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInputError(f"cannot read config {str(path)!r}: {exc}") from exc
    return parse_config_text(text, Path(path).resolve().parent, presets)
