"""Experiment configuration: YAML schema, validation and overrides.

A config is a YAML mapping::

    kind: spiked          # sample | moments | lemma1 | kronecker | process | spectrum | spiked
    seed: 0               # optional, default 0
    name: fig6            # optional, names the output subdirectory
    workers: 1            # optional, thread pool size for trial loops
    params:               # kind-specific fields, see SCHEMAS
      family: symmetric
      betas: {start: 0.5, stop: 3.0, num: 26}

Unknown keys are rejected. Every error names the offending field and,
when it comes from a file, the line it sits on.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np
import yaml

from .errors import RandTensorError

__all__ = ["ConfigError", "Field", "SCHEMAS", "KINDS", "ExperimentConfig", "load_config", "parse_config", "apply_override"]


class ConfigError(RandTensorError, ValueError):
    """A config file or override is invalid; ``line`` is 1-based when known."""

    def __init__(self, message: str, source: str = "<config>", line: int | None = None):
        self.source, self.line, self.message = source, line, message
        where = f"{source}:{line}" if line else source
        super().__init__(f"{where}: {message}")


_REQUIRED = object()


@dataclass(frozen=True)
class Field:
    """One schema entry: a type tag, default and optional extra check.

    Type tags: ``int``, ``float``, ``bool``, ``str``, ``int_list``,
    ``float_list`` and ``grid`` (a float list or ``{start, stop, num}``).
    ``check`` returns an error message or ``None``.
    """

    type: str
    default: Any = _REQUIRED
    choices: tuple = ()
    check: Callable | None = None
    help: str = ""


def _positive(v):
    return None if v > 0 else "must be positive"


def _nonnegative(v):
    return None if v >= 0 else "must be nonnegative"


def _dims(v):
    return None if v and all(d >= 1 for d in v) else "must be a nonempty list of positive sizes"


def _min_len(n):
    def check(v):
        return None if len(v) >= n else f"needs at least {n} entries"

    return check


def _ratios(v):
    if not v:
        return None
    if any(c <= 0 or c >= 1 for c in v):
        return "entries must lie in (0, 1)"
    if abs(sum(v) - 1) > 1e-9:
        return f"must sum to 1 (sum is {sum(v):.12g})"
    return None


def _unit_interval(v):
    return None if -1 < v < 1 else "must lie in (-1, 1)"


SCHEMAS: dict[str, dict[str, Field]] = {
    "sample": {
        "shape": Field("int_list", [2, 2], check=_dims, help="tensor shape"),
        "flavor": Field("str", "circular", choices=("circular", "real")),
        "structure": Field("str", "mode_restricted", choices=("identity", "mode_restricted", "separable")),
        "modes": Field("int_list", [0], help="0-based modes carrying correlation (mode_restricted)"),
        "rho": Field("float", 0.5, check=_unit_interval, help="Toeplitz correlation coefficient per mode"),
        "n_samples": Field("int", 100000, check=_positive),
        "save_samples": Field("bool", False),
    },
    "moments": {
        "shape": Field("int_list", [2, 2], check=_dims),
        "rho": Field("float", 0.3, check=_unit_interval),
        "kappa": Field("float", 0.5, check=_nonnegative, help="impropriety: X = M + Z + kappa conj(Z)"),
        "mean": Field("float", 1.0),
        "n_samples": Field("int", 100000, check=_positive),
        "input": Field("str", "", help="optional tensor file of stacked samples to analyse instead"),
    },
    "lemma1": {
        "receive_dims": Field("int_list", [2], check=_dims),
        "transmit_dims": Field("int_list", [2], check=_dims),
        "rho_receive": Field("float", 0.6, check=_unit_interval),
        "rho_transmit": Field("float", 0.4, check=_unit_interval),
        "n_samples": Field("int", 100000, check=_positive),
        "tolerance": Field("float", 0.05, check=_positive),
    },
    "kronecker": {
        "rho": Field("float", 0.3),
        "mu": Field("float", 0.3),
        "nu": Field("float", 0.2),
        "gamma": Field("float", 0.1),
        "n_samples": Field("int", 0, check=_nonnegative),
    },
    "process": {
        "shape": Field("int_list", [2, 2], check=_dims),
        "n_taps": Field("int", 3, check=_positive),
        "n_filters": Field("int", 1, check=_positive),
        "n_realizations": Field("int", 10000, check=_positive),
        "length": Field("int", 0, check=_nonnegative, help="0 picks a length from the filter size"),
        "max_lag": Field("int", 3, check=_nonnegative),
        "grid": Field("int", 64, check=_positive),
        "rho": Field("float", 0.0, check=_unit_interval, help="input correlation across entries"),
        "mean": Field("float", 0.0),
    },
    "spectrum": {
        "law": Field("str", "semicircle", choices=("semicircle", "marcenko-pastur")),
        "dims": Field("int_list", [10, 10], check=_dims, help="row dims of the Hermitian tensor (semicircle)"),
        "row_dims": Field("int_list", [10, 20], check=_dims),
        "col_dims": Field("int_list", [20, 20], check=_dims),
        "n_trials": Field("int", 20, check=_positive),
        "bins": Field("int", 40, check=_positive),
    },
    "spiked": {
        "family": Field("str", "symmetric", choices=("symmetric", "asymmetric")),
        "order": Field("int", 3, check=lambda v: None if v >= 3 else "must be >= 3"),
        "dim": Field("int", 20, check=_positive),
        "dims": Field("int_list", [], help="asymmetric dims; alternatively ratios and total_dim"),
        "ratios": Field("float_list", [], check=_ratios, help="asymmetric c_k = I_k / sum(I)"),
        "total_dim": Field("int", 60, check=_positive),
        "betas": Field("grid", {"start": 0.5, "stop": 3.0, "num": 26}),
        "n_trials": Field("int", 20, check=_positive),
        "restarts": Field("int", 10, check=_positive),
        "tol": Field("float", 1e-10, check=_positive),
        "max_iters": Field("int", 2000, check=_positive),
    },
}

KINDS = tuple(SCHEMAS)
_TOP = {"kind", "seed", "name", "workers", "params"}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated config with every default filled in."""

    kind: str
    params: dict
    seed: int = 0
    name: str = ""
    workers: int = 1
    source: str = "<config>"
    lines: dict = field(default_factory=dict, repr=False, compare=False)

    def snapshot(self) -> dict:
        return {"kind": self.kind, "seed": self.seed, "name": self.name, "workers": self.workers, "params": self.params}

    def checksum(self) -> str:
        """SHA-256 of the canonical JSON snapshot, excluding ``workers`` (results do not depend on it)."""
        snap = self.snapshot()
        snap.pop("workers")
        return hashlib.sha256(json.dumps(snap, sort_keys=True).encode()).hexdigest()


def _line_map(node, path=(), out=None) -> dict:
    # key path -> 1-based line of the value (or key) node
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            key = path + (k.value,)
            out[key] = k.start_mark.line + 1
            _line_map(v, key, out)
    return out


def _coerce(value, spec: Field, name: str):
    def fail(msg):
        raise ValueError(f"field '{name}': {msg}")

    def scalar(v, tag):
        if tag == "int":
            if isinstance(v, bool) or not isinstance(v, int):
                fail(f"expected an integer, got {v!r}")
            return int(v)
        if tag == "float":
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                fail(f"expected a number, got {v!r}")
            return float(v)
        if tag == "bool":
            if not isinstance(v, bool):
                fail(f"expected true or false, got {v!r}")
            return v
        if tag == "str":
            if not isinstance(v, str):
                fail(f"expected a string, got {v!r}")
            return v
        raise AssertionError(tag)

    t = spec.type
    if t in ("int", "float", "bool", "str"):
        out = scalar(value, t)
    elif t in ("int_list", "float_list"):
        if not isinstance(value, list):
            fail(f"expected a list, got {value!r}")
        out = [scalar(v, t.split("_")[0]) for v in value]
    elif t == "grid":
        if isinstance(value, dict):
            extra = set(value) - {"start", "stop", "num"}
            if extra or len(value) != 3:
                fail("grid mapping needs exactly start, stop and num")
            num = scalar(value["num"], "int")
            if num < 1:
                fail("num must be positive")
            out = {"start": scalar(value["start"], "float"), "stop": scalar(value["stop"], "float"), "num": num}
        elif isinstance(value, list) and value:
            out = [scalar(v, "float") for v in value]
        else:
            fail(f"expected a list of numbers or {{start, stop, num}}, got {value!r}")
    else:
        raise AssertionError(t)
    if spec.choices and out not in spec.choices:
        fail(f"must be one of {list(spec.choices)}, got {out!r}")
    if spec.check is not None:
        msg = spec.check(out)
        if msg:
            fail(msg)
    return out


def grid_values(grid) -> np.ndarray:
    """Expand a ``grid`` field into an array."""
    if isinstance(grid, dict):
        return np.linspace(grid["start"], grid["stop"], grid["num"])
    return np.asarray(grid, dtype=float)


def _cross_checks(kind: str, p: dict) -> list[tuple[str, str]]:
    errs = []
    if kind == "spiked" and p["family"] == "asymmetric":
        if not p["dims"] and not p["ratios"]:
            errs.append(("dims", "asymmetric family needs dims or ratios"))
        if p["dims"] and p["ratios"]:
            errs.append(("ratios", "give either dims or ratios, not both"))
        if p["dims"] and (len(p["dims"]) < 3 or any(d < 1 for d in p["dims"])):
            errs.append(("dims", "needs at least three positive sizes"))
        if p["ratios"] and len(p["ratios"]) < 3:
            errs.append(("ratios", "needs at least three entries"))
    if kind == "sample":
        bad = [m for m in p["modes"] if not 0 <= m < len(p["shape"])]
        if bad:
            errs.append(("modes", f"modes {bad} out of range for order {len(p['shape'])}"))
    return errs


def parse_config(data, source: str = "<config>", lines: dict | None = None) -> ExperimentConfig:
    """Validate a parsed mapping and fill defaults."""
    lines = lines or {}

    def err(path, msg):
        line = lines.get(tuple(path))
        while line is None and path:
            path = path[:-1]
            line = lines.get(tuple(path))
        return ConfigError(msg, source, line)

    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping", source, 1)
    for k in data:
        if k not in _TOP:
            raise err((k,), f"unknown key '{k}' (allowed: {sorted(_TOP)})")
    kind = data.get("kind")
    if kind not in SCHEMAS:
        raise err(("kind",), f"field 'kind': must be one of {list(KINDS)}, got {kind!r}")
    top = {}
    for key, spec in (("seed", Field("int", 0, check=_nonnegative)), ("name", Field("str", "")),
                      ("workers", Field("int", 1, check=_positive))):
        try:
            top[key] = _coerce(data.get(key, spec.default), spec, key)
        except ValueError as e:
            raise err((key,), str(e)) from None
    raw = data.get("params") or {}
    if not isinstance(raw, dict):
        raise err(("params",), "field 'params': must be a mapping")
    schema = SCHEMAS[kind]
    for k in raw:
        if k not in schema:
            raise err(("params", k), f"unknown field '{k}' for kind '{kind}' (allowed: {sorted(schema)})")
    params = {}
    for name, spec in schema.items():
        if name not in raw and spec.default is _REQUIRED:
            raise err(("params",), f"field '{name}' is required")
        try:
            params[name] = _coerce(raw.get(name, spec.default), spec, name)
        except ValueError as e:
            raise err(("params", name), str(e)) from None
    for name, msg in _cross_checks(kind, params):
        raise err(("params", name), f"field '{name}': {msg}")
    return ExperimentConfig(kind, params, top["seed"], top["name"], top["workers"], source, lines)


def load_config(path) -> ExperimentConfig:
    """Read and validate a YAML config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e.strerror}", str(path)) from None
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {getattr(e, 'problem', e)}", str(path), mark.line + 1 if mark else None) from None
    return parse_config(data, str(path), _line_map(node) if node is not None else {})


def apply_override(cfg: ExperimentConfig, key: str, value) -> ExperimentConfig:
    """Return ``cfg`` with ``key`` replaced; ``key`` is a top-level key or a params field.

    String values are parsed as YAML, so ``"[1, 2]"`` becomes a list.
    """
    if isinstance(value, str):
        try:
            value = yaml.safe_load(value)
        except yaml.YAMLError:
            raise ConfigError(f"cannot parse override value {value!r} for '{key}'", "<override>") from None
    snap = cfg.snapshot()
    if key in _TOP - {"params", "kind"}:
        snap[key] = value
    elif key in SCHEMAS[cfg.kind]:
        snap["params"] = dict(snap["params"], **{key: value})
    else:
        raise ConfigError(f"unknown field '{key}' for kind '{cfg.kind}'", "<override>")
    try:
        return parse_config(snap, cfg.source, cfg.lines)
    except ConfigError as e:
        raise ConfigError(e.message + " (from override)", "<override>") from None
