"""Experiment configuration: JSON in, validated :class:`ExperimentConfig` out.

Every section is optional; see ``DEFAULTS`` for the filled-in values. The
loader reports all violations at once through
:class:`~obslab.errors.ConfigurationError`.
"""

from dataclasses import dataclass, field
import copy
import hashlib
import json
import math
from pathlib import Path

import jsonschema
import numpy as np

from .dyadic import DyadicScheme
from .errors import ConfigurationError
from .spectral_model import ObservationSpec, build_dirichlet_interval, build_dense

__all__ = ["DEFAULTS", "SCHEMA", "ExperimentConfig", "load_config", "config_from_dict"]

DEFAULTS = {
    "model": {
        "kind": "dirichlet_interval",
        "length": math.pi,
        "n_modes": 64,
        "observation": {"kind": "interior", "a": 0.3, "b": 0.8},
    },
    "scheme": {"alpha": 0.4, "rho": 1.5, "k_max": 30},
    "horizons": {"T": 2 * math.pi, "T_prime": 2.5 * math.pi},
    "exponents": {},
    "bands": {"k0": 3},
    "grids": {"dt": 2 * math.pi / 4096, "span": 16 * math.pi},
    "decay": {"k_min": 5, "k_max": 12, "delta": math.pi / 4, "level": 1.0},
    "seeds": list(range(10)),
    "outputs": {"dir": "obslab_out", "formats": ["csv", "json"]},
}

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_int = {"type": "integer"}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "model": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["dirichlet_interval", "dense"]},
                "length": _pos,
                "n_modes": {"type": "integer", "minimum": 1},
                "observation": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "kind": {"enum": ["interior", "neumann", "identity", "matrix"]},
                        "a": _num, "b": _num,
                        "endpoint": {"enum": ["left", "right"]},
                        "matrix": {"type": "array", "items": {"type": "array", "items": _num}},
                        "m0": _num,
                    },
                    "required": ["kind"],
                },
                "matrix": {"type": "array", "items": {"type": "array", "items": _num}},
                "obs_matrix": {"type": "array", "items": {"type": "array", "items": _num}},
                "matrix_path": {"type": "string"},
                "m0": _num,
            },
        },
        "scheme": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: _num for k in ("alpha", "a", "rho", "a_tilde", "alpha_tilde")} | {"k_max": _int},
        },
        "horizons": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"T": _num, "T_prime": _num},
        },
        "exponents": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: _num for k in ("l0", "l1", "p0", "p1", "m0")},
        },
        "bands": {"type": "object", "additionalProperties": False, "properties": {"k0": _int}},
        "grids": {"type": "object", "additionalProperties": False, "properties": {"dt": _pos, "span": _pos}},
        "decay": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"k_min": _int, "k_max": _int, "delta": _pos, "level": _num},
        },
        "seeds": {"type": "array", "items": _int, "minItems": 1},
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "formats": {"type": "array", "items": {"enum": ["csv", "json"]}},
            },
        },
    },
}


@dataclass
class ExperimentConfig:
    """Validated configuration; ``raw`` holds the merged JSON, ``hash`` identifies the input bytes."""

    raw: dict
    model: object
    scheme: DyadicScheme
    T: float
    T_prime: float
    exponents: dict
    k0: int
    dt: float
    span: float
    decay: dict
    seeds: list
    out_dir: str
    formats: list
    hash: str = ""
    flags: list = field(default_factory=list)


def _merge(defaults, user):
    out = copy.deepcopy(defaults)
    for k, v in user.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            # an explicit observation replaces the default one wholesale
            out[k] = v if k == "observation" else _merge(out[k], v)
        else:
            out[k] = v
    return out


def _build_model(m, base_dir, problems):
    obs = m.get("observation", {})
    m0 = obs.get("m0", m.get("m0"))
    kind = obs.get("kind")
    try:
        if kind == "interior":
            spec = ObservationSpec.interior(obs.get("a", 0.0), obs.get("b", 0.0), m0=m0 or 0.0)
        elif kind == "neumann":
            spec = ObservationSpec.neumann(obs.get("endpoint", "left"), **({} if m0 is None else {"m0": m0}))
        elif kind == "identity":
            spec = ObservationSpec.identity(m0=m0 or 0.0)
        else:
            spec = ObservationSpec.from_matrix(np.array(obs.get("matrix", [[0.0]])), m0=m0 or 0.0)
        if m.get("kind", "dirichlet_interval") == "dirichlet_interval":
            return build_dirichlet_interval(m["length"], m["n_modes"], spec)
        if "matrix_path" in m:
            A = np.loadtxt(Path(base_dir) / m["matrix_path"], delimiter=",", ndmin=2)
        elif "matrix" in m:
            A = np.array(m["matrix"], dtype=float)
        else:
            problems.append("model: dense kind needs 'matrix' or 'matrix_path'")
            return None
        B = np.array(m.get("obs_matrix", np.eye(A.shape[0])), dtype=float)
        return build_dense(A, B, m0=m0 or 0.0)
    except ConfigurationError as e:
        problems.extend(f"model: {v}" for v in e.violations)
    except (OSError, ValueError) as e:
        problems.append(f"model: {e}")
    return None


def config_from_dict(user, base_dir=".", digest=""):
    """Validate a parsed JSON object and fill defaults."""
    if not isinstance(user, dict):
        raise ConfigurationError("configuration must be a JSON object")
    validator = jsonschema.Draft7Validator(SCHEMA)
    problems = [f"{'/'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}"
                for e in sorted(validator.iter_errors(user), key=lambda e: list(map(str, e.absolute_path)))]
    if problems:
        raise ConfigurationError(problems)
    raw = _merge(DEFAULTS, user)

    T, Tp = raw["horizons"]["T"], raw["horizons"]["T_prime"]
    if not T > 0:
        problems.append(f"horizons: need T > 0, got T={T}")
    if not Tp > T:
        problems.append(f"horizons: need T_prime > T, got T={T}, T_prime={Tp}")

    model = _build_model(raw["model"], base_dir, problems)
    m0 = raw["exponents"].get("m0", model.obs_regularity if model is not None else 0.0)
    ex = {"m0": m0}
    ex["l0"] = raw["exponents"].get("l0", 2 * m0)
    ex["l1"] = raw["exponents"].get("l1", min(0.0, ex["l0"]))
    ex["p0"] = raw["exponents"].get("p0", m0)
    ex["p1"] = raw["exponents"].get("p1", min(0.0, ex["p0"]))
    if not ex["l1"] <= ex["l0"]:
        problems.append(f"exponents: wave ordering l1 <= l0 fails (l1={ex['l1']}, l0={ex['l0']})")
    if not ex["l0"] <= 2 * m0:
        problems.append(f"exponents: wave ordering l0 <= 2*m0 fails (l0={ex['l0']}, m0={m0})")
    if not ex["l1"] <= 2 * m0:
        problems.append(f"exponents: wave ordering l1 <= 2*m0 fails (l1={ex['l1']}, m0={m0})")
    if not ex["p1"] <= ex["p0"]:
        problems.append(f"exponents: Schrodinger ordering p1 <= p0 fails (p1={ex['p1']}, p0={ex['p0']})")
    if not ex["p0"] <= m0:
        problems.append(f"exponents: Schrodinger ordering p0 <= m0 fails (p0={ex['p0']}, m0={m0})")

    scheme = None
    try:
        scheme = DyadicScheme.from_params(**raw["scheme"])
    except ConfigurationError as e:
        problems.extend(f"scheme: {v}" for v in e.violations)
    except TypeError as e:
        problems.append(f"scheme: {e}")

    k0 = raw["bands"]["k0"]
    if scheme is not None and not (1 <= k0 <= scheme.k_max):
        problems.append(f"bands: need 1 <= k0 <= k_max, got k0={k0}")
    d = raw["decay"]
    if not (1 <= d["k_min"] <= d["k_max"]):
        problems.append(f"decay: need 1 <= k_min <= k_max, got {d['k_min']}, {d['k_max']}")
    if problems:
        raise ConfigurationError(problems)
    return ExperimentConfig(raw=raw, model=model, scheme=scheme, T=float(T), T_prime=float(Tp),
                            exponents=ex, k0=int(k0), dt=float(raw["grids"]["dt"]),
                            span=float(raw["grids"]["span"]), decay=dict(d), seeds=list(raw["seeds"]),
                            out_dir=raw["outputs"]["dir"], formats=list(raw["outputs"]["formats"]),
                            hash=digest, flags=scheme.hypothesis_violations())


def load_config(path):
    """Read, parse and validate a JSON configuration file.

    ``hash`` is the first 16 hex digits of the SHA-256 of the file bytes.
    """
    p = Path(path)
    try:
        data = p.read_bytes()
    except OSError as e:
        raise ConfigurationError(f"cannot read {path}: {e}") from None
    try:
        user = json.loads(data)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"{path}: invalid JSON ({e})") from None
    return config_from_dict(user, base_dir=p.parent, digest=hashlib.sha256(data).hexdigest()[:16])
