"""Experiment configuration: parsing, validation, defaults and hashing.

A config is one JSON document. Unknown keys are rejected so typos surface
as config errors instead of silently falling back to defaults.
"""

import copy
import hashlib
import json
from importlib import resources

from ..errors import ConfigError

DATA_KINDS = ("teacher", "sinusoids", "noise")
INTEGRATORS = ("euler", "rk4")
FORMULAS = ("lambda_scalar", "lambda_ndim", "c_of_t", "a_implicit")

DEFAULTS = {
    "name": "experiment",
    "data": {
        "kind": "teacher",
        "L": 16,
        "seed": 0,
        "sinusoids": [],
        "target_sinusoids": [],
        "noise_scale": 0.0,
        "teacher": None,
    },
    "model": {
        "N": 1,
        "K": 1,
        "init": {"a0": 0.5, "b0": 0.1, "c0": 0.1, "jitter": 0.0},
        "mask": {"learn_a": False, "learn_b": True, "learn_c": True},
    },
    "schedule": {
        "tau": 1.0,
        "dt": 1e-3,
        "steps": 1000,
        "t_max": None,
        "record_every": 10,
        "integrator": "euler",
    },
    "analytic": None,
    "compare": {"tolerance": 1e-3},
    "sweep": None,
    "outputs": {"formats": ["csv", "json"], "emit_plot_data": True, "record_response": False},
}

ANALYTIC_DEFAULTS = {
    "formula": "lambda_scalar",
    "t_max": None,
    "num": 501,
    "N_values": None,
    "sigma": None,
    "eta": None,
    "sigma_scale": 1.0,
    "lambda0": None,
}

SWEEP_DEFAULTS = {"param": None, "values": None, "alpha": 0.9, "jobs": 1, "reference": None}

INIT_KEYS = {"a0", "b0", "c0", "jitter"}


def _merge(defaults, given, path):
    if given is None:
        return copy.deepcopy(defaults)
    if not isinstance(given, dict):
        raise ConfigError(path, "expected an object")
    unknown = set(given) - set(defaults)
    if unknown:
        raise ConfigError(f"{path}.{sorted(unknown)[0]}" if path else sorted(unknown)[0], "unknown key")
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        if isinstance(defaults.get(key), dict) and key not in ("init", "mask"):
            out[key] = _merge(defaults[key], value, f"{path}.{key}" if path else key)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _number(cfg, path, positive=False, nonneg=False, integer=False):
    section, _, key = path.rpartition(".")
    node = cfg
    for part in section.split("."):
        node = node[part]
    value = node[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(path, f"must be > 0, got {value!r}")
    if nonneg and value < 0:
        raise ConfigError(path, f"must be >= 0, got {value!r}")
    if integer:
        node[key] = int(value)
    return value


def _vector(value, N, path):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return [float(value)] * N
    if isinstance(value, list) and len(value) == N and all(isinstance(v, (int, float)) for v in value):
        return [float(v) for v in value]
    raise ConfigError(path, f"expected a number or a list of {N} numbers")


def _check_sinusoids(items, L, path):
    if not isinstance(items, list):
        raise ConfigError(path, "expected a list")
    for i, item in enumerate(items):
        p = f"{path}[{i}]"
        if not isinstance(item, dict) or set(item) - {"bin", "amplitude", "phase"} or "bin" not in item:
            raise ConfigError(p, "expected {bin, amplitude, phase}")
        if not isinstance(item["bin"], int) or not 0 <= item["bin"] < L:
            raise ConfigError(f"{p}.bin", f"must be an integer in [0, {L})")
        item.setdefault("amplitude", 1.0)
        item.setdefault("phase", 0.0)


def _normalize_init(init, N, K):
    layers = init if isinstance(init, list) else [init] * K
    if len(layers) != K:
        raise ConfigError("model.init", f"expected {K} per-layer init objects")
    out = []
    for l, layer in enumerate(layers):
        p = "model.init" if not isinstance(init, list) else f"model.init[{l}]"
        if not isinstance(layer, dict):
            raise ConfigError(p, "expected an object")
        unknown = set(layer) - INIT_KEYS
        if unknown:
            raise ConfigError(f"{p}.{sorted(unknown)[0]}", "unknown key")
        merged = {**DEFAULTS["model"]["init"], **layer}
        entry = {k: _vector(merged[k], N, f"{p}.{k}") for k in ("a0", "b0", "c0")}
        if any(abs(v) >= 1 for v in entry["a0"]):
            raise ConfigError(f"{p}.a0", "|a0| must be < 1")
        jitter = merged["jitter"]
        if not isinstance(jitter, (int, float)) or jitter < 0:
            raise ConfigError(f"{p}.jitter", "must be a number >= 0")
        entry["jitter"] = float(jitter)
        out.append(entry)
    return out


def normalize(raw):
    """Fill defaults and validate. Returns a new plain-dict config."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    cfg = _merge(DEFAULTS, raw, "")
    if not isinstance(cfg["name"], str):
        raise ConfigError("name", "expected a string")

    data = cfg["data"]
    if data["kind"] not in DATA_KINDS:
        raise ConfigError("data.kind", f"must be one of {DATA_KINDS}")
    _number(cfg, "data.L", positive=True, integer=True)
    if isinstance(data["seed"], bool) or not isinstance(data["seed"], int) or not 0 <= data["seed"] < 2 ** 64:
        raise ConfigError("data.seed", "must be an unsigned 64-bit integer")
    _number(cfg, "data.noise_scale", nonneg=True)
    _check_sinusoids(data["sinusoids"], data["L"], "data.sinusoids")
    _check_sinusoids(data["target_sinusoids"], data["L"], "data.target_sinusoids")
    if data["kind"] == "teacher":
        t = data["teacher"]
        if not isinstance(t, dict) or set(t) != {"a", "b", "c"}:
            raise ConfigError("data.teacher", "teacher data needs {a, b, c}")
        n = len(t["a"]) if isinstance(t["a"], list) else 1
        for key in "abc":
            t[key] = _vector(t[key], n, f"data.teacher.{key}")
        if any(abs(v) >= 1 for v in t["a"]):
            raise ConfigError("data.teacher.a", "teacher is unstable: |a| must be < 1")
        if not data["sinusoids"] and data["noise_scale"] == 0:
            raise ConfigError("data.sinusoids", "teacher data needs an input: sinusoids or noise_scale > 0")
    if data["kind"] == "noise" and data["noise_scale"] == 0:
        data["noise_scale"] = 1.0

    model = cfg["model"]
    _number(cfg, "model.N", positive=True, integer=True)
    _number(cfg, "model.K", positive=True, integer=True)
    model["init"] = _normalize_init(model["init"], model["N"], model["K"])
    masks = model["mask"] if isinstance(model["mask"], list) else [model["mask"]] * model["K"]
    if len(masks) != model["K"]:
        raise ConfigError("model.mask", f"expected {model['K']} per-layer masks")
    norm_masks = []
    for l, m in enumerate(masks):
        if not isinstance(m, dict) or set(m) - {"learn_a", "learn_b", "learn_c"}:
            raise ConfigError("model.mask", "expected {learn_a, learn_b, learn_c}")
        m = {**DEFAULTS["model"]["mask"], **m}
        if not all(isinstance(v, bool) for v in m.values()):
            raise ConfigError("model.mask", "mask entries must be booleans")
        norm_masks.append(m)
    if not any(any(m.values()) for m in norm_masks):
        raise ConfigError("model.mask", "at least one parameter group must be learned")
    model["mask"] = norm_masks

    sch = cfg["schedule"]
    _number(cfg, "schedule.tau", positive=True)
    _number(cfg, "schedule.dt", positive=True)
    _number(cfg, "schedule.record_every", positive=True, integer=True)
    if sch["t_max"] is not None:
        _number(cfg, "schedule.t_max", nonneg=True)
        sch["steps"] = int(round(sch["t_max"] / sch["dt"]))
    _number(cfg, "schedule.steps", nonneg=True, integer=True)
    if sch["integrator"] not in INTEGRATORS:
        raise ConfigError("schedule.integrator", f"must be one of {INTEGRATORS}")

    if cfg["analytic"] is not None:
        cfg["analytic"] = _merge(ANALYTIC_DEFAULTS, cfg["analytic"], "analytic")
        an = cfg["analytic"]
        if an["formula"] not in FORMULAS:
            raise ConfigError("analytic.formula", f"must be one of {FORMULAS}")
        _number(cfg, "analytic.num", positive=True, integer=True)
        _number(cfg, "analytic.sigma_scale", positive=True)
        for key in ("t_max", "sigma", "eta", "lambda0"):
            if an[key] is not None:
                _number(cfg, f"analytic.{key}")
        if an["N_values"] is not None:
            if not isinstance(an["N_values"], list) or not an["N_values"] or not all(
                isinstance(n, int) and n >= 1 for n in an["N_values"]
            ):
                raise ConfigError("analytic.N_values", "expected a non-empty list of positive integers")

    cfg["compare"] = _merge(DEFAULTS["compare"], cfg["compare"], "compare")
    _number(cfg, "compare.tolerance", positive=True)

    if cfg["sweep"] is not None:
        cfg["sweep"] = _merge(SWEEP_DEFAULTS, cfg["sweep"], "sweep")
        sw = cfg["sweep"]
        if not isinstance(sw["param"], str) or "." not in sw["param"]:
            raise ConfigError("sweep.param", "expected a dotted path such as 'model.N'")
        if not isinstance(sw["values"], list) or not sw["values"]:
            raise ConfigError("sweep.values", "expected a non-empty list")
        _number(cfg, "sweep.alpha", positive=True)
        _number(cfg, "sweep.jobs", positive=True, integer=True)
        if sw["reference"] is not None and not isinstance(sw["reference"], dict):
            raise ConfigError("sweep.reference", "expected an object of dotted-path overrides")

    out = cfg["outputs"]
    if not isinstance(out["formats"], list) or set(out["formats"]) - {"csv", "json"}:
        raise ConfigError("outputs.formats", "allowed formats are 'csv' and 'json'")
    return cfg


def set_path(raw, path, value):
    """Return a copy of a raw config with the dotted ``path`` set to ``value``."""
    out = copy.deepcopy(raw)
    node = out
    parts = path.split(".")
    for part in parts[:-1]:
        nxt = node.get(part)
        if nxt is None:
            nxt = node[part] = {}
        if not isinstance(nxt, dict):
            raise ConfigError(path, f"{part!r} is not an object")
        node = nxt
    node[parts[-1]] = value
    return out


def canonical_json(cfg):
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(cfg):
    """SHA-256 over the canonical form; independent of key order in the source file."""
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()


def builtin_names():
    root = resources.files("ssmdyn.lab").joinpath("configs")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_raw(source):
    """Read a config from a path, or ``builtin:<name>`` for a shipped default."""
    if source.startswith("builtin:"):
        name = source.split(":", 1)[1]
        if name not in builtin_names():
            raise ConfigError("--config", f"no builtin config {name!r}; choose from {builtin_names()}")
        text = resources.files("ssmdyn.lab").joinpath("configs", f"{name}.json").read_text()
    else:
        with open(source) as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON: {exc}") from exc
