"""Run configuration: a TOML file checked strictly against a fixed schema.

Unknown sections or keys, wrong types and out-of-range values raise
ConfigError naming the dotted key.
"""
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import BoltzgapError, ConfigError
from .model import ModelSpec, WeightSpec

_num = (int, float)

# section -> key -> (accepted types, default)
SCHEMA = {
    "model": {
        "d": (int, 3),
        "gamma": (_num, 1.0),
        "ell_b": (_num, 1.0),
    },
    "model.weight": {
        "kind": (str, "unit"),
        "a": (_num, 0.0),
        "s": (_num, 1.0),
        "beta": (_num, 0.0),
    },
    "grid": {
        "n_radial": (int, 128),
        "n_angle": (int, 48),
        "r_max": (_num, 8.0),
        "order": (int, 8),
        "refine_origin": (int, None),       # None: 3 levels for soft potentials, 0 for hard
    },
    "assemble": {
        "normalization": (str, ""),        # "": raw for spectrum, column-stochastic otherwise
    },
    "spectrum": {
        "zero_tol": (_num, 1e-6),
        "no_gap_threshold": (_num, 1e-2),
        "hilbert": (bool, True),
        "matrix": (str, ""),
    },
    "evolve": {
        "matrix": (str, ""),
        "spectrum": (str, ""),
        "t_end": (_num, None),              # None: 8 for hard, 100 for soft potentials
        "dt": (_num, 0.0),                  # 0: 0.1 / max(Sigma)
        "method": (str, "rk4"),
        "record_every": (int, 10),
        "window": (list, None),             # None: [2, 8] hard, [10, 100] soft
        "initial": (str, "certified"),
        "g": (str, "r2-maxwellian"),
        "rho0": (_num, 1.0),
        "envelope_c": (_num, 0.5),
    },
    "resolvent": {
        "matrix": (str, ""),
        "alphas": (list, [-20.0, -5.0, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 5.0, 20.0]),
        "alpha_large": (_num, 1e3),
        "tol": (_num, 1e-6),
    },
    "verify": {
        "r_max": (_num, 8.0),
        "slope_tol": (_num, 0.25),
        "resolvent": (bool, True),
        "resolvent_n_radial": (int, 64),
    },
    "report": {
        "inputs": (list, []),
    },
    "output": {
        "dir": (str, "out"),
    },
}

INITIAL_DATA = ("certified", "bump")
G_CHOICES = ("r2-maxwellian", "r4-maxwellian")


def _check_type(key, value, types):
    if types is _num or types == _num:
        ok = isinstance(value, _num) and not isinstance(value, bool)
    elif types is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    else:
        ok = isinstance(value, types)
    if not ok:
        name = "number" if types == _num else getattr(types, "__name__", str(types))
        raise ConfigError(f"{key}: expected {name}, got {type(value).__name__}", key=key)


def _flatten(raw):
    """{'model': {'weight': {...}}} -> {'model': {...}, 'model.weight': {...}}."""
    out = {}
    for sec, body in raw.items():
        if not isinstance(body, dict):
            raise ConfigError(f"{sec}: top-level keys must be tables", key=sec)
        if sec == "model" and isinstance(body.get("weight"), dict):
            body = dict(body)
            out["model.weight"] = body.pop("weight")
        elif sec == "model" and "weight" in body:
            raise ConfigError("model.weight: must be a table", key="model.weight")
        out[sec] = body
    return out


def parse(text):
    """Validated configuration dict with defaults filled in."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    raw = _flatten(raw)
    cfg = {}
    for sec, keys in SCHEMA.items():
        body = raw.get(sec, {})
        for k in body:
            if k not in keys:
                raise ConfigError(f"unknown key {sec}.{k}", key=f"{sec}.{k}")
        cfg[sec] = {}
        for k, (types, default) in keys.items():
            if k in body:
                _check_type(f"{sec}.{k}", body[k], types)
                cfg[sec][k] = body[k]
            else:
                cfg[sec][k] = default
    for sec in raw:
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section {sec}", key=sec)
    _validate(cfg)
    return cfg


def load(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}", key="--config") from exc
    return parse(text)


def _wrap(key, fn):
    try:
        return fn()
    except BoltzgapError as exc:
        raise ConfigError(f"{key}: {exc}", key=key) from exc


def model_spec(cfg):
    w = cfg["model.weight"]
    kind = w["kind"]
    if kind == "exponential":
        weight = _wrap("model.weight", lambda: WeightSpec.exponential(w["a"], w["s"]))
    elif kind == "algebraic":
        weight = _wrap("model.weight", lambda: WeightSpec.algebraic(w["beta"]))
    elif kind == "unit":
        weight = WeightSpec.unit()
    else:
        raise ConfigError(f"model.weight.kind: unknown weight {kind!r}", key="model.weight.kind")
    m = cfg["model"]
    return _wrap("model", lambda: ModelSpec(d=m["d"], gamma=float(m["gamma"]), ell_b=float(m["ell_b"]),
                                            weight=weight))


def _validate(cfg):
    spec = model_spec(cfg)
    g = cfg["grid"]
    if g["r_max"] <= 0:
        raise ConfigError("grid.r_max: must be positive", key="grid.r_max")
    if g["refine_origin"] is not None and g["refine_origin"] < 0:
        raise ConfigError("grid.refine_origin: must be >= 0", key="grid.refine_origin")
    if g["order"] < 2:
        raise ConfigError("grid.order: must be at least 2", key="grid.order")
    if g["n_radial"] >= 8 and g["n_radial"] % g["order"]:
        raise ConfigError("grid.n_radial: must be a multiple of grid.order", key="grid.n_radial")
    if cfg["assemble"]["normalization"] not in ("", "raw", "column-stochastic"):
        raise ConfigError("assemble.normalization: expected 'raw' or 'column-stochastic'",
                          key="assemble.normalization")
    e = cfg["evolve"]
    if e["method"] not in ("rk4", "exponential-euler", "expm"):
        raise ConfigError(f"evolve.method: unknown method {e['method']!r}", key="evolve.method")
    if e["initial"] not in INITIAL_DATA:
        raise ConfigError(f"evolve.initial: expected one of {INITIAL_DATA}", key="evolve.initial")
    if e["g"] not in G_CHOICES:
        raise ConfigError(f"evolve.g: expected one of {G_CHOICES}", key="evolve.g")
    if not 0.0 < e["envelope_c"] < 1.0:
        raise ConfigError("evolve.envelope_c: must lie in (0, 1)", key="evolve.envelope_c")
    if e["dt"] < 0 or e["record_every"] < 1:
        raise ConfigError("evolve.dt / evolve.record_every out of range", key="evolve.dt")
    if e["t_end"] is None:
        e["t_end"] = 100.0 if spec.soft else 8.0
    if e["t_end"] <= 0:
        raise ConfigError("evolve.t_end: must be positive", key="evolve.t_end")
    if e["window"] is None:
        e["window"] = [10.0, 100.0] if spec.soft else [2.0, 8.0]
    win = e["window"]
    if len(win) != 2 or not all(isinstance(x, _num) and not isinstance(x, bool) for x in win) \
            or not 0 <= win[0] < win[1]:
        raise ConfigError("evolve.window: expected [lo, hi] with 0 <= lo < hi", key="evolve.window")
    for a in cfg["resolvent"]["alphas"]:
        if not isinstance(a, _num) or isinstance(a, bool) or a == 0:
            raise ConfigError("resolvent.alphas: nonzero numbers expected", key="resolvent.alphas")
    if g["refine_origin"] is None:
        g["refine_origin"] = 3 if spec.soft else 0
