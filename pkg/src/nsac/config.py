"""Run configuration: a flat TOML document with a ``[params]`` table.

Default table::

    n = 256                  # grid cells
    N = 32                   # Galerkin modes and regularization level (N <= n/4)
    dt = 1e-4
    T = 0.05
    picard_tol = 1e-10
    picard_max_iters = 8
    blowup_limit = 1e6       # stop once J1 + sqrt(J2) + sqrt(J3) exceeds this
    snapshot_every = 10      # steps between snapshot files
    initial = "tanh-interface"   # profile name or path to a CSV file
    output_dir = "out"
    seed = 0
    integrator = "rk4"       # or "gauss2"

    [params]
    A = 1.0
    gamma = 2.0
    nu = 1.0
    lambda = 0.0
    q = 4.0
    eps0 = 0.5
    # rho_floor = ...        # defaults to 1/N

Unknown keys are rejected.
"""
from dataclasses import asdict, dataclass, field, replace
import math

try:
    import tomllib as tomli
except ImportError:  # Python < 3.11
    import tomli
import tomli_w

from .core import Params
from .errors import ConfigError, InvalidParamsError
from .galerkin import INTEGRATORS


@dataclass(frozen=True)
class RunConfig:
    params: Params = field(default_factory=Params)
    n: int = 256
    N: int = 32
    dt: float = 1e-4
    T: float = 0.05
    picard_tol: float = 1e-10
    picard_max_iters: int = 8
    blowup_limit: float = 1e6
    snapshot_every: int = 10
    initial: str = "tanh-interface"
    output_dir: str = "out"
    seed: int = 0
    integrator: str = "rk4"

    @property
    def steps(self):
        return int(round(self.T / self.dt))


_INT_KEYS = ("n", "N", "picard_max_iters", "snapshot_every", "seed")
_FLOAT_KEYS = ("dt", "T", "picard_tol", "blowup_limit")
_STR_KEYS = ("initial", "output_dir", "integrator")
_PARAM_KEYS = {"A": "A", "gamma": "gamma", "nu": "nu", "lambda": "lam", "q": "q",
               "eps0": "eps0", "rho_floor": "rho_floor"}


def _as_int(key, v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(key, f"expected an integer, got {v!r}")
    return v


def _as_float(key, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, f"expected a number, got {v!r}")
    v = float(v)
    if math.isnan(v):
        raise ConfigError(key, "NaN is not allowed")
    return v


def _params_from(table):
    if not isinstance(table, dict):
        raise ConfigError("params", "expected a table")
    kwargs = {}
    for key, value in table.items():
        if key not in _PARAM_KEYS:
            raise ConfigError(f"params.{key}", "unknown key")
        kwargs[_PARAM_KEYS[key]] = _as_float(f"params.{key}", value)
    base = Params()
    merged = {k: kwargs.get(k, getattr(base, k)) for k in _PARAM_KEYS.values()}
    checks = [
        ("A", merged["A"] > 0, "must be > 0"),
        ("gamma", merged["gamma"] > 1, "must be > 1"),
        ("nu", merged["nu"] > 0, "must be > 0"),
        ("lambda", 2 * merged["nu"] + 3 * merged["lam"] >= 0, "need 2*nu + 3*lambda >= 0"),
        ("q", 3 < merged["q"] < 6, "must lie in (3, 6)"),
        ("eps0", 0 < merged["eps0"] < 1, "must lie in (0, 1)"),
        ("rho_floor", merged["rho_floor"] is None or merged["rho_floor"] > 0, "must be > 0"),
    ]
    for key, ok, msg in checks:
        if not ok:
            raise ConfigError(f"params.{key}", msg)
    try:
        return Params(**merged)
    except InvalidParamsError as exc:
        raise ConfigError("params", str(exc)) from exc


def config_from_dict(doc):
    kwargs = {}
    for key, value in doc.items():
        if key == "params":
            kwargs["params"] = _params_from(value)
        elif key in _INT_KEYS:
            kwargs[key] = _as_int(key, value)
        elif key in _FLOAT_KEYS:
            kwargs[key] = _as_float(key, value)
        elif key in _STR_KEYS:
            if not isinstance(value, str):
                raise ConfigError(key, f"expected a string, got {value!r}")
            kwargs[key] = value
        else:
            raise ConfigError(key, "unknown key")
    return validate(RunConfig(**kwargs))


def validate(cfg):
    if cfg.n < 8:
        raise ConfigError("n", "need at least 8 cells")
    if cfg.N < 1:
        raise ConfigError("N", "need at least one mode")
    if 4 * cfg.N > cfg.n:
        raise ConfigError("N", f"N={cfg.N} violates N <= n/4 with n={cfg.n}")
    if not cfg.dt > 0:
        raise ConfigError("dt", "must be > 0")
    if not cfg.T > cfg.dt:
        raise ConfigError("T", "must exceed dt")
    if not cfg.picard_tol > 0:
        raise ConfigError("picard_tol", "must be > 0")
    if cfg.picard_max_iters < 1:
        raise ConfigError("picard_max_iters", "must be >= 1")
    if cfg.snapshot_every < 1:
        raise ConfigError("snapshot_every", "must be >= 1")
    if not cfg.blowup_limit >= 0:
        raise ConfigError("blowup_limit", "must be >= 0")
    if cfg.integrator not in INTEGRATORS:
        raise ConfigError("integrator", f"choose from {sorted(INTEGRATORS)}")
    return cfg


def parse_config(text):
    """Parse and validate a TOML run configuration."""
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError("<document>", f"malformed TOML: {exc}") from exc
    return config_from_dict(doc)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def config_to_dict(cfg):
    doc = asdict(cfg)
    p = doc.pop("params")
    p["lambda"] = p.pop("lam")
    if p["rho_floor"] is None:
        del p["rho_floor"]
    doc["params"] = p
    return doc


def serialize(cfg):
    return tomli_w.dumps(config_to_dict(cfg))


def with_overrides(cfg, **changes):
    return validate(replace(cfg, **changes))
