"""Experiment configuration: a sectioned ``key = value`` text format.

Example::

    [experiment]
    kind = fclt_gchp

    [model]
    lambda0 = 1.0
    alpha = 0.5
    beta = 1.0
    P =
        0.7 0.3
        0.4 0.6
    a = 1.0 -1.0

    [run]
    T = 2000
    n_paths = 2000
    seed = 12345

Matrices are whitespace-separated rows on indented continuation lines;
vectors fit on one line. Keys are case-sensitive.
"""
from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from ..errors import ConfigError

KINDS = ("lln_hp", "fclt_hp", "lln_gchp", "fclt_gchp", "params", "finance_opt", "insurance_opt", "ruin")

Matrix = tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class ModelSection:
    lambda0: float | None = None
    alpha: float = 0.0
    beta: float = 1.0
    # mark chain: either P and a, or the two-state shortcut delta/p/p_prime
    P: Matrix | None = None
    a: tuple[float, ...] | None = None
    delta: float | None = None
    p: float | None = None
    p_prime: float | None = None
    initial_state: int | None = None
    s0: float = 0.0
    # diffusion-level specification, used instead of a chain
    drift: float | None = None
    sigma_bar: float | None = None
    # insurance
    u: float | None = None
    c: float | None = None


@dataclass(frozen=True)
class MarketSection:
    r: float | None = None
    a: float | None = None
    b: float | None = None
    x0: float = 1.0


@dataclass(frozen=True)
class RunSection:
    T: float | None = None
    n_steps: int | None = None
    dt: float | None = None
    n_paths: int = 1
    seed: int = 0
    pi_grid: tuple[float, ...] | None = None
    pi: float | None = None
    level: float = 0.01
    mode: str = "diffusion"


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    model: ModelSection = field(default_factory=ModelSection)
    market: MarketSection = field(default_factory=MarketSection)
    run: RunSection = field(default_factory=RunSection)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, run=replace(self.run, seed=seed))

    def with_kind(self, kind: str) -> "ExperimentConfig":
        return replace(self, kind=kind)

    @property
    def has_chain(self) -> bool:
        return self.model.P is not None or self.model.delta is not None


_SECTIONS = {"model": ModelSection, "market": MarketSection, "run": RunSection}


def _parse_value(name: str, typ: str, raw: str):
    raw = raw.strip()
    try:
        if "Matrix" in typ:
            rows = [line.split() for line in raw.splitlines() if line.strip()]
            return tuple(tuple(float(v) for v in row) for row in rows)
        if "tuple" in typ:
            return tuple(float(v) for v in raw.replace(",", " ").split())
        if typ.startswith("int"):
            return int(raw)
        if typ.startswith("float"):
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot parse {raw!r} ({exc})") from None


def loads(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    if not cp.has_option("experiment", "kind"):
        raise ConfigError("experiment.kind: missing")
    kind = cp.get("experiment", "kind").strip()
    unknown = set(cp.sections()) - set(_SECTIONS) - {"experiment"}
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    sections = {}
    for sec, cls in _SECTIONS.items():
        kw = {}
        if cp.has_section(sec):
            known = {f.name: f for f in fields(cls)}
            for key, raw in cp.items(sec):
                if key not in known:
                    raise ConfigError(f"{sec}.{key}: unknown key")
                kw[key] = _parse_value(f"{sec}.{key}", str(known[key].type), raw)
        sections[sec] = cls(**kw)
    cfg = ExperimentConfig(kind=kind, **sections)
    validate(cfg)
    return cfg


def load(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return loads(text)


def _fmt(v) -> str:
    if isinstance(v, tuple) and v and isinstance(v[0], tuple):
        return "\n" + "\n".join(" ".join(repr(float(x)) for x in row) for row in v)
    if isinstance(v, tuple):
        return " ".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dumps(cfg: ExperimentConfig) -> str:
    buf = io.StringIO()
    buf.write(f"[experiment]\nkind = {cfg.kind}\n")
    for sec in _SECTIONS:
        obj = getattr(cfg, sec)
        lines = [f"{f.name} = {_fmt(getattr(obj, f.name))}" for f in fields(obj) if getattr(obj, f.name) is not None]
        if lines:
            buf.write(f"\n[{sec}]\n")
            for line in lines:
                buf.write(line.replace("\n", "\n    ") + "\n")
    return buf.getvalue()


def _require(cfg: ExperimentConfig, *names: str):
    for name in names:
        sec, key = name.split(".")
        if getattr(getattr(cfg, sec), key) is None:
            raise ConfigError(f"{name}: required for kind={cfg.kind}")


def _positive(name: str, v):
    if v is not None and not v > 0:
        raise ConfigError(f"{name}: must be positive, got {v}")


def validate(cfg: ExperimentConfig) -> None:
    """Raise :class:`ConfigError` naming the first offending field."""
    if cfg.kind not in KINDS:
        raise ConfigError(f"experiment.kind: {cfg.kind!r} not one of {', '.join(KINDS)}")
    m, mk, run = cfg.model, cfg.market, cfg.run
    _positive("model.lambda0", m.lambda0)
    _positive("model.beta", m.beta)
    if m.alpha < 0:
        raise ConfigError(f"model.alpha: must be non-negative, got {m.alpha}")
    if m.alpha / m.beta >= 1:
        raise ConfigError(f"model.alpha: branching ratio alpha/beta = {m.alpha / m.beta} must be < 1")
    if m.P is not None:
        n = len(m.P)
        if any(len(row) != n for row in m.P):
            raise ConfigError("model.P: must be square")
        if m.a is None or len(m.a) != n:
            raise ConfigError(f"model.a: need {n} mark values to match model.P")
    if m.delta is not None:
        if m.P is not None:
            raise ConfigError("model.delta: give either P/a or delta/p/p_prime, not both")
        if m.p is None or m.p_prime is None:
            raise ConfigError("model.p: delta requires both p and p_prime")
    _positive("run.T", run.T)
    _positive("run.dt", run.dt)
    _positive("run.n_steps", run.n_steps)
    _positive("run.n_paths", run.n_paths)
    _positive("market.x0", mk.x0)
    _positive("market.b", mk.b)
    _positive("model.u", m.u)
    if not 0 < run.level < 1:
        raise ConfigError(f"run.level: must lie in (0, 1), got {run.level}")
    if run.mode not in ("diffusion", "jump"):
        raise ConfigError(f"run.mode: must be 'diffusion' or 'jump', got {run.mode!r}")

    diffusion_level = m.drift is not None or m.sigma_bar is not None
    if diffusion_level and (m.drift is None or m.sigma_bar is None):
        raise ConfigError("model.sigma_bar: drift and sigma_bar must be given together")
    kind = cfg.kind
    if kind in ("lln_hp", "fclt_hp", "lln_gchp", "fclt_gchp"):
        _require(cfg, "model.lambda0", "run.T")
    if kind in ("lln_gchp", "fclt_gchp", "params") and not cfg.has_chain:
        raise ConfigError(f"model.P: a mark chain is required for kind={kind}")
    if kind == "params":
        _require(cfg, "model.lambda0")
    if kind in ("finance_opt", "insurance_opt", "ruin") and not diffusion_level:
        if not cfg.has_chain:
            raise ConfigError(f"model.P: kind={kind} needs a chain or model.drift/model.sigma_bar")
        _require(cfg, "model.lambda0")
    if kind == "finance_opt":
        _require(cfg, "market.r", "run.T", "run.pi_grid")
        if not cfg.run.pi_grid:
            raise ConfigError("run.pi_grid: must be non-empty")
    if kind in ("insurance_opt", "ruin"):
        _require(cfg, "model.u", "model.c", "market.r", "market.a", "market.b")
    if kind == "ruin":
        _require(cfg, "run.T", "run.n_steps")
        if run.mode == "jump" and not cfg.has_chain:
            raise ConfigError("run.mode: jump mode needs a claim chain (model.P or model.delta)")
