"""Experiment configuration: INI-style sectioned key=value files.

Angles in config files are degrees, rates bits/s/Hz, the normalized SNR
is given in dB, and distances/densities use d0 units; everything is
converted exactly once here.
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, replace

from scdp.analytics import ApproximationConfig, RatePolicy
from scdp.content import ContentConfig
from scdp.geometry import NetworkConfig, PolarPoint, db_to_linear, layout_linear


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


@dataclass(frozen=True)
class RateSettings:
    r_s: float
    mode: str = "fixed"  # fixed | optimize
    r_e: float = 1.0
    r_e_list: tuple[float, ...] | None = None
    r_e_cm: float | None = None


@dataclass(frozen=True)
class SimulationSettings:
    seed: int = 1
    n_trials: int = 100_000
    window_radius: float | None = None
    workers: int = 1


@dataclass(frozen=True)
class SweepSettings:
    variable: str
    start: float
    stop: float
    points: int
    task: str = "analyze"
    variable2: str | None = None
    start2: float = 0.0
    stop2: float = 0.0
    points2: int = 0

    def values(self):
        step = (self.stop - self.start) / (self.points - 1) if self.points > 1 else 0.0
        return [self.start + i * step for i in range(self.points)]

    def values2(self):
        if self.variable2 is None:
            return []
        step = (self.stop2 - self.start2) / (self.points2 - 1) if self.points2 > 1 else 0.0
        return [self.start2 + i * step for i in range(self.points2)]


#: sweepable scalar variables and where they live
SWEEP_VARIABLES = ("r_e", "r_s", "x_u", "lambda_e", "gamma", "phi", "delta", "rho_db")


@dataclass(frozen=True)
class ExperimentConfig:
    k: int | None
    d: float | None
    x_u: float | None
    sbs: tuple[tuple[float, float], ...] | None  # (r, theta_rad) pairs
    alpha: float
    rho_db: float
    lambda_e: float
    content: ContentConfig
    rates: RateSettings
    eve_model: str
    approx: ApproximationConfig
    simulation: SimulationSettings
    sweep: SweepSettings | None
    config_hash: str = ""

    def network(self) -> NetworkConfig:
        rho = db_to_linear(self.rho_db)
        if self.sbs is not None:
            points = tuple(PolarPoint(r, th) for r, th in self.sbs)
        else:
            points = layout_linear(self.k, self.d, self.x_u)
        return NetworkConfig(points, alpha=self.alpha, rho=rho, lambda_e=self.lambda_e)

    def policies(self) -> dict[str, RatePolicy]:
        r = self.rates
        return {
            "JT": RatePolicy(r.r_s, r.r_e),
            "OT": RatePolicy(r.r_s, r.r_e_list if r.r_e_list is not None else r.r_e),
            "CM": RatePolicy(r.r_s, r.r_e_cm if r.r_e_cm is not None else r.r_e),
        }


def apply_sweep_value(cfg: ExperimentConfig, variable: str, value: float) -> ExperimentConfig:
    """New config with one swept variable replaced."""
    if variable == "r_e":
        return replace(
            cfg, rates=replace(cfg.rates, r_e=value, r_e_list=None, r_e_cm=None)
        )
    if variable == "r_s":
        return replace(cfg, rates=replace(cfg.rates, r_s=value))
    if variable == "x_u":
        if cfg.sbs is not None:
            raise ConfigError("[sweep] variable x_u needs the (k, d, x_u) layout")
        return replace(cfg, x_u=value)
    if variable == "lambda_e":
        return replace(cfg, lambda_e=value)
    if variable == "rho_db":
        return replace(cfg, rho_db=value)
    if variable in ("gamma", "phi", "delta"):
        return replace(cfg, content=replace(cfg.content, **{variable: value}))
    if variable.startswith("r_e_"):
        idx = int(variable[4:]) - 1
        k = cfg.k if cfg.k is not None else len(cfg.sbs)
        if not 0 <= idx < k:
            raise ConfigError(f"[sweep] variable {variable} out of range for K={k}")
        base = cfg.rates.r_e_list or tuple([cfg.rates.r_e] * k)
        lst = list(base)
        lst[idx] = value
        return replace(cfg, rates=replace(cfg.rates, r_e_list=tuple(lst)))
    raise ConfigError(f"[sweep] unknown variable {variable!r}")


def _section(parser: configparser.ConfigParser, name: str) -> configparser.SectionProxy:
    if not parser.has_section(name):
        raise ConfigError(f"missing required section [{name}]")
    return parser[name]


def _get(section, key, cast, default=None, required=False):
    raw = section.get(key)
    if raw is None or raw == "":
        if required:
            raise ConfigError(f"[{section.name}] missing required key {key!r}")
        return default
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section.name}] {key} = {raw!r}: {exc}") from exc


def _parse_sbs(raw: str) -> tuple[tuple[float, float], ...]:
    out = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            r_txt, deg_txt = chunk.split(":")
            out.append((float(r_txt), math.radians(float(deg_txt))))
        except ValueError as exc:
            raise ConfigError(f"bad SBS entry {chunk!r} (want r:angle_deg)") from exc
    if not out:
        raise ConfigError("empty SBS list")
    return tuple(out)


def _parse_rate_list(raw: str) -> tuple[float, ...]:
    return tuple(float(x) for x in raw.split(",") if x.strip())


def parse_config_text(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc

    net = _section(parser, "network")
    sbs_raw = net.get("sbs")
    if sbs_raw:
        sbs = _parse_sbs(sbs_raw)
        k = d = x_u = None
    else:
        sbs = None
        k = _get(net, "k", int, required=True)
        d = _get(net, "d", float, 1.0)
        x_u = _get(net, "x_u", float, 0.0)
    alpha = _get(net, "alpha", float, 4.0)
    rho_db = _get(net, "rho_db", float, 10.0)
    lambda_e = _get(net, "lambda_e", float, required=True)

    con = _section(parser, "content")
    content = ContentConfig(
        n_files=_get(con, "n_files", int, 100),
        cache_size=_get(con, "cache_size", int, 20),
        gamma=_get(con, "gamma", float, required=True),
        phi=_get(con, "phi", float, 0.5),
        delta=_get(con, "delta", float, 2.0),
    )

    rat = _section(parser, "rates")
    mode = _get(rat, "mode", str, "fixed").lower()
    if mode not in ("fixed", "optimize"):
        raise ConfigError(f"[rates] mode must be fixed|optimize, got {mode!r}")
    rates = RateSettings(
        r_s=_get(rat, "r_s", float, required=True),
        mode=mode,
        r_e=_get(rat, "r_e", float, 1.0),
        r_e_list=_get(rat, "r_e_list", _parse_rate_list),
        r_e_cm=_get(rat, "r_e_cm", float),
    )

    model = parser["model"] if parser.has_section("model") else {}
    eve_model = str(model.get("eve_model", "nce")).strip().upper()
    if eve_model not in ("NCE", "CE"):
        raise ConfigError(f"[model] eve_model must be nce|ce, got {eve_model!r}")
    m_terms = int(model.get("m_terms", 5))

    sim_sec = parser["simulation"] if parser.has_section("simulation") else {}
    simulation = SimulationSettings(
        seed=int(sim_sec.get("seed", 1)),
        n_trials=int(sim_sec.get("n_trials", 100_000)),
        window_radius=(
            float(sim_sec["window_radius"]) if sim_sec.get("window_radius") else None
        ),
        workers=int(sim_sec.get("workers", 1)),
    )

    sweep = None
    if parser.has_section("sweep"):
        sw = parser["sweep"]
        variable = _get(sw, "variable", str, required=True)
        if variable not in SWEEP_VARIABLES and not variable.startswith("r_e_"):
            raise ConfigError(f"[sweep] unknown variable {variable!r}")
        variable2 = sw.get("variable2") or None
        if variable2 and variable2 not in SWEEP_VARIABLES and not variable2.startswith("r_e_"):
            raise ConfigError(f"[sweep] unknown variable {variable2!r}")
        sweep = SweepSettings(
            variable=variable,
            start=_get(sw, "start", float, required=True),
            stop=_get(sw, "stop", float, required=True),
            points=_get(sw, "points", int, required=True),
            task=str(sw.get("task", "analyze")).strip(),
            variable2=variable2,
            start2=float(sw.get("start2", 0.0)),
            stop2=float(sw.get("stop2", 0.0)),
            points2=int(sw.get("points2", 0)),
        )
        if sweep.points < 1 or (variable2 and sweep.points2 < 1):
            raise ConfigError("[sweep] points must be >= 1")

    cfg = ExperimentConfig(
        k=k,
        d=d,
        x_u=x_u,
        sbs=sbs,
        alpha=alpha,
        rho_db=rho_db,
        lambda_e=lambda_e,
        content=content,
        rates=rates,
        eve_model=eve_model,
        approx=ApproximationConfig(m_terms=m_terms),
        simulation=simulation,
        sweep=sweep,
        config_hash=hashlib.sha256(text.encode()).hexdigest()[:16],
    )
    try:
        cfg.network()
        cfg.content.validate_capacity(cfg.k if cfg.k is not None else len(cfg.sbs))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)
