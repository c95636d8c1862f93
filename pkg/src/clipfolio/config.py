"""Flat ``key = value`` run configuration with dotted keys.

Unknown keys are errors. ``#`` starts a comment. Relative paths resolve
against the config file's directory.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

from .algo import AdamConfig, ClipSpec, PPOConfig
from .data import Regime, SyntheticSpec
from .errors import ConfigError, InvalidSpec

TRAINABLE = ("actor_only", "actor_critic", "ppo", "reward_clip")
BASELINES = ("equal_weight", "sixty_forty", "all_weather")


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _opt_float(s: str) -> float | None:
    return None if s.strip().lower() in ("", "none") else float(s)


def _floats(s: str) -> list[float]:
    return [float(x) for x in s.split(",")]


def _ints(s: str) -> tuple[int, ...]:
    return tuple(int(x) for x in s.split(",") if x.strip())


def _strs(s: str) -> list[str]:
    return [x.strip() for x in s.split(",")]


def _scalar_or_list(s: str):
    vals = _floats(s)
    return vals[0] if len(vals) == 1 else vals


def _regimes(s: str) -> list[Regime]:
    out = []
    for chunk in filter(None, (c.strip() for c in s.split(";"))):
        parts = chunk.split(":")
        if len(parts) != 3:
            raise ValueError(f"regime {chunk!r} is not start:drift_mult:vol_mult")
        out.append(Regime(int(parts[0]), _scalar_or_list(parts[1]), _scalar_or_list(parts[2])))
    return out


def parse_grid(s: str) -> list[tuple[float | None, float | None]]:
    """``lower:upper; lower:upper`` with ``none`` for an absent bound."""
    cells = []
    for chunk in filter(None, (c.strip() for c in s.split(";"))):
        parts = chunk.split(":")
        if len(parts) != 2:
            raise ValueError(f"grid cell {chunk!r} is not lower:upper")
        cells.append((_opt_float(parts[0]), _opt_float(parts[1])))
    return cells


# key -> (parser, default)
KEYS: dict[str, tuple[Callable[[str], Any], Any]] = {
    "seed": (int, None),
    "model": (str, None),
    "name": (str, None),
    "checkpoint": (str, None),
    "out": (str, None),
    "data.csv": (str, None),
    "data.classes": (str, None),
    "synth.n_assets": (int, None),
    "synth.n_days": (int, 1000),
    "synth.drift": (_scalar_or_list, 0.0),
    "synth.vol": (_scalar_or_list, 0.01),
    "synth.classes": (_strs, None),
    "synth.names": (_strs, None),
    "synth.regimes": (_regimes, []),
    "synth.start_date": (str, "2010-01-01"),
    "synth.seed": (int, None),
    "window.length": (int, 20),
    "window.use_volume": (_bool, False),
    "window.return_scale": (float, 100.0),
    "net.hidden": (_ints, (64, 32)),
    "critic.hidden": (_ints, (64, 32)),
    "train.start": (str, None),
    "train.end": (str, None),
    "test.start": (str, None),
    "test.end": (str, None),
    "train.epochs": (int, 500),
    "train.episodes": (int, 8),
    "episode.length": (int, 252),
    "episode.action_period": (int, 21),
    "mix.return": (float, 1.0),
    "mix.sharpe": (float, 0.2),
    "mix.antibias": (float, 0.05),
    "adam.lr": (float, 1e-3),
    "adam.beta1": (float, 0.9),
    "adam.beta2": (float, 0.999),
    "adam.eps": (float, 1e-8),
    "clip.lower": (_opt_float, -0.4),
    "clip.upper": (_opt_float, None),
    "clip.mode": (str, "value"),
    "clip.scale": (float, 100.0),
    "ppo.epsilon": (float, 0.2),
    "ppo.c1": (float, 0.5),
    "ppo.c2": (float, 0.01),
    "ppo.epochs": (int, 4),
    "ppo.minibatch": (int, 32),
    "ppo.actors": (int, 4),
    "ppo.horizon": (int, 252),
    "ppo.gamma": (float, 0.99),
    "ppo.iterations": (int, 200),
    "ppo.normalize_advantages": (_bool, True),
    "sweep.grid": (parse_grid, []),
    "sweep.include_actor_only": (_bool, False),
    "log.wall_clock": (_bool, False),
}


@dataclass(frozen=True)
class RunConfig:
    seed: int
    model: str
    values: dict = field(default_factory=dict, compare=False)
    base_dir: Path = Path(".")

    def __getitem__(self, key: str):
        return self.values[key]

    @property
    def trainable(self) -> bool:
        return self.model in TRAINABLE

    @property
    def head(self) -> str:
        return "softmax" if self.model in ("actor_only", "reward_clip") else "softplus"

    @property
    def name(self) -> str:
        if self.values.get("name"):
            return self.values["name"]
        if self.model == "reward_clip":
            return self.clip.label
        if self.model.startswith("index:"):
            return self.model.split(":", 1)[1]
        return self.model

    def path(self, key: str) -> Path | None:
        v = self.values.get(key)
        if v is None:
            return None
        p = Path(v)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def mixing(self) -> tuple[float, float, float]:
        return (self["mix.return"], self["mix.sharpe"], self["mix.antibias"])

    @property
    def adam(self) -> AdamConfig:
        return AdamConfig(self["adam.lr"], self["adam.beta1"], self["adam.beta2"], self["adam.eps"])

    @property
    def clip(self) -> ClipSpec:
        return ClipSpec(self["clip.lower"], self["clip.upper"], self["clip.mode"], self["clip.scale"])

    @property
    def ppo(self) -> PPOConfig:
        return PPOConfig(self["ppo.epsilon"], self["ppo.c1"], self["ppo.c2"], self["ppo.epochs"],
                         self["ppo.minibatch"], self["ppo.actors"], self["ppo.horizon"], self["ppo.gamma"],
                         self["ppo.iterations"], self["episode.action_period"],
                         self["ppo.normalize_advantages"])

    @property
    def synthetic(self) -> SyntheticSpec | None:
        if self.values.get("synth.n_assets") is None:
            return None
        seed = self["synth.seed"] if self["synth.seed"] is not None else self.seed
        return SyntheticSpec(self["synth.n_assets"], self["synth.n_days"], self["synth.drift"],
                             self["synth.vol"], tuple(self["synth.regimes"]), seed,
                             self["synth.classes"], self["synth.names"], self["synth.start_date"])

    def with_values(self, **updates) -> RunConfig:
        vals = dict(self.values)
        for k, v in updates.items():
            vals[k.replace("__", ".")] = v
        return replace(self, seed=vals["seed"], model=vals["model"], values=vals)


def parse_text(text: str) -> dict[str, str]:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def build_config(raw: dict[str, str], base_dir: Path = Path("."), seed: int | None = None) -> RunConfig:
    values: dict[str, Any] = {}
    for key, (parse, default) in KEYS.items():
        if key in raw:
            try:
                values[key] = parse(raw[key])
            except (ValueError, InvalidSpec) as exc:
                raise ConfigError(f"bad value for {key}: {exc}") from None
        else:
            values[key] = default
    if seed is not None:
        values["seed"] = seed
    if values["seed"] is None:
        raise ConfigError("seed is mandatory")
    model = values["model"]
    if model is None:
        raise ConfigError("model is mandatory")
    if not (model in TRAINABLE or model in BASELINES or (model.startswith("index:") and len(model) > 6)):
        raise ConfigError(f"unknown model {model!r}")
    if values["data.csv"] is None and values["synth.n_assets"] is None:
        raise ConfigError("set data.csv (with data.classes) or synth.n_assets")
    if values["data.csv"] is not None and values["data.classes"] is None:
        raise ConfigError("data.csv needs data.classes")
    cfg = RunConfig(values["seed"], model, values, Path(base_dir))
    try:
        cfg.clip, cfg.ppo  # validate eagerly
    except InvalidSpec as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path, seed: int | None = None) -> RunConfig:
    path = Path(path)
    return build_config(parse_text(path.read_text()), path.parent, seed)
