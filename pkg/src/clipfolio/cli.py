"""Command-line entry point: synth, train, backtest, compare, sweep."""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .algo import (
    ClipSpec,
    CriticHeads,
    TrainData,
    TrainLog,
    prepare_data,
    train_actor_critic,
    train_actor_only,
    train_ppo,
    train_reward_clip,
)
from .backtest import (
    BacktestReport,
    baseline_strategy,
    compare_strategies,
    export_report,
    index_strategy,
    model_strategy,
    monthly_schedule,
    run_backtest,
    write_merged_equity,
)
from .config import RunConfig, load_config, parse_grid
from .data import (
    AssetPanel,
    generate_synthetic,
    load_panel_csv,
    restrict,
    split_panel,
    write_class_map,
    write_panel_csv,
)
from .errors import ClipfolioError, ConfigError, MissingCheckpoint
from .nn import LayerSpec, load_params, save_params


# -- pipeline pieces -------------------------------------------------------

def load_panel(cfg: RunConfig) -> AssetPanel:
    if cfg["data.csv"] is not None:
        return load_panel_csv(cfg.path("data.csv"), cfg.path("data.classes"))
    return generate_synthetic(cfg.synthetic)


def training_panel(cfg: RunConfig, panel: AssetPanel) -> AssetPanel:
    if cfg["train.end"] is not None and cfg["test.start"] is not None:
        panel, _ = split_panel(panel, cfg["train.end"], cfg["test.start"])
    return restrict(panel, cfg["train.start"], cfg["train.end"])


def training_data(cfg: RunConfig, panel: AssetPanel) -> TrainData:
    return prepare_data(training_panel(cfg, panel), cfg["window.length"], cfg["window.use_volume"],
                        cfg["window.return_scale"])


def network_spec(cfg: RunConfig, panel: AssetPanel) -> LayerSpec:
    features = 2 if cfg["window.use_volume"] else 1
    n_in = cfg["window.length"] * panel.n_assets * features
    return LayerSpec((n_in, *cfg["net.hidden"], panel.n_assets), cfg.head)


@dataclass
class Trained:
    spec: LayerSpec
    params: np.ndarray
    log: TrainLog
    critic: CriticHeads | None = None


def train(cfg: RunConfig, panel: AssetPanel, clip: ClipSpec | None = None) -> Trained:
    if not cfg.trainable:
        raise ConfigError(f"model not trainable: {cfg.model}")
    data = training_data(cfg, panel)
    spec = network_spec(cfg, panel)
    common = dict(mixing=cfg.mixing, adam=cfg.adam)
    if cfg.model in ("actor_only", "reward_clip"):
        episodic = dict(episode_length=cfg["episode.length"], action_period=cfg["episode.action_period"])
        if cfg.model == "actor_only":
            params, log = train_actor_only(data, spec, cfg["train.episodes"], cfg["train.epochs"], cfg.seed,
                                           **common, **episodic)
        else:
            params, log = train_reward_clip(data, spec, clip or cfg.clip, cfg["train.episodes"],
                                            cfg["train.epochs"], cfg.seed, **common, **episodic)
        return Trained(spec, params, log)
    trainer = train_ppo if cfg.model == "ppo" else train_actor_critic
    params, heads, log = trainer(data, spec, cfg.ppo, cfg.seed, critic_hidden=cfg["critic.hidden"], **common)
    return Trained(spec, params, log, heads)


def strategy_for(cfg: RunConfig, panel: AssetPanel, spec: LayerSpec | None = None,
                 params: np.ndarray | None = None, name: str | None = None):
    name = name or cfg.name
    if cfg.trainable:
        return model_strategy(name, params, spec, cfg["window.length"], cfg["window.use_volume"],
                              cfg["window.return_scale"])
    if cfg.model.startswith("index:"):
        return index_strategy(panel, cfg.model.split(":", 1)[1])
    return baseline_strategy(cfg.model)


def schedule_for(cfg: RunConfig, panel: AssetPanel):
    start = cfg["test.start"]
    if start is None:
        start = panel.dates[min(cfg["window.length"], panel.n_days - 1)]
    else:
        # first trading day on or after the requested start
        start = panel.dates[np.searchsorted(panel.dates, np.datetime64(start, "D"))]
    return monthly_schedule(panel, start, cfg["test.end"])


def backtest(cfg: RunConfig, panel: AssetPanel, strategy) -> BacktestReport:
    return run_backtest(strategy, panel, schedule_for(cfg, panel))


def write_training(cfg: RunConfig, trained: Trained, out: Path, name: str | None = None) -> list[Path]:
    name = name or cfg.name
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / f"{name}.ckpt", out / f"trainlog_{name}.csv"]
    save_params(paths[0], trained.spec, trained.params)
    trained.log.to_csv(paths[1], wall_clock=cfg["log.wall_clock"])
    if trained.critic is not None:
        paths.append(out / f"{name}_critic.ckpt")
        save_params(paths[-1], trained.critic.spec, trained.critic.params)
    return paths


def _out_dir(cfg: RunConfig, out) -> Path:
    if out is not None:
        return Path(out)
    if cfg.path("out") is not None:
        return cfg.path("out")
    raise ConfigError("no output directory: pass --out or set 'out' in the config")


# -- commands --------------------------------------------------------------

def cmd_synth(cfg: RunConfig, out=None) -> list[Path]:
    if cfg.synthetic is None:
        raise ConfigError("synth requires synth.n_assets")
    out = _out_dir(cfg, out)
    out.mkdir(parents=True, exist_ok=True)
    panel = generate_synthetic(cfg.synthetic)
    paths = [out / "panel.csv", out / "classes.csv"]
    write_panel_csv(panel, paths[0])
    write_class_map(panel, paths[1])
    return paths


def cmd_train(cfg: RunConfig, out=None) -> list[Path]:
    if not cfg.trainable:
        raise ConfigError(f"model not trainable: {cfg.model}")
    panel = load_panel(cfg)
    return write_training(cfg, train(cfg, panel), _out_dir(cfg, out))


def _model_strategy_from_checkpoint(cfg: RunConfig, panel: AssetPanel, checkpoint):
    ckpt = Path(checkpoint) if checkpoint is not None else cfg.path("checkpoint")
    if ckpt is None:
        raise MissingCheckpoint(f"model {cfg.model} needs --checkpoint")
    if not ckpt.exists():
        raise MissingCheckpoint(f"checkpoint {ckpt} not found")
    spec, params = load_params(ckpt, expect=network_spec(cfg, panel))
    return strategy_for(cfg, panel, spec, params)


def cmd_backtest(cfg: RunConfig, checkpoint=None, out=None) -> BacktestReport:
    panel = load_panel(cfg)
    if cfg.trainable:
        strategy = _model_strategy_from_checkpoint(cfg, panel, checkpoint)
    else:
        strategy = strategy_for(cfg, panel)
    report = backtest(cfg, panel, strategy)
    out = _out_dir(cfg, out)
    export_report(report, out)
    compare_strategies([report]).to_csv(out / "comparison.csv")
    return report


def _finish_comparison(reports, out: Path) -> None:
    table = compare_strategies(reports)
    out.mkdir(parents=True, exist_ok=True)
    for r in reports:
        export_report(r, out)
    table.to_csv(out / "comparison.csv")
    write_merged_equity(reports, out / "equity_all.csv")


def cmd_compare(cfgs: list[RunConfig], out=None) -> list[BacktestReport]:
    """Backtest every config; trainable models use their ``checkpoint`` or are trained here."""
    if not cfgs:
        raise ConfigError("compare needs at least one config")
    out = _out_dir(cfgs[0], out)
    reports = []
    for cfg in cfgs:
        panel = load_panel(cfg)
        if cfg.trainable and cfg.path("checkpoint") is not None:
            strategy = _model_strategy_from_checkpoint(cfg, panel, None)
        elif cfg.trainable:
            trained = train(cfg, panel)
            write_training(cfg, trained, out)
            strategy = strategy_for(cfg, panel, trained.spec, trained.params)
        else:
            strategy = strategy_for(cfg, panel)
        reports.append(backtest(cfg, panel, strategy))
    _finish_comparison(reports, out)
    return reports


def cmd_sweep(cfg: RunConfig, grid=None, out=None) -> list[BacktestReport]:
    """Train and backtest one reward-clipping run per (lower, upper) cell."""
    if cfg.model != "reward_clip":
        raise ConfigError("sweep requires model = reward_clip")
    cells = cfg["sweep.grid"] if grid is None else grid
    if not cells:
        raise ConfigError("sweep grid is empty")
    clips = [ClipSpec(lo, hi, cfg["clip.mode"], cfg["clip.scale"]) for lo, hi in cells]
    out = _out_dir(cfg, out)
    panel = load_panel(cfg)
    runs = [(c.label, cfg, c) for c in clips]
    if cfg["sweep.include_actor_only"]:
        runs.insert(0, ("actor_only", cfg.with_values(model="actor_only"), None))
    reports = []
    for name, run_cfg, clip in runs:
        trained = train(run_cfg, panel, clip)
        write_training(run_cfg, trained, out, name)
        reports.append(backtest(run_cfg, panel, strategy_for(run_cfg, panel, trained.spec, trained.params, name)))
    _finish_comparison(reports, out)
    return reports


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clipfolio", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [("synth", "write a synthetic panel CSV and class map"),
                           ("train", "train a model; write checkpoint and training log"),
                           ("backtest", "backtest one strategy; write report CSVs"),
                           ("compare", "backtest several configs into one comparison"),
                           ("sweep", "reward-clipping bound study")]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, action="append" if name == "compare" else "store")
        p.add_argument("--out")
        p.add_argument("--seed", type=int)
        if name == "backtest":
            p.add_argument("--checkpoint")
        if name == "sweep":
            p.add_argument("--grid", help="lower:upper cells, e.g. --grid='-0.4:0.4; none:0.4'")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "compare":
            cmd_compare([load_config(c, args.seed) for c in args.config], args.out)
            return 0
        cfg = load_config(args.config, args.seed)
        if args.command == "synth":
            cmd_synth(cfg, args.out)
        elif args.command == "train":
            cmd_train(cfg, args.out)
        elif args.command == "backtest":
            cmd_backtest(cfg, args.checkpoint, args.out)
        elif args.command == "sweep":
            grid = parse_grid(args.grid) if args.grid else None
            cmd_sweep(cfg, grid, args.out)
    except (ClipfolioError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
