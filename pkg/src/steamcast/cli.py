"""Batch command-line entry point.

Subcommands compose into a full experiment:

    steamcast gen-data   --output runs        # synthetic CSV
    steamcast preprocess --output runs        # scaler + PCA + splits
    steamcast train      --output runs        # one variant, loss curves
    steamcast analyze fisher  --output runs   # rank / spectrum / eff-dim
    steamcast analyze fourier --output runs   # coefficient clouds

Configuration is a flat JSON object of dotted keys (see DEFAULTS);
unknown keys are rejected.  Every command is deterministic given its
config: numeric artifacts are byte-identical across reruns.  Wall
times and other non-reproducible facts go to separate *_meta.json
files so the numeric outputs stay comparable.

Exit codes: 0 success, 1 configuration error, 2 data error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from typing import Any, Dict

import numpy as np

from . import analysis, circuits, hybrid, pipeline
from .pipeline import ConfigError, IngestionError, SizeError

FORMAT_VERSION = 1

DEFAULTS: Dict[str, Any] = {
    "data.source": "synth",         # "synth" or a CSV path
    "data.n_steps": 6500,
    "data.n_base_channels": 64,
    "data.seed": 0,
    "data.sensor_indices": [0, 1],
    "preprocess.k": 5,
    "preprocess.shift_steps": 15,
    "preprocess.window_steps": 10,
    "preprocess.train_fraction": 0.8,
    "train.variant": "hybrid",
    "train.epochs": 100,
    "train.lr_quantum": 0.05,
    "train.lr_classical": 0.005,
    "train.batch_size": 32,
    "train.seed": 0,
    "analysis.depths": [1, 2, 3],
    "analysis.n_feature_samples": 1000,
    "analysis.n_weight_realizations": 100,
    "analysis.gamma": 1.0,
    "analysis.n_data": 4000,
    "analysis.fourier_samples": 1000,
    "analysis.seed": 0,
    "output.dir": "runs",
}


def resolve_config(path: str | None, output_override: str | None,
                   seed_override: int | None) -> Dict[str, Any]:
    config = dict(DEFAULTS)
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError(f"config {path} must be a JSON object")
        unknown = sorted(set(user) - set(DEFAULTS))
        if unknown:
            raise ConfigError(
                f"unknown config keys: {', '.join(unknown)}; "
                f"known keys: {', '.join(sorted(DEFAULTS))}")
        for key, value in user.items():
            default = DEFAULTS[key]
            if isinstance(default, bool) != isinstance(value, bool):
                raise ConfigError(f"config key {key}: bad type {type(value).__name__}")
            if isinstance(default, int) and not isinstance(value, bool):
                if not isinstance(value, int):
                    raise ConfigError(f"config key {key} must be an integer")
            elif isinstance(default, float):
                if not isinstance(value, (int, float)):
                    raise ConfigError(f"config key {key} must be a number")
                value = float(value)
            elif isinstance(default, str):
                if not isinstance(value, str):
                    raise ConfigError(f"config key {key} must be a string")
            elif isinstance(default, list):
                if not isinstance(value, list) or not all(
                        isinstance(v, int) for v in value):
                    raise ConfigError(f"config key {key} must be a list of integers")
            config[key] = value
    if output_override is not None:
        config["output.dir"] = output_override
    if seed_override is not None:
        config["data.seed"] = seed_override
        config["train.seed"] = seed_override
        config["analysis.seed"] = seed_override
    return config


# ---------------------------------------------------------------------------
# atomic artifact writers


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, payload: Dict[str, Any],
               config: Dict[str, Any]) -> None:
    doc = {"format_version": FORMAT_VERSION, "config": config, **payload}
    _atomic_write(path, json.dumps(doc, sort_keys=True, indent=1) + "\n")


def write_csv(path: str, header: str, rows, config: Dict[str, Any]) -> None:
    lines = [f"# format_version: {FORMAT_VERSION}",
             f"# config: {json.dumps(config, sort_keys=True)}",
             header]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v)
                              for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _outdir(config: Dict[str, Any]) -> str:
    directory = config["output.dir"]
    os.makedirs(directory, exist_ok=True)
    return directory


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_data(config: Dict[str, Any]) -> int:
    directory = _outdir(config)
    frame = pipeline.synth_generate(n_steps=config["data.n_steps"],
                                    n_base_channels=config["data.n_base_channels"],
                                    seed=config["data.seed"])
    header = "timestamp," + ",".join(
        f"ch{c:03d}" for c in range(frame.n_channels))
    lines = [header]
    for i in range(frame.n_steps):
        cells = [repr(float(frame.timestamps[i]))]
        cells += [repr(float(v)) for v in frame.channels[i]]
        lines.append(",".join(cells))
    path = os.path.join(directory, "data.csv")
    _atomic_write(path, "\n".join(lines) + "\n")
    # the CSV itself must stay loadable by the ingestion parser, so the
    # resolved config travels in a sidecar instead of comment lines
    write_json(os.path.join(directory, "data_meta.json"),
               {"rows": frame.n_steps, "channels": frame.n_channels,
                "file": "data.csv"}, config)
    print(f"wrote {path}: {frame.n_steps} rows x {frame.n_channels} channels")
    return 0


def _load_frame(config: Dict[str, Any]) -> pipeline.TimeSeriesFrame:
    source = config["data.source"]
    if source == "synth":
        path = os.path.join(config["output.dir"], "data.csv")
        if not os.path.exists(path):
            raise IngestionError(
                f"{path} not found: run the gen-data step first")
        return pipeline.load_csv(path)
    return pipeline.load_csv(source)


def cmd_preprocess(config: Dict[str, Any]) -> int:
    directory = _outdir(config)
    frame = _load_frame(config)
    sensors = config["data.sensor_indices"]
    if len(sensors) != 2:
        raise ConfigError("data.sensor_indices must name exactly 2 channels")
    feats, targets = pipeline.build_targets(
        frame, tuple(sensors),
        shift_steps=config["preprocess.shift_steps"],
        window_steps=config["preprocess.window_steps"])
    n_train = int(np.floor(config["preprocess.train_fraction"] * feats.shape[0]))
    if n_train == 0 or n_train == feats.shape[0]:
        raise ConfigError("train_fraction leaves an empty split")

    feat_stats = pipeline.standardize_fit(feats[:n_train])
    std_all = pipeline.standardize_apply(feats, feat_stats)
    pca = pipeline.pca_fit(std_all[:n_train], config["preprocess.k"])
    comps = pipeline.pca_transform(std_all, pca)
    angle = pipeline.angle_scale_fit(comps[:n_train])
    x_all = pipeline.angle_scale_apply(comps, angle)
    target_stats = pipeline.standardize_fit(targets[:n_train])
    y_all = pipeline.standardize_apply(targets, target_stats)
    train_set, test_set = pipeline.chronological_split(
        x_all, y_all, config["preprocess.train_fraction"])

    _atomic_write(os.path.join(directory, "pca.json"),
                  pipeline.pca_to_json(pca))
    _atomic_write(os.path.join(directory, "scaler.json"),
                  pipeline.scaler_to_json(feat_stats, angle, target_stats))
    for name, arr in (("train_x", train_set.x), ("train_y", train_set.y),
                      ("test_x", test_set.x), ("test_y", test_set.y)):
        # .npy is a deterministic container (unlike zip-based .npz)
        path = os.path.join(directory, f"{name}.npy")
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".npy")
        os.close(fd)
        np.save(tmp, arr)
        os.replace(tmp, path)
    evr = pca.explained_variance_ratio
    write_json(os.path.join(directory, "preprocess_summary.json"), {
        "rows_train": train_set.n,
        "rows_test": test_set.n,
        "explained_variance_ratio": evr.tolist(),
        "explained_variance_total": float(np.sum(evr)),
        "angle_clamped": angle.clamped,
        "constant_channels": int(np.sum(feat_stats.constant)),
    }, config)
    print(f"preprocess: train {train_set.n} rows, test {test_set.n} rows, "
          f"top-{config['preprocess.k']} variance share "
          f"{float(np.sum(evr)):.3f}, clamped {angle.clamped}")
    return 0


def _load_splits(config: Dict[str, Any]):
    directory = config["output.dir"]
    arrays = {}
    for name in ("train_x", "train_y", "test_x", "test_y"):
        path = os.path.join(directory, f"{name}.npy")
        if not os.path.exists(path):
            raise IngestionError(
                f"{path} not found: run the preprocess step first")
        arrays[name] = np.load(path)
    return (pipeline.SupervisedSet(x=arrays["train_x"], y=arrays["train_y"]),
            pipeline.SupervisedSet(x=arrays["test_x"], y=arrays["test_y"]))


def cmd_train(config: Dict[str, Any]) -> int:
    variant = config["train.variant"]
    if variant not in hybrid.VARIANTS:
        raise ConfigError(
            f"unknown variant {variant!r}; expected one of "
            f"{{{', '.join(hybrid.VARIANTS)}}}")
    directory = _outdir(config)
    train_set, test_set = _load_splits(config)
    train_cfg = hybrid.TrainConfig(
        epochs=config["train.epochs"],
        lr_quantum=config["train.lr_quantum"],
        lr_classical=config["train.lr_classical"],
        batch_size=config["train.batch_size"],
        seed=config["train.seed"])
    model, report = hybrid.train(train_set, test_set, variant, train_cfg)
    metrics = hybrid.evaluate(model, test_set)

    write_csv(os.path.join(directory, f"loss_curve_{variant}.csv"),
              "epoch,train_mse,test_mse",
              [(e, tr, te) for e, (tr, te) in
               enumerate(zip(report.train_mse, report.test_mse))],
              config)
    residuals = report.residuals
    write_csv(os.path.join(directory, f"residuals_{variant}.csv"),
              "index,sensor_0,sensor_1",
              [(i, float(residuals[i, 0]), float(residuals[i, 1]))
               for i in range(residuals.shape[0])],
              config)
    _atomic_write(os.path.join(directory, f"model_{variant}.json"),
                  hybrid.model_to_json(model))
    write_json(os.path.join(directory, f"train_summary_{variant}.json"), {
        "variant": variant,
        "final_train_mse": report.train_mse[-1],
        "final_test_mse": report.test_mse[-1],
        "mean_abs_residual": metrics["mean_abs_residual"],
        "max_abs_residual": metrics["max_abs_residual"],
        "per_sensor_mse": metrics["per_sensor_mse"],
    }, config)
    write_json(os.path.join(directory, f"train_meta_{variant}.json"),
               {"wall_time_seconds": report.wall_time,
                "timestamp": time.time()}, config)
    print(f"train[{variant}]: final train MSE {report.train_mse[-1]:.6f}, "
          f"test MSE {report.test_mse[-1]:.6f}, "
          f"mean |residual| {metrics['mean_abs_residual']:.4f}")
    return 0


def cmd_analyze_fisher(config: Dict[str, Any]) -> int:
    directory = _outdir(config)
    depths = config["analysis.depths"]
    if not depths or any(d < 1 for d in depths):
        raise ConfigError("analysis.depths must be a nonempty list of depths >= 1")
    fisher_cfg = analysis.FisherConfig(
        n_feature_samples=config["analysis.n_feature_samples"],
        n_weight_realizations=config["analysis.n_weight_realizations"],
        seed=config["analysis.seed"])
    try:
        fisher_cfg.validate()
    except analysis.AnalysisError as exc:
        raise ConfigError(str(exc)) from exc
    reports = analysis.average_fisher_study(depths, fisher_cfg)
    eff_dims = {}
    for depth, report in reports.items():
        normalized = analysis.normalized_fisher(report.matrices)
        eff_dims[depth] = analysis.effective_dimension(
            normalized, config["analysis.gamma"], config["analysis.n_data"])
        write_csv(os.path.join(directory, f"eigenvalues_depth{depth}.csv"),
                  "eigenvalue",
                  [(float(v),) for v in report.eigenvalues],
                  config)
    doc = json.loads(analysis.fisher_report_to_json(reports, eff_dims))
    write_json(os.path.join(directory, "fisher_report.json"),
               {"depths": doc}, config)
    for depth in sorted(reports):
        rep = reports[depth]
        warn = "  (low-sample warning)" if rep.low_sample_warning else ""
        print(f"depth {depth}: P={rep.n_params} rank={rep.rank_average} "
              f"near-zero={rep.near_zero_fraction:.3f} "
              f"eff-dim={eff_dims[depth]:.3f}{warn}")
    return 0


def cmd_analyze_fourier(config: Dict[str, Any]) -> int:
    directory = _outdir(config)
    depths = config["analysis.depths"]
    if not depths or any(d < 1 for d in depths):
        raise ConfigError("analysis.depths must be a nonempty list of depths >= 1")
    spec = circuits.build_toy_ansatz(depths[0])
    cloud = analysis.fourier_cloud(spec,
                                   n_samples=config["analysis.fourier_samples"],
                                   seed=config["analysis.seed"])
    doc = json.loads(analysis.fourier_cloud_to_json(cloud))
    write_json(os.path.join(directory, "fourier_cloud.json"), doc, config)
    print(f"fourier: depth {depths[0]}, "
          f"{config['analysis.fourier_samples']} samples, "
          f"leakage {cloud.leakage:.3e}")
    for key in sorted(cloud.amplitude_max):
        print(f"  c[{key[0]:+d},{key[1]:+d}]: max amplitude "
              f"{cloud.amplitude_max[key]:.4f}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage problems are configuration errors -> exit code 1
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="steamcast",
                     description="hybrid forecasting experiment runner")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to a JSON config file")
    common.add_argument("--output", help="output directory (overrides config)")
    common.add_argument("--seed", type=int,
                        help="seed override for data, training and analysis")
    sub.add_parser("gen-data", parents=[common],
                   help="write a synthetic sensor CSV")
    sub.add_parser("preprocess", parents=[common],
                   help="fit scaler + PCA, write supervised splits")
    sub.add_parser("train", parents=[common],
                   help="train one model variant on the prepared splits")
    ana = sub.add_parser("analyze", parents=[common],
                         help="circuit diagnostics")
    ana.add_argument("which", choices=("fisher", "fourier"))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args.config, args.output, args.seed)
        if args.command == "gen-data":
            return cmd_gen_data(config)
        if args.command == "preprocess":
            return cmd_preprocess(config)
        if args.command == "train":
            return cmd_train(config)
        if args.which == "fisher":
            return cmd_analyze_fisher(config)
        return cmd_analyze_fourier(config)
    except (ConfigError, hybrid.TrainError, analysis.AnalysisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (IngestionError, SizeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
