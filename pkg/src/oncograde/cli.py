"""Batch front door: JSON-configured subcommands that run profiling,
training, evaluation, cross-validation, learning curves, and hyperparameter
sweeps, emitting CSV/JSON artifacts plus deterministic SVG charts.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
Partially written artifacts are removed when a command fails.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .core import RngStream, derive_stream
from .dataset import Dataset, load_csv, synth_generate
from .eval import (
    confusion_to_csv,
    curve_to_csv,
    cv_to_csv,
    cv_to_json,
    evaluate_predictions,
    kfold_cv,
    learning_curve,
    sweep,
    sweep_to_csv,
)
from .models import Hyperparams, ModelSpec, model_from_doc, model_to_doc
from .preprocess import (
    CORR_HI_DEFAULT,
    CORR_LO_DEFAULT,
    PIPELINE_ORDERS,
    append_pair_means,
    apply_minmax,
    correlation_to_csv,
    correlation_to_json,
    engineer_features,
    fit_minmax,
    MinMaxParams,
    pearson_matrix,
    run_pipeline,
    smote,
)
from .svg import render_svg

MODEL_WRAPPER_VERSION = 1


class ConfigError(Exception):
    """Bad config or usage; maps to exit code 2."""


# --- configuration ----------------------------------------------------------


@dataclass
class DataConfig:
    csv_path: str | None = None
    synthetic_n: int = 1000
    synthetic_proportions: tuple[float, float, float] = (0.303, 0.332, 0.365)
    source: str = "synthetic"

    def to_dict(self) -> dict:
        if self.source == "csv":
            return {"csv_path": self.csv_path}
        return {
            "synthetic": {
                "n": self.synthetic_n,
                "class_proportions": list(self.synthetic_proportions),
            }
        }


@dataclass
class PreprocessConfig:
    order: str = "paper_order"
    smote_k: int = 5
    corr_hi: float = CORR_HI_DEFAULT
    corr_lo: float = CORR_LO_DEFAULT
    test_fraction: float = 0.2

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class EvalConfig:
    k: int = 5
    curve_fractions: list[float] = field(
        default_factory=lambda: [round(0.1 * i, 1) for i in range(1, 11)]
    )
    curve_repeats: int = 3
    sweep_learning_rate: list[float] = field(default_factory=lambda: [0.001, 0.01, 0.1])
    sweep_min_child_weight: list[float] = field(default_factory=lambda: [1.0, 3.0, 5.0])

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "curve_fractions": self.curve_fractions,
            "curve_repeats": self.curve_repeats,
            "sweep": {
                "learning_rate": self.sweep_learning_rate,
                "min_child_weight": self.sweep_min_child_weight,
            },
        }


@dataclass
class RunConfig:
    seed: int = 42
    data: DataConfig = field(default_factory=DataConfig)
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    model_name: str = "dnn"
    hyperparams: Hyperparams = field(default_factory=Hyperparams)
    eval: EvalConfig = field(default_factory=EvalConfig)
    output_dir: str = "oncograde_out"
    model_path: str | None = None

    def to_dict(self) -> dict:
        hp = dataclasses.asdict(self.hyperparams)
        resolved = {
            "seed": self.seed,
            "data": self.data.to_dict(),
            "preprocess": self.preprocess.to_dict(),
            "model": {"name": self.model_name, "hyperparams": hp},
            "eval": self.eval.to_dict(),
            "output_dir": self.output_dir,
        }
        if self.model_path is not None:
            resolved["model_path"] = self.model_path
        return resolved


def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    _check_keys(
        doc, {"seed", "data", "preprocess", "model", "eval", "output_dir", "model_path"}, "config"
    )
    cfg = RunConfig()
    try:
        if "seed" in doc:
            cfg.seed = int(doc["seed"])
            if cfg.seed < 0:
                raise ConfigError("seed must be a non-negative integer")
        if "data" in doc:
            data = doc["data"]
            _check_keys(data, {"csv_path", "synthetic"}, "data")
            if ("csv_path" in data) == ("synthetic" in data):
                raise ConfigError("data must name exactly one source: csv_path or synthetic")
            if "csv_path" in data:
                cfg.data = DataConfig(csv_path=str(data["csv_path"]), source="csv")
            else:
                syn = data["synthetic"]
                _check_keys(syn, {"n", "class_proportions"}, "data.synthetic")
                props = syn.get("class_proportions", list(cfg.data.synthetic_proportions))
                cfg.data = DataConfig(
                    synthetic_n=int(syn.get("n", cfg.data.synthetic_n)),
                    synthetic_proportions=tuple(float(p) for p in props),
                    source="synthetic",
                )
        if "preprocess" in doc:
            pp = doc["preprocess"]
            _check_keys(pp, {"order", "smote_k", "corr_hi", "corr_lo", "test_fraction"}, "preprocess")
            cfg.preprocess = PreprocessConfig(
                order=str(pp.get("order", cfg.preprocess.order)),
                smote_k=int(pp.get("smote_k", cfg.preprocess.smote_k)),
                corr_hi=float(pp.get("corr_hi", cfg.preprocess.corr_hi)),
                corr_lo=float(pp.get("corr_lo", cfg.preprocess.corr_lo)),
                test_fraction=float(pp.get("test_fraction", cfg.preprocess.test_fraction)),
            )
            if cfg.preprocess.order not in PIPELINE_ORDERS:
                raise ConfigError(
                    f"preprocess.order must be one of {PIPELINE_ORDERS}, got {cfg.preprocess.order!r}"
                )
        if "model" in doc:
            mdl = doc["model"]
            _check_keys(mdl, {"name", "hyperparams"}, "model")
            cfg.model_name = str(mdl.get("name", cfg.model_name))
            hp_doc = dict(mdl.get("hyperparams", {}))
            hp_fields = {f.name for f in dataclasses.fields(Hyperparams)}
            _check_keys(hp_doc, hp_fields, "model.hyperparams")
            cfg.hyperparams = Hyperparams(**hp_doc)
        if "eval" in doc:
            ev = doc["eval"]
            _check_keys(ev, {"k", "curve_fractions", "curve_repeats", "sweep"}, "eval")
            sweep_doc = dict(ev.get("sweep", {}))
            _check_keys(sweep_doc, {"learning_rate", "min_child_weight"}, "eval.sweep")
            default = EvalConfig()
            cfg.eval = EvalConfig(
                k=int(ev.get("k", default.k)),
                curve_fractions=[float(f) for f in ev.get("curve_fractions", default.curve_fractions)],
                curve_repeats=int(ev.get("curve_repeats", default.curve_repeats)),
                sweep_learning_rate=[
                    float(v) for v in sweep_doc.get("learning_rate", default.sweep_learning_rate)
                ],
                sweep_min_child_weight=[
                    float(v) for v in sweep_doc.get("min_child_weight", default.sweep_min_child_weight)
                ],
            )
        if "output_dir" in doc:
            cfg.output_dir = str(doc["output_dir"])
        if "model_path" in doc:
            cfg.model_path = str(doc["model_path"])
        ModelSpec(cfg.model_name, cfg.hyperparams)  # validates the closed model-name set
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return parse_config(doc)


# --- artifact management ------------------------------------------------------


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


class ArtifactWriter:
    """Atomic artifact writes (temp + rename) with digest tracking."""

    def __init__(self, output_dir: str):
        self.output_dir = output_dir
        self.written: list[str] = []
        os.makedirs(output_dir, exist_ok=True)

    def _finalize(self, name: str, tmp: str) -> None:
        os.replace(tmp, os.path.join(self.output_dir, name))
        self.written.append(name)

    def write_text(self, name: str, content: str) -> None:
        tmp = os.path.join(self.output_dir, f".{name}.tmp")
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(content)
        self._finalize(name, tmp)

    def write_json(self, name: str, obj) -> None:
        self.write_text(name, _dump_json(obj))

    def write_svg(self, name: str, chart: str, data: dict) -> None:
        tmp = os.path.join(self.output_dir, f".{name}.tmp")
        render_svg(chart, data, tmp)
        self._finalize(name, tmp)

    def digests(self) -> list[dict]:
        out = []
        for name in self.written:
            h = hashlib.sha256()
            with open(os.path.join(self.output_dir, name), "rb") as fh:
                h.update(fh.read())
            out.append({"name": name, "sha256": h.hexdigest()})
        return out

    def write_manifest(self, subcommand: str, resolved_config: dict, started: float) -> None:
        manifest = {
            "toolkit_version": __version__,
            "subcommand": subcommand,
            "resolved_config": resolved_config,
            "duration_seconds": time.time() - started,
            "artifacts": self.digests(),
        }
        self.write_text("manifest.json", _dump_json(manifest))

    def cleanup(self) -> None:
        for name in self.written:
            try:
                os.unlink(os.path.join(self.output_dir, name))
            except OSError:
                pass


# --- shared helpers -----------------------------------------------------------


def _load_dataset(cfg: RunConfig) -> Dataset:
    if cfg.data.source == "csv":
        return load_csv(cfg.data.csv_path)
    return synth_generate(cfg.data.synthetic_n, cfg.seed, cfg.data.synthetic_proportions)


def _prepare_full(cfg: RunConfig, d: Dataset):
    """Scale, engineer, and oversample the entire dataset (no split).

    This is the preparation the cv/curve/sweep harness commands run on,
    regardless of the configured pipeline order; only `train` honors the
    paper_order/leak_safe switch, because only it holds out a test set.
    """
    params = fit_minmax(d.X)
    X = apply_minmax(d.X, params)
    report = pearson_matrix(X, d.feature_names)
    X, report = engineer_features(X, report, cfg.preprocess.corr_hi, cfg.preprocess.corr_lo)
    X, y = smote(X, d.y, cfg.preprocess.smote_k, derive_stream(cfg.seed, 1).derive(0))
    return X, y, report


def _model_spec(cfg: RunConfig) -> ModelSpec:
    return ModelSpec(cfg.model_name, cfg.hyperparams)


def _slug(name: str) -> str:
    return "".join(ch.lower() if ch.isalnum() else "_" for ch in name)


def _pipeline_doc(prep, cfg: RunConfig) -> dict:
    return {
        "order": prep.order,
        "minmax": prep.minmax.to_dict(),
        "feature_names": prep.report.feature_names,
        "engineered_pairs": [[int(i), int(j)] for i, j, _ in prep.report.engineered_pairs],
        "engineered_names": prep.report.engineered_names,
        "corr_hi": cfg.preprocess.corr_hi,
        "corr_lo": cfg.preprocess.corr_lo,
    }


def _write_metrics_artifacts(writer: ArtifactWriter, cm, report, title: str) -> None:
    writer.write_json("metrics.json", report.to_dict())
    writer.write_text("confusion.csv", confusion_to_csv(cm))
    writer.write_svg(
        "confusion.svg",
        "heatmap3x3",
        {"title": title, "counts": cm.counts.tolist()},
    )


# --- subcommands ---------------------------------------------------------------


def cmd_profile(cfg: RunConfig, writer: ArtifactWriter) -> None:
    d = _load_dataset(cfg)
    report = pearson_matrix(d.X, d.feature_names)
    _, report = engineer_features(
        d.X, report, cfg.preprocess.corr_hi, cfg.preprocess.corr_lo
    )
    writer.write_text("correlation.csv", correlation_to_csv(report))
    writer.write_json("correlation.json", correlation_to_json(report))

    lines = ["feature,class,bin,count"]
    for j, name in enumerate(d.feature_names):
        col = d.X[:, j]
        if name == "Age":
            lo, hi = float(col.min()), float(col.max())
            if hi == lo:
                hi = lo + 1.0
            edges = [lo + (hi - lo) * t / 10 for t in range(11)]
            bins = [f"{edges[b]:g}-{edges[b + 1]:g}" for b in range(10)]
            idx = np.clip(((col - lo) / (hi - lo) * 10).astype(int), 0, 9)
        else:
            bins = [str(b) for b in range(1, 10)]
            idx = np.clip(np.round(col).astype(int), 1, 9) - 1
        series = []
        for cls, label in enumerate(("Low", "Medium", "High")):
            counts = np.bincount(idx[d.y == cls], minlength=len(bins))[: len(bins)]
            series.append({"name": label, "values": [int(v) for v in counts]})
            for b, bin_label in enumerate(bins):
                lines.append(f"{_csv_field(name)},{label},{_csv_field(bin_label)},{int(counts[b])}")
        writer.write_svg(
            f"histogram_{_slug(name)}.svg",
            "histogram",
            {
                "title": f"{name} distribution by risk level",
                "bins": bins,
                "series": series,
                "x_label": name,
                "y_label": "count",
            },
        )
    writer.write_text("histograms.csv", "\n".join(lines) + "\n")


def _csv_field(s: str) -> str:
    if "," in s or '"' in s:
        return '"' + s.replace('"', '""') + '"'
    return s


def cmd_train(cfg: RunConfig, writer: ArtifactWriter) -> None:
    d = _load_dataset(cfg)
    prep = run_pipeline(
        d,
        cfg.preprocess.order,
        test_fraction=cfg.preprocess.test_fraction,
        smote_k=cfg.preprocess.smote_k,
        corr_hi=cfg.preprocess.corr_hi,
        corr_lo=cfg.preprocess.corr_lo,
        stream=derive_stream(cfg.seed, 1),
    )
    spec = _model_spec(cfg)
    model = spec.train(
        prep.X_train, prep.y_train, derive_stream(cfg.seed, 2), prep.X_test, prep.y_test
    )
    cm, report = evaluate_predictions(prep.y_test, model.predict(prep.X_test))

    writer.write_json(
        "model.json",
        {
            "version": MODEL_WRAPPER_VERSION,
            "model_name": cfg.model_name,
            "pipeline": _pipeline_doc(prep, cfg),
            "model": model_to_doc(model),
        },
    )
    _write_metrics_artifacts(writer, cm, report, f"Confusion matrix: {cfg.model_name}")

    if cfg.model_name == "dnn":
        h = model.history
        rows = ["epoch,train_loss,val_loss,train_accuracy,val_accuracy"]
        for e in range(len(h)):
            rows.append(
                f"{e},{h.train_loss[e]!r},{h.val_loss[e]!r},"
                f"{h.train_accuracy[e]!r},{h.val_accuracy[e]!r}"
            )
        writer.write_text("history.csv", "\n".join(rows) + "\n")
        writer.write_svg(
            "history.svg",
            "lines",
            {
                "title": "Training vs. validation accuracy",
                "x": list(range(len(h))),
                "series": [
                    {"name": "train accuracy", "y": h.train_accuracy},
                    {"name": "validation accuracy", "y": h.val_accuracy},
                ],
                "x_label": "epoch",
                "y_label": "accuracy",
            },
        )


def cmd_evaluate(cfg: RunConfig, writer: ArtifactWriter) -> None:
    if cfg.model_path is None:
        raise ConfigError("evaluate requires model_path in the config")
    try:
        with open(cfg.model_path, encoding="utf-8") as fh:
            wrapper = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read model file: {exc}") from None
    if wrapper.get("version") != MODEL_WRAPPER_VERSION:
        raise ConfigError(f"unsupported model file version: {wrapper.get('version')}")

    d = _load_dataset(cfg)
    pipe = wrapper["pipeline"]
    params = MinMaxParams.from_dict(pipe["minmax"])
    X = apply_minmax(d.X, params)
    X = append_pair_means(X, [tuple(p) for p in pipe["engineered_pairs"]])
    model = model_from_doc(wrapper["model"])
    cm, report = evaluate_predictions(d.y, model.predict(X))
    _write_metrics_artifacts(
        writer, cm, report, f"Confusion matrix: {wrapper.get('model_name', 'model')}"
    )


def cmd_cv(cfg: RunConfig, writer: ArtifactWriter) -> None:
    d = _load_dataset(cfg)
    X, y, _ = _prepare_full(cfg, d)
    result = kfold_cv(X, y, _model_spec(cfg), cfg.eval.k, derive_stream(cfg.seed, 3))
    writer.write_text("cv.csv", cv_to_csv(result))
    writer.write_json("cv.json", cv_to_json(result))


def cmd_curve(cfg: RunConfig, writer: ArtifactWriter) -> None:
    d = _load_dataset(cfg)
    X, y, _ = _prepare_full(cfg, d)
    curve = learning_curve(
        X,
        y,
        _model_spec(cfg),
        cfg.eval.curve_fractions,
        cfg.eval.curve_repeats,
        derive_stream(cfg.seed, 3),
    )
    writer.write_text("curve.csv", curve_to_csv(curve))
    writer.write_svg(
        "curve.svg",
        "lines",
        {
            "title": f"Learning curve: {cfg.model_name}",
            "x": curve.fractions,
            "series": [
                {"name": "train accuracy", "y": curve.train_score},
                {"name": "validation accuracy", "y": curve.val_score},
            ],
            "x_label": "training fraction",
            "y_label": "accuracy",
        },
    )


def cmd_sweep(cfg: RunConfig, writer: ArtifactWriter) -> None:
    d = _load_dataset(cfg)
    X, y, _ = _prepare_full(cfg, d)
    result = sweep(
        X,
        y,
        _model_spec(cfg),
        cfg.eval.sweep_learning_rate,
        cfg.eval.sweep_min_child_weight,
        derive_stream(cfg.seed, 3),
    )
    writer.write_text("sweep.csv", sweep_to_csv(result))
    series = [
        {"name": f"mcw={mcw:g}", "y": result.val_grid[:, j].tolist()}
        for j, mcw in enumerate(result.min_child_weights)
    ]
    writer.write_svg(
        "sweep.svg",
        "lines",
        {
            "title": f"Validation accuracy: {cfg.model_name}",
            "x": result.learning_rates,
            "series": series,
            "x_label": "learning rate",
            "y_label": "validation accuracy",
        },
    )


def cmd_report(run_dirs: list[str], writer: ArtifactWriter) -> None:
    rows = []
    for run_dir in run_dirs:
        manifest_path = os.path.join(run_dir, "manifest.json")
        metrics_path = os.path.join(run_dir, "metrics.json")
        try:
            with open(manifest_path, encoding="utf-8") as fh:
                manifest = json.load(fh)
            with open(metrics_path, encoding="utf-8") as fh:
                m = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"run directory {run_dir!r} is missing artifacts: {exc}") from None
        name = manifest.get("resolved_config", {}).get("model", {}).get("name", os.path.basename(run_dir))
        rows.append((name, m["accuracy"], m["macro_precision"], m["macro_recall"], m["macro_f1"]))

    lines = ["model,accuracy,macro_precision,macro_recall,macro_f1"]
    for name, acc, mp, mr, mf in rows:
        lines.append(f"{_csv_field(name)},{acc!r},{mp!r},{mr!r},{mf!r}")
    writer.write_text("comparison.csv", "\n".join(lines) + "\n")

    metric_names = ("accuracy", "macro precision", "macro recall", "macro F1")
    series = [
        {"name": metric_names[k], "values": [row[1 + k] for row in rows]}
        for k in range(4)
    ]
    writer.write_svg(
        "comparison.svg",
        "grouped_bars",
        {
            "title": "Model comparison",
            "categories": [row[0] for row in rows],
            "series": series,
            "x_label": "model",
            "y_label": "score",
        },
    )


# --- entry point -----------------------------------------------------------------


_COMMANDS = {
    "profile": cmd_profile,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "cv": cmd_cv,
    "curve": cmd_curve,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oncograde",
        description="Three-level lung cancer risk classification benchmark harness",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} pipeline")
        p.add_argument("--config", required=True, help="path to a JSON run configuration")
        p.add_argument("--output-dir", default=None, help="override the config output_dir")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
    rep = sub.add_parser("report", help="aggregate prior run directories into a comparison")
    rep.add_argument("--runs", nargs="+", required=True, help="run directories with manifests")
    rep.add_argument("--output-dir", default="oncograde_report", help="where to write the comparison")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.time()

    writer: ArtifactWriter | None = None
    try:
        if args.subcommand == "report":
            writer = ArtifactWriter(args.output_dir)
            cmd_report(args.runs, writer)
            writer.write_manifest("report", {"runs": args.runs}, started)
            return 0

        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("seed must be a non-negative integer")
            cfg.seed = args.seed
        if args.output_dir is not None:
            cfg.output_dir = args.output_dir

        resolved = cfg.to_dict()
        print(f"resolved config: {json.dumps(resolved)}")
        writer = ArtifactWriter(cfg.output_dir)
        _COMMANDS[args.subcommand](cfg, writer)
        writer.write_manifest(args.subcommand, resolved, started)
        return 0
    except ConfigError as exc:
        if writer is not None:
            writer.cleanup()
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - single CLI failure boundary
        if writer is not None:
            writer.cleanup()
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
