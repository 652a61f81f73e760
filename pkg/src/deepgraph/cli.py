"""Command-line pipeline: generate, describe, train, evaluate, compare.

Output directory layout::

    config.json             resolved configuration
    manifest.json           generator, seeds, split times and counts
    edges.tsv               temporal edge list
    instances/{split}.csv   labelled instances
    descriptors/            stats.json, index.json, {split}.npy (raw histograms)
    features/{split}.csv    hand-crafted features
    models/{model}/         checkpoint.bin + history.csv, or ridge.json + trace.csv
    predictions/{model}.csv per-instance test predictions
    report.csv              model, split, n, mse
    paired.csv              per-instance squared errors and differences to the reference model
    summary.txt             human-readable report

Exit codes: 0 success, 2 configuration or provenance error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
from dataclasses import asdict
import hashlib
import json
import logging
from pathlib import Path
import shutil
import sys
import time

import numpy as np

from . import __version__
from .config import MODELS, architecture, dump_config, load_config, train_config
from .data import (SPLITS, SplitSpec, assign_origins, downsample_zero_growth, generate, instances_from_labels,
                   mse, read_instance_csv, read_label_file, stage_seed, temporal_split,
                   verify_split, write_instance_csv)
from .descriptor import (PixelStats, diffusion_steps, fit_pixel_stats, fit_stats,
                         histogram_descriptor, hks_batch, pixel_normalize, write_descriptor_csv, write_pgm)
from .errors import ConfigError, ConvergenceError, TrainingDivergedError
from .features import (RidgeModel, extract_features, read_feature_csv, ridge_predict, ridge_select,
                       write_feature_csv)
from .graph import read_edge_list, write_edge_list
from .neuralnet import load_checkpoint, save_checkpoint, train

log = logging.getLogger("deepgraph")

NEURAL = ("deepgraph", "gd-mlp", "gd-cnn")
DERIVED_DIRS = ("descriptors", "features", "models", "predictions")
DERIVED_FILES = ("report.csv", "paired.csv", "summary.txt")
REPORT_HEADER = ("model", "split", "n", "mse")


def _sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_json(path: Path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _read_json(path: Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"missing {path}; run the earlier pipeline stage first") from exc


def _out_dir(cfg: dict) -> Path:
    if not cfg.get("out"):
        raise ConfigError("no output directory: pass --out or set 'out' in the config")
    return Path(cfg["out"])


# ---------------------------------------------------------------- generate

def _edge_list(cfg: dict, root: int):
    src = cfg["source"]["edge_file"]
    if src:
        records = sorted(read_edge_list(src), key=lambda e: e.timestamp)
        return records, {"generator": "file", "path": str(src)}
    g = cfg["generator"]
    params = {"n_nodes": g["n_nodes"]}
    params.update({"ba": {"edges_per_node": g["edges_per_node"]}, "er": {"p": g["p"]},
                   "ws": {"k": g["k"], "beta": g["beta"]}}.get(g["kind"], {}))
    try:
        el = generate(g["kind"], stage_seed(root, "generate"), **params)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"generator: {exc}") from exc
    return el.edges, el.meta


def _split_spec(cfg: dict, records, root: int) -> SplitSpec:
    s = cfg["split"]
    scale = records[-1].timestamp if s["time_unit"] == "fraction" else 1.0
    try:
        return SplitSpec(tuple(float(t) * scale for t in s["graph_times"]),
                         tuple(float(t) * scale for t in s["growth_times"]),
                         tuple(float(f) for f in s["fractions"]), stage_seed(root, "split"))
    except ValueError as exc:
        raise ConfigError(f"split: {exc}") from exc


def cmd_generate(cfg: dict, force: bool = False) -> Path:
    out = _out_dir(cfg)
    if out.exists() and any(out.iterdir()):
        if not force:
            raise ConfigError(f"{out} exists and is not empty; use --force to overwrite")
        for name in DERIVED_DIRS:
            shutil.rmtree(out / name, ignore_errors=True)
        for name in DERIVED_FILES:
            (out / name).unlink(missing_ok=True)
    (out / "instances").mkdir(parents=True, exist_ok=True)
    root = int(cfg["seed"])
    records, meta = _edge_list(cfg, root)
    if not records:
        raise ConfigError("edge list is empty")
    spec = _split_spec(cfg, records, root)
    inst = cfg["instances"]
    if cfg["source"]["label_file"]:
        rows = read_label_file(cfg["source"]["label_file"])
        groups = {k: set(v) for k, v in assign_origins([r[0] for r in rows], spec.fractions, spec.seed).items()}
        splits = {name: instances_from_labels(records, [r for r in rows if r[0] in groups[name]], inst["k_hop"])
                  for name in SPLITS}
        verify_split(splits)
    else:
        splits = temporal_split(records, spec, inst["k_hop"], inst["target"])
    counts = {}
    ds_root = stage_seed(root, "downsample")
    for i, name in enumerate(SPLITS):
        seed = int(np.random.SeedSequence([ds_root, i]).generate_state(1)[0])
        kept = downsample_zero_growth(splits[name], float(inst["downsample_zero"]), seed)
        counts[name] = {"built": len(splits[name]), "kept": len(kept),
                        "zero_growth": sum(1 for x in kept if x.raw_growth == 0)}
        splits[name] = kept
    verify_split(splits)
    if not splits["train"] or not splits["val"] or not splits["test"]:
        raise ConfigError(f"a split is empty: {counts}")
    write_edge_list(out / "edges.tsv", records, header="src\tdst\ttimestamp")
    for name in SPLITS:
        write_instance_csv(out / "instances" / f"{name}.csv", splits[name])
    manifest = {
        "version": __version__,
        "root_seed": root,
        "stage_seeds": {s: stage_seed(root, s) for s in ("generate", "split", "downsample", "features", "train")},
        "source": meta,
        "n_edges": len(records),
        "edges_sha256": _sha256(out / "edges.tsv"),
        "split": spec.to_dict(),
        "instances": inst,
        "counts": counts,
        "split_verified": True,
    }
    _write_json(out / "manifest.json", manifest)
    (out / "config.json").write_text(dump_config(cfg))
    log.info("generated %s", {k: v["kept"] for k, v in counts.items()})
    return out


# ---------------------------------------------------------------- describe

def _load_split_instances(out: Path, manifest: dict):
    records = read_edge_list(out / "edges.tsv")
    if _sha256(out / "edges.tsv") != manifest["edges_sha256"]:
        raise ConfigError("edges.tsv does not match the manifest")
    k_hop = manifest["instances"]["k_hop"]
    result = {}
    for name in SPLITS:
        rows = read_instance_csv(out / "instances" / f"{name}.csv")
        insts = instances_from_labels(records, [(r["origin"], r["graph_time"], r["growth_time"], r["raw_growth"])
                                                for r in rows], k_hop)
        if len(insts) != len(rows):
            raise ConfigError(f"instances/{name}.csv does not match edges.tsv")
        result[name] = insts
    return result


def cmd_describe(cfg: dict) -> Path:
    out = _out_dir(cfg)
    manifest = _read_json(out / "manifest.json")
    splits = _load_split_instances(out, manifest)
    d = cfg["descriptor"]
    steps = diffusion_steps(float(d["z1"]), float(d["zN"]), int(d["n_steps"]))
    n_bins = int(d["n_bins"])
    ddir = out / "descriptors"
    ddir.mkdir(parents=True, exist_ok=True)
    hks_all = {name: hks_batch([x.graph for x in splits[name]], steps, d["method"], int(d["n_jobs"]))
               for name in SPLITS}
    # statistics come from the training split only
    hstats = fit_stats(hks_all["train"])
    raw = {name: np.stack([histogram_descriptor(h, hstats, n_bins) for h in hks_all[name]]) for name in SPLITS}
    pstats = fit_pixel_stats(list(raw["train"]))
    stats = {
        "fitted_on": "train",
        "train_instances_sha256": _sha256(out / "instances" / "train.csv"),
        "steps": steps.tolist(),
        "n_bins": n_bins,
        "hks_means": hstats.means.tolist(),
        "hks_sds": hstats.sds.tolist(),
        "pixel_means": pstats.means.tolist(),
        "pixel_sds": pstats.sds.tolist(),
    }
    _write_json(ddir / "stats.json", stats)
    index = {"stats_sha256": _sha256(ddir / "stats.json"), "splits": {}}
    for name in SPLITS:
        np.save(ddir / f"{name}.npy", raw[name])
        index["splits"][name] = {"n": len(raw[name]), "npy_sha256": _sha256(ddir / f"{name}.npy")}
        if d["write_csv"]:
            (ddir / "csv" / name).mkdir(parents=True, exist_ok=True)
            for x, desc in zip(splits[name], raw[name]):
                write_descriptor_csv(ddir / "csv" / name / f"{x.origin}.csv", desc)
        if int(d["heatmaps"]) > 0:
            (ddir / "heatmaps" / name).mkdir(parents=True, exist_ok=True)
            for x, desc in list(zip(splits[name], raw[name]))[:int(d["heatmaps"])]:
                write_pgm(ddir / "heatmaps" / name / f"{x.origin}.pgm", desc)
    _write_json(ddir / "index.json", index)

    fdir = out / "features"
    fdir.mkdir(exist_ok=True)
    fseed = manifest["stage_seeds"]["features"]
    for name in SPLITS:
        feats = [extract_features(x.graph, seed=fseed) for x in splits[name]]
        write_feature_csv(fdir / f"{name}.csv", [x.origin for x in splits[name]], feats)
    return out


def _check_provenance(out: Path) -> tuple[dict, dict]:
    ddir = out / "descriptors"
    stats = _read_json(ddir / "stats.json")
    index = _read_json(ddir / "index.json")
    if stats.get("fitted_on") != "train":
        raise ConfigError("descriptor statistics were not fitted on the training split")
    if stats["train_instances_sha256"] != _sha256(out / "instances" / "train.csv"):
        raise ConfigError("descriptor statistics were fitted on a different training set; rerun describe")
    if index["stats_sha256"] != _sha256(ddir / "stats.json"):
        raise ConfigError("descriptors were computed with different statistics; rerun describe")
    for name in SPLITS:
        if index["splits"][name]["npy_sha256"] != _sha256(ddir / f"{name}.npy"):
            raise ConfigError(f"descriptors/{name}.npy was modified after describe")
    return stats, index


def _dataset(out: Path, stats: dict, name: str, kind: str):
    rows = read_instance_csv(out / "instances" / f"{name}.csv")
    y = np.array([r["scaled_label"] for r in rows])
    origins = [r["origin"] for r in rows]
    if kind == "features":
        f_origins, X = read_feature_csv(out / "features" / f"{name}.csv")
        if f_origins != origins:
            raise ConfigError(f"features/{name}.csv does not match instances/{name}.csv")
        return origins, X, y
    raw = np.load(out / "descriptors" / f"{name}.npy")
    if len(raw) != len(rows):
        raise ConfigError(f"descriptors/{name}.npy does not match instances/{name}.csv")
    pstats = PixelStats(np.array(stats["pixel_means"]), np.array(stats["pixel_sds"]))
    X = pixel_normalize(raw, pstats)
    return origins, (X.reshape(len(X), -1) if kind == "flat" else X), y


# ---------------------------------------------------------------- train

def _fmt(x: float) -> str:
    return repr(float(x))


def cmd_train(cfg: dict, model: str) -> Path:
    if model not in MODELS:
        raise ConfigError(f"unknown model {model!r}")
    out = _out_dir(cfg)
    manifest = _read_json(out / "manifest.json")
    stats, index = _check_provenance(out)
    mdir = out / "models" / model
    mdir.mkdir(parents=True, exist_ok=True)
    if model in NEURAL:
        _, Xtr, ytr = _dataset(out, stats, "train", "image")
        _, Xva, yva = _dataset(out, stats, "val", "image")
        arch = architecture(cfg, model)
        tcfg = train_config(cfg, seed=manifest["stage_seeds"]["train"])
        t0 = time.perf_counter()
        result = train(Xtr, ytr, Xva, yva, arch, tcfg)
        log.info("%s: best epoch %d val mse %.5f (%.1fs)", model, result.best_epoch, result.best_val_mse,
                 time.perf_counter() - t0)
        save_checkpoint(mdir / "checkpoint.bin", result.model,
                        {"model": model, "best_epoch": result.best_epoch, "best_val_mse": result.best_val_mse,
                         "stats_sha256": index["stats_sha256"], "train_config": asdict(tcfg)})
        with open(mdir / "history.csv", "w") as fh:
            fh.write("epoch,train_mse,val_mse\n")
            for e, a, b in result.history:
                fh.write(f"{e},{_fmt(a)},{_fmt(b)}\n")
    else:
        kind = "features" if model == "features-linear" else "flat"
        _, Xtr, ytr = _dataset(out, stats, "train", kind)
        _, Xva, yva = _dataset(out, stats, "val", kind)
        best, trace = ridge_select(Xtr, ytr, Xva, yva)
        _write_json(mdir / "ridge.json", {"model": model, "stats_sha256": index["stats_sha256"],
                                          "ridge": best.to_dict()})
        with open(mdir / "trace.csv", "w") as fh:
            fh.write("l2,val_mse\n")
            for l2, v in trace:
                fh.write(f"{_fmt(l2)},{_fmt(v)}\n")
    return mdir


# ---------------------------------------------------------------- evaluate

def _predictor(out: Path, model: str, index: dict):
    mdir = out / "models" / model
    if model in NEURAL:
        path = mdir / "checkpoint.bin"
        if not path.exists():
            raise ConfigError(f"model {model!r} has not been trained in {out}")
        net, extra = load_checkpoint(path)
        if extra.get("model") != model or extra.get("stats_sha256") != index["stats_sha256"]:
            raise ConfigError(f"checkpoint for {model!r} does not match the current descriptors")
        return "image", net.predict
    path = mdir / "ridge.json"
    if not path.exists():
        raise ConfigError(f"model {model!r} has not been trained in {out}")
    blob = _read_json(path)
    if blob.get("model") != model or blob.get("stats_sha256") != index["stats_sha256"]:
        raise ConfigError(f"ridge model for {model!r} does not match the current descriptors")
    ridge = RidgeModel.from_dict(blob["ridge"])
    return ("features" if model == "features-linear" else "flat"), (lambda X: ridge_predict(ridge, X))


def cmd_evaluate(cfg: dict, models=None) -> Path:
    out = _out_dir(cfg)
    stats, index = _check_provenance(out)
    models = list(models or cfg["models"])
    pdir = out / "predictions"
    pdir.mkdir(exist_ok=True)
    report = []
    test_se = {}
    test_origins = test_truth = None
    for model in models:
        kind, predict = _predictor(out, model, index)
        for name in SPLITS:
            origins, X, y = _dataset(out, stats, name, kind)
            pred = np.asarray(predict(X), dtype=np.float64)
            report.append((model, name, len(y), mse(pred, y)))
            if name == "test":
                test_se[model] = (pred - y) ** 2
                test_origins, test_truth = origins, y
                with open(pdir / f"{model}.csv", "w") as fh:
                    fh.write("origin,truth,prediction\n")
                    for o, t, p in zip(origins, y, pred):
                        fh.write(f"{o},{_fmt(t)},{_fmt(p)}\n")
    with open(out / "report.csv", "w") as fh:
        fh.write(",".join(REPORT_HEADER) + "\n")
        for m, s, n, v in report:
            fh.write(f"{m},{s},{n},{_fmt(v)}\n")
    ref = "deepgraph" if "deepgraph" in models else models[0]
    others = [m for m in models if m != ref]
    with open(out / "paired.csv", "w") as fh:
        fh.write(",".join(["origin", "truth"] + [f"se_{m}" for m in models]
                          + [f"diff_{m}" for m in others]) + "\n")
        for i, o in enumerate(test_origins):
            cells = [str(o), _fmt(test_truth[i])] + [_fmt(test_se[m][i]) for m in models]
            cells += [_fmt(test_se[m][i] - test_se[ref][i]) for m in others]
            fh.write(",".join(cells) + "\n")
    lines = [f"test MSE on {len(test_origins)} instances (paired differences relative to {ref})", ""]
    lines.append(f"{'model':<18}{'test_mse':>12}{'mean_diff':>12}{'se_diff':>12}")
    for m in models:
        v = float(np.mean(test_se[m]))
        if m == ref:
            lines.append(f"{m:<18}{v:>12.5f}{'':>12}{'':>12}")
        else:
            diff = test_se[m] - test_se[ref]
            se = float(np.std(diff, ddof=1) / np.sqrt(len(diff))) if len(diff) > 1 else float("nan")
            lines.append(f"{m:<18}{v:>12.5f}{float(np.mean(diff)):>12.5f}{se:>12.5f}")
    (out / "summary.txt").write_text("\n".join(lines) + "\n")
    return out


def cmd_compare(cfg: dict, force: bool = False) -> Path:
    """Run any missing stages, train every configured model and evaluate them together."""
    out = _out_dir(cfg)
    if force or not (out / "manifest.json").exists():
        cmd_generate(cfg, force=force)
    if not (out / "descriptors" / "index.json").exists():
        cmd_describe(cfg)
    for model in cfg["models"]:
        t0 = time.perf_counter()
        cmd_train(cfg, model)
        log.info("trained %s in %.1fs", model, time.perf_counter() - t0)
    cmd_evaluate(cfg, cfg["models"])
    return out


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="deepgraph", description="Graph growth prediction from heat kernel descriptors.")
    p.add_argument("command", choices=("generate", "describe", "train", "evaluate", "compare"))
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--seed", type=int, help="root seed (overrides the config)")
    p.add_argument("--model", choices=MODELS, help="model for train/evaluate (default: deepgraph / all configured)")
    p.add_argument("--paper-init", action="store_true", help="unit-sd Gaussian weight init")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--force", action="store_true", help="overwrite an existing benchmark directory")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    overrides: dict = {}
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
            return 2
        overrides["seed"] = args.seed
    if args.out:
        overrides["out"] = args.out
    if args.paper_init:
        overrides["train"] = {"paper_init": True}
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "generate":
            cmd_generate(cfg, force=args.force)
        elif args.command == "describe":
            cmd_describe(cfg)
        elif args.command == "train":
            cmd_train(cfg, args.model or "deepgraph")
        elif args.command == "evaluate":
            cmd_evaluate(cfg, [args.model] if args.model else None)
        else:
            cmd_compare(cfg, force=args.force)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, TrainingDivergedError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    if args.command == "evaluate" or args.command == "compare":
        print((_out_dir(cfg) / "summary.txt").read_text(), end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
