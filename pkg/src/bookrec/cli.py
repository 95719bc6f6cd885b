"""Command-line entry point.

Subcommands: ahp, cluster, predict, recommend, evaluate. Exit status is 0 on
success, 1 on data errors and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

from . import ahp as ahp_mod
from .antcluster import run_ant_clustering
from .blend import hitrate_at_n, hybrid_recommend, neighbors_or_empty
from .cf import top_n_recommend
from .errors import BookrecError, DataError
from .pipeline import CLUSTER_FIELDS, RunConfig, load_pairs, predict_pipeline
from .ratings import holdout_split, load_ratings, load_tags

_CLUSTER_FLAGS = {
    "alpha": float,
    "speed": float,
    "max_speed": float,
    "patch_side": int,
    "k1": float,
    "k2": float,
    "iterations": int,
    "grid_width": int,
    "grid_height": int,
    "ant_count": int,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _n_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("every n must be a positive integer")
    return values


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON run config; flags override its values")
    common.add_argument("--output-dir", help="directory for output files")
    common.add_argument("--format", choices=("tsv", "json"), default="tsv", help="format printed to stdout")
    common.add_argument("--seed", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    data = _Parser(add_help=False)
    data.add_argument("--ratings", help="ratings TSV: user_id, book_id, score")

    clustering = _Parser(add_help=False)
    for name, kind in _CLUSTER_FLAGS.items():
        clustering.add_argument("--" + name.replace("_", "-"), dest=name, type=kind)

    parser = _Parser(prog="bookrec", description="Book rating prediction and recommendation.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("ahp", parents=[common], help="criterion weights and consistency report")
    p.add_argument("--ahp-config", help="AHP criterion tree JSON (alternative to --config)")

    sub.add_parser("cluster", parents=[common, data, clustering], help="ant-colony user clustering")

    p = sub.add_parser("predict", parents=[common, data, clustering], help="blended score predictions")
    p.add_argument("--tags", help="tags TSV: book_id, comma-separated tags")
    p.add_argument("--pairs", help="TSV of user_id, book_id pairs to predict")
    p.add_argument("--user", type=int)
    p.add_argument("--book", type=int)
    p.add_argument("--k", type=int)

    p = sub.add_parser("recommend", parents=[common, data, clustering], help="top-n unread books per user")
    p.add_argument("--user", type=int, action="append", help="repeatable; default is every user")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--method", choices=("cf", "hybrid"), default="cf")

    p = sub.add_parser("evaluate", parents=[common, data], help="hitrate@n on a holdout split")
    p.add_argument("--n", type=_n_list, dest="n_values")
    p.add_argument("--k", type=int)
    p.add_argument("--test-fraction", type=float)
    return parser


def _resolve_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config and args.command != "ahp":
        if not Path(args.config).is_file():
            raise DataError(f"config file not found: {args.config}")
        cfg = RunConfig.load(args.config)
    overrides = {
        "ratings_path": getattr(args, "ratings", None),
        "tags_path": getattr(args, "tags", None),
        "k": getattr(args, "k", None),
        "n": getattr(args, "n", None),
        "seed": args.seed,
        "output_dir": args.output_dir,
        "test_fraction": getattr(args, "test_fraction", None),
        "n_values": getattr(args, "n_values", None),
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    cluster = dict(cfg.cluster)
    for name in CLUSTER_FIELDS:
        value = getattr(args, name, None)
        if value is not None and name != "seed":
            cluster[name] = value
    if args.seed is not None:
        cluster["seed"] = args.seed
    cfg.cluster = cluster
    return cfg


def _require(value, flag):
    if value is None:
        raise UsageError(f"missing required option {flag}")
    return value


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _tsv(rows) -> str:
    buf = io.StringIO()
    for row in rows:
        buf.write("\t".join(str(c) for c in row) + "\n")
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _fmt(x) -> str:
    if x is None:
        return "NA"
    if isinstance(x, float):
        text = f"{x:.6f}"
        return "0.000000" if text == "-0.000000" else text
    return str(x)


def _emit(cfg: RunConfig, args, outputs: dict[str, str], stdout_key: dict[str, str]) -> None:
    """Write every output file, then print the one matching ``--format``."""
    if cfg.output_dir:
        for name, text in outputs.items():
            _write_atomic(Path(cfg.output_dir) / name, text)
    sys.stdout.write(outputs[stdout_key[args.format]])


def _read_json(path):
    if not Path(path).is_file():
        raise DataError(f"config file not found: {path}")
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


def cmd_ahp(args, cfg: RunConfig) -> None:
    path = args.ahp_config or args.config or cfg.ahp_config_path
    path = _require(path, "--config")
    doc = _read_json(path)
    if "criteria" not in doc and "ahp_config_path" in doc:
        # a run config pointing at the criterion tree
        path = doc["ahp_config_path"]
        doc = _read_json(path)
    try:
        root = ahp_mod.CriterionNode.from_dict(doc["criteria"])
        results = ahp_mod.evaluate_hierarchy(root)
        grades = doc.get("grades", "four-grade")
        if isinstance(grades, str):
            grades = ahp_mod.GRADE_PRESETS[grades]
        else:
            grades = ahp_mod.GradeScale(tuple(grades["labels"]), tuple(float(s) for s in grades["scores"]))
        score = None
        if "membership" in doc:
            leaves = ahp_mod.leaf_weights(root)
            names = list(leaves)
            missing = [n for n in names if n not in doc["membership"]]
            if missing:
                raise DataError(f"{path}: membership rows missing for {missing}")
            score = ahp_mod.fuzzy_composite_score(
                [leaves[n] for n in names], [doc["membership"][n] for n in names], grades
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: {exc}") from None

    rows = [("path", "depth", "local_weight", "global_weight", "lambda_max", "ci", "ri", "cr", "acceptable")]
    nodes = []
    for r in results:
        c = r.consistency
        rows.append(
            (
                "/".join(r.path),
                len(r.path) - 1,
                _fmt(r.local_weight),
                _fmt(r.global_weight),
                *(("", "", "", "", "") if c is None else (_fmt(c.lambda_max), _fmt(c.ci), _fmt(c.ri), _fmt(c.cr), str(c.acceptable).lower())),
            )
        )
        nodes.append(
            {
                "path": list(r.path),
                "local_weight": r.local_weight,
                "global_weight": r.global_weight,
                "consistency": None
                if c is None
                else {"lambda_max": c.lambda_max, "ci": c.ci, "ri": c.ri, "cr": c.cr, "acceptable": c.acceptable},
            }
        )
    report = {
        "nodes": nodes,
        "grades": {"labels": list(grades.labels), "scores": list(grades.scores)},
        "composite_score": score,
    }
    _emit(cfg, args, {"ahp_weights.tsv": _tsv(rows), "ahp_report.json": _json(report)},
          {"tsv": "ahp_weights.tsv", "json": "ahp_report.json"})


def _load_matrix(cfg):
    return load_ratings(_require(cfg.ratings_path, "--ratings"))


def cmd_cluster(args, cfg: RunConfig) -> None:
    matrix = _load_matrix(cfg)
    clusters = run_ant_clustering(matrix, cfg.cluster_params())
    trace = [("x", "y", "user_id")] + clusters.trace_rows()
    outputs = {"clusters.json": _json(clusters.to_dict()), "grid_trace.tsv": _tsv(trace)}
    _emit(cfg, args, outputs, {"tsv": "grid_trace.tsv", "json": "clusters.json"})


def cmd_predict(args, cfg: RunConfig) -> None:
    matrix = _load_matrix(cfg)
    tags = load_tags(_require(cfg.tags_path, "--tags"))
    if args.pairs:
        pairs = load_pairs(args.pairs)
    elif args.user is not None and args.book is not None:
        pairs = [(args.user, args.book)]
    else:
        raise UsageError("predict needs --pairs or both --user and --book")
    clusters = run_ant_clustering(matrix, cfg.cluster_params()) if matrix.user_count else None
    rows = predict_pipeline(pairs, matrix, tags, clusters, cfg.k)
    table = [("user_id", "book_id", "tag_knn", "cluster", "final")]
    table += [(r.user, r.book, _fmt(r.tag_knn), _fmt(r.cluster), r.final) for r in rows]
    records = [
        {"user_id": r.user, "book_id": r.book, "tag_knn": r.tag_knn, "cluster": r.cluster, "final": r.final}
        for r in rows
    ]
    _emit(cfg, args, {"predictions.tsv": _tsv(table), "predictions.json": _json(records)},
          {"tsv": "predictions.tsv", "json": "predictions.json"})


def cmd_recommend(args, cfg: RunConfig) -> None:
    matrix = _load_matrix(cfg)
    users = args.user or matrix.users
    unknown = [u for u in users if not matrix.has_user(u)]
    if unknown:
        raise DataError(f"{cfg.ratings_path}: no ratings for user(s) {unknown}")
    clusters = run_ant_clustering(matrix, cfg.cluster_params()) if args.method == "hybrid" else None
    rows = []
    for user in users:
        if clusters is not None:
            recs = hybrid_recommend(user, cfg.n, matrix, clusters, cfg.k)
        else:
            recs = top_n_recommend(user, cfg.n, matrix, neighbors_or_empty(user, matrix, cfg.k))
        rows.extend((user, book, _fmt(score)) for book, score in recs.items)
    records = [{"user_id": u, "book_id": b, "predicted_score": float(s)} for u, b, s in rows]
    _emit(cfg, args, {"recommendations.tsv": _tsv(rows), "recommendations.json": _json(records)},
          {"tsv": "recommendations.tsv", "json": "recommendations.json"})


def cmd_evaluate(args, cfg: RunConfig) -> None:
    matrix = _load_matrix(cfg)
    split = holdout_split(matrix, cfg.test_fraction, cfg.seed)
    reports = hitrate_at_n(matrix, split, cfg.n_values, cfg.k)
    curve = [("n", "mean_hitrate", "user_count")]
    curve += [(n, _fmt(r.mean), r.user_count) for n, r in sorted(reports.items())]
    report = {
        "seed": cfg.seed,
        "k": cfg.k,
        "test_fraction": cfg.test_fraction,
        "train_entries": len(split.train),
        "test_entries": len(split.test),
        "curve": [reports[n].to_dict() for n in sorted(reports)],
    }
    _emit(cfg, args, {"hitrate.tsv": _tsv(curve), "hitrate.json": _json(report)},
          {"tsv": "hitrate.tsv", "json": "hitrate.json"})


COMMANDS = {
    "ahp": cmd_ahp,
    "cluster": cmd_cluster,
    "predict": cmd_predict,
    "recommend": cmd_recommend,
    "evaluate": cmd_evaluate,
}


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        cfg = _resolve_config(args)
        try:
            cfg.validate()
        except (TypeError, ValueError) as exc:
            if isinstance(exc, BookrecError):
                raise
            raise UsageError(str(exc)) from None
        COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (BookrecError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
