"""Command-line pipeline: encode -> sample -> split -> evaluate -> report.

Each stage reads and writes files, so runs are resumable and every stage is
independently testable. A manifest recording parameters, seeds and input
digests accompanies every output directory; given a fixed configuration the
whole pipeline is byte-for-byte reproducible.

Exit codes: 0 success, 1 usage/config error, 2 data integrity error,
3 computation error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .analysis import (
    shortcut_test,
    stability,
    top_similar_cross_pairs,
    welch_t_test,
)
from .corpus import filter_to_topics, load_corpus, relabel_topics, topics_with_min_docs
from .errors import ConfigError, DataError, HitsbenchError
from .metrics import METRIC_NAMES, MetricReport, PredictionEntry, PredictionSet, report as metric_report
from .sampler import SampleResult, SamplerConfig, load_sample, run_sampler, save_sample
from .splits import SplitConfig, build_splits, load_split, save_split, split_topic_similarity
from .topics import (
    build_topic_vectors,
    encode_tfidf_hashed,
    ingest_embeddings,
    write_embeddings,
)
from .verifiers import ngram, ppm, topicfit

MODEL_NAMES = ("charngram", "ppm", "topicfit")
PREDICTIONS_SCHEMA = "predictions/v1"
EVALUATION_SCHEMA = "evaluation/v1"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors -> exit 1, not argparse's 2
        raise ConfigError(message)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_dir: Path, command: str, params: dict, inputs: list[Path]) -> None:
    manifest = {
        "schema": "manifest/v1",
        "command": command,
        "package_version": __version__,
        "ppm_backend": BACKEND,
        "parameters": params,
        "inputs": {str(p): _sha256(p) for p in sorted(set(inputs))},
    }
    path = out_dir / f"manifest_{command}.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", "utf-8")


def _out_dir(args) -> Path:
    out = Path(os.environ.get("HITSBENCH_OUTPUT_DIR", args.out))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _format_table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    def fmt(row):
        return "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
    lines = [fmt(headers), fmt(["-" * w for w in widths])]
    lines.extend(fmt(r) for r in rows)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- encode


def cmd_encode(args) -> int:
    corpus = load_corpus(args.corpus)
    out = _out_dir(args)
    target = out / args.name
    if args.embeddings:
        embeddings = ingest_embeddings(args.embeddings, corpus)
    else:
        embeddings = encode_tfidf_hashed(corpus, args.dim)
    write_embeddings(embeddings, target)
    params = {"corpus": str(args.corpus), "dim": args.dim, "embeddings": args.embeddings,
              "name": args.name}
    inputs = [Path(args.corpus)] + ([Path(args.embeddings)] if args.embeddings else [])
    _write_manifest(out, "encode", params, inputs)
    print(f"wrote {target} ({len(embeddings)} embeddings)")
    return 0


# ---------------------------------------------------------------- sample


def cmd_sample(args) -> int:
    corpus = load_corpus(args.corpus)
    if args.min_docs_per_topic > 1:
        keep = topics_with_min_docs(corpus, args.min_docs_per_topic)
        corpus = filter_to_topics(corpus, keep)
    embeddings = ingest_embeddings(args.embeddings, corpus)
    topics = build_topic_vectors(embeddings, corpus)
    if args.m > len(topics):
        raise ConfigError(f"m={args.m} exceeds available topic count {len(topics)}")
    out = _out_dir(args)

    written = []
    if args.method == "random":
        for seed in args.seeds:
            result = run_sampler(topics, SamplerConfig(method="random", m=args.m, seed=seed))
            path = out / f"sample_random_seed{seed}.json"
            save_sample(result, path)
            written.append(path)
    else:
        result = run_sampler(topics, SamplerConfig(method=args.method, m=args.m))
        path = out / f"sample_{args.method}.json"
        save_sample(result, path)
        written.append(path)

    params = {"corpus": str(args.corpus), "embeddings": str(args.embeddings),
              "method": args.method, "m": args.m, "seeds": list(args.seeds),
              "min_docs_per_topic": args.min_docs_per_topic}
    _write_manifest(out, "sample", params, [Path(args.corpus), Path(args.embeddings)])
    for path in written:
        print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------- split


def _corpus_for_sample(corpus, sample: SampleResult):
    if sample.grouping_map:
        corpus = relabel_topics(corpus, sample.grouping_map)
    return corpus


def cmd_split(args) -> int:
    corpus = load_corpus(args.corpus)
    sample = load_sample(args.sample)
    corpus = _corpus_for_sample(corpus, sample)
    config = SplitConfig(
        fold_count=args.k,
        pair_seed=args.pair_seed,
        positive_fraction=args.positive_fraction,
        max_pairs_per_author=args.max_pairs_per_author,
        prefer_cross_topic_positives=not args.no_cross_topic_positives,
    )
    splits = build_splits(corpus, sample.selected_topics, config)
    out = _out_dir(args)
    for split in splits:
        save_split(split, out / f"fold_{split.fold_id:02d}.json")
    params = {"corpus": str(args.corpus), "sample": str(args.sample), "k": args.k,
              "pair_seed": args.pair_seed, "positive_fraction": args.positive_fraction,
              "max_pairs_per_author": args.max_pairs_per_author,
              "prefer_cross_topic_positives": not args.no_cross_topic_positives}
    _write_manifest(out, "split", params, [Path(args.corpus), Path(args.sample)])
    print(f"wrote {len(splits)} fold manifests to {out}")
    return 0


# ---------------------------------------------------------------- evaluate


def _train_and_score(model_name: str, corpus, split, params: dict, seed: int):
    train_seed = int(np.random.SeedSequence([seed, split.fold_id, MODEL_NAMES.index(model_name)]).generate_state(1)[0])
    if model_name == "charngram":
        config = ngram.NGramConfig(n=params["ngram_n"], vocab_size=params["ngram_vocab"])
        model = ngram.char_ngram_train(split.train_pairs, corpus, config, seed=train_seed)
        preds = ngram.predict(model, split.test_pairs, corpus)
    elif model_name == "ppm":
        config = ppm.PPMConfig(order=params["ppm_order"])
        cache: dict = {}
        model = ppm.ppm_train(split.train_pairs, corpus, config, cache=cache)
        preds = ppm.predict(model, split.test_pairs, corpus, cache=cache)
    elif model_name == "topicfit":
        config = topicfit.TopicFitConfig(
            stoplist_size=params["stoplist_size"], vocab_size=params["tf_vocab"]
        )
        model = topicfit.topicfit_train(split.train_pairs, corpus, config, seed=train_seed)
        preds = topicfit.predict(model, split.test_pairs, corpus)
    else:
        raise ConfigError(f"unknown model {model_name!r}")

    labels = {p.pair_id: p.label for p in split.test_pairs}
    pred_set = PredictionSet(
        PredictionEntry(p.pair_id, p.score, labels[p.pair_id]) for p in preds
    )
    return preds, metric_report(pred_set)


def _eval_job(payload: tuple) -> tuple:
    corpus_path, split_path, model_name, params, seed = payload
    corpus = load_corpus(corpus_path)
    split = load_split(split_path)
    preds, rep = _train_and_score(model_name, corpus, split, params, seed)
    return (model_name, split.fold_id, [(p.pair_id, p.score) for p in preds], rep.as_dict())


def cmd_evaluate(args) -> int:
    corpus_path = args.corpus
    load_corpus(corpus_path)  # validate early
    split_paths = sorted(Path(args.splits).glob("fold_*.json"))
    if not split_paths:
        raise DataError(f"no fold manifests found under {args.splits}")
    models = args.models
    for m in models:
        if m not in MODEL_NAMES:
            raise ConfigError(f"unknown model {m!r}; expected a subset of {MODEL_NAMES}")

    params = {"ngram_n": args.ngram_n, "ngram_vocab": args.ngram_vocab,
              "ppm_order": args.ppm_order, "stoplist_size": args.stoplist_size,
              "tf_vocab": args.tf_vocab}
    workers = int(os.environ.get("HITSBENCH_WORKERS", args.workers))
    jobs = [
        (corpus_path, str(sp), model, params, args.seed)
        for model in models
        for sp in split_paths
    ]

    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_eval_job, jobs))
    else:
        results = [_eval_job(j) for j in jobs]
    results.sort(key=lambda r: (r[0], r[1]))

    out = _out_dir(args)
    summary: dict[str, list] = {m: [] for m in models}
    for model_name, fold_id, preds, rep in results:
        pred_path = out / f"predictions_{model_name}_fold{fold_id:02d}.jsonl"
        with pred_path.open("w", encoding="utf-8") as fh:
            fh.write(json.dumps({"schema": PREDICTIONS_SCHEMA, "model": model_name,
                                 "fold_id": fold_id}) + "\n")
            for pair_id, score in preds:
                fh.write(json.dumps([pair_id, score]) + "\n")
        rep_path = out / f"metrics_{model_name}_fold{fold_id:02d}.json"
        rep_payload = {"schema": "metric-report/v1", "model": model_name, "fold_id": fold_id, **rep}
        rep_path.write_text(json.dumps(rep_payload, indent=2, sort_keys=True) + "\n", "utf-8")
        summary[model_name].append(rep_payload)

    summary_payload = {"schema": EVALUATION_SCHEMA, "models": list(models),
                       "folds": len(split_paths), "parameters": params, "seed": args.seed,
                       "reports": summary}
    (out / "evaluation.json").write_text(
        json.dumps(summary_payload, indent=2, sort_keys=True) + "\n", "utf-8"
    )

    rows = []
    for model_name in models:
        reps = summary[model_name]
        means = {k: sum(r[k] for r in reps) / len(reps) for k in ("auc", "c@1", "f05u", "f1", "overall")}
        rows.append([model_name] + [f"{means[k]:.3f}" for k in ("auc", "c@1", "f05u", "f1", "overall")])
    table = _format_table(["model", "AUC", "c@1", "F0.5u", "F1", "Overall"], rows)
    (out / "metrics_table.txt").write_text(table, "utf-8")

    _write_manifest(out, "evaluate",
                    {"corpus": str(corpus_path), "splits": str(args.splits),
                     "models": list(models), "seed": args.seed, **params},
                    [Path(corpus_path), *split_paths])
    print(table, end="")
    return 0


# ---------------------------------------------------------------- report


def _load_evaluation(path: Path) -> dict:
    data = json.loads((path / "evaluation.json").read_text("utf-8"))
    if data.get("schema") != EVALUATION_SCHEMA:
        raise DataError(f"{path}: not an evaluation directory")
    return data


def _fold_reports(evaluation: dict) -> list[dict[str, MetricReport]]:
    models = evaluation["models"]
    n_folds = evaluation["folds"]
    out = []
    for fold in range(n_folds):
        per_model = {}
        for m in models:
            rep = evaluation["reports"][m][fold]
            per_model[m] = MetricReport(
                auc=rep["auc"], c1=rep["c@1"], f05u=rep["f05u"], f1=rep["f1"],
                overall=rep["overall"], notes=tuple(rep.get("notes", ())),
            )
        out.append(per_model)
    return out


def _mean_overall(evaluation: dict) -> dict[str, float]:
    return {
        m: sum(r["overall"] for r in reps) / len(reps)
        for m, reps in evaluation["reports"].items()
    }


def cmd_report(args) -> int:
    out = _out_dir(args)
    wrote = []

    setups: list[tuple[str, Path]] = []
    if args.hits_eval:
        setups.append(("hits", Path(args.hits_eval)))
    for i, d in enumerate(args.random_evals):
        setups.append((f"random{i}", Path(d)))

    if args.shortcut and (not args.hits_eval or not args.random_evals):
        raise ConfigError("the shortcut test needs both --hits-eval and --random-evals")

    for name, path in setups:
        evaluation = _load_evaluation(path)
        if evaluation["folds"] < 2:
            raise ConfigError(f"{path}: stability needs at least 2 folds")
        stab = stability(_fold_reports(evaluation), METRIC_NAMES)
        payload = stab.as_dict()
        payload["setup"] = name
        target = out / f"stability_{name}.json"
        target.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", "utf-8")
        rows = [[m, f"{stab.mean_correlation[m]:.3f}"] for m in stab.metrics]
        rows.append(["average", f"{stab.grand_average:.3f}"])
        (out / f"stability_{name}.txt").write_text(
            _format_table(["metric", "mean spearman"], rows), "utf-8"
        )
        wrote.append(target)

    if args.hits_eval and args.random_evals:
        hits_eval = _load_evaluation(Path(args.hits_eval))
        random_evals = [_load_evaluation(Path(d)) for d in args.random_evals]
        hits_scores = _mean_overall(hits_eval)
        random_means = [_mean_overall(e) for e in random_evals]
        random_scores = {
            m: sum(r[m] for r in random_means) / len(random_means) for m in hits_scores
        }
        report_obj = shortcut_test(hits_scores, random_scores)
        payload = report_obj.as_dict()

        # per-model significance of the HITS-vs-random overall gap
        tests = {}
        for m in sorted(hits_scores):
            hits_folds = [r["overall"] for r in hits_eval["reports"][m]]
            random_folds = [r["overall"] for e in random_evals for r in e["reports"][m]]
            try:
                t = welch_t_test(hits_folds, random_folds)
                tests[m] = {"t": t.t, "p_two_sided": t.p_two_sided,
                            "p_one_sided_less": t.p_one_sided_less, "df": t.df}
            except HitsbenchError as exc:
                tests[m] = {"error": str(exc)}
        payload["welch_overall"] = tests

        target = out / "shortcut.json"
        target.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", "utf-8")
        rows = [
            [e.model, f"{e.score_random:.3f}", f"{e.score_hits:.3f}", f"{e.avg:.3f}", f"{e.diff:.3f}"]
            for e in report_obj.entries
        ]
        (out / "shortcut.txt").write_text(
            _format_table(["model", "random", "hits", "avg", "diff"], rows), "utf-8"
        )
        wrote.append(target)

    if args.splits and args.embeddings and args.corpus:
        corpus = load_corpus(args.corpus)
        embeddings = ingest_embeddings(args.embeddings, corpus)
        topics = build_topic_vectors(embeddings, corpus)
        sim_rows = []
        payload = {"schema": "similarity/v1", "folds": []}
        for split_path in sorted(Path(args.splits).glob("fold_*.json")):
            split = load_split(split_path)
            sim = split_topic_similarity(split, topics)
            top = top_similar_cross_pairs(split, topics, args.top_pairs)
            payload["folds"].append({
                "fold_id": split.fold_id, "mean": sim.mean, "max": sim.max,
                "top_pairs": [
                    {"train_topic": p.train_topic, "test_topic": p.test_topic, "sim": p.sim}
                    for p in top
                ],
            })
            sim_rows.append([str(split.fold_id), f"{sim.mean:.3f}", f"{sim.max:.3f}"])
        target = out / "similarity.json"
        target.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", "utf-8")
        (out / "similarity.txt").write_text(
            _format_table(["fold", "mean sim", "max sim"], sim_rows), "utf-8"
        )
        wrote.append(target)

    if not wrote:
        raise ConfigError(
            "nothing to report: provide evaluation dirs and/or --splits/--embeddings/--corpus"
        )
    for path in wrote:
        print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hitsbench", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="ingest or compute document embeddings")
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings", help="external embedding file to ingest and validate")
    p.add_argument("--dim", type=int, default=1024, help="built-in encoder dimension")
    p.add_argument("--name", default="embeddings.jsonl", help="output file name")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("sample", help="select a topic subset")
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--method", required=True, choices=["hits-cutting", "hits-grouping", "random"])
    p.add_argument("--m", type=int, required=True, help="target topic count")
    p.add_argument("--seeds", type=int, nargs="+", default=[0], help="random-method seeds")
    p.add_argument("--min-docs-per-topic", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("split", help="build cross-topic k-fold splits")
    p.add_argument("--corpus", required=True)
    p.add_argument("--sample", required=True, help="sample result file")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--pair-seed", type=int, default=0)
    p.add_argument("--positive-fraction", type=float, default=0.5)
    p.add_argument("--max-pairs-per-author", type=int, default=None)
    p.add_argument("--no-cross-topic-positives", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("evaluate", help="train and score verifiers per fold")
    p.add_argument("--corpus", required=True)
    p.add_argument("--splits", required=True, help="directory of fold manifests")
    p.add_argument("--models", nargs="+", default=list(MODEL_NAMES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ngram-n", type=int, default=4)
    p.add_argument("--ngram-vocab", type=int, default=3000)
    p.add_argument("--ppm-order", type=int, default=5)
    p.add_argument("--stoplist-size", type=int, default=200)
    p.add_argument("--tf-vocab", type=int, default=3000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="stability, ranking, similarity and shortcut reports")
    p.add_argument("--hits-eval", help="evaluation directory for the heterogeneous setup")
    p.add_argument("--random-evals", nargs="*", default=[], help="evaluation dirs, one per random seed")
    p.add_argument("--shortcut", action="store_true", help="require the two-setup shortcut test")
    p.add_argument("--splits", help="split directory for similarity inspection")
    p.add_argument("--embeddings", help="embedding file for similarity inspection")
    p.add_argument("--corpus", help="corpus file for similarity inspection")
    p.add_argument("--top-pairs", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except HitsbenchError as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
