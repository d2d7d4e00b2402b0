"""Command-line entry point chaining the pipeline stages.

Every stage reads and writes plain files, so each one is independently
testable and reproducible: identical inputs plus an identical seed yield
byte-identical outputs. Exit codes: 0 success, 1 usage error, 2 data or
validation error (the message names the offending file and record).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import annotation, corpus, distance, embedding, evaluation, pairing
from .errors import DupfinderError

_MEASURE_ALIASES = {
    "lev": evaluation.Measure.LEV_NORM,
    "cos": evaluation.Measure.COSINE_DIST,
    "embed": evaluation.Measure.EMBED_DIST,
}

_STRATEGY_CHOICES = [s.value.replace("_", "-") for s in pairing.Strategy]


class _UsageError(Exception):
    def __init__(self, message: str, parser: argparse.ArgumentParser):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors instead of exiting 2."""

    def error(self, message: str):
        raise _UsageError(message, self)


def _build_parser() -> _Parser:
    parser = _Parser(prog="dupfinder", description=__doc__)
    parser.add_argument(
        "--log-level",
        default="warning",
        choices=["debug", "info", "warning", "error"],
        help="logging verbosity (default: warning)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="load, normalize and filter a corpus")
    p_ingest.add_argument("--input", required=True, help="corpus file to read")
    p_ingest.add_argument("--format", required=True, choices=["csv", "jsonl"])
    p_ingest.add_argument(
        "--lang",
        default=None,
        help="keep only records detected as this language (or as unknown)",
    )
    p_ingest.add_argument("--out", required=True, help="canonical corpus CSV to write")

    p_pairs = sub.add_parser("pairs", help="generate candidate pairs")
    p_pairs.add_argument("--corpus", required=True)
    p_pairs.add_argument("--format", default="csv", choices=["csv", "jsonl"])
    p_pairs.add_argument("--strategy", required=True, choices=_STRATEGY_CHOICES)
    p_pairs.add_argument("--delta", type=int, default=5, help="word-count difference bound (default 5)")
    p_pairs.add_argument("--lambda", dest="lambda_", type=int, default=2, help="half-width around the mode word count (default 2)")
    p_pairs.add_argument("--tau", type=int, default=3, help="short-title word-count bound (default 3)")
    p_pairs.add_argument("--out", required=True)

    p_score = sub.add_parser("score", help="score candidate pairs")
    p_score.add_argument("--corpus", required=True)
    p_score.add_argument("--format", default="csv", choices=["csv", "jsonl"])
    p_score.add_argument("--pairs", required=True)
    p_score.add_argument("--embeddings", default=None, help="DFV1 vector file")
    p_score.add_argument("--out", required=True)

    p_sample = sub.add_parser("sample", help="reservoir-sample a pair file")
    p_sample.add_argument("--pairs", required=True)
    p_sample.add_argument("-k", type=int, required=True, help="sample size")
    p_sample.add_argument("--seed", type=int, default=42)
    p_sample.add_argument("--out", required=True)

    p_eval = sub.add_parser("evaluate", help="threshold metrics against ground truth")
    p_eval.add_argument("--scores", required=True)
    p_eval.add_argument("--truth", required=True)
    p_eval.add_argument("--measure", required=True, choices=sorted(_MEASURE_ALIASES))
    p_eval.add_argument("--threshold", type=float, default=0.2)
    p_eval.add_argument(
        "--correlate",
        action="store_true",
        help="also report correlations between the measures",
    )
    p_eval.add_argument(
        "--spearman",
        action="store_true",
        help="use Spearman rank correlation instead of Pearson (implies --correlate)",
    )

    p_scatter = sub.add_parser("scatter", help="export the 3-axis scatter data")
    p_scatter.add_argument("--scores", required=True)
    p_scatter.add_argument("--out", required=True, help="output directory")

    p_annotate = sub.add_parser("annotate", help="human annotation service")
    annotate_sub = p_annotate.add_subparsers(dest="annotate_command", required=True)
    p_serve = annotate_sub.add_parser("serve", help="serve the labeling API and UI")
    p_serve.add_argument("--corpus", required=True)
    p_serve.add_argument("--format", default="csv", choices=["csv", "jsonl"])
    p_serve.add_argument("--pairs", required=True)
    p_serve.add_argument("--scores", default=None)
    p_serve.add_argument("--truth", required=True, help="ground-truth CSV to append to")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8080)
    p_serve.add_argument("--ui", default=None, help="directory of built UI assets")
    p_serve.add_argument(
        "--no-distances",
        action="store_true",
        help="never show distance context to raters, even with --scores",
    )

    p_all = sub.add_parser("run-all", help="run ingest/pairs/sample/score/scatter")
    p_all.add_argument("--input", required=True)
    p_all.add_argument("--format", required=True, choices=["csv", "jsonl"])
    p_all.add_argument("--lang", default=None)
    p_all.add_argument("--strategy", default="complete", choices=_STRATEGY_CHOICES)
    p_all.add_argument("--delta", type=int, default=5)
    p_all.add_argument("--lambda", dest="lambda_", type=int, default=2)
    p_all.add_argument("--tau", type=int, default=3)
    p_all.add_argument("--embeddings", default=None)
    p_all.add_argument("-k", type=int, default=None, help="sample size before scoring")
    p_all.add_argument("--seed", type=int, default=42)
    p_all.add_argument("--truth", default=None, help="also evaluate against this file")
    p_all.add_argument("--measure", default="lev", choices=sorted(_MEASURE_ALIASES))
    p_all.add_argument("--threshold", type=float, default=0.2)
    p_all.add_argument("--out-dir", required=True)

    return parser


def _pairing_config(args: argparse.Namespace) -> pairing.PairingConfig:
    try:
        return pairing.PairingConfig(
            delta=args.delta,
            lambda_=args.lambda_,
            tau=args.tau,
            strategy=pairing.Strategy(args.strategy.replace("-", "_")),
        )
    except ValueError as exc:
        raise DupfinderError(str(exc)) from exc


def _cmd_ingest(args: argparse.Namespace) -> int:
    loaded = corpus.load_corpus(args.input, args.format, language_filter=args.lang)
    corpus.write_corpus(args.out, loaded)
    print(f"wrote {len(loaded)} records to {args.out}")
    return 0


def _cmd_pairs(args: argparse.Namespace) -> int:
    loaded = corpus.load_corpus(args.corpus, args.format)
    config = _pairing_config(args)
    count = pairing.write_pairs(args.out, pairing.generate(loaded, config))
    print(f"wrote {count} pairs to {args.out}")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    loaded = corpus.load_corpus(args.corpus, args.format)
    store = embedding.load_embeddings(args.embeddings) if args.embeddings else None
    stream = distance.score_stream(pairing.read_pairs(args.pairs), loaded, store)
    count = distance.write_scores(args.out, stream)
    print(f"wrote {count} score rows to {args.out}")
    return 0


def _cmd_sample(args: argparse.Namespace) -> int:
    sample = evaluation.sample_pairs(pairing.read_pairs(args.pairs), args.k, args.seed)
    sample.sort()
    count = pairing.write_pairs(args.out, sample)
    print(f"wrote {count} sampled pairs to {args.out}")
    return 0


def _report_as_json(report: evaluation.EvalReport) -> dict:
    payload = {
        "measure": report.measure.value if report.measure else None,
        "threshold": report.threshold,
        "tp": report.tp,
        "fp": report.fp,
        "fn": report.fn,
        "tn": report.tn,
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "sample_size": report.sample_size,
    }
    if report.pearson is not None:
        payload["correlations"] = {
            f"{a}/{b}": value for (a, b), value in report.pearson.items()
        }
    return payload


def _evaluate(
    scores_path: str,
    truth_path: str,
    measure_alias: str,
    threshold: float,
    correlate: bool,
    spearman: bool,
) -> evaluation.EvalReport:
    scores = distance.read_scores(scores_path)
    labels = evaluation.read_truth(truth_path)
    measure = _MEASURE_ALIASES[measure_alias]
    predicted = evaluation.classify(scores, measure, threshold)
    report = evaluation.confusion(predicted, labels)
    report.measure = measure
    report.threshold = threshold
    if correlate or spearman:
        method = "spearman" if spearman else "pearson"
        report.pearson = evaluation.correlate(scores, method=method)
    return report


def _cmd_evaluate(args: argparse.Namespace) -> int:
    report = _evaluate(
        args.scores, args.truth, args.measure, args.threshold,
        args.correlate, args.spearman,
    )
    print(json.dumps(_report_as_json(report), indent=2))
    return 0


def _cmd_scatter(args: argparse.Namespace) -> int:
    scores = distance.read_scores(args.scores)
    csv_path, json_path = evaluation.export_scatter(scores, args.out)
    print(f"wrote {csv_path} and {json_path}")
    return 0


def _cmd_annotate_serve(args: argparse.Namespace) -> int:
    loaded = corpus.load_corpus(args.corpus, args.format)
    pairs = list(pairing.read_pairs(args.pairs))
    scores = distance.read_scores(args.scores) if args.scores else None
    session = annotation.AnnotationSession(
        corpus=loaded,
        pairs=pairs,
        truth_path=args.truth,
        scores=scores,
        show_distances=not args.no_distances,
    )
    server = annotation.make_server(session, args.host, args.port, args.ui)
    print(f"serving annotation API on http://{args.host}:{args.port}/ "
          f"({len(pairs)} pairs, truth file {args.truth})", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def _cmd_run_all(args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    corpus_path = out_dir / "corpus.csv"
    loaded = corpus.load_corpus(args.input, args.format, language_filter=args.lang)
    corpus.write_corpus(corpus_path, loaded)
    print(f"[1/5] corpus: {len(loaded)} records -> {corpus_path}")

    pairs_path = out_dir / "pairs.csv"
    config = _pairing_config(args)
    count = pairing.write_pairs(pairs_path, pairing.generate(loaded, config))
    print(f"[2/5] pairs ({config.strategy.value}): {count} -> {pairs_path}")

    to_score = pairs_path
    if args.k is not None:
        sample_path = out_dir / "sampled_pairs.csv"
        sample = evaluation.sample_pairs(
            pairing.read_pairs(pairs_path), args.k, args.seed
        )
        sample.sort()
        pairing.write_pairs(sample_path, sample)
        print(f"[3/5] sample: {len(sample)} pairs (seed {args.seed}) -> {sample_path}")
        to_score = sample_path
    else:
        print("[3/5] sample: skipped (no -k)")

    scores_path = out_dir / "scores.csv"
    store = embedding.load_embeddings(args.embeddings) if args.embeddings else None
    stream = distance.score_stream(pairing.read_pairs(to_score), loaded, store)
    count = distance.write_scores(scores_path, stream)
    print(f"[4/5] scores: {count} rows -> {scores_path}")

    scores = distance.read_scores(scores_path)
    csv_path, json_path = evaluation.export_scatter(scores, out_dir / "scatter")
    print(f"[5/5] scatter: {csv_path} and {json_path}")

    if args.truth:
        report = _evaluate(
            str(scores_path), args.truth, args.measure, args.threshold,
            correlate=False, spearman=False,
        )
        report_path = out_dir / "report.json"
        report_path.write_text(
            json.dumps(_report_as_json(report), indent=2) + "\n", encoding="utf-8"
        )
        print(f"evaluation report -> {report_path}")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "pairs": _cmd_pairs,
    "score": _cmd_score,
    "sample": _cmd_sample,
    "evaluate": _cmd_evaluate,
    "scatter": _cmd_scatter,
    "run-all": _cmd_run_all,
}


def run(argv: list[str] | None = None) -> int:
    """Parse argv and execute; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        exc.parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=args.log_level.upper())
    try:
        if args.command == "annotate":
            return _cmd_annotate_serve(args)
        return _COMMANDS[args.command](args)
    except DupfinderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
