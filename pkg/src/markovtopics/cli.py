"""Command-line surface: generate | featurize | train | score | localise | eval.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
Flag values take precedence over a --config JSON file, which takes
precedence over built-in defaults (100 EM/VB iterations, 500 burn-in
sweeps, spacing 100).  All outputs are deterministic given the
configuration, seeds included.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import anomaly, em, gibbs, inference, metrics, serialize, vb
from .generate import generate
from .ingest import FrameLayout, build_corpus
from .model import (
    DataError,
    Hyperparams,
    ModelSpec,
    NumericalError,
    make_prior,
)


def _spec_args(parser):
    parser.add_argument("--num-words", type=int, required=True)
    parser.add_argument("--num-topics", type=int, required=True)
    parser.add_argument("--num-behaviours", type=int, required=True)


def _spec_from(args) -> ModelSpec:
    return ModelSpec(args.num_words, args.num_topics, args.num_behaviours)


def _apply_config(argv, parser):
    """Two-pass parse so --config values act as defaults under the flags."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            config = json.loads(Path(known.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read config {known.config}: {exc}") from exc
        valid = {a.dest for a in parser._actions}
        unknown = set(config) - valid
        if unknown:
            parser.error(f"unknown config keys: {sorted(unknown)}")
        parser.set_defaults(**config)
        for action in parser._actions:
            if action.dest in config:
                action.required = False
    return parser.parse_args(argv)


def cmd_generate(argv):
    parser = argparse.ArgumentParser(prog="markovtopics generate")
    parser.add_argument("--config")
    _spec_args(parser)
    parser.add_argument("--prior", choices=["1", "H", "H+1"], default="1")
    parser.add_argument("--docs", type=int, required=True)
    parser.add_argument("--doc-length", type=int, required=True)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-corpus", required=True)
    parser.add_argument("--out-truth")
    args = _apply_config(argv, parser)
    spec = _spec_from(args)
    hyper = make_prior(args.prior, spec)
    dataset = generate(spec, hyper, args.docs, [args.doc_length] * args.docs, args.seed)
    serialize.write_corpus(args.out_corpus, dataset.corpus)
    if args.out_truth:
        serialize.write_ground_truth(args.out_truth, dataset)
    print(f"wrote {len(dataset.corpus)} documents to {args.out_corpus}")
    return 0


def cmd_featurize(argv):
    parser = argparse.ArgumentParser(prog="markovtopics featurize")
    parser.add_argument("--config")
    parser.add_argument("--events", required=True)
    parser.add_argument("--frame-w", type=int, required=True)
    parser.add_argument("--frame-h", type=int, required=True)
    parser.add_argument("--cell", type=int, default=8)
    parser.add_argument("--fps", type=float, required=True)
    parser.add_argument("--clip-seconds", type=float, default=1.0)
    parser.add_argument("--min-words", type=int, default=20)
    parser.add_argument("--out-corpus", required=True)
    parser.add_argument("--out-map", required=True)
    args = _apply_config(argv, parser)
    layout = FrameLayout(frame_w=args.frame_w, frame_h=args.frame_h, cell=args.cell)
    events = serialize.read_events(args.events)
    corpus, index_map = build_corpus(events, layout, fps=args.fps,
                                     clip_seconds=args.clip_seconds,
                                     min_words=args.min_words)
    serialize.write_corpus(args.out_corpus, corpus)
    Path(args.out_map).write_text(json.dumps({str(k): v for k, v in index_map.items()}))
    print(f"wrote {len(corpus)} documents (vocabulary {layout.vocabulary_size}) "
          f"to {args.out_corpus}")
    return 0


def _train_one(task):
    (algo, corpus, hyper, spec, seed, iters, tol, burn_in, spacing, samples) = task
    if algo == "em":
        params, trace = em.em_fit(corpus, hyper, spec, seed, max_iters=iters, tol=tol)
        return {"params": params, "objective": trace.objectives[-1],
                "iterations": trace.iterations}
    if algo == "vb":
        post, params, trace = vb.vb_fit(corpus, hyper, spec, seed, max_iters=iters, tol=tol)
        return {"params": params, "posterior": post, "iterations": trace.iterations}
    count_samples, _, pooled = gibbs.gs_fit(corpus, hyper, spec, seed,
                                            burn_in=burn_in, num_samples=samples,
                                            spacing=spacing)
    return {"params": pooled, "count_samples": count_samples,
            "iterations": burn_in + (samples - 1) * spacing}


def cmd_train(argv):
    parser = argparse.ArgumentParser(prog="markovtopics train")
    parser.add_argument("--config")
    parser.add_argument("--corpus", required=True)
    _spec_args(parser)
    parser.add_argument("--algo", choices=["em", "vb", "gs"], required=True)
    parser.add_argument("--prior", choices=["1", "H", "H+1"], default="1")
    parser.add_argument("--iterations", type=int, default=100)
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("--burn-in", type=int, default=500)
    parser.add_argument("--spacing", type=int, default=100)
    parser.add_argument("--samples", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--runs", type=int, default=1)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--out", required=True)
    args = _apply_config(argv, parser)
    spec = _spec_from(args)
    hyper = make_prior(args.prior, spec)
    corpus = serialize.read_corpus(args.corpus, spec)

    seeds = [args.seed + r for r in range(args.runs)]
    tasks = [(args.algo, corpus, hyper, spec, s, args.iterations, args.tol,
              args.burn_in, args.spacing, args.samples) for s in seeds]
    if args.jobs > 1 and args.runs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_train_one, tasks))
    else:
        results = [_train_one(t) for t in tasks]

    out_paths = []
    for seed, result in zip(seeds, results):
        path = args.out if args.runs == 1 else _run_path(args.out, seed)
        metadata = {"seed": seed, "prior": args.prior, "algorithm": args.algo,
                    "iterations": result["iterations"]}
        if "objective" in result:
            metadata["final_objective"] = result["objective"]
        serialize.save_model(
            path, spec, hyper, result["params"], algorithm=args.algo,
            posterior=result.get("posterior"),
            samples=result.get("count_samples"),
            metadata=metadata,
        )
        out_paths.append(str(path))
    if args.runs > 1:
        summary = {"runs": args.runs, "seeds": seeds, "models": out_paths}
        Path(str(args.out) + ".summary.json").write_text(json.dumps(summary))
    print(f"trained {args.runs} model(s): {', '.join(out_paths)}")
    return 0


def _run_path(base: str, seed: int) -> str:
    p = Path(base)
    return str(p.with_name(f"{p.stem}.seed{seed}{p.suffix}"))


def _score_stream(model: serialize.LoadedModel, test_corpus, mode, mc_samples,
                  seed, init, train_corpus, min_words):
    params = model.params
    if init == "propagate":
        if train_corpus is None:
            raise DataError("--init propagate requires --train-corpus")
        last = anomaly.filtered_belief(params, train_corpus)
    else:
        last = None

    if mode == "plugin":
        state = anomaly.init_state(params, last_filtered=last)
        log_mix = inference.word_mixture_logs(params)
        scored = []
        t0 = time.perf_counter()
        for doc in test_corpus.documents:
            rec, state = anomaly.score_plugin(state, doc, params, log_mix=log_mix,
                                              min_words=min_words)
            scored.append(rec)
        elapsed = time.perf_counter() - t0
        return scored, elapsed

    # Monte Carlo mode: samples from the VB posterior, or the stored GS
    # count samples.  Plain EM models carry neither.
    if model.posterior is not None:
        samples = vb.sample_posterior(model.posterior, mc_samples, seed)
    elif model.count_samples is not None:
        samples = model.sample_params()
        if mc_samples < len(samples):
            samples = samples[:mc_samples]
    else:
        raise DataError("mc scoring requires a model with a posterior or samples "
                        "(train with vb or gs)")
    states = [anomaly.init_state(p, last_filtered=last) for p in samples]
    log_mixes = [inference.word_mixture_logs(p) for p in samples]
    scored = []
    t0 = time.perf_counter()
    for doc in test_corpus.documents:
        rec, states = anomaly.score_mc(states, doc, samples, log_mixes=log_mixes,
                                       min_words=min_words)
        scored.append(rec)
    elapsed = time.perf_counter() - t0
    return scored, elapsed


def cmd_score(argv):
    parser = argparse.ArgumentParser(prog="markovtopics score")
    parser.add_argument("--config")
    parser.add_argument("--model", required=True)
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--mode", choices=["plugin", "mc"], default="plugin")
    parser.add_argument("--mc-samples", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--init", choices=["restart", "propagate"], default="propagate")
    parser.add_argument("--train-corpus")
    parser.add_argument("--min-words", type=int, default=20)
    parser.add_argument("--out", required=True)
    args = _apply_config(argv, parser)
    model = serialize.load_model(args.model)
    test_corpus = serialize.read_corpus(args.corpus, model.spec)
    train_corpus = (serialize.read_corpus(args.train_corpus, model.spec)
                    if args.train_corpus else None)
    scored, elapsed = _score_stream(model, test_corpus, args.mode, args.mc_samples,
                                    args.seed, args.init, train_corpus,
                                    args.min_words)
    serialize.write_scores(args.out, scored)
    per_doc = elapsed / max(len(scored), 1)
    print(f"scored {len(scored)} documents in {elapsed:.3f}s "
          f"({per_doc * 1000:.3f} ms/document)")
    return 0


def cmd_localise(argv):
    parser = argparse.ArgumentParser(prog="markovtopics localise")
    parser.add_argument("--config")
    parser.add_argument("--model", required=True)
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--frame-w", type=int, required=True)
    parser.add_argument("--frame-h", type=int, required=True)
    parser.add_argument("--cell", type=int, default=8)
    parser.add_argument("--top-n", type=int, default=10)
    parser.add_argument("--init", choices=["restart", "propagate"], default="restart")
    parser.add_argument("--train-corpus")
    parser.add_argument("--out", required=True)
    args = _apply_config(argv, parser)
    model = serialize.load_model(args.model)
    layout = FrameLayout(frame_w=args.frame_w, frame_h=args.frame_h, cell=args.cell)
    if layout.vocabulary_size != model.spec.num_words:
        raise DataError(f"layout vocabulary {layout.vocabulary_size} does not match "
                        f"model vocabulary {model.spec.num_words}")
    test_corpus = serialize.read_corpus(args.corpus, model.spec)
    params = model.params
    if args.init == "propagate":
        if not args.train_corpus:
            raise DataError("--init propagate requires --train-corpus")
        train_corpus = serialize.read_corpus(args.train_corpus, model.spec)
        state = anomaly.init_state(params, anomaly.filtered_belief(params, train_corpus))
    else:
        state = anomaly.init_state(params)
    log_mix = inference.word_mixture_logs(params)
    lines = []
    for doc in test_corpus.documents:
        wll = anomaly.word_log_liks(state, doc, params)
        triples = anomaly.localise(wll, doc, layout, args.top_n)
        lines.append(json.dumps({"index": doc.timestamp, "tokens": triples}))
        _, state = anomaly.score_plugin(state, doc, params, log_mix=log_mix)
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"localised {len(lines)} documents to {args.out}")
    return 0


def cmd_eval(argv):
    parser = argparse.ArgumentParser(prog="markovtopics eval")
    parser.add_argument("--config")
    parser.add_argument("--scores", action="append", required=True,
                        help="score file; repeat for multi-run aggregation")
    parser.add_argument("--labels", required=True)
    parser.add_argument("--threshold", type=float)
    parser.add_argument("--out-curve")
    args = _apply_config(argv, parser)
    labels = serialize.read_labels(args.labels)
    aucs = []
    curve = None
    for path in args.scores:
        records = serialize.read_scores(path)
        if len(records) != len(labels):
            raise DataError(f"{path} has {len(records)} scores but labels file has "
                            f"{len(labels)}")
        # Unevaluated documents are normal by default: never flagged.
        scores = np.asarray([r["score"] if r.get("score") is not None else np.inf
                             for r in records])
        data = metrics.LabelledScores(scores=scores, labels=labels)
        curve = metrics.pr_curve(data)
        aucs.append(metrics.auc_pr(curve))
        if args.threshold is not None:
            acc = metrics.accuracy(data, args.threshold)
            print(f"{path}: pr_auc={aucs[-1]:.4f} accuracy@{args.threshold}={acc:.4f}")
        else:
            print(f"{path}: pr_auc={aucs[-1]:.4f}")
    if len(aucs) > 1:
        print(f"aggregate: mean={np.mean(aucs):.4f} min={np.min(aucs):.4f} "
              f"max={np.max(aucs):.4f} over {len(aucs)} runs")
    if args.out_curve:
        serialize.write_pr_curve(args.out_curve, curve)
    return 0


_COMMANDS = {
    "generate": cmd_generate,
    "featurize": cmd_featurize,
    "train": cmd_train,
    "score": cmd_score,
    "localise": cmd_localise,
    "eval": cmd_eval,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print("usage: markovtopics {generate|featurize|train|score|localise|eval} ...")
        return 0 if argv else 2
    cmd = argv[0]
    if cmd not in _COMMANDS:
        print(f"unknown subcommand {cmd!r}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[cmd](argv[1:])
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
