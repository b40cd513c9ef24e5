"""Command-line driver.

    clusterlm cluster     cluster a corpus for each (K, run)
    clusterlm train       build mixture models from clustering files
    clusterlm rescore     select hypotheses from N-best lists with models
    clusterlm experiment  full sweep with reports and figures
    clusterlm selftest    brute-force oracle suite
    clusterlm generate    write a synthetic corpus and N-best file
"""

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .clustering import cluster_corpus, load_clustering, save_clustering
from .corpus import ClassMap, CorpusError, corpus_events, read_corpus, read_rule_events
from .report import fmt
from .experiment import (ExperimentConfig, ExperimentReport, RunResult, run_experiment,
                         summarize)
from .rescore import (HypothesisEncoder, baseline, evaluate, prepare_lists,
                      read_hypothesis_analyses, read_nbest, write_nbest)
from .scoring import load_model, save_model, train_model
from .synthetic import SyntheticConfig, generate

logger = logging.getLogger("clusterlm")

CONFIG_FLAGS = {
    "mode": "mode", "order": "orders", "k": "k_values", "runs": "runs_per_k",
    "base_seed": "base_seed", "corpus": "corpus", "class_map": "class_map",
    "rules": "rules", "nbest": "nbest", "hyp_rules": "hyp_rules", "limit": "limit",
    "prior": "prior", "leave_one_out": "leave_one_out",
    "scale_failures": "scale_failures", "end_marker": "end_marker",
    "max_rounds": "max_rounds", "wmw": "wmw_pairs", "jobs": "jobs",
}


def build_config(args):
    """Config file first, then any flags given on the command line."""
    data = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as f:
            data = json.load(f)
        if "order" in data:
            data["orders"] = data.pop("order")
    for flag, key in CONFIG_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            data[key] = value
    if getattr(args, "synthetic", False) and "synthetic" not in data:
        data["synthetic"] = SyntheticConfig().as_dict()
    return ExperimentConfig.from_dict(data)


def _k_pair(text):
    try:
        a, b = text.split(",")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected K1,K2 but got {text!r}") from None


def add_data_flags(p):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--mode", choices=("ngram", "rule"))
    p.add_argument("--corpus", help="training sentences, one per line")
    p.add_argument("--class-map", help="tab-separated pattern -> class file")
    p.add_argument("--rules", help="training rule analyses (rule mode)")
    p.add_argument("--end-marker", dest="end_marker", action="store_true", default=None)
    p.add_argument("--no-end-marker", dest="end_marker", action="store_false")


def add_cluster_flags(p):
    p.add_argument("--order", type=int, nargs="+", help="N-gram order(s), or 1/2 for rules")
    p.add_argument("-k", "--k", type=int, nargs="+", help="cluster counts")
    p.add_argument("--runs", type=int, help="presentation orders per K (default 10)")
    p.add_argument("--base-seed", type=int, help="run r uses seed base_seed + r")
    p.add_argument("--max-rounds", type=int, help="reassignment round limit")
    p.add_argument("--leave-one-out", action="store_true", default=None,
                   help="score a sentence against its own cluster without its counts")
    p.add_argument("--prior", choices=("sentences", "items"),
                   help="what cluster size counts for the priors")


def add_rescore_flags(p):
    p.add_argument("--nbest", help="N-best file: id, reference, hypotheses (tab-separated)")
    p.add_argument("--hyp-rules", help="rule analyses of hypotheses keyed listid:index")
    p.add_argument("--limit", type=int, help="hypotheses kept per list (default 10)")
    p.add_argument("--no-scale-failures", dest="scale_failures", action="store_false",
                   default=None, help="normalize log probability only, not failures")
    p.add_argument("--wmw", type=_k_pair, nargs="*", help="K pairs for WMW, e.g. 10,1")


def load_training(cfg, order):
    if cfg.mode == "rule":
        if not cfg.rules:
            raise SystemExit("rule mode needs --rules")
        return read_rule_events(cfg.rules, order)
    if not cfg.corpus:
        raise SystemExit("--corpus is required")
    cmap = ClassMap.from_file(cfg.class_map) if cfg.class_map else None
    return corpus_events(read_corpus(cfg.corpus, cmap), order, cfg.end_marker)


def clustering_name(order, k, run):
    return f"N{order}_K{k}_run{run}"


def cmd_cluster(args):
    cfg = build_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for order in cfg.orders:
        seqs = load_training(cfg, order)
        ref_h = None
        for k in sorted(set(cfg.k_values) | {1}):
            if k > len(seqs):
                raise SystemExit(f"K={k} exceeds the {len(seqs)} training sentences")
            n_runs = 1 if k == 1 else cfg.runs_per_k
            for run in range(n_runs):
                c = cluster_corpus(seqs, k, cfg.run_seed(run), cfg.max_rounds,
                                   cfg.leave_one_out, mode=cfg.mode, order=order)
                if k == 1:
                    ref_h = c.per_item_entropy
                if k not in cfg.k_values:
                    continue
                save_clustering(c, out / f"{clustering_name(order, k, run)}.clu")
                red = 100.0 * (1 - c.per_item_entropy / ref_h) if ref_h else 0.0
                rows.append((order, k, run, c.seed, c.total_entropy,
                             c.per_item_entropy, red, c.fixed_point, c.rounds))
    cols = ("order", "k", "run", "seed", "total_entropy", "per_item_entropy",
            "reduction_pct", "fixed_point", "rounds")
    lines = ["\t".join(cols)] + ["\t".join(fmt(v) for v in r) for r in rows]
    (out / "entropy.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("\n".join(lines))
    return 0


def cmd_train(args):
    cfg = build_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cache = {}
    for path in args.clusterings:
        path = Path(path)
        with open(path, encoding="utf-8") as f:
            header = dict(line[1:].rstrip("\n").split("\t", 1) for line in f
                          if line.startswith("#"))
        order = int(header.get("order", cfg.orders[0]))
        mode = header.get("mode", cfg.mode)
        if mode != cfg.mode:
            raise SystemExit(f"{path}: clustering is {mode} but config says {cfg.mode}")
        if order not in cache:
            cache[order] = load_training(cfg, order)
        clustering = load_clustering(path, cache[order])
        model = train_model(clustering, cache[order], cfg.prior, mode, order,
                            cfg.end_marker)
        target = out / (path.stem + ".model")
        save_model(model, target)
        print(f"{target}\tK={model.k}\tpriors={','.join(f'{q:.4f}' for q in model.priors)}")
    return 0


def cmd_rescore(args):
    cfg = build_config(args)
    if not cfg.nbest:
        raise SystemExit("--nbest is required")
    models = [(Path(p), load_model(p)) for p in args.models]
    raw = read_nbest(cfg.nbest)
    cmap = ClassMap.from_file(cfg.class_map) if cfg.class_map else None
    results = []
    runs_seen = {}
    datasets = {}
    for path, model in models:
        if model.mode != cfg.mode or (args.order and model.order not in cfg.orders):
            raise SystemExit(f"{path}: model is {model.mode}/order {model.order}, "
                             f"config is {cfg.mode}/order {cfg.orders}")
        if model.order not in datasets:
            analyses = (read_hypothesis_analyses(cfg.hyp_rules, model.order)
                        if cfg.mode == "rule" else None)
            lists, dropped = prepare_lists(raw, cfg.limit, analyses)
            datasets[model.order] = (lists, dropped, analyses)
        lists, _, analyses = datasets[model.order]
        encoder = HypothesisEncoder.for_model(model, cmap, analyses)
        ev = evaluate(model, lists, encoder, cfg.scale_failures)
        run = runs_seen.get((model.order, model.k), 0)
        runs_seen[(model.order, model.k)] = run + 1
        results.append(RunResult(model.order, model.k, run, model.seed, ev.accuracy,
                                 ev.n_correct, ev.n_lists, math.nan, math.nan, math.nan,
                                 None, 0, ev.correct_vector(),
                                 [r.chosen_index for r in ev.results]))
    cfg.orders = sorted(datasets)
    cfg.k_values = sorted({r.k for r in results})
    report = ExperimentReport(
        cfg.to_dict(), __version__, [],
        {o: baseline(d[0]) for o, d in datasets.items()},
        {o: len(d[0]) for o, d in datasets.items()},
        {o: d[1] for o, d in datasets.items()})
    summarize(report, results, cfg)
    emit_report(report, Path(args.out), figures=not args.no_figures)
    return 0


def emit_report(report, out, figures=True):
    from . import report as rep
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "runs.tsv", "w", encoding="utf-8") as f:
        rep.write_runs_tsv(report, f)
    with open(out / "summary.tsv", "w", encoding="utf-8") as f:
        rep.write_summary_tsv(report, f)
    with open(out / "report.json", "w", encoding="utf-8") as f:
        rep.write_json(report, f)
    text = rep.format_text(report)
    (out / "report.txt").write_text(text, encoding="utf-8")
    if figures:
        from .plotting import write_figures
        write_figures(report, out)
    print(text, end="")


def cmd_experiment(args):
    cfg = build_config(args)
    report = run_experiment(cfg)
    emit_report(report, Path(args.out), figures=not args.no_figures)
    return 0


def cmd_selftest(args):
    from .selftest import all_passed, format_checks, run_selftest
    checks = run_selftest(args.seed, quick=args.quick)
    print(format_checks(checks))
    return 0 if all_passed(checks) else 1


def cmd_generate(args):
    cfg = SyntheticConfig(n_topics=args.topics, n_train=args.train, n_test=args.test,
                          list_size=args.list_size, seed=args.seed)
    corpus, lists, _ = generate(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "train.txt", "w", encoding="utf-8") as f:
        for s in corpus:
            f.write(f"{s.id}\t{' '.join(s.items)}\n")
    with open(out / "nbest.tsv", "w", encoding="utf-8") as f:
        write_nbest(lists, f)
    (out / "synthetic.json").write_text(json.dumps(cfg.as_dict(), sort_keys=True) + "\n")
    print(f"wrote {len(corpus)} sentences and {len(lists)} n-best lists to {out}")
    return 0


def make_parser():
    parser = argparse.ArgumentParser(prog="clusterlm", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"clusterlm {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="cluster training sentences")
    add_data_flags(p)
    add_cluster_flags(p)
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("train", help="build models from clustering files")
    add_data_flags(p)
    p.add_argument("--prior", choices=("sentences", "items"))
    p.add_argument("clusterings", nargs="+")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(func=cmd_train, order=None)

    p = sub.add_parser("rescore", help="select hypotheses from N-best lists")
    add_data_flags(p)
    add_rescore_flags(p)
    p.add_argument("--order", type=int, nargs="+", help="expected model order(s)")
    p.add_argument("models", nargs="+")
    p.add_argument("-o", "--out", required=True, help="report directory")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_rescore)

    p = sub.add_parser("experiment", help="cluster, train and rescore over a K sweep")
    add_data_flags(p)
    add_cluster_flags(p)
    add_rescore_flags(p)
    p.add_argument("--synthetic", action="store_true",
                   help="use the built-in synthetic corpus and N-best lists")
    p.add_argument("--jobs", type=int, help="parallel worker processes")
    p.add_argument("-o", "--out", required=True, help="report directory")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("selftest", help="run the brute-force oracle suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quick", action="store_true")
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("generate", help="write synthetic training data and N-best lists")
    p.add_argument("--topics", type=int, default=10)
    p.add_argument("--train", type=int, default=600)
    p.add_argument("--test", type=int, default=150)
    p.add_argument("--list-size", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CorpusError, ValueError, OSError) as exc:
        print(f"clusterlm: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
