"""Sweeps over model order, cluster count and presentation seed."""

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

from . import __version__
from .clustering import cluster_corpus
from .corpus import ClassMap, corpus_events, read_corpus, read_rule_events
from .rescore import (HypothesisEncoder, baseline, evaluate, prepare_lists,
                      read_hypothesis_analyses, read_nbest)
from .scoring import mixture_score, train_model
from .stats import PairedOutcome, mcnemar, split_correlation, wilcoxon_mann_whitney
from .synthetic import SyntheticConfig, generate

logger = logging.getLogger(__name__)


@dataclass
class ExperimentConfig:
    mode: str = "ngram"
    orders: list = field(default_factory=lambda: [1])
    k_values: list = field(default_factory=lambda: [1, 2, 3, 5, 10])
    runs_per_k: int = 10
    base_seed: int = 0
    corpus: Optional[str] = None
    class_map: Optional[str] = None
    rules: Optional[str] = None
    nbest: Optional[str] = None
    hyp_rules: Optional[str] = None
    synthetic: Optional[dict] = None
    limit: int = 10
    prior: str = "sentences"
    leave_one_out: bool = False
    scale_failures: bool = True
    end_marker: bool = True
    max_rounds: int = 100
    wmw_pairs: list = field(default_factory=list)
    jobs: int = 1

    def __post_init__(self):
        if isinstance(self.orders, int):
            self.orders = [self.orders]
        self.orders = [int(o) for o in self.orders]
        self.k_values = [int(k) for k in self.k_values]
        self.wmw_pairs = [tuple(int(x) for x in p) for p in self.wmw_pairs]

    def validate(self):
        if self.mode not in ("ngram", "rule"):
            raise ValueError(f"mode must be 'ngram' or 'rule', not {self.mode!r}")
        if not self.k_values or any(k < 1 for k in self.k_values):
            raise ValueError("K values must all be >= 1")
        if self.runs_per_k < 1:
            raise ValueError("runs_per_k must be >= 1")
        if not self.orders or any(o < 1 for o in self.orders):
            raise ValueError("orders must be >= 1")
        if self.mode == "rule" and any(o not in (1, 2) for o in self.orders):
            raise ValueError("rule mode supports orders 1 and 2 only")
        if self.prior not in ("sentences", "items"):
            raise ValueError("prior must be 'sentences' or 'items'")
        if self.synthetic is None:
            if self.mode == "ngram" and not self.corpus:
                raise ValueError("ngram mode needs a corpus (or a synthetic config)")
            if self.mode == "rule" and not (self.rules and self.hyp_rules):
                raise ValueError("rule mode needs --rules and --hyp-rules")
        return self

    def run_seed(self, run_index):
        return self.base_seed + run_index

    def to_dict(self):
        d = asdict(self)
        d["wmw_pairs"] = [list(p) for p in self.wmw_pairs]
        d.pop("jobs")  # scheduling only, never affects results
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "order" in d:
            d["orders"] = d.pop("order")
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


@dataclass
class Dataset:
    train: list  # EventSequence
    lists: list  # evaluable NBestList
    encoder: HypothesisEncoder
    n_dropped: int


def load_dataset(cfg, order):
    if cfg.synthetic is not None:
        corpus, lists, _ = generate(SyntheticConfig(**cfg.synthetic))
        train = corpus_events(corpus, order, cfg.end_marker)
        lists, dropped = prepare_lists(lists, cfg.limit)
        encoder = HypothesisEncoder("ngram", order, end_marker=cfg.end_marker)
        return Dataset(train, lists, encoder, dropped)
    raw = read_nbest(cfg.nbest)
    if cfg.mode == "rule":
        train = read_rule_events(cfg.rules, order)
        analyses = read_hypothesis_analyses(cfg.hyp_rules, order)
        lists, dropped = prepare_lists(raw, cfg.limit, analyses)
        return Dataset(train, lists, HypothesisEncoder("rule", order, analyses=analyses),
                       dropped)
    cmap = ClassMap.from_file(cfg.class_map) if cfg.class_map else None
    train = corpus_events(read_corpus(cfg.corpus, cmap), order, cfg.end_marker)
    lists, dropped = prepare_lists(raw, cfg.limit)
    encoder = HypothesisEncoder("ngram", order, cmap, end_marker=cfg.end_marker)
    return Dataset(train, lists, encoder, dropped)


@dataclass
class RunResult:
    order: int
    k: int
    run: int
    seed: int
    accuracy: float
    n_correct: int
    n_lists: int
    total_entropy: float
    per_item_entropy: float
    mixture_entropy: float
    fixed_point: bool
    rounds: int
    correct: list
    chosen: list
    half_accuracy: tuple = (math.nan, math.nan)
    improved: Optional[int] = None
    worsened: Optional[int] = None
    mcnemar_p: Optional[float] = None


def mixture_entropy_per_item(model, sequences):
    """Training-set entropy under the soft mixture, bits per event."""
    lp = 0.0
    n = 0
    for es in sequences:
        s = mixture_score(model, es)
        if s.f:
            return math.inf
        lp += s.lp
        n += es.n_events
    return -lp / n


def _half_accuracy(correct):
    half = len(correct) // 2
    a, b = correct[:half], correct[half:]
    acc = lambda v: 100.0 * sum(v) / len(v) if v else math.nan  # noqa: E731
    return acc(a), acc(b)


def run_one(cfg, data, order, k, run):
    seed = cfg.run_seed(run)
    clustering = cluster_corpus(data.train, k, seed, cfg.max_rounds, cfg.leave_one_out,
                                mode=cfg.mode, order=order)
    model = train_model(clustering, data.train, cfg.prior, cfg.mode, order,
                        cfg.end_marker)
    ev = evaluate(model, data.lists, data.encoder, cfg.scale_failures)
    correct = ev.correct_vector()
    return RunResult(order, k, run, seed, ev.accuracy, ev.n_correct, ev.n_lists,
                     clustering.total_entropy, clustering.per_item_entropy,
                     mixture_entropy_per_item(model, data.train),
                     clustering.fixed_point, clustering.rounds, correct,
                     [r.chosen_index for r in ev.results], _half_accuracy(correct))


def _job(args):
    cfg, order, k, run = args
    return run_one(cfg, load_dataset(cfg, order), order, k, run)


@dataclass
class ExperimentReport:
    config: dict
    version: str
    runs: list
    baselines: dict  # order -> percent
    n_lists: dict
    n_dropped: dict
    means: list = field(default_factory=list)
    wmw: list = field(default_factory=list)
    correlations: list = field(default_factory=list)


def plan(cfg):
    jobs = []
    for order in cfg.orders:
        ks = cfg.k_values if 1 in cfg.k_values else [1] + cfg.k_values
        for k in ks:
            # K=1 is a single cluster whatever the seed
            n_runs = 1 if k == 1 else cfg.runs_per_k
            for run in range(n_runs):
                jobs.append((order, k, run))
    return jobs


def run_experiment(cfg):
    cfg.validate()
    jobs = plan(cfg)
    datasets = {order: load_dataset(cfg, order) for order in cfg.orders}
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            results = list(pool.map(_job, [(cfg,) + j for j in jobs]))
    else:
        results = [run_one(cfg, datasets[o], o, k, r) for o, k, r in jobs]
    report = ExperimentReport(
        cfg.to_dict(), __version__, [],
        {o: baseline(d.lists) for o, d in datasets.items()},
        {o: len(d.lists) for o, d in datasets.items()},
        {o: d.n_dropped for o, d in datasets.items()})
    summarize(report, results, cfg)
    return report


def summarize(report, results, cfg):
    """Fill per-K means, McNemar against K=1, split correlations and WMW."""
    refs = {r.order: r for r in results if r.k == 1}
    shown = set(cfg.k_values)
    for r in results:
        ref = refs.get(r.order)
        if r.k != 1 and ref is not None:
            po = PairedOutcome.from_vectors(ref.correct, r.correct)
            r.improved, r.worsened = po.improved, po.worsened
            r.mcnemar_p = mcnemar(po) if po.improved + po.worsened else 1.0
    report.runs = [r for r in results if r.k in shown]
    by_cond = {}
    for r in report.runs:
        by_cond.setdefault((r.order, r.k), []).append(r)
    for (order, k), rs in by_cond.items():
        ref = refs.get(order)
        mean_acc = math.fsum(r.accuracy for r in rs) / len(rs)
        mean_h = math.fsum(r.per_item_entropy for r in rs) / len(rs)
        ref_h = ref.per_item_entropy if ref is not None else math.nan
        reduction = 100.0 * (1 - mean_h / ref_h) if ref_h > 0 else (
            0.0 if ref_h == 0 else math.nan)
        report.means.append({
            "order": order, "k": k, "runs": len(rs), "mean_accuracy": mean_acc,
            "mean_per_item_entropy": mean_h, "entropy_reduction_pct": reduction,
            "mean_mixture_entropy": math.fsum(r.mixture_entropy for r in rs) / len(rs),
            "n_significant": sum(1 for r in rs if r.mcnemar_p is not None
                                 and r.mcnemar_p < 0.05),
        })
        if len(rs) >= 3:
            a = [r.half_accuracy[0] for r in rs]
            b = [r.half_accuracy[1] for r in rs]
            try:
                corr = split_correlation(a, b)
            except ValueError:
                corr = math.nan
            report.correlations.append({"order": order, "k": k, "r": corr})
    for order in cfg.orders:
        for k1, k2 in cfg.wmw_pairs:
            xs = [r.accuracy for r in by_cond.get((order, k1), [])]
            ys = [r.accuracy for r in by_cond.get((order, k2), [])]
            if not xs or not ys:
                logger.warning("no runs for WMW pair (%d, %d)", k1, k2)
                continue
            res = wilcoxon_mann_whitney(xs, ys)
            report.wmw.append({"order": order, "k1": k1, "k2": k2,
                               "u": res.u, "p": res.p, "exact": res.exact})
    return report
