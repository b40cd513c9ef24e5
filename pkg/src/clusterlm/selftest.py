"""Built-in oracle suite run by ``clusterlm selftest``."""

import random
from dataclasses import dataclass

from . import oracles
from .clustering import (cluster_entropy, incremental_cluster, merge_cost,
                         propose_moves, reassign)
from .corpus import Corpus, corpus_events
from .scoring import ClusterModel, CountTable, mixture_score
from .stats import mcnemar_exact, wilcoxon_mann_whitney
from .synthetic import tiny_corpus

TOL = 1e-9


@dataclass
class Check:
    name: str
    status: str  # pass / fail / skipped
    detail: str = ""


class Mismatch(Exception):
    pass


def check_merges(sequences, k, seed):
    """Run incremental clustering; compare every merge with the oracle."""
    n_merges = 0

    def on_merge(clusters, costs, pair):
        nonlocal n_merges
        groups = [list(c.members.values()) for c in clusters]
        want, direct = oracles.exhaustive_best_pair(groups)
        if pair != want:
            raise Mismatch(f"merge chose {pair}, oracle {want}")
        for p, cost in costs.items():
            if abs(cost - direct[p]) > TOL:
                raise Mismatch(f"merge cost {p}: {cost!r} vs {direct[p]!r}")
        for c, g in zip(clusters, groups):
            h = oracles.direct_entropy(oracles.events_of(g))
            if abs(c.entropy - h) > TOL:
                raise Mismatch(f"cached entropy {c.entropy!r} vs {h!r}")
        n_merges += 1

    clustering = incremental_cluster(sequences, k, seed, on_merge=on_merge)
    return clustering, n_merges


def check_fixed_point(clustering):
    if clustering.fixed_point and propose_moves(clustering):
        raise Mismatch("converged clustering still has improving moves")


def merge_suite(rng, n_corpora=50, corpora=None):
    if corpora is None:
        corpora = [tiny_corpus(rng) for _ in range(n_corpora)]
    if not corpora:
        return Check("merge oracle", "skipped", "no corpora")
    merges = 0
    for corpus in corpora:
        if len(corpus) == 0:
            return Check("merge oracle", "skipped", "empty corpus")
        order = rng.randint(1, 3)
        seqs = corpus_events(corpus, order)
        k = rng.randint(1, min(3, len(seqs)))
        clustering, m = check_merges(seqs, k, rng.randrange(1 << 30))
        merges += m
        for c in clustering.clusters:
            if abs(cluster_entropy(c.table) - oracles.direct_entropy(
                    oracles.events_of(c.members.values()))) > TOL:
                raise Mismatch("cluster_entropy disagrees with direct formula")
        check_fixed_point(reassign(clustering))
    return Check("merge oracle", "pass", f"{len(corpora)} corpora, {merges} merges")


def entropy_suite(rng, n=200):
    for _ in range(n):
        a = tiny_corpus(rng, max_sentences=4)
        b = tiny_corpus(rng, max_sentences=4)
        sa, sb = corpus_events(a, 2), corpus_events(b, 2)
        ta, tb = CountTable.from_sequences(sa), CountTable.from_sequences(sb)
        got = merge_cost(ta, tb)
        want = oracles.direct_merge_cost(sa, sb)
        if abs(got - want) > TOL:
            raise Mismatch(f"merge_cost {got!r} vs {want!r}")
    return Check("entropy oracle", "pass", f"{n} table pairs")


def mixture_suite(rng, n=1000):
    for _ in range(n):
        corpus = tiny_corpus(rng, max_sentences=6, min_sentences=3)
        order = rng.randint(1, 2)
        seqs = corpus_events(corpus, order)
        k = rng.randint(1, 3)
        tables = [CountTable() for _ in range(k)]
        for i, es in enumerate(seqs):
            tables[i % k].add_sequence(es)
        weights = [rng.randint(1, 5) for _ in range(k)]
        model = ClusterModel(tuple(tables), tuple(w / sum(weights) for w in weights),
                             order=order)
        es = seqs[rng.randrange(min(k, len(seqs)))]
        s = mixture_score(model, es)
        if s.f:
            raise Mismatch("sequence drawn from its own cluster scored a failure")
        want = oracles.direct_mixture_prob(model, es)
        if abs(2.0 ** s.lp - want) > TOL * max(1.0, want):
            raise Mismatch(f"mixture {2.0 ** s.lp!r} vs {want!r}")
    return Check("mixture oracle", "pass", f"{n} cases")


def stats_suite(rng):
    for b in range(0, 9):
        for c in range(0, 9):
            if b + c == 0:
                continue
            if mcnemar_exact(b, c) != oracles.binomial_two_tail(b, c):
                raise Mismatch(f"mcnemar({b},{c})")
    for _ in range(40):
        m, n = rng.randint(1, 5), rng.randint(1, 5)
        xs = [rng.randint(0, 4) for _ in range(m)]
        ys = [rng.randint(0, 4) for _ in range(n)]
        res = wilcoxon_mann_whitney(xs, ys)
        u, p = oracles.rank_split_two_tail(xs, ys)
        if abs(res.u - float(u)) > 1e-12 or abs(res.p - float(p)) > 1e-12:
            raise Mismatch(f"wmw({xs}, {ys}): {res} vs U={u} p={p}")
    return Check("stats enumeration", "pass", "McNemar 0..8 x 0..8, 40 WMW samples")


def run_selftest(seed=0, quick=False):
    rng = random.Random(seed)
    suites = [
        ("merge oracle", lambda: merge_suite(rng, 10 if quick else 50)),
        ("entropy oracle", lambda: entropy_suite(rng, 50 if quick else 200)),
        ("mixture oracle", lambda: mixture_suite(rng, 200 if quick else 1000)),
        ("stats enumeration", lambda: stats_suite(rng)),
        ("empty corpus", lambda: merge_suite(rng, corpora=[Corpus(())])),
    ]
    out = []
    for name, fn in suites:
        try:
            check = fn()
            check.name = name
        except Mismatch as exc:
            check = Check(name, "fail", str(exc))
        out.append(check)
    return out


def format_checks(checks):
    width = max(len(c.name) for c in checks)
    return "\n".join(f"{c.name.ljust(width)}  {c.status.upper():7s}  {c.detail}"
                     for c in checks)


def all_passed(checks):
    return not any(c.status == "fail" for c in checks)
