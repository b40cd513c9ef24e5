"""Brute-force reference computations.

These work from raw event lists and plain enumeration, and share no code
with the optimized paths they are used to check.
"""

import itertools
import math
from collections import Counter
from fractions import Fraction


def events_of(sequences):
    return [e for es in sequences for e in es.events]


def direct_entropy(events):
    """``-sum_{(ctx, w)} f log2(f / F_ctx)`` evaluated term by term."""
    pair = Counter(events)
    ctx = Counter(c for c, _ in events)
    return -sum(f * math.log2(f / ctx[c]) for (c, _), f in pair.items())


def direct_merge_cost(seqs_a, seqs_b):
    ea, eb = events_of(seqs_a), events_of(seqs_b)
    return direct_entropy(ea + eb) - direct_entropy(ea) - direct_entropy(eb)


def exhaustive_best_pair(groups, tie_eps=1e-9):
    """Cheapest pair of sequence groups by direct evaluation; lowest index
    pair among near-ties."""
    costs = {}
    for i, j in itertools.combinations(range(len(groups)), 2):
        costs[(i, j)] = direct_merge_cost(groups[i], groups[j])
    lowest = min(costs.values())
    for pair in sorted(costs):
        if costs[pair] <= lowest + tie_eps:
            return pair, costs


def direct_mixture_prob(model, es):
    """``sum_k q_k prod_i p_{k,i}`` from the raw counts."""
    total = 0.0
    for table, q in zip(model.tables, model.priors):
        p = 1.0
        for e in es.events:
            c = table.counts.get(e, 0)
            if c == 0:
                p = 0.0
                break
            ctx_total = sum(v for (ctx, _), v in table.counts.items() if ctx == e[0])
            p *= c / ctx_total
        total += q * p
    return total


def binomial_two_tail(b, c):
    """Enumerate every outcome of b + c fair coin flips."""
    n = b + c
    k = min(b, c)
    hits = 0
    for flips in itertools.product((0, 1), repeat=n):
        if sum(flips) <= k:
            hits += 1
    return min(Fraction(2 * hits, 2 ** n), Fraction(1))


def rank_split_two_tail(xs, ys):
    """Enumerate all assignments of the pooled sample to the first group."""
    pooled = list(xs) + list(ys)
    m, n = len(xs), len(ys)

    def u_of(idx):
        chosen = set(idx)
        a = [pooled[i] for i in chosen]
        b = [pooled[i] for i in range(m + n) if i not in chosen]
        return sum(Fraction(1) if x > y else Fraction(1, 2) if x == y else 0
                   for x in a for y in b)

    u_obs = u_of(range(m))
    centre = Fraction(m * n, 2)
    dev = abs(u_obs - centre)
    splits = list(itertools.combinations(range(m + n), m))
    hits = sum(1 for idx in splits if abs(u_of(idx) - centre) >= dev)
    return u_obs, min(Fraction(hits, len(splits)), Fraction(1))
