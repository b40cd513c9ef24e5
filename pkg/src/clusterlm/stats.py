"""Significance tests for comparing runs: McNemar, Wilcoxon-Mann-Whitney,
and split-half correlation."""

import math
import statistics
from collections import namedtuple
from dataclasses import dataclass
from fractions import Fraction

EXACT_LIMIT = 20

MannWhitney = namedtuple("MannWhitney", "u p exact")


@dataclass(frozen=True)
class PairedOutcome:
    improved: int  # wrong before, right after
    worsened: int  # right before, wrong after

    def __post_init__(self):
        if self.improved < 0 or self.worsened < 0:
            raise ValueError("counts must be non-negative")

    @classmethod
    def from_vectors(cls, before, after):
        """Count discordant pairs between two per-item correctness vectors."""
        if len(before) != len(after):
            raise ValueError("correctness vectors differ in length")
        improved = sum(1 for b, a in zip(before, after) if a and not b)
        worsened = sum(1 for b, a in zip(before, after) if b and not a)
        return cls(improved, worsened)


def mcnemar_exact(b, c):
    """Exact two-tail p-value as a Fraction: ``2 P(X <= min(b, c))``,
    ``X ~ Binomial(b + c, 1/2)``, capped at 1."""
    n = b + c
    if n == 0:
        raise ValueError("no discordant pairs")
    tail = sum(math.comb(n, i) for i in range(min(b, c) + 1))
    return min(Fraction(2 * tail, 2 ** n), Fraction(1))


def mcnemar(outcome, exact=True):
    """Two-tail McNemar change test on a PairedOutcome.

    With ``exact=False`` the chi-square statistic with continuity
    correction is referred to one degree of freedom.
    """
    b, c = outcome.improved, outcome.worsened
    if b + c == 0:
        raise ValueError("no discordant pairs")
    if exact:
        return float(mcnemar_exact(b, c))
    chi2 = max(abs(b - c) - 1, 0) ** 2 / (b + c)
    return min(1.0, math.erfc(math.sqrt(chi2 / 2)))


def midranks(values):
    """1-based ranks with ties sharing the mean rank."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        r = (i + j) / 2 + 1
        for t in range(i, j + 1):
            ranks[order[t]] = r
        i = j + 1
    return ranks


def _rank_sum_distribution(doubled, m):
    # ways[j][s]: subsets of size j with doubled-rank sum s
    ways = [dict() for _ in range(m + 1)]
    ways[0][0] = 1
    for r in doubled:
        for j in range(min(m, len(doubled)), 0, -1):
            prev = ways[j - 1]
            cur = ways[j]
            for s, w in prev.items():
                cur[s + r] = cur.get(s + r, 0) + w
    return ways[m]


def wilcoxon_mann_whitney(xs, ys, exact=None):
    """U statistic for ``xs`` and a two-tail p-value.

    Exact enumeration over all rank splits is used when ``len(xs) +
    len(ys) <= 20`` (or ``exact=True``); otherwise the normal
    approximation with tie and continuity correction.
    """
    xs, ys = list(xs), list(ys)
    m, n = len(xs), len(ys)
    if not m or not n:
        raise ValueError("both samples must be non-empty")
    ranks = midranks(xs + ys)
    # doubled midranks are integers, so the exact path stays in integers
    doubled = [int(round(2 * r)) for r in ranks]
    rx2 = sum(doubled[:m])
    u = rx2 / 2 - m * (m + 1) / 2
    if exact is None:
        exact = m + n <= EXACT_LIMIT
    if exact:
        # |U - mn/2| compared on the doubled rank-sum scale
        centre2 = m * (m + n + 1)
        dev = abs(rx2 - centre2)
        dist = _rank_sum_distribution(doubled, m)
        hits = sum(w for s, w in dist.items() if abs(s - centre2) >= dev)
        p = Fraction(hits, math.comb(m + n, m))
        return MannWhitney(u, float(min(p, Fraction(1))), True)
    big_n = m + n
    ties = {}
    for r in ranks:
        ties[r] = ties.get(r, 0) + 1
    t_term = sum(t ** 3 - t for t in ties.values()) / (big_n * (big_n - 1))
    var = m * n / 12 * ((big_n + 1) - t_term)
    if var <= 0:
        return MannWhitney(u, 1.0, False)
    z = max(abs(u - m * n / 2) - 0.5, 0.0) / math.sqrt(var)
    return MannWhitney(u, min(1.0, math.erfc(z / math.sqrt(2))), False)


def split_correlation(a, b, method="pearson"):
    """Correlation between two score lists (``pearson`` or ``spearman``)."""
    a, b = list(a), list(b)
    if len(a) != len(b) or len(a) < 3:
        raise ValueError("need two equal-length lists of at least 3 scores")
    if method == "spearman":
        a, b = midranks(a), midranks(b)
    elif method != "pearson":
        raise ValueError(f"unknown correlation method {method!r}")
    if statistics.pvariance(a) == 0 or statistics.pvariance(b) == 0:
        raise ValueError("zero variance")
    r = statistics.correlation(a, b)
    return max(-1.0, min(1.0, r))
