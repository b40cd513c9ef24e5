"""Maximum-likelihood count tables and the failure-count score algebra.

A score is a pair ``(lp, f)``: a base-2 log probability summed over the
events that were seen, and the number of events that were not. Failures
dominate: any score with fewer failures beats any score with more.
"""

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

FAILURE = None

FORMAT_TAG = "clusterlm-model"
FORMAT_VERSION = 1


class CountTable:
    """Counts ``f(context, item)`` and context totals ``F(context)``.

    Zero entries are never stored.
    """

    __slots__ = ("counts", "context_totals")

    def __init__(self, counts=None):
        self.counts = {}
        self.context_totals = {}
        if counts:
            for event, c in counts.items():
                self.add(event, c)

    @classmethod
    def from_sequences(cls, sequences):
        table = cls()
        for es in sequences:
            table.add_sequence(es)
        return table

    def add(self, event, count=1):
        ctx = event[0]
        c = self.counts.get(event, 0) + count
        t = self.context_totals.get(ctx, 0) + count
        if c < 0 or t < 0:
            raise ValueError(f"negative count for {event!r}")
        if c:
            self.counts[event] = c
        else:
            self.counts.pop(event, None)
        if t:
            self.context_totals[ctx] = t
        else:
            self.context_totals.pop(ctx, None)

    def add_sequence(self, es, sign=1):
        for event in es.events:
            self.add(event, sign)

    def update(self, other):
        for event, c in other.counts.items():
            self.add(event, c)

    def copy(self):
        t = CountTable()
        t.counts = dict(self.counts)
        t.context_totals = dict(self.context_totals)
        return t

    def total(self):
        return sum(self.context_totals.values())

    def __len__(self):
        return len(self.counts)

    def __eq__(self, other):
        return isinstance(other, CountTable) and self.counts == other.counts

    def __repr__(self):
        return f"CountTable({self.counts!r})"


def sequence_counts(es):
    """Event counts of a single sequence, as a CountTable."""
    return CountTable(Counter(es.events))


def mle_prob(table, event):
    """Relative frequency ``f / F``, or FAILURE for unseen events/contexts."""
    c = table.counts.get(event)
    if not c:
        return FAILURE
    return c / table.context_totals[event[0]]


class _Ordered:
    # (lp1, f1) < (lp2, f2)  iff  f1 > f2  or  (f1 == f2 and lp1 < lp2)
    __slots__ = ()

    def sort_key(self):
        return (-self.f, self.lp)

    def __lt__(self, other):
        return self.f > other.f or (self.f == other.f and self.lp < other.lp)

    def __gt__(self, other):
        return other.__lt__(self)

    def __le__(self, other):
        return not other.__lt__(self)

    def __ge__(self, other):
        return not self.__lt__(other)


@dataclass(frozen=True, eq=True)
class Score(_Ordered):
    lp: float = 0.0
    f: int = 0

    def __add__(self, other):
        return score_add(self, other)

    def shifted(self, delta):
        return Score(self.lp + delta, self.f)


@dataclass(frozen=True, eq=True)
class NormalizedScore(_Ordered):
    lp: float
    f: Fraction


ZERO_EVIDENCE = Score(0.0, 0)


def score_less(s1, s2):
    return s1 < s2


def log2_add(a, b):
    """``log2(2**a + 2**b)`` without underflow."""
    if a < b:
        a, b = b, a
    if b == -math.inf:
        return a
    return a + math.log1p(2.0 ** (b - a)) / math.log(2.0)


def score_add(s1, s2):
    """Combine probabilities from two clusters.

    The side with fewer failures wins outright; on equal failures the
    probabilities are summed.
    """
    if s1.f < s2.f:
        return s1
    if s1.f > s2.f:
        return s2
    return Score(log2_add(s1.lp, s2.lp), s1.f)


def score_sequence(table, es, exclude=None):
    """Score an event sequence under one table.

    ``exclude`` is a CountTable subtracted on the fly (leave-one-out).
    """
    lp = 0.0
    failures = 0
    counts = table.counts
    totals = table.context_totals
    for event in es.events:
        c = counts.get(event, 0)
        t = totals.get(event[0], 0)
        if exclude is not None:
            c -= exclude.counts.get(event, 0)
            t -= exclude.context_totals.get(event[0], 0)
        if c <= 0:
            failures += 1
        else:
            lp += math.log2(c / t)
    return Score(lp, failures)


def normalize_by_length(score, n_events, scale_failures=True):
    """Per-event score; failures are scaled too unless ``scale_failures`` is off."""
    if n_events <= 0:
        raise ValueError("cannot normalize by a non-positive length")
    f = Fraction(score.f, n_events) if scale_failures else Fraction(score.f)
    return NormalizedScore(score.lp / n_events, f)


@dataclass(frozen=True)
class ClusterModel:
    """Frozen per-cluster tables with their priors."""

    tables: tuple
    priors: tuple
    mode: str = "ngram"
    order: int = 1
    prior_kind: str = "sentences"
    end_marker: bool = True
    seed: int = 0  # presentation seed of the clustering it came from

    def __post_init__(self):
        if len(self.tables) < 1 or len(self.tables) != len(self.priors):
            raise ValueError("model needs K >= 1 tables with one prior each")
        if any(q < 0 for q in self.priors):
            raise ValueError("priors must be non-negative")
        if abs(math.fsum(self.priors) - 1.0) > 1e-12:
            raise ValueError(f"priors sum to {math.fsum(self.priors)!r}, not 1")
        if self.mode not in ("ngram", "rule"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def k(self):
        return len(self.tables)

    def cluster_scores(self, es):
        return [score_sequence(t, es) for t in self.tables]


def mixture_score(model, es):
    """Sum over clusters of ``q_k * P_k(es)`` under the failure-aware addition."""
    result = None
    for table, q in zip(model.tables, model.priors):
        if q <= 0:
            continue
        s = score_sequence(table, es).shifted(math.log2(q))
        result = s if result is None else score_add(result, s)
    if result is None:
        raise ValueError("empty model")
    return result


def train_model(clustering, sequences, prior="sentences", mode="ngram", order=1,
                end_marker=True):
    """Build per-cluster tables and priors from a clustering.

    ``prior`` selects what ``|c_k|`` counts: ``"sentences"`` or ``"items"``
    (events).
    """
    assignment = clustering.assignment()
    k = clustering.k
    tables = [CountTable() for _ in range(k)]
    weights = [0] * k
    for es in sequences:
        try:
            idx = assignment[es.sentence_id]
        except KeyError:
            raise ValueError(f"sentence {es.sentence_id!r} is not assigned to a cluster") from None
        tables[idx].add_sequence(es)
        if prior == "sentences":
            weights[idx] += 1
        elif prior == "items":
            weights[idx] += es.n_events
        else:
            raise ValueError(f"unknown prior definition {prior!r}")
    total = sum(weights)
    if total == 0:
        raise ValueError("no training sequences")
    return ClusterModel(tuple(tables), tuple(w / total for w in weights),
                        mode, order, prior, end_marker, getattr(clustering, "seed", 0))


def _fmt_context(ctx):
    return " ".join(ctx)


def write_model(model, f):
    f.write(f"#{FORMAT_TAG}\t{FORMAT_VERSION}\n")
    f.write(f"#mode\t{model.mode}\n")
    f.write(f"#order\t{model.order}\n")
    f.write(f"#K\t{model.k}\n")
    f.write(f"#prior_kind\t{model.prior_kind}\n")
    f.write(f"#end_marker\t{str(model.end_marker).lower()}\n")
    f.write(f"#seed\t{model.seed}\n")
    for k, q in enumerate(model.priors):
        f.write(f"#prior\t{k}\t{q:.16e}\n")
    for k, table in enumerate(model.tables):
        for (ctx, item), c in sorted(table.counts.items()):
            f.write(f"{k}\t{_fmt_context(ctx)}\t{item}\t{c}\n")


def read_model(f, source="<model>"):
    header = {}
    priors = {}
    rows = []
    for lineno, line in enumerate(f, 1):
        line = line.rstrip("\n")
        if not line:
            continue
        fields = line.split("\t")
        if line.startswith("#"):
            key = fields[0][1:]
            if key == "prior":
                priors[int(fields[1])] = float(fields[2])
            else:
                header[key] = fields[1] if len(fields) > 1 else ""
            continue
        if len(fields) != 4:
            raise ValueError(f"{source}:{lineno}: expected 4 tab-separated fields")
        rows.append((lineno, fields))
    if header.get(FORMAT_TAG) != str(FORMAT_VERSION):
        raise ValueError(f"{source}: not a {FORMAT_TAG} v{FORMAT_VERSION} file")
    k = int(header["K"])
    if sorted(priors) != list(range(k)):
        raise ValueError(f"{source}: expected {k} priors")
    tables = [CountTable() for _ in range(k)]
    for lineno, (idx, ctx, item, count) in rows:
        idx = int(idx)
        if not 0 <= idx < k:
            raise ValueError(f"{source}:{lineno}: cluster index {idx} out of range")
        tables[idx].add((tuple(ctx.split()), item), int(count))
    return ClusterModel(tuple(tables), tuple(priors[i] for i in range(k)),
                        header.get("mode", "ngram"), int(header.get("order", 1)),
                        header.get("prior_kind", "sentences"),
                        header.get("end_marker", "true") == "true",
                        int(header.get("seed", 0)))


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as f:
        write_model(model, f)


def load_model(path):
    with open(path, encoding="utf-8") as f:
        return read_model(f, source=str(path))
