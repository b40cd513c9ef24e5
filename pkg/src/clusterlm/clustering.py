"""Greedy entropy-minimizing sentence clustering.

Sentences are presented in a seeded random order. The first K seed K
singleton clusters; every later sentence starts as an extra singleton and
the cheapest pair among the K+1 clusters is merged. A parallel reassignment
pass then moves sentences to the cluster that predicts them best until
nothing moves.
"""

import logging
import math
import random
from dataclasses import dataclass, field

from .scoring import CountTable, score_sequence, sequence_counts

logger = logging.getLogger(__name__)

# Costs closer than this are treated as tied; the lowest index pair wins.
TIE_EPS = 1e-9

FORMAT_TAG = "clusterlm-clustering"
FORMAT_VERSION = 1


def xlog2x(x):
    return x * math.log2(x) if x > 0 else 0.0


def cluster_entropy(table):
    """``-sum f * log2(f / F_context)`` over the stored events, in bits."""
    h = math.fsum(xlog2x(t) for t in table.context_totals.values())
    return h - math.fsum(xlog2x(c) for c in table.counts.values())


def table_merge_cost(a, b):
    """Entropy increase from summing two count tables.

    Only contexts and events present in both tables contribute, so the
    smaller table is scanned.
    """
    if len(a) > len(b):
        a, b = b, a
    b_totals = b.context_totals
    b_counts = b.counts
    # commutative terms and fsum keep the result exactly symmetric in a, b
    gain = math.fsum(xlog2x(fa + fb) - (xlog2x(fa) + xlog2x(fb))
                     for ctx, fa in a.context_totals.items()
                     if (fb := b_totals.get(ctx)))
    loss = math.fsum(xlog2x(fa + fb) - (xlog2x(fa) + xlog2x(fb))
                     for event, fa in a.counts.items()
                     if (fb := b_counts.get(event)))
    delta = gain - loss
    # log-sum inequality: negatives are rounding noise
    return max(delta, 0.0)


@dataclass
class Cluster:
    members: dict = field(default_factory=dict)  # sentence id -> EventSequence
    table: CountTable = field(default_factory=CountTable)
    entropy: float = 0.0

    @classmethod
    def singleton(cls, es):
        table = sequence_counts(es)
        return cls({es.sentence_id: es}, table, cluster_entropy(table))

    @classmethod
    def from_members(cls, members):
        members = dict(members)
        table = CountTable.from_sequences(members.values())
        return cls(members, table, cluster_entropy(table))

    @property
    def size(self):
        return len(self.members)

    @property
    def n_events(self):
        return self.table.total()

    def absorb(self, other, cost=None):
        if cost is None:
            cost = table_merge_cost(self.table, other.table)
        self.table.update(other.table)
        self.members.update(other.members)
        self.entropy = self.entropy + other.entropy + cost

    def refresh(self):
        self.entropy = cluster_entropy(self.table)


def merge_cost(a, b):
    """Entropy increase (bits, >= 0) of merging two clusters or tables."""
    ta = a.table if isinstance(a, Cluster) else a
    tb = b.table if isinstance(b, Cluster) else b
    return table_merge_cost(ta, tb)


@dataclass
class Clustering:
    clusters: list
    ids: list  # sentence ids in corpus order
    seed: int = 0
    mode: str = "ngram"
    order: int = 1
    fixed_point: bool = None
    rounds: int = 0

    @property
    def k(self):
        return len(self.clusters)

    @property
    def total_entropy(self):
        return math.fsum(c.entropy for c in self.clusters)

    @property
    def n_events(self):
        return sum(c.n_events for c in self.clusters)

    @property
    def per_item_entropy(self):
        n = self.n_events
        return self.total_entropy / n if n else 0.0

    def assignment(self):
        out = {}
        for idx, c in enumerate(self.clusters):
            for sid in c.members:
                out[sid] = idx
        return out

    def sequences(self):
        """Member sequences in corpus order."""
        by_id = {}
        for c in self.clusters:
            by_id.update(c.members)
        return [by_id[sid] for sid in self.ids]

    def partition(self):
        return [frozenset(c.members) for c in self.clusters]

    @classmethod
    def from_assignment(cls, sequences, assignment, k, **meta):
        groups = [dict() for _ in range(k)]
        for es in sequences:
            try:
                idx = assignment[es.sentence_id]
            except KeyError:
                raise ValueError(f"sentence {es.sentence_id!r} has no cluster") from None
            if not 0 <= idx < k:
                raise ValueError(f"cluster index {idx} out of range for K={k}")
            groups[idx][es.sentence_id] = es
        return cls([Cluster.from_members(g) for g in groups],
                   [es.sentence_id for es in sequences], **meta)

    def validate(self, tol=1e-9):
        """Return a list of invariant violations (empty when consistent)."""
        problems = []
        seen = {}
        for idx, c in enumerate(self.clusters):
            for sid in c.members:
                if sid in seen:
                    problems.append(f"sentence {sid} in clusters {seen[sid]} and {idx}")
                seen[sid] = idx
            rebuilt = CountTable.from_sequences(c.members.values())
            if rebuilt != c.table:
                problems.append(f"cluster {idx}: table differs from member counts")
            h = cluster_entropy(rebuilt)
            if abs(h - c.entropy) > tol:
                problems.append(f"cluster {idx}: cached entropy {c.entropy!r} != {h!r}")
        if set(seen) != set(self.ids):
            problems.append("clusters do not partition the corpus")
        return problems


def total_entropy(clustering):
    return clustering.total_entropy


def _best_pair(costs, tie_eps=TIE_EPS):
    """Lowest-cost pair; near-ties go to the lexicographically smallest."""
    lowest = min(costs.values())
    return min(p for p, c in costs.items() if c <= lowest + tie_eps)


def incremental_cluster(sequences, k, seed=0, mode="ngram", order=1,
                        on_merge=None):
    """Cluster ``sequences`` into exactly ``k`` groups.

    ``on_merge(clusters, costs, pair)`` is called before every merge with
    the K+1 live clusters, the pair costs and the chosen pair.
    """
    sequences = list(sequences)
    n = len(sequences)
    if k < 1:
        raise ValueError("K must be at least 1")
    if n < k:
        raise ValueError(f"cannot form {k} clusters from {n} sentences")
    presentation = list(range(n))
    random.Random(seed).shuffle(presentation)

    clusters = [Cluster.singleton(sequences[i]) for i in presentation[:k]]
    costs = {(i, j): merge_cost(clusters[i], clusters[j])
             for i in range(k) for j in range(i + 1, k)}

    for idx in presentation[k:]:
        clusters.append(Cluster.singleton(sequences[idx]))
        for i in range(k):
            costs[(i, k)] = merge_cost(clusters[i], clusters[k])
        i, j = _best_pair(costs)
        if on_merge is not None:
            on_merge(clusters, costs, (i, j))
        cost = costs[(i, j)]
        a, b = clusters[i], clusters[j]
        if len(b.table) > len(a.table):
            a, b = b, a
        a.absorb(b, cost)
        clusters[i] = a
        if j != k:
            clusters[j] = clusters[k]
        clusters.pop()
        for p in range(k):
            costs.pop((p, k), None)
        touched = (i,) if j == k else (i, j)
        for t in touched:
            for p in range(k):
                if p != t:
                    pair = (min(p, t), max(p, t))
                    costs[pair] = merge_cost(clusters[pair[0]], clusters[pair[1]])

    for c in clusters:
        c.refresh()
    return Clustering(clusters, [es.sentence_id for es in sequences], seed,
                      mode, order)


def propose_moves(clustering, leave_one_out=False):
    """All (sentence id, source, target) moves against the current tables."""
    moves = []
    tables = [c.table for c in clustering.clusters]
    for src, c in enumerate(clustering.clusters):
        for sid, es in c.members.items():
            exclude = sequence_counts(es) if leave_one_out else None
            own = score_sequence(tables[src], es, exclude)
            best = None
            target = None
            for j, t in enumerate(tables):
                if j == src:
                    continue
                s = score_sequence(t, es)
                if best is None or best < s:
                    best, target = s, j
            if best is not None and own < best:
                moves.append((sid, src, target))
    return moves


def reassign(clustering, max_rounds=100, leave_one_out=False):
    """Move sentences, in parallel, to the cluster that scores them best.

    Returns a new Clustering with ``fixed_point`` set and ``rounds`` equal to
    the number of rounds in which something moved.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    current = Clustering.from_assignment(
        clustering.sequences(), clustering.assignment(), clustering.k,
        seed=clustering.seed, mode=clustering.mode, order=clustering.order)
    rounds = 0
    moves = propose_moves(current, leave_one_out)
    while moves and rounds < max_rounds:
        rounds += 1
        for sid, src, dst in moves:
            es = current.clusters[src].members.pop(sid)
            current.clusters[src].table.add_sequence(es, -1)
            current.clusters[dst].members[sid] = es
            current.clusters[dst].table.add_sequence(es)
        for c in current.clusters:
            c.refresh()
        logger.debug("reassign round %d: %d moves", rounds, len(moves))
        moves = propose_moves(current, leave_one_out)
    current.fixed_point = not moves
    current.rounds = rounds
    if moves:
        logger.warning("reassignment stopped after %d rounds without converging",
                       rounds)
    return current


def cluster_corpus(sequences, k, seed=0, max_rounds=100, leave_one_out=False,
                   mode="ngram", order=1):
    """Incremental clustering followed by reassignment."""
    c = incremental_cluster(sequences, k, seed, mode=mode, order=order)
    return reassign(c, max_rounds, leave_one_out)


def write_clustering(clustering, f):
    f.write(f"#{FORMAT_TAG}\t{FORMAT_VERSION}\n")
    f.write(f"#K\t{clustering.k}\n")
    f.write(f"#seed\t{clustering.seed}\n")
    f.write(f"#mode\t{clustering.mode}\n")
    f.write(f"#order\t{clustering.order}\n")
    fp = "" if clustering.fixed_point is None else str(clustering.fixed_point).lower()
    f.write(f"#fixed_point\t{fp}\n")
    f.write(f"#rounds\t{clustering.rounds}\n")
    f.write(f"#total_entropy\t{clustering.total_entropy!r}\n")
    assignment = clustering.assignment()
    for sid in clustering.ids:
        f.write(f"{sid}\t{assignment[sid]}\n")


def read_clustering(f, source="<clustering>"):
    """Parse a clustering file into ``(header, assignment)``."""
    header = {}
    assignment = {}
    for lineno, line in enumerate(f, 1):
        line = line.rstrip("\n")
        if not line:
            continue
        fields = line.split("\t")
        if line.startswith("#"):
            header[fields[0][1:]] = fields[1] if len(fields) > 1 else ""
            continue
        if len(fields) != 2:
            raise ValueError(f"{source}:{lineno}: expected 'id<TAB>cluster'")
        assignment[fields[0]] = int(fields[1])
    if header.get(FORMAT_TAG) != str(FORMAT_VERSION):
        raise ValueError(f"{source}: not a {FORMAT_TAG} v{FORMAT_VERSION} file")
    return header, assignment


def save_clustering(clustering, path):
    with open(path, "w", encoding="utf-8") as f:
        write_clustering(clustering, f)


def load_clustering(path, sequences):
    with open(path, encoding="utf-8") as f:
        header, assignment = read_clustering(f, source=str(path))
    fp = header.get("fixed_point", "")
    return Clustering.from_assignment(
        sequences, assignment, int(header["K"]), seed=int(header.get("seed", 0)),
        mode=header.get("mode", "ngram"), order=int(header.get("order", 1)),
        fixed_point=None if fp == "" else fp == "true",
        rounds=int(header.get("rounds", 0)))
