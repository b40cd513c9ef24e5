import io
import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clusterlm import oracles
from clusterlm.clustering import (Cluster, Clustering, cluster_corpus, cluster_entropy,
                                  incremental_cluster, merge_cost, propose_moves,
                                  read_clustering, reassign, write_clustering)
from clusterlm.corpus import corpus_events
from clusterlm.scoring import CountTable, score_sequence
from clusterlm.selftest import check_merges
from clusterlm.synthetic import tiny_corpus

from conftest import sentences


def test_entropy_small_table():
    t = CountTable({(("a",), "b"): 1, (("a",), "c"): 1, (("b",), "d"): 2})
    assert cluster_entropy(t) == pytest.approx(2.0, abs=1e-12)


def test_entropy_single_item_is_zero():
    assert cluster_entropy(CountTable({((), "a"): 7})) == 0.0


def test_merge_cost_example():
    # {a:2} + {b:2}: two zero-entropy clusters become one 4-bit cluster
    a = CountTable({((), "a"): 2})
    b = CountTable({((), "b"): 2})
    assert merge_cost(a, b) == pytest.approx(4.0, abs=1e-12)
    assert merge_cost(a, a.copy()) == 0.0


def test_merge_cost_symmetric_and_nonnegative():
    rng = random.Random(5)
    for _ in range(200):
        sa = corpus_events(tiny_corpus(rng, 4), 2)
        sb = corpus_events(tiny_corpus(rng, 4), 2)
        ta, tb = CountTable.from_sequences(sa), CountTable.from_sequences(sb)
        assert merge_cost(ta, tb) == merge_cost(tb, ta) >= 0.0
        assert merge_cost(ta, tb) == pytest.approx(oracles.direct_merge_cost(sa, sb),
                                                   abs=1e-9)


def _two_partitions(ids):
    first, rest = ids[0], ids[1:]
    for r in range(len(rest)):
        for combo in itertools.combinations(rest, r):
            a = frozenset((first,) + combo)
            yield {a, frozenset(ids) - a}


def test_ab_corpus_every_presentation_order(ab_events):
    ids = [es.sentence_id for es in ab_events]
    parts = list(_two_partitions(ids))
    assert len(parts) == 7
    by_id = {es.sentence_id: es for es in ab_events}

    def entropy_of(p):
        return sum(oracles.direct_entropy(oracles.events_of([by_id[s] for s in g]))
                   for g in p)
    best = min(parts, key=entropy_of)
    assert best == {frozenset({"s0", "s1"}), frozenset({"s2", "s3"})}
    assert entropy_of(best) == 0.0
    for perm in itertools.permutations(ab_events):
        c = cluster_corpus(list(perm), 2, seed=0)
        assert set(c.partition()) == best
        assert c.total_entropy == 0.0
        assert c.fixed_point


def test_k1_is_whole_corpus(ab_events):
    c = incremental_cluster(ab_events, 1, seed=3)
    assert c.k == 1 and c.clusters[0].size == 4
    assert c.total_entropy == pytest.approx(4 * 2.0)


def test_k_equals_n_is_singletons(ab_events):
    c = incremental_cluster(ab_events, 4, seed=3)
    assert sorted(cl.size for cl in c.clusters) == [1, 1, 1, 1]
    assert c.total_entropy == 0.0


def test_bad_k(ab_events):
    with pytest.raises(ValueError):
        incremental_cluster(ab_events, 0)
    with pytest.raises(ValueError, match="cannot form 5"):
        incremental_cluster(ab_events, 5)


def test_deterministic_for_seed():
    rng = random.Random(11)
    seqs = corpus_events(tiny_corpus(rng, 8), 2)
    runs = [cluster_corpus(seqs, 3, seed=42).assignment() for _ in range(3)]
    assert runs[0] == runs[1] == runs[2]


def test_merges_match_oracle():
    rng = random.Random(2)
    total = 0
    for _ in range(30):
        seqs = corpus_events(tiny_corpus(rng, 8, min_sentences=3), rng.randint(1, 3))
        _, n = check_merges(seqs, rng.randint(1, 3), rng.randrange(1000))
        total += n
    assert total > 30


def test_reassign_moves_misplaced_sentence():
    seqs = corpus_events(sentences("a a", "a a", "b b", "b b"), 1, end_marker=False)
    start = Clustering.from_assignment(seqs, {"s0": 0, "s1": 1, "s2": 1, "s3": 1}, 2)
    moves = propose_moves(start)
    assert moves == [("s1", 1, 0)]
    out = reassign(start)
    assert out.assignment() == {"s0": 0, "s1": 0, "s2": 1, "s3": 1}
    assert out.fixed_point and out.rounds == 1
    assert out.total_entropy == 0.0
    # the input clustering is left alone
    assert start.assignment()["s1"] == 1


def test_reassign_leave_one_out_can_oscillate():
    # each sentence only predicts itself, so leave-one-out always prefers the
    # other cluster and a parallel swap never settles
    seqs = corpus_events(sentences("a", "b"), 1)
    start = Clustering.from_assignment(seqs, {"s0": 0, "s1": 1}, 2)
    out = reassign(start, max_rounds=3, leave_one_out=True)
    assert out.fixed_point is False
    assert out.rounds == 3
    assert out.assignment() == {"s0": 1, "s1": 0}
    # self-inclusive scoring is already stable here
    stable = reassign(start, max_rounds=3)
    assert stable.fixed_point and stable.rounds == 0


def test_reassign_keeps_empty_clusters():
    seqs = corpus_events(sentences("a a", "a a"), 1)
    start = Clustering.from_assignment(seqs, {"s0": 0, "s1": 0}, 2)
    out = reassign(start)
    assert out.k == 2 and out.clusters[1].size == 0


def test_max_rounds_validated(ab_events):
    c = incremental_cluster(ab_events, 2)
    with pytest.raises(ValueError):
        reassign(c, max_rounds=0)


def test_validate_flags_problems(ab_events):
    c = cluster_corpus(ab_events, 2, seed=1)
    assert c.validate() == []
    c.clusters[0].entropy += 1e-6
    assert any("cached entropy" in p for p in c.validate())
    c.clusters[0].refresh()
    c.clusters[1].table.add(((), "zz"))
    assert any("table differs" in p for p in c.validate())


def test_clustering_file_roundtrip(ab_events):
    c = cluster_corpus(ab_events, 2, seed=9)
    buf = io.StringIO()
    write_clustering(c, buf)
    header, assignment = read_clustering(io.StringIO(buf.getvalue()))
    assert header["K"] == "2" and header["seed"] == "9"
    assert header["fixed_point"] == "true"
    assert assignment == c.assignment()
    assert list(assignment) == c.ids


def test_clustering_file_rejects_garbage():
    with pytest.raises(ValueError):
        read_clustering(io.StringIO("s0\t1\n"))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 3), st.integers(1, 3))
def test_converged_runs_have_no_improving_move(seed, order, k):
    rng = random.Random(seed)
    seqs = corpus_events(tiny_corpus(rng, 8, min_sentences=3), order)
    c = cluster_corpus(seqs, k, seed=seed)
    assert c.validate() == []
    if c.fixed_point:
        tables = [cl.table for cl in c.clusters]
        for idx, cl in enumerate(c.clusters):
            for es in cl.members.values():
                own = score_sequence(tables[idx], es)
                assert not any(own < score_sequence(t, es)
                               for j, t in enumerate(tables) if j != idx)


def test_singleton_and_absorb_track_entropy():
    seqs = corpus_events(sentences("a b a", "b c", "c c a"), 2)
    a = Cluster.singleton(seqs[0])
    for es in seqs[1:]:
        a.absorb(Cluster.singleton(es))
    want = oracles.direct_entropy(oracles.events_of(seqs))
    assert a.entropy == pytest.approx(want, abs=1e-9)
    assert a.size == 3
