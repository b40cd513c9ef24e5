import io
import random

import pytest

from clusterlm.corpus import CorpusError, ClassMap
from clusterlm.rescore import (HypothesisEncoder, NBestList, baseline, evaluate,
                               format_nbest, load_hypothesis_analyses, load_nbest,
                               prepare_lists, restrict_to_analysable, select_hypothesis,
                               truncate_list, write_nbest)
from clusterlm.scoring import ClusterModel, CountTable


def unigram_model(*count_dicts, priors=None, end_marker=False):
    tables = tuple(CountTable({((), w): c for w, c in d.items()}) for d in count_dicts)
    priors = priors or tuple(1 / len(tables) for _ in tables)
    return ClusterModel(tables, tuple(priors), end_marker=end_marker)


def nb(ref, *hyps, lid="L"):
    return NBestList(lid, tuple(ref.split()), tuple(tuple(h.split()) for h in hyps))


class TestFiles:
    def test_roundtrip(self):
        lists = [nb("a b", "a b", "a c"), nb("x", "y", "x", lid="M")]
        buf = io.StringIO()
        write_nbest(lists, buf)
        assert load_nbest(io.StringIO(buf.getvalue())) == lists
        assert format_nbest(lists[0]) == "L\ta b\ta b\ta c"

    def test_malformed(self):
        with pytest.raises(CorpusError, match="x.tsv:2:"):
            load_nbest(["a\tb\tb\n", "only\tref\n"], source="x.tsv")

    def test_empty_hypothesis(self):
        with pytest.raises(CorpusError):
            load_nbest(["a\tb\t \n"])

    def test_default_hyp_ids(self):
        assert nb("a", "a", "b").hyp_ids == ("L:0", "L:1")


class TestTruncate:
    def test_keeps_top(self):
        lst = nb("h12", *[f"h{i}" for i in range(15)])
        t = truncate_list(lst)
        assert len(t) == 10 and t.hypotheses[-1] == ("h9",)
        assert not t.evaluable and lst.evaluable

    def test_short_untouched(self):
        lst = nb("a", "a", "b")
        assert truncate_list(lst, 10) is lst

    def test_prepare_drops_lost_references(self):
        lists = [nb("h12", *[f"h{i}" for i in range(15)]), nb("a", "b", "a")]
        kept, dropped = prepare_lists(lists, 10)
        assert dropped == 1 and [l.id for l in kept] == ["L"]
        assert kept[0].reference == ("a",)


class TestSelect:
    def test_higher_probability_wins(self):
        m = unigram_model({"a": 3, "b": 1})
        r = select_hypothesis(m, nb("a", "b", "a"))
        assert r.chosen_index == 1 and r.correct

    def test_failures_dominate(self):
        m = unigram_model({"a": 1, "b": 99})
        r = select_hypothesis(m, nb("a a", "b z", "a a"))
        assert r.chosen_index == 1

    def test_ties_pick_earliest(self):
        m = unigram_model({"a": 1, "b": 1})
        r = select_hypothesis(m, nb("b", "a", "b", "a b"))
        assert r.chosen_index == 0 and not r.correct

    def test_length_normalized(self):
        # same per-word probability, so the short one does not win on length
        m = unigram_model({"a": 1, "b": 1})
        r = select_hypothesis(m, nb("a b a b", "a b a b", "a"))
        assert r.chosen_index == 0

    def test_failure_scaling(self):
        m = unigram_model({"a": 3, "b": 1})
        lst = nb("z a a a", "z", "z a a a")
        assert select_hypothesis(m, lst).chosen_index == 1
        assert select_hypothesis(m, lst, scale_failures=False).chosen_index == 0

    def test_mixture_helps(self):
        m = unigram_model({"a": 9, "b": 1}, {"c": 1, "d": 9}, priors=[0.5, 0.5])
        assert select_hypothesis(m, nb("a a", "a d", "a a")).chosen_index == 1

    def test_permutation_invariant(self):
        rng = random.Random(0)
        m = unigram_model({w: rng.randint(1, 20) for w in "abcdef"})
        for _ in range(50):
            hyps = {" ".join(rng.choice("abcdefg") for _ in range(rng.randint(1, 4)))
                    for _ in range(6)}
            hyps = sorted(hyps)
            lst = nb(hyps[0], *hyps)
            chosen = lst.hypotheses[select_hypothesis(m, lst).chosen_index]
            enc = HypothesisEncoder.for_model(m)
            scores = [select_hypothesis(m, lst).scores[i] for i in range(len(hyps))]
            if len(set(scores)) < len(scores):
                continue
            rng.shuffle(hyps)
            lst2 = nb(hyps[0], *hyps)
            assert lst2.hypotheses[select_hypothesis(m, lst2, enc).chosen_index] == chosen

    def test_mode_mismatch(self):
        m = unigram_model({"a": 1})
        with pytest.raises(ValueError, match="ngram/1"):
            select_hypothesis(m, nb("a", "a"), HypothesisEncoder("ngram", 2))

    def test_end_marker_follows_model(self):
        m = ClusterModel((CountTable({((), "a"): 1, ((), "</s>"): 1}),), (1.0,))
        r = select_hypothesis(m, nb("a", "a"))
        assert r.scores[0].lp == pytest.approx(-1.0)
        assert r.scores[0].f == 0

    def test_class_map(self):
        cmap = ClassMap(((("new", "york"), "CITY"),))
        m = unigram_model({"to": 1, "CITY": 1})
        enc = HypothesisEncoder(class_map=cmap, end_marker=False)
        r = select_hypothesis(m, nb("to new york", "to new work", "to new york"), enc)
        assert r.chosen_index == 1


class TestEvaluate:
    def test_accuracy_and_exclusion(self):
        m = unigram_model({"a": 3, "b": 1})
        lists = [nb("a", "a", "b", lid="1"), nb("a", "b", "a", lid="2"),
                 nb("b", "a", "b", lid="3"), nb("q", "a", "b", lid="4")]
        ev = evaluate(m, lists)
        assert ev.n_lists == 3 and ev.n_excluded == 1
        assert ev.n_correct == 2
        assert ev.accuracy == pytest.approx(200 / 3)
        assert ev.correct_vector() == [True, True, False]

    def test_nothing_evaluable(self):
        with pytest.raises(ValueError):
            evaluate(unigram_model({"a": 1}), [nb("q", "a")])

    def test_baseline(self):
        assert baseline([nb("a", "a", "b"), nb("a", "a", "b", "c", "d")]) == 37.5
        with pytest.raises(ValueError):
            baseline([])


class TestRuleMode:
    ANALYSES = ["L:0 ROOT>S S>NP", "L:1 ROOT>S S>VP", "# comment"]

    def test_analyses(self):
        a = load_hypothesis_analyses(self.ANALYSES, 2)
        assert a["L:1"] == ((("ROOT",), "S"), (("S",), "VP"))
        a1 = load_hypothesis_analyses(self.ANALYSES, 1)
        assert a1["L:0"] == (((), "S"), ((), "NP"))

    def test_bad_analysis(self):
        with pytest.raises(CorpusError):
            load_hypothesis_analyses(["L:0"], 1)
        with pytest.raises(CorpusError):
            load_hypothesis_analyses(["L:0 S-NP"], 1)

    def test_restrict(self):
        a = load_hypothesis_analyses(self.ANALYSES[:1], 1)
        lst = nb("x", "x", "y")
        r = restrict_to_analysable(lst, a)
        assert r.hypotheses == (("x",),) and r.hyp_ids == ("L:0",)
        assert restrict_to_analysable(lst, {}) is None
        kept, dropped = prepare_lists([nb("y", "x", "y")], 10, a)
        assert kept == [] and dropped == 1

    def test_select(self):
        a = load_hypothesis_analyses(self.ANALYSES, 2)
        table = CountTable({(("ROOT",), "S"): 2, (("S",), "VP"): 3, (("S",), "NP"): 1})
        m = ClusterModel((table,), (1.0,), mode="rule", order=2)
        enc = HypothesisEncoder("rule", 2, analyses=a)
        r = select_hypothesis(m, nb("y", "x", "y"), enc)
        assert r.chosen_index == 1 and r.correct

    def test_rule_encoder_needs_analyses(self):
        with pytest.raises(ValueError):
            HypothesisEncoder("rule", 1)
