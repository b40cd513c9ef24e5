import math
import random
from fractions import Fraction

import pytest

from clusterlm import oracles
from clusterlm.stats import (PairedOutcome, mcnemar, mcnemar_exact, midranks,
                             split_correlation, wilcoxon_mann_whitney)


class TestMcNemar:
    def test_known_values(self):
        assert mcnemar_exact(9, 1) == Fraction(22, 1024)
        assert mcnemar_exact(10, 0) == Fraction(2, 1024)
        assert mcnemar_exact(3, 3) == 1

    def test_symmetric(self):
        for b in range(12):
            for c in range(12):
                if b + c:
                    assert mcnemar_exact(b, c) == mcnemar_exact(c, b)

    def test_matches_enumeration(self):
        for b in range(7):
            for c in range(7):
                if b + c:
                    assert mcnemar_exact(b, c) == oracles.binomial_two_tail(b, c)

    def test_chi_square_variant(self):
        exact = mcnemar(PairedOutcome(30, 12))
        approx = mcnemar(PairedOutcome(30, 12), exact=False)
        assert approx == pytest.approx(exact, abs=0.01)
        assert mcnemar(PairedOutcome(5, 5), exact=False) == 1.0

    def test_no_discordant(self):
        with pytest.raises(ValueError):
            mcnemar(PairedOutcome(0, 0))

    def test_from_vectors(self):
        po = PairedOutcome.from_vectors([1, 0, 0, 1, 0], [1, 1, 1, 0, 0])
        assert (po.improved, po.worsened) == (2, 1)
        with pytest.raises(ValueError):
            PairedOutcome.from_vectors([1], [1, 0])


class TestRanks:
    def test_midranks(self):
        assert midranks([10, 20, 10, 30]) == [1.5, 3.0, 1.5, 4.0]


class TestWMW:
    def test_separated_pairs(self):
        r = wilcoxon_mann_whitney([1, 2], [3, 4])
        assert r.u == 0 and r.exact
        assert r.p == pytest.approx(1 / 3, abs=1e-12)

    def test_ten_vs_ten(self):
        r = wilcoxon_mann_whitney(range(1, 11), range(11, 21))
        assert r.p == pytest.approx(2 / 184756, abs=1e-15)

    def test_symmetric(self):
        xs, ys = [3, 1, 4, 1, 5], [9, 2, 6, 5]
        a, b = wilcoxon_mann_whitney(xs, ys), wilcoxon_mann_whitney(ys, xs)
        assert a.p == b.p
        assert a.u + b.u == len(xs) * len(ys)

    def test_matches_enumeration_with_ties(self):
        rng = random.Random(3)
        for _ in range(60):
            xs = [rng.randint(0, 3) for _ in range(rng.randint(1, 5))]
            ys = [rng.randint(0, 3) for _ in range(rng.randint(1, 5))]
            r = wilcoxon_mann_whitney(xs, ys)
            u, p = oracles.rank_split_two_tail(xs, ys)
            assert r.u == float(u)
            assert r.p == pytest.approx(float(p), abs=1e-12)

    def test_normal_close_to_exact(self):
        rng = random.Random(8)
        for _ in range(20):
            xs = [rng.gauss(0, 1) for _ in range(10)]
            ys = [rng.gauss(0.7, 1) for _ in range(10)]
            exact = wilcoxon_mann_whitney(xs, ys, exact=True).p
            normal = wilcoxon_mann_whitney(xs, ys, exact=False).p
            assert abs(exact - normal) < 0.02

    def test_all_tied(self):
        assert wilcoxon_mann_whitney([1] * 15, [1] * 15).p == 1.0
        assert wilcoxon_mann_whitney([1, 1], [1]).p == 1.0

    def test_empty(self):
        with pytest.raises(ValueError):
            wilcoxon_mann_whitney([], [1])


class TestCorrelation:
    def test_pearson(self):
        assert split_correlation([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5)
        assert split_correlation([1, 2, 3, 4], [2, 4, 6, 8]) == pytest.approx(1.0)

    def test_spearman(self):
        assert split_correlation([1, 2, 3, 4], [1, 4, 9, 100],
                                 method="spearman") == pytest.approx(1.0)

    def test_errors(self):
        with pytest.raises(ValueError):
            split_correlation([1, 2], [1, 2])
        with pytest.raises(ValueError):
            split_correlation([1, 1, 1], [1, 2, 3])
        with pytest.raises(ValueError):
            split_correlation([1, 2, 3], [1, 2, 3], method="kendall")

    def test_bounded(self):
        rng = random.Random(1)
        for _ in range(100):
            a = [rng.random() for _ in range(5)]
            assert -1.0 <= split_correlation(a, [2 * x for x in a]) <= 1.0
            assert not math.isnan(split_correlation(a, a[::-1]))
