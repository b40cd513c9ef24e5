"""Synthetic corpora and N-best lists for exercising the pipeline without
recognizer output.

Each subpopulation ("topic") fills a shared carrier frame with its own
content words, drawn with Zipf-like weights. Distractor hypotheses swap
content words for words from the global content vocabulary, so an
unclustered unigram model is easily fooled by frequent foreign words while
a topic-aware mixture is not.
"""

import random
from dataclasses import asdict, dataclass

from .corpus import Corpus, Sentence
from .rescore import NBestList

FRAMES = (
    ("show", "me", "{0}", "{1}"),
    ("list", "{0}", "{1}", "please"),
    ("what", "are", "the", "{0}", "{1}", "{2}"),
    ("i", "need", "{0}", "{1}", "{2}"),
    ("give", "me", "{0}", "{1}"),
    ("{0}", "{1}", "{2}"),
)


@dataclass(frozen=True)
class SyntheticConfig:
    n_topics: int = 10
    words_per_topic: int = 6
    n_train: int = 600
    n_test: int = 150
    list_size: int = 10
    max_substitutions: int = 2
    seed: int = 0

    def as_dict(self):
        return asdict(self)


def topic_vocabulary(cfg):
    return [[f"t{t}w{i}" for i in range(cfg.words_per_topic)]
            for t in range(cfg.n_topics)]


def _weights(n):
    return [1.0 / (i + 1) for i in range(n)]


def generate_sentence(rng, topic_words):
    frame = rng.choice(FRAMES)
    slots = sum(1 for tok in frame if tok.startswith("{"))
    fill = rng.choices(topic_words, weights=_weights(len(topic_words)), k=slots)
    return tuple(fill[int(tok[1])] if tok.startswith("{") else tok for tok in frame)


def generate_topic_sentences(cfg, n, rng):
    vocab = topic_vocabulary(cfg)
    out = []
    for _ in range(n):
        t = rng.randrange(cfg.n_topics)
        out.append((t, generate_sentence(rng, vocab[t])))
    return out


def _distractor(rng, ref, content, all_content, max_sub):
    hyp = list(ref)
    positions = [i for i, tok in enumerate(hyp) if tok in content]
    n_sub = rng.randint(1, min(len(positions), max_sub))
    for i in rng.sample(positions, n_sub):
        hyp[i] = rng.choice(all_content)
    return tuple(hyp)


def make_nbest(cfg, references, rng):
    vocab = topic_vocabulary(cfg)
    content = {w for words in vocab for w in words}
    all_content = sorted(content)
    lists = []
    for idx, ref in enumerate(references):
        hyps = {ref}
        attempts = 0
        while len(hyps) < cfg.list_size and attempts < 50 * cfg.list_size:
            attempts += 1
            hyps.add(_distractor(rng, ref, content, all_content,
                                 cfg.max_substitutions))
        hyps = sorted(hyps)
        rng.shuffle(hyps)
        lists.append(NBestList(f"n{idx}", ref, tuple(hyps)))
    return lists


def generate(cfg):
    """Return ``(train_corpus, nbest_lists, train_topics)``."""
    rng = random.Random(cfg.seed)
    train = generate_topic_sentences(cfg, cfg.n_train, rng)
    test = generate_topic_sentences(cfg, cfg.n_test, rng)
    corpus = Corpus.from_sentences(
        Sentence(f"s{i}", items) for i, (_, items) in enumerate(train))
    lists = make_nbest(cfg, [items for _, items in test], rng)
    return corpus, lists, [t for t, _ in train]


def separable_corpus(n=200, seed=0, varied=True):
    """Two templates with disjoint vocabularies.

    With ``varied=False`` each template repeats a single word, so a perfect
    split has zero unigram entropy when end markers are left out.
    """
    rng = random.Random(seed)
    sentences = []
    labels = []
    for i in range(n):
        side = i % 2
        if varied:
            words = [f"{'ab'[side]}{j}" for j in range(5)]
            fill = tuple(rng.choices(words, k=rng.randint(1, 3)))
            items = ("find",) + fill if side == 0 else ("list",) + fill + ("now",)
        else:
            items = ("ab"[side],) * rng.randint(1, 4)
        sentences.append(Sentence(f"u{i}", items))
        labels.append(side)
    return Corpus.from_sentences(sentences), labels


def tiny_corpus(rng, max_sentences=8, vocab_size=5, max_len=5, min_sentences=1):
    """Random small corpus for oracle checks."""
    vocab = [f"w{i}" for i in range(rng.randint(1, vocab_size))]
    n = rng.randint(min_sentences, max_sentences)
    return Corpus.from_sentences(
        Sentence(f"r{i}", tuple(rng.choice(vocab) for _ in range(rng.randint(1, max_len))))
        for i in range(n))
