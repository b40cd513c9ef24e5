"""Corpus ingestion and event extraction.

Everything downstream (counting, entropy, scoring) works on sequences of
``(context, item)`` events, so word N-grams and rules-in-context share one
code path.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)

START = "<s>"
END = "</s>"
ROOT = "ROOT"
RESERVED = frozenset([START, END])

Event = tuple  # (context: tuple[str, ...], item: str)


class CorpusError(ValueError):
    """Malformed input file; message carries the line number when known."""

    def __init__(self, message, lineno=None, source=None):
        where = ""
        if source is not None:
            where += f"{source}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}".strip() if where else message)
        self.lineno = lineno
        self.source = source


@dataclass(frozen=True)
class ClassMap:
    rules: tuple = ()

    def __post_init__(self):
        table = {}
        longest = 0
        for pattern, name in self.rules:
            pattern = tuple(pattern)
            if not pattern:
                raise ValueError("class map pattern must be non-empty")
            # first rule wins on identical patterns
            table.setdefault(pattern, name)
            longest = max(longest, len(pattern))
        object.__setattr__(self, "_table", table)
        object.__setattr__(self, "_longest", longest)

    @classmethod
    def from_lines(cls, lines, source=None):
        """Parse tab-separated lines: pattern tokens, then the class name."""
        rules = []
        for lineno, line in enumerate(lines, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = [f for f in line.split("\t") if f.strip()]
            if len(fields) < 2:
                raise CorpusError("class map line needs pattern and class name",
                                  lineno, source)
            name = fields[-1].strip()
            pattern = tuple(tok for f in fields[:-1] for tok in f.split())
            if not pattern:
                raise CorpusError("empty class pattern", lineno, source)
            rules.append((pattern, name))
        return cls(tuple(rules))

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as f:
            return cls.from_lines(f, source=str(path))

    @property
    def class_names(self):
        return frozenset(name for _, name in self.rules)


EMPTY_CLASS_MAP = ClassMap()


def apply_class_map(tokens, class_map):
    """Replace pattern occurrences by class tokens.

    Scans left to right; at each position the longest matching pattern wins.
    """
    if class_map is None or not class_map.rules:
        return list(tokens)
    table = class_map._table
    tokens = list(tokens)
    out = []
    i = 0
    n = len(tokens)
    while i < n:
        for length in range(min(class_map._longest, n - i), 0, -1):
            name = table.get(tuple(tokens[i:i + length]))
            if name is not None:
                out.append(name)
                i += length
                break
        else:
            out.append(tokens[i])
            i += 1
    return out


@dataclass(frozen=True)
class Sentence:
    id: str
    items: tuple

    def __post_init__(self):
        if not self.items:
            raise ValueError(f"sentence {self.id!r} has no items")


@dataclass(frozen=True)
class Corpus:
    sentences: tuple
    vocabulary: frozenset = field(default=frozenset())
    total_items: int = 0

    @classmethod
    def from_sentences(cls, sentences):
        sentences = tuple(sentences)
        seen = set()
        for s in sentences:
            if s.id in seen:
                raise ValueError(f"duplicate sentence id {s.id!r}")
            seen.add(s.id)
        vocab = frozenset(tok for s in sentences for tok in s.items)
        return cls(sentences, vocab, sum(len(s.items) for s in sentences))

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)


def load_corpus(lines, class_map=None, source=None):
    """Build a corpus from sentence lines.

    A line containing a tab is read as ``id<TAB>tokens``; otherwise the id is
    the 1-based line number.
    """
    sentences = []
    ids = set()
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\n")
        if "\t" in line:
            sid, _, text = line.partition("\t")
            sid = sid.strip()
        else:
            sid, text = str(lineno), line
        tokens = text.split()
        if not tokens:
            if line.strip():
                logger.warning("%s:%d: sentence %s has no tokens, skipped",
                               source or "<corpus>", lineno, sid)
            continue
        if sid in ids:
            raise CorpusError(f"duplicate sentence id {sid!r}", lineno, source)
        ids.add(sid)
        sentences.append(Sentence(sid, tuple(apply_class_map(tokens, class_map))))
    if not sentences:
        raise CorpusError("empty corpus", source=source)
    return Corpus.from_sentences(sentences)


def read_corpus(path, class_map=None):
    with open(path, encoding="utf-8") as f:
        return load_corpus(f, class_map, source=str(path))


@dataclass(frozen=True)
class EventSequence:
    sentence_id: str
    events: tuple

    def __post_init__(self):
        if not self.events:
            raise ValueError(f"sentence {self.sentence_id!r} yields no events")

    @property
    def n_events(self):
        return len(self.events)

    def __len__(self):
        return len(self.events)


def ngram_events(items: Sequence[str], order: int, end_marker: bool = True) -> tuple:
    if order < 1:
        raise ValueError("order must be >= 1")
    padded = [START] * (order - 1) + list(items) + [END]
    width = order - 1
    n = len(items) + 1 if end_marker else len(items)
    return tuple((tuple(padded[i:i + width]), padded[i + width]) for i in range(n))


def extract_ngram_events(sentence: Sentence, order: int,
                         end_marker: bool = True) -> EventSequence:
    """One event per token plus the end marker, each conditioned on the
    ``order - 1`` preceding tokens (start-padded).

    ``end_marker=False`` drops the final event.
    """
    return EventSequence(sentence.id, ngram_events(sentence.items, order, end_marker))


def corpus_events(corpus: Iterable[Sentence], order: int,
                  end_marker: bool = True) -> list:
    return [extract_ngram_events(s, order, end_marker) for s in corpus]


def parse_rule_pairs(pairs, order, lineno=None, source=None):
    if order not in (1, 2):
        raise ValueError("rule order must be 1 or 2")
    events = []
    for pair in pairs:
        parent, sep, rule = pair.partition(">")
        if not sep or not parent or not rule or ">" in rule:
            raise CorpusError(f"malformed rule pair {pair!r}", lineno, source)
        events.append(((parent,) if order == 2 else (), rule))
    return tuple(events)


def load_rule_events(lines, order, source=None):
    """Read ``id parent>rule parent>rule ...`` lines.

    Order 1 treats each analysis as a bag of rules; order 2 conditions every
    rule on its parent.
    """
    out = []
    ids = set()
    for lineno, line in enumerate(lines, 1):
        fields = line.split()
        if not fields or fields[0].startswith("#"):
            continue
        sid, pairs = fields[0], fields[1:]
        if not pairs:
            raise CorpusError(f"analysis {sid!r} has no rule pairs", lineno, source)
        if sid in ids:
            raise CorpusError(f"duplicate analysis id {sid!r}", lineno, source)
        ids.add(sid)
        out.append(EventSequence(sid, parse_rule_pairs(pairs, order, lineno, source)))
    return out


def read_rule_events(path, order):
    with open(path, encoding="utf-8") as f:
        return load_rule_events(f, order, source=str(path))
