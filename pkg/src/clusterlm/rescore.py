"""N-best hypothesis selection with a cluster mixture model."""

from dataclasses import dataclass, field, replace

from .corpus import (CorpusError, EventSequence, apply_class_map, ngram_events,
                     parse_rule_pairs)
from .scoring import mixture_score, normalize_by_length

DEFAULT_LIMIT = 10


@dataclass(frozen=True)
class NBestList:
    id: str
    reference: tuple
    hypotheses: tuple
    # key of each hypothesis in an external analysis file
    hyp_ids: tuple = None

    def __post_init__(self):
        if not self.hypotheses:
            raise ValueError(f"n-best list {self.id!r} has no hypotheses")
        if self.hyp_ids is None:
            object.__setattr__(self, "hyp_ids", tuple(
                f"{self.id}:{i}" for i in range(len(self.hypotheses))))

    @property
    def evaluable(self):
        return self.reference in self.hypotheses

    def __len__(self):
        return len(self.hypotheses)


@dataclass
class SelectionResult:
    list_id: str
    chosen_index: int
    correct: bool
    scores: list = field(default_factory=list)  # NormalizedScore per hypothesis


@dataclass
class Evaluation:
    accuracy: float
    results: list
    n_lists: int
    n_excluded: int

    @property
    def n_correct(self):
        return sum(r.correct for r in self.results)

    def correct_vector(self):
        return [r.correct for r in self.results]


def parse_nbest_line(line, lineno=None, source=None):
    fields = line.rstrip("\n").split("\t")
    if len(fields) < 3:
        raise CorpusError("n-best record needs id, reference and >= 1 hypothesis",
                          lineno, source)
    lid, ref, hyps = fields[0].strip(), tuple(fields[1].split()), fields[2:]
    hyps = tuple(tuple(h.split()) for h in hyps)
    if not ref or any(not h for h in hyps):
        raise CorpusError(f"empty token field in n-best record {lid!r}", lineno, source)
    return NBestList(lid, ref, hyps)


def load_nbest(lines, source=None):
    """Read ``id<TAB>reference<TAB>hyp1<TAB>hyp2...`` records."""
    out = []
    for lineno, line in enumerate(lines, 1):
        if not line.strip() or line.startswith("#"):
            continue
        out.append(parse_nbest_line(line, lineno, source))
    return out


def read_nbest(path):
    with open(path, encoding="utf-8") as f:
        return load_nbest(f, source=str(path))


def format_nbest(lst):
    cols = [lst.id, " ".join(lst.reference)] + [" ".join(h) for h in lst.hypotheses]
    return "\t".join(cols)


def write_nbest(lists, f):
    for lst in lists:
        f.write(format_nbest(lst) + "\n")


def truncate_list(lst, limit=DEFAULT_LIMIT):
    if limit < 1:
        raise ValueError("limit must be >= 1")
    if len(lst.hypotheses) <= limit:
        return lst
    return replace(lst, hypotheses=lst.hypotheses[:limit],
                   hyp_ids=lst.hyp_ids[:limit])


def restrict_to_analysable(lst, analyses):
    """Drop hypotheses without an entry in ``analyses`` (keyed by hyp id).

    Returns None when nothing is left.
    """
    keep = [i for i, key in enumerate(lst.hyp_ids) if key in analyses]
    if not keep:
        return None
    return replace(lst, hypotheses=tuple(lst.hypotheses[i] for i in keep),
                   hyp_ids=tuple(lst.hyp_ids[i] for i in keep))


def load_hypothesis_analyses(lines, order, source=None):
    """Rule analyses keyed by hypothesis id (``listid:index``)."""
    out = {}
    for lineno, line in enumerate(lines, 1):
        fields = line.split()
        if not fields or fields[0].startswith("#"):
            continue
        if len(fields) < 2:
            raise CorpusError(f"analysis {fields[0]!r} has no rule pairs", lineno, source)
        out[fields[0]] = parse_rule_pairs(fields[1:], order, lineno, source)
    return out


def read_hypothesis_analyses(path, order):
    with open(path, encoding="utf-8") as f:
        return load_hypothesis_analyses(f, order, source=str(path))


class HypothesisEncoder:
    """Turns hypotheses into event sequences matching a model's extraction."""

    def __init__(self, mode="ngram", order=1, class_map=None, analyses=None,
                 end_marker=True):
        if mode == "rule" and analyses is None:
            raise ValueError("rule mode needs hypothesis analyses")
        self.mode = mode
        self.order = order
        self.class_map = class_map
        self.analyses = analyses
        self.end_marker = end_marker

    @classmethod
    def for_model(cls, model, class_map=None, analyses=None):
        return cls(model.mode, model.order, class_map, analyses, model.end_marker)

    def encode(self, lst, index):
        key = lst.hyp_ids[index]
        if self.mode == "rule":
            return EventSequence(key, self.analyses[key])
        items = apply_class_map(lst.hypotheses[index], self.class_map)
        return EventSequence(key, ngram_events(items, self.order, self.end_marker))


def select_hypothesis(model, lst, encoder=None, scale_failures=True):
    """Pick the hypothesis with the best length-normalized mixture score.

    List order is ignored except to break exact ties (earliest wins).
    """
    if not lst.hypotheses:
        raise ValueError("empty n-best list")
    if encoder is None:
        encoder = HypothesisEncoder.for_model(model)
    if (encoder.mode, encoder.order) != (model.mode, model.order):
        raise ValueError(f"model is {model.mode}/{model.order} but hypotheses are "
                         f"encoded as {encoder.mode}/{encoder.order}")
    scores = []
    best = 0
    for i in range(len(lst.hypotheses)):
        es = encoder.encode(lst, i)
        s = normalize_by_length(mixture_score(model, es), es.n_events, scale_failures)
        scores.append(s)
        if scores[best] < s:
            best = i
    correct = lst.hypotheses[best] == lst.reference
    return SelectionResult(lst.id, best, correct, scores)


def evaluate(model, lists, encoder=None, scale_failures=True):
    """Accuracy (percent) over evaluable lists; the rest are counted and skipped."""
    lists = list(lists)
    if not lists:
        raise ValueError("no n-best lists")
    usable = [lst for lst in lists if lst.evaluable]
    if not usable:
        raise ValueError("no evaluable n-best lists (reference never present)")
    results = [select_hypothesis(model, lst, encoder, scale_failures) for lst in usable]
    correct = sum(r.correct for r in results)
    return Evaluation(100.0 * correct / len(usable), results, len(usable),
                      len(lists) - len(usable))


def baseline(lists):
    """Expected accuracy of a uniformly random choice, in percent."""
    lists = list(lists)
    if not lists:
        raise ValueError("no n-best lists")
    return sum(100.0 / len(lst.hypotheses) for lst in lists) / len(lists)


def prepare_lists(lists, limit=DEFAULT_LIMIT, analyses=None):
    """Truncate, optionally restrict to analysable hypotheses, and split off
    lists whose reference did not survive.

    Returns ``(evaluable, n_dropped)``.
    """
    out = []
    dropped = 0
    for lst in lists:
        lst = truncate_list(lst, limit)
        if analyses is not None:
            lst = restrict_to_analysable(lst, analyses)
        if lst is None or not lst.evaluable:
            dropped += 1
            continue
        out.append(lst)
    return out, dropped
