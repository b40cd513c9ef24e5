import pytest

from clusterlm.corpus import Sentence, corpus_events

_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion."""
    def record(number, ok, detail=""):
        _ACCEPTANCE.append((number, bool(ok), detail))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(
            f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")


def sentences(*texts):
    return [Sentence(f"s{i}", tuple(t.split())) for i, t in enumerate(texts)]


@pytest.fixture
def ab_corpus():
    return sentences("a a", "a a", "b b", "b b")


@pytest.fixture
def ab_events(ab_corpus):
    return corpus_events(ab_corpus, 1, end_marker=False)
