import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from claimkit.corpus import Comment, Sentence


def make_sentence(sid: int, text: str, comment_id: str = "C-1", index: int = 0) -> Sentence:
    return Sentence.make(sid, comment_id, index, text)


def sentences_from_texts(texts) -> list[Sentence]:
    return [make_sentence(i, t, comment_id=f"C-{i}") for i, t in enumerate(texts)]


@pytest.fixture
def tiny_comments() -> list[Comment]:
    return [
        Comment("A-1", "EPA-1", "EPA", "I support this rule. It will cut costs."),
        Comment("A-2", "EPA-1", "EPA", "We oppose the proposal because the deadline is short."),
        Comment("B-1", "FDA-9", "FDA", "Please clarify section 3."),
    ]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # echo the acceptance pass/fail lines after the run so they survive capture
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "_LINES", None) if mod else None
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
