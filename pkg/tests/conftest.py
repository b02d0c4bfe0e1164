import pytest

from toxspans.corpus import Corpus, Post

ROW1 = "Pretty damned eloquent ... :)"
ROW2 = "He might fire you to the moon, but you already have a head full of cheese!"
ROW3 = (
    "Nauseating and disgusting. Thank goodness the First Amendment permits people "
    "to demonstrate their stupidity."
)
ROW4 = "Not if they shoot you first..."
SPLIT_TEXT = "This bitch is so fucking idiot."

@pytest.fixture
def sample_csv():
    def offs(*ranges):
        return str([i for a, b in ranges for i in range(a, b)])

    rows = [
        (offs((7, 13)), ROW1),
        (offs((0, 29)), ROW2),
        (offs((0, 10), (15, 25), (98, 107)), ROW3),
        ("[]", ROW4),
    ]
    lines = ["spans,text"] + [f'"{s}","{t}"' for s, t in rows]
    return "\n".join(lines) + "\n"


@pytest.fixture
def split_post():
    return Post(0, SPLIT_TEXT, tuple(range(5, 10)) + tuple(range(17, 30)))


@pytest.fixture
def tiny_corpus():
    return Corpus.from_pairs([(ROW1, range(7, 13)), (ROW4, ())])


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion covered by the test")


_OUTCOMES: list[tuple[str, str]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _OUTCOMES.append((marker.args[0], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _OUTCOMES:
        tag = {"passed": "PASS", "failed": "FAIL"}.get(outcome, outcome.upper())
        terminalreporter.write_line(f"{tag:<7} {name}")
