import pytest

_LINES = []


class Recorder:
    def __call__(self, number, title, ok, detail, elapsed, budget):
        status = "PASS" if ok and elapsed <= budget else "FAIL"
        line = f"{status} [{number:>2}] {title}: {detail} ({elapsed:.2f}s / {budget:g}s)"
        _LINES.append((number, line))
        print(line, flush=True)
        return status == "PASS"


@pytest.fixture
def acceptance():
    return Recorder()


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_LINES):
            terminalreporter.write_line(line)
