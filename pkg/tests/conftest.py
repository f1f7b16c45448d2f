import pytest

ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.fixture
def acceptance_log(request):
    return request.config.stash[ACCEPTANCE]


def pytest_terminal_summary(terminalreporter, config):
    rows = config.stash.get(ACCEPTANCE, [])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, result in sorted(rows, key=lambda r: r[0]):
        verdict = "PASS" if result.passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2} {verdict}  {title}  ({result.timing:.1f} s)")
        for c in result.checks:
            if not c.passed and not c.informational:
                terminalreporter.write_line(f"      failed: {c.name} = {c.value:.6g}")
