import pytest

from poissongen.construction import Construction, ProbabilityProfile


@pytest.fixture(scope="session")
def poisson_one():
    """Poisson(1), b=3, half-ceil schedule, generated source, run to step 13 so every level up to 12 has its windows."""
    return Construction(ProbabilityProfile.poisson(3, "1")).run_to(13)


@pytest.fixture(scope="session")
def binary_ln2():
    return Construction(ProbabilityProfile.poisson(2, "ln(2)")).run_to(13)


_LINES = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    lines = request.config.stash.setdefault(_LINES, [])

    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
