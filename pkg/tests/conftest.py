import pytest

from poptrack.config import load_scenario_file
from poptrack.cli import bundled_scenario
from poptrack.sim import prepare_track

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def benchmark_file():
    return load_scenario_file(bundled_scenario())


@pytest.fixture(scope="session")
def benchmark_path(benchmark_file):
    path, _ = prepare_track(benchmark_file.scenarios[0])
    return path
