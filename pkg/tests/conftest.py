import numpy as np
import pytest

from hybridml.rng import RngStream

_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def rng():
    return RngStream(12345)


@pytest.fixture
def np_rng():
    return np.random.default_rng(2024)


@pytest.fixture
def report_criterion(request, capsys):
    """Record and echo one ``PASS``/``FAIL`` line for an acceptance criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def report(number: int, ok: bool, detail: str):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        with capsys.disabled():
            print(f"\n{line}")
        return ok

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
