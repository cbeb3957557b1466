import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "ptlab", deadline=None, max_examples=int(os.environ.get("PTLAB_EXAMPLES", "60")),
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ptlab")


@pytest.fixture(scope="session")
def cubic_pairs_8():
    from ptlab.ptnorm import normalized_eigenpairs
    return normalized_eigenpairs(3.0, 8)


@pytest.fixture(scope="session")
def cubic_pairs_12():
    from ptlab.ptnorm import normalized_eigenpairs
    return normalized_eigenpairs(3.0, 12)


@pytest.fixture(scope="session")
def cubic_pairs_16():
    from ptlab.ptnorm import normalized_eigenpairs
    return normalized_eigenpairs(3.0, 16)


@pytest.fixture(scope="session")
def oscillator_pairs():
    from ptlab.ptnorm import normalized_eigenpairs
    return normalized_eigenpairs(2.0, 8)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.__dict__.get("_ptlab_acceptance")
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
        terminalreporter.write_line(line)
