import pytest

from multiprio.mpa import MPAConfig, generate_mpa


@pytest.fixture(scope="session")
def mpa():
    return generate_mpa()


@pytest.fixture(scope="session")
def tiny_mpa():
    # two speed levels, three steering levels, short horizon: small enough to enumerate
    return generate_mpa(MPAConfig(speeds=(0.0, 0.4), steerings=(-0.15, 0.0, 0.15), horizon=3))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("tests.test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS):
            terminalreporter.write_line(line)
