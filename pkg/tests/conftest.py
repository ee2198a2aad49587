import pytest

from jamscope.dataset import SweepConfig, generate_dataset

TINY = dict(classes=("bpsk", "fh", "single-tone"), snr_grid_db=(0.0, 10.0), train_per_cell=3, test_per_cell=2,
            master_seed=17)


@pytest.fixture(scope="session")
def tiny_cfg():
    return SweepConfig(**TINY)


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory, tiny_cfg):
    out = tmp_path_factory.mktemp("tiny")
    return generate_dataset(tiny_cfg, out)


ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.fixture
def verdict(request):
    """Record and print one PASS/FAIL line for an acceptance criterion, then assert it."""

    def report(ok, detail):
        n = request.node.get_closest_marker("criterion").args[0]
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
        request.config.stash.setdefault(ACCEPTANCE, []).append((n, line))
        capman = request.config.pluginmanager.getplugin("capturemanager")
        with capman.global_and_fixture_disabled():
            print("\n" + line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = sorted(config.stash.get(ACCEPTANCE, []))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in lines:
            terminalreporter.write_line(line)
