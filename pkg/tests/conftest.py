import pytest

from vlp_mono import PAPER_INTRINSICS, PAPER_TRANSMITTER, WorldPoint, default_features
from vlp_mono.localization import Observation
from vlp_mono.projection import project


@pytest.fixture(scope="session")
def paper_features():
    return default_features(PAPER_TRANSMITTER)


@pytest.fixture(scope="session")
def snapshot(paper_features):
    """Noiseless observations of every paper feature from a given camera position."""

    def _snap(cam, k=PAPER_INTRINSICS, features=paper_features):
        cam = WorldPoint(*cam)
        return [Observation(label, project(cam, k, p)) for label, p in features]

    return _snap


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
