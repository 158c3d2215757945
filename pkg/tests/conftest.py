from pathlib import Path

import pytest

from discrel.corpus import load_brown_lexicon, load_instances
from discrel.synth import SynthConfig, generate_corpus, synth_lexicon

DATA = Path(__file__).parent / "data"

# filled by tests/test_acceptance.py, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def worked_pair():
    return load_instances(DATA / "worked_pair.jsonl")[0]


@pytest.fixture(scope="session")
def worked_lexicon():
    return load_brown_lexicon(DATA / "worked_pair_lexicon.tsv")


@pytest.fixture(scope="session")
def small_synth():
    """A quick synthetic corpus: (train, dev, test, lexicon)."""
    cfg = SynthConfig(n_train=600, n_dev=300, n_test=200, seed=11)
    return (*generate_corpus(cfg), synth_lexicon(cfg))


@pytest.fixture(scope="session")
def default_synth():
    cfg = SynthConfig()
    return (*generate_corpus(cfg), synth_lexicon(cfg))
