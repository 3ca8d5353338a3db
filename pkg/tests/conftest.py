from pathlib import Path

import pytest

from affordnet.builder import build_graph
from affordnet.corpus import load_corpus

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def themed_sentences():
    return list(load_corpus(FIXTURES / "themed_corpus.depjson"))


@pytest.fixture(scope="session")
def themed_graph(themed_sentences):
    return build_graph(themed_sentences)
