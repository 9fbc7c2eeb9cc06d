import pathlib

import pytest

from blade import fixture_knowledge_base, parse_bpmn, parse_requirements

SAMPLES = pathlib.Path(__file__).resolve().parent.parent / "samples"
GOLDEN = pathlib.Path(__file__).resolve().parent / "golden"


@pytest.fixture
def kb():
    return fixture_knowledge_base()


@pytest.fixture
def samples_dir():
    return SAMPLES


@pytest.fixture
def golden_dir():
    return GOLDEN


@pytest.fixture
def sample_requirements():
    return parse_requirements((SAMPLES / "requirements.toml").read_text())


@pytest.fixture
def sample_process():
    return parse_bpmn((SAMPLES / "order_process.bpmn").read_text())
