import pytest

from helpers import S1_SCRIPT, build_s1_engine


@pytest.fixture
def s1_engine():
    return build_s1_engine()


@pytest.fixture
def s1_blocks(s1_engine):
    return list(s1_engine.chain.blocks)


@pytest.fixture
def s1_script_path(tmp_path):
    path = tmp_path / "s1.scenario"
    path.write_text(S1_SCRIPT, encoding="utf-8")
    return path
