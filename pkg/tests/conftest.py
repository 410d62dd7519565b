import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bmst_tbcc.tbcc import DEFAULT_GENERATORS, TbccCode, build_trellis  # noqa: E402


@pytest.fixture(scope="session")
def code8():
    return TbccCode(DEFAULT_GENERATORS, 8)


@pytest.fixture(scope="session")
def trellis8(code8):
    return build_trellis(code8)


@pytest.fixture(scope="session")
def code32():
    return TbccCode(DEFAULT_GENERATORS, 32)


@pytest.fixture(scope="session")
def trellis32(code32):
    return build_trellis(code32)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.REPORT:
        terminalreporter.write_line(line)
