import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tgre_hgp.hgp import build_tgre_hgp  # noqa: E402

# [[5,1]] product of [1 1] with itself, expanded by hand
HX5 = np.array([[1, 0, 1, 0, 1], [0, 1, 0, 1, 1]], dtype=np.uint8)
HZ5 = np.array([[1, 1, 0, 0, 1], [0, 0, 1, 1, 1]], dtype=np.uint8)


@pytest.fixture(scope="session")
def code5():
    return build_tgre_hgp(1)


@pytest.fixture(scope="session")
def code20():
    return build_tgre_hgp(2)


@pytest.fixture(scope="session")
def code80():
    return build_tgre_hgp(3)


_CRITERIA: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith("test_criterion_"):
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(report.user_properties).get("detail", "")
        _CRITERIA[name] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda n: int(n.split("_")[2])):
        verdict, detail = _CRITERIA[name]
        terminalreporter.write_line(f"criterion {name.split('_')[2]}: {verdict}  {detail}")
