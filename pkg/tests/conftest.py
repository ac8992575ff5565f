import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

from intelligent_spin import wavepacket


@pytest.fixture(scope="session")
def parent20():
    return wavepacket.family_member(20.0, 0.5, 0)


@pytest.fixture(scope="session")
def family20():
    """N=20, eta=0.5 family members keyed by k."""
    return {k: wavepacket.family_member(20.0, 0.5, k) for k in (0, 5, 10, 20)}


def pytest_terminal_summary(terminalreporter):
    reports = [
        r
        for key in ("passed", "failed", "error")
        for r in terminalreporter.stats.get(key, [])
        if r.when == "call" and "test_acceptance.py::test_criterion_" in r.nodeid
    ]
    if not reports:
        return
    terminalreporter.section("acceptance criteria")
    for r in sorted(reports, key=lambda r: r.nodeid):
        name = r.nodeid.split("::")[-1]
        number = int(name.split("_")[2])
        detail = dict(r.user_properties).get("detail", "")
        status = "PASS" if r.passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {name}  {detail}")
