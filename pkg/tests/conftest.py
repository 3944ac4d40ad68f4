"""Collects acceptance results and prints one line per criterion at the end."""

import pytest

CRITERIA = {
    1: "Alice optimum (strategy 1)",
    2: "Alice mirror optimum (strategy 2)",
    3: "Entropy argmin",
    4: "Bob separate formulas and enumeration",
    5: "Bob collective value at ansatz optimum",
    6: "Collective optimization, choices I/II/III",
    7: "Full-frame optimization",
    8: "Dominance ordering",
    9: "Closed form vs exact enumeration",
    10: "Monte Carlo statistics and reproducibility",
    11: "Structural invariants",
}

_results: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def acceptance():
    def record(number: int, ok: bool, detail: str) -> bool:
        _results[number] = (bool(ok), detail)
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    ran = [n for n in CRITERIA if n in _results]
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for n in CRITERIA:
        if n in _results:
            ok, detail = _results[n]
            terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {n:>2}. {CRITERIA[n]}: {detail}")
        else:
            # Deselected, or the test raised before recording a verdict.
            terminalreporter.write_line(f"----  {n:>2}. {CRITERIA[n]}: not evaluated")
