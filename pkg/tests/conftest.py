import pytest

from vhetnet.config import default_params


@pytest.fixture(scope="session")
def defaults():
    return default_params()


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE, ACCEPTANCE_BUDGET_S

    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[num]
        seconds = sum(p[3] for p in parts)
        budget = ACCEPTANCE_BUDGET_S[num]
        ok = all(p[1] for p in parts) and seconds <= budget
        failed = [f"{p[0]}: {p[2]}" for p in parts if not p[1]]
        note = "; ".join(failed) if failed else "; ".join(f"{p[0]}: {p[2]}" for p in parts)
        terminalreporter.write_line(
            f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  [{seconds:7.1f} s / {budget:.0f} s]  {note}"
        )
