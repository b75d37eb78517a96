import pytest

_CRITERIA: dict[int, str] = {}


class CriterionLog:
    """Collects one verdict line per acceptance criterion for the terminal summary."""

    def record(self, number: int, title: str, passed: bool, detail: str = "") -> bool:
        verdict = "PASS" if passed else "FAIL"
        line = f"criterion {number:2d} {verdict}  {title}"
        if detail:
            line += f"  ({detail})"
        _CRITERIA[number] = line
        print(line)
        return passed


@pytest.fixture(scope="session")
def criteria() -> CriterionLog:
    return CriterionLog()


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[number])
