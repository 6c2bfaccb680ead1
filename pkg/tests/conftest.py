import pytest

# criterion id -> (passed, summary), filled by the acceptance tests
ACCEPTANCE_RESULTS: dict = {}


@pytest.fixture
def record_criterion():
    def record(cid: int, name: str, passed: bool, detail: str = ""):
        ACCEPTANCE_RESULTS[cid] = (name, passed, detail)
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE_RESULTS):
        name, passed, detail = ACCEPTANCE_RESULTS[cid]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status} criterion {cid:2d} {name} {detail}".rstrip())
