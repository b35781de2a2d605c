from collections import defaultdict

import pytest

# criterion number -> list of (case label, passed, detail)
_ACCEPTANCE = defaultdict(list)


@pytest.fixture
def record():
    """Log one acceptance case; the summary groups cases by criterion."""

    def _record(criterion, case, ok, detail=""):
        _ACCEPTANCE[criterion].append((case, bool(ok), detail))
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(_ACCEPTANCE):
        cases = _ACCEPTANCE[crit]
        failed = [c for c in cases if not c[1]]
        status = "PASS" if not failed else "FAIL"
        line = f"criterion {crit:2d}: {status} ({len(cases) - len(failed)}/{len(cases)} cases)"
        if failed:
            line += "; failing: " + ", ".join(f"{c[0]} [{c[2]}]" for c in failed)
        tr.write_line(line)
