import pytest

CRITERIA = {
    1: "curvature tables from the Koszul connection",
    2: "Sasakian and connection identities",
    3: "Lorentz-flow conservation and closed-form agreement",
    4: "closed-form S^3 curve (cos = 29/36)",
    5: "projected-curvature dual formula",
    6: "holonomy of horizontal lifts",
    7: "periodicity criterion, positive arm",
    8: "periodicity criterion, negative arm",
    9: "slope quantization and tube closure",
    10: "trajectories are tube geodesics",
    11: "figure regeneration",
}

_outcomes = {}
_notes = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n): acceptance criterion number n")


@pytest.fixture
def acceptance_note():
    """Lines appended here are printed in the acceptance summary."""
    return _notes.append


def pytest_runtest_logreport(report):
    marker = getattr(report, "_criterion", None)
    if marker is None:
        return
    if report.when == "call" or report.outcome != "passed":
        ok = report.outcome == "passed"
        _outcomes[marker] = _outcomes.get(marker, True) and ok


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("acceptance")
    if m is not None:
        rep._criterion = m.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(CRITERIA):
        if n in _outcomes:
            tr.write_line(f"criterion {n:2d}: {'PASS' if _outcomes[n] else 'FAIL'}  {CRITERIA[n]}")
        else:
            tr.write_line(f"criterion {n:2d}: NOT RUN  {CRITERIA[n]}")
    for line in _notes:
        tr.write_line(f"note: {line}")
