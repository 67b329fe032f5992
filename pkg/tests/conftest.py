"""Per-criterion PASS/FAIL summary for the acceptance suite.

Acceptance tests carry ``@pytest.mark.criterion(number, title)``.  A
criterion passes only when every test carrying its number passes; measured
values recorded with ``record_property`` are echoed next to the verdict.
"""

import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when != "call" and rep.passed:
        return
    number, title = mark.args
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "notes": []})
    entry["notes"].extend(f"{k}={v}" for k, v in rep.user_properties)
    rep.user_properties.clear()
    if rep.failed or rep.skipped:
        entry["ok"] = False
        crash = getattr(rep.longrepr, "reprcrash", None)
        msg = crash.message.splitlines()[0] if crash else str(rep.longrepr).splitlines()[-1]
        entry["notes"].append(f"{item.name}: {msg}")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        verdict = "PASS" if e["ok"] else "FAIL"
        terminalreporter.write_line(f"{verdict}  criterion {number}: {e['title']}")
        for note in e["notes"]:
            terminalreporter.write_line(f"        {note}")
