"""Acceptance bookkeeping: criterion tests run last and get one summary line
each."""

import time

import pytest

_START = time.perf_counter()
_RESULTS: dict[int, dict] = {}


def pytest_collection_modifyitems(session, config, items):
    # acceptance tests go last so that the runtime criterion sees the whole run
    items.sort(key=lambda it: it.get_closest_marker("criterion") is not None)


@pytest.fixture
def suite_elapsed():
    return lambda: time.perf_counter() - _START


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when == "setup" and rep.passed) or rep.when == "teardown" and rep.passed:
        return
    num, title = mark.args
    entry = _RESULTS.setdefault(num, {"title": title, "ok": True, "tests": 0, "notes": []})
    if rep.when == "call":
        entry["tests"] += 1
    if rep.failed:
        entry["ok"] = False
        entry["notes"].append(item.name)
    notes = getattr(item, "_criterion_notes", None)
    if notes and rep.when == "call":
        entry["notes"].extend(notes)


@pytest.fixture
def note(request):
    """Attach a short measurement to the criterion summary line."""
    request.node._criterion_notes = []
    return request.node._criterion_notes.append


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_RESULTS):
        e = _RESULTS[num]
        status = "PASS" if e["ok"] else "FAIL"
        extra = f" ({'; '.join(e['notes'])})" if e["notes"] else ""
        tr.write_line(f"criterion {num:2d} {status}  {e['title']}{extra}")
    tr.write_line(f"total wall time {time.perf_counter() - _START:.1f} s")
