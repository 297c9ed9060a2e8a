import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# criterion id -> (title, tolerance); tests in test_acceptance.py carry the ids
ACCEPTANCE = {
    "1": ("static schema scores equal the published totals for 13 standards; CybOX flagged at 65",
          "exact integers, runtime < 1 s"),
    "2": ("IODEF worm-report sample: every bundled field gets its expected category",
          "exact category match on all fields"),
    "3": ("full-coverage synthetic documents score the published totals in both modes",
          "exact integers, 13 standards x 2 modes"),
    "4": ("sanitization never raises the score; equal only when nothing matched was acted on",
          "0 violations over >= 200 random documents and policies"),
    "5": ("k-anonymity and l-diversity checks agree with brute force; enforcement passes the check",
          "0 disagreements over >= 1000 tables; 100% of >= 500 enforcements; ladder monotone"),
    "6": ("dp_count sample mean and variance at epsilon = 1 over true count 50",
          "|mean - 50| <= 0.0424, variance within 15% of 2, runtime < 5 s"),
    "7": ("merge(partition(d)) == d and tier views contain no over-ceiling findings",
          ">= 100 random trees plus both samples, 0 mismatches"),
    "8": ("timeliness anchors, per-class independence, free-rider threshold monotonicity",
          "abs error <= 1e-12; >= 500 random threshold pairs"),
    "9": ("CLI exit codes 0/1/2/3 and byte-identical stdout across repeated runs",
          "exact exit codes and bytes"),
}
_OUTCOMES: dict[str, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(cid): test belongs to an acceptance criterion")


def pytest_runtest_logreport(report):
    cid = dict(report.user_properties).get("acceptance")
    if cid is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _OUTCOMES.setdefault(cid, []).append(report.outcome)


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is not None:
            item.user_properties.append(("acceptance", mark.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=int):
        title, tol = ACCEPTANCE[cid]
        outcomes = _OUTCOMES.get(cid)
        if not outcomes:
            status = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            status = "PASS"
        else:
            status = "FAIL"
        tr.write_line(f"{status:<7} [{cid}] {title}  (tolerance: {tol})")
