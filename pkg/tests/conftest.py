"""Run-wide pytest wiring.

The end-to-end requirement suite (test_acceptance.py) gets its own
summary block: one PASS/FAIL line per requirement, printed after the
normal test report so a long run still ends with the checklist.
"""

_ACCEPTANCE = "test_acceptance.py"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, ()):
            if getattr(report, "when", "call") != "call" and outcome != "error":
                continue
            if _ACCEPTANCE not in report.nodeid:
                continue
            name = report.nodeid.split("::")[-1]
            label = name.removeprefix("test_").replace("_", " ")
            rows.append((report.location[1], label, outcome == "passed"))
    if not rows:
        return
    terminalreporter.write_sep("-", "acceptance checklist")
    for _, label, ok in sorted(rows):
        terminalreporter.write_line("%-52s %s" % (label, "PASS" if ok else "FAIL"))
