"""Shared pytest configuration.

After a run that included the acceptance gate, print one PASS/FAIL line
per acceptance criterion so the verdicts are visible in the terminal
summary regardless of output capturing.
"""


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    verdicts = {}
    for key, verdict in (("passed", "PASS"), ("failed", "FAIL"),
                         ("error", "FAIL")):
        for rep in terminalreporter.stats.get(key, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance" not in nodeid:
                continue
            name = nodeid.split("::")[-1]
            if not name.startswith("test_criterion"):
                continue
            if verdict == "FAIL" or name not in verdicts:
                verdicts[name] = verdict
    if not verdicts:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for name in sorted(verdicts):
        terminalreporter.write_line("  %s: %s" % (verdicts[name], name))
