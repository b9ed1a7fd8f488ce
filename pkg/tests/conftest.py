import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one pass/fail line per acceptance criterion after the run."""
    mod = None
    for name, m in sys.modules.items():
        if name.rsplit(".", 1)[-1] == "test_acceptance" and hasattr(m, "RESULTS"):
            mod = m
            break
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.ensure_newline()
    terminalreporter.section("acceptance criteria", sep="-")
    for num in sorted(mod.RESULTS):
        ok, detail = mod.RESULTS[num]
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d} {status}: {detail}")
