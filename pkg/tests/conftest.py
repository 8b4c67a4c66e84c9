
# filled by test_acceptance: criterion number -> (passed, summary)
ACCEPTANCE = {}


def record(number, passed, summary):
    ACCEPTANCE[number] = (bool(passed), summary)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {summary}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, summary = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {summary}")
