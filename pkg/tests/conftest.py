import helpers


def pytest_terminal_summary(terminalreporter):
    # acceptance criterion PASS/FAIL lines, visible regardless of capture
    if helpers.ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in helpers.ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
