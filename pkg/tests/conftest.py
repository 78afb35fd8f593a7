"""Terminal reporting for the acceptance criteria."""

import acceptance_util


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = acceptance_util.RESULTS
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for idx in sorted(results):
        title, ok, detail = results[idx]
        line = f"[{'PASS' if ok else 'FAIL'}] {idx:>2}. {title}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
