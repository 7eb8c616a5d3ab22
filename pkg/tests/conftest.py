import os

# keep runs reproducible regardless of the caller's environment
os.environ.setdefault("GRADQEM_THREADS", "1")

ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for line in ACCEPTANCE:
        tr.write_line(line)
