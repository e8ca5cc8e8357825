import sys


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        status = "PASS" if report.passed else "FAIL"
        sys.stderr.write(f"[acceptance] {status} {name} ({report.duration:.1f}s)\n")
        sys.stderr.flush()
