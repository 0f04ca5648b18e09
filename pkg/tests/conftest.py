def pytest_runtest_logreport(report):
    """Print one PASS/FAIL line per acceptance check."""
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    status = "PASS" if report.passed else "FAIL"
    print(f"\n[{status}] {name} ({report.duration:.1f}s)", flush=True)
