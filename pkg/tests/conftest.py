from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion, with the detail each test recorded."""
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call" or "test_acceptance.py::test_criterion_" not in rep.nodeid:
                continue
            name = rep.nodeid.split("::")[-1][len("test_criterion_"):]
            number = int(name.split("_")[0])
            detail = "; ".join(str(v) for k, v in rep.user_properties if k == "detail")
            lines.append((number, f"criterion {name}: {outcome.upper()[:4]} {detail}".rstrip()))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
