from hypothesis import settings

# compiled kernels make the first call of a test slow; timing is not under test
settings.register_profile("default", deadline=None)
settings.load_profile("default")

ACCEPTANCE: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)
