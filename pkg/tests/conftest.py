import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "lab", deadline=None, max_examples=25, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("lab")


@pytest.fixture(scope="session")
def example_complex():
    from hlc_lab.nilmanifold_ce import build_ce, builtin_example_nonhlc, validate_symplectic
    spec, omega = builtin_example_nonhlc()
    rep, c = validate_symplectic(build_ce(spec), omega)
    assert rep.ok
    return c


@pytest.fixture(scope="session")
def abelian_complex():
    from hlc_lab.nilmanifold_ce import abelian, build_ce, validate_symplectic
    spec, omega = abelian(4)
    rep, c = validate_symplectic(build_ce(spec), omega)
    assert rep.ok
    return c


# one pass/fail line per acceptance criterion, printed after the run
_acceptance: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        detail = dict(report.user_properties).get("detail", "")
        _acceptance[report.nodeid] = (report.outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (outcome, detail) in _acceptance.items():
        verdict = {"passed": "PASS", "skipped": "SKIP"}.get(outcome, "FAIL")
        terminalreporter.write_line(f"{verdict}  {nodeid.split('::')[-1]}  {detail}")
