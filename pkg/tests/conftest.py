import pytest


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call":
        marker = item.get_closest_marker("criterion")
        if marker:
            status = "PASS" if report.passed else "FAIL"
            # one visible line per acceptance criterion
            print(f"\n[acceptance] criterion {marker.args[0]} ({marker.args[1]}): {status}")


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(number, title): acceptance criterion marker"
    )
