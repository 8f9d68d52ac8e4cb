import pytest

CRITERIA = {
    1: "reference ratio table via `phicov bench table1`",
    2: "approximation guarantee, cardinality instances",
    3: "approximation guarantee, resource-allocation instances",
    4: "convex order: Poisson-binomial vs Poisson",
    5: "multilinear extension and pmf oracles",
    6: "ratio property suites",
    7: "partitioning-system sampler",
}
EXCLUDED = {8: "hardness theorems and price-of-anarchy curves (no desk-scale experiment)"}

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n): test belongs to acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        n = mark.args[0]
        ok = rep.passed
        details = [v for k, v in item.user_properties if k == "detail"]
        _results.setdefault(n, []).append((item.name, ok, details))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, title in CRITERIA.items():
        runs = _results.get(n)
        if not runs:
            tr.write_line(f"criterion {n}: NOT RUN  {title}")
            continue
        status = "PASS" if all(ok for _, ok, _ in runs) else "FAIL"
        notes = "; ".join(d for _, _, ds in runs for d in ds)
        tr.write_line(f"criterion {n}: {status}  {title}" + (f"  [{notes}]" if notes else ""))
    for n, why in EXCLUDED.items():
        tr.write_line(f"criterion {n}: EXCLUDED  {why}")
