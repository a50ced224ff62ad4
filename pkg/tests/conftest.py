import pytest

from quadcert.quadfield import make_field

CRITERIA = {
    1: "escalation bound 8 over Q(sqrt 73), exhaustive",
    2: "diagonal bound 10 over Q(sqrt 73)",
    3: "element facts over Q(sqrt 73)",
    4: "dominated-square table over Q(sqrt 73)",
    5: "family identities on the (u, l, t) grid",
    6: "concrete non-universality certificates",
    7: "simultaneous squarefree sieve",
    8: "lemma property suites",
    9: "small-norm generators for D = 73",
}

_outcomes: dict[int, list[bool]] = {}
_criterion_of: dict[str, int] = {}


@pytest.fixture(scope="session")
def F73():
    return make_field(73)


@pytest.fixture(scope="session")
def el73(F73):
    F = F73
    rho, sigma = F(4, 1), F(83, 22)
    return {
        "one": F.one,
        "rho": rho,
        "rho_c": rho.conjugate(),
        "sigma": sigma,
        "sigma_c": sigma.conjugate(),
        "eps": F(943, 250),
    }


def pytest_runtest_logreport(report):
    marker = _criterion_of.get(report.nodeid)
    if marker is None:
        return
    if report.when == "call" or report.failed:
        _outcomes.setdefault(marker, []).append(report.passed)


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _criterion_of[item.nodeid] = m.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(CRITERIA):
        if cid not in _outcomes:
            continue
        verdict = "PASS" if all(_outcomes[cid]) else "FAIL"
        terminalreporter.write_line(f"criterion {cid}: {verdict}  ({CRITERIA[cid]})")
