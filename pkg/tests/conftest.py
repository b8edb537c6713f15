import numpy as np
import pytest

from gamblers_ruin import build_distribution, poisson_prize, two_point

SUITE_SEED = 20240601


def random_favorable_suite(n=50, seed=SUITE_SEED, max_nu=4, max_mu=4, max_M=30, min_drift=0.2):
    """Random finite-support favorable laws with full support on -nu..mu.

    Returns a list of ``(distribution, M)``.  The drift floor keeps Monte Carlo
    path lengths bounded.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        nu = int(rng.integers(1, max_nu + 1))
        mu = int(rng.integers(1, max_mu + 1))
        w = rng.dirichlet(np.ones(nu + mu + 1))
        d = build_distribution({k - nu: float(x) for k, x in enumerate(w)})
        if d.mean < min_drift:
            continue
        out.append((d, int(rng.integers(nu, max_M + 1))))
    return out


def near_double_b(a=0.09, lo=0.36, hi=0.37, iters=100):
    """Parameter b at which {-3: a, -2: b, 2: 1-a-b} has a double negative root.

    Bisection on the sign change between a complex pair and two real roots,
    using numpy's companion-matrix solver (independent of the package's
    root finder).
    """

    def sign(b):
        c = np.array([a, b, 0.0, -1.0, 0.0, 1.0 - a - b])  # h(z) - z**3, ascending
        r = np.roots(c[::-1])
        neg = r[(np.abs(r) < 0.99) & (r.real < 0)]
        return 1 if np.any(neg.imag != 0) else -1

    assert sign(lo) == 1 and sign(hi) == -1
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if sign(mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo


@pytest.fixture(scope="session")
def suite():
    return random_favorable_suite()


@pytest.fixture(scope="session")
def poisson():
    return build_distribution(poisson_prize(3, 0.01), tail_tol=1e-14)


@pytest.fixture(scope="session")
def walk():
    return build_distribution({-1: 0.4, 1: 0.6})


@pytest.fixture(scope="session")
def skala():
    return build_distribution(two_point(2, 1, 0.3))


@pytest.fixture(scope="session")
def near_double():
    b = near_double_b()
    return build_distribution({-3: 0.09, -2: b, 2: 1 - 0.09 - b})


# one summary line per acceptance criterion
_acceptance = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _acceptance[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_acceptance.items()):
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
