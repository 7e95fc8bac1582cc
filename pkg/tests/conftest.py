import mpmath as mp
import pytest

mp.mp.dps = 50

_ACCEPTANCE = []


def mp_cdf_bar(x):
    return mp.erfc(mp.mpf(x) / mp.sqrt(2)) / 2


def mp_isf(q, lo=-40, hi=40, iters=300):
    """Bisection on the arbitrary-precision upper tail."""
    q = mp.mpf(q)
    lo, hi = mp.mpf(lo), mp.mpf(hi)
    for _ in range(iters):
        mid = (lo + hi) / 2
        if mp_cdf_bar(mid) > q:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def mp_poisson_below(k, mean):
    mean = mp.mpf(mean)
    return mp.exp(-mean) * mp.fsum(mean ** s / mp.factorial(s) for s in range(k))


@pytest.fixture
def acceptance_report():
    def record(criterion, ok, detail):
        _ACCEPTANCE.append((criterion, bool(ok), detail))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}")
