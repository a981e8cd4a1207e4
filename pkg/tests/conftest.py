from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from padic_henon.padic import FieldParams, PadicScalar, canonical_params

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def canon():
    return canonical_params()


@pytest.fixture(scope="session")
def variant():
    return FieldParams.from_literals(3, "9", "1/3")


def p_power_fractions(p=3, max_den_exp=4, bound=10**6):
    """Rationals in Z[1/p]."""
    return st.builds(lambda n, e: Fraction(n, p ** e),
                     st.integers(-bound, bound), st.integers(0, max_den_exp))


def finite_scalars(p=3, min_prec=1, max_prec=25):
    """Scalars of Z_p known to a random number of digits."""
    return st.integers(min_prec, max_prec).flatmap(
        lambda k: st.builds(lambda c: PadicScalar.from_int(p, c, k), st.integers(0, p ** k - 1)))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance") or sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
