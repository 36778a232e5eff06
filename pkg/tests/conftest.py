import numpy as np
import pytest

from onlinecd.problems import QuadraticSequence


def const_quadratic(Q, b, T=10):
    """Time-invariant quadratic sequence with f_t = 1/2 x^T Q x - b^T x."""
    return QuadraticSequence(T=T, Q=np.asarray(Q, dtype=float), b=np.asarray(b, dtype=float))


@pytest.fixture
def diag24():
    return const_quadratic(np.diag([2.0, 4.0]), [2.0, 4.0], T=5)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(test_acceptance.RESULTS):
        title, passed, detail = test_acceptance.RESULTS[num]
        terminalreporter.write_line(f"criterion {num:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}")
