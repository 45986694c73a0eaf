import itertools

import numpy as np
import pytest

# The 4 x 3 two-level array in which every ordered sign pair appears once
# in each pair of columns.
OA_4x3 = np.array(
    [
        [-1, -1, -1],
        [-1, 1, 1],
        [1, -1, 1],
        [1, 1, -1],
    ],
    dtype=float,
)


def oa_8x4():
    """Full 2^3 factorial plus the three-way product column."""
    rows = [(a, b, c, a * b * c) for a, b, c in itertools.product((-1, 1), repeat=3)]
    return np.array(rows, dtype=float)


def naive_sign_agreement(u, v):
    # Compares signs rather than forming a * b, which can underflow to 0.
    return sum(1 for a, b in zip(u, v) if (a > 0 and b > 0) or (a < 0 and b < 0))


def naive_discrepancy(S, exponent=2):
    """Nested-loop pair sum written straight from the loss definition."""
    S = [list(map(float, row)) for row in S]
    p = len(S[0])
    total = 0.0
    for i in range(len(S)):
        for j in range(i + 1, len(S)):
            u, v = S[i], S[j]
            base = (
                p
                - sum(a * a for a in u) / 2
                - sum(b * b for b in v) / 2
                + naive_sign_agreement(u, v)
            )
            total += base**exponent
    return total


@pytest.fixture
def oa4():
    return OA_4x3.copy()


@pytest.fixture
def oa8():
    return oa_8x4()


# One line per acceptance criterion, collected by test_acceptance.py and
# repeated at the end of the run so the verdicts survive output capture.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
