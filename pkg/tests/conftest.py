"""Shared fixtures and independent oracles for the pidmatch test suite."""

import os
import sys

import numpy as np
import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

from pidmatch.lti_core import TransferFunction  # noqa: E402
from pidmatch.simulate import TimeGrid  # noqa: E402
from pidmatch.target_design import SecondOrderSpec  # noqa: E402


def routh_hurwitz_stable(coeffs):
    """Routh array sign test: True iff every root has a negative real part.

    Returns False for polynomials with a zero in the first column (those are
    at best marginal).
    """
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), 'f')
    if c[0] < 0.0:
        c = -c
    n = len(c) - 1
    if n == 0:
        return True
    if np.any(c <= 0.0):
        return False
    width = (n + 2) // 2 + 1
    top = np.zeros(width)
    bottom = np.zeros(width)
    top[:len(c[0::2])] = c[0::2]
    bottom[:len(c[1::2])] = c[1::2]
    rows = [top, bottom]
    for _ in range(n - 1):
        a, b = rows[-2], rows[-1]
        if b[0] == 0.0:
            return False
        new = np.zeros(width)
        new[:-1] = (b[0] * a[1:] - a[0] * b[1:]) / b[0]
        rows.append(new)
    return all(r[0] > 0.0 for r in rows)


@pytest.fixture
def g1():
    return TransferFunction.from_coeffs([1], [1, 1])


@pytest.fixture
def g2():
    return TransferFunction.from_coeffs([1], [1, 2, 1])


@pytest.fixture
def g3():
    return TransferFunction.from_coeffs([1], [1, 3, 3, 1])


@pytest.fixture
def table_grid():
    """The 0:0.01:12.5 grid every published comparison row uses."""
    return TimeGrid.spanning(12.5, 0.01)


@pytest.fixture
def reference_spec():
    return SecondOrderSpec(ts=2.5, po=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def routh():
    return routh_hurwitz_stable
