"""Tests for the shared root-finding helper."""
import math

import pytest

from utils.error_handler import BisectionError
from utils.numerics import bracketed_root


def test_increasing_root():
    assert bracketed_root(lambda x: x ** 3 - 2.0, 0.0, 2.0) == pytest.approx(2.0 ** (1.0 / 3.0), rel=1e-12)


def test_decreasing_root():
    assert bracketed_root(math.cos, 0.0, 3.0) == pytest.approx(0.5 * math.pi, rel=1e-12)


def test_endpoints_never_evaluated():
    visited = []

    # Poles at both ends, as between consecutive secular poles
    def g(x):
        visited.append(x)
        return 1.0 / (1.5 - x) - 1.0 / (x - 0.5)

    assert bracketed_root(g, 0.5, 1.5) == pytest.approx(1.0, abs=1e-13)
    assert 0.5 not in visited
    assert 1.5 not in visited


def test_closed_bracket_allows_endpoint_roots():
    assert bracketed_root(lambda x: x, 0.0, 1.0, open_ends=False) == 0.0


def test_empty_bracket():
    with pytest.raises(BisectionError):
        bracketed_root(lambda x: x, 1.0, 1.0)


def test_no_sign_change():
    with pytest.raises(BisectionError) as info:
        bracketed_root(lambda x: x * x + 1.0, -1.0, 1.0)
    assert info.value.details['bracket'] == [-1.0, 1.0]


def test_iteration_cap():
    with pytest.raises(BisectionError) as info:
        bracketed_root(lambda x: math.tan(x) - 1e3, 0.0, 1.5707, xtol=1e-15, rtol=0.0, max_iter=2)
    assert len(info.value.details['bracket']) == 2
    assert info.value.details['iterations'] <= 2
