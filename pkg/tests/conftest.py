import numpy as np
import pytest

from laxflow import polymat as pm

# Worked examples reused across modules:
#   f1 = [[x, x^2], [1, -x]]          in M(2,1)
#   f2 = [[0, x], [1, 0]]             in M(2,1), the s_infinity base point
#   f3 = [[0, x^3+1], [x, 2]]         in M(2,2) and S_infinity, genus 1
#   f4 = seeded random member of S_infinity in M(3,2), genus 4


@pytest.fixture
def f1() -> pm.PolyMatrix:
    return pm.make_polymatrix(2, 1, [[[0, 1], [0, 0, 1]], [[1], [0, -1]]])


@pytest.fixture
def f2() -> pm.PolyMatrix:
    return pm.make_polymatrix(2, 1, [[[0], [0, 1]], [[1], [0]]])


@pytest.fixture
def f3() -> pm.PolyMatrix:
    return pm.make_polymatrix(2, 2, [[[0], [1, 0, 0, 1]], [[0, 1], [2]]])


@pytest.fixture
def f4() -> pm.PolyMatrix:
    return pm.random_sample(3, 2, 42, "s_infinity")


def padded_max_diff(a: np.ndarray, b: np.ndarray) -> float:
    n = max(a.size, b.size)
    av = np.zeros(n, dtype=complex)
    bv = np.zeros(n, dtype=complex)
    av[: a.size] = a
    bv[: b.size] = b
    return float(np.abs(av - bv).max())
