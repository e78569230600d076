import numpy as np
import pytest

from cereduce.zoo import PAULI


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def paulis():
    return {k: v.copy() for k, v in PAULI.items()}


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def ket(n, j):
    v = np.zeros(n, dtype=complex)
    v[j] = 1.0
    return v


def proj(n, j):
    return np.outer(ket(n, j), ket(n, j).conj())
