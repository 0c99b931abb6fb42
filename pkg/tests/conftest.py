"""Shared oracle implementations for the test suite.

These are deliberately literal: double loops and dense matrix products
written straight from the defining formulas, sharing no code with the fast
paths under test.
"""

import numpy as np
import pytest


def direct_idaft(n: int, c1: float, c2: float, x: np.ndarray) -> np.ndarray:
    """Literal modulation sum: s[k] = sum_m x[m] e^{j2pi(c1 k^2 + mk/n + c2 m^2)} / sqrt(n)."""
    s = np.zeros(n, dtype=np.complex128)
    for k in range(n):
        acc = 0.0 + 0.0j
        for m in range(n):
            acc += x[m] * np.exp(2j * np.pi * (c1 * k * k + m * k / n + c2 * m * m))
        s[k] = acc / np.sqrt(n)
    return s


def direct_daft(n: int, c1: float, c2: float, r: np.ndarray) -> np.ndarray:
    """Literal demodulation sum (conjugate phases of direct_idaft)."""
    y = np.zeros(n, dtype=np.complex128)
    for m in range(n):
        acc = 0.0 + 0.0j
        for k in range(n):
            acc += r[k] * np.exp(-2j * np.pi * (c1 * k * k + m * k / n + c2 * m * m))
        y[m] = acc / np.sqrt(n)
    return y


def dense_daft_matrix(n: int, c1: float, c2: float) -> np.ndarray:
    m = np.arange(n).reshape(-1, 1)
    k = np.arange(n).reshape(1, -1)
    return np.exp(-2j * np.pi * (c1 * k**2 + m * k / n + c2 * m**2)) / np.sqrt(n)


def dense_channel_matrix(n: int, c1: float, paths) -> np.ndarray:
    """H = sum_i h_i Gamma_i Delta_i Pi^{L_i} as literal dense products."""
    total = np.zeros((n, n), dtype=np.complex128)
    for p in paths:
        perm = np.zeros((n, n))
        for r in range(n):
            perm[r, (r - p.delay) % n] = 1.0
        delta = np.diag(np.exp(-2j * np.pi * p.doppler * np.arange(n) / n))
        idx = np.arange(n)
        gamma = np.diag(
            np.where(
                idx < p.delay,
                np.exp(-2j * np.pi * c1 * (n**2 - 2 * n * (p.delay - idx))),
                1.0,
            )
        )
        total += p.gain * gamma @ delta @ perm
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_qpsk(n: int, rng: np.random.Generator) -> np.ndarray:
    bits = rng.integers(0, 2, size=2 * n)
    return ((1 - 2 * bits[0::2]) + 1j * (1 - 2 * bits[1::2])) / np.sqrt(2)
