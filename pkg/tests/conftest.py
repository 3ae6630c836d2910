"""Shared fixtures and independent oracles for the test suite.

The oracle helpers here deliberately avoid the library code paths they are
used to check: Markov parameters come from naive matrix-power recursion,
relative errors from explicit loops, transfer numerators from the
Leverrier-Faddeev recursion.
"""

from __future__ import annotations

import numpy as np
import pytest

from okidera import StateSpaceModel


def brute_markov(A, B, C, D, count: int) -> np.ndarray:
    """Naive impulse-response blocks: [D, CB, CAB, ...] via repeated powers."""
    A, B, C, D = map(np.atleast_2d, (A, B, C, D))
    blocks = [np.array(D, dtype=float)]
    for k in range(1, count):
        Ak = np.linalg.matrix_power(A, k - 1)
        blocks.append(C @ Ak @ B)
    return np.array(blocks)


def markov_rel_error(estimated: np.ndarray, truth: np.ndarray) -> float:
    """Relative Frobenius error over stacked Markov blocks."""
    estimated = np.asarray(estimated)
    truth = np.asarray(truth)
    return float(np.linalg.norm(estimated - truth) / np.linalg.norm(truth))


def random_stable_model(
    rng: np.random.Generator,
    n: int,
    m: int,
    q: int,
    dt: float = 1.0,
    mag_range: tuple[float, float] = (0.3, 0.95),
    feedthrough: bool = False,
) -> StateSpaceModel:
    """Random minimal stable model with real, distinct eigenvalues."""
    mags = rng.uniform(*mag_range, n)
    signs = rng.choice([-1.0, 1.0], n)
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    A = Q @ np.diag(mags * signs) @ Q.T
    B = rng.standard_normal((n, m))
    C = rng.standard_normal((q, n))
    D = rng.standard_normal((q, m)) if feedthrough else np.zeros((q, m))
    return StateSpaceModel(A=A, B=B, C=C, D=D, dt=dt)


def leverrier_numerator(model: StateSpaceModel) -> np.ndarray:
    """SISO transfer numerator coefficients by the Leverrier-Faddeev recursion.

    Returns coefficients of C adj(zI - A) B + D det(zI - A) in descending
    powers of z.  Entirely polynomial arithmetic: no generalized eigensolver.
    """
    A = model.A
    n = A.shape[0]
    M = np.eye(n)
    char = [1.0]
    adj_terms = [M]
    for k in range(1, n + 1):
        AM = A @ adj_terms[-1]
        c = -np.trace(AM) / k
        char.append(float(c))
        adj_terms.append(AM + c * np.eye(n))
    # adj(zI - A) = sum_k z^{n-1-k} adj_terms[k], k = 0..n-1
    C_row = model.C[0]
    B_col = model.B[:, 0]
    d = float(model.D[0, 0])
    num = np.zeros(n + 1)
    for k in range(n):
        num[k + 1] += float(C_row @ adj_terms[k] @ B_col)
    num += d * np.array(char)
    return num


@pytest.fixture
def rng():
    return np.random.default_rng(20240821)
