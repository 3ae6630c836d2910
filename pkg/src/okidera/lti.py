"""Discrete-time LTI state-space models, simulation, and Markov parameters.

The model is ``x_{k+1} = A x_k + B u_k``, ``y_k = C x_k + D u_k`` with a fixed
sample period ``dt``.  The feedthrough ``D`` is carried explicitly throughout
the pipeline; the impulse-response blocks (Markov parameters) of a model are
``Y_0 = D`` and ``Y_k = C A^{k-1} B`` for k >= 1.

All matrices are dense, double precision.  Model instances are immutable and
safe for concurrent use.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, UnstableSystem
from .signals import _frozen_array

#: State dimension above which the Lyapunov solver switches from the direct
#: (Kronecker) method to the iterative bilinear method.
_DIRECT_LYAPUNOV_LIMIT = 200


@dataclass(frozen=True)
class StateSpaceModel:
    """Discrete-time state-space model (A, B, C, D) with sample period dt."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    dt: float

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionMismatch(f"A must be square, got {A.shape}")
        if B.shape[0] != n:
            raise DimensionMismatch(f"B has {B.shape[0]} rows, expected {n}")
        if C.shape[1] != n:
            raise DimensionMismatch(f"C has {C.shape[1]} columns, expected {n}")
        if D.shape != (C.shape[0], B.shape[1]):
            raise DimensionMismatch(
                f"D is {D.shape}, expected {(C.shape[0], B.shape[1])}"
            )
        if not self.dt > 0:
            raise DimensionMismatch(f"dt must be > 0, got {self.dt}")
        object.__setattr__(self, "A", _frozen_array(A))
        object.__setattr__(self, "B", _frozen_array(B))
        object.__setattr__(self, "C", _frozen_array(C))
        object.__setattr__(self, "D", _frozen_array(D))
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.B.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.C.shape[0]

    def to_dict(self) -> dict:
        """JSON-ready dict with row-major nested arrays."""
        return {
            "dt": self.dt,
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "C": self.C.tolist(),
            "D": self.D.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StateSpaceModel":
        return cls(A=d["A"], B=d["B"], C=d["C"], D=d["D"], dt=d["dt"])


def save_model(model: StateSpaceModel, path) -> None:
    """Write a model to its JSON interchange format."""
    with open(Path(path), "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_model(path) -> StateSpaceModel:
    """Read a model from its JSON interchange format."""
    with open(Path(path), "r", encoding="utf-8") as fh:
        return StateSpaceModel.from_dict(json.load(fh))


@dataclass(frozen=True)
class MarkovSequence:
    """Ordered impulse-response blocks Y_0..Y_M, each q-by-m, plus dt.

    ``blocks`` is stored as a single (M+1, q, m) array; ``blocks[0]`` plays
    the role of the feedthrough D.
    """

    blocks: np.ndarray
    dt: float

    def __post_init__(self):
        blocks = np.asarray(self.blocks, dtype=float)
        if blocks.ndim == 1:  # scalar SISO sequence
            blocks = blocks.reshape(-1, 1, 1)
        if blocks.ndim != 3:
            raise DimensionMismatch(
                f"blocks must be (count, q, m), got shape {blocks.shape}"
            )
        if not self.dt > 0:
            raise DimensionMismatch(f"dt must be > 0, got {self.dt}")
        object.__setattr__(self, "blocks", _frozen_array(blocks))
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def count(self) -> int:
        return self.blocks.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.blocks.shape[1]

    @property
    def n_inputs(self) -> int:
        return self.blocks.shape[2]


def simulate(
    model: StateSpaceModel, u: np.ndarray, x0: np.ndarray | None = None
) -> np.ndarray:
    """Run the state recursion over an input record.

    Parameters
    ----------
    model : StateSpaceModel
    u : ndarray, shape (n_samples, m)
        Input samples, one row per step (1-d input is treated as SISO).
    x0 : ndarray, shape (n,), optional
        Initial state; zero when omitted.

    Returns
    -------
    ndarray, shape (n_samples, q)
        Outputs ``y_k = C x_k + D u_k``.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:  # SISO convenience
        u = u.reshape(-1, 1)
    if u.shape[1] != model.n_inputs:
        raise DimensionMismatch(
            f"input has {u.shape[1]} channels, model expects {model.n_inputs}"
        )
    n = model.n_states
    if x0 is None:
        x = np.zeros(n)
    else:
        x = np.asarray(x0, dtype=float).ravel()
        if x.shape[0] != n:
            raise DimensionMismatch(f"x0 has length {x.shape[0]}, expected {n}")
    A, B, C, D = model.A, model.B, model.C, model.D
    y = np.empty((u.shape[0], model.n_outputs))
    for k in range(u.shape[0]):
        y[k] = C @ x + D @ u[k]
        x = A @ x + B @ u[k]
    return y


def markov_from_model(model: StateSpaceModel, count: int) -> MarkovSequence:
    """First ``count`` Markov parameters [D, CB, CAB, CA^2 B, ...]."""
    if count < 1:
        raise DimensionMismatch(f"count must be >= 1, got {count}")
    q, m = model.n_outputs, model.n_inputs
    blocks = np.empty((count, q, m))
    blocks[0] = model.D
    AkB = model.B
    for k in range(1, count):
        blocks[k] = model.C @ AkB
        AkB = model.A @ AkB
    return MarkovSequence(blocks=blocks, dt=model.dt)


def spectral_radius(A: np.ndarray) -> float:
    """Largest eigenvalue magnitude of a square matrix."""
    return float(np.max(np.abs(np.linalg.eigvals(np.atleast_2d(A)))))


def gramians(model: StateSpaceModel) -> tuple[np.ndarray, np.ndarray]:
    """Infinite-horizon controllability and observability Gramians.

    Solves the discrete Lyapunov equations ``A Wc A' - Wc + B B' = 0`` and
    ``A' Wo A - Wo + C' C = 0``.  Uses the direct Kronecker solve up to
    ``_DIRECT_LYAPUNOV_LIMIT`` states and the bilinear iteration beyond.

    Raises
    ------
    UnstableSystem
        When the spectral radius of A is >= 1 (the sums do not converge).
    """
    rho = spectral_radius(model.A)
    if rho >= 1.0:
        raise UnstableSystem(
            f"spectral radius {rho:.6g} >= 1; Gramians are undefined"
        )
    method = "direct" if model.n_states <= _DIRECT_LYAPUNOV_LIMIT else "bilinear"
    Wc = scipy.linalg.solve_discrete_lyapunov(
        model.A, model.B @ model.B.T, method=method
    )
    Wo = scipy.linalg.solve_discrete_lyapunov(
        model.A.T, model.C.T @ model.C, method=method
    )
    return Wc, Wo
