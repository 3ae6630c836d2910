"""Observer-based Markov parameter estimation from arbitrary input/output data.

Instead of requiring an impulse experiment, the identification regresses each
output sample on the current input and ``p`` lags of the extended vector
``v_j = [u_j; y_j]``:

    y_k  ~=  D u_k + sum_{i=1..p} Ybar_i v_{k-i}

The coefficient blocks ``Ybar_i = [Ybar_i^(1) | Ybar_i^(2)]`` are the observer
Markov parameters; the observer feedback damps the effective dynamics so a
short horizon p suffices even for slow systems.  The plain Markov parameters
are then recovered by the recursion

    Y_0 = D_hat
    Y_k = Ybar_k^(1) + sum_{i=1..k} Ybar_i^(2) Y_{k-i}          (k <= p)
    Y_k =              sum_{i=1..p} Ybar_i^(2) Y_{k-i}          (k > p)

and handed to the Hankel realization.  The observer gain itself is never
formed; this module is purely a Markov-parameter estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .era import DEFAULT_RANK_POLICY, RankPolicy, _realize, build_hankel, truncate_svd
from .errors import DimensionMismatch, RankDeficientData, TooFewSamples
from .lti import MarkovSequence, StateSpaceModel
from .signals import TimeSeries, _frozen_array

#: Relative singular-value cutoff for the least-squares pseudo-inverse.
LSTSQ_CUTOFF = 1e-10


@dataclass(frozen=True)
class ObserverMarkovSequence:
    """Estimated observer Markov parameters.

    ``D_hat`` is the k = 0 block (q, m); ``blocks`` stacks Ybar_1..Ybar_p as a
    (p, q, m+q) array, each partitioned as [input part (q, m) | output part
    (q, q)].  ``residual`` is the Frobenius norm of the least-squares misfit.
    """

    D_hat: np.ndarray
    blocks: np.ndarray
    dt: float
    residual: float

    def __post_init__(self):
        D_hat = np.atleast_2d(np.asarray(self.D_hat, dtype=float))
        blocks = np.asarray(self.blocks, dtype=float)
        if blocks.ndim != 3 or blocks.shape[0] < 1:
            raise DimensionMismatch("blocks must be (p, q, m+q) with p >= 1")
        q, m = D_hat.shape
        if blocks.shape[1] != q or blocks.shape[2] != m + q:
            raise DimensionMismatch(
                f"observer blocks are {blocks.shape[1:]}, expected {(q, m + q)}"
            )
        object.__setattr__(self, "D_hat", _frozen_array(D_hat))
        object.__setattr__(self, "blocks", _frozen_array(blocks))

    @property
    def p(self) -> int:
        return self.blocks.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.D_hat.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.D_hat.shape[1]

    def input_part(self, i: int) -> np.ndarray:
        """Ybar_i^(1), the (q, m) input block, i in 1..p."""
        return self.blocks[i - 1, :, : self.n_inputs]

    def output_part(self, i: int) -> np.ndarray:
        """Ybar_i^(2), the (q, q) output block, i in 1..p."""
        return self.blocks[i - 1, :, self.n_inputs :]


def _data_matrix(
    u: np.ndarray, y: np.ndarray, p: int
) -> np.ndarray:
    """Stack [u_k; v_{k-1}; ...; v_{k-p}] columns, zero-padded for k < p."""
    m, N = u.shape
    q = y.shape[0]
    v = np.vstack([u, y])
    V = np.zeros((m + p * (m + q), N))
    V[:m] = u
    for i in range(1, p + 1):
        V[m + (i - 1) * (m + q) : m + i * (m + q), i:] = v[:, : N - i]
    return V


def estimate_observer_markov(
    data: TimeSeries, p: int, discard_initial: bool = False
) -> ObserverMarkovSequence:
    """Least-squares estimate of the observer Markov parameters.

    Parameters
    ----------
    data : TimeSeries
        Input/output record to regress on.
    p : int
        Observer horizon (number of lagged extended vectors).
    discard_initial : bool
        When True, drop the first p columns of the regression instead of
        zero-padding them.  Zero-padding (the default) uses all samples and
        is exact for records started from rest; discarding gives the
        textbook exact-deconvolution form regardless of the initial state.

    Raises
    ------
    TooFewSamples
        Fewer samples than regression rows (m + p(m+q)).
    RankDeficientData
        The data matrix has no usable rank, e.g. an identically zero input.
    """
    if p < 1:
        raise TooFewSamples(f"observer horizon must be >= 1, got p={p}")
    m, q, N = data.n_inputs, data.n_outputs, data.n_samples
    if N <= p * (m + q) + m:
        raise TooFewSamples(
            f"{N} samples cannot support horizon p={p} with m={m}, q={q}; "
            f"need more than {p * (m + q) + m}"
        )
    if not data.inputs.any():
        raise RankDeficientData("input is identically zero; system is unexcited")

    u = data.inputs.T
    y = data.outputs.T
    V = _data_matrix(u, y, p)
    Y = y
    if discard_initial:
        V = V[:, p:]
        Y = Y[:, p:]

    Uv, sv, Vhv = np.linalg.svd(V, full_matrices=False)
    if sv[0] == 0.0:
        raise RankDeficientData("data matrix is identically zero")
    rank = int(np.sum(sv > LSTSQ_CUTOFF * sv[0]))
    theta = (Y @ Vhv[:rank].T / sv[:rank]) @ Uv[:, :rank].T
    residual = float(np.linalg.norm(Y - theta @ V))

    D_hat = theta[:, :m]
    blocks = theta[:, m:].reshape(q, p, m + q).transpose(1, 0, 2)
    return ObserverMarkovSequence(
        D_hat=D_hat, blocks=blocks, dt=data.sample_period, residual=residual
    )


def reconstruct_markov(obs: ObserverMarkovSequence, count: int) -> MarkovSequence:
    """Recover system Markov parameters Y_0..Y_{count-1} from observer ones."""
    if count < 1:
        raise DimensionMismatch(f"count must be >= 1, got {count}")
    q, m, p = obs.n_outputs, obs.n_inputs, obs.p
    Y = np.zeros((count, q, m))
    Y[0] = obs.D_hat
    for k in range(1, count):
        acc = obs.input_part(k).copy() if k <= p else np.zeros((q, m))
        for i in range(1, min(k, p) + 1):
            acc += obs.output_part(i) @ Y[k - i]
        Y[k] = acc
    return MarkovSequence(blocks=Y, dt=obs.dt)


@dataclass(frozen=True)
class OkidEraResult:
    """Identified model plus the diagnostics of the run that produced it."""

    model: StateSpaceModel
    residual: float
    singular_values: np.ndarray
    r: int
    p: int
    s: int

    def __post_init__(self):
        object.__setattr__(
            self, "singular_values", _frozen_array(self.singular_values)
        )

    def diagnostics(self) -> dict:
        """JSON-ready diagnostics: residual, sigma spectrum, p, s, r."""
        return {
            "residual": self.residual,
            "singular_values": [float(v) for v in self.singular_values],
            "r": self.r,
            "p": self.p,
            "s": self.s,
        }


def default_horizon(expected_order: int | None = None) -> int:
    """Observer horizon default: max(10, 5 * ceil(expected order))."""
    if expected_order is None:
        expected_order = 2
    return max(10, 5 * math.ceil(expected_order))


def okid_era(
    data: TimeSeries,
    p: int | None = None,
    s: int = 10,
    policy: RankPolicy = DEFAULT_RANK_POLICY,
    discard_initial: bool = False,
) -> OkidEraResult:
    """Full identification pipeline: observer estimation, reconstruction, ERA.

    Reconstructs M = 2s + 1 Markov blocks from the estimated observer
    parameters and realizes a reduced model from their Hankel pair.  Results
    are deterministic given (data, p, s, policy).

    Parameters
    ----------
    data : TimeSeries
        Arbitrary (noisy) input/output record.
    p : int, optional
        Observer horizon; defaults to ``default_horizon`` of the fixed rank
        when the policy is fixed, else of a modest order guess.
    s : int
        Hankel block rows for the realization step.
    policy : RankPolicy
        Truncation rule.
    """
    if p is None:
        expected = policy.value if policy.kind == "fixed" else None
        p = default_horizon(expected)
    obs = estimate_observer_markov(data, p, discard_initial=discard_initial)
    M = 2 * s + 1
    markov = reconstruct_markov(obs, M + 1)
    hankel = build_hankel(markov, s)
    trunc = truncate_svd(hankel.H, policy)
    model = _realize(hankel, trunc, markov.blocks[0])
    return OkidEraResult(
        model=model,
        residual=obs.residual,
        singular_values=trunc.singular_values,
        r=trunc.r,
        p=p,
        s=s,
    )


def estimate_markov_fir(
    data: TimeSeries, count: int, discard_initial: bool = False
) -> MarkovSequence:
    """Raw impulse-response estimate by direct FIR deconvolution.

    Regresses y_k on [u_k; u_{k-1}; ...; u_{k-count+1}] alone -- no observer
    compression.  This is the baseline the observer route is compared
    against: with noisy data it needs far more coefficients per output and
    degrades accordingly.
    """
    if count < 1:
        raise DimensionMismatch(f"count must be >= 1, got {count}")
    m, N = data.n_inputs, data.n_samples
    if N <= count * m:
        raise TooFewSamples(
            f"{N} samples cannot support a {count}-tap FIR fit with m={m}"
        )
    if not data.inputs.any():
        raise RankDeficientData("input is identically zero; system is unexcited")
    u = data.inputs.T
    y = data.outputs.T
    V = np.zeros((count * m, N))
    for i in range(count):
        V[i * m : (i + 1) * m, i:] = u[:, : N - i]
    Y = y
    if discard_initial:
        V = V[:, count - 1 :]
        Y = Y[:, count - 1 :]
    Uv, sv, Vhv = np.linalg.svd(V, full_matrices=False)
    if sv[0] == 0.0:
        raise RankDeficientData("data matrix is identically zero")
    rank = int(np.sum(sv > LSTSQ_CUTOFF * sv[0]))
    theta = (Y @ Vhv[:rank].T / sv[:rank]) @ Uv[:, :rank].T
    q = data.n_outputs
    blocks = theta.reshape(q, count, m).transpose(1, 0, 2)
    return MarkovSequence(blocks=blocks, dt=data.sample_period)
