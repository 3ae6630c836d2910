"""Eigensystem realization: block-Hankel assembly, SVD truncation, realization.

Given impulse-response blocks Y_0..Y_M, the Hankel matrix collects
``H[i][j] = Y_{i+j-1}`` and its time-shifted companion ``H'[i][j] = Y_{i+j}``
(block indices starting at 1).  A reduced SVD ``H ~ U_r S_r V_r'`` then yields
the realization

    A_r = S_r^{-1/2} U_r' H' V_r S_r^{-1/2}
    B_r = first m columns of S_r^{1/2} V_r'
    C_r = first q rows  of U_r S_r^{1/2}
    D   = Y_0

which is approximately balanced when enough data is used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InsufficientData,
    RankPolicyUnsatisfiable,
    ZeroMatrix,
)
from .lti import MarkovSequence, StateSpaceModel
from .signals import _frozen_array

#: Singular values below this fraction of the largest one are never kept,
#: whatever the policy asks for; keeping them would blow up S^{-1/2}.
SIGMA_GUARD = 1e-12


@dataclass(frozen=True)
class RankPolicy:
    """How to choose the truncation index r from a singular-value spectrum.

    Three kinds:

    * ``fixed``  -- keep exactly ``value`` singular values;
    * ``energy`` -- keep the smallest r with discarded energy
      ``sum_{i>r} s_i^2 / sum_i s_i^2 <= 1 - value``;
    * ``gap``    -- truncate at the largest ratio ``s_i / s_{i+1}``.
    """

    kind: str
    value: float | None = None

    def __post_init__(self):
        if self.kind == "fixed":
            if self.value is None or int(self.value) < 1:
                raise ValueError("fixed rank policy needs an integer r >= 1")
            object.__setattr__(self, "value", int(self.value))
        elif self.kind == "energy":
            if self.value is None or not 0.0 < self.value < 1.0:
                raise ValueError("energy rank policy needs a threshold in (0, 1)")
            object.__setattr__(self, "value", float(self.value))
        elif self.kind == "gap":
            object.__setattr__(self, "value", None)
        else:
            raise ValueError(f"unknown rank policy kind: {self.kind!r}")

    @classmethod
    def fixed(cls, r: int) -> "RankPolicy":
        return cls("fixed", r)

    @classmethod
    def energy(cls, tau: float) -> "RankPolicy":
        return cls("energy", tau)

    @classmethod
    def gap(cls) -> "RankPolicy":
        return cls("gap")

    @classmethod
    def parse(cls, text: str) -> "RankPolicy":
        """Parse ``"r=N"``, ``"energy=tau"`` or ``"gap"``."""
        text = text.strip()
        if text == "gap":
            return cls.gap()
        if "=" in text:
            key, _, raw = text.partition("=")
            key = key.strip()
            if key == "r":
                return cls.fixed(int(raw))
            if key == "energy":
                return cls.energy(float(raw))
        raise ValueError(f"cannot parse rank policy {text!r}")

    def __str__(self) -> str:
        if self.kind == "fixed":
            return f"r={self.value}"
        if self.kind == "energy":
            return f"energy={self.value!r}"
        return "gap"


#: Default policy: keep essentially everything above numerical noise, and
#: report the spectrum so callers can re-truncate by hand.
DEFAULT_RANK_POLICY = RankPolicy.energy(1.0 - 1e-8)


@dataclass(frozen=True)
class HankelPair:
    """Block-Hankel matrix H, its shift H', and the block bookkeeping."""

    H: np.ndarray
    H_shift: np.ndarray
    s: int
    block_shape: tuple[int, int]  # (q, m)
    dt: float

    def __post_init__(self):
        object.__setattr__(self, "H", _frozen_array(self.H))
        object.__setattr__(self, "H_shift", _frozen_array(self.H_shift))


@dataclass(frozen=True)
class SvdTruncation:
    """Rank-r SVD factors of a matrix plus the truncation bookkeeping.

    ``U`` is (rows, r), ``s`` the kept singular values, ``Vh`` the (r, cols)
    right factor.  ``singular_values`` keeps the full spectrum so rank
    heuristics can be applied by eye.
    """

    U: np.ndarray
    s: np.ndarray
    Vh: np.ndarray
    r: int
    discarded_energy: float
    singular_values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "U", _frozen_array(self.U))
        object.__setattr__(self, "s", _frozen_array(self.s))
        object.__setattr__(self, "Vh", _frozen_array(self.Vh))
        object.__setattr__(self, "singular_values", _frozen_array(self.singular_values))


def build_hankel(markov: MarkovSequence, s: int) -> HankelPair:
    """Assemble the Hankel pair from Markov blocks Y_0..Y_M.

    The feedthrough block Y_0 is excluded; H starts at Y_1 = CB.  With M + 1
    blocks available, H has ``s`` block rows and ``M - s`` block columns, so
    H consumes Y_1..Y_{M-1} and the shifted matrix consumes Y_2..Y_M.

    Raises
    ------
    InsufficientData
        When fewer than s + 2 blocks are available (no room for both H and
        its shift).
    """
    if s < 1:
        raise InsufficientData(f"need at least one block row, got s={s}")
    count = markov.count
    M = count - 1
    J = M - s
    if J < 1:
        raise InsufficientData(
            f"{count} Markov blocks cannot fill H and H' with s={s} block rows; "
            f"need at least {s + 2}"
        )
    q, m = markov.n_outputs, markov.n_inputs
    blocks = markov.blocks
    H = np.empty((s * q, J * m))
    Hs = np.empty((s * q, J * m))
    for i in range(s):
        # block row i holds Y_{i+1} .. Y_{i+J} (shift: one block later)
        H[i * q : (i + 1) * q] = (
            blocks[i + 1 : i + 1 + J].transpose(1, 0, 2).reshape(q, J * m)
        )
        Hs[i * q : (i + 1) * q] = (
            blocks[i + 2 : i + 2 + J].transpose(1, 0, 2).reshape(q, J * m)
        )
    return HankelPair(H=H, H_shift=Hs, s=s, block_shape=(q, m), dt=markov.dt)


def truncate_svd(H: np.ndarray, policy: RankPolicy = DEFAULT_RANK_POLICY) -> SvdTruncation:
    """Reduced SVD of ``H`` truncated according to ``policy``.

    Singular values below ``SIGMA_GUARD`` times the largest are excluded from
    r regardless of the policy.  ``discarded_energy`` equals
    ``|H - U_r S_r V_r'|_F^2 / |H|_F^2``.

    Raises
    ------
    ZeroMatrix
        ``H`` is identically zero.
    RankPolicyUnsatisfiable
        A fixed r exceeds the smaller matrix dimension.
    """
    H = np.atleast_2d(np.asarray(H, dtype=float))
    if not H.any():
        raise ZeroMatrix("cannot truncate an all-zero matrix")
    U, sigma, Vh = np.linalg.svd(H, full_matrices=False)
    guard_rank = int(np.sum(sigma > SIGMA_GUARD * sigma[0]))

    if policy.kind == "fixed":
        r = int(policy.value)
        if r > min(H.shape):
            raise RankPolicyUnsatisfiable(
                f"fixed r={r} exceeds min dimension {min(H.shape)}"
            )
        r = min(r, guard_rank)
    elif policy.kind == "energy":
        total = float(np.sum(sigma**2))
        tails = np.concatenate([np.cumsum((sigma**2)[::-1])[::-1][1:], [0.0]])
        ok = np.nonzero(tails / total <= 1.0 - policy.value)[0]
        r = int(ok[0]) + 1 if ok.size else len(sigma)
        r = min(r, guard_rank)
    else:  # gap
        if guard_rank == 1 or len(sigma) == 1:
            r = 1
        else:
            # candidate gaps within the guarded range, plus the guard cliff
            k = min(guard_rank + 1, len(sigma))
            with np.errstate(divide="ignore"):
                ratios = sigma[: k - 1] / sigma[1:k]
            r = min(int(np.argmax(ratios)) + 1, guard_rank)

    total = float(np.sum(sigma**2))
    discarded = float(np.sum((sigma[r:]) ** 2) / total)
    return SvdTruncation(
        U=U[:, :r],
        s=sigma[:r],
        Vh=Vh[:r, :],
        r=r,
        discarded_energy=discarded,
        singular_values=sigma,
    )


def _realize(
    hankel: HankelPair, trunc: SvdTruncation, D: np.ndarray
) -> StateSpaceModel:
    """State-space matrices from a truncated Hankel SVD."""
    q, m = hankel.block_shape
    inv_sqrt = 1.0 / np.sqrt(trunc.s)
    sqrt_s = np.sqrt(trunc.s)
    core = trunc.U.T @ hankel.H_shift @ trunc.Vh.T
    A = core * inv_sqrt[:, None] * inv_sqrt[None, :]
    B = (sqrt_s[:, None] * trunc.Vh)[:, :m]
    C = (trunc.U * sqrt_s[None, :])[:q, :]
    return StateSpaceModel(A=A, B=B, C=C, D=D, dt=hankel.dt)


def era_realize(
    markov: MarkovSequence,
    s: int | None = None,
    policy: RankPolicy = DEFAULT_RANK_POLICY,
) -> StateSpaceModel:
    """Reduced-order state-space model realized from Markov parameters.

    Parameters
    ----------
    markov : MarkovSequence
        Blocks Y_0..Y_M; Y_0 becomes the feedthrough of the result.
    s : int, optional
        Hankel block rows.  Defaults to floor(M / 2), making H as square as
        possible.
    policy : RankPolicy
        Truncation rule for the Hankel SVD.

    The returned model has state dimension r (from the policy) and the
    sequence's sample period.
    """
    if s is None:
        s = max((markov.count - 1) // 2, 1)
    hankel = build_hankel(markov, s)
    trunc = truncate_svd(hankel.H, policy)
    return _realize(hankel, trunc, markov.blocks[0])
