"""Synthetic ground-truth plants and a deterministic experiment harness.

These generators stand in for a hard-to-model industrial plant: they realize,
in a linear fixture, the structural difficulties such plants exhibit --
open-loop instability (a chosen number of poles outside the unit circle),
mixed timescales (a controlled spread of pole time constants), directional
ill-conditioning of the static gain, and sensor noise.  Everything is
deterministic given the seeds, so experiments replay byte-for-byte.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadDimension, HorizonTooLong, InfeasibleSpec
from .lti import StateSpaceModel, simulate
from .signals import NoiseSpec, TimeSeries, add_noise, make_impulse, _frozen_array

#: Magnitude of the slowest generated stable pole.
_SLOWEST_STABLE_MAG = 0.95
#: Fastest pole magnitude kept numerically resolvable by dense eigensolvers;
#: for extreme spreads the whole ladder shifts toward the unit circle instead.
_FASTEST_STABLE_MAG = 1e-8
#: Range of generated unstable pole magnitudes.
_UNSTABLE_MAG_RANGE = (1.02, 1.08)
#: Conditioning targets above this use the cancellation construction
#: (see generate_plant); below it, plain static output scaling suffices.
_CONDITIONING_SIMPLE_LIMIT = 10.0
#: Relative rate jitter keeping generated poles distinct (minimality).
_RATE_JITTER = 0.05
#: Residue scale of filler modes in the cancellation construction; small so
#: that energy-based truncation has something real to truncate.
_WEAK_RESIDUE = 1e-3
#: Simulated outputs may not exceed this magnitude (unstable-horizon cap).
OUTPUT_CAP = 1e6

EXCITATIONS = ("impulse", "prbs", "gaussian")


@dataclass(frozen=True)
class PlantSpec:
    """Requested traits of a synthetic ground-truth plant.

    ``unstable_count`` poles are placed outside the unit circle;
    ``timescale_spread`` is the desired ratio of slowest to fastest stable
    time constants; ``conditioning_target`` the desired condition number of
    the static gain.  Identical seeds give identical plants.
    """

    n: int
    m: int
    q: int
    unstable_count: int = 0
    timescale_spread: float = 1.0
    conditioning_target: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.q < 1:
            raise InfeasibleSpec(
                f"need n, m, q >= 1, got ({self.n}, {self.m}, {self.q})"
            )
        if not 0 <= self.unstable_count <= self.n:
            raise InfeasibleSpec(
                f"unstable_count must be in [0, n], got {self.unstable_count}"
            )
        if self.timescale_spread < 1.0:
            raise InfeasibleSpec(
                f"timescale_spread must be >= 1, got {self.timescale_spread}"
            )
        if self.conditioning_target < 1.0:
            raise InfeasibleSpec(
                f"conditioning_target must be >= 1, got {self.conditioning_target}"
            )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "q": self.q,
            "unstable_count": self.unstable_count,
            "timescale_spread": self.timescale_spread,
            "conditioning_target": self.conditioning_target,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PlantSpec":
        return cls(**d)


@dataclass(frozen=True)
class GeneratedPlant:
    """A generated model plus the ground truth needed by scoring oracles."""

    model: StateSpaceModel
    spec: PlantSpec
    eigenvalues: np.ndarray
    static_gain_condition: float

    def __post_init__(self):
        object.__setattr__(
            self, "eigenvalues", _frozen_array(self.eigenvalues, dtype=complex)
        )


def _random_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-ish orthogonal matrix with a deterministic sign convention."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def _pole_magnitudes(spec: PlantSpec, rng: np.random.Generator) -> np.ndarray:
    """Stable pole magnitudes realizing the requested timescale spread."""
    ns = spec.n - spec.unstable_count
    if ns <= 1:
        if spec.timescale_spread > 1.0:
            raise InfeasibleSpec(
                f"timescale_spread {spec.timescale_spread} needs at least two "
                f"stable poles, have {ns}"
            )
        return np.full(ns, _SLOWEST_STABLE_MAG)
    r0 = min(
        -np.log(_SLOWEST_STABLE_MAG),
        -np.log(_FASTEST_STABLE_MAG) / spec.timescale_spread,
    )
    rates = r0 * spec.timescale_spread ** np.linspace(0.0, 1.0, ns)
    # keep poles distinct even at spread == 1 so the plant stays minimal
    rates = rates * np.linspace(1.0, 1.0 + _RATE_JITTER, ns)
    return np.exp(-rates)


def _static_gain(A, B, C):
    n = A.shape[0]
    return C @ np.linalg.solve(np.eye(n) - A, B)


def _build_generic(spec: PlantSpec, rng: np.random.Generator):
    """Random modal plant with mild static-gain shaping (targets <= 10)."""
    stable = _pole_magnitudes(spec, rng)
    unstable = rng.uniform(*_UNSTABLE_MAG_RANGE, spec.unstable_count)

    # block-diagonal core: keep the extreme stable poles real so the spread
    # is realized exactly; interior poles may pair into rotation blocks
    blocks: list[np.ndarray] = []
    interior = list(range(1, len(stable) - 1))
    i = 0
    while i < len(stable):
        mag = stable[i]
        pairable = i in interior and (i + 1) in interior
        if pairable and rng.random() < 0.5:
            theta = rng.uniform(0.2, np.pi - 0.2)
            c, s = mag * np.cos(theta), mag * np.sin(theta)
            blocks.append(np.array([[c, s], [-s, c]]))
            i += 2
        else:
            sign = 1.0 if i in (0, len(stable) - 1) else rng.choice([-1.0, 1.0])
            blocks.append(np.array([[sign * mag]]))
            i += 1
    for mag in unstable:
        blocks.append(np.array([[mag]]))

    n = spec.n
    A0 = np.zeros((n, n))
    pos = 0
    for blk in blocks:
        w = blk.shape[0]
        A0[pos : pos + w, pos : pos + w] = blk
        pos += w
    Q = _random_orthogonal(rng, n)
    A = Q @ A0 @ Q.T
    B = rng.standard_normal((n, spec.m))
    C = rng.standard_normal((spec.q, n))

    # scale the static-gain singular values onto a geometric ladder
    nd = min(spec.m, spec.q, n)
    if nd >= 2:
        G0 = _static_gain(A, B, C)
        U, S, _ = np.linalg.svd(G0)
        t = spec.conditioning_target
        targets = S[0] * t ** (-np.arange(nd) / (nd - 1))
        gains = targets / S[:nd]
        C = (np.eye(spec.q) + U[:, :nd] @ np.diag(gains - 1.0) @ U[:, :nd].T) @ C
    return A, B, C


def _build_cancellation(spec: PlantSpec, rng: np.random.Generator):
    """Plant whose static gain is ill-conditioned by near pole-zero
    cancellation at z = 1.

    Each singular direction of the static gain is served by a pair of real
    poles whose residues nearly cancel at z = 1; the cancellation depth sets
    that direction's static singular value without shrinking its dynamic
    (Hankel) contribution, so the plant stays identifiable.
    """
    nd = min(spec.m, spec.q)
    if nd < 2:
        raise InfeasibleSpec(
            f"conditioning_target {spec.conditioning_target} needs at least "
            f"2 inputs and 2 outputs (condition of a single-channel gain is 1)"
        )
    if spec.n < 2 * nd:
        raise InfeasibleSpec(
            f"conditioning_target {spec.conditioning_target} needs n >= "
            f"{2 * nd} states for {nd} gain directions, got n={spec.n}"
        )
    stable = _pole_magnitudes(spec, rng)
    unstable = rng.uniform(*_UNSTABLE_MAG_RANGE, spec.unstable_count)
    mags = np.sort(np.concatenate([stable, unstable]))[::-1]

    Uq = np.linalg.qr(rng.standard_normal((spec.q, nd)))[0]
    Vm = np.linalg.qr(rng.standard_normal((spec.m, nd)))[0]

    n = spec.n
    t = spec.conditioning_target
    A0 = np.zeros((n, n))
    B0 = np.zeros((n, spec.m))
    C0 = np.zeros((spec.q, n))

    base = 0.5 / (1.0 - mags[0])  # strongest static singular value
    for i in range(nd):
        la, lb = mags[i], mags[i + nd]
        target = base * t ** (-i / (nd - 1))
        delta = target * (1.0 - la)
        ca = 1.0
        cb = -(1.0 - lb) / (1.0 - la) * (1.0 - delta)
        # g_i(1) = ca/(1-la) + cb/(1-lb) = delta/(1-la) = target
        sa, sb = 2 * i, 2 * i + 1
        A0[sa, sa] = la
        A0[sb, sb] = lb
        B0[sa] = Vm[:, i]
        B0[sb] = Vm[:, i]
        C0[:, sa] = ca * Uq[:, i]
        C0[:, sb] = cb * Uq[:, i]

    # filler modes: weakly coupled so rank policies have something to drop
    for j, mag in enumerate(mags[2 * nd :]):
        slot = 2 * nd + j
        A0[slot, slot] = mag
        B0[slot] = Vm[:, 0]
        C0[:, slot] = (
            _WEAK_RESIDUE * rng.uniform(0.5, 1.5) * (1.0 - mag) * base * Uq[:, 0]
        )

    Q = _random_orthogonal(rng, n)
    return Q @ A0 @ Q.T, Q @ B0, C0 @ Q.T


def generate_plant(spec: PlantSpec, dt: float = 1.0) -> GeneratedPlant:
    """Deterministically generate a ground-truth plant from a spec.

    The construction guarantees: exactly ``unstable_count`` eigenvalues
    outside the unit circle; stable time constants spanning (approximately)
    ``timescale_spread``; static-gain condition number within a factor 10 of
    ``conditioning_target`` (reported exactly in the result).

    Raises
    ------
    InfeasibleSpec
        Traits that cannot coexist, e.g. a timescale spread with a single
        stable pole, or a large conditioning target on a single-channel gain.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.conditioning_target > _CONDITIONING_SIMPLE_LIMIT:
        A, B, C = _build_cancellation(spec, rng)
    else:
        A, B, C = _build_generic(spec, rng)
    model = StateSpaceModel(
        A=A, B=B, C=C, D=np.zeros((spec.q, spec.m)), dt=dt
    )
    eigs = np.linalg.eigvals(model.A)
    sv = np.linalg.svd(_static_gain(model.A, model.B, model.C), compute_uv=False)
    nd = min(spec.m, spec.q)
    achieved = float(sv[0] / sv[nd - 1]) if sv[nd - 1] > 0 else float("inf")
    return GeneratedPlant(
        model=model,
        spec=spec,
        eigenvalues=eigs,
        static_gain_condition=achieved,
    )


def prbs_sequence(length: int, seed: int) -> np.ndarray:
    """Pseudo-random binary sequence of +-1 from a 16-bit LFSR.

    Maximal-length Fibonacci register, taps at bits 16, 14, 13, 11
    (period 65535); the register is seeded from ``seed`` and never zero.
    """
    if length < 1:
        raise BadDimension(f"length must be >= 1, got {length}")
    state = (int(seed) % 0xFFFF) + 1
    out = np.empty(length)
    for k in range(length):
        out[k] = 1.0 if state & 1 else -1.0
        fb = ((state >> 0) ^ (state >> 2) ^ (state >> 3) ^ (state >> 5)) & 1
        state = (state >> 1) | (fb << 15)
    return out


def _excitation_inputs(
    kind: str, m: int, length: int, seed: int, scale: float
) -> np.ndarray:
    if kind == "prbs":
        u = np.column_stack(
            [prbs_sequence(length, seed + 7919 * c) for c in range(m)]
        )
    elif kind == "gaussian":
        rng = np.random.default_rng(seed)
        u = rng.standard_normal((length, m))
    else:
        raise BadDimension(f"unknown excitation kind {kind!r}")
    return u * scale


def run_experiment(
    plant: StateSpaceModel,
    excitation: str = "prbs",
    length: int = 1000,
    noise: NoiseSpec | None = None,
    seed: int = 0,
    input_scale: float = 1.0,
) -> list[TimeSeries]:
    """Simulate a data-collection experiment on a plant.

    ``excitation`` is one of ``impulse`` (one single-channel impulse
    experiment per input, the bundle convention of make_impulse), ``prbs``
    (per-channel LFSR sequences), or ``gaussian``.  Outputs are optionally
    passed through ``add_noise``.  Nominal values are set to 1.0: synthetic
    data are already in deviation units.

    Raises
    ------
    HorizonTooLong
        The clean response exceeds OUTPUT_CAP in magnitude (unstable plants
        must use shorter horizons).
    """
    if excitation not in EXCITATIONS:
        raise BadDimension(
            f"excitation must be one of {EXCITATIONS}, got {excitation!r}"
        )
    m, q = plant.n_inputs, plant.n_outputs
    if excitation == "impulse":
        records = make_impulse(m, length, plant.dt, n_outputs=q)
        inputs = [ts.inputs for ts in records]
    else:
        inputs = [_excitation_inputs(excitation, m, length, seed, input_scale)]

    out: list[TimeSeries] = []
    for u in inputs:
        y = simulate(plant, u)
        peak = float(np.max(np.abs(y))) if y.size else 0.0
        if peak >= OUTPUT_CAP:
            raise HorizonTooLong(
                f"|y| reaches {peak:.3g} >= {OUTPUT_CAP:.0e} over {length} "
                f"samples; shorten the horizon"
            )
        ts = TimeSeries(
            sample_period=plant.dt,
            inputs=u,
            outputs=y,
            nominal_values=np.ones(q),
        )
        if noise is not None:
            ts = add_noise(ts, noise)
        out.append(ts)
    return out
