"""Model-quality battery: error metrics, pole/zero maps, conditioning sweeps.

Relative errors compare a linear model's trajectory against a reference,
per output channel j with nominal value y_j^nom:

    avg_j = mean_i ( y_j^lin(t_i) - y_j^ref(t_i) ) / y_j^nom
    max_j = max_i  ( y_j^lin(t_i) - y_j^ref(t_i) ) / y_j^nom

Both are *signed* by definition; absolute-value variants are available behind
an explicit flag.  Conditioning is evaluated on the frequency response
``G(w) = C (e^{i w dt} I - A)^{-1} B + D`` as ``cond = s_max(G) / s_min(G)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import (
    DegeneratePencil,
    DimensionMismatch,
    FrequencyOutOfRange,
    ShapeMismatch,
    ZeroNominal,
)
from .lti import StateSpaceModel, simulate
from .signals import TimeSeries, _frozen_array

#: |beta| below this fraction of the pencil scale classifies a generalized
#: eigenvalue as infinite.
_PENCIL_INF_TOL = 1e-12


# --- error metrics ----------------------------------------------------------


def relative_errors(
    linear_y: np.ndarray,
    reference_y: np.ndarray,
    nominal: np.ndarray,
    absolute: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel time-averaged and maximum deviations, nominal-scaled.

    Parameters
    ----------
    linear_y, reference_y : ndarray, shape (n_samples, q)
        Trajectories to compare.
    nominal : ndarray, shape (q,)
        Nonzero nominal value per channel.
    absolute : bool
        When True, return mean/max of |deviation| instead of the signed
        definitions above (a reporting convenience, not the default metric).

    Returns
    -------
    (avg, max) : pair of (q,) arrays
    """
    linear_y = np.atleast_2d(np.asarray(linear_y, dtype=float))
    reference_y = np.atleast_2d(np.asarray(reference_y, dtype=float))
    if linear_y.shape != reference_y.shape:
        raise ShapeMismatch(
            f"trajectories have shapes {linear_y.shape} and {reference_y.shape}"
        )
    nominal = np.asarray(nominal, dtype=float).ravel()
    if nominal.shape[0] != linear_y.shape[1]:
        raise ShapeMismatch(
            f"{nominal.shape[0]} nominal values for {linear_y.shape[1]} channels"
        )
    zero = np.nonzero(nominal == 0.0)[0]
    if zero.size:
        raise ZeroNominal(f"nominal value for channel index {int(zero[0])} is zero")
    dev = (linear_y - reference_y) / nominal
    if absolute:
        dev = np.abs(dev)
    return dev.mean(axis=0), dev.max(axis=0)


# --- poles ------------------------------------------------------------------


def poles(model: StateSpaceModel) -> np.ndarray:
    """Eigenvalues of A with multiplicity, sorted for deterministic output.

    Sort order: magnitude descending, then angle ascending.
    """
    eigs = np.linalg.eigvals(model.A)
    order = np.lexsort((np.angle(eigs), -np.abs(eigs)))
    return eigs[order]


def count_unstable(eigs: np.ndarray) -> int:
    """Number of eigenvalues strictly outside the unit circle."""
    return int(np.sum(np.abs(np.asarray(eigs)) > 1.0))


def classify_poles(eigs: np.ndarray, tol: float = 1e-9) -> dict:
    """Counts of stable / marginal (|lambda| within tol of 1) / unstable poles."""
    mags = np.abs(np.asarray(eigs))
    marginal = np.abs(mags - 1.0) <= tol
    return {
        "stable": int(np.sum(mags < 1.0 - tol)),
        "marginal": int(np.sum(marginal)),
        "unstable": int(np.sum(mags > 1.0 + tol)),
    }


# --- transmission zeros -----------------------------------------------------


def _square_pencil_zeros(
    A: np.ndarray, B: np.ndarray, C: np.ndarray, D: np.ndarray
) -> tuple[np.ndarray, int]:
    """Finite generalized eigenvalues of the square system pencil via QZ."""
    n = A.shape[0]
    q, m = D.shape
    M1 = np.block([[A, B], [C, D]])
    M2 = np.zeros_like(M1)
    M2[:n, :n] = np.eye(n)
    AA, BB, *_ = scipy.linalg.qz(M1, M2, output="complex")
    alpha = np.diag(AA)
    beta = np.diag(BB)
    scale = max(float(np.max(np.abs(alpha) + np.abs(beta))), 1.0)
    tiny_a = np.abs(alpha) < _PENCIL_INF_TOL * scale
    tiny_b = np.abs(beta) < _PENCIL_INF_TOL * scale
    if np.any(tiny_a & tiny_b):
        raise DegeneratePencil(
            "system pencil is identically singular; transmission zeros undefined"
        )
    finite = ~tiny_b
    zeros = alpha[finite] / beta[finite]
    return zeros, int(np.sum(~finite))


def _compress_rows(A, B, C, D, tol):
    """Reduce (A, B, C, D) until D has full row rank, preserving finite zeros.

    Output rows whose feedthrough part vanishes constrain part of the state
    to zero; the corresponding state-update rows then turn into new algebraic
    output equations.  Repeating this yields a smaller system whose pencil
    has the same finite generalized eigenvalues.
    """
    while True:
        q, m = D.shape
        n = A.shape[0]
        if q == 0:
            return A, B, C, D
        Ud, sd, _ = np.linalg.svd(D)
        rank_d = int(np.sum(sd > tol))
        if rank_d == q:
            return A, B, C, D
        Cb = Ud.T @ C
        Db = Ud.T @ D
        C1, D1 = Cb[:rank_d], Db[:rank_d]
        C2 = Cb[rank_d:]
        sv2 = np.linalg.svd(C2, compute_uv=False) if C2.size else np.zeros(0)
        rho = int(np.sum(sv2 > tol))
        if rho == 0:
            if rank_d == 0:
                raise DegeneratePencil(
                    "all output equations vanish; transmission zeros undefined"
                )
            # the remaining rows are identically zero: drop them
            C, D = C1, D1
            continue
        _, _, Vh2 = np.linalg.svd(C2)
        # state rotation putting the constrained directions last
        W = np.hstack([Vh2[rho:].T, Vh2[:rho].T]) if rho < n else Vh2.T
        An = W.T @ A @ W
        Bn = W.T @ B
        C1n = C1 @ W
        n1 = n - rho
        # constrained states are zero: their update rows become outputs
        A = An[:n1, :n1]
        B = Bn[:n1]
        C = np.vstack([An[n1:, :n1], C1n[:, :n1]])
        D = np.vstack([Bn[n1:], D1])


def transmission_zeros(model: StateSpaceModel) -> np.ndarray:
    """Finite transmission zeros, sorted like :func:`poles`.

    Square systems use the QZ decomposition of the pencil
    ``[[A - zI, B], [C, D]]`` directly; non-square systems are first
    compressed to an equivalent square pencil.  Infinite eigenvalues are
    discarded (their count is available via ModelReport).

    Raises
    ------
    DegeneratePencil
        The pencil is identically singular, so zeros are undefined.
    """
    zeros, _ = _pencil_zeros(model)
    return zeros


def _pencil_zeros(model: StateSpaceModel) -> tuple[np.ndarray, int]:
    A, B, C, D = model.A, model.B, model.C, model.D
    q, m = D.shape
    if q == 0 or m == 0:
        return np.zeros(0, dtype=complex), 0
    if q != m:
        scale = max(
            float(np.linalg.norm(np.block([[A, B], [C, D]]), "fro")), 1.0
        )
        tol = 1e-10 * scale
        A, B, C, D = _compress_rows(A, B, C, D, tol)
        # dual pass squares up systems with more inputs than outputs
        At, Bt, Ct, Dt = _compress_rows(A.T, C.T, B.T, D.T, tol)
        A, B, C, D = At.T, Ct.T, Bt.T, Dt.T
        if D.shape[0] == 0 or D.shape[1] == 0:
            return np.zeros(0, dtype=complex), 0
        if D.shape[0] != D.shape[1]:
            raise DegeneratePencil(
                "pencil compression did not reach a square pencil; "
                "transmission zeros undefined"
            )
    zeros, n_inf = _square_pencil_zeros(A, B, C, D)
    order = np.lexsort((np.angle(zeros), -np.abs(zeros)))
    return zeros[order], n_inf


# --- conditioning -----------------------------------------------------------


def frequency_response(model: StateSpaceModel, freq: float) -> np.ndarray:
    """Transfer matrix ``G = C (e^{i w dt} I - A)^{-1} B + D`` at one frequency."""
    z = np.exp(1j * freq * model.dt)
    n = model.n_states
    return model.C @ np.linalg.solve(
        z * np.eye(n) - model.A, model.B.astype(complex)
    ) + model.D


def default_frequency_grid(dt: float, count: int = 200) -> np.ndarray:
    """Log-spaced sweep grid over (0, pi/dt]: 200 points from 1e-4 rad/s."""
    return np.geomspace(1e-4, np.pi / dt, count)


def condition_sweep(model: StateSpaceModel, freqs: np.ndarray) -> np.ndarray:
    """Condition number of the transfer matrix over a frequency grid.

    Parameters
    ----------
    model : StateSpaceModel
    freqs : array of float
        Frequencies in rad/s, each within (0, pi/dt].

    Returns
    -------
    ndarray, shape (len(freqs), 2)
        Rows (frequency, condition number); rank-deficient responses yield
        ``inf`` rather than an error.
    """
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    nyquist = np.pi / model.dt
    for f in freqs:
        if not 0.0 < f <= nyquist * (1 + 1e-12):
            raise FrequencyOutOfRange(
                f"frequency {f!r} rad/s outside (0, {nyquist!r}]"
            )
    out = np.empty((freqs.size, 2))
    for i, f in enumerate(freqs):
        try:
            g = frequency_response(model, f)
            sv = np.linalg.svd(g, compute_uv=False)
            cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
        except np.linalg.LinAlgError:
            cond = np.inf
        out[i] = (f, cond)
    return out


# --- discretization ---------------------------------------------------------


def discretize_zoh(Ac, Bc, Cc, Dc, dt: float) -> StateSpaceModel:
    """Zero-order-hold discretization of a continuous-time model.

    Uses the augmented matrix exponential: ``A = exp(Ac dt)`` and
    ``B = (int_0^dt exp(Ac tau) dtau) Bc``; C and D carry over unchanged.
    """
    Ac = np.atleast_2d(np.asarray(Ac, dtype=float))
    Bc = np.atleast_2d(np.asarray(Bc, dtype=float))
    if not dt > 0:
        raise DimensionMismatch(f"dt must be > 0, got {dt}")
    n = Ac.shape[0]
    m = Bc.shape[1]
    aug = np.zeros((n + m, n + m))
    aug[:n, :n] = Ac * dt
    aug[:n, n:] = Bc * dt
    E = scipy.linalg.expm(aug)
    return StateSpaceModel(A=E[:n, :n], B=E[:n, n:], C=Cc, D=Dc, dt=dt)


# --- eigenvalue matching ----------------------------------------------------


def match_eigenvalues(
    estimated: np.ndarray, truth: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Greedy minimal-distance pairing of two equal-size eigenvalue multisets.

    Repeatedly pairs the globally closest remaining (estimated, truth)
    eigenvalues; ties break by magnitude then angle, so the pairing is
    deterministic.

    Returns
    -------
    (paired, distances)
        ``paired[k]`` is the estimated eigenvalue matched to ``truth[k]``;
        ``distances[k]`` the corresponding |difference|.
    """
    a = np.asarray(estimated, dtype=complex).ravel()
    b = np.asarray(truth, dtype=complex).ravel()
    if a.size != b.size:
        raise DimensionMismatch(
            f"cannot match {a.size} eigenvalues against {b.size}"
        )
    candidates = []
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            candidates.append(
                (
                    abs(ai - bj),
                    abs(ai),
                    float(np.angle(ai)),
                    abs(bj),
                    float(np.angle(bj)),
                    i,
                    j,
                )
            )
    candidates.sort()
    used_a: set[int] = set()
    used_b: set[int] = set()
    paired = np.zeros_like(b)
    dist = np.zeros(b.size)
    for d, _, _, _, _, i, j in candidates:
        if i in used_a or j in used_b:
            continue
        used_a.add(i)
        used_b.add(j)
        paired[j] = a[i]
        dist[j] = d
        if len(used_a) == a.size:
            break
    return paired, dist


def eigenvalue_error(estimated: np.ndarray, truth: np.ndarray) -> float:
    """Largest pairing distance from :func:`match_eigenvalues`."""
    _, dist = match_eigenvalues(estimated, truth)
    return float(dist.max()) if dist.size else 0.0


# --- report -----------------------------------------------------------------

#: JSON Schema for a serialized ModelReport.
MODEL_REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": [
        "model_id",
        "avg_errors",
        "max_errors",
        "poles",
        "zeros",
        "unstable_count",
        "cond_sweep",
    ],
    "properties": {
        "model_id": {"type": "string"},
        "data_id": {"type": "string"},
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "avg_errors": {
            "type": "object",
            "additionalProperties": {"type": "number"},
        },
        "max_errors": {
            "type": "object",
            "additionalProperties": {"type": "number"},
        },
        "poles": {
            "type": "array",
            "items": {
                "type": "array",
                "items": {"type": "number"},
                "minItems": 2,
                "maxItems": 2,
            },
        },
        "zeros": {
            "type": "array",
            "items": {
                "type": "array",
                "items": {"type": "number"},
                "minItems": 2,
                "maxItems": 2,
            },
        },
        "unstable_count": {"type": "integer", "minimum": 0},
        "infinite_zero_count": {"type": "integer", "minimum": 0},
        "cond_sweep": {
            "type": "array",
            "items": {
                "type": "array",
                "items": {
                    "oneOf": [{"type": "number"}, {"const": "inf"}],
                },
                "minItems": 2,
                "maxItems": 2,
            },
        },
    },
}


@dataclass(frozen=True)
class ModelReport:
    """Quality metrics for one model against one reference trajectory."""

    model_id: str
    data_id: str
    dt: float
    channel_names: tuple[str, ...]
    avg_errors: np.ndarray
    max_errors: np.ndarray
    poles: np.ndarray
    zeros: np.ndarray
    unstable_count: int
    infinite_zero_count: int
    cond_sweep: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "channel_names", tuple(self.channel_names))
        object.__setattr__(self, "avg_errors", _frozen_array(self.avg_errors))
        object.__setattr__(self, "max_errors", _frozen_array(self.max_errors))
        object.__setattr__(
            self, "poles", _frozen_array(self.poles, dtype=complex)
        )
        object.__setattr__(
            self, "zeros", _frozen_array(self.zeros, dtype=complex)
        )
        object.__setattr__(self, "cond_sweep", _frozen_array(self.cond_sweep))

    def to_dict(self) -> dict:
        """JSON-ready dict following MODEL_REPORT_SCHEMA."""
        return {
            "model_id": self.model_id,
            "data_id": self.data_id,
            "dt": self.dt,
            "avg_errors": {
                name: float(v)
                for name, v in zip(self.channel_names, self.avg_errors)
            },
            "max_errors": {
                name: float(v)
                for name, v in zip(self.channel_names, self.max_errors)
            },
            "poles": [[float(z.real), float(z.imag)] for z in self.poles],
            "zeros": [[float(z.real), float(z.imag)] for z in self.zeros],
            "unstable_count": self.unstable_count,
            "infinite_zero_count": self.infinite_zero_count,
            "cond_sweep": [
                [float(w), "inf" if np.isinf(c) else float(c)]
                for w, c in self.cond_sweep
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelReport":
        channels = tuple(d["avg_errors"].keys())
        return cls(
            model_id=d["model_id"],
            data_id=d.get("data_id", ""),
            dt=float(d.get("dt", 1.0)),
            channel_names=channels,
            avg_errors=np.array([d["avg_errors"][c] for c in channels]),
            max_errors=np.array([d["max_errors"][c] for c in channels]),
            poles=np.array([complex(re, im) for re, im in d["poles"]]),
            zeros=np.array([complex(re, im) for re, im in d["zeros"]]),
            unstable_count=int(d["unstable_count"]),
            infinite_zero_count=int(d.get("infinite_zero_count", 0)),
            cond_sweep=np.array(
                [
                    [w, np.inf if c == "inf" else c]
                    for w, c in d["cond_sweep"]
                ],
                dtype=float,
            ),
        )


def report_to_csv(report: ModelReport, path) -> None:
    """Companion CSV export of a report, in tidy (record, key, a, b) rows."""
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("record,key,a,b\n")
        for name, v in zip(report.channel_names, report.avg_errors):
            fh.write(f"avg_error,{name},{v!r},\n")
        for name, v in zip(report.channel_names, report.max_errors):
            fh.write(f"max_error,{name},{v!r},\n")
        for i, z in enumerate(report.poles):
            fh.write(f"pole,{i},{z.real!r},{z.imag!r}\n")
        for i, z in enumerate(report.zeros):
            fh.write(f"zero,{i},{z.real!r},{z.imag!r}\n")
        for w, c in report.cond_sweep:
            fh.write(f"cond,,{w!r},{c!r}\n")


def compare_models(
    models: list[StateSpaceModel],
    reference: TimeSeries,
    names: list[str] | None = None,
    freqs: np.ndarray | None = None,
    data_id: str = "",
) -> list[ModelReport]:
    """Score each model against a reference trajectory.

    Each model is simulated on the reference inputs from zero initial state
    (deviation-variable convention: the data are assumed offset-removed), and
    a full ModelReport is assembled.  The reference must carry nominal values
    for the error metrics.
    """
    if names is None:
        names = [f"model-{i}" for i in range(len(models))]
    if len(names) != len(models):
        raise DimensionMismatch(
            f"{len(names)} names for {len(models)} models"
        )
    if reference.nominal_values is None:
        raise ZeroNominal(
            "reference series has no nominal values; supply a sidecar"
        )
    reports = []
    for model, name in zip(models, names):
        if model.n_inputs != reference.n_inputs or (
            model.n_outputs != reference.n_outputs
        ):
            raise DimensionMismatch(
                f"model {name!r} is {model.n_outputs}x{model.n_inputs}, "
                f"reference is {reference.n_outputs}x{reference.n_inputs}"
            )
        y = simulate(model, reference.inputs)
        avg, mx = relative_errors(y, reference.outputs, reference.nominal_values)
        eigs = poles(model)
        zeros, n_inf = _pencil_zeros(model)
        grid = default_frequency_grid(model.dt) if freqs is None else freqs
        sweep = condition_sweep(model, grid)
        reports.append(
            ModelReport(
                model_id=name,
                data_id=data_id,
                dt=model.dt,
                channel_names=tuple(reference.output_names),
                avg_errors=avg,
                max_errors=mx,
                poles=eigs,
                zeros=zeros,
                unstable_count=count_unstable(eigs),
                infinite_zero_count=n_inf,
                cond_sweep=sweep,
            )
        )
    return reports
