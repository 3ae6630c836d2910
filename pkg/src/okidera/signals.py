"""Sampled multichannel signal records: ingestion, impulse construction, noise.

The on-disk format is a plain CSV with a mandatory header row: first column
``t`` (seconds), then input columns prefixed ``u:``, then output columns
prefixed ``y:``.  Nominal output values travel in a sidecar JSON file named
``<stem>.nominal.json`` next to the CSV, with layout
``{"nominal": {"y:<name>": <real>, ...}}``.

All data must live on one uniform time grid; mixed-rate records are rejected
at ingestion (resampling is the caller's responsibility) and missing values
are rejected rather than imputed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BadDimension,
    DimensionMismatch,
    EmptyFile,
    MissingChannel,
    NonUniformSampling,
)

#: Maximum allowed relative deviation between consecutive time steps.
UNIFORMITY_RTOL = 1e-9


def _frozen_array(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class TimeSeries:
    """A uniformly sampled multichannel input/output record.

    Parameters
    ----------
    sample_period : float
        Time between consecutive samples, seconds.  Must be > 0.
    inputs : ndarray, shape (n_samples, m)
        Input channels, one column per channel.
    outputs : ndarray, shape (n_samples, q)
        Output channels, one column per channel.
    input_names, output_names : tuple of str
        Channel names (without the ``u:`` / ``y:`` prefixes).  Generated
        as ``u1..um`` / ``y1..yq`` when omitted.
    nominal_values : ndarray, shape (q,), optional
        Per-output nominal operating values used by relative-error metrics.
        ``None`` when not supplied.

    Instances are immutable; the wrapped arrays are marked read-only.
    """

    sample_period: float
    inputs: np.ndarray
    outputs: np.ndarray
    input_names: tuple[str, ...] = ()
    output_names: tuple[str, ...] = ()
    nominal_values: np.ndarray | None = None

    def __post_init__(self):
        inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        outputs = np.atleast_2d(np.asarray(self.outputs, dtype=float))
        if inputs.ndim != 2 or outputs.ndim != 2:
            raise BadDimension("inputs and outputs must be 2-d (n_samples, channels)")
        if inputs.shape[0] != outputs.shape[0]:
            raise DimensionMismatch(
                f"inputs have {inputs.shape[0]} samples but outputs have "
                f"{outputs.shape[0]}"
            )
        if not self.sample_period > 0:
            raise BadDimension(f"sample_period must be > 0, got {self.sample_period}")
        if np.isnan(inputs).any() or np.isnan(outputs).any():
            raise BadDimension("missing values (NaN) are rejected, not imputed")
        in_names = tuple(self.input_names) or tuple(
            f"u{i + 1}" for i in range(inputs.shape[1])
        )
        out_names = tuple(self.output_names) or tuple(
            f"y{i + 1}" for i in range(outputs.shape[1])
        )
        if len(in_names) != inputs.shape[1]:
            raise DimensionMismatch(
                f"{len(in_names)} input names for {inputs.shape[1]} input channels"
            )
        if len(out_names) != outputs.shape[1]:
            raise DimensionMismatch(
                f"{len(out_names)} output names for {outputs.shape[1]} output channels"
            )
        nominal = self.nominal_values
        if nominal is not None:
            nominal = _frozen_array(np.asarray(nominal, dtype=float).ravel())
            if nominal.shape[0] != outputs.shape[1]:
                raise DimensionMismatch(
                    f"{nominal.shape[0]} nominal values for "
                    f"{outputs.shape[1]} output channels"
                )
        object.__setattr__(self, "inputs", _frozen_array(inputs))
        object.__setattr__(self, "outputs", _frozen_array(outputs))
        object.__setattr__(self, "input_names", in_names)
        object.__setattr__(self, "output_names", out_names)
        object.__setattr__(self, "nominal_values", nominal)
        object.__setattr__(self, "sample_period", float(self.sample_period))

    @property
    def n_samples(self) -> int:
        return self.inputs.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.inputs.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.outputs.shape[1]

    @property
    def channel_names(self) -> list[str]:
        """All column names in file order, with ``u:`` / ``y:`` prefixes."""
        return [f"u:{n}" for n in self.input_names] + [
            f"y:{n}" for n in self.output_names
        ]

    @property
    def time(self) -> np.ndarray:
        """Time stamps ``0, dt, 2 dt, ...`` for the stored samples."""
        return np.arange(self.n_samples) * self.sample_period


@dataclass(frozen=True)
class NoiseSpec:
    """Additive Gaussian output-noise description.

    ``std`` holds one nonnegative standard deviation per output channel;
    the same ``seed`` always yields the same realization.
    """

    std: np.ndarray
    seed: int
    kind: str = field(default="gaussian")

    def __post_init__(self):
        std = np.atleast_1d(np.asarray(self.std, dtype=float))
        if (std < 0).any():
            raise BadDimension("noise standard deviations must be nonnegative")
        if self.kind != "gaussian":
            raise BadDimension(f"unsupported noise kind: {self.kind!r}")
        object.__setattr__(self, "std", _frozen_array(std))
        object.__setattr__(self, "seed", int(self.seed))


def _nominal_sidecar_path(path: Path) -> Path:
    return path.with_name(path.stem + ".nominal.json")


def load_timeseries(
    path,
    inputs: list[str] | None = None,
    outputs: list[str] | None = None,
) -> TimeSeries:
    """Read a TimeSeries from a CSV file (layout described in the module docs).

    Parameters
    ----------
    path : path-like
        CSV file to read.
    inputs, outputs : list of str, optional
        Channel names (without prefixes) that must be present.  When given,
        only those columns are loaded, in the stated order; otherwise every
        ``u:`` / ``y:`` column is taken in file order.

    Raises
    ------
    MissingChannel
        A declared channel (or the ``t`` column) is absent.
    NonUniformSampling
        Time stamps deviate from a uniform grid by more than
        ``UNIFORMITY_RTOL`` relative to the sample period.
    EmptyFile
        The file has no data rows.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise EmptyFile(f"{path}: no header row")
    header = [h.strip() for h in lines[0].split(",")]
    if "t" not in header:
        raise MissingChannel(f"{path}: no 't' column in header")
    rows = lines[1:]
    if not rows:
        raise EmptyFile(f"{path}: header only, no data rows")

    parsed = []
    for i, row in enumerate(rows):
        fields = row.split(",")
        if len(fields) != len(header):
            raise MissingChannel(
                f"{path}: data row {i + 1} has {len(fields)} fields, "
                f"header has {len(header)}"
            )
        try:
            parsed.append([float(v) for v in fields])
        except ValueError as exc:
            raise MissingChannel(
                f"{path}: unparseable value in data row {i + 1}"
            ) from exc
    data = np.array(parsed, dtype=float)

    col = {name: i for i, name in enumerate(header)}
    file_inputs = [h[2:] for h in header if h.startswith("u:")]
    file_outputs = [h[2:] for h in header if h.startswith("y:")]
    in_names = list(inputs) if inputs is not None else file_inputs
    out_names = list(outputs) if outputs is not None else file_outputs
    for name in in_names:
        if f"u:{name}" not in col:
            raise MissingChannel(f"{path}: input column 'u:{name}' not found")
    for name in out_names:
        if f"y:{name}" not in col:
            raise MissingChannel(f"{path}: output column 'y:{name}' not found")

    t = data[:, col["t"]]
    n = len(t)
    if n < 2:
        raise NonUniformSampling(
            f"{path}: need at least 2 rows to establish a sample period"
        )
    dt = (t[-1] - t[0]) / (n - 1)
    if not dt > 0:
        raise NonUniformSampling(f"{path}: time stamps are not increasing")
    spacing = np.diff(t)
    bad = np.nonzero(np.abs(spacing - dt) > UNIFORMITY_RTOL * dt)[0]
    if bad.size:
        i = int(bad[0])
        raise NonUniformSampling(
            f"{path}: spacing {spacing[i]!r} between rows {i + 1} and {i + 2} "
            f"deviates from sample period {dt!r}"
        )

    u = data[:, [col[f"u:{name}"] for name in in_names]]
    y = data[:, [col[f"y:{name}"] for name in out_names]]

    nominal = None
    sidecar = _nominal_sidecar_path(path)
    if sidecar.exists():
        with open(sidecar, "r", encoding="utf-8") as fh:
            table = json.load(fh).get("nominal", {})
        nominal = np.array([table.get(f"y:{name}", 0.0) for name in out_names])

    return TimeSeries(
        sample_period=dt,
        inputs=u,
        outputs=y,
        input_names=tuple(in_names),
        output_names=tuple(out_names),
        nominal_values=nominal,
    )


def save_timeseries(ts: TimeSeries, path) -> None:
    """Write ``ts`` as CSV (plus nominal sidecar when nominal values exist).

    Floats are written with shortest round-trip formatting, so
    ``load_timeseries(save_timeseries(ts))`` reproduces the matrices bitwise.
    """
    path = Path(path)
    header = ["t"] + ts.channel_names
    t = ts.time
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(ts.n_samples):
            fields = [repr(float(t[i]))]
            fields += [repr(float(v)) for v in ts.inputs[i]]
            fields += [repr(float(v)) for v in ts.outputs[i]]
            fh.write(",".join(fields) + "\n")
    if ts.nominal_values is not None:
        table = {
            f"y:{name}": float(v)
            for name, v in zip(ts.output_names, ts.nominal_values)
        }
        with open(_nominal_sidecar_path(path), "w", encoding="utf-8") as fh:
            json.dump({"nominal": table}, fh, sort_keys=True, indent=2)
            fh.write("\n")


def make_impulse(
    m: int, length: int, dt: float, n_outputs: int = 0
) -> list[TimeSeries]:
    """Build unit-impulse input records, one experiment per input channel.

    Experiment ``j`` has ``u_0`` equal to column ``j`` of the m-by-m identity
    and zero input afterwards; outputs are zero-filled placeholders of width
    ``n_outputs``, to be overwritten by simulation.

    Returns a list of ``m`` TimeSeries (a single-element list when m == 1).
    """
    if m < 1:
        raise BadDimension(f"need at least one input channel, got m={m}")
    if length < 2:
        raise BadDimension(f"need at least 2 samples, got length={length}")
    if not dt > 0:
        raise BadDimension(f"sample period must be > 0, got {dt}")
    experiments = []
    for j in range(m):
        u = np.zeros((length, m))
        u[0, j] = 1.0
        experiments.append(
            TimeSeries(
                sample_period=dt,
                inputs=u,
                outputs=np.zeros((length, n_outputs)),
            )
        )
    return experiments


def add_noise(ts: TimeSeries, spec: NoiseSpec) -> TimeSeries:
    """Return a copy of ``ts`` with i.i.d. Gaussian noise added to the outputs.

    Inputs are untouched (sensor-noise model).  With all-zero standard
    deviations the result equals ``ts`` exactly; the same seed always
    produces the same realization.
    """
    if spec.std.shape[0] != ts.n_outputs:
        raise DimensionMismatch(
            f"noise spec has {spec.std.shape[0]} channels, series has "
            f"{ts.n_outputs} outputs"
        )
    if not spec.std.any():
        return ts
    rng = np.random.default_rng(spec.seed)
    noise = rng.standard_normal(ts.outputs.shape) * spec.std
    return TimeSeries(
        sample_period=ts.sample_period,
        inputs=ts.inputs,
        outputs=ts.outputs + noise,
        input_names=ts.input_names,
        output_names=ts.output_names,
        nominal_values=ts.nominal_values,
    )
