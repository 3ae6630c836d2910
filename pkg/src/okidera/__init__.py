"""OKID-ERA system identification toolkit.

Estimates reduced-order, approximately balanced discrete-time state-space
models from arbitrary noisy input/output data, and provides the model-quality
analyses (relative errors, pole/zero maps, condition-number sweeps) used to
judge them.
"""

from .analysis import (
    ModelReport,
    compare_models,
    condition_sweep,
    count_unstable,
    default_frequency_grid,
    discretize_zoh,
    eigenvalue_error,
    frequency_response,
    match_eigenvalues,
    poles,
    relative_errors,
    report_to_csv,
    transmission_zeros,
)
from .bench import (
    GeneratedPlant,
    PlantSpec,
    generate_plant,
    prbs_sequence,
    run_experiment,
)
from .era import (
    DEFAULT_RANK_POLICY,
    HankelPair,
    RankPolicy,
    SvdTruncation,
    build_hankel,
    era_realize,
    truncate_svd,
)
from .lti import (
    MarkovSequence,
    StateSpaceModel,
    gramians,
    load_model,
    markov_from_model,
    save_model,
    simulate,
    spectral_radius,
)
from .okid import (
    ObserverMarkovSequence,
    OkidEraResult,
    estimate_markov_fir,
    estimate_observer_markov,
    okid_era,
    reconstruct_markov,
)
from .signals import (
    NoiseSpec,
    TimeSeries,
    add_noise,
    load_timeseries,
    make_impulse,
    save_timeseries,
)

__version__ = "1.0.0"

__all__ = [
    "DEFAULT_RANK_POLICY",
    "GeneratedPlant",
    "HankelPair",
    "MarkovSequence",
    "ModelReport",
    "NoiseSpec",
    "ObserverMarkovSequence",
    "OkidEraResult",
    "PlantSpec",
    "RankPolicy",
    "StateSpaceModel",
    "SvdTruncation",
    "TimeSeries",
    "add_noise",
    "build_hankel",
    "compare_models",
    "condition_sweep",
    "count_unstable",
    "default_frequency_grid",
    "discretize_zoh",
    "eigenvalue_error",
    "era_realize",
    "estimate_markov_fir",
    "estimate_observer_markov",
    "frequency_response",
    "generate_plant",
    "gramians",
    "load_model",
    "load_timeseries",
    "make_impulse",
    "markov_from_model",
    "match_eigenvalues",
    "okid_era",
    "poles",
    "prbs_sequence",
    "reconstruct_markov",
    "relative_errors",
    "report_to_csv",
    "run_experiment",
    "save_model",
    "save_timeseries",
    "simulate",
    "spectral_radius",
    "transmission_zeros",
    "truncate_svd",
]
