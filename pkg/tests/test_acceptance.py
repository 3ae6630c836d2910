"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Tolerances are fixed here, not tuned at runtime; the noise-ordering
threshold (criterion 4) was frozen after a 20-seed Monte Carlo calibration
(median eigenvalue errors ~3.5e-4 observer route vs ~2.9e-3 raw FIR route).
"""

import json
import time

import numpy as np

from okidera import (
    NoiseSpec,
    PlantSpec,
    RankPolicy,
    StateSpaceModel,
    add_noise,
    build_hankel,
    condition_sweep,
    default_frequency_grid,
    discretize_zoh,
    era_realize,
    estimate_markov_fir,
    eigenvalue_error,
    generate_plant,
    gramians,
    markov_from_model,
    okid_era,
    relative_errors,
    run_experiment,
    transmission_zeros,
)
from okidera.cli import main as cli_main

from conftest import markov_rel_error, random_stable_model


def _criterion(number: int, description: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    line = f"[criterion {number}] {status}: {description}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def test_criterion_1_noiseless_round_trip():
    """50 seeded stable plants: eigenvalues to 1e-5, Markov blocks to 1e-7."""
    t0 = time.perf_counter()
    worst_eig, worst_markov = 0.0, 0.0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 11))
        m = int(rng.integers(1, 5))
        q = int(rng.integers(1, 5))
        spread = float(rng.uniform(1.0, 15.0))
        plant = generate_plant(
            PlantSpec(n=n, m=m, q=q, timescale_spread=spread, seed=1000 + seed)
        )
        series = run_experiment(plant.model, "gaussian", length=2000, seed=seed)[0]
        result = okid_era(
            series, p=max(10, 5 * n), s=max(12, 2 * n), policy=RankPolicy.fixed(n)
        )
        eig_err = eigenvalue_error(
            np.linalg.eigvals(result.model.A), plant.eigenvalues
        )
        truth_markov = markov_from_model(plant.model, 21).blocks[1:]
        est_markov = markov_from_model(result.model, 21).blocks[1:]
        worst_eig = max(worst_eig, eig_err)
        worst_markov = max(
            worst_markov, markov_rel_error(est_markov, truth_markov)
        )
    elapsed = time.perf_counter() - t0
    _criterion(
        1,
        "noiseless round-trip over 50 plants",
        worst_eig <= 1e-5 and worst_markov <= 1e-7 and elapsed < 60.0,
        f"worst eig {worst_eig:.2e}, worst markov {worst_markov:.2e}, "
        f"{elapsed:.1f}s",
    )


def test_criterion_2_era_exactness(rng):
    """Fixed r = n on exact Markov data reproduces the Hankel matrix."""
    worst = 0.0
    for _ in range(8):
        n = int(rng.integers(2, 9))
        m = int(rng.integers(1, 4))
        q = int(rng.integers(1, 4))
        truth = random_stable_model(rng, n, m, q, feedthrough=True)
        M = 4 * n + 1
        markov = markov_from_model(truth, M + 1)
        s = 2 * n
        H = build_hankel(markov, s).H
        model = era_realize(markov, s=s, policy=RankPolicy.fixed(n))
        H_back = build_hankel(markov_from_model(model, M + 1), s).H
        worst = max(
            worst, np.linalg.norm(H_back - H) / np.linalg.norm(H)
        )
    _criterion(
        2, "ERA reproduces the Hankel matrix at full rank",
        worst <= 1e-10, f"worst relative error {worst:.2e}",
    )


def test_criterion_3_approximate_balancing():
    """Long noiseless records give nearly equal, nearly diagonal Gramians."""
    worst_rel, worst_off = 0.0, 0.0
    for seed in range(5):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 7))
        m = int(rng.integers(1, 4))
        q = int(rng.integers(1, 4))
        plant = generate_plant(
            PlantSpec(
                n=n, m=m, q=q,
                timescale_spread=float(rng.uniform(1.0, 10.0)),
                seed=seed + 200,
            )
        )
        series = run_experiment(plant.model, "gaussian", length=5000, seed=seed)[0]
        result = okid_era(
            series, p=max(10, 5 * n), s=100, policy=RankPolicy.fixed(n)
        )
        Wc, Wo = gramians(result.model)
        worst_rel = max(
            worst_rel, np.linalg.norm(Wc - Wo) / np.linalg.norm(Wc)
        )
        for W in (Wc, Wo):
            diag = np.diag(np.diag(W))
            worst_off = max(
                worst_off,
                np.linalg.norm(W - diag) / np.linalg.norm(diag),
            )
    _criterion(
        3, "identified realizations are approximately balanced",
        worst_rel <= 0.05 and worst_off <= 0.05,
        f"|Wc-Wo|/|Wc| {worst_rel:.2e}, off-diagonal {worst_off:.2e}",
    )


def test_criterion_4_noise_robustness_ordering():
    """At 1% output noise the observer route beats raw FIR extraction."""
    okid_errs, fir_errs = [], []
    s = 12
    for seed in range(20):
        plant = generate_plant(
            PlantSpec(n=4, m=2, q=2, timescale_spread=8.0, seed=500 + seed)
        )
        clean = run_experiment(
            plant.model, "gaussian", length=10_000, seed=seed
        )[0]
        sigma = 0.01 * clean.outputs.std(axis=0)
        data = add_noise(clean, NoiseSpec(std=sigma, seed=seed + 999))

        okid_model = okid_era(data, p=25, s=s, policy=RankPolicy.fixed(4)).model
        fir_markov = estimate_markov_fir(data, 2 * s + 2)
        fir_model = era_realize(fir_markov, s=s, policy=RankPolicy.fixed(4))

        okid_errs.append(
            eigenvalue_error(np.linalg.eigvals(okid_model.A), plant.eigenvalues)
        )
        fir_errs.append(
            eigenvalue_error(np.linalg.eigvals(fir_model.A), plant.eigenvalues)
        )
    med_okid = float(np.median(okid_errs))
    med_fir = float(np.median(fir_errs))
    _criterion(
        4, "median eigenvalue error: observer route <= raw FIR route",
        med_okid <= med_fir,
        f"medians {med_okid:.2e} vs {med_fir:.2e} over 20 seeds",
    )


def test_criterion_5_metric_fidelity(rng):
    """Error metrics and conditioning agree with brute-force re-evaluation."""
    ok = True
    detail = []
    # relative errors against explicit loops
    lin = rng.standard_normal((150, 5))
    ref = rng.standard_normal((150, 5))
    nominal = rng.uniform(0.5, 4.0, 5)
    avg, mx = relative_errors(lin, ref, nominal)
    for j in range(5):
        devs = [(lin[i, j] - ref[i, j]) / nominal[j] for i in range(150)]
        ok &= abs(avg[j] - sum(devs) / len(devs)) <= 1e-12
        ok &= abs(mx[j] - max(devs)) <= 1e-12
    detail.append("relative_errors vs loop re-evaluation")
    # condition sweep against explicit inverse + SVD
    model = random_stable_model(rng, 4, 3, 3, feedthrough=True)
    freqs = np.geomspace(1e-3, np.pi, 25)
    sweep = condition_sweep(model, freqs)
    for k, w in enumerate(freqs):
        G = model.C @ np.linalg.inv(
            np.exp(1j * w * model.dt) * np.eye(4) - model.A
        ) @ model.B + model.D
        sv = np.linalg.svd(G, compute_uv=False)
        ok &= abs(sweep[k, 1] - sv[0] / sv[-1]) <= 1e-12 * (sv[0] / sv[-1])
    detail.append("condition_sweep vs direct SVD")
    _criterion(5, "metric fidelity to independent re-evaluation", bool(ok),
               "; ".join(detail))


def test_criterion_6_zeros_catalog():
    """Transmission zeros match hand-computed zeros on six small systems."""
    eye2 = np.eye(2)
    catalog = [
        # G(z) = (z + 0.5)/(z - 0.5)
        (StateSpaceModel(A=[[0.5]], B=[[1.0]], C=[[1.0]], D=[[1.0]], dt=1.0),
         np.array([-0.5])),
        # G(z) = 1/(z - 0.5): no finite zeros
        (StateSpaceModel(A=[[0.5]], B=[[1.0]], C=[[1.0]], D=[[0.0]], dt=1.0),
         np.array([])),
        # companion pair, numerator 2z + 1
        (StateSpaceModel(A=[[0.0, 1.0], [-0.06, 0.5]], B=[[0.0], [1.0]],
                         C=[[1.0, 2.0]], D=[[0.0]], dt=1.0),
         np.array([-0.5])),
        # decoupled diagonal: union of channel zeros
        (StateSpaceModel(A=np.diag([0.5, -0.25]), B=eye2, C=eye2, D=eye2, dt=1.0),
         np.array([-1.25, -0.5])),
        # invertible D: zeros = eig(A - B D^{-1} C), triangular by design
        (StateSpaceModel(A=[[0.4, 0.1], [0.0, 0.3]], B=eye2, C=eye2,
                         D=2 * eye2, dt=1.0),
         np.array([-0.2, -0.1])),
        # companion pair with feedthrough, numerator z^2 + 1.5z + 1.06
        (StateSpaceModel(A=[[0.0, 1.0], [-0.06, 0.5]], B=[[0.0], [1.0]],
                         C=[[1.0, 2.0]], D=[[1.0]], dt=1.0),
         np.roots([1.0, 1.5, 1.06])),
    ]
    worst = 0.0
    for model, expected in catalog:
        got = transmission_zeros(model)
        if expected.size == 0:
            worst = max(worst, float(got.size))
        else:
            worst = max(worst, eigenvalue_error(got, expected.astype(complex)))
    _criterion(6, "transmission zeros match the six-system catalog",
               worst <= 1e-8, f"worst deviation {worst:.2e}")


def test_criterion_7_discretization_spectral_map(rng):
    """eig(exp-discretized A) = exp(dt * eig(Ac)) on 20 random systems."""
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 7))
        # random diagonalizable matrix: distinct eigenvalues almost surely
        Ac = rng.standard_normal((n, n)) - 1.5 * np.eye(n)
        dt = float(rng.uniform(0.05, 1.5))
        model = discretize_zoh(
            Ac, np.ones((n, 1)), np.ones((1, n)), [[0.0]], dt
        )
        expected = np.exp(dt * np.linalg.eigvals(Ac))
        worst = max(
            worst, eigenvalue_error(np.linalg.eigvals(model.A), expected)
        )
    _criterion(7, "zero-order-hold spectral mapping", worst <= 1e-10,
               f"worst deviation {worst:.2e}")


def test_criterion_8_conditioning_direction():
    """Energy truncation does not worsen the conditioning sweep maximum."""
    plant = generate_plant(
        PlantSpec(
            n=8, m=3, q=3, timescale_spread=20.0,
            conditioning_target=1e8, seed=3,
        )
    )
    series = run_experiment(plant.model, "prbs", length=5000, seed=0)[0]
    result = okid_era(series, p=40, s=60, policy=RankPolicy.energy(0.999))
    grid = default_frequency_grid(plant.model.dt)
    truth_max = float(np.max(condition_sweep(plant.model, grid)[:, 1]))
    ident_max = float(np.max(condition_sweep(result.model, grid)[:, 1]))
    sigma = ", ".join(f"{v:.2e}" for v in result.singular_values[:8])
    print(f"[criterion 8] sigma spectrum: {sigma}")
    _criterion(
        8, "truncated model conditioning <= truth (10x slack)",
        ident_max <= 10.0 * truth_max and result.r < plant.model.n_states,
        f"ident max {ident_max:.3e} vs truth max {truth_max:.3e}, "
        f"r={result.r} of n={plant.model.n_states}, "
        f"static cond target 1e8 achieved {plant.static_gain_condition:.2e}",
    )


def test_criterion_9_bench_determinism(tmp_path):
    """Two bench runs from one manifest produce byte-identical outputs."""
    manifest = {
        "version": 1,
        "name": "acceptance-determinism",
        "plant": {"n": 3, "m": 2, "q": 2, "timescale_spread": 5.0, "seed": 11},
        "experiment": {"excitation": "prbs", "length": 600, "noise_std": 0.01},
        "identify": {"p": 15, "s": 8, "rank": "r=3"},
        "sweep": {"parameter": "seed", "values": [1, 2, 3]},
    }
    mf = tmp_path / "manifest.json"
    mf.write_text(json.dumps(manifest), encoding="utf-8")
    out1, out2 = tmp_path / "first", tmp_path / "second"
    assert cli_main(["bench", "--manifest", str(mf), "--out", str(out1)]) == 0
    assert cli_main(["bench", "--manifest", str(mf), "--out", str(out2)]) == 0

    def primary_files(root):
        return sorted(
            p.relative_to(root)
            for p in root.rglob("*")
            if p.is_file() and p.name != "run_info.json"
        )

    same_layout = primary_files(out1) == primary_files(out2)
    same_bytes = same_layout and all(
        (out1 / rel).read_bytes() == (out2 / rel).read_bytes()
        for rel in primary_files(out1)
    )
    _criterion(9, "bench reruns are byte-identical", same_bytes,
               f"{len(primary_files(out1))} primary files compared")
