#!/usr/bin/env python3
"""The model-quality battery: errors, pole/zero map, conditioning sweep.

Two candidate models of one plant are scored against a reference trajectory:
the identified full-order model and a deliberately truncated one.  The report
collects nominal-scaled average/maximum errors per channel, pole and
transmission-zero locations, and the condition number of the transfer matrix
across frequency.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import okidera as oe

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

plant = oe.generate_plant(
    oe.PlantSpec(n=8, m=3, q=3, timescale_spread=12.0,
                 conditioning_target=1e6, seed=5)
)
truth = plant.model
print(f"plant static-gain condition number: {plant.static_gain_condition:.2e}")

reference = oe.run_experiment(truth, "prbs", length=4000, seed=3)[0]
full = oe.okid_era(reference, p=40, s=40, policy=oe.RankPolicy.fixed(8)).model
reduced = oe.okid_era(reference, p=40, s=40, policy=oe.RankPolicy.energy(0.999)).model
print(f"candidates: full r={full.n_states}, truncated r={reduced.n_states}")

reports = oe.compare_models(
    [full, reduced], reference, names=["full", "truncated"]
)
for report in reports:
    avg = np.abs(report.avg_errors).max()
    mx = np.abs(report.max_errors).max()
    print(
        f"{report.model_id}: worst |avg error| {avg:.2e}, "
        f"worst |max error| {mx:.2e}, unstable poles {report.unstable_count}"
    )
    oe.report_to_csv(report, OUT / f"03_report_{report.model_id}.csv")

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.5))
theta = np.linspace(0, 2 * np.pi, 200)
ax1.plot(np.cos(theta), np.sin(theta), "k:", lw=0.8)
markers = {"full": "o", "truncated": "s"}
for report in reports:
    ax1.plot(report.poles.real, report.poles.imag, markers[report.model_id],
             mfc="none", label=f"{report.model_id} poles")
    if report.zeros.size:
        ax1.plot(report.zeros.real, report.zeros.imag, "x",
                 label=f"{report.model_id} zeros")
ax1.set_aspect("equal")
ax1.legend(fontsize=8)
ax1.set_title("poles and transmission zeros")

for report in reports:
    w = report.cond_sweep[:, 0]
    c = report.cond_sweep[:, 1]
    ax2.loglog(w, c, label=report.model_id)
truth_sweep = oe.condition_sweep(truth, oe.default_frequency_grid(truth.dt))
ax2.loglog(truth_sweep[:, 0], truth_sweep[:, 1], "k--", label="truth")
ax2.set_xlabel("frequency [rad/s]")
ax2.set_ylabel("condition number")
ax2.legend(fontsize=8)
ax2.set_title("conditioning vs frequency")
fig.tight_layout()
fig.savefig(OUT / "03_model_quality.png", dpi=120)
print(f"figure saved to {OUT / '03_model_quality.png'}")
