#!/usr/bin/env python3
"""Watch a well-calibrated model quietly go stale.

Generates the canonical synthetic deployment (12 months, 2000 patients a
month, prevalence ramping from 10% to 25% after month 4) and prints the
per-month calibration picture. The point of the exercise: discrimination
(AUC) never moves, so a dashboard that only tracks AUC sleeps through the
whole incident, while the binned calibration error is already screaming.

Run:
    python3 demos/calibration_drift_walkthrough.py
"""

import numpy as np

from riskwatch import (
    auc,
    brier,
    canonical_scenario,
    ece,
    generate_arrays,
    reliability_bins,
)


def month_table(arrays):
    print(f"{'month':>5} {'n':>6} {'AUC':>8} {'ECE':>8} {'Brier':>8}")
    months = sorted(set(arrays["period"].tolist()))
    for m in months:
        mask = arrays["period"] == m
        p = arrays["pred_prob"][mask]
        y = arrays["y"][mask]
        print(
            f"{m:>5} {mask.sum():>6} {auc(p, y):>8.4f} "
            f"{ece(p, y):>8.4f} {brier(p, y):>8.4f}"
        )
    return months


def show_bins(arrays, month):
    mask = arrays["period"] == month
    print(f"\nreliability diagram, month {month}")
    print(f"{'bin':>12} {'count':>6} {'mean pred':>10} {'event rate':>11} {'gap':>8}")
    for b in reliability_bins(arrays["pred_prob"][mask], arrays["y"][mask]):
        if b.count == 0:
            continue
        gap = b.mean_pred - b.event_rate
        bar = "#" * min(40, int(abs(gap) * 200))
        print(
            f"[{b.lo:4.2f},{b.hi:4.2f}) {b.count:>6} {b.mean_pred:>10.4f} "
            f"{b.event_rate:>11.4f} {gap:>+8.4f} {bar}"
        )


def main():
    arrays = generate_arrays(canonical_scenario())
    months = month_table(arrays)

    # before the shift the bins hug the diagonal; by the end the model
    # systematically under-predicts because prevalence moved under it
    show_bins(arrays, months[3])
    show_bins(arrays, months[-1])

    p, y = arrays["pred_prob"], arrays["y"]
    first = arrays["period"] <= 4
    print("\nsummary")
    print(f"  months 1-4  ECE: {ece(p[first], y[first]):.4f}")
    print(f"  months 5-12 ECE: {ece(p[~first], y[~first]):.4f}")
    print(f"  AUC drift over the year: "
          f"{abs(auc(p[first], y[first]) - auc(p[~first], y[~first])):.4f}"
          " (discrimination never noticed)")


if __name__ == "__main__":
    main()
