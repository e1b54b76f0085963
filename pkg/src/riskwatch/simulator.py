"""Synthetic deployment scenarios for exercising the monitoring stack.

The generator models a frozen binary risk model deployed into a population
whose event prevalence starts drifting after a configurable period. Each
patient carries a latent severity score drawn from one of two unit-variance
Gaussians separated by class_separation, which fixes the model's
discrimination (AUC stays flat by construction). The true event probability
is the generative posterior at the current prevalence; the deployed model's
predicted probability is the posterior at the frozen pre-deployment
prevalence, pushed further off by a logit shift that grows after drift
onset. Both transforms are strictly monotone in the latent score within a
period, so within-period ranking (and therefore AUC) is untouched while
calibration decays.

Losses are truth-referenced harms: not intervening on a true positive costs
in proportion to how much the model understated that patient's risk (capped,
so harm saturates), intervening costs a flat amount plus any overstated risk
on negatives, and every event carries a small idiosyncratic background
harm. Pre-drift the model is calibrated, understatement is zero, and the
loss tail sits at the background level; as drift accumulates, missed
positives push the tail up. Counterfactual losses for the binary
monitor/act decision are recorded per event, and the realized loss always
equals the chosen action's entry.

Sampling is variance-reduced so the published monthly trajectories are
properties of the design rather than of one lucky seed: outcome counts use
fixed-margin sampling (expected count, randomized rounding, randomized
positions) and latent scores use per-class jittered-quantile stratification
(exact Normal marginals, shuffled). Every period draws from its own child
stream, default_rng([seed, period]), so runs are reproducible and periods
are independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.special import ndtri

from .alarms import AlarmRecord, AlarmState, ThresholdPolicy
from .core import MetricSnapshot, OutcomeRecord, PredictionEvent, TimeIndex
from .errors import BadConfig, UnknownPreset

MONITOR, ACT = 0, 1  # action ids of the binary decision set


@dataclass(frozen=True)
class ScenarioConfig:
    """Parameters of one synthetic deployment.

    The defaults are the canonical scenario: a 12-period run whose
    prevalence ramps from 0.10 to 0.25 after period 4 while the model stays
    frozen, tuned so the monitored trajectories show flat AUC near 0.83,
    calibration error rising from the noise floor to ~0.13, and the 95%
    loss tail rising from ~0.085 to ~0.29 with the default alarm policy
    leaving NORMAL at period 6.
    """

    periods: int = 12
    patients_per_period: int = 2000
    base_prevalence: float = 0.10
    final_prevalence: float = 0.25
    drift_start_period: int = 4
    class_separation: float = 1.350
    miscalibration_gain: float = 0.02
    loss_w_fn: float = 1.3
    loss_w_fp: float = 1.0
    seed: int = 42
    # loss-shape knobs (canonical values; presets override)
    harm_cap: float = 0.19
    baseline_harm_scale: float = 0.034
    intervention_cost: float = 0.05
    act_threshold: float = 0.5
    tail_fraction: float = 0.0
    tail_scale: float = 0.0
    regret_escalation: float = 0.0

    def __post_init__(self):
        if self.periods < 1:
            raise BadConfig("periods must be >= 1")
        if self.patients_per_period < 1:
            raise BadConfig("patients_per_period must be >= 1")
        for name in ("base_prevalence", "final_prevalence"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise BadConfig(f"{name} must lie in (0, 1), got {v}")
        if self.drift_start_period < 1:
            raise BadConfig("drift_start_period must be >= 1")
        if self.class_separation <= 0:
            raise BadConfig("class_separation must be positive")
        if self.miscalibration_gain < 0:
            raise BadConfig("miscalibration_gain must be >= 0")
        for name in ("loss_w_fn", "loss_w_fp", "harm_cap", "baseline_harm_scale",
                     "intervention_cost"):
            if getattr(self, name) < 0:
                raise BadConfig(f"{name} must be >= 0")
        if not 0.0 < self.act_threshold < 1.0:
            raise BadConfig("act_threshold must lie in (0, 1)")
        if not 0.0 <= self.tail_fraction < 1.0:
            raise BadConfig("tail_fraction must lie in [0, 1)")
        if self.tail_fraction > 0 and self.tail_scale <= 0:
            raise BadConfig("tail_scale must be positive when tail_fraction > 0")
        if self.regret_escalation < 0:
            raise BadConfig("regret_escalation must be >= 0")


@dataclass(frozen=True)
class ScenarioOutput:
    """Generated streams plus the retained ground truth.

    events[i], outcomes[i] and truth[i] are aligned; truth holds the true
    conditional event probability the generator used for each patient,
    which real deployments never observe.
    """

    config: ScenarioConfig
    events: tuple[PredictionEvent, ...]
    outcomes: tuple[OutcomeRecord, ...]
    truth: tuple[float, ...]


def _logit(p: float) -> float:
    return math.log(p / (1.0 - p))


def prevalence_at(config: ScenarioConfig, period: int) -> float:
    """True event prevalence of one period: flat, then a linear ramp."""
    m0 = config.drift_start_period
    if period < m0 or config.periods == m0:
        return config.base_prevalence
    frac = (period - m0) / (config.periods - m0)
    frac = min(max(frac, 0.0), 1.0)
    return config.base_prevalence + (config.final_prevalence - config.base_prevalence) * frac


def generate_arrays(config: ScenarioConfig, seed: int | None = None) -> dict[str, np.ndarray]:
    """Vectorized scenario draw; the array core behind generate().

    Returns flat arrays over all periods: period, y, true_prob, pred_prob,
    loss, loss_monitor, loss_act, action. Deterministic given the seed.
    """
    seed = config.seed if seed is None else seed
    n = config.patients_per_period
    d = config.class_separation
    base_logit = _logit(config.base_prevalence)

    cols: dict[str, list[np.ndarray]] = {
        k: [] for k in ("period", "y", "true_prob", "pred_prob",
                        "loss", "loss_monitor", "loss_act", "action")
    }
    for m in range(1, config.periods + 1):
        rng = np.random.default_rng([seed, m])
        pim = prevalence_at(config, m)
        since_onset = max(0, m - config.drift_start_period)
        shift = config.miscalibration_gain * since_onset

        # fixed-margin outcomes: expected count, randomized rounding/positions
        expected = pim * n
        k = int(expected) + (1 if rng.random() < expected - int(expected) else 0)
        y = np.zeros(n, dtype=np.int64)
        y[rng.permutation(n)[:k]] = 1

        # stratified latent scores per class: jittered equiprobable normal
        # quantiles, shuffled within class (exact N(d*y, 1) marginals)
        s = np.empty(n, dtype=float)
        for cls in (0, 1):
            idx = np.flatnonzero(y == cls)
            if idx.size == 0:
                continue
            z = ndtri((np.arange(idx.size) + rng.random(idx.size)) / idx.size)
            rng.shuffle(z)
            s[idx] = z + d * cls

        # generative posterior log-odds at the frozen prevalence
        u = base_logit + d * s - d * d / 2.0
        true_prob = 1.0 / (1.0 + np.exp(-(u + (_logit(pim) - base_logit))))
        pred_prob = 1.0 / (1.0 + np.exp(-(u - shift)))

        eps = np.abs(rng.standard_normal(n)) * config.baseline_harm_scale
        if config.tail_fraction > 0.0:
            heavy = rng.random(n) < config.tail_fraction
            eps = np.where(
                heavy, config.tail_scale * np.exp(rng.standard_normal(n)), eps
            )

        under = np.minimum(np.maximum(true_prob - pred_prob, 0.0), config.harm_cap)
        over = np.minimum(np.maximum(pred_prob - true_prob, 0.0), config.harm_cap)
        if config.regret_escalation > 0.0:
            under = under * (1.0 + config.regret_escalation * since_onset)
        loss_monitor = config.loss_w_fn * y * under + eps
        loss_act = config.intervention_cost + config.loss_w_fp * (1 - y) * over + eps
        action = np.where(pred_prob >= config.act_threshold, ACT, MONITOR)
        loss = np.where(action == ACT, loss_act, loss_monitor)

        cols["period"].append(np.full(n, m, dtype=np.int64))
        cols["y"].append(y)
        cols["true_prob"].append(true_prob)
        cols["pred_prob"].append(pred_prob)
        cols["loss"].append(loss)
        cols["loss_monitor"].append(loss_monitor)
        cols["loss_act"].append(loss_act)
        cols["action"].append(action)

    return {k: np.concatenate(v) for k, v in cols.items()}


def generate(config: ScenarioConfig, seed: int | None = None) -> ScenarioOutput:
    """Materialize one scenario as event/outcome streams plus ground truth."""
    arrays = generate_arrays(config, seed=seed)
    model_version = "frozen-v1"
    events, outcomes, truth = [], [], []
    for i in range(arrays["period"].size):
        time = TimeIndex(period=int(arrays["period"][i]), sequence=i)
        events.append(PredictionEvent(
            event_id=f"ev-{i:06d}",
            time=time,
            predicted_prob=float(arrays["pred_prob"][i]),
            action_id=int(arrays["action"][i]),
            model_version=model_version,
        ))
        outcomes.append(OutcomeRecord(
            event_id=f"ev-{i:06d}",
            outcome=int(arrays["y"][i]),
            loss=float(arrays["loss"][i]),
            alt_losses=(float(arrays["loss_monitor"][i]), float(arrays["loss_act"][i])),
        ))
        truth.append(float(arrays["true_prob"][i]))
    return ScenarioOutput(
        config=config,
        events=tuple(events),
        outcomes=tuple(outcomes),
        truth=tuple(truth),
    )


def canonical_scenario() -> ScenarioConfig:
    """The frozen default scenario (seed 42) behind the published trajectories."""
    return ScenarioConfig()


def stationary_control(config: ScenarioConfig | None = None) -> ScenarioConfig:
    """No-drift twin of a scenario: prevalence stays at base, model stays true."""
    config = config or canonical_scenario()
    return replace(
        config,
        final_prevalence=config.base_prevalence,
        miscalibration_gain=0.0,
    )


_PRESETS = {
    # prevalence + calibration drift, the canonical shape
    "sepsis_drift": lambda: ScenarioConfig(),
    # stationary prevalence with a rare heavy-tailed loss subpopulation
    "icu_tail": lambda: ScenarioConfig(
        base_prevalence=0.12,
        final_prevalence=0.12,
        miscalibration_gain=0.0,
        tail_fraction=0.02,
        tail_scale=0.8,
    ),
    # drift expressed through counterfactual losses: regret grows superlinearly
    "oncology_regret": lambda: ScenarioConfig(
        regret_escalation=0.35,
    ),
}


def preset(name: str) -> ScenarioConfig:
    """Named qualitative scenario shapes; raises UnknownPreset otherwise."""
    try:
        factory = _PRESETS[name]
    except KeyError:
        raise UnknownPreset(
            f"unknown preset {name!r}; available: {', '.join(sorted(_PRESETS))}"
        ) from None
    return factory()


def preset_names() -> tuple[str, ...]:
    return tuple(sorted(_PRESETS))


def run_monitor(
    output: ScenarioOutput,
    policy: ThresholdPolicy | None = None,
    n_bins: int = 10,
    alpha: float = 0.95,
) -> tuple[list[MetricSnapshot], list[AlarmRecord]]:
    """Feed a generated scenario through the full monitoring pipeline.

    Wires the streams through join, per-period windows, calibration, tail
    risk, regret, belief and the alarm machine; returns the per-period
    metric snapshots and the alarm history.
    """
    from .monitor import MonitorEngine  # local import avoids a cycle at import time

    engine = MonitorEngine(policy=policy or ThresholdPolicy(), n_bins=n_bins, alpha=alpha)
    for event, outcome in zip(output.events, output.outcomes):
        engine.observe_event(event)
        engine.observe_outcome(outcome)
    engine.finalize()
    return list(engine.snapshots), list(engine.alarm.history)
