"""Synthetic deployment generator: determinism, structure, drift mechanics."""

from dataclasses import replace

import numpy as np
import pytest

from riskwatch.calibration import auc
from riskwatch.errors import BadConfig, UnknownPreset
from riskwatch.simulator import (
    ACT,
    MONITOR,
    ScenarioConfig,
    canonical_scenario,
    generate,
    generate_arrays,
    prevalence_at,
    preset,
    preset_names,
    stationary_control,
)


def small(**over):
    base = dict(periods=4, patients_per_period=300, seed=9)
    base.update(over)
    return replace(canonical_scenario(), **base)


class TestDeterminism:
    def test_same_seed_same_output(self):
        a = generate_arrays(small())
        b = generate_arrays(small())
        for key in a:
            assert np.array_equal(a[key], b[key]), key

    def test_seed_changes_output(self):
        a = generate_arrays(small(seed=1))
        b = generate_arrays(small(seed=2))
        assert not np.array_equal(a["pred_prob"], b["pred_prob"])

    def test_events_deterministic_end_to_end(self):
        x = generate(small())
        y = generate(small())
        assert x.events == y.events
        assert x.outcomes == y.outcomes


class TestStructure:
    def test_counts_and_ids(self):
        cfg = small()
        out = generate(cfg)
        assert len(out.events) == cfg.periods * cfg.patients_per_period
        assert len(out.outcomes) == len(out.events)
        ids = [e.event_id for e in out.events]
        assert len(set(ids)) == len(ids)
        # outcome i belongs to event i
        assert all(e.event_id == o.event_id
                   for e, o in zip(out.events, out.outcomes))

    def test_sequences_strictly_increase(self):
        out = generate(small())
        seqs = [e.time.sequence for e in out.events]
        assert seqs == sorted(seqs)
        assert len(set(seqs)) == len(seqs)

    def test_periods_nondecreasing_and_complete(self):
        cfg = small()
        out = generate(cfg)
        periods = [e.time.period for e in out.events]
        assert periods == sorted(periods)
        assert set(periods) == set(range(1, cfg.periods + 1))

    def test_probabilities_valid(self):
        arrs = generate_arrays(small())
        assert np.all((arrs["pred_prob"] >= 0) & (arrs["pred_prob"] <= 1))
        assert np.all((arrs["true_prob"] >= 0) & (arrs["true_prob"] <= 1))
        assert set(np.unique(arrs["y"])).issubset({0, 1})

    def test_losses_nonnegative(self):
        arrs = generate_arrays(small())
        assert np.all(arrs["loss"] >= 0)
        assert np.all(arrs["loss_monitor"] >= 0)
        assert np.all(arrs["loss_act"] >= 0)

    def test_loss_is_chosen_alt_loss_exactly(self):
        out = generate(small())
        for event, outcome in zip(out.events, out.outcomes):
            assert outcome.alt_losses is not None
            assert len(outcome.alt_losses) == 2
            assert event.action_id in (MONITOR, ACT)
            assert outcome.loss == outcome.alt_losses[event.action_id]

    def test_action_follows_threshold(self):
        cfg = small()
        out = generate(cfg)
        for ev in out.events:
            expected = ACT if ev.predicted_prob >= cfg.act_threshold else MONITOR
            assert ev.action_id == expected


class TestPrevalenceSchedule:
    def test_flat_before_drift(self):
        cfg = canonical_scenario()
        for m in range(1, cfg.drift_start_period + 1):
            assert prevalence_at(cfg, m) == cfg.base_prevalence

    def test_linear_ramp_hits_final(self):
        cfg = canonical_scenario()
        assert prevalence_at(cfg, cfg.periods) == pytest.approx(
            cfg.final_prevalence
        )
        # strictly increasing across the ramp
        ramp = [prevalence_at(cfg, m)
                for m in range(cfg.drift_start_period, cfg.periods + 1)]
        assert all(b > a for a, b in zip(ramp, ramp[1:]))

    def test_stationary_control_is_flat(self):
        cfg = stationary_control()
        values = {prevalence_at(cfg, m) for m in range(1, cfg.periods + 1)}
        assert values == {cfg.base_prevalence}


class TestDriftMechanics:
    def test_distortion_preserves_auc_exactly(self):
        """The miscalibration shift is monotone in the latent score, so
        predicted and true probabilities rank patients identically."""
        arrs = generate_arrays(replace(canonical_scenario(), periods=8))
        for m in (1, 5, 8):
            mask = arrs["period"] == m
            a_pred = auc(arrs["pred_prob"][mask], arrs["y"][mask])
            a_true = auc(arrs["true_prob"][mask], arrs["y"][mask])
            assert a_pred == a_true

    def test_no_distortion_before_drift_start(self):
        arrs = generate_arrays(canonical_scenario())
        cfg = canonical_scenario()
        pre = arrs["period"] <= cfg.drift_start_period
        # before drift: the model is calibrated up to prevalence (no logit
        # shift) and prevalence equals the frozen training value
        gaps = np.abs(arrs["pred_prob"][pre] - arrs["true_prob"][pre])
        assert gaps.max() < 1e-12

    def test_miscalibration_grows_after_drift(self):
        arrs = generate_arrays(canonical_scenario())
        mean_gap = []
        for m in range(5, 13):
            mask = arrs["period"] == m
            mean_gap.append(
                float(np.mean(arrs["true_prob"][mask] - arrs["pred_prob"][mask]))
            )
        assert all(b > a for a, b in zip(mean_gap, mean_gap[1:]))


class TestConfigValidation:
    def test_bad_values_rejected(self):
        with pytest.raises(BadConfig):
            ScenarioConfig(periods=0)
        with pytest.raises(BadConfig):
            ScenarioConfig(base_prevalence=0.0)
        with pytest.raises(BadConfig):
            ScenarioConfig(final_prevalence=1.2)
        with pytest.raises(BadConfig):
            ScenarioConfig(patients_per_period=0)
        with pytest.raises(BadConfig):
            ScenarioConfig(act_threshold=1.5)
        with pytest.raises(BadConfig):
            ScenarioConfig(tail_fraction=0.1, tail_scale=0.0)

    def test_drift_start_beyond_horizon_means_no_drift(self):
        # legal config: the ramp simply never arrives in the window
        cfg = ScenarioConfig(periods=3, drift_start_period=10)
        assert all(prevalence_at(cfg, m) == cfg.base_prevalence
                   for m in range(1, 4))

    def test_presets(self):
        assert set(preset_names()) == {
            "sepsis_drift", "icu_tail", "oncology_regret"
        }
        for name in preset_names():
            cfg = preset(name)
            assert isinstance(cfg, ScenarioConfig)

    def test_unknown_preset(self):
        with pytest.raises(UnknownPreset):
            preset("nope")

    def test_icu_tail_has_heavy_tail_knobs(self):
        cfg = preset("icu_tail")
        assert cfg.tail_fraction > 0
        assert cfg.miscalibration_gain == 0.0

    def test_oncology_regret_escalates(self):
        assert preset("oncology_regret").regret_escalation > 0


class TestTailPreset:
    def test_heavy_tail_raises_cvar_not_median(self):
        from riskwatch.tailrisk import cvar_tail, var

        base = generate_arrays(replace(preset("icu_tail"),
                                       tail_fraction=0.0, periods=3, seed=4))
        heavy = generate_arrays(replace(preset("icu_tail"),
                                        tail_fraction=0.05, periods=3, seed=4))
        assert cvar_tail(heavy["loss"], 0.95) > cvar_tail(base["loss"], 0.95)
        assert abs(var(heavy["loss"], 0.5) - var(base["loss"], 0.5)) < 0.05
