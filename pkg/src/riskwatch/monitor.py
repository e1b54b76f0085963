"""Incremental monitoring engine: streams in, per-period snapshots out.

The engine consumes interleaved prediction events and outcome records,
joins them (events wait in a pending buffer until their outcome arrives),
accumulates resolved pairs into the currently open period, and on period
rollover computes a MetricSnapshot (calibration, tail risk, regret,
belief) and advances the alarm state machine.

All engine state is plain JSON-serializable data, so a run can be frozen
mid-stream with to_state(), persisted, reloaded with from_state() and
continued to a bit-identical result; the per-period metric computations
see exactly the same accumulated values either way.

Ordering contract: a single writer appends events with increasing sequence
numbers and nondecreasing periods, and outcomes arrive after (and near)
their events. A pair that resolves only after its period has already been
closed is dropped with a warning rather than reopening history.
"""

from __future__ import annotations

import logging
import math

from . import belief as belief_mod
from .alarms import AlarmRecord, AlarmState, OperatingState, ThresholdPolicy, evaluate
from .calibration import auc, brier, ece
from .core import MetricSnapshot, OutcomeRecord, PredictionEvent, ResolvedPair, TimeIndex
from .errors import DuplicateOutcome, OrphanOutcome, VersionMismatch
from .tailrisk import cvar_tail, var

logger = logging.getLogger(__name__)

ENGINE_STATE_VERSION = 1


class MonitorEngine:
    """Streaming metric/alarm pipeline over one deployment's event log."""

    def __init__(
        self,
        policy: ThresholdPolicy | None = None,
        n_bins: int = 10,
        alpha: float = 0.95,
        drift_samples: int = 50_000,
        drift_seed: int = 7,
    ):
        self.policy = policy or ThresholdPolicy()
        self.n_bins = n_bins
        self.alpha = alpha
        self.drift_samples = drift_samples
        self.drift_seed = drift_seed

        self.snapshots: list[MetricSnapshot] = []
        self.alarm = AlarmState()
        self.events_seen = 0
        self.outcomes_seen = 0

        self._pending: dict[str, PredictionEvent] = {}
        self._resolved_ids: set[str] = set()
        self._open_period: int | None = None
        self._acc_probs: list[float] = []
        self._acc_ys: list[int] = []
        self._acc_losses: list[float] = []
        self._acc_chosen: list[int | None] = []
        self._acc_alts: list[tuple[float, ...] | None] = []
        self._acc_sequences: list[int] = []
        self._baseline: tuple[float, float] | None = None  # frozen Beta(a, b)
        self._regret_cumulative: float | None = None
        self._stale_pairs = 0

    # -- stream intake -------------------------------------------------------

    def observe_event(self, event: PredictionEvent) -> None:
        if event.event_id in self._pending or event.event_id in self._resolved_ids:
            raise ValueError(f"duplicate event_id {event.event_id!r} in event stream")
        self._pending[event.event_id] = event
        self.events_seen += 1

    def observe_outcome(self, outcome: OutcomeRecord) -> None:
        if outcome.event_id in self._resolved_ids:
            raise DuplicateOutcome(f"second outcome for event_id {outcome.event_id!r}")
        event = self._pending.pop(outcome.event_id, None)
        if event is None:
            raise OrphanOutcome(
                f"outcome references unknown event_id {outcome.event_id!r}"
            )
        self._resolved_ids.add(outcome.event_id)
        self.outcomes_seen += 1
        self._on_pair(ResolvedPair(event, outcome))

    def finalize(self) -> None:
        """Close the open period and flush warnings for unresolved events."""
        if self._open_period is not None and self._acc_probs:
            self._close_period()
        self._open_period = None
        if self._pending:
            logger.warning(
                "monitor: %d events left unresolved at stream end", len(self._pending)
            )
        if self._stale_pairs:
            logger.warning(
                "monitor: dropped %d pairs that resolved after their period closed",
                self._stale_pairs,
            )

    # -- internals -----------------------------------------------------------

    def _on_pair(self, pair: ResolvedPair) -> None:
        period = pair.event.time.period
        if self._open_period is None:
            self._open_period = period
        elif period > self._open_period:
            self._close_period()
            self._open_period = period
        elif period < self._open_period:
            self._stale_pairs += 1
            return
        self._acc_probs.append(pair.event.predicted_prob)
        self._acc_ys.append(pair.outcome.outcome)
        self._acc_losses.append(pair.outcome.loss)
        if pair.event.action_id is not None and pair.outcome.alt_losses is not None:
            self._acc_chosen.append(pair.event.action_id)
            self._acc_alts.append(pair.outcome.alt_losses)
        else:
            self._acc_chosen.append(None)
            self._acc_alts.append(None)
        self._acc_sequences.append(pair.event.time.sequence)

    def _close_period(self) -> None:
        assert self._open_period is not None and self._acc_probs
        period = self._open_period
        time = TimeIndex(period=period, sequence=self._acc_sequences[-1])
        n = len(self._acc_probs)

        # regret over the steps that carry counterfactual losses
        step_regrets = [
            alts[chosen] - min(alts)
            for chosen, alts in zip(self._acc_chosen, self._acc_alts)
            if chosen is not None and alts is not None
        ]
        regret_rate = None
        if step_regrets:
            period_regret = math.fsum(step_regrets)
            base = 0.0 if self._regret_cumulative is None else self._regret_cumulative
            self._regret_cumulative = base + period_regret
            regret_rate = period_regret / len(step_regrets)

        # rolling belief over this period; baseline frozen at first close
        positives = sum(self._acc_ys)
        rolling = belief_mod.BetaPosterior(1.0 + positives, 1.0 + (n - positives))
        if self._baseline is None:
            self._baseline = (rolling.a, rolling.b)
        baseline = belief_mod.BetaPosterior(*self._baseline)
        drift = belief_mod.drift_score(
            baseline, rolling,
            samples=self.drift_samples,
            seed=[self.drift_seed, period],
        )

        snapshot = MetricSnapshot(
            time=time,
            n=n,
            ece=ece(self._acc_probs, self._acc_ys, n_bins=self.n_bins),
            brier=brier(self._acc_probs, self._acc_ys),
            auc=auc(self._acc_probs, self._acc_ys),
            var=var(self._acc_losses, self.alpha),
            cvar=cvar_tail(self._acc_losses, self.alpha),
            regret_cumulative=self._regret_cumulative,
            regret_rate=regret_rate,
            posterior_mean=rolling.mean,
            drift_score=drift,
        )
        self.snapshots.append(snapshot)
        self.alarm = evaluate(self.alarm, snapshot, self.policy)

        self._acc_probs = []
        self._acc_ys = []
        self._acc_losses = []
        self._acc_chosen = []
        self._acc_alts = []
        self._acc_sequences = []

    # -- state freezing ------------------------------------------------------

    def to_state(self) -> dict:
        """Plain-data image of the full engine state."""
        return {
            "engine_version": ENGINE_STATE_VERSION,
            "n_bins": self.n_bins,
            "alpha": self.alpha,
            "drift_samples": self.drift_samples,
            "drift_seed": self.drift_seed,
            "policy": {
                "ece_max": self.policy.ece_max,
                "cvar_max": self.policy.cvar_max,
                "regret_rate_max": self.policy.regret_rate_max,
                "drift_min": self.policy.drift_min,
                "consecutive_for_review": self.policy.consecutive_for_review,
                "consecutive_for_suspend": self.policy.consecutive_for_suspend,
                "recovery_periods": self.policy.recovery_periods,
                "conjunctive": self.policy.conjunctive,
            },
            "events_seen": self.events_seen,
            "outcomes_seen": self.outcomes_seen,
            "open_period": self._open_period,
            "acc": {
                "probs": list(self._acc_probs),
                "ys": list(self._acc_ys),
                "losses": list(self._acc_losses),
                "chosen": list(self._acc_chosen),
                "alts": [list(a) if a is not None else None for a in self._acc_alts],
                "sequences": list(self._acc_sequences),
            },
            "baseline": list(self._baseline) if self._baseline else None,
            "regret_cumulative": self._regret_cumulative,
            "stale_pairs": self._stale_pairs,
            "pending": [
                [
                    ev.event_id, ev.time.period, ev.time.sequence,
                    ev.predicted_prob, ev.action_id, ev.model_version, ev.cohort,
                ]
                for ev in self._pending.values()
            ],
            "resolved_ids": sorted(self._resolved_ids),
            "alarm": {
                "state": self.alarm.state.value,
                "breach_streak": self.alarm.breach_streak,
                "clean_streak": self.alarm.clean_streak,
                "history": [
                    {
                        "period": rec.time.period,
                        "sequence": rec.time.sequence,
                        "state": rec.state.value,
                        "breached": list(rec.breached),
                    }
                    for rec in self.alarm.history
                ],
            },
            "snapshots": [_snapshot_to_dict(s) for s in self.snapshots],
        }

    @classmethod
    def from_state(cls, state: dict) -> "MonitorEngine":
        """Rebuild an engine from to_state() output."""
        version = state.get("engine_version")
        if version != ENGINE_STATE_VERSION:
            raise VersionMismatch(
                f"engine state version {version!r} != supported {ENGINE_STATE_VERSION}"
            )
        policy = ThresholdPolicy(**state["policy"])
        engine = cls(
            policy=policy,
            n_bins=state["n_bins"],
            alpha=state["alpha"],
            drift_samples=state["drift_samples"],
            drift_seed=state["drift_seed"],
        )
        engine.events_seen = state["events_seen"]
        engine.outcomes_seen = state["outcomes_seen"]
        engine._open_period = state["open_period"]
        acc = state["acc"]
        engine._acc_probs = [float(x) for x in acc["probs"]]
        engine._acc_ys = [int(x) for x in acc["ys"]]
        engine._acc_losses = [float(x) for x in acc["losses"]]
        engine._acc_chosen = [None if x is None else int(x) for x in acc["chosen"]]
        engine._acc_alts = [
            None if a is None else tuple(float(x) for x in a) for a in acc["alts"]
        ]
        engine._acc_sequences = [int(x) for x in acc["sequences"]]
        engine._baseline = tuple(state["baseline"]) if state["baseline"] else None
        engine._regret_cumulative = state["regret_cumulative"]
        engine._stale_pairs = state.get("stale_pairs", 0)
        engine._pending = {
            row[0]: PredictionEvent(
                event_id=row[0],
                time=TimeIndex(period=row[1], sequence=row[2]),
                predicted_prob=row[3],
                action_id=row[4],
                model_version=row[5],
                cohort=row[6],
            )
            for row in state["pending"]
        }
        engine._resolved_ids = set(state["resolved_ids"])
        alarm = state["alarm"]
        engine.alarm = AlarmState(
            state=OperatingState(alarm["state"]),
            breach_streak=alarm["breach_streak"],
            clean_streak=alarm["clean_streak"],
            history=tuple(
                AlarmRecord(
                    time=TimeIndex(period=rec["period"], sequence=rec["sequence"]),
                    state=OperatingState(rec["state"]),
                    breached=tuple(rec["breached"]),
                )
                for rec in alarm["history"]
            ),
        )
        engine.snapshots = [_snapshot_from_dict(d) for d in state["snapshots"]]
        return engine


def _snapshot_to_dict(s: MetricSnapshot) -> dict:
    d = {"period": s.time.period, "sequence": s.time.sequence, "n": s.n}
    for f in MetricSnapshot.METRIC_FIELDS:
        d[f] = getattr(s, f)
    return d


def _snapshot_from_dict(d: dict) -> MetricSnapshot:
    return MetricSnapshot(
        time=TimeIndex(period=d["period"], sequence=d["sequence"]),
        n=d["n"],
        **{f: d[f] for f in MetricSnapshot.METRIC_FIELDS},
    )
