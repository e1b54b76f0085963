"""Shared domain types and stream plumbing.

The toolkit processes a totally ordered stream of prediction events that are
later resolved by outcome records. Everything downstream (calibration, tail
risk, regret, belief, alarms) consumes resolved pairs grouped into windows,
so the types and the two stream operations here are the substrate for every
metric module.

Ordering model: a single writer appends events with strictly increasing
sequence numbers and nondecreasing periods. Outcomes may arrive out of order
relative to events; resolved pairs are always emitted in event order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import DuplicateOutcome, OrphanOutcome

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class TimeIndex:
    """Position of an event in deployment time.

    period is the coarse reporting bucket (e.g. calendar month of
    deployment, 1-based); sequence is the global arrival counter that
    totally orders the stream.
    """

    period: int
    sequence: int

    def __post_init__(self):
        if self.period < 1:
            raise ValueError(f"period must be >= 1, got {self.period}")
        if self.sequence < 0:
            raise ValueError(f"sequence must be >= 0, got {self.sequence}")


@dataclass(frozen=True)
class PredictionEvent:
    """One model prediction at serving time.

    action_id is the action the deployed policy took on this prediction
    (None when the log carries no decision trail). model_version tags the
    frozen model that produced the probability.
    """

    event_id: str
    time: TimeIndex
    predicted_prob: float
    action_id: int | None = None
    model_version: str = "unversioned"
    cohort: str | None = None

    def __post_init__(self):
        if not self.event_id:
            raise ValueError("event_id must be non-empty")
        if not 0.0 <= self.predicted_prob <= 1.0:
            raise ValueError(
                f"predicted_prob must lie in [0, 1], got {self.predicted_prob}"
            )


@dataclass(frozen=True)
class OutcomeRecord:
    """Resolution of one prediction event.

    outcome is the realized binary label; loss is the realized harm in
    whatever units the deployment accounts for. alt_losses, when present,
    gives the counterfactual loss of every action in the decision set
    (indexed by action_id) and alt_losses[chosen action] equals loss.
    """

    event_id: str
    outcome: int
    loss: float
    alt_losses: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.outcome not in (0, 1):
            raise ValueError(f"outcome must be 0 or 1, got {self.outcome}")
        if self.alt_losses is not None and len(self.alt_losses) == 0:
            raise ValueError("alt_losses, when given, must be non-empty")


@dataclass(frozen=True)
class ResolvedPair:
    """A prediction joined with its outcome."""

    event: PredictionEvent
    outcome: OutcomeRecord


@dataclass(frozen=True)
class WindowSpec:
    """How to slice a resolved stream into metric windows.

    kind "by_period" groups pairs sharing a period value (the reporting
    default). kind "by_count" emits, at every step, the window of the most
    recent `size` pairs (ragged at the head of the stream).
    """

    kind: str = "by_period"
    size: int | None = None

    def __post_init__(self):
        if self.kind not in ("by_period", "by_count"):
            raise ValueError(f"unknown window kind {self.kind!r}")
        if self.kind == "by_count":
            if self.size is None or self.size < 1:
                raise ValueError("by_count windows need size >= 1")
        elif self.size is not None:
            raise ValueError("by_period windows take no size")


@dataclass(frozen=True)
class Window:
    """A contiguous slice of resolved pairs, stamped with its closing time."""

    pairs: tuple[ResolvedPair, ...]
    time: TimeIndex


@dataclass(frozen=True)
class MetricSnapshot:
    """Per-window readout of every monitored metric.

    Any metric may be undefined (None), e.g. auc on a single-class window
    or regret on a log without counterfactual losses. Undefined is a value,
    not an error; downstream consumers (alarms, reports) must handle it.
    n is the number of resolved pairs behind the snapshot.
    """

    time: TimeIndex
    n: int
    ece: float | None = None
    brier: float | None = None
    auc: float | None = None
    var: float | None = None
    cvar: float | None = None
    regret_cumulative: float | None = None
    regret_rate: float | None = None
    posterior_mean: float | None = None
    drift_score: float | None = None

    METRIC_FIELDS = (
        "ece", "brier", "auc", "var", "cvar",
        "regret_cumulative", "regret_rate", "posterior_mean", "drift_score",
    )

    def __post_init__(self):
        if all(getattr(self, f) is None for f in self.METRIC_FIELDS):
            raise ValueError("snapshot must carry at least one defined metric")

    def defined(self) -> dict[str, float]:
        """Mapping of metric name -> value for the metrics that are defined."""
        return {
            f: getattr(self, f)
            for f in self.METRIC_FIELDS
            if getattr(self, f) is not None
        }


def join(
    events: Iterable[PredictionEvent],
    outcomes: Iterable[OutcomeRecord],
) -> Iterator[ResolvedPair]:
    """Pair prediction events with their outcome records.

    Pairs are yielded in event-stream order regardless of the order
    outcomes arrive in. Events whose outcomes never arrive are held to the
    end and dropped with a logged count. An outcome naming an event_id that
    does not exist in the event stream raises OrphanOutcome; a second
    outcome for an already-resolved event raises DuplicateOutcome.
    """
    ordered = list(events)
    known = {ev.event_id for ev in ordered}
    if len(known) != len(ordered):
        raise ValueError("event stream contains duplicate event_ids")

    resolved: dict[str, OutcomeRecord] = {}
    cursor = 0  # next event position awaiting emission

    for out in outcomes:
        if out.event_id not in known:
            raise OrphanOutcome(
                f"outcome references unknown event_id {out.event_id!r}"
            )
        if out.event_id in resolved:
            raise DuplicateOutcome(
                f"second outcome for event_id {out.event_id!r}"
            )
        resolved[out.event_id] = out
        # flush the resolved prefix in event order
        while cursor < len(ordered) and ordered[cursor].event_id in resolved:
            ev = ordered[cursor]
            yield ResolvedPair(ev, resolved[ev.event_id])
            cursor += 1

    unresolved = len(ordered) - cursor - sum(
        1 for ev in ordered[cursor:] if ev.event_id in resolved
    )
    if unresolved:
        logger.warning("join: %d events left unresolved at stream end", unresolved)


def window_partition(
    pairs: Iterable[ResolvedPair],
    spec: WindowSpec,
) -> Iterator[Window]:
    """Slice a resolved stream into windows per spec.

    by_period: one window per distinct period, in stream order; every pair
    lands in exactly one window and concatenating windows reproduces the
    stream. by_count: one window per pair holding the trailing `size` pairs
    (fewer near the head). Windows carry the TimeIndex of their last pair.
    """
    if spec.kind == "by_period":
        bucket: list[ResolvedPair] = []
        for pair in pairs:
            if bucket and pair.event.time.period != bucket[-1].event.time.period:
                yield Window(tuple(bucket), bucket[-1].event.time)
                bucket = []
            bucket.append(pair)
        if bucket:
            yield Window(tuple(bucket), bucket[-1].event.time)
    else:
        assert spec.size is not None
        tail: list[ResolvedPair] = []
        for pair in pairs:
            tail.append(pair)
            if len(tail) > spec.size:
                tail.pop(0)
            yield Window(tuple(tail), pair.event.time)


def split_arrays(window: Window | Sequence[ResolvedPair]):
    """Pull (probs, outcomes, losses) float/int lists out of a window."""
    pairs = window.pairs if isinstance(window, Window) else tuple(window)
    probs = [p.event.predicted_prob for p in pairs]
    ys = [p.outcome.outcome for p in pairs]
    losses = [p.outcome.loss for p in pairs]
    return probs, ys, losses
