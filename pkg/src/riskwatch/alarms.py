"""Threshold alarm state machine over metric snapshots.

Three operating states (NORMAL, REVIEW, SUSPENDED) with hysteresis in
both directions: escalation requires a configured number of consecutive
breaching periods, de-escalation requires a configured number of
consecutive clean periods per step down, and no evaluation ever moves the
state more than one level. A period breaches when any enabled metric
crosses its bound (disjunctive default; a conjunctive flag requires all
enabled metrics to cross at once).

State transitions happen only through evaluate(), which returns a new
immutable state carrying an append-only history, so an audit can replay
every decision the machine made.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, replace
from typing import Iterable

from .core import MetricSnapshot, TimeIndex
from .errors import NoMetrics

logger = logging.getLogger(__name__)


class OperatingState(enum.Enum):
    NORMAL = "normal"
    REVIEW = "review"
    SUSPENDED = "suspended"


_LADDER = [OperatingState.NORMAL, OperatingState.REVIEW, OperatingState.SUSPENDED]


@dataclass(frozen=True)
class ThresholdPolicy:
    """Bounds and hysteresis for the alarm machine.

    A bound of None disables that metric. ece_max, cvar_max,
    regret_rate_max and drift_min all breach when the metric exceeds the
    bound (drift_min is the smallest drift score considered alarming).
    conjunctive=True requires every enabled, defined metric to breach in
    the same period before the period counts as breaching.
    """

    ece_max: float | None = 0.045
    cvar_max: float | None = 0.13
    regret_rate_max: float | None = None
    drift_min: float | None = None
    consecutive_for_review: int = 1
    consecutive_for_suspend: int = 3
    recovery_periods: int = 2
    conjunctive: bool = False

    def __post_init__(self):
        if self.consecutive_for_review < 1:
            raise ValueError("consecutive_for_review must be >= 1")
        if self.consecutive_for_suspend < self.consecutive_for_review:
            raise ValueError(
                "consecutive_for_suspend must be >= consecutive_for_review"
            )
        if self.recovery_periods < 1:
            raise ValueError("recovery_periods must be >= 1")

    def bounds(self) -> dict[str, float]:
        """Enabled metric name -> bound."""
        out = {}
        for name, bound in (
            ("ece", self.ece_max),
            ("cvar", self.cvar_max),
            ("regret_rate", self.regret_rate_max),
            ("drift_score", self.drift_min),
        ):
            if bound is not None:
                out[name] = bound
        return out


@dataclass(frozen=True)
class AlarmRecord:
    """One evaluation: the period's closing time, resulting state, breaches."""

    time: TimeIndex
    state: OperatingState
    breached: tuple[str, ...]


@dataclass(frozen=True)
class AlarmState:
    """Immutable machine state; history is append-only across evaluate()."""

    state: OperatingState = OperatingState.NORMAL
    breach_streak: int = 0
    clean_streak: int = 0
    history: tuple[AlarmRecord, ...] = ()


def evaluate(
    state: AlarmState,
    snapshot: MetricSnapshot,
    policy: ThresholdPolicy,
) -> AlarmState:
    """Advance the alarm machine by one period.

    Moves at most one level: NORMAL -> REVIEW after consecutive_for_review
    breaching periods, REVIEW -> SUSPENDED after consecutive_for_suspend,
    and one level down after recovery_periods consecutive clean periods
    (the clean counter restarts after each step down). NORMAL never jumps
    straight to SUSPENDED.
    """
    defined = snapshot.defined()
    considered = {
        name: (defined[name], bound)
        for name, bound in policy.bounds().items()
        if name in defined
    }
    if not considered:
        # nothing to judge: every enabled metric is undefined here. Failing
        # loudly beats silently scoring the period as clean.
        raise NoMetrics(
            "no enabled metric is defined in this snapshot "
            f"(enabled: {sorted(policy.bounds())}, "
            f"defined: {sorted(defined)})"
        )
    breached = tuple(
        name for name, (value, bound) in considered.items() if value > bound
    )
    if policy.conjunctive:
        is_breach = len(breached) == len(considered)
    else:
        is_breach = bool(breached)

    if is_breach:
        breach_streak = state.breach_streak + 1
        clean_streak = 0
        level = _LADDER.index(state.state)
        threshold = (
            policy.consecutive_for_review
            if state.state is OperatingState.NORMAL
            else policy.consecutive_for_suspend
        )
        if level < len(_LADDER) - 1 and breach_streak >= threshold:
            new_state = _LADDER[level + 1]
        else:
            new_state = state.state
    else:
        breach_streak = 0
        clean_streak = state.clean_streak + 1
        level = _LADDER.index(state.state)
        if level > 0 and clean_streak >= policy.recovery_periods:
            new_state = _LADDER[level - 1]
            clean_streak = 0  # each step down needs a fresh clean run
        else:
            new_state = state.state

    if new_state is not state.state:
        logger.info(
            "alarm transition at %s: %s -> %s (breached: %s)",
            snapshot.time, state.state.value, new_state.value,
            ",".join(breached) or "none",
        )

    record = AlarmRecord(time=snapshot.time, state=new_state, breached=breached)
    return AlarmState(
        state=new_state,
        breach_streak=breach_streak,
        clean_streak=clean_streak,
        history=state.history + (record,),
    )


def first_breach(
    trajectory: Iterable[tuple[TimeIndex, float | None]],
    bound: float,
) -> TimeIndex | None:
    """Time of the first value exceeding the bound; None if none does.

    Undefined values (None) never breach and are skipped.
    """
    for time, value in trajectory:
        if value is not None and value > bound:
            return time
    return None
