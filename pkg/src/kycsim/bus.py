"""In-process event bus with a discrete-event virtual clock.

Virtual mode is strictly single-threaded and deterministic: time is an
integer microsecond counter advanced only by the scheduler, so repeated
latency arithmetic is exact (ten 0.1 s hops land on 1.0 s, not
0.9999999...). Realtime mode delivers synchronously on the publishing
thread with per-key serialization.

Delivery contract: at-least-once per subscriber, FIFO per (topic, key),
handler failures redelivered up to ``max_redeliveries`` then routed to
``dlq.<topic>``.
"""

from __future__ import annotations

import heapq
import threading
from dataclasses import dataclass, field
from typing import Any, Callable

US = 1_000_000  # microseconds per second

DEFAULT_MAX_REDELIVERIES = 5
STEP_BUDGET = 10_000_000


class UnknownTopic(KeyError):
    """publish() was called for a topic nobody registered."""


class PastDeadline(ValueError):
    """schedule_at() was asked to run an action before the current time."""


class StepBudgetExceeded(RuntimeError):
    """run_until_idle() processed more steps than the livelock guard allows."""


def to_us(seconds: float) -> int:
    return round(seconds * US)


def to_s(us: int) -> float:
    return us / US


@dataclass(frozen=True)
class Event:
    topic: str
    key: str
    payload: Any
    publish_time: float
    delivery_attempt: int = 1
    event_id: int = 0

    def with_attempt(self, attempt: int) -> "Event":
        return Event(self.topic, self.key, self.payload, self.publish_time, attempt, self.event_id)


@dataclass
class BusStats:
    published: dict[str, int] = field(default_factory=dict)
    delivered: dict[str, int] = field(default_factory=dict)
    dead_lettered: dict[str, int] = field(default_factory=dict)
    dropped_unsubscribed: dict[str, int] = field(default_factory=dict)

    def _bump(self, counter: dict[str, int], topic: str) -> None:
        counter[topic] = counter.get(topic, 0) + 1

    def snapshot(self) -> dict:
        return {
            "published": dict(sorted(self.published.items())),
            "delivered": dict(sorted(self.delivered.items())),
            "dead_lettered": dict(sorted(self.dead_lettered.items())),
            "dropped_unsubscribed": dict(sorted(self.dropped_unsubscribed.items())),
        }


class VirtualClock:
    """Monotone virtual time in integer microseconds."""

    def __init__(self) -> None:
        self._now_us = 0

    @property
    def now_us(self) -> int:
        return self._now_us

    def now(self) -> float:
        return to_s(self._now_us)

    def advance_to(self, t_us: int) -> None:
        if t_us < self._now_us:
            raise PastDeadline(f"cannot move clock backwards to {t_us} from {self._now_us}")
        self._now_us = t_us


class _Lane:
    """Per-(subscription, key) FIFO delivery lane.

    The head event is retried until delivered or dead-lettered before the
    next event is attempted, preserving per-key publish order for
    successful deliveries.
    """

    __slots__ = ("queue", "attempt", "pumping")

    def __init__(self) -> None:
        self.queue: list[Event] = []
        self.attempt = 0
        self.pumping = False


class _Subscription:
    __slots__ = ("sub_id", "topic", "handler", "lanes")

    def __init__(self, sub_id: int, topic: str, handler: Callable[[Event], None]) -> None:
        self.sub_id = sub_id
        self.topic = topic
        self.handler = handler
        self.lanes: dict[str, _Lane] = {}

    def lane(self, key: str) -> _Lane:
        lane = self.lanes.get(key)
        if lane is None:
            lane = _Lane()
            self.lanes[key] = lane
        return lane


class EventBus:
    """Topic-based pub/sub over a shared scheduler (virtual or realtime)."""

    def __init__(
        self,
        mode: str = "virtual",
        max_redeliveries: int = DEFAULT_MAX_REDELIVERIES,
    ) -> None:
        if mode not in ("virtual", "realtime"):
            raise ValueError(f"unknown clock mode {mode!r}")
        self.mode = mode
        self.max_redeliveries = max_redeliveries
        self.clock = VirtualClock()
        self.stats = BusStats()
        self._topics: set[str] = set()
        self._subs: dict[str, list[_Subscription]] = {}
        self._retained: dict[str, list[Event]] = {}
        self._heap: list[tuple[int, int, Callable[[], None]]] = []
        self._seq = 0
        self._next_event_id = 0
        self._next_sub_id = 0
        self._lock = threading.RLock()
        self._key_locks: dict[tuple[int, str], threading.RLock] = {}

    # -- topology --------------------------------------------------------

    def register_topic(self, topic: str) -> None:
        self._topics.add(topic)

    def subscribe(self, topic: str, handler: Callable[[Event], None]) -> int:
        """Attach a handler; retained events for the topic are delivered."""
        with self._lock:
            self.register_topic(topic)
            self._next_sub_id += 1
            sub = _Subscription(self._next_sub_id, topic, handler)
            self._subs.setdefault(topic, []).append(sub)
            backlog = self._retained.pop(topic, [])
        for event in backlog:
            self._enqueue_delivery(sub, event)
        return sub.sub_id

    # -- publish / schedule ----------------------------------------------

    def publish(self, topic: str, key: str, payload: Any) -> int:
        if topic not in self._topics:
            raise UnknownTopic(topic)
        with self._lock:
            self._next_event_id += 1
            event = Event(
                topic=topic,
                key=key,
                payload=payload,
                publish_time=self.clock.now(),
                delivery_attempt=1,
                event_id=self._next_event_id,
            )
            subs = list(self._subs.get(topic, ()))
            self.stats._bump(self.stats.published, topic)
            if not subs:
                self._retained.setdefault(topic, []).append(event)
                return event.event_id
        for sub in subs:
            self._enqueue_delivery(sub, event)
        return event.event_id

    def schedule_at(self, t: float, action: Callable[[], None]) -> int:
        """Run ``action`` at virtual time ``t`` (ties run in insertion order)."""
        if self.mode != "virtual":
            raise RuntimeError("schedule_at requires virtual mode")
        t_us = to_us(t)
        if t_us < self.clock.now_us:
            raise PastDeadline(f"t={t} is before now={self.clock.now()}")
        return self._push(t_us, action)

    def _push(self, t_us: int, action: Callable[[], None]) -> int:
        with self._lock:
            self._seq += 1
            heapq.heappush(self._heap, (t_us, self._seq, action))
            return self._seq

    # -- delivery machinery ------------------------------------------------

    def _enqueue_delivery(self, sub: _Subscription, event: Event) -> None:
        lane = sub.lane(event.key)
        lane.queue.append(event)
        if lane.pumping:
            return
        lane.pumping = True
        if self.mode == "virtual":
            self._push(self.clock.now_us, lambda: self._pump_lane(sub, event.key))
        else:
            self._pump_lane_realtime(sub, event.key)

    def _attempt_head(self, sub: _Subscription, lane: _Lane) -> bool:
        """Try the head event once; return True when the lane advanced."""
        event = lane.queue[0]
        lane.attempt += 1
        try:
            sub.handler(event.with_attempt(lane.attempt))
        except Exception:
            if lane.attempt >= self.max_redeliveries:
                self._dead_letter(event)
                lane.queue.pop(0)
                lane.attempt = 0
                return True
            return False
        self.stats._bump(self.stats.delivered, event.topic)
        lane.queue.pop(0)
        lane.attempt = 0
        return True

    def _pump_lane(self, sub: _Subscription, key: str) -> None:
        lane = sub.lane(key)
        if not lane.queue:
            lane.pumping = False
            return
        self._attempt_head(sub, lane)
        if lane.queue:
            self._push(self.clock.now_us, lambda: self._pump_lane(sub, key))
        else:
            lane.pumping = False

    def _pump_lane_realtime(self, sub: _Subscription, key: str) -> None:
        lock_key = (sub.sub_id, key)
        with self._lock:
            lock = self._key_locks.setdefault(lock_key, threading.RLock())
        with lock:
            lane = sub.lane(key)
            while lane.queue:
                self._attempt_head(sub, lane)
            lane.pumping = False

    def _dead_letter(self, event: Event) -> None:
        self.stats._bump(self.stats.dead_lettered, event.topic)
        dlq = f"dlq.{event.topic}"
        self.register_topic(dlq)
        # payload forwarded untouched: dead-lettered bytes equal the original
        self.publish(dlq, event.key, event.payload)

    # -- scheduler ----------------------------------------------------------

    def run_until_idle(self) -> float:
        """Drain events/timers in nondecreasing time order; return final time."""
        if self.mode != "virtual":
            raise RuntimeError("run_until_idle requires virtual mode")
        steps = 0
        while self._heap:
            steps += 1
            if steps > STEP_BUDGET:
                raise StepBudgetExceeded(f"more than {STEP_BUDGET} scheduler steps")
            t_us, _, action = heapq.heappop(self._heap)
            self.clock.advance_to(t_us)
            action()
        self._drop_retained()
        return self.clock.now()

    def _drop_retained(self) -> None:
        for topic, events in sorted(self._retained.items()):
            for _ in events:
                self.stats._bump(self.stats.dropped_unsubscribed, topic)
        self._retained.clear()

