"""Event traces: JSONL format, validation, generators, and the run loop.

Trace lines are one JSON object per event::

    {"seq": 1, "ev": "arrive", "size": "3/5"}
    {"seq": 2, "ev": "fail", "bin": 4}
    {"seq": 3, "ev": "recover", "bin": 4}

Sizes are reduced-fraction strings; bin ids refer to engine creation-order
ids, so generators that target live bins co-simulate with an engine.
Replays are deterministic: identical (trace, config) pairs produce
byte-identical snapshots.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from . import adjust, engine
from .classify import boundary_sizes
from .invariants import check_runtime_invariants
from .model import Config, PackingState, TraceError, format_ratio, parse_ratio


@dataclass(frozen=True)
class Event:
    seq: int
    kind: str  # "arrive" | "fail" | "recover"
    size: Optional[Fraction] = None
    bin: Optional[int] = None

    def to_dict(self) -> dict:
        if self.kind == "arrive":
            return {"seq": self.seq, "ev": "arrive", "size": format_ratio(self.size)}
        return {"seq": self.seq, "ev": self.kind, "bin": self.bin}


def write_trace(events: Iterable[Event]) -> str:
    return "".join(json.dumps(ev.to_dict()) + "\n" for ev in events)


def read_trace(text: str) -> list[Event]:
    events = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceError(f"line {lineno}: not valid JSON: {exc}") from exc
        kind = obj.get("ev")
        seq = obj.get("seq", lineno)
        if kind == "arrive":
            events.append(Event(seq=seq, kind=kind, size=parse_ratio(obj["size"])))
        elif kind in ("fail", "recover"):
            events.append(Event(seq=seq, kind=kind, bin=int(obj["bin"])))
        else:
            raise TraceError(f"line {lineno}: unknown event kind {kind!r}")
    return events


def validate_trace(events: list[Event], config: Config) -> list[str]:
    """Static well-formedness: monotone seq, fail/recover toggling per bin
    id, and never more than f concurrently failed.  Bin existence is only
    checkable against a live engine and is enforced during the run."""
    problems = []
    failed: set[int] = set()
    last_seq = None
    for ev in events:
        if last_seq is not None and ev.seq <= last_seq:
            problems.append(f"seq {ev.seq} does not increase past {last_seq}")
        last_seq = ev.seq
        if ev.kind == "arrive":
            if ev.size is None or not 0 < ev.size <= 1:
                problems.append(f"seq {ev.seq}: arrival size {ev.size} outside (0, 1]")
        elif ev.kind == "fail":
            if ev.bin in failed:
                problems.append(f"seq {ev.seq}: bin {ev.bin} is already failed")
            elif len(failed) >= config.f:
                problems.append(f"seq {ev.seq}: more than f={config.f} "
                                f"concurrent failures")
            failed.add(ev.bin)
        elif ev.kind == "recover":
            if ev.bin not in failed:
                problems.append(f"seq {ev.seq}: bin {ev.bin} is not failed")
            failed.discard(ev.bin)
    return problems


@dataclass
class SimResult:
    state: PackingState
    bin_count: int
    event_count: int
    arrival_count: int
    violations: list[str]
    log: list[dict]


def run_trace(events: list[Event], config: Config,
              check_every_event: bool = False,
              collect_log: bool = True,
              stop_on_violation: bool = True) -> SimResult:
    """Apply events in order; optionally re-check every invariant after
    each one.  Trace inconsistencies raise TraceError with the offending
    seq; invariant violations are collected (and by default abort)."""
    state = PackingState(config)
    log: list[dict] = []
    violations: list[str] = []
    arrivals = 0
    for ev in events:
        try:
            if ev.kind == "arrive":
                records = engine.on_arrive(state, ev.size)
                arrivals += 1
            elif ev.kind == "fail":
                records = adjust.on_fail(state, ev.bin)
            elif ev.kind == "recover":
                records = adjust.on_recover(state, ev.bin)
            else:
                raise TraceError(f"unknown event kind {ev.kind!r}")
        except TraceError as exc:
            raise TraceError(f"seq {ev.seq}: {exc}") from exc
        if collect_log:
            for rec in records:
                log.append({"seq": ev.seq, **rec})
        if check_every_event:
            found = check_runtime_invariants(state)
            if found:
                violations.extend(f"seq {ev.seq}: {v}" for v in found)
                if stop_on_violation:
                    break
    return SimResult(state=state, bin_count=len(state.bins),
                     event_count=len(events), arrival_count=arrivals,
                     violations=violations, log=log)


# -- generators ---------------------------------------------------------------

def generate_trace(mode: str, n: int, seed: int, config: Config,
                   grid: int = 48, fail_rate: float = 0.25,
                   recover_rate: float = 0.25,
                   recover_all_at_end: bool = False) -> list[Event]:
    if mode == "random":
        return _generate_random(n, seed, config, grid, fail_rate,
                                recover_rate, recover_all_at_end)
    if mode == "adversarial-active-kill":
        return _generate_active_kill(n, seed, config)
    if mode == "class-boundary":
        return _generate_class_boundary(n, seed, config)
    raise ValueError(f"unknown trace mode {mode!r}")


def _generate_random(n: int, seed: int, config: Config, grid: int,
                     fail_rate: float, recover_rate: float,
                     recover_all_at_end: bool) -> list[Event]:
    """Uniform grid sizes with fail/recover interleaved under the <= f
    budget.  Co-simulates to target only live bins."""
    rng = random.Random(seed)
    state = PackingState(config)
    events: list[Event] = []
    seq = 0
    arrivals_left = n

    def emit(kind, **kw):
        nonlocal seq
        seq += 1
        ev = Event(seq=seq, kind=kind, **kw)
        events.append(ev)
        return ev

    while arrivals_left > 0 or (recover_all_at_end and state.failed_bins):
        roll = rng.random()
        can_fail = (len(state.failed_bins) < config.f
                    and len(state.failed_bins) < len(state.bins))
        can_recover = bool(state.failed_bins)
        if arrivals_left > 0 and (roll < 1 - fail_rate - recover_rate
                                  or not (can_fail or can_recover)):
            size = Fraction(rng.randint(1, grid), grid)
            emit("arrive", size=size)
            engine.on_arrive(state, size)
            arrivals_left -= 1
        elif can_fail and (roll < 1 - recover_rate or not can_recover):
            alive = [b.id for b in state.bins if not b.failed]
            target = rng.choice(alive)
            emit("fail", bin=target)
            adjust.on_fail(state, target)
        elif can_recover:
            target = rng.choice(sorted(state.failed_bins))
            emit("recover", bin=target)
            adjust.on_recover(state, target)
        elif arrivals_left > 0:
            size = Fraction(rng.randint(1, grid), grid)
            emit("arrive", size=size)
            engine.on_arrive(state, size)
            arrivals_left -= 1
        else:
            break
    return events


def _generate_active_kill(n: int, seed: int, config: Config) -> list[Event]:
    """Stress the incomplete-group bound: right after a placement, fail a
    live bin of the just-used group while the failure budget lasts, forcing
    a fresh group per arrival until f+1 groups sit incomplete."""
    rng = random.Random(seed)
    state = PackingState(config)
    events: list[Event] = []
    seq = 0
    size = Fraction(1, 2)  # one fixed regular class keeps the pressure on

    def emit(kind, **kw):
        nonlocal seq
        seq += 1
        events.append(Event(seq=seq, kind=kind, **kw))

    for _ in range(n):
        emit("arrive", size=size)
        engine.on_arrive(state, size)
        item = state.items[-1]
        group = state.groups[item.group_id]
        if len(state.failed_bins) < config.f:
            targets = [b for b in group.all_bin_ids(state)
                       if not state.bins[b].failed]
            if targets:
                target = rng.choice(sorted(targets))
                emit("fail", bin=target)
                adjust.on_fail(state, target)
    return events


def _generate_class_boundary(n: int, seed: int, config: Config) -> list[Event]:
    """Arrivals drawn from the class-interval endpoints."""
    rng = random.Random(seed)
    sizes = boundary_sizes(config)
    events = []
    for seq in range(1, n + 1):
        events.append(Event(seq=seq, kind="arrive", size=rng.choice(sizes)))
    return events
