"""Domain model for fault-tolerant bin packing with primary/standby replicas.

Every item of size x carries one primary replica (load x) and f standby
replicas (load x/eta each), placed in f+1 distinct unit-capacity bins.  Up to
f bins may be failed concurrently; a failed primary is covered by promoting
one standby (its load grows back to x).  All arithmetic is exact rational:
class boundaries and capacity checks sit on rational endpoints, and floats
would misclassify them.

The promotion bookkeeping lives in ``PackingState.mapping_h``: an injective
map from a displaced primary unit (a regular item or a small-item
super-replica cohort) to the standby bin currently hosting its promotion.
Bins in the range of the map are "marked"; promoted flags are derived from
the map rather than stored, so failure/recovery round-trips cannot leave
stale flags behind.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

ONE = Fraction(1)

# h-map keys: ("item", item_id) for regular items, ("sr", cohort_id) for
# small-item super-replica cohorts.
UnitKey = tuple[str, int]


class TraceError(Exception):
    """An event is inconsistent with the current state (caller error)."""


class InvariantViolationError(Exception):
    """Internal engine invariant broke; always a bug, never legal input."""


def parse_ratio(text: str | int | Fraction) -> Fraction:
    """Parse an exact rational from 'num/den', an integer, or a decimal string."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed rational {text!r}") from exc


def format_ratio(value: Fraction) -> str:
    """Serialize a rational as a reduced 'num/den' string."""
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Config:
    """Problem parameters: failure budget f and standby shrink factor eta."""

    f: int
    eta: Fraction

    def __post_init__(self) -> None:
        if not isinstance(self.f, int) or self.f < 1:
            raise ValueError(f"f must be an integer >= 1, got {self.f!r}")
        eta = parse_ratio(self.eta)
        object.__setattr__(self, "eta", eta)
        if eta <= 1:
            raise ValueError(f"eta must be > 1, got {eta}")

    @property
    def standby_class_count(self) -> int:
        """Number of standby classes: floor(6*eta) + 1."""
        return int(6 * self.eta) + 1

    @property
    def small_class(self) -> tuple[int, int]:
        """The (i, j) class pair of small items."""
        return (7, self.standby_class_count)

    def standby_size(self, size: Fraction) -> Fraction:
        return size / self.eta

    def to_dict(self) -> dict:
        return {"f": self.f, "eta": format_ratio(self.eta)}

    @staticmethod
    def from_dict(obj: dict) -> "Config":
        return Config(f=int(obj["f"]), eta=parse_ratio(obj["eta"]))


@dataclass
class Item:
    """One arrived item plus its placement record."""

    id: int
    size: Fraction
    i: int
    j: int
    standby_size: Fraction
    group_id: int = -1
    cohort_id: Optional[int] = None  # small items only
    primary_bin: int = -1
    standby_bins: list[int] = field(default_factory=list)  # rank order 1..f
    t: Optional[int] = None  # per-group placement index (regular items)

    @property
    def small(self) -> bool:
        return self.i == 7


@dataclass
class Replica:
    """A placement entry inside a regular bin."""

    item_id: int
    role: str  # "primary" | "standby"
    rank: int  # 0 for primary, 1..f for standby sets
    spot: int


# Bin kinds.  A bin's kind never changes after creation.
REGULAR_PRIMARY = "regular_primary"
REGULAR_STANDBY = "regular_standby"
SMALL_PRIMARY = "small_primary"
SMALL_STANDBY = "small_standby"


@dataclass
class Bin:
    """One unit-capacity bin.

    Regular bins carry ``replicas``; small bins carry super-replica cohort
    ids in ``cohorts`` (a small primary bin hosts the primary side of each
    listed cohort, a small standby bin the mirrored standby side).
    ``group_id`` is the owning group for regular bins and small standby
    bins; small primary bins belong to a shared pool and have none.
    """

    id: int
    kind: str
    class_pair: Optional[tuple[int, int]] = None  # regular kinds only
    rank: int = 0  # standby set / mirror rank (1..f); 0 for primary kinds
    group_id: Optional[int] = None
    failed: bool = False
    replicas: list[Replica] = field(default_factory=list)
    cohorts: list[int] = field(default_factory=list)

    @property
    def is_standby_kind(self) -> bool:
        return self.kind in (REGULAR_STANDBY, SMALL_STANDBY)


@dataclass
class Group:
    """A bounded set of bins dedicated to one (i, j) class.

    Regular groups own j primary bins and f sets of i standby bins, and
    complete after i*j placements.  Small groups own f mirroring standby
    bins plus one committed primary bin at a time (derived from the open
    cohort), and complete when the mirrors can no longer host a fresh
    super-replica.
    """

    id: int
    i: int
    j: int
    primary_bin_ids: list[int] = field(default_factory=list)
    standby_sets: list[list[int]] = field(default_factory=list)  # f x i
    mirror_bin_ids: list[int] = field(default_factory=list)  # small groups
    items_placed: int = 0
    complete: bool = False
    cohort_ids: list[int] = field(default_factory=list)  # small groups

    @property
    def small(self) -> bool:
        return self.i == 7

    @property
    def class_pair(self) -> tuple[int, int]:
        return (self.i, self.j)

    def all_bin_ids(self, state: "PackingState") -> list[int]:
        """Every bin whose failure makes this group unavailable."""
        if self.small:
            ids = list(self.mirror_bin_ids)
            committed = self.committed_bin_id(state)
            if committed is not None:
                ids.append(committed)
            return ids
        return list(self.primary_bin_ids) + [b for s in self.standby_sets for b in s]

    def open_cohort_id(self, state: "PackingState") -> Optional[int]:
        if not self.cohort_ids:
            return None
        last = state.cohorts[self.cohort_ids[-1]]
        return last.id if not last.closed else None

    def committed_bin_id(self, state: "PackingState") -> Optional[int]:
        cid = self.open_cohort_id(state)
        return state.cohorts[cid].primary_bin_id if cid is not None else None


@dataclass
class SRCohort:
    """A super-replica cohort: one primary SR plus f mirrored standby SRs.

    All f+1 super-replicas share the same ordered member list; the standby
    side of each member weighs 1/eta of its primary side, so the primary
    content sum determines both loads exactly.
    """

    id: int
    group_id: int
    member_item_ids: list[int] = field(default_factory=list)
    primary_size: Fraction = Fraction(0)
    closed: bool = False
    primary_bin_id: int = -1

    def standby_size(self, config: Config) -> Fraction:
        return self.primary_size / config.eta


class PackingState:
    """Single-owner world state: bins, groups, items, and the promotion map.

    One event mutates the state at a time; reads on a quiescent state are
    safe from any thread.  Independent states may run in parallel workers.
    """

    def __init__(self, config: Config):
        self.config = config
        self.items: list[Item] = []
        self.bins: list[Bin] = []
        self.groups: list[Group] = []
        self.cohorts: list[SRCohort] = []
        self.mapping_h: dict[UnitKey, int] = {}
        self.failed_bins: set[int] = set()
        # Last group designated to receive placements, per class.  Kept
        # across fail/recover (validity is re-checked at the next arrival),
        # so a transient failure round-trips to the exact prior state.
        self.active_group: dict[tuple[int, int], int] = {}

    # -- construction helpers -------------------------------------------------

    def new_bin(self, kind: str, class_pair=None, rank: int = 0,
                group_id: Optional[int] = None) -> Bin:
        b = Bin(id=len(self.bins), kind=kind, class_pair=class_pair,
                rank=rank, group_id=group_id)
        self.bins.append(b)
        return b

    def new_group(self, i: int, j: int) -> Group:
        g = Group(id=len(self.groups), i=i, j=j)
        self.groups.append(g)
        return g

    def new_cohort(self, group_id: int, primary_bin_id: int) -> SRCohort:
        c = SRCohort(id=len(self.cohorts), group_id=group_id,
                     primary_bin_id=primary_bin_id)
        self.cohorts.append(c)
        return c

    # -- derived facts ---------------------------------------------------------

    @property
    def marked_bins(self) -> set[int]:
        return set(self.mapping_h.values())

    def is_promoted(self, unit: UnitKey) -> bool:
        return unit in self.mapping_h

    def group_available(self, group: Group) -> bool:
        return all(not self.bins[b].failed for b in group.all_bin_ids(self))

    def effective_load(self, b: Bin) -> Fraction:
        """Current load of a bin: promoted standbys count at full size."""
        eta = self.config.eta
        total = Fraction(0)
        if b.kind in (REGULAR_PRIMARY, REGULAR_STANDBY):
            for r in b.replicas:
                item = self.items[r.item_id]
                if r.role == "primary":
                    total += item.size
                elif self.mapping_h.get(("item", r.item_id)) == b.id:
                    total += item.size  # promoted standby serves at x
                else:
                    total += item.standby_size
        elif b.kind == SMALL_PRIMARY:
            for cid in b.cohorts:
                total += self.cohorts[cid].primary_size
        else:  # SMALL_STANDBY
            for cid in b.cohorts:
                c = self.cohorts[cid]
                if self.mapping_h.get(("sr", cid)) == b.id:
                    total += c.primary_size
                else:
                    total += c.primary_size / eta
        return total

    def unit_standby_bins(self, unit: UnitKey) -> list[int]:
        """The f standby bins hosting replicas of a promotable unit."""
        kind, uid = unit
        if kind == "item":
            return self.items[uid].standby_bins
        return self.groups[self.cohorts[uid].group_id].mirror_bin_ids

    def unit_primary_bin(self, unit: UnitKey) -> int:
        kind, uid = unit
        if kind == "item":
            return self.items[uid].primary_bin
        return self.cohorts[uid].primary_bin_id

    # -- serialization ---------------------------------------------------------

    def group_state_name(self, group: Group) -> str:
        if group.complete:
            return "complete"
        if not self.group_available(group):
            return "incomplete_unavailable"
        if self.active_group.get(group.class_pair) == group.id:
            return "active"
        return "incomplete_available"

    def _bin_contents(self, b: Bin) -> list[dict]:
        out = []
        if b.kind in (REGULAR_PRIMARY, REGULAR_STANDBY):
            for r in sorted(b.replicas, key=lambda r: (r.spot, r.item_id)):
                item = self.items[r.item_id]
                size = item.size if r.role == "primary" else item.standby_size
                out.append({
                    "item": r.item_id,
                    "role": r.role,
                    "rank": r.rank,
                    "size": format_ratio(size),
                    "spot": r.spot,
                    "promoted": (r.role == "standby"
                                 and self.mapping_h.get(("item", r.item_id)) == b.id),
                })
        else:
            role = "primary" if b.kind == SMALL_PRIMARY else "standby"
            for cid in b.cohorts:
                c = self.cohorts[cid]
                size = c.primary_size if role == "primary" else c.standby_size(self.config)
                out.append({
                    "sr": cid,
                    "role": role,
                    "rank": b.rank,
                    "size": format_ratio(size),
                    "members": list(c.member_item_ids),
                    "open": not c.closed,
                    "promoted": (role == "standby"
                                 and self.mapping_h.get(("sr", cid)) == b.id),
                })
        return out

    def to_snapshot(self) -> dict:
        """Full JSON-ready snapshot: the contract between engine, checker,
        auditor, and CLI.  Deterministic field ordering throughout."""
        marked = self.marked_bins
        bins = []
        for b in self.bins:
            entry = {
                "id": b.id,
                "kind": b.kind,
                "failed": b.failed,
                "marked": b.id in marked,
                "contents": self._bin_contents(b),
            }
            if b.class_pair is not None:
                entry["class"] = list(b.class_pair)
            if b.kind in (REGULAR_STANDBY, SMALL_STANDBY):
                entry["rank"] = b.rank
            if b.group_id is not None:
                entry["group"] = b.group_id
            bins.append(entry)
        groups = []
        for g in self.groups:
            entry = {
                "id": g.id,
                "class": list(g.class_pair),
                "state": self.group_state_name(g),
                "items_placed": g.items_placed,
            }
            if g.small:
                entry["standby_bins"] = list(g.mirror_bin_ids)
                entry["committed_bin"] = g.committed_bin_id(self)
                entry["srs"] = list(g.cohort_ids)
            else:
                entry["primary_bins"] = list(g.primary_bin_ids)
                entry["standby_bins"] = [list(s) for s in g.standby_sets]
            groups.append(entry)
        srs = [{
            "id": c.id,
            "group": c.group_id,
            "primary_bin": c.primary_bin_id,
            "members": list(c.member_item_ids),
            "size": format_ratio(c.primary_size),
            "open": not c.closed,
        } for c in self.cohorts]
        items = [{
            "id": it.id,
            "size": format_ratio(it.size),
            "class": [it.i, it.j],
            "primary_bin": it.primary_bin,
            "standby_bins": list(it.standby_bins),
        } for it in self.items]
        mapping = {f"{kind}:{uid}": bin_id
                   for (kind, uid), bin_id in sorted(self.mapping_h.items())}
        active = {f"{i},{j}": gid
                  for (i, j), gid in sorted(self.active_group.items())}
        return {
            "config": self.config.to_dict(),
            "bins": bins,
            "groups": groups,
            "srs": srs,
            "items": items,
            "mapping_h": mapping,
            "active_groups": active,
        }


def distinct(ids: Iterable[int]) -> bool:
    ids = list(ids)
    return len(ids) == len(set(ids))
