"""Engine-agnostic validity oracle for static packing snapshots.

A packing is valid when, for EVERY set F of at most f bins, killing F
leaves each affected item one standby (in a surviving bin) that can be
promoted without pushing any surviving bin past capacity 1.  Only overload
constrains the assignment: several promotions may land in one bin if they
fit.  The check enumerates all failure sets and searches promotion
assignments exhaustively with backtracking, so it is meant for small
snapshots (fixtures, oracle outputs, short traces).

The checker works on a flattened per-item view (super-replicas are expanded
into their members), accepting both full engine snapshots and minimal
hand-written documents of the form::

    {"config": {"f": 2, "eta": "2/1"},
     "bins": [{"id": 1, "contents": [{"item": 0, "role": "primary",
                                      "size": "2/5"}, ...]}, ...]}
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .model import Config, parse_ratio


@dataclass
class PackedReplica:
    item_id: int
    role: str  # "primary" | "standby"
    size: Fraction  # nominal: x for primaries, x/eta for standbys
    bin_id: int


@dataclass
class Packing:
    """Flattened view of a static packing: replicas by bin."""

    config: Config
    bins: dict[int, list[PackedReplica]] = field(default_factory=dict)

    def add(self, bin_id: int, item_id: int, role: str, size: Fraction) -> None:
        self.bins.setdefault(bin_id, []).append(
            PackedReplica(item_id, role, size, bin_id))

    def replicas(self):
        for rs in self.bins.values():
            yield from rs

    def bin_load(self, bin_id: int) -> Fraction:
        return sum((r.size for r in self.bins[bin_id]), Fraction(0))


@dataclass
class Verdict:
    valid: bool
    witness: Optional[list[int]] = None  # first infeasible failure set
    reason: str = ""

    def __bool__(self) -> bool:
        return self.valid


def packing_from_document(doc: dict, config: Optional[Config] = None) -> Packing:
    """Build a flattened packing from a snapshot or fixture document."""
    if config is None:
        if "config" not in doc:
            raise ValueError("packing document carries no config and none was given")
        config = Config.from_dict(doc["config"])
    elif "config" in doc:
        embedded = Config.from_dict(doc["config"])
        if embedded != config:
            raise ValueError(
                f"packing document config {embedded} conflicts with requested {config}")
    packing = Packing(config=config)
    for bin_entry in doc["bins"]:
        bid = int(bin_entry["id"])
        if bin_entry.get("failed"):
            raise ValueError(
                f"bin {bid} is failed; the static check applies to quiescent "
                f"snapshots only (use runtime invariants for live states)")
        packing.bins.setdefault(bid, [])
        for content in bin_entry.get("contents", []):
            if content.get("promoted"):
                raise ValueError(
                    f"bin {bid} holds a promoted replica; static check "
                    f"expects a quiescent snapshot")
            role = content["role"]
            if "sr" in content:
                members = content["members"]
                total = parse_ratio(content["size"])
                # Expand the super-replica into its members.  Member sizes
                # live in the item table of full snapshots.
                sizes = _member_sizes(doc, members, role, total, config)
                for item_id, size in zip(members, sizes):
                    packing.add(bid, int(item_id), role, size)
            else:
                packing.add(bid, int(content["item"]), role,
                            parse_ratio(content["size"]))
    return packing


def _member_sizes(doc: dict, members: list[int], role: str, total: Fraction,
                  config: Config) -> list[Fraction]:
    table = {it["id"]: parse_ratio(it["size"]) for it in doc.get("items", [])}
    sizes = []
    for m in members:
        if m not in table:
            raise ValueError(f"SR member {m} missing from the item table")
        x = table[m]
        sizes.append(x if role == "primary" else x / config.eta)
    if sum(sizes, Fraction(0)) != total:
        raise ValueError(f"SR member sizes do not add up to {total}")
    return sizes


def packing_from_state(state) -> Packing:
    """Flatten a live PackingState (no failed bins) for the static check."""
    return packing_from_document(state.to_snapshot())


def check_static_validity(packing: Packing,
                          max_failures: int | None = None) -> Verdict:
    """Definition check: structure first, then all failure sets up to size
    ``max_failures`` (defaults to f; smaller values check a weaker adversary,
    so validity is monotone decreasing in this bound)."""
    structural = _structural_problems(packing)
    if structural:
        return Verdict(valid=False, witness=[], reason=structural[0])

    cfg = packing.config
    budget = cfg.f if max_failures is None else max_failures
    bin_ids = sorted(packing.bins)
    loads = {b: packing.bin_load(b) for b in bin_ids}
    primary_bin = {}
    standby_hosts: dict[int, list[int]] = {}
    increment: dict[int, Fraction] = {}
    for r in packing.replicas():
        if r.role == "primary":
            primary_bin[r.item_id] = r.bin_id
            increment[r.item_id] = r.size - r.size / cfg.eta
        else:
            standby_hosts.setdefault(r.item_id, []).append(r.bin_id)

    # Lexicographically ordered failure sets of size 1..budget; the first
    # infeasible one is the witness (stable fixture contract).
    for failure_set in _lex_subsets(bin_ids, budget):
        fset = set(failure_set)
        affected = sorted(it for it, pb in primary_bin.items() if pb in fset)
        if not affected:
            continue
        if not _promotion_feasible(affected, fset, loads, standby_hosts,
                                   increment):
            return Verdict(valid=False, witness=list(failure_set),
                           reason=f"no promotion assignment survives the "
                                  f"failure of bins {list(failure_set)}")
    return Verdict(valid=True)


def _structural_problems(packing: Packing) -> list[str]:
    cfg = packing.config
    problems = []
    per_item: dict[int, dict] = {}
    for r in packing.replicas():
        rec = per_item.setdefault(r.item_id, {"primary": [], "standby": [],
                                              "bins": []})
        rec[r.role].append(r)
        rec["bins"].append(r.bin_id)
    for item_id, rec in sorted(per_item.items()):
        if len(rec["primary"]) != 1:
            problems.append(f"item {item_id} has {len(rec['primary'])} "
                            f"primary replicas")
            continue
        if len(rec["standby"]) != cfg.f:
            problems.append(f"item {item_id} has {len(rec['standby'])} "
                            f"standby replicas, expected {cfg.f}")
        x = rec["primary"][0].size
        for s in rec["standby"]:
            if s.size * cfg.eta != x:
                problems.append(f"item {item_id} standby size {s.size} is not "
                                f"primary/eta")
        if len(set(rec["bins"])) != len(rec["bins"]):
            problems.append(f"item {item_id} replicas share a bin")
    for b in sorted(packing.bins):
        load = packing.bin_load(b)
        if load > 1:
            problems.append(f"bin {b} overloaded at {load}")
    return problems


def _lex_subsets(ids: list[int], max_size: int):
    """Subsets of size 1..max_size in lexicographic order of their sorted
    tuples: (1,), (1,2), (1,3), ..., (2,), (2,3), ..."""

    def rec(prefix: tuple[int, ...], start: int):
        for idx in range(start, len(ids)):
            cur = prefix + (ids[idx],)
            yield cur
            if len(cur) < max_size:
                yield from rec(cur, idx + 1)

    yield from rec((), 0)


def _promotion_feasible(affected: list[int], fset: set[int],
                        loads: dict[int, Fraction],
                        standby_hosts: dict[int, list[int]],
                        increment: dict[int, Fraction]) -> bool:
    candidates = {}
    for it in affected:
        cands = [b for b in standby_hosts.get(it, []) if b not in fset]
        if not cands:
            return False
        candidates[it] = sorted(cands)
    # Hardest items first shrinks the search tree.
    order = sorted(affected, key=lambda it: (-increment[it], it))
    extra: dict[int, Fraction] = {}

    def assign(idx: int) -> bool:
        if idx == len(order):
            return True
        it = order[idx]
        inc = increment[it]
        for b in candidates[it]:
            if loads[b] + extra.get(b, Fraction(0)) + inc <= 1:
                extra[b] = extra.get(b, Fraction(0)) + inc
                if assign(idx + 1):
                    return True
                extra[b] -= inc
        return False

    return assign(0)
