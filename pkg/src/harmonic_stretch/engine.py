"""Placement engine: group lifecycle, regular spot placement, small-item SRs.

Regular (i, j)-items go into groups of j primary bins (i spots of size 1/i
each) and f sets of i standby bins (j spots of size 1/(j+eta-1) each, leaving
reserved space (eta-1)/(j+eta-1)).  The t'th item of a group lands its
primary in spot z = t // j of primary bin w = t % j, and its rank-k standby
in spot w of the z'th bin of standby set k.  A group completes after i*j
placements.

Small items are batched into super-replica cohorts: one open primary SR
(capacity 2/(7-1/eta)) on the bin committed to the active group, plus f
mirrored standby SRs (capacity 2/(7*eta-1)) on the group's standby bins.
When the next item does not fit, the cohort closes; a new cohort opens in
the same group if every mirror retains empty space >= 2*eta/(7*eta-1),
otherwise the group completes and placement moves to another group.  The
committed primary bin is released on every cohort close and a fresh one is
chosen: the lowest-id free, non-failed small primary bin with empty space
>= 2/(7-1/eta) that shares no SR with the target group's mirrors.

All arbitrary choices resolve lowest-id-first so replays are deterministic.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .classify import ClassConstants, classify, primary_spot_size, standby_spot_size
from .model import (
    REGULAR_PRIMARY,
    REGULAR_STANDBY,
    SMALL_PRIMARY,
    SMALL_STANDBY,
    Bin,
    Config,
    Group,
    InvariantViolationError,
    Item,
    PackingState,
    Replica,
    format_ratio,
)


def on_arrive(state: PackingState, size: Fraction) -> list[dict]:
    """Place all f+1 replicas of a new item atomically; returns placement
    records (one per replica) for the JSONL log."""
    if not 0 < size <= 1:
        raise ValueError(f"item size must lie in (0, 1], got {size}")
    i, j = classify(size, state.config)
    item = Item(id=len(state.items), size=size, i=i, j=j,
                standby_size=state.config.standby_size(size))
    state.items.append(item)
    if item.small:
        return place_small(state, item)
    return place_regular(state, item)


def ensure_active_group(state: PackingState, class_pair: tuple[int, int]) -> Group:
    """Return the group placements should go to, reselecting if the last
    designated group is complete or has a failed bin.

    Selection prefers the lowest-id incomplete available group; only when
    none exists is a fresh group of empty bins opened.  That preference is
    what bounds incomplete groups per class at f+1.
    """
    gid = state.active_group.get(class_pair)
    if gid is not None:
        g = state.groups[gid]
        if not g.complete and state.group_available(g):
            return g
    candidates = [g for g in state.groups
                  if g.class_pair == class_pair and not g.complete
                  and state.group_available(g)]
    if candidates:
        g = min(candidates, key=lambda g: g.id)
    else:
        g = _create_group(state, class_pair)
    state.active_group[class_pair] = g.id
    return g


def _create_group(state: PackingState, class_pair: tuple[int, int]) -> Group:
    i, j = class_pair
    g = state.new_group(i, j)
    if g.small:
        g.mirror_bin_ids = [
            state.new_bin(SMALL_STANDBY, rank=k, group_id=g.id).id
            for k in range(1, state.config.f + 1)
        ]
    else:
        g.primary_bin_ids = [
            state.new_bin(REGULAR_PRIMARY, class_pair=class_pair, group_id=g.id).id
            for _ in range(j)
        ]
        g.standby_sets = [
            [state.new_bin(REGULAR_STANDBY, class_pair=class_pair, rank=k,
                           group_id=g.id).id for _ in range(i)]
            for k in range(1, state.config.f + 1)
        ]
    return g


def _occupy_spot(state: PackingState, bin_id: int, replica: Replica,
                 spot_size: Fraction, size: Fraction) -> None:
    b = state.bins[bin_id]
    if any(r.spot == replica.spot for r in b.replicas):
        raise InvariantViolationError(
            f"spot {replica.spot} of bin {bin_id} already occupied")
    if size > spot_size:
        raise InvariantViolationError(
            f"replica of size {size} exceeds spot size {spot_size} in bin {bin_id}")
    b.replicas.append(replica)


def place_regular(state: PackingState, item: Item) -> list[dict]:
    cfg = state.config
    g = ensure_active_group(state, (item.i, item.j))
    t = g.items_placed
    w, z = t % g.j, t // g.j
    records = []

    pbin = g.primary_bin_ids[w]
    _occupy_spot(state, pbin, Replica(item.id, "primary", 0, spot=z),
                 primary_spot_size(g.i), item.size)
    item.primary_bin = pbin
    records.append(_place_record(item, "primary", 0, pbin, z, g.id))

    sspot = standby_spot_size(g.j, cfg)
    for k in range(1, cfg.f + 1):
        sbin = g.standby_sets[k - 1][z]
        _occupy_spot(state, sbin, Replica(item.id, "standby", k, spot=w),
                     sspot, item.standby_size)
        item.standby_bins.append(sbin)
        records.append(_place_record(item, "standby", k, sbin, w, g.id))

    item.group_id = g.id
    item.t = t
    g.items_placed += 1
    if g.items_placed == g.i * g.j:
        g.complete = True
        if state.active_group.get(g.class_pair) == g.id:
            del state.active_group[g.class_pair]
    return records


def place_small(state: PackingState, item: Item) -> list[dict]:
    cfg = state.config
    consts = ClassConstants.for_config(cfg)
    cls = cfg.small_class
    while True:
        g = ensure_active_group(state, cls)
        open_cid = g.open_cohort_id(state)
        if open_cid is not None:
            cohort = state.cohorts[open_cid]
            if cohort.primary_size + item.size <= consts.sr_primary_capacity:
                return _append_to_cohort(state, g, cohort, item)
            cohort.closed = True
            if _mirrors_can_host_new_sr(state, g, consts):
                return _open_cohort(state, g, item, consts)
            g.complete = True
            if state.active_group.get(cls) == g.id:
                del state.active_group[cls]
            continue  # re-enter with a different group
        return _open_cohort(state, g, item, consts)


def _mirrors_can_host_new_sr(state: PackingState, g: Group,
                             consts: ClassConstants) -> bool:
    return all(
        1 - state.effective_load(state.bins[m]) >= consts.small_open_threshold
        for m in g.mirror_bin_ids
    )


def _select_committed_bin(state: PackingState, g: Group,
                          consts: ClassConstants) -> Bin:
    """Lowest-id free small primary bin with room for a full primary SR and
    no SR shared with g's mirrors; opens a fresh bin when none qualifies."""
    committed_elsewhere = {
        grp.committed_bin_id(state)
        for grp in state.groups
        if grp.small and not grp.complete and grp.id != g.id
    }
    for b in state.bins:
        if b.kind != SMALL_PRIMARY or b.failed or b.id in committed_elsewhere:
            continue
        if any(state.cohorts[cid].group_id == g.id for cid in b.cohorts):
            continue  # shares an SR with g's mirrors
        if 1 - state.effective_load(b) >= consts.sr_primary_capacity:
            return b
    return state.new_bin(SMALL_PRIMARY)


def _open_cohort(state: PackingState, g: Group, item: Item,
                 consts: ClassConstants) -> list[dict]:
    b = _select_committed_bin(state, g, consts)
    cohort = state.new_cohort(group_id=g.id, primary_bin_id=b.id)
    b.cohorts.append(cohort.id)
    for m in g.mirror_bin_ids:
        state.bins[m].cohorts.append(cohort.id)
    g.cohort_ids.append(cohort.id)
    return _append_to_cohort(state, g, cohort, item)


def _append_to_cohort(state: PackingState, g: Group, cohort,
                      item: Item) -> list[dict]:
    cohort.member_item_ids.append(item.id)
    cohort.primary_size += item.size
    item.group_id = g.id
    item.cohort_id = cohort.id
    item.primary_bin = cohort.primary_bin_id
    item.standby_bins = list(g.mirror_bin_ids)
    g.items_placed += 1
    records = [_place_record(item, "primary", 0, cohort.primary_bin_id, None,
                             g.id, sr=cohort.id)]
    for k, m in enumerate(g.mirror_bin_ids, start=1):
        records.append(_place_record(item, "standby", k, m, None, g.id,
                                     sr=cohort.id))
    return records


def _place_record(item: Item, role: str, rank: int, bin_id: int,
                  spot: Optional[int], group_id: int,
                  sr: Optional[int] = None) -> dict:
    rec = {
        "type": "place",
        "item": item.id,
        "size": format_ratio(item.size if role == "primary" else item.standby_size),
        "role": role,
        "rank": rank,
        "bin": bin_id,
        "group": group_id,
    }
    if spot is not None:
        rec["spot"] = spot
    if sr is not None:
        rec["sr"] = sr
    return rec
