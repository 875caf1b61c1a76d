"""Runtime invariant checks over a live packing state.

``check_runtime_invariants`` re-derives every structural guarantee from the
raw state and returns one message per violation (empty list = healthy).
It trusts nothing the engine caches: loads are re-summed from bin contents,
item placement records are cross-checked against the bins, and the group
bounds are recounted.  Run it after every event in fuzz harnesses, or on
demand via the CLI's --check flag.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction

from .classify import ClassConstants, primary_spot_size, standby_spot_size
from .model import (
    REGULAR_PRIMARY,
    REGULAR_STANDBY,
    SMALL_PRIMARY,
    SMALL_STANDBY,
    PackingState,
)


def check_runtime_invariants(state: PackingState) -> list[str]:
    out: list[str] = []
    _check_failed_set(state, out)
    _check_bins(state, out)
    _check_items(state, out)
    _check_effective_primaries(state, out)
    _check_mapping(state, out)
    _check_group_counts(state, out)
    _check_groups(state, out)
    _check_cohorts(state, out)
    return out


def _check_failed_set(state: PackingState, out: list[str]) -> None:
    flagged = {b.id for b in state.bins if b.failed}
    if flagged != state.failed_bins:
        out.append(f"failed-bin set out of sync: flags {sorted(flagged)} "
                   f"vs set {sorted(state.failed_bins)}")
    if len(state.failed_bins) > state.config.f:
        out.append(f"{len(state.failed_bins)} concurrent failures exceed f={state.config.f}")


def _check_bins(state: PackingState, out: list[str]) -> None:
    cfg = state.config
    eta_minus_1 = cfg.eta - 1
    marked = state.marked_bins
    for b in state.bins:
        load = state.effective_load(b)
        if load > 1:
            out.append(f"bin {b.id} overloaded: {load}")
        if b.kind in (REGULAR_PRIMARY, REGULAR_STANDBY):
            primary_kind = b.kind == REGULAR_PRIMARY
            i, j = b.class_pair
            spot_count = i if primary_kind else j
            spot_size = (primary_spot_size(i) if primary_kind
                         else standby_spot_size(j, cfg))
            expected_role = "primary" if primary_kind else "standby"
            spots = set()
            for r in b.replicas:
                if r.spot in spots:
                    out.append(f"bin {b.id} spot {r.spot} doubly occupied")
                spots.add(r.spot)
                if not 0 <= r.spot < spot_count:
                    out.append(f"bin {b.id} spot {r.spot} out of range "
                               f"0..{spot_count - 1}")
                item = state.items[r.item_id]
                size = item.size if r.role == "primary" else item.standby_size
                if size > spot_size:
                    out.append(f"bin {b.id} spot {r.spot}: size {size} > "
                               f"spot {spot_size}")
                if r.role != expected_role:
                    out.append(f"bin {b.id} mixes roles with its kind {b.kind}")
        if b.is_standby_kind and b.id not in marked:
            # Promotion headroom that keeps the adjustment total: an
            # unmarked standby bin can absorb its largest standby growing
            # by a factor eta.
            largest = _largest_standby(state, b)
            if largest is not None and 1 - load < eta_minus_1 * largest:
                out.append(f"unmarked standby bin {b.id} lacks promotion "
                           f"headroom: load {load}, largest standby {largest}")


def _largest_standby(state: PackingState, b) -> Fraction | None:
    if b.kind == REGULAR_STANDBY:
        sizes = [state.items[r.item_id].standby_size for r in b.replicas]
    else:
        sizes = [state.cohorts[c].standby_size(state.config) for c in b.cohorts]
    return max(sizes) if sizes else None


def _check_items(state: PackingState, out: list[str]) -> None:
    cfg = state.config
    # Reconstruct per-item placements from the bins themselves.
    seen: dict[tuple[int, str, int], int] = {}
    for b in state.bins:
        for r in b.replicas:
            key = (r.item_id, r.role, r.rank)
            if key in seen:
                out.append(f"item {r.item_id} {r.role} rank {r.rank} appears "
                           f"in bins {seen[key]} and {b.id}")
            seen[key] = b.id
    for item in state.items:
        if item.small:
            cohort = state.cohorts[item.cohort_id]
            if item.id not in cohort.member_item_ids:
                out.append(f"item {item.id} missing from its cohort {cohort.id}")
            if item.primary_bin != cohort.primary_bin_id:
                out.append(f"item {item.id} primary bin record disagrees with cohort")
            mirrors = state.groups[cohort.group_id].mirror_bin_ids
            if item.standby_bins != mirrors:
                out.append(f"item {item.id} standby bins disagree with group mirrors")
        else:
            if seen.get((item.id, "primary", 0)) != item.primary_bin:
                out.append(f"item {item.id} primary placement record is stale")
            for k in range(1, cfg.f + 1):
                if seen.get((item.id, "standby", k)) != item.standby_bins[k - 1]:
                    out.append(f"item {item.id} standby rank {k} record is stale")
            if len(item.standby_bins) != cfg.f:
                out.append(f"item {item.id} has {len(item.standby_bins)} standbys, "
                           f"expected {cfg.f}")
        bins_used = [item.primary_bin, *item.standby_bins]
        if len(set(bins_used)) != cfg.f + 1:
            out.append(f"item {item.id} replicas not in {cfg.f + 1} distinct bins: "
                       f"{bins_used}")


def _check_effective_primaries(state: PackingState, out: list[str]) -> None:
    units = [("item", it.id) for it in state.items if not it.small]
    units += [("sr", c.id) for c in state.cohorts]
    for unit in units:
        primary_failed = state.bins[state.unit_primary_bin(unit)].failed
        mapped = unit in state.mapping_h
        if primary_failed and not mapped:
            out.append(f"{unit} has no effective primary (primary bin failed, "
                       f"no promotion)")
        if not primary_failed and mapped:
            out.append(f"{unit} has two effective primaries (primary bin up, "
                       f"promotion still mapped)")


def _check_mapping(state: PackingState, out: list[str]) -> None:
    targets = list(state.mapping_h.values())
    if len(targets) != len(set(targets)):
        dup = [t for t, c in Counter(targets).items() if c > 1]
        out.append(f"mapping_h not injective: bins {dup} host several promotions")
    for unit, target in state.mapping_h.items():
        tb = state.bins[target]
        if tb.failed:
            out.append(f"mapping_h sends {unit} to failed bin {target}")
        if not tb.is_standby_kind:
            out.append(f"mapping_h sends {unit} to non-standby bin {target}")
        if target not in state.unit_standby_bins(unit):
            out.append(f"mapping_h sends {unit} to bin {target} that holds no "
                       f"standby of it")


def _check_group_counts(state: PackingState, out: list[str]) -> None:
    incomplete = Counter(g.class_pair for g in state.groups if not g.complete)
    limit = state.config.f + 1
    for cls, count in incomplete.items():
        if count > limit:
            out.append(f"class {cls} has {count} incomplete groups, "
                       f"limit {limit}")
    for cls, gid in state.active_group.items():
        g = state.groups[gid]
        if g.class_pair != cls or g.complete:
            out.append(f"active pointer for class {cls} targets unsuitable "
                       f"group {gid}")


def _check_groups(state: PackingState, out: list[str]) -> None:
    for g in state.groups:
        if g.small:
            continue
        if g.complete != (g.items_placed == g.i * g.j):
            out.append(f"group {g.id} completion flag disagrees with "
                       f"items_placed={g.items_placed}")
        primary_sets = {b: {r.item_id for r in state.bins[b].replicas}
                        for b in g.primary_bin_ids}
        standby_bins = [b for s in g.standby_sets for b in s]
        standby_sets = {b: {r.item_id for r in state.bins[b].replicas}
                        for b in standby_bins}
        if g.complete:
            for b, items in primary_sets.items():
                if len(items) != g.i:
                    out.append(f"complete group {g.id}: primary bin {b} holds "
                               f"{len(items)} items, expected {g.i}")
            for b, items in standby_sets.items():
                if len(items) != g.j:
                    out.append(f"complete group {g.id}: standby bin {b} holds "
                               f"{len(items)} items, expected {g.j}")
        # Mirroring: the z'th bin of every standby set holds the same items.
        for z in range(g.i):
            mirrors = [standby_sets[s[z]] for s in g.standby_sets]
            if any(m != mirrors[0] for m in mirrors[1:]):
                out.append(f"group {g.id}: standby bins at index {z} do not mirror")
        # A primary bin shares at most one item with any standby bin.
        for pb, pitems in primary_sets.items():
            for sb, sitems in standby_sets.items():
                if len(pitems & sitems) > 1:
                    out.append(f"group {g.id}: bins {pb} and {sb} share "
                               f"{sorted(pitems & sitems)}")


def _check_cohorts(state: PackingState, out: list[str]) -> None:
    consts = ClassConstants.for_config(state.config)
    hosted_by_primary: dict[int, list[int]] = {}
    for b in state.bins:
        if b.kind == SMALL_PRIMARY:
            for cid in b.cohorts:
                hosted_by_primary.setdefault(cid, []).append(b.id)
            # at most one SR per group in any primary bin (with any mirror
            # of that group it then shares exactly that one SR)
            per_group = Counter(state.cohorts[cid].group_id for cid in b.cohorts)
            for gid, count in per_group.items():
                if count > 1:
                    out.append(f"small primary bin {b.id} hosts {count} SRs "
                               f"of group {gid}")
    for g in state.groups:
        if not g.small:
            continue
        mirror_lists = [state.bins[m].cohorts for m in g.mirror_bin_ids]
        if any(lst != g.cohort_ids for lst in mirror_lists):
            out.append(f"small group {g.id}: mirrors disagree on cohort lists")
        open_ids = [cid for cid in g.cohort_ids if not state.cohorts[cid].closed]
        if len(open_ids) > 1 or (open_ids and open_ids[-1] != g.cohort_ids[-1]):
            out.append(f"small group {g.id}: open cohorts {open_ids} violate "
                       f"the single-trailing-open rule")
    for c in state.cohorts:
        if hosted_by_primary.get(c.id, []) != [c.primary_bin_id]:
            out.append(f"cohort {c.id} primary SR not hosted exactly once in "
                       f"bin {c.primary_bin_id}")
        member_total = sum(state.items[m].size for m in c.member_item_ids)
        if member_total != c.primary_size:
            out.append(f"cohort {c.id} cached size {c.primary_size} != "
                       f"member total {member_total}")
        if not c.member_item_ids:
            out.append(f"cohort {c.id} is empty")
        if c.primary_size > consts.sr_primary_capacity:
            out.append(f"cohort {c.id} exceeds SR capacity: {c.primary_size}")
        if c.closed and c.primary_size <= consts.small_primary_limit:
            out.append(f"closed cohort {c.id} undersized: {c.primary_size}")
