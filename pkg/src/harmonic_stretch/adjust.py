"""Failure/recovery adjustment: maintains the injective promotion map.

When a bin fails while holding effective primaries (original primaries, or
a standby promoted earlier), each displaced unit is re-covered by promoting
one of its standbys in a non-failed, unmarked bin; the map entry records
the hosting bin and marks it.  Injectivity means at most one promotion per
standby bin, so the reserved headroom (eta-1)*s in every standby bin
absorbs the load growth and no bin overflows.  Promotions are temporary:
recovering a primary bin demotes its items' promoted standbys and restores
the original primaries.

Small-item cohorts promote as whole units: the standby SR in one mirror
serves every member at full size, charged against the mirror's reserved
space 2*(eta-1)/(7*eta-1).

Units within a failed bin are processed in ascending id and hosts chosen
lowest-id-first; the counting argument behind the strategy is order
independent, so any order works, and this one replays deterministically.
"""

from __future__ import annotations

from .model import (
    REGULAR_PRIMARY,
    SMALL_PRIMARY,
    InvariantViolationError,
    PackingState,
    TraceError,
    UnitKey,
)


def _primary_units(state: PackingState, bin_id: int) -> list[UnitKey]:
    """Units whose original primary replica lives in this bin."""
    b = state.bins[bin_id]
    if b.kind == REGULAR_PRIMARY:
        return sorted(("item", r.item_id) for r in b.replicas if r.role == "primary")
    if b.kind == SMALL_PRIMARY:
        return sorted(("sr", cid) for cid in b.cohorts)
    return []


def on_fail(state: PackingState, bin_id: int) -> list[dict]:
    """Mark a bin failed and re-cover every effective primary it held."""
    if not 0 <= bin_id < len(state.bins):
        raise TraceError(f"fail targets unknown bin {bin_id}")
    b = state.bins[bin_id]
    if b.failed:
        raise TraceError(f"fail targets already-failed bin {bin_id}")
    if len(state.failed_bins) >= state.config.f:
        raise TraceError(
            f"failing bin {bin_id} would exceed the budget of "
            f"{state.config.f} concurrent failures")

    critical: list[UnitKey] = _primary_units(state, bin_id)
    if b.is_standby_kind:
        # A marked standby bin held exactly one promoted unit; its mapping
        # entry clears (unmarking this bin) and the unit needs a new host.
        hosted = sorted(u for u, target in state.mapping_h.items()
                        if target == bin_id)
        assert len(hosted) <= 1, "mapping_h lost injectivity"
        for unit in hosted:
            del state.mapping_h[unit]
            critical.append(unit)

    b.failed = True
    state.failed_bins.add(bin_id)

    records = []
    for unit in sorted(critical):
        marked = state.marked_bins
        eligible = [hb for hb in state.unit_standby_bins(unit)
                    if not state.bins[hb].failed and hb not in marked]
        if not eligible:
            raise InvariantViolationError(
                f"no eligible standby bin to promote for {unit} "
                f"after failing bin {bin_id}")
        target = min(eligible)
        state.mapping_h[unit] = target
        records.append({
            "type": "promote",
            "unit": f"{unit[0]}:{unit[1]}",
            "from_bin": bin_id,
            "to_bin": target,
        })
    return records


def on_recover(state: PackingState, bin_id: int) -> list[dict]:
    """Clear a bin's failed flag; original primaries it holds regain their
    status and their promoted standbys are demoted."""
    if not 0 <= bin_id < len(state.bins):
        raise TraceError(f"recover targets unknown bin {bin_id}")
    b = state.bins[bin_id]
    if not b.failed:
        raise TraceError(f"recover targets non-failed bin {bin_id}")
    # Marked bins are non-failed by construction: a marked bin's failure
    # clears its mapping entry before anything else.
    assert bin_id not in state.marked_bins

    b.failed = False
    state.failed_bins.discard(bin_id)

    records = []
    for unit in _primary_units(state, bin_id):
        target = state.mapping_h.pop(unit, None)
        if target is None:
            raise InvariantViolationError(
                f"{unit} in recovered bin {bin_id} had no promotion to undo")
        records.append({
            "type": "demote",
            "unit": f"{unit[0]}:{unit[1]}",
            "from_bin": target,
            "to_bin": bin_id,
        })
    return records
