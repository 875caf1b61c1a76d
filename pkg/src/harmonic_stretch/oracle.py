"""Brute-force minimum-bin valid packings for tiny instances.

``optimal_packing`` finds the least bin count b such that some assignment
of every item's primary plus f standbys to b bins (distinct bins per item)
passes the static validity check.  The search branches per item over bins
in first-use order, prunes on capacity and on promotion-headroom necessity
(a valid bin holding a standby of nominal size s must keep slack
>= (eta-1)*s: failing the primary's bin together with the other f-1
standby hosts forces that exact promotion), and runs the full failure-set
check on leaves that survive the prunes.

Symmetry breaking: fresh bins open in index order, and identical items
take non-decreasing (primary, standbys) choices; both rules keep the
lexicographically smallest representative of every packing reachable.

Intended for n <= ~5 items; the bin count climbs from the volume lower
bound, and the dedicated packing guarantees termination.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

from .checker import Packing, check_static_validity
from .model import Config, format_ratio


def dedicated_baseline(sizes: list[Fraction], config: Config) -> dict:
    """Every replica alone in its own bin: (f+1)*n bins, always valid."""
    bins = []
    next_bin = 0
    for item_id, size in enumerate(sizes):
        bins.append({"id": next_bin, "contents": [
            {"item": item_id, "role": "primary", "size": format_ratio(size)}]})
        next_bin += 1
        standby = config.standby_size(size)
        for _ in range(config.f):
            bins.append({"id": next_bin, "contents": [
                {"item": item_id, "role": "standby",
                 "size": format_ratio(standby)}]})
            next_bin += 1
    return {"config": config.to_dict(), "bins": bins}


def volume_lower_bound(sizes: list[Fraction], config: Config) -> int:
    if not sizes:
        return 0
    volume = sum((x + config.f * config.standby_size(x) for x in sizes),
                 Fraction(0))
    return max(config.f + 1, math.ceil(volume))


def optimal_packing(sizes: list[Fraction], config: Config,
                    max_n: int = 5, allow_large: bool = False
                    ) -> tuple[int, dict]:
    """Minimum bin count plus one optimal packing document."""
    for x in sizes:
        if not 0 < x <= 1:
            raise ValueError(f"item size must lie in (0, 1], got {x}")
    n = len(sizes)
    if n > max_n and not allow_large:
        raise ValueError(
            f"{n} items exceed the brute-force limit {max_n}; "
            f"pass allow_large to override")
    if n == 0:
        return 0, {"config": config.to_dict(), "bins": []}
    ceiling = (config.f + 1) * n  # dedicated packing always fits
    for b in range(volume_lower_bound(sizes, config), ceiling + 1):
        doc = _search(sizes, config, b)
        if doc is not None:
            return b, doc
    raise AssertionError("dedicated packing must have been found")


def _search(sizes: list[Fraction], config: Config, b: int) -> dict | None:
    eta = config.eta
    f = config.f
    order = sorted(range(len(sizes)), key=lambda k: (-sizes[k], k))
    loads = [Fraction(0)] * b
    max_standby = [Fraction(0)] * b
    assignment: dict[int, tuple[int, tuple[int, ...]]] = {}
    result: dict | None = None

    def place(pos: int, used: int, prev_choice) -> bool:
        nonlocal result
        if pos == len(order):
            packing = _packing_view(sizes, config, assignment, b)
            if check_static_validity(packing).valid:
                result = _document(sizes, config, b, assignment)
                return True
            return False
        item = order[pos]
        x = sizes[item]
        s = x / eta
        same_as_prev = pos > 0 and sizes[order[pos - 1]] == x
        for p in range(min(used + 1, b)):
            new_p_load = loads[p] + x
            if new_p_load > 1 or new_p_load + (eta - 1) * max_standby[p] > 1:
                continue
            cand_limit = min(max(used, p + 1) + f, b)
            cands = [c for c in range(cand_limit) if c != p]
            for combo in itertools.combinations(cands, f):
                fresh = sorted(c for c in (p, *combo) if c >= used)
                if fresh != list(range(used, used + len(fresh))):
                    continue  # fresh bins must open in index order
                choice = (p, combo)
                if same_as_prev and prev_choice is not None and choice < prev_choice:
                    continue  # identical items assign in non-decreasing order
                ok = True
                for c in combo:
                    new_load = loads[c] + s
                    if new_load > 1 or new_load + (eta - 1) * max(
                            max_standby[c], s) > 1:
                        ok = False
                        break
                if not ok:
                    continue
                saved = [(c, loads[c], max_standby[c]) for c in combo]
                loads[p] += x
                for c in combo:
                    loads[c] += s
                    max_standby[c] = max(max_standby[c], s)
                assignment[item] = choice
                if place(pos + 1, used + len(fresh), choice):
                    return True
                loads[p] -= x
                for c, ld, ms in saved:
                    loads[c] = ld
                    max_standby[c] = ms
                del assignment[item]
        return False

    place(0, 0, None)
    return result


def _packing_view(sizes, config, assignment, b) -> Packing:
    packing = Packing(config=config)
    for bid in range(b):
        packing.bins.setdefault(bid, [])
    for item, (p, combo) in assignment.items():
        packing.add(p, item, "primary", sizes[item])
        for c in combo:
            packing.add(c, item, "standby", config.standby_size(sizes[item]))
    return packing


def _document(sizes, config, b, assignment) -> dict:
    contents: dict[int, list] = {bid: [] for bid in range(b)}
    for item in sorted(assignment):
        p, combo = assignment[item]
        contents[p].append({"item": item, "role": "primary",
                            "size": format_ratio(sizes[item])})
        for c in combo:
            contents[c].append({"item": item, "role": "standby",
                                "size": format_ratio(config.standby_size(sizes[item]))})
    bins = [{"id": bid, "contents": contents[bid]} for bid in range(b)]
    return {"config": config.to_dict(), "bins": bins}
