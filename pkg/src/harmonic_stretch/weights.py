"""Weight accounting: per-replica charges and the two bin-weight bounds.

Each replica is charged by its class: a regular primary of class i weighs
1/i, a regular standby of class j weighs 1/j, and small replicas (either
side) weigh 3/2 of their size.  Two facts make the accounting useful:

* algorithm side: every bin of a packing produced by the engine weighs at
  least 1, except for a count of bins bounded by a constant in (f, eta)
  only, so the engine's bin count is at most the total weight plus that
  constant;
* optimal side: any bin of a valid packing weighs at most 7/4, provided it
  keeps the promotion headroom (eta-1)*s for its largest standby s (any
  valid packing must), so an optimal packing has at least total/(7/4) bins.

The exception constant is assembled from three counts: incomplete regular
groups 216*eta*(f+1)*(eta+f), underfilled small primary bins 5*eta+1+f,
and small mirrors of incomplete groups f*(f+1).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .checker import Packing
from .classify import primary_class, standby_class
from .model import Config

OPT_BIN_WEIGHT_LIMIT = Fraction(7, 4)


def replica_weight(role: str, size: Fraction, config: Config) -> Fraction:
    """Charge for one replica; ``size`` is nominal (x or x/eta)."""
    if role == "primary":
        i = primary_class(size, config)
        return Fraction(1, i) if i <= 6 else Fraction(3, 2) * size
    j = standby_class(size, config)
    if j <= config.standby_class_count - 1:
        return Fraction(1, j)
    return Fraction(3, 2) * size


def exception_bound(config: Config) -> Fraction:
    """Upper bound on engine bins of weight < 1, as a function of (f, eta)."""
    f, eta = config.f, config.eta
    regular = 216 * eta * (f + 1) * (eta + f)
    small_primary = 5 * eta + 1 + f
    small_standby = f * (f + 1)
    return regular + small_primary + small_standby


@dataclass
class WeightReport:
    bin_count: int
    total_weight: Fraction
    per_bin: dict[int, Fraction]
    exception_bins: list[int]  # bins of weight < 1
    exception_bound: Fraction
    exceptions_ok: bool  # |exception_bins| <= bound
    bin_count_ok: bool  # bin_count <= total_weight + bound

    @property
    def ok(self) -> bool:
        return self.exceptions_ok and self.bin_count_ok

    def to_dict(self) -> dict:
        return {
            "bin_count": self.bin_count,
            "total_weight": str(self.total_weight),
            "per_bin": {str(b): str(w) for b, w in sorted(self.per_bin.items())},
            "exception_bins": self.exception_bins,
            "exception_count": len(self.exception_bins),
            "exception_bound": str(self.exception_bound),
            "exceptions_ok": self.exceptions_ok,
            "bin_count_ok": self.bin_count_ok,
            "ok": self.ok,
        }


def bin_weight(replicas, config: Config) -> Fraction:
    return sum((replica_weight(r.role, r.size, config) for r in replicas),
               Fraction(0))


def audit_algorithm_packing(packing: Packing) -> WeightReport:
    """Weigh every bin of an engine packing against the two Lemma-style
    bounds; ``ok`` is False when either bound breaks (an engine bug)."""
    cfg = packing.config
    per_bin = {b: bin_weight(rs, cfg) for b, rs in packing.bins.items()}
    exceptions = sorted(b for b, w in per_bin.items() if w < 1)
    total = sum(per_bin.values(), Fraction(0))
    bound = exception_bound(cfg)
    return WeightReport(
        bin_count=len(packing.bins),
        total_weight=total,
        per_bin=per_bin,
        exception_bins=exceptions,
        exception_bound=bound,
        exceptions_ok=len(exceptions) <= bound,
        bin_count_ok=len(packing.bins) <= total + bound,
    )


def audit_opt_bin(replicas, config: Config) -> tuple[Fraction, bool | None]:
    """Weigh one bin of a candidate optimal packing.

    Returns (weight, bound_holds): bound_holds is None when the bin lacks
    the promotion headroom certificate (slack >= (eta-1) * largest standby),
    in which case the 7/4 bound is not asserted.
    """
    weight = bin_weight(replicas, config)
    load = sum((r.size for r in replicas), Fraction(0))
    standbys = [r.size for r in replicas if r.role == "standby"]
    if standbys and 1 - load < (config.eta - 1) * max(standbys):
        return weight, None
    return weight, weight <= OPT_BIN_WEIGHT_LIMIT


def total_weight(sizes, config: Config) -> Fraction:
    """Total charge of a sequence: every item contributes its primary
    weight plus f standby weights."""
    total = Fraction(0)
    for x in sizes:
        total += replica_weight("primary", x, config)
        total += config.f * replica_weight("standby", config.standby_size(x), config)
    return total
