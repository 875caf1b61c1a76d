"""Size classification and the class-derived layout constants.

Items are classified by the size of both replicas.  Primary classes:

    i in [1, 5]   size in (1/(i+1), 1/i]
    i = 6         size in (1/(7 - 1/eta), 1/6]
    i = 7         size in (0, 1/(7 - 1/eta)]          (small items)

Standby classes, applied to the standby size s = x/eta with J = floor(6*eta):

    j in [1, J-1] s in (1/(eta+j), 1/(eta+j-1)]
    j = J         s in (1/(7*eta - 1), 1/(eta+J-1)]
    j = J + 1     s in (0, 1/(7*eta - 1)]             (small items)

The j = J interval is empty exactly when 6*eta is an integer; classification
stays total either way, and groups of an empty class are simply never
created.  i = 7 holds iff j = J + 1 (small items), since
x <= 1/(7 - 1/eta) <=> x/eta <= 1/(7*eta - 1) exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .model import Config


@dataclass(frozen=True)
class ClassConstants:
    """All layout constants derived from (f, eta).

    Spot sizes carve up primary and standby bins for regular classes;
    the SR capacities and reserved spaces drive small-item packing.
    """

    small_primary_limit: Fraction  # 1/(7 - 1/eta): top of primary class 7
    small_standby_limit: Fraction  # 1/(7*eta - 1): top of standby class J+1
    sr_primary_capacity: Fraction  # 2/(7 - 1/eta)
    sr_standby_capacity: Fraction  # 2/(7*eta - 1)
    small_mirror_reserved: Fraction  # 2*(eta-1)/(7*eta - 1)
    small_open_threshold: Fraction  # 2*eta/(7*eta - 1)
    standby_class_count: int  # floor(6*eta) + 1

    @staticmethod
    @lru_cache(maxsize=None)
    def for_config(config: Config) -> "ClassConstants":
        eta = config.eta
        denom = 7 * eta - 1
        return ClassConstants(
            small_primary_limit=eta / denom,
            small_standby_limit=Fraction(1) / denom,
            sr_primary_capacity=2 * eta / denom,
            sr_standby_capacity=Fraction(2) / denom,
            small_mirror_reserved=2 * (eta - 1) / denom,
            small_open_threshold=2 * eta / denom,
            standby_class_count=int(6 * eta) + 1,
        )


@lru_cache(maxsize=None)
def primary_spot_size(i: int) -> Fraction:
    """Spot size in a primary bin of class i <= 6."""
    if not 1 <= i <= 6:
        raise ValueError(f"primary spots exist for classes 1..6, got {i}")
    return Fraction(1, i)


@lru_cache(maxsize=None)
def standby_spot_size(j: int, config: Config) -> Fraction:
    """Spot size in a standby bin of class j <= floor(6*eta)."""
    if not 1 <= j <= config.standby_class_count - 1:
        raise ValueError(f"standby spots exist for classes 1..{config.standby_class_count - 1}, got {j}")
    return 1 / (j + config.eta - 1)


def standby_reserved(j: int, config: Config) -> Fraction:
    """Reserved promotion headroom in a standby bin of class j."""
    return (config.eta - 1) / (j + config.eta - 1)


def primary_class(size: Fraction, config: Config) -> int:
    if not 0 < size <= 1:
        raise ValueError(f"size must lie in (0, 1], got {size}")
    if size <= ClassConstants.for_config(config).small_primary_limit:
        return 7
    if size <= Fraction(1, 6):
        return 6
    i = math.floor(1 / size)
    assert 1 <= i <= 5
    return i


def standby_class(standby_size: Fraction, config: Config) -> int:
    consts = ClassConstants.for_config(config)
    big_j = consts.standby_class_count - 1  # floor(6*eta)
    if standby_size <= consts.small_standby_limit:
        return big_j + 1
    if standby_size <= 1 / (config.eta + big_j - 1):
        return big_j
    j = math.floor(1 / standby_size - config.eta) + 1
    assert 1 <= j <= big_j - 1
    return j


def classify(size: Fraction, config: Config) -> tuple[int, int]:
    """Map an item size to its (i, j) class pair."""
    i = primary_class(size, config)
    j = standby_class(config.standby_size(size), config)
    # small iff both terminal classes; algebraically forced, cheap to assert
    assert (i == 7) == (j == config.standby_class_count)
    return (i, j)


def primary_interval(i: int, config: Config) -> tuple[Fraction, Fraction]:
    """(low, high] size bounds of primary class i; low = 0 for class 7."""
    consts = ClassConstants.for_config(config)
    if i == 7:
        return (Fraction(0), consts.small_primary_limit)
    if i == 6:
        return (consts.small_primary_limit, Fraction(1, 6))
    if 1 <= i <= 5:
        return (Fraction(1, i + 1), Fraction(1, i))
    raise ValueError(f"no primary class {i}")


def standby_interval(j: int, config: Config) -> tuple[Fraction, Fraction]:
    """(low, high] standby-size bounds of standby class j (may be empty)."""
    consts = ClassConstants.for_config(config)
    big_j = consts.standby_class_count - 1
    if j == big_j + 1:
        return (Fraction(0), consts.small_standby_limit)
    if j == big_j:
        return (consts.small_standby_limit, 1 / (config.eta + big_j - 1))
    if 1 <= j <= big_j - 1:
        return (1 / (config.eta + j), 1 / (config.eta + j - 1))
    raise ValueError(f"no standby class {j}")


def boundary_sizes(config: Config) -> list[Fraction]:
    """All class-interval endpoints, expressed as primary sizes in (0, 1]."""
    eta = config.eta
    sizes = {Fraction(1, i) for i in range(1, 7)}
    sizes.add(ClassConstants.for_config(config).small_primary_limit)
    big_j = config.standby_class_count - 1
    for j in range(1, big_j + 1):
        sizes.add(eta / (eta + j - 1))
        sizes.add(eta / (eta + j))
    sizes.add(eta * ClassConstants.for_config(config).small_standby_limit)
    return sorted(s for s in sizes if 0 < s <= 1)
