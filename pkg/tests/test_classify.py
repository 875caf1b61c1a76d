from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harmonic_stretch import Config, classify
from harmonic_stretch.classify import (
    ClassConstants,
    boundary_sizes,
    primary_interval,
    standby_interval,
    standby_reserved,
    standby_spot_size,
)

ETAS = [Fraction(3, 2), Fraction(2), Fraction(3), Fraction(7, 4), Fraction(5, 3)]


@pytest.mark.parametrize("size,expected", [
    (Fraction(1), (1, 1)),
    (Fraction(3, 5), (1, 2)),
    (Fraction(1, 10), (7, 13)),
    (Fraction(1, 2), (2, 3)),
])
def test_known_classes_eta2(size, expected, cfg_f2_eta2):
    assert classify(size, cfg_f2_eta2) == expected


def test_rejects_out_of_range(cfg_f2_eta2):
    with pytest.raises(ValueError):
        classify(Fraction(0), cfg_f2_eta2)
    with pytest.raises(ValueError):
        classify(Fraction(11, 10), cfg_f2_eta2)


@pytest.mark.parametrize("eta", ETAS)
def test_totality_on_grid_and_endpoints(eta):
    cfg = Config(f=2, eta=eta)
    consts = ClassConstants.for_config(cfg)
    grid = [Fraction(k, 997) for k in range(1, 998)]
    for size in grid + boundary_sizes(cfg):
        i, j = classify(size, cfg)
        assert 1 <= i <= 7
        assert 1 <= j <= consts.standby_class_count
        lo, hi = primary_interval(i, cfg)
        assert lo < size <= hi
        slo, shi = standby_interval(j, cfg)
        s = cfg.standby_size(size)
        assert slo < s <= shi
        assert (i == 7) == (j == consts.standby_class_count)


@pytest.mark.parametrize("eta", ETAS)
def test_intervals_partition(eta):
    """Interval tops chain onto the next interval's bottom: a partition."""
    cfg = Config(f=1, eta=eta)
    lo7, hi7 = primary_interval(7, cfg)
    assert lo7 == 0
    prev_lo = hi7
    for i in range(6, 0, -1):
        lo, hi = primary_interval(i, cfg)
        assert lo == prev_lo
        prev_lo = hi
    assert prev_lo == 1
    big = cfg.standby_class_count
    prev_lo = standby_interval(big, cfg)[1]
    assert standby_interval(big, cfg)[0] == standby_interval(big - 1 + 1, cfg)[0]
    for j in range(big - 1, 0, -1):
        lo, hi = standby_interval(j, cfg)
        assert lo <= prev_lo  # empty floor(6*eta) interval still chains
        prev_lo = hi
    assert prev_lo == 1 / eta  # standby sizes reach x/eta for x = 1


def test_big_standby_class_empty_iff_6eta_integer():
    for eta in ETAS:
        cfg = Config(f=1, eta=eta)
        lo, hi = standby_interval(cfg.standby_class_count - 1, cfg)
        assert (lo >= hi) == (int(6 * eta) == 6 * eta)


@settings(max_examples=300, deadline=None)
@given(num=st.integers(1, 3000), den=st.integers(1, 3000),
       eta_idx=st.integers(0, len(ETAS) - 1))
def test_small_coupling_fuzz(num, den, eta_idx):
    size = Fraction(num, den)
    if not 0 < size <= 1:
        size = Fraction(min(num, den), max(num, den))
    cfg = Config(f=2, eta=ETAS[eta_idx])
    i, j = classify(size, cfg)
    assert (i == 7) == (j == cfg.standby_class_count)


@pytest.mark.parametrize("eta", ETAS)
def test_constants_identities(eta):
    cfg = Config(f=2, eta=eta)
    consts = ClassConstants.for_config(cfg)
    # spots plus reserved fill a standby bin exactly
    for j in range(1, consts.standby_class_count):
        assert j * standby_spot_size(j, cfg) + standby_reserved(j, cfg) == 1
    assert (consts.small_open_threshold
            == consts.sr_standby_capacity + consts.small_mirror_reserved)
    assert consts.sr_primary_capacity == 2 * consts.small_primary_limit
    assert consts.small_primary_limit == eta * consts.small_standby_limit


def test_config_validation():
    with pytest.raises(ValueError):
        Config(f=0, eta=Fraction(2))
    with pytest.raises(ValueError):
        Config(f=2, eta=Fraction(1))
    with pytest.raises(ValueError):
        Config(f=2, eta=Fraction(1, 2))
    assert Config(f=1, eta=Fraction(3, 2)).standby_class_count == 10
