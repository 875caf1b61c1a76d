from fractions import Fraction

from harmonic_stretch import PackingState, check_runtime_invariants
from harmonic_stretch.adjust import on_fail
from harmonic_stretch.engine import on_arrive


def test_fresh_state_is_clean(cfg_f2_eta2):
    assert check_runtime_invariants(PackingState(cfg_f2_eta2)) == []


def test_detects_non_injective_mapping(cfg_f2_eta2):
    state = PackingState(cfg_f2_eta2)
    on_arrive(state, Fraction(3, 5))
    on_arrive(state, Fraction(3, 5))
    target = state.items[0].standby_bins[0]
    state.mapping_h[("item", 0)] = target
    state.mapping_h[("item", 1)] = target
    found = check_runtime_invariants(state)
    assert any("not injective" in v for v in found)


def test_detects_overload(cfg_f2_eta2):
    state = PackingState(cfg_f2_eta2)
    on_arrive(state, Fraction(3, 5))
    # promote without a failure: one bin now pretends to serve at 3/5
    state.mapping_h[("item", 0)] = state.items[0].standby_bins[0]
    found = check_runtime_invariants(state)
    assert any("two effective primaries" in v for v in found)


def test_detects_missing_promotion(cfg_f2_eta2):
    state = PackingState(cfg_f2_eta2)
    on_arrive(state, Fraction(3, 5))
    on_fail(state, state.items[0].primary_bin)
    state.mapping_h.clear()  # corrupt: drop the promotion
    found = check_runtime_invariants(state)
    assert any("no effective primary" in v for v in found)


def test_detects_mapping_to_wrong_bin(cfg_f2_eta2):
    state = PackingState(cfg_f2_eta2)
    on_arrive(state, Fraction(3, 5))
    on_arrive(state, Fraction(1, 3))
    on_fail(state, state.items[0].primary_bin)
    state.mapping_h[("item", 0)] = state.items[1].standby_bins[0]
    found = check_runtime_invariants(state)
    assert any("holds no standby" in v for v in found)


def test_detects_failed_set_desync(cfg_f2_eta2):
    state = PackingState(cfg_f2_eta2)
    on_arrive(state, Fraction(3, 5))
    state.failed_bins.add(3)  # flag not set on the bin itself
    found = check_runtime_invariants(state)
    assert any("out of sync" in v for v in found)


def test_detects_spot_corruption(cfg_f2_eta2):
    state = PackingState(cfg_f2_eta2)
    on_arrive(state, Fraction(3, 5))
    bin0 = state.bins[state.items[0].primary_bin]
    bin0.replicas[0].spot = 99
    found = check_runtime_invariants(state)
    assert any("out of range" in v for v in found)


def test_detects_cohort_size_desync(cfg_f3_eta2):
    state = PackingState(cfg_f3_eta2)
    on_arrive(state, Fraction(1, 10))
    state.cohorts[0].primary_size += Fraction(1, 100)
    found = check_runtime_invariants(state)
    assert any("cached size" in v for v in found)


def test_detects_mirror_divergence(cfg_f3_eta2):
    state = PackingState(cfg_f3_eta2)
    on_arrive(state, Fraction(1, 10))
    mirror = state.bins[state.groups[0].mirror_bin_ids[0]]
    mirror.cohorts.clear()
    found = check_runtime_invariants(state)
    assert any("mirrors disagree" in v for v in found)
