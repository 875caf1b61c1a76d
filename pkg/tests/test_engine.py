from fractions import Fraction

import pytest

from harmonic_stretch import Config, PackingState, check_runtime_invariants
from harmonic_stretch.adjust import on_fail, on_recover
from harmonic_stretch.classify import ClassConstants, classify
from harmonic_stretch.engine import ensure_active_group, on_arrive
from harmonic_stretch.model import SMALL_PRIMARY


def arrive_many(state, size, count):
    for _ in range(count):
        on_arrive(state, Fraction(size) if not isinstance(size, Fraction) else size)


def test_first_arrival_layout(cfg_f2_eta2):
    state = PackingState(cfg_f2_eta2)
    records = on_arrive(state, Fraction(3, 5))
    # class (1,2): 2 primary bins + 2*1 standby bins
    assert len(state.bins) == 4
    assert [(r["role"], r["bin"], r["spot"]) for r in records] == [
        ("primary", 0, 0), ("standby", 2, 0), ("standby", 3, 0)]
    assert state.groups[0].class_pair == (1, 2)
    assert check_runtime_invariants(state) == []


def test_smallest_group_completes_with_one_item():
    cfg = Config(f=1, eta=Fraction(3, 2))
    state = PackingState(cfg)
    size = Fraction(3, 4)  # class (1,1): standby 1/2 in (1/(eta+1), 1/eta]
    assert classify(size, cfg) == (1, 1)
    on_arrive(state, size)
    g = state.groups[0]
    assert len(state.bins) == 2  # j + f*i = 1 + 1
    assert g.complete
    assert check_runtime_invariants(state) == []


class TestRegularPlacement:
    """Class (2,5) at f=3 needs eta in (2,5); use eta=3 and size 2/5."""

    @pytest.fixture
    def state(self, cfg_f3_eta3):
        assert classify(Fraction(2, 5), cfg_f3_eta3) == (2, 5)
        return PackingState(cfg_f3_eta3)

    def test_group_holds_eleven_bins(self, state):
        on_arrive(state, Fraction(2, 5))
        assert len(state.bins) == 11  # j + f*i = 5 + 6

    def test_fifth_item_position(self, state):
        arrive_many(state, Fraction(2, 5), 4)
        records = on_arrive(state, Fraction(2, 5))  # t=4 -> w=4, z=0
        g = state.groups[0]
        assert records[0]["bin"] == g.primary_bin_ids[4]
        assert records[0]["spot"] == 0
        for k, rec in enumerate(records[1:], start=1):
            assert rec["bin"] == g.standby_sets[k - 1][0]
            assert rec["spot"] == 4

    def test_eighth_item_position(self, state):
        arrive_many(state, Fraction(2, 5), 7)
        records = on_arrive(state, Fraction(2, 5))  # t=7 -> w=2, z=1
        g = state.groups[0]
        assert records[0]["bin"] == g.primary_bin_ids[2]
        assert records[0]["spot"] == 1
        for k, rec in enumerate(records[1:], start=1):
            assert rec["bin"] == g.standby_sets[k - 1][1]
            assert rec["spot"] == 2

    def test_group_completes_at_ij_items(self, state):
        arrive_many(state, Fraction(2, 5), 10)
        g = state.groups[0]
        assert g.complete and g.items_placed == 10
        # every primary bin holds i=2 primaries, every standby bin j=5 standbys
        for b in g.primary_bin_ids:
            assert len(state.bins[b].replicas) == 2
        for s in g.standby_sets:
            for b in s:
                assert len(state.bins[b].replicas) == 5
        assert check_runtime_invariants(state) == []
        # 11th item opens a fresh group
        on_arrive(state, Fraction(2, 5))
        assert len(state.groups) == 2


class TestActiveGroupSelection:
    def test_failure_makes_next_arrival_reselect(self, cfg_f2_eta2):
        state = PackingState(cfg_f2_eta2)
        on_arrive(state, Fraction(3, 5))
        g0 = state.groups[0]
        on_fail(state, g0.primary_bin_ids[0])
        assert state.group_state_name(g0) == "incomplete_unavailable"
        # replacement group is created lazily, at the next arrival
        assert len(state.groups) == 1
        on_arrive(state, Fraction(3, 5))
        assert len(state.groups) == 2
        assert state.active_group[(1, 2)] == 1

    def test_recovered_group_preferred_over_fresh(self, cfg_f2_eta2):
        state = PackingState(cfg_f2_eta2)
        on_arrive(state, Fraction(3, 5))
        bad = state.groups[0].primary_bin_ids[1]
        on_fail(state, bad)
        on_arrive(state, Fraction(3, 5))  # group 1 now active
        on_recover(state, bad)
        assert state.group_state_name(state.groups[0]) == "incomplete_available"
        # sabotage group 1, then the next arrival must reuse group 0
        on_fail(state, state.groups[1].primary_bin_ids[0])
        on_arrive(state, Fraction(3, 5))
        assert state.items[-1].group_id == 0
        assert len(state.groups) == 2  # no fresh group was opened
        assert state.groups[0].complete  # that arrival filled it
        assert check_runtime_invariants(state) == []

    def test_lowest_id_available_group_wins(self, cfg_f2_eta2):
        state = PackingState(cfg_f2_eta2)
        on_arrive(state, Fraction(3, 5))
        b0 = state.groups[0].primary_bin_ids[0]
        on_fail(state, b0)
        on_arrive(state, Fraction(3, 5))
        b1 = state.groups[1].primary_bin_ids[0]
        on_recover(state, b0)
        on_fail(state, b1)
        on_recover(state, b1)  # both groups incomplete available now
        state.active_group.pop((1, 2), None)
        g = ensure_active_group(state, (1, 2))
        assert g.id == 0

    def test_transient_failure_resumes_same_group(self, cfg_f2_eta2):
        # fail + recover between arrivals: placement continues in place
        state = PackingState(cfg_f2_eta2)
        on_arrive(state, Fraction(3, 5))
        target = state.groups[0].primary_bin_ids[1]
        on_fail(state, target)
        on_recover(state, target)
        on_arrive(state, Fraction(3, 5))
        assert len(state.groups) == 1
        assert state.groups[0].items_placed == 2

    def test_reactivated_group_resumes_indices(self, cfg_f2_eta2):
        state = PackingState(cfg_f2_eta2)
        arrive_many(state, Fraction(3, 5), 1)
        g0 = state.groups[0]
        bad = g0.standby_sets[0][0]
        on_fail(state, bad)
        on_arrive(state, Fraction(3, 5))  # goes to group 1
        on_recover(state, bad)
        on_fail(state, state.groups[1].primary_bin_ids[0])
        records = on_arrive(state, Fraction(3, 5))  # back in group 0, t=1
        assert records[0]["group"] == 0
        assert records[0]["bin"] == g0.primary_bin_ids[1]  # w = 1 % 2
        assert records[0]["spot"] == 0
        assert check_runtime_invariants(state) == []


class TestSmallItems:
    """eta=2, f=3: SR capacities 4/13 (primary) and 2/13 (standby),
    mirror reserved space 2/13, open threshold 4/13."""

    def test_constants(self, cfg_f3_eta2):
        consts = ClassConstants.for_config(cfg_f3_eta2)
        assert consts.sr_primary_capacity == Fraction(4, 13)
        assert consts.sr_standby_capacity == Fraction(2, 13)
        assert consts.small_mirror_reserved == Fraction(2, 13)
        assert consts.small_open_threshold == Fraction(4, 13)

    def test_first_small_arrival(self, cfg_f3_eta2):
        state = PackingState(cfg_f3_eta2)
        records = on_arrive(state, Fraction(1, 10))
        # f mirrors created first, then the committed primary bin
        assert [b.kind for b in state.bins] == [
            "small_standby", "small_standby", "small_standby", "small_primary"]
        assert [r["bin"] for r in records] == [3, 0, 1, 2]
        assert check_runtime_invariants(state) == []

    def test_cohort_closes_when_next_item_does_not_fit(self, cfg_f3_eta2):
        state = PackingState(cfg_f3_eta2)
        arrive_many(state, Fraction(2, 13), 2)  # fills SR to capacity exactly
        assert len(state.cohorts) == 1
        assert state.cohorts[0].primary_size == Fraction(4, 13)
        assert not state.cohorts[0].closed
        on_arrive(state, Fraction(2, 13))
        assert state.cohorts[0].closed
        assert len(state.cohorts) == 2
        # new committed bin opened; old one shares an SR with the mirrors
        assert state.cohorts[1].primary_bin_id != state.cohorts[0].primary_bin_id

    def test_closed_cohort_sizes_exceed_half_capacity(self, cfg_f3_eta2):
        state = PackingState(cfg_f3_eta2)
        consts = ClassConstants.for_config(cfg_f3_eta2)
        arrive_many(state, Fraction(1, 13), 40)
        for c in state.cohorts:
            if c.closed:
                assert consts.small_primary_limit < c.primary_size
                assert c.primary_size <= consts.sr_primary_capacity

    def test_group_completes_when_mirrors_fill(self, cfg_f3_eta2):
        state = PackingState(cfg_f3_eta2)
        # cohorts of exactly 4/13: mirrors take 5 of them (load 10/13),
        # the 6th fails the 4/13 empty-space threshold
        arrive_many(state, Fraction(2, 13), 11)
        g0 = state.groups[0]
        assert g0.complete
        assert len(g0.cohort_ids) == 5
        assert len(state.groups) == 2
        # freed committed bin is recommitted to the new group (lowest id)
        assert state.cohorts[5].primary_bin_id == state.cohorts[0].primary_bin_id
        assert check_runtime_invariants(state) == []

    def test_mirror_load_never_eats_reserved_space(self, cfg_f3_eta2):
        state = PackingState(cfg_f3_eta2)
        consts = ClassConstants.for_config(cfg_f3_eta2)
        arrive_many(state, Fraction(1, 20), 60)
        for b in state.bins:
            if b.kind == "small_standby":
                assert state.effective_load(b) <= 1 - consts.small_mirror_reserved

    def test_open_cohort_resumes_after_reactivation(self, cfg_f3_eta2):
        state = PackingState(cfg_f3_eta2)
        on_arrive(state, Fraction(1, 10))
        g0 = state.groups[0]
        cohort = state.cohorts[0]
        mirror = g0.mirror_bin_ids[0]
        on_fail(state, mirror)
        on_arrive(state, Fraction(1, 10))  # new group while g0 unavailable
        assert state.items[1].group_id == 1
        on_recover(state, mirror)
        on_fail(state, state.groups[1].mirror_bin_ids[0])
        on_arrive(state, Fraction(1, 10))  # back to g0's open cohort
        assert state.items[2].cohort_id == cohort.id
        assert cohort.member_item_ids == [0, 2]
        assert check_runtime_invariants(state) == []

    def test_committed_bin_failure_makes_group_unavailable(self, cfg_f3_eta2):
        state = PackingState(cfg_f3_eta2)
        on_arrive(state, Fraction(1, 10))
        g0 = state.groups[0]
        committed = g0.committed_bin_id(state)
        on_fail(state, committed)
        assert state.group_state_name(g0) == "incomplete_unavailable"
        on_arrive(state, Fraction(1, 10))
        assert state.items[1].group_id == 1
        assert check_runtime_invariants(state) == []

    def test_failed_free_bin_never_recommitted(self, cfg_f3_eta2):
        state = PackingState(cfg_f3_eta2)
        arrive_many(state, Fraction(2, 13), 3)  # bin of cohort 0 now free
        free_bin = state.cohorts[0].primary_bin_id
        on_fail(state, free_bin)
        # force a new cohort; the failed free bin must be skipped
        arrive_many(state, Fraction(2, 13), 2)
        assert state.cohorts[2].primary_bin_id != free_bin
        assert check_runtime_invariants(state) == []


def test_lemma1_bound_under_engineered_failures(cfg_f2_eta2):
    state = PackingState(cfg_f2_eta2)
    cls = (1, 2)
    for _ in range(cfg_f2_eta2.f):
        on_arrive(state, Fraction(3, 5))
        g = state.groups[state.active_group[cls]]
        on_fail(state, g.primary_bin_ids[0])
    on_arrive(state, Fraction(3, 5))
    incomplete = [g for g in state.groups if not g.complete]
    assert len(incomplete) == cfg_f2_eta2.f + 1
    assert check_runtime_invariants(state) == []
