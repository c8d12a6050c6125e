import numpy as np
import pytest

from walkcover.errors import (
    IncompleteTraceError,
    InsufficientPathError,
)
from walkcover.excursions import (
    CountWindowSchedule,
    ExcursionTrace,
    annulus_levels,
    count_excursions,
    counts_capped,
    each_center_has_capped_walk,
    factorial_radii,
    is_multi_successful,
    is_successful,
    pack_region,
    scale_index,
    sluggish_target_count,
    successful,
    successful_multi,
    successful_verdict,
    target_count,
    visits_during_excursions,
    visits_within_excursions,
    window_schedule,
)
from walkcover.geometry import closed_radius_threshold, open_radius_threshold
from walkcover.reference import (
    rescan_excursion_counts,
    rescan_visits_during_excursions,
)
from walkcover.walk import walk_positions


def axis_path(*xs):
    """Unit-step path along the x axis through the given waypoints."""
    pts = [int(xs[0])]
    for target in xs[1:]:
        step = 1 if target > pts[-1] else -1
        while pts[-1] != target:
            pts.append(pts[-1] + step)
    arr = np.array(pts, dtype=np.int64)
    return arr, np.zeros_like(arr)


# -- radius ladder ------------------------------------------------------------


def test_factorial_radii_m3():
    sched = factorial_radii(3)
    assert sched.radii == (1, 1, 8, 216)
    assert sched.ratio(3) == 1
    assert sched.ratio(1) == 216


def test_factorial_radii_ratio_m4():
    assert factorial_radii(4).ratio(2) == 1728  # 13824 / 8


def test_factorial_radii_big_m_exact():
    sched = factorial_radii(13)
    assert sched.radii[13] == (6227020800) ** 3  # exact big integer


def test_factorial_radii_rejects_m0():
    with pytest.raises(ValueError):
        factorial_radii(0)


def test_annulus_nesting():
    sched = factorial_radii(5)
    for k in (3, 4, 5):
        inner, outer = sched.annulus(k)
        assert inner < outer
        # deeper annuli nest inside shallower ones
        if k > 3:
            assert outer <= sched.annulus(k - 1)[0]


# -- count targets and windows ---------------------------------------------


def test_target_count_pinned():
    assert target_count(3, 2.0) == 59  # floor(3 * 2 * 9 * ln 3)


def test_target_count_domain():
    with pytest.raises(ValueError):
        target_count(1, 2.0)
    with pytest.raises(ValueError):
        target_count(3, 0.0)


def test_sluggish_target_pinned():
    assert sluggish_target_count(2, 1.0, 1.0, 3) == 82  # floor(3 * 25 * ln 3)


def test_sluggish_target_domain():
    with pytest.raises(ValueError):
        sluggish_target_count(2, 0.0, 1.0, 3)
    with pytest.raises(ValueError):
        sluggish_target_count(2, 1.0, -0.5, 3)
    with pytest.raises(ValueError):
        sluggish_target_count(2, 1.0, 1.0, 1)


def test_window_schedule_successful():
    sched = window_schedule("successful", m=6, ks=(3, 4, 5), a=2.0)
    assert sched.kind == "successful"
    assert sched.ks == (3, 4, 5)
    assert sched.target(3) == 59
    assert sched.window(3) == (56, 62)
    assert sched.contains(3, 60)
    assert not sched.contains(3, 63)
    assert dict(sched.params) == {"a": 2.0}


def test_window_schedule_from_beta():
    sched = window_schedule("successful", m=5, beta=0.9, a=1.0)
    assert sched.ks == (3, 4)  # 3..floor(0.9 * 5)


def test_window_schedule_sluggish():
    sched = window_schedule("sluggish", m=3, ks=(2,), h=1.0, a_margin=1.0)
    assert sched.target(2) == 82
    assert sched.window(2) == (80, 84)


def test_window_schedule_validation():
    with pytest.raises(ValueError):
        window_schedule("successful", m=5, ks=(2, 3), a=1.0)  # k=2 < 3
    with pytest.raises(ValueError):
        window_schedule("successful", m=5, ks=(3, 6), a=1.0)  # k=6 > m
    with pytest.raises(ValueError):
        window_schedule("successful", m=5, ks=(3, 4))  # missing a
    with pytest.raises(ValueError):
        window_schedule("sluggish", m=5, ks=(1, 2))  # missing h
    with pytest.raises(ValueError):
        window_schedule("nope", m=5, ks=(3,), a=1.0)
    with pytest.raises(ValueError):
        window_schedule("successful", m=5, ks=(), a=1.0)


# -- excursion counting -------------------------------------------------------


def test_axis_path_counts_two():
    # out to 5, back to 2, out to 5 again, then to the stop ring at 10
    xs, ys = axis_path(0, 5, 2, 5, 10)
    trace = count_excursions(xs, ys, (0, 0), [(2, 5)], stop_radius=10)
    assert trace.counts.tolist() == [2]
    assert trace.stopped
    assert trace.stop_reason == "hit-stop-boundary"
    assert trace.stop_time == len(xs) - 1


def test_exhausted_path_reports_lower_bound():
    xs, ys = axis_path(0, 5, 2, 5)  # never reaches the stop ring
    trace = count_excursions(xs, ys, (0, 0), [(2, 5)], stop_radius=10)
    assert trace.counts.tolist() == [2]
    assert not trace.stopped
    assert trace.stop_reason == "path-exhausted"


def test_no_entry_no_count():
    xs, ys = axis_path(3, 10)  # starts outside the closed inner disc
    trace = count_excursions(xs, ys, (0, 0), [(2, 5)], stop_radius=10)
    assert trace.counts.tolist() == [0]
    assert trace.stopped


def test_entry_is_closed_exit_is_open():
    # inner 2: entry at squared distance <= 4; outer 5: completion at >= 25
    assert closed_radius_threshold(2) == 4
    assert open_radius_threshold(5) == 25
    xs, ys = axis_path(0, 4, 2, 5, 10)  # turning at 4 does not complete
    trace = count_excursions(xs, ys, (0, 0), [(2, 5)], stop_radius=10)
    assert trace.counts.tolist() == [1]


def test_in_flight_reported():
    xs, ys = axis_path(0, 3)
    trace = count_excursions(xs, ys, (0, 0), [(2, 5)], stop_radius=10)
    assert trace.in_flight.tolist() == [True]
    assert trace.counts.tolist() == [0]


def test_last_completion_times():
    xs, ys = axis_path(0, 5, 2, 5, 10)
    trace = count_excursions(xs, ys, (0, 0), [(2, 5)], stop_radius=10)
    # second completion happens on the second arrival at x=5
    arrivals = np.flatnonzero(xs == 5)
    assert trace.last_completion.tolist() == [int(arrivals[1])]


def test_stop_clock_arms_on_entry():
    # stop disc around (0,0); walk starts outside it, wanders in, then leaves:
    # counting is live only between first entry and the next exit
    xs, ys = axis_path(12, 4, 0, 4, 12)
    trace = count_excursions(xs, ys, (0, 0), [(1, 3)], stop_radius=10)
    assert trace.stopped
    # one completed excursion: entered D(0,1)-closed at x=0..1, left past 3
    assert trace.counts.tolist() == [1]


def test_unarmed_excursions_invisible():
    # stop disc D((30,0), 20) spans x in (10, 50): both excursions around the
    # origin complete before the clock arms at x=11, so they are not counted,
    # and the path ends at x=40 still inside the stop disc
    xs, ys = axis_path(0, 5, 2, 5, 40)
    trace = count_excursions(xs, ys, (0, 0), [(2, 5)], stop_radius=20,
                             stop_center=(30, 0))
    assert trace.stop_center == (30, 0)
    assert not trace.stopped
    assert trace.counts.tolist() == [0]


def test_separate_stop_center():
    # stop disc D((3,0), 20) spans x in (-17, 23): the walk arms at x=22 on
    # the way in, completes one excursion, and halts leaving at x=23
    xs, ys = axis_path(30, 5, 2, 5, 30)
    trace = count_excursions(xs, ys, (0, 0), [(2, 5)], stop_radius=20,
                             stop_center=(3, 0))
    assert trace.stopped
    assert trace.stop_reason == "hit-stop-boundary"
    assert trace.counts.tolist() == [1]
    assert xs[trace.stop_time] == 23


def test_level_validation():
    xs, ys = axis_path(0, 10)
    with pytest.raises(ValueError):
        count_excursions(xs, ys, (0, 0), [(5, 2)], stop_radius=10)
    with pytest.raises(ValueError):
        count_excursions(xs, ys, (0, 0), [(2, 5)], stop_radius=5)  # stop <= outer
    with pytest.raises(ValueError):
        count_excursions(xs, ys, (0, 0), [], stop_radius=10)


def test_counts_match_rescan_on_random_paths():
    for seed in (1, 5, 9, 13):
        xs, ys = walk_positions(seed, 30000)
        levels = [(2, 6), (1, 4), (3, 9)]
        trace = count_excursions(xs, ys, (0, 0), levels, stop_radius=25)
        ref_counts = rescan_excursion_counts(xs, ys, (0, 0), levels, 25)
        assert trace.counts.tolist() == list(ref_counts)


def test_nesting_event_order():
    # a deeper level can only go in-flight while the shallower level is
    # in-flight: replay both state machines and check the implication
    for seed in (3, 8):
        xs, ys = walk_positions(seed, 20000)
        shallow = (4, 12)
        deep = (1, 8)
        q_sh, t_sh = closed_radius_threshold(4), open_radius_threshold(12)
        q_dp, t_dp = closed_radius_threshold(1), open_radius_threshold(8)
        in_sh = in_dp = False
        for x, y in zip(xs.tolist(), ys.tolist()):
            d2 = x * x + y * y
            if in_sh and d2 >= t_sh:
                in_sh = False
            if in_dp and d2 >= t_dp:
                in_dp = False
            was_dp = in_dp
            if not in_sh and d2 <= q_sh:
                in_sh = True
            if not in_dp and d2 <= q_dp:
                in_dp = True
            if in_dp and not was_dp:
                assert in_sh  # deep entry implies shallow in-flight


def test_trace_to_csv(tmp_path):
    xs, ys = axis_path(0, 5, 2, 5, 10)
    trace = count_excursions(xs, ys, (0, 0), [(2, 5)], stop_radius=10, ks=(3,))
    p = tmp_path / "trace.csv"
    trace.to_csv(p)
    lines = p.read_text().strip().split("\n")
    assert lines[0] == "level,inner_r,outer_r,count"
    assert lines[1] == "3,2,5,2"
    # unlabelled levels fall back to 1-based ordinals
    trace2 = count_excursions(xs, ys, (0, 0), [(2, 5)], stop_radius=10)
    trace2.to_csv(p)
    assert p.read_text().strip().split("\n")[1] == "1,2,5,2"


# -- success predicates -------------------------------------------------------


M, BETA = 4, 0.8  # floor(beta*m) = 3: one tracked scale, annulus (64, 1728)
R_M = 13824


def ladder_path(oscillations, finish=R_M, start=0):
    """Axis path doing `oscillations` complete (64, 1728)-excursions, then
    walking out to `finish`."""
    waypoints = [start]
    for _ in range(oscillations):
        waypoints += [1728, 64]
    waypoints += [finish]
    return axis_path(*waypoints)


def test_annulus_levels_m4():
    levels, ks = annulus_levels(M, BETA)
    assert levels == [(64, 1728)]
    assert ks == [3]


def test_successful_true_on_crafted_path():
    xs, ys = ladder_path(3)
    # a = 0.1: target floor(2.97) = 2, window [-1, 5] contains 3
    assert successful(xs, ys, (0, 0), M, BETA, a=0.1) is True


def test_successful_false_when_counts_escape_window():
    xs, ys = ladder_path(3)
    # a = 5: target 148, window [145, 151] rejects 3
    assert successful(xs, ys, (0, 0), M, BETA, a=5.0) is False


def test_successful_false_without_deep_excursion():
    xs, ys = axis_path(0, R_M)  # exits the stop disc after one outward leg
    # the single completed excursion (count 1) is inside the a=0.1 window,
    # but weaken a to make the window require zero... count 1 passes [-1,5];
    # use a path that never re-enters: counts [1] pass, deep count nonzero.
    # To exercise the zero-deep-count clause, start outside the inner disc:
    xs2, ys2 = axis_path(100, R_M)
    ok, trace = successful_verdict(xs2, ys2, (0, 0), M, BETA, a=0.1)
    assert trace.counts.tolist() == [0]
    assert ok is False


def test_successful_requires_deep_cover():
    # same oscillations, but the walk never sits at the centre after the
    # start... make k_vis=2 unattainable: the centre is visited once only
    xs, ys = ladder_path(3)
    ok, trace = successful_verdict(xs, ys, (0, 0), M, BETA, a=0.1, k_vis=2)
    assert trace.counts.tolist() == [4]  # 3 oscillations + the exit leg
    assert ok is False  # D(0,1) = {0} visited once, needs 2


def test_successful_incomplete_trace_raises():
    xs, ys = ladder_path(3, finish=2000)  # never exits the stop disc
    with pytest.raises(IncompleteTraceError):
        successful(xs, ys, (0, 0), M, BETA, a=0.1)


def test_is_successful_schedule_mismatch():
    xs, ys = ladder_path(1)
    trace = count_excursions(xs, ys, (0, 0), [(64, 1728)], stop_radius=R_M, ks=(3,))
    bad = window_schedule("successful", m=6, ks=(3, 4), a=1.0)
    with pytest.raises(ValueError):
        is_successful(trace, xs, ys, bad, BETA, M)


def test_is_multi_successful_single_walk_reduces():
    xs, ys = ladder_path(3)
    sched = window_schedule("successful", m=M, beta=BETA, a=0.1)
    trace = count_excursions(xs, ys, (0, 0), [(64, 1728)], stop_radius=R_M, ks=(3,))
    assert is_multi_successful([trace], [(xs, ys)], sched, BETA, M) is True


def test_is_multi_successful_one_bad_walk_fails():
    good = ladder_path(3)
    bad = axis_path(100, R_M)  # zero deep excursions
    sched = window_schedule("successful", m=M, beta=BETA, a=0.1)
    traces = [
        count_excursions(xs, ys, (0, 0), [(64, 1728)], stop_radius=R_M, ks=(3,))
        for xs, ys in (good, bad)
    ]
    assert is_multi_successful(traces, [good, bad], sched, BETA, M) is False
    with pytest.raises(ValueError):
        is_multi_successful(traces, [good], sched, BETA, M)


def test_successful_multi_conjunction():
    good1 = ladder_path(1)
    good2 = ladder_path(2)
    bad = axis_path(100, R_M)
    # h = 0.05: target floor(3*0.05*9*ln4) = 1, window [-2, 4]
    assert successful_multi([good1, good2], (0, 0), M, BETA, h=0.05) is True
    assert successful_multi([good1, bad], (0, 0), M, BETA, h=0.05) is False


def test_counts_capped():
    assert counts_capped([3, 1, 2], 3)
    assert not counts_capped([3, 4], 3)
    assert each_center_has_capped_walk([[5, 2], [1, 9]], 3)
    assert not each_center_has_capped_walk([[5, 4], [1, 2]], 3)


# -- visits during excursions -------------------------------------------------


def test_visits_during_excursions_axis():
    xs, ys = axis_path(0, 5, 2, 5, 10)
    # z = origin: visited only at t=0, which is inside excursion 1
    assert visits_during_excursions(xs, ys, (0, 0), 2, 5, 1) == 1
    assert visits_during_excursions(xs, ys, (0, 0), 2, 5, 2) == 1


def test_visits_threshold_semantics():
    xs, ys = axis_path(0, 5, 2, 5, 10)
    # visited once: not under-visited at threshold 1
    assert visits_within_excursions(xs, ys, (0, 0), (2, 5), 1, threshold=1) is False
    assert visits_within_excursions(xs, ys, (0, 0), (2, 5), 1, threshold=2) is True


def test_visits_never_visited():
    xs, ys = axis_path(2, 5, 2, 5, 10)  # starts at (2,0), never at origin
    assert visits_during_excursions(xs, ys, (0, 0), 2, 5, 2) == 0
    assert visits_within_excursions(xs, ys, (0, 0), (2, 5), 2, threshold=1) is True


def test_visits_insufficient_path():
    xs, ys = axis_path(0, 5, 2, 3)
    with pytest.raises(InsufficientPathError):
        visits_during_excursions(xs, ys, (0, 0), 2, 5, 2)


def test_visits_match_rescan():
    for seed in (2, 6):
        xs, ys = walk_positions(seed, 30000)
        try:
            fast = visits_during_excursions(xs, ys, (0, 0), 2, 8, 3)
        except InsufficientPathError:
            continue
        ref_visits, ref_completed = rescan_visits_during_excursions(
            xs, ys, (0, 0), 2, 8, 3
        )
        assert ref_completed == 3
        assert fast == ref_visits


def test_visits_validation():
    xs, ys = axis_path(0, 10)
    with pytest.raises(ValueError):
        visits_during_excursions(xs, ys, (0, 0), 5, 2, 1)
    with pytest.raises(ValueError):
        visits_during_excursions(xs, ys, (0, 0), 2, 5, 0)
    with pytest.raises(ValueError):
        visits_within_excursions(xs, ys, (0, 0), (2, 5), 1, threshold=0)


# -- centre geometry ----------------------------------------------------------


def test_scale_index_pinned():
    sched = factorial_radii(4)
    assert scale_index((0, 0), (200, 0), sched) == 3
    assert scale_index((200, 0), (0, 0), sched) == 3  # symmetric


def test_scale_index_far_apart_is_one():
    sched = factorial_radii(4)
    far = 2 * (sched.ratio(1) + 1)  # disjoint already at j=1
    assert scale_index((0, 0), (far, 0), sched) == 1


def test_scale_index_identical_raises():
    sched = factorial_radii(3)
    with pytest.raises(ValueError):
        scale_index((5, 5), (5, 5), sched)


def test_scale_index_too_close_raises():
    sched = factorial_radii(3)
    # ratio(m) = 1, so even the deepest scale needs distance >= 4
    with pytest.raises(ValueError):
        scale_index((0, 0), (3, 0), sched)


def test_pack_region_grid():
    pts = pack_region((0, 8, 0, 8), 4)
    assert set(pts) == {(x, y) for x in (0, 4, 8) for y in (0, 4, 8)}


def test_pack_region_single_point():
    assert pack_region((0, 5, 0, 5), 20) == [(0, 0)]


def test_pack_region_determinism():
    a = pack_region((0, 30, -10, 12), 3.5)
    b = pack_region((0, 30, -10, 12), 3.5)
    assert a == b


def test_pack_region_separation_and_maximality():
    rng = np.random.default_rng(12)
    for _ in range(10):
        x0 = int(rng.integers(-20, 0)); x1 = x0 + int(rng.integers(5, 25))
        y0 = int(rng.integers(-20, 0)); y1 = y0 + int(rng.integers(5, 25))
        sep = float(rng.uniform(1.5, 7))
        pts = pack_region((x0, x1, y0, y1), sep)
        t = open_radius_threshold(sep)
        arr = np.array(pts)
        # pairwise separation
        for i in range(len(pts)):
            d2 = ((arr - arr[i]) ** 2).sum(axis=1)
            d2[i] = 10**9
            assert d2.min() >= t
        # maximality: every site in the box is within sep of a chosen point
        for x in range(x0, x1 + 1):
            for y in range(y0, y1 + 1):
                d2 = ((arr - (x, y)) ** 2).sum(axis=1)
                assert d2.min() < t


def test_pack_region_validation():
    with pytest.raises(ValueError):
        pack_region((5, 0, 0, 5), 2)
    with pytest.raises(ValueError):
        pack_region((0, 5, 0, 5), 0.5)
