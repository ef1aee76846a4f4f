import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prodint import (
    CensoringConfig,
    EventHistory,
    FormatError,
    EstimationError,
    aalen_johansen,
    empirical_counts,
    empirical_occupancy,
    estimate,
    illness_death_scenario,
    nelson_aalen,
    occupation_estimate,
    read_event_histories,
    simulate_sample,
    write_event_histories,
)
from prodint.estimators import write_occupation_csv


def subject(i, init, *jumps):
    return EventHistory(i, init, tuple(jumps))


class TestEmpiricalMeans:
    def test_direct_count(self):
        sample = [subject(0, 1, (1.0, 2)), subject(1, 1)]
        assert empirical_counts(sample, 1, 2, 2.0) == 0.5

    def test_filtered_transition_is_invisible(self):
        # unobserved across t=1: the underlying jump never shows up
        sample = [subject(0, 1, (0.5, 0), (1.5, 2)), subject(1, 1, (1.0, 2))]
        assert empirical_counts(sample, 1, 2, 3.0) == 0.5

    def test_occupancy(self):
        sample = [subject(0, 1), subject(1, 1)]
        assert empirical_occupancy(sample, 1, 2.0) == 1.0

    def test_occupancy_excludes_unobserved(self):
        sample = [subject(0, 0), subject(1, 1)]
        assert empirical_occupancy(sample, 1, 0.0) == 0.5

    def test_empty_sample_rejected(self):
        with pytest.raises(EstimationError):
            empirical_counts([], 1, 2, 1.0)
        with pytest.raises(EstimationError):
            empirical_occupancy([], 1, 1.0)

    def test_uncensored_monte_carlo_matches_oracle_means(self):
        sample = simulate_sample(illness_death_scenario(), CensoringConfig("none"), 1000, 17)
        assert empirical_counts(sample, 1, 2, 3.0) == pytest.approx(0.75, abs=0.05)
        assert empirical_occupancy(sample, 2, 3.0) == pytest.approx(0.30, abs=0.05)


class TestNelsonAalen:
    def test_risk_set_of_one(self):
        grid = nelson_aalen([subject(0, 1, (1.0, 2))], dim=2)
        assert grid.times == (1.0,)
        assert grid.hazard_step_at(1.0)[0, 1] == 1.0

    def test_risk_set_of_two(self):
        grid = nelson_aalen([subject(0, 1, (1.0, 2)), subject(1, 1)], dim=2)
        step = grid.hazard_step_at(1.0)
        assert step[0, 1] == 0.5
        assert step[0, 0] == -0.5

    def test_rows_sum_to_zero(self):
        sample = simulate_sample(
            illness_death_scenario(), CensoringConfig("state_filtering_conforming", q=0.7), 500, 5
        )
        grid = nelson_aalen(sample, dim=3)
        for step in grid.hazard_steps:
            np.testing.assert_allclose(step.sum(axis=1), 0.0, atol=1e-15)
            off = step.copy()
            np.fill_diagonal(off, 0.0)
            assert (off >= 0).all()

    def test_conforming_filter_preserves_hazard(self):
        sample = simulate_sample(
            illness_death_scenario(),
            CensoringConfig("state_filtering_conforming", q=0.7),
            10_000,
            seed=7,
        )
        grid = nelson_aalen(sample, dim=3)
        assert grid.hazard_step_at(3.0)[1, 2] == pytest.approx(0.6, abs=0.03)


class TestAalenJohansen:
    def test_no_events_gives_identity(self):
        grid = aalen_johansen(nelson_aalen([subject(0, 1)], dim=2))
        np.testing.assert_array_equal(grid.transition_at(5.0), np.eye(2))

    def test_single_step(self):
        grid = aalen_johansen(nelson_aalen([subject(0, 1, (1.0, 2)), subject(1, 1)], dim=2))
        np.testing.assert_allclose(grid.transition_at(1.0)[0], [0.5, 0.5])

    def test_row_stochastic_under_filtering(self):
        sample = simulate_sample(
            illness_death_scenario(), CensoringConfig("state_filtering_conforming", q=0.7), 2000, 9
        )
        grid = aalen_johansen(nelson_aalen(sample, dim=3))
        for mat in grid.transition:
            assert (mat >= -1e-12).all()
            np.testing.assert_allclose(mat.sum(axis=1), 1.0, atol=1e-12)


class TestOccupationEstimate:
    def test_initial_distribution_renormalized(self):
        sample = [subject(0, 1), subject(1, 0)]
        grid = occupation_estimate(sample, nelson_aalen(sample, dim=2))
        np.testing.assert_allclose(grid.p0, [1.0, 0.0])

    def test_requires_someone_observed_at_zero(self):
        sample = [subject(0, 0, (1.0, 1), (2.0, 2))]
        with pytest.raises(EstimationError):
            occupation_estimate(sample, nelson_aalen(sample, dim=2))

    def test_uncensored_matches_proportions_exactly(self):
        sample = simulate_sample(illness_death_scenario(), CensoringConfig("none"), 200, 3)
        grid = estimate(sample, dim=3)
        for t in (0.0, 1.0, 1.5, 2.0, 3.0):
            observed = [empirical_occupancy(sample, j, t) for j in (1, 2, 3)]
            np.testing.assert_allclose(grid.occupation_at(t), observed, atol=1e-12)

    def test_filtered_estimate_approaches_oracle(self):
        sample = simulate_sample(
            illness_death_scenario(),
            CensoringConfig("state_filtering_conforming", q=0.7),
            10_000,
            seed=7,
        )
        grid = estimate(sample, dim=3)
        np.testing.assert_allclose(grid.occupation_at(3.0), [0.25, 0.30, 0.45], atol=0.02)

    def test_step_evaluation_extends_constantly(self):
        sample = [subject(0, 1, (1.0, 2))]
        grid = estimate(sample, dim=2)
        np.testing.assert_array_equal(grid.occupation_at(0.5), grid.p0)
        np.testing.assert_array_equal(grid.occupation_at(1.0), grid.occupation_at(99.0))

    def test_appending_subjects_moves_counts_by_one_over_n(self):
        base = [subject(i, 1, (1.0, 2)) for i in range(4)]
        extra = subject(4, 1)
        before = empirical_counts(base, 1, 2, 2.0)
        after = empirical_counts(base + [extra], 1, 2, 2.0)
        assert abs(after - before) <= max(before, 1.0) / (len(base) + 1)
        grid = estimate(base + [extra], dim=2)
        np.testing.assert_allclose(grid.transition_at(1.0).sum(axis=1), 1.0, atol=1e-12)


dyadic_time = st.integers(1, 8).map(lambda k: k / 2.0)


@st.composite
def uncensored_samples(draw):
    n = draw(st.integers(1, 12))
    sample = []
    for i in range(n):
        init = draw(st.integers(1, 3))
        times = sorted(draw(st.frozensets(dyadic_time, max_size=3)))
        jumps = []
        state = init
        for t in times:
            to = draw(st.sampled_from([s for s in (1, 2, 3) if s != state]))
            jumps.append((t, to))
            state = to
        sample.append(EventHistory(i, init, tuple(jumps)))
    return sample


@settings(max_examples=200, deadline=None)
@given(uncensored_samples())
def test_uncensored_identity_property(sample):
    grid = estimate(sample, dim=3)
    for t in (0.0,) + grid.times:
        observed = [empirical_occupancy(sample, j, t) for j in (1, 2, 3)]
        assert np.abs(grid.occupation_at(t) - np.array(observed)).max() <= 1e-12


class TestCsvRoundTrip:
    def test_round_trip(self, tmp_path):
        sample = [
            subject(0, 1, (0.5, 0), (1.5, 2)),
            subject(1, 2),
            subject(2, 1, (1.0, 2), (3.0, 3)),
        ]
        path = tmp_path / "sample.csv"
        rows = write_event_histories(path, sample)
        assert rows == 3 + sum(len(s.jumps) for s in sample)
        assert read_event_histories(path) == sample

    def test_header_enforced(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n0,0.0,1\n")
        with pytest.raises(FormatError, match="line 1"):
            read_event_histories(path)

    def test_bad_row_names_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("subject,time,state\n0,0.0,1\n0,oops,2\n")
        with pytest.raises(FormatError, match="line 3"):
            read_event_histories(path)

    def test_state_above_dimension_names_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("subject,time,state\n0,0.0,1\n0,1.0,99\n")
        with pytest.raises(FormatError, match="line 3"):
            read_event_histories(path, max_state=3)

    def test_missing_baseline_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("subject,time,state\n0,1.0,1\n")
        with pytest.raises(FormatError, match="time-0"):
            read_event_histories(path)

    def test_non_increasing_times_name_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("subject,time,state\n0,0.0,1\n0,2.0,2\n0,1.0,1\n")
        with pytest.raises(FormatError, match="line 4"):
            read_event_histories(path)

    def test_occupation_csv(self, tmp_path):
        sample = [subject(0, 1, (1.0, 2)), subject(1, 1)]
        grid = estimate(sample, dim=2)
        out = tmp_path / "occ.csv"
        write_occupation_csv(out, grid)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "t,p_1,p_2"
        assert lines[1].startswith("0.0,1.0,")
        assert len(lines) == 2 + len(grid.times)
