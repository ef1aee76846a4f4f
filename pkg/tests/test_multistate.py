import json

import numpy as np
import pytest

from prodint import (
    Interval,
    PathSpace,
    StatePath,
    exact_pathspace,
    forced_exit_scenario,
    load_pathspace,
    save_pathspace,
    two_state_scenario,
)

import oracle_enum

OC = Interval.open_closed
OO = Interval.open_open
CO = Interval.closed_open
CC = Interval.closed
PT = Interval.point

SHAPES = (OC, OO, CO, CC)


class TestStatePath:
    def test_right_continuous_lookup(self):
        path = StatePath(1, ((1.0, 2), (3.0, 3)))
        assert path.state_at(0.0) == 1
        assert path.state_at(1.0) == 2
        assert path.state_before(1.0) == 1
        assert path.state_before(0.0) == 1
        assert path.state_at(3.0) == 3

    def test_jump_lookup(self):
        path = StatePath(1, ((1.0, 2), (3.0, 3)))
        assert path.jump_at(1.0) == (1, 2)
        assert path.jump_at(2.0) is None

    def test_rejects_bad_paths(self):
        with pytest.raises(ValueError):
            StatePath(1, ((1.0, 1),))
        with pytest.raises(ValueError):
            StatePath(1, ((2.0, 2), (2.0, 3)))
        with pytest.raises(ValueError):
            StatePath(1, ((0.0, 2),))


class TestPathSpaceValidation:
    def test_rejects_unnormalized_weights(self):
        with pytest.raises(ValueError):
            PathSpace(2, 1.0, ((StatePath(1), 0.5),))

    def test_rejects_jump_off_grid(self):
        with pytest.raises(ValueError):
            PathSpace(2, 2.0, ((StatePath(1, ((1.5, 2),)), 1.0),), grid=(1.0,))

    def test_rejects_state_beyond_dim(self):
        with pytest.raises(ValueError):
            PathSpace(1, 2.0, ((StatePath(1, ((1.0, 2),)), 1.0),))

    def test_grid_defaults_to_event_times(self):
        ps = PathSpace(2, 2.0, ((StatePath(1, ((1.0, 2),)), 1.0),))
        assert ps.grid == (1.0,)


class TestOccupation:
    def test_idn_values(self, idn_space):
        assert idn_space.occupation(1, 3.0) == pytest.approx(0.25, abs=1e-12)
        assert idn_space.occupation(2, 3.0, "left") == pytest.approx(0.75, abs=1e-12)

    def test_matches_enumeration_oracle(self, idn_space):
        for j in (1, 2, 3):
            for t in (0.0, 0.5, 1.0, 2.0, 2.5, 3.0):
                assert idn_space.occupation(j, t) == oracle_enum.occupation(
                    oracle_enum.IDN_PATHS, j, t
                )
                assert idn_space.occupation(j, t, "left") == oracle_enum.occupation(
                    oracle_enum.IDN_PATHS, j, t, left=True
                )

    def test_total_probability(self, idn_space):
        for t in (0.0, 1.0, 1.5, 2.0, 3.0):
            assert idn_space.occupation_vector(t).sum() == pytest.approx(1.0, abs=1e-12)


class TestTransition:
    def test_idn_examples(self, idn_space):
        assert idn_space.transition(2, 2, OC(1, 3)) == pytest.approx(0.2, abs=1e-12)
        assert idn_space.transition(2, 2, OC(1, 2)) == 1.0

    def test_zero_conditioning_convention(self, idn_space):
        # nothing occupies state 3 before time 3
        assert idn_space.transition(3, 3, PT(0.5)) == 1.0
        assert idn_space.transition(3, 1, PT(0.5)) == 0.0

    def test_all_shapes_match_enumeration_oracle(self, idn_space):
        for make in SHAPES:
            for lo, hi in ((0.5, 1.0), (1.0, 2.0), (1.0, 3.0), (2.0, 3.0)):
                a = make(lo, hi)
                shape = (lo, hi, a.lo_closed, a.hi_closed)
                for j in (1, 2, 3):
                    for k in (1, 2, 3):
                        assert idn_space.transition(j, k, a) == oracle_enum.conditional(
                            oracle_enum.IDN_PATHS, j, k, shape
                        )

    def test_rows_are_stochastic(self, idn_space):
        for a in (OC(0, 3), CC(1, 2), PT(3.0), OO(0.5, 2.5)):
            rows = idn_space.transition_matrix(a).sum(axis=1)
            np.testing.assert_allclose(rows, 1.0, atol=1e-12)


class TestCountingAndIndicatorMeans:
    def test_counting_examples(self, idn_space):
        assert idn_space.counting_mean(1, 2, OC(0, 3)) == pytest.approx(0.75, abs=1e-12)
        assert idn_space.counting_mean(2, 3, OC(0, 3)) == pytest.approx(0.45, abs=1e-12)
        assert idn_space.counting_mean(1, 2, OO(2.0, 2.5)) == 0.0

    def test_indicator_examples(self, idn_space):
        assert idn_space.indicator_mean(1, 2, OC(0, 1)) == pytest.approx(0.5, abs=1e-12)
        assert idn_space.indicator_mean(1, 2, OC(0, 3)) == pytest.approx(0.3, abs=1e-12)

    def test_singleton_indicator_equals_count(self, idn_space):
        for t in (1.0, 2.0, 3.0):
            for j, k in ((1, 2), (2, 3), (1, 3)):
                assert idn_space.indicator_mean(j, k, PT(t)) == idn_space.counting_mean(
                    j, k, PT(t)
                )

    def test_rejects_diagonal_pair(self, idn_space):
        with pytest.raises(ValueError):
            idn_space.counting_mean(1, 1, OC(0, 3))
        with pytest.raises(ValueError):
            idn_space.indicator_mean(2, 2, OC(0, 3))


class TestHazard:
    def test_idn_atoms(self, idn_space):
        lam = idn_space.hazard_matrix()
        atoms = dict((t, m) for t, m in lam.atoms)
        assert atoms[1.0][0, 1] == pytest.approx(0.5, abs=1e-12)
        assert atoms[2.0][0, 1] == pytest.approx(0.5, abs=1e-12)
        assert atoms[3.0][1, 2] == pytest.approx(0.6, abs=1e-12)
        for t, matrix in lam.atoms:
            np.testing.assert_allclose(matrix.sum(axis=1), 0.0, atol=1e-15)
            assert matrix[1, 2] == pytest.approx(
                oracle_enum.hazard_atom(oracle_enum.IDN_PATHS, 2, 3, t), abs=1e-15
            )

    def test_no_jumps_means_zero_hazard(self):
        ps = PathSpace(2, 1.0, ((StatePath(1), 0.5), (StatePath(2), 0.5)))
        assert ps.hazard_matrix().atoms == ()

    def test_two_state_atom(self):
        ps = exact_pathspace(two_state_scenario())
        lam = ps.hazard_matrix()
        assert len(lam.atoms) == 1
        assert lam.atoms[0][1][0, 1] == 0.5

    def test_exit_hazard_totals_rows(self, idn_space):
        lam = idn_space.hazard_matrix()
        exit1 = idn_space.exit_hazard(1)
        assert exit1(OC(0, 3))[0, 0] == pytest.approx(1.0, abs=1e-12)
        assert exit1(OC(0, 3))[0, 0] == pytest.approx(-lam(OC(0, 3))[0, 0], abs=1e-12)


class TestIteratedProduct:
    def test_full_cuts_reproduce_occupation(self, idn_space):
        got = idn_space.iterated_product(0.0, 3.0, (1.0, 2.0, 3.0))
        np.testing.assert_allclose(got, [0.25, 0.30, 0.45], atol=1e-12)

    def test_single_cell(self, idn_space):
        got = idn_space.iterated_product(0.0, 3.0)
        np.testing.assert_allclose(got, [0.25, 0.30, 0.45], atol=1e-12)

    def test_empty_product(self, idn_space):
        np.testing.assert_allclose(
            idn_space.iterated_product(2.0, 2.0), idn_space.occupation_vector(2.0)
        )

    def test_intermediate_cuts_also_exact(self, idn_space):
        # the iterated identity holds for any cut set, not only event times
        got = idn_space.iterated_product(0.0, 3.0, (0.5, 2.5))
        np.testing.assert_allclose(got, [0.25, 0.30, 0.45], atol=1e-12)

    def test_rejects_unsorted_cuts(self, idn_space):
        with pytest.raises(ValueError):
            idn_space.iterated_product(0.0, 3.0, (2.0, 1.0))
        with pytest.raises(ValueError):
            idn_space.iterated_product(0.0, 3.0, (4.0,))


class TestOccupationLowerBound:
    def test_equality_without_inflow(self, idn_space):
        lhs, rhs, ok = idn_space.occupation_lower_bound(1, 0.0, 3.0)
        assert ok
        assert lhs == pytest.approx(0.25, abs=1e-12)
        assert rhs == pytest.approx(0.25, abs=1e-12)

    def test_strict_with_inflow(self, idn_space):
        lhs, rhs, ok = idn_space.occupation_lower_bound(2, 1.0, 3.0)
        assert ok
        assert lhs == pytest.approx(0.3, abs=1e-12)
        assert rhs == pytest.approx(0.2, abs=1e-12)

    def test_unoccupied_start(self, idn_space):
        lhs, rhs, ok = idn_space.occupation_lower_bound(3, 0.0, 2.0)
        assert ok and rhs == 0.0


class TestExtinction:
    def test_idn_never_extinguishes(self, idn_space):
        for j in (1, 2, 3):
            report = idn_space.extinction_report(j)
            assert not report.has_extinction and report.ok

    def test_forced_exit_boundary(self):
        ps = exact_pathspace(forced_exit_scenario())
        report = ps.extinction_report(1)
        assert report.has_extinction
        boundary = report.boundaries[0]
        assert boundary.time == 1.0
        assert boundary.exit_mass == 1.0
        assert report.ok


class TestTransformAgreesWithProductIntegral:
    """The transition function's multiplicative transform must reproduce the
    hazard's product integral on every subinterval, Markov or not."""

    def probe(self, ps, rng, draws=12):
        from prodint import matrix_norm, multiplicative_transform, product_integral
        from prodint.checks import random_subinterval

        hazard = ps.hazard_matrix()
        transition = ps.transition_if()
        for _ in range(draws):
            a = random_subinterval(rng, tau=ps.tau)
            gap = matrix_norm(
                multiplicative_transform(transition, a) - product_integral(hazard, a)
            )
            assert gap < 1e-10, (a, gap)

    def test_on_illness_death(self, idn_space, rng):
        self.probe(idn_space, rng, draws=30)

    def test_on_random_laws(self, rng):
        from prodint.checks import hazard_defect_checks, random_corpus

        for ps in random_corpus(rng, 20):
            self.probe(ps, rng, draws=5)
            assert all(r.passed for r in hazard_defect_checks(ps, depths=3))


class TestSerialization:
    def test_round_trip(self, idn_space, tmp_path):
        target = tmp_path / "space.json"
        save_pathspace(idn_space, target)
        loaded = load_pathspace(target)
        assert loaded == idn_space
        raw = json.loads(target.read_text())
        assert set(raw) == {"d", "tau", "grid", "paths"}
        assert raw["d"] == 3 and raw["grid"] == [1.0, 2.0, 3.0]

    def test_enumerated_matches_manual(self, idn_space, idn_enumerated):
        manual = {(p.initial_state, p.jumps): w for p, w in idn_space.paths}
        produced = {(p.initial_state, p.jumps): w for p, w in idn_enumerated.paths}
        assert set(manual) == set(produced)
        for key, weight in manual.items():
            assert produced[key] == pytest.approx(weight, abs=1e-15)
