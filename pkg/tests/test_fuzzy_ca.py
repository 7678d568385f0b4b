"""Unit tests for the fuzzy CA engine.

The worked trajectory and the dependency matrix are frozen reference
values for the rule vector <238, 254, 238, 252>; they were computed by
hand from the bounded-sum semantics before the implementation existed.
"""

import numpy as np
import pytest

from matchdna import fuzzy_ca
from matchdna.fuzzy_ca import (
    COMPLEMENT_OF,
    RuleSet,
    SUPPORTED_RULES,
    dependency_matrix,
    eval_rule,
    evolve,
    step,
)

REFERENCE_RULES = [238, 254, 238, 252]
REFERENCE_START = [0.80, 0.20, 0.20, 0.00]
REFERENCE_TRAJECTORY = [
    [0.80, 0.20, 0.20, 0.00],
    [1.00, 1.00, 0.20, 0.20],
    [1.00, 1.00, 0.40, 0.40],
    [1.00, 1.00, 0.80, 0.80],
    [1.00, 1.00, 1.00, 1.00],
]


def brute_step(state, rules):
    """Scalar re-derivation of one update, used as the oracle for `step`."""
    out = []
    for i, rule in enumerate(rules):
        left = state[i - 1] if i > 0 else 0.0
        right = state[i + 1] if i + 1 < len(state) else 0.0
        out.append(eval_rule(rule, left, state[i], right))
    return np.array(out)


class TestEvalRule:
    def test_identity_rules(self):
        assert eval_rule(204, 0.3, 0.7, 0.9) == pytest.approx(0.7)
        assert eval_rule(170, 0.3, 0.7, 0.9) == pytest.approx(0.9)
        assert eval_rule(240, 0.3, 0.7, 0.9) == pytest.approx(0.3)

    def test_bounded_sum_saturates(self):
        assert eval_rule(254, 0.5, 0.6, 0.7) == 1.0
        assert eval_rule(238, 0.0, 0.5, 0.4) == pytest.approx(0.9)

    def test_constant_rules(self):
        assert eval_rule(0, 0.9, 0.9, 0.9) == 0.0
        assert eval_rule(255, 0.9, 0.9, 0.9) == 1.0

    def test_rejects_unsupported_rule(self):
        with pytest.raises(ValueError):
            eval_rule(30, 0.1, 0.2, 0.3)

    def test_rejects_out_of_range_input(self):
        with pytest.raises(ValueError):
            eval_rule(204, 0.0, 1.5, 0.0)

    def test_complement_duality_spot(self):
        rng = np.random.default_rng(7)
        for base, comp in COMPLEMENT_OF.items():
            l, s, r = rng.random(3)
            assert eval_rule(comp, l, s, r) == pytest.approx(
                1.0 - eval_rule(base, l, s, r), abs=1e-12)


class TestStep:
    def test_reference_trajectory_stepwise(self):
        state = np.array(REFERENCE_START)
        for expected in REFERENCE_TRAJECTORY[1:]:
            state = step(state, REFERENCE_RULES)
            np.testing.assert_allclose(state, expected, atol=1e-9)

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(123)
        rules_pool = sorted(SUPPORTED_RULES)
        for _ in range(200):
            n = rng.integers(1, 12)
            rules = rng.choice(rules_pool, size=n)
            state = rng.random(n)
            np.testing.assert_allclose(step(state, rules),
                                       brute_step(state, rules), atol=1e-12)

    def test_batch_rows_independent(self):
        rng = np.random.default_rng(5)
        rules = [238, 254, 240, 204, 252]
        batch = rng.random((20, 5))
        stepped = step(batch, rules)
        for i in range(20):
            np.testing.assert_allclose(stepped[i], step(batch[i], rules))

    def test_null_boundary(self):
        # leftmost cell under a left-reading rule sees 0 outside the array
        assert step(np.array([0.4, 0.0]), [240, 240])[0] == 0.0
        assert step(np.array([0.0, 0.4]), [170, 170])[1] == 0.0

    def test_size_mismatch_rejected(self):
        with pytest.raises(ValueError):
            step(np.zeros(3), [204, 204])


class TestDependencyMatrix:
    def test_reference_matrix(self):
        expected = np.array([
            [1, 1, 0, 0],
            [1, 1, 1, 0],
            [0, 0, 1, 1],
            [0, 0, 1, 1],
        ], dtype=bool)
        np.testing.assert_array_equal(dependency_matrix(REFERENCE_RULES), expected)

    def test_complemented_rules_share_dependencies(self):
        for base, comp in COMPLEMENT_OF.items():
            a = dependency_matrix([base, base, base])
            b = dependency_matrix([comp, comp, comp])
            np.testing.assert_array_equal(a, b)

    def test_boundary_rows_drop_missing_neighbors(self):
        dep = dependency_matrix([254, 254])
        np.testing.assert_array_equal(dep, np.array([[1, 1], [1, 1]], dtype=bool))


class TestEvolve:
    def test_reference_trajectory_terminal(self):
        traj = evolve(REFERENCE_START, REFERENCE_RULES, max_steps=50)
        assert traj.terminal.kind == "fixed_point"
        assert traj.terminal.index == 4
        np.testing.assert_allclose(traj.states, REFERENCE_TRAJECTORY, atol=1e-9)
        np.testing.assert_allclose(traj.attractor, [1, 1, 1, 1])

    def test_fixed_point_immediate(self):
        traj = evolve([0.0, 0.0, 0.0], [0, 0, 0], max_steps=10)
        assert traj.terminal.kind == "fixed_point"
        assert traj.terminal.index == 0

    def test_cycle_detected(self):
        # rule 51 is NOT(self): any non-half state alternates with period 2
        traj = evolve([0.2, 0.8], [51, 51], max_steps=10)
        assert traj.terminal.kind == "cycle"
        assert traj.terminal.period == 2
        # representative is the lexicographically smaller of the pair
        np.testing.assert_allclose(traj.attractor, [0.2, 0.8])
        assert traj.converged

    def test_truncated(self):
        # cell 1 climbs by 1e-3 per step: never fixed, never revisits
        traj = evolve([1e-3, 0.0], [204, 252], max_steps=5)
        assert traj.terminal.kind == "truncated"
        assert not traj.converged
        assert len(traj.states) == 6

    def test_rejects_bad_state(self):
        with pytest.raises(ValueError):
            evolve([0.5, 1.5], [204, 204])


class TestTerminalStates:
    def test_matches_evolve_per_row(self):
        rng = np.random.default_rng(77)
        rules = [254, 238, 252, 204, 240]
        batch = rng.random((32, 5))
        terms, conv = fuzzy_ca.terminal_states(batch, rules, max_steps=100)
        for i in range(32):
            traj = evolve(batch[i], rules, max_steps=100)
            np.testing.assert_allclose(terms[i], traj.attractor, atol=1e-9)
            assert conv[i] == traj.converged

    def test_agrees_with_evolve_on_cycling_rules(self):
        # complemented rules produce 2- and 4-cycles; the batch path must
        # land on the same representatives as the per-pattern path
        rng = np.random.default_rng(99)
        pool = sorted(SUPPORTED_RULES)
        for _ in range(40):
            n = int(rng.integers(2, 7))
            rules = rng.choice(pool, size=n)
            batch = rng.random((10, n))
            terms, conv = fuzzy_ca.terminal_states(batch, rules, max_steps=150)
            for i in range(10):
                traj = evolve(batch[i], rules, max_steps=150)
                assert conv[i] == traj.converged
                if conv[i]:
                    np.testing.assert_allclose(terms[i], traj.attractor, atol=1e-9)

    def test_cycle_rows_fall_back(self):
        # both rows alternate under NOT(self); representatives are the
        # lexicographically smaller state of each 2-cycle
        batch = np.array([[0.2, 0.8], [0.0, 0.0]])
        terms, conv = fuzzy_ca.terminal_states(batch, [51, 51], max_steps=50)
        assert conv.all()
        np.testing.assert_allclose(terms[0], [0.2, 0.8])
        np.testing.assert_allclose(terms[1], [0.0, 0.0])


class TestRuleVectorText:
    def test_round_trip(self):
        text = "238, 254,238,252"
        rules = fuzzy_ca.parse_rule_vector(text)
        assert rules == REFERENCE_RULES
        assert fuzzy_ca.format_rule_vector(rules) == "238,254,238,252"

    def test_rejects_unknown(self):
        with pytest.raises(ValueError):
            fuzzy_ca.parse_rule_vector("238,30")
