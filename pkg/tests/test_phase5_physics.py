"""Tests for Phase 5: dephasing, fidelity tracking and the density-matrix
cross-check."""

import math

import numpy as np
import pytest

from src.models.switch import EprPair, SwitchParams
from src.physics import (
    age_cutoff_ns,
    current_fidelity,
    dephase_prob,
    pair_fidelity,
    should_discard,
    swap_fidelity,
    swapped_pair,
)
from src.physics.oracle import stored_pair_fidelity, swap_fidelity_oracle

T2 = 1_000_000.0


class TestDephasing:
    """Tests for the closed-form formulas."""

    def test_no_dwell(self):
        """No time in memory, no flip."""
        assert dephase_prob(0.0, T2) == 0.0

    def test_long_dwell(self):
        """Flip probability tends to one half."""
        assert dephase_prob(1e12, T2) == pytest.approx(0.5)

    def test_one_T2(self):
        """dt = T2 flips with probability (1 - 1/e) / 2."""
        assert dephase_prob(T2, T2) == pytest.approx(0.3160603, abs=1e-7)

    def test_negative_dwell(self):
        """Negative dwell times are rejected."""
        with pytest.raises(ValueError):
            dephase_prob(-1.0, T2)

    def test_infinite_T2(self):
        """Unbounded T2 never dephases."""
        assert dephase_prob(1e9, math.inf) == 0.0
        assert pair_fidelity([1e9, 1e9], math.inf) == 1.0

    def test_fresh_pair(self):
        """All dwell times zero gives fidelity 1."""
        assert pair_fidelity([0.0, 0.0], T2) == 1.0

    def test_single_qubit(self):
        """One qubit at T2 gives (1 + 1/e) / 2."""
        assert pair_fidelity([T2, 0.0], T2) == pytest.approx(0.6839397, abs=1e-7)

    def test_two_qubits(self):
        """Both qubits at T2 give (1 + 1/e^2) / 2."""
        assert pair_fidelity([T2, T2], T2) == pytest.approx(0.5676676, abs=1e-7)

    def test_swap_of_fresh_pairs(self):
        """Swapping fresh pairs keeps fidelity 1."""
        assert swap_fidelity([0, 0], [0, 0], T2) == 1.0

    def test_swap_one_aged_qubit(self):
        """One qubit at T2 among four gives (1 + 1/e) / 2."""
        assert swap_fidelity([T2, 0], [0, 0], T2) == pytest.approx((1 + math.exp(-1)) / 2)

    def test_cutoff(self):
        """Threshold 0.9 with T2 = 1 ms cuts off at 223.14 us."""
        assert age_cutoff_ns(0.9, T2) / 1000 == pytest.approx(223.14, abs=0.01)
        assert pair_fidelity([age_cutoff_ns(0.9, T2)], T2) == pytest.approx(0.9)

    def test_cutoff_two_clocks(self):
        """Two dephasing qubits halve the cutoff."""
        assert age_cutoff_ns(0.9, T2, clocks=2) == pytest.approx(age_cutoff_ns(0.9, T2) / 2)

    def test_cutoff_floor(self):
        """Threshold 0.5 never cuts off."""
        assert math.isinf(age_cutoff_ns(0.5, T2))


class TestOracle:
    """Cross-checks against explicit density matrices."""

    def test_pair_against_density_matrix(self):
        """Closed form matches the 4x4 dephasing channel."""
        rng = np.random.default_rng(13)
        for dwell in rng.uniform(0, 3 * T2, (1000, 2)):
            assert pair_fidelity(dwell, T2) == pytest.approx(stored_pair_fidelity(dwell, T2), abs=1e-10)

    def test_two_qubit_example(self):
        """Oracle gives (1 + 1/e^2) / 2 for two qubits at T2."""
        assert stored_pair_fidelity([T2, T2], T2) == pytest.approx(0.5676676, abs=1e-7)

    def test_swap_single_aged_qubit(self):
        """The 16x16 swap oracle agrees on one aged qubit."""
        assert swap_fidelity_oracle([T2, 0], [0, 0], T2) == pytest.approx((1 + math.exp(-1)) / 2, abs=1e-10)

    def test_swap_against_density_matrix(self):
        """Closed-form swap fidelity matches Bell measurement with correction."""
        rng = np.random.default_rng(29)
        for dwell in rng.uniform(0, 2 * T2, (200, 4)):
            expected = swap_fidelity_oracle(dwell[:2], dwell[2:], T2)
            assert swap_fidelity(dwell[:2], dwell[2:], T2) == pytest.approx(expected, abs=1e-10)


class TestTrackedPairs:
    """Tests for fidelity of live pairs."""

    def params(self, **kw) -> SwitchParams:
        return SwitchParams(K=2, p=(0.9,), q=0.9, T2_ns=1000.0, fidelity_threshold=0.75, **kw)

    def test_link_pair_ages(self):
        """A link pair decays on both qubits."""
        pair = EprPair(1, "link", (0,), (0.0, 0.0))
        assert current_fidelity(pair, 500.0, self.params()) == pytest.approx((1 + math.exp(-1)) / 2)

    def test_switch_side_only(self):
        """Without end-node dephasing only the switch-side qubit decays."""
        pair = EprPair(1, "link", (0,), (0.0, 0.0))
        sp = self.params(end_node_dephasing=False)
        assert current_fidelity(pair, 500.0, sp) == pytest.approx((1 + math.exp(-0.5)) / 2)

    def test_swapped_pair_keeps_history(self):
        """The swapped pair carries the decay of the measured qubits."""
        sp = self.params()
        a = EprPair(1, "link", (1,), (100.0, 100.0))
        b = EprPair(2, "link", (0,), (200.0, 200.0))
        e2e = swapped_pair(a, b, 300.0, sp, 3)
        assert e2e.kind == "e2e"
        assert e2e.nodes == (0, 1)
        assert e2e.qubit_birth_ns == (200.0, 100.0)
        expected = swap_fidelity([200.0, 200.0], [100.0, 100.0], 1000.0)
        assert current_fidelity(e2e, 300.0, sp) == pytest.approx(expected)

    def test_swapped_pair_keeps_decaying(self):
        """End-node qubits continue to dephase after the swap."""
        sp = self.params()
        a = EprPair(1, "link", (0,), (0.0, 0.0))
        b = EprPair(2, "link", (1,), (0.0, 0.0))
        e2e = swapped_pair(a, b, 0.0, sp, 3)
        assert current_fidelity(e2e, 0.0, sp) == 1.0
        assert current_fidelity(e2e, 100.0, sp) == pytest.approx((1 + math.exp(-0.2)) / 2)

    def test_discard_rule(self):
        """Pairs are dropped once below the threshold, never when fresh."""
        sp = self.params()
        pair = EprPair(1, "link", (0,), (0.0, 0.0))
        assert not should_discard(pair, 0.0, sp)
        cutoff = age_cutoff_ns(0.75, 1000.0, clocks=2)
        assert not should_discard(pair, cutoff * 0.99, sp)
        assert should_discard(pair, cutoff * 1.01, sp)

    def test_half_threshold_never_discards(self):
        """Threshold 0.5 keeps every pair."""
        sp = SwitchParams(K=2, p=(0.9,), q=0.9, T2_ns=1000.0, fidelity_threshold=0.5)
        assert not should_discard(EprPair(1, "link", (0,), (0.0, 0.0)), 1e9, sp)
