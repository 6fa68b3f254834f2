import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rai import MfdrCounts, WealthLedger, mfdr_estimate, pass_parameters
from rai.errors import InsufficientWealth
from rai.wealth import ALPHA_FLOOR


class TestPassParameters:

    def test_threshold_formula(self):
        tlvl, _ = pass_parameters(2000, 1)
        assert tlvl == pytest.approx(31.622776601683796, abs=1e-12)

    def test_first_pass_alpha_underflows_gracefully(self):
        _, alpha = pass_parameters(2000, 1)
        # 2*Phi(-31.62) is astronomically small but must stay positive
        assert 0 < alpha < 1e-100
        assert alpha == pytest.approx(1.7958327848009244e-219, rel=1e-12)

    def test_alpha_floor(self):
        _, alpha = pass_parameters(10**6, 1)
        assert alpha == ALPHA_FLOOR

    def test_standard_level_at_critical_t(self):
        # whatever (n, s) lands the threshold at 1.96 must price it at 0.05
        tlvl = 1.959964
        n = 100
        s = 2 * math.log2(math.sqrt(n) / tlvl)
        t2, alpha = pass_parameters(n, s)
        assert t2 == pytest.approx(tlvl, rel=1e-12)
        assert alpha == pytest.approx(0.05, abs=1e-6)

    def test_two_passes_halve_threshold(self):
        for s in (1, 2, 3):
            t1, _ = pass_parameters(500, s)
            t2, _ = pass_parameters(500, s + 2)
            assert t2 == pytest.approx(t1 / 2.0, rel=1e-12)

    def test_frozen_values(self):
        tlvl, alpha = pass_parameters(100, 4)
        assert tlvl == pytest.approx(2.5, abs=1e-12)
        assert alpha == pytest.approx(0.012419330651552278, rel=1e-12)
        tlvl, alpha = pass_parameters(100, 6)
        assert tlvl == pytest.approx(1.25, abs=1e-12)
        assert alpha == pytest.approx(0.21129954733371056, rel=1e-12)

    @given(st.integers(10, 100000), st.integers(1, 40))
    @settings(max_examples=200, deadline=None)
    def test_monotone_in_pass_index(self, n, s):
        t1, a1 = pass_parameters(n, s)
        t2, a2 = pass_parameters(n, s + 1)
        assert t2 < t1
        assert 0 < a1 < 1
        # alpha strictly increases until both sides hit the clamp
        assert a2 > a1 or a1 == a2 == ALPHA_FLOOR

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            pass_parameters(0, 1)
        with pytest.raises(ValueError):
            pass_parameters(100, 0)


class TestWealthLedger:

    def test_spend_reduces_wealth(self):
        led = WealthLedger()
        led.spend(0.01, test_id=0, pass_index=1)
        assert led.wealth == pytest.approx(0.24)

    def test_overdraft_raises_and_commits_nothing(self):
        led = WealthLedger(initial_wealth=0.005)
        with pytest.raises(InsufficientWealth):
            led.spend(0.01, test_id=0, pass_index=1)
        assert led.wealth == pytest.approx(0.005)
        assert led.events == ()

    def test_two_spends(self):
        led = WealthLedger()
        led.spend(0.1, 0, 1)
        led.spend(0.1, 1, 1)
        assert led.wealth == pytest.approx(0.05)

    def test_earn_after_spend(self):
        led = WealthLedger()
        led.spend(0.01, 0, 1)
        led.earn(0)
        assert led.wealth == pytest.approx(0.29)
        assert led.rejections == 1
        assert led.events[-1].rejected

    def test_earn_requires_matching_last_spend(self):
        led = WealthLedger()
        led.spend(0.01, 0, 1)
        with pytest.raises(ValueError):
            led.earn(99)
        led.earn(0)
        with pytest.raises(ValueError):
            led.earn(0)  # already settled

    def test_identity_with_k_rejections(self):
        led = WealthLedger()
        spends = [0.02, 0.01, 0.03, 0.015]
        for i, a in enumerate(spends):
            led.spend(a, i, 1)
            if i % 2 == 0:
                led.earn(i)
        expected = 0.25 - sum(spends) + 0.05 * 2
        assert led.wealth == pytest.approx(expected, abs=1e-12)

    def test_replay_reconstructs_exactly(self):
        led = WealthLedger(initial_wealth=0.4, payout=0.07)
        led.spend(0.05, 0, 1)
        led.earn(0)
        led.spend(0.02, 1, 2)
        led.spend(0.11, 2, 2)
        led.earn(2)
        assert led.replay() == led.wealth

    @given(st.lists(st.tuples(st.floats(1e-6, 0.2), st.booleans()),
                    max_size=40))
    @settings(max_examples=100, deadline=None)
    def test_ledger_invariants_under_random_traffic(self, moves):
        """Wealth identity, no overdraft, replay exactness."""
        led = WealthLedger()
        for i, (alpha, hit) in enumerate(moves):
            if led.wealth < alpha:
                with pytest.raises(InsufficientWealth):
                    led.spend(alpha, i, 1)
                break
            led.spend(alpha, i, 1)
            if hit:
                led.earn(i)
        identity = (led.initial_wealth - led.total_spent()
                    + led.payout * led.rejections)
        assert led.wealth == pytest.approx(identity, abs=1e-12)
        assert led.wealth >= 0
        assert led.replay() == led.wealth
        assert led.rejections == sum(e.rejected for e in led.events)
        assert led.total_spent() <= (led.initial_wealth
                                     + led.payout * led.rejections + 1e-12)

    def test_invalid_construction(self):
        with pytest.raises(ValueError):
            WealthLedger(initial_wealth=0.0)
        with pytest.raises(ValueError):
            WealthLedger(payout=-0.1)

    def test_invalid_alpha(self):
        led = WealthLedger()
        with pytest.raises(ValueError):
            led.spend(0.0, 0, 1)
        with pytest.raises(ValueError):
            led.spend(1.5, 0, 1)


class TestMfdr:

    def test_zero_false_rejections(self):
        assert mfdr_estimate(MfdrCounts(0, 37, 10)) == 0.0

    def test_all_false(self):
        assert mfdr_estimate(MfdrCounts(100, 100, 100)) == pytest.approx(0.5)

    def test_plugin_formula(self):
        counts = MfdrCounts(3, 10, 20)
        expected = (3 / 20) / ((10 / 20) + 1.0)
        assert mfdr_estimate(counts) == pytest.approx(expected)

    def test_merge_is_associative_sum(self):
        a = MfdrCounts(1, 4, 10)
        b = MfdrCounts(2, 3, 5)
        c = MfdrCounts(0, 1, 7)
        ab_c = a.merge(b).merge(c)
        a_bc = a.merge(b.merge(c))
        assert ab_c == a_bc
        assert ab_c.false_rejections == 3
        assert ab_c.rejections == 8
        assert ab_c.replications == 22

    def test_counts_validation(self):
        with pytest.raises(ValueError):
            MfdrCounts(-1, 0, 1)
        with pytest.raises(ValueError):
            MfdrCounts(5, 3, 1)  # V > R
        with pytest.raises(ValueError):
            mfdr_estimate(MfdrCounts(0, 0, 0))
