"""Nudge predictors: shifts, filtering, attention mixtures, dispatch."""

import numpy as np
import pytest
from scipy.special import expit

from nudgelab import (
    BehaviorRecord,
    ConfigurationError,
    DelayedAssistance,
    ExplanationAssistance,
    ImmediateAssistance,
    InputError,
    NudgeParams,
    SignedSharedSignVector,
    Treatment,
    UsageError,
    condition_on_decision,
    decision_probability,
    predict_delayed,
    predict_explanation,
    predict_immediate,
    predict_independent,
    TaskInstance,
)

from conftest import random_posterior, random_task, singleton_posterior


def zero_delta(n):
    return SignedSharedSignVector.zero(n)


class TestSignedSharedSignVector:
    def test_realized_shares_sign(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            n = int(rng.integers(1, 7))
            vec = SignedSharedSignVector(
                scale=float(rng.normal(0, 2)), magnitudes=rng.uniform(0, 2, n)
            )
            delta = vec.realized
            outer = np.outer(delta, delta)
            assert np.all(outer >= 0.0)

    def test_negative_magnitudes_rejected(self):
        with pytest.raises(ConfigurationError):
            SignedSharedSignVector(scale=1.0, magnitudes=np.array([0.5, -0.1]))

    def test_sign_follows_scale(self):
        assert SignedSharedSignVector(2.0, np.array([0.6, 0.8])).sign == 1
        assert SignedSharedSignVector(-2.0, np.array([0.6, 0.8])).sign == -1
        assert SignedSharedSignVector(0.0, np.zeros(2)).sign == 1


class TestNudgeParams:
    def test_exactly_one_treatment(self):
        with pytest.raises(ConfigurationError):
            NudgeParams()
        with pytest.raises(ConfigurationError):
            NudgeParams(delta_direct=zero_delta(2), delta_exp=0.5)
        with pytest.raises(ConfigurationError):
            NudgeParams(delta_affirm=zero_delta(2))  # missing contra

    def test_delta_exp_range(self):
        with pytest.raises(ConfigurationError):
            NudgeParams.for_explanation(1.2)

    def test_treatment_inference(self):
        assert NudgeParams.for_immediate(zero_delta(2)).treatment == Treatment.IMMEDIATE
        assert NudgeParams.for_delayed(
            zero_delta(2), zero_delta(2)
        ).treatment == Treatment.DELAYED
        assert NudgeParams.for_explanation(0.5).treatment == Treatment.EXPLANATION


class TestPredictImmediate:
    def test_zero_nudge_is_identity_bitexact(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            n = int(rng.integers(1, 6))
            post = random_posterior(rng, n, size=16)
            task = random_task(rng, n)
            assist = ImmediateAssistance(int(rng.integers(0, 2)),
                                         float(rng.uniform(0.5, 1.0)))
            p0, d0 = predict_independent(post, task)
            p1, d1 = predict_immediate(post, task, assist, zero_delta(n))
            assert p1 == p0 and d1 == d0

    def test_single_member_hand_values(self):
        post = singleton_posterior([2.0, -1.0])
        task = TaskInstance([0.5, 0.5])
        delta = SignedSharedSignVector(1.0, np.array([1.0, 1.0]))
        # (2+1)*0.5 + (-1+1)*0.5 = 1.5
        p, d = predict_immediate(post, task, ImmediateAssistance(1, 1.0), delta)
        assert p == pytest.approx(float(expit(1.5)), abs=1e-12)
        assert d == 1
        # recommendation 0 flips the shift: (2-1)*0.5 + (-1-1)*0.5 = -0.5
        p, d = predict_immediate(post, task, ImmediateAssistance(0, 1.0), delta)
        assert p == pytest.approx(float(expit(-0.5)), abs=1e-12)
        assert d == 0

    def test_confidence_range_enforced(self):
        with pytest.raises(InputError):
            ImmediateAssistance(1, 0.4)
        with pytest.raises(InputError):
            ImmediateAssistance(1, 1.1)

    def test_confidence_monotonicity(self):
        # positive scale, recommendation 1 -> nondecreasing in confidence;
        # recommendation 0 -> nonincreasing; 200 random configurations
        rng = np.random.default_rng(6)
        for _ in range(200):
            n = int(rng.integers(1, 6))
            post = random_posterior(rng, n, size=12)
            task = random_task(rng, n)
            delta = SignedSharedSignVector(float(rng.uniform(0.1, 2.0)),
                                           rng.uniform(0, 1.5, n))
            c_low, c_high = sorted(rng.uniform(0.5, 1.0, 2))
            for rec, cmp in ((1, np.greater_equal), (0, np.less_equal)):
                p_low, _ = predict_immediate(post, task,
                                             ImmediateAssistance(rec, c_low), delta)
                p_high, _ = predict_immediate(post, task,
                                              ImmediateAssistance(rec, c_high), delta)
                assert cmp(p_high, p_low)

    def test_recommendation_symmetry(self):
        # flipping the recommendation equals negating the scale, bit-exactly
        rng = np.random.default_rng(8)
        for _ in range(50):
            n = int(rng.integers(1, 6))
            post = random_posterior(rng, n, size=8)
            task = random_task(rng, n)
            conf = float(rng.uniform(0.5, 1.0))
            delta = SignedSharedSignVector(float(rng.normal(0, 1.5)),
                                           rng.uniform(0, 1.5, n))
            flipped = SignedSharedSignVector(-delta.scale, delta.magnitudes)
            p_rec0, _ = predict_immediate(post, task,
                                          ImmediateAssistance(0, conf), delta)
            p_rec1_neg, _ = predict_immediate(post, task,
                                              ImmediateAssistance(1, conf), flipped)
            assert p_rec0 == p_rec1_neg


class TestPredictDelayed:
    def test_zero_nudge_equals_filtered_mean(self, two_member_posterior):
        task = TaskInstance([1.0, 0.0])
        fe = condition_on_decision(two_member_posterior, task, 1)
        expected = float(np.mean(expit(fe.members @ np.append(task.features, 1.0))))
        p, _ = predict_delayed(two_member_posterior, task, DelayedAssistance(1, 1),
                               zero_delta(2), zero_delta(2))
        assert p == expected

    def test_affirm_branch_hand_value(self, two_member_posterior):
        task = TaskInstance([1.0, 0.0])
        affirm = SignedSharedSignVector(1.0, np.array([1.0, 0.0]))
        contra = zero_delta(2)
        p, d = predict_delayed(two_member_posterior, task, DelayedAssistance(1, 1),
                               affirm, contra)
        assert p == pytest.approx(float(expit(2.0)), abs=1e-12)
        assert d == 1

    def test_contra_branch_and_tie_rule(self, two_member_posterior):
        task = TaskInstance([1.0, 0.0])
        affirm = zero_delta(2)
        contra = SignedSharedSignVector(1.0, np.array([1.0, 0.0]))
        # initial 1 keeps member (1,0); recommendation 0 contradicts:
        # shift = -1 * 1 -> logit 0 -> probability one half -> decision 1
        p, d = predict_delayed(two_member_posterior, task, DelayedAssistance(0, 1),
                               affirm, contra)
        assert p == 0.5
        assert d == 1

    def test_branch_exclusivity(self):
        # only the matching branch's vector can influence the output
        rng = np.random.default_rng(10)
        for _ in range(50):
            n = int(rng.integers(1, 5))
            post = random_posterior(rng, n, size=10)
            task = random_task(rng, n)
            rec, initial = int(rng.integers(0, 2)), int(rng.integers(0, 2))
            assist = DelayedAssistance(rec, initial)
            active = SignedSharedSignVector(float(rng.normal(0, 1)),
                                            rng.uniform(0, 1, n))
            other_a = SignedSharedSignVector(float(rng.normal(0, 1)),
                                             rng.uniform(0, 1, n))
            other_b = SignedSharedSignVector(float(rng.normal(0, 1)),
                                             rng.uniform(0, 1, n))
            if rec == initial:
                p1, _ = predict_delayed(post, task, assist, active, other_a)
                p2, _ = predict_delayed(post, task, assist, active, other_b)
            else:
                p1, _ = predict_delayed(post, task, assist, other_a, active)
                p2, _ = predict_delayed(post, task, assist, other_b, active)
            assert p1 == p2


class TestPredictExplanation:
    def test_full_mask_full_attention_is_identity(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            n = int(rng.integers(1, 6))
            post = random_posterior(rng, n, size=16)
            task = random_task(rng, n)
            p0, d0 = predict_independent(post, task)
            p1, d1 = predict_explanation(post, task,
                                         ExplanationAssistance(np.ones(n, dtype=int)),
                                         1.0)
            assert p1 == p0 and d1 == d0

    def test_equal_mixture(self):
        post = singleton_posterior([1.2, -0.7])
        task = TaskInstance([0.8, 0.4])
        mask = ExplanationAssistance([1, 0])
        focused = float(expit(1.2 * 0.8))
        ignored = float(expit(-0.7 * 0.4))
        p, _ = predict_explanation(post, task, mask, 0.5)
        assert p == pytest.approx(0.5 * (focused + ignored), abs=1e-12)

    def test_hand_value(self):
        post = singleton_posterior([1.0, 1.0])
        task = TaskInstance([1.0, 0.5])
        p, d = predict_explanation(post, task, ExplanationAssistance([1, 0]), 0.8)
        expected = 0.8 * float(expit(1.0)) + 0.2 * float(expit(0.5))
        assert p == pytest.approx(expected, abs=1e-12)
        assert d == 1

    def test_mixture_bounds(self):
        rng = np.random.default_rng(14)
        for _ in range(50):
            n = int(rng.integers(2, 6))
            post = random_posterior(rng, n, size=12)
            task = random_task(rng, n)
            mask = ExplanationAssistance(rng.integers(0, 2, n))
            lo, _ = predict_explanation(post, task, mask, 0.0)
            hi, _ = predict_explanation(post, task, mask, 1.0)
            for g in rng.uniform(0, 1, 5):
                p, _ = predict_explanation(post, task, mask, float(g))
                assert min(lo, hi) - 1e-12 <= p <= max(lo, hi) + 1e-12

    def test_attention_range_enforced(self):
        post = singleton_posterior([1.0, 1.0])
        task = TaskInstance([0.5, 0.5])
        with pytest.raises(InputError):
            predict_explanation(post, task, ExplanationAssistance([1, 0]), 1.5)

    def test_mask_length_enforced(self):
        post = singleton_posterior([1.0, 1.0])
        with pytest.raises(ConfigurationError):
            predict_explanation(post, TaskInstance([0.5, 0.5]),
                                ExplanationAssistance([1, 0, 1]), 0.5)


class TestDecisionProbability:
    def test_independent_dispatch(self):
        rng = np.random.default_rng(16)
        post = random_posterior(rng, 3, size=10)
        rec = BehaviorRecord(subject_id="s1", treatment=Treatment.INDEPENDENT,
                             trial_index=0, features=[0.2, 0.4, 0.9],
                             final_decision=1)
        expected, _ = predict_independent(post, rec.task())
        assert decision_probability(rec, post, None) == expected

    def test_immediate_zero_nudge_matches_independent(self):
        rng = np.random.default_rng(18)
        post = random_posterior(rng, 2, size=10)
        rec = BehaviorRecord(subject_id="s1", treatment=Treatment.IMMEDIATE,
                             trial_index=0, features=[0.2, 0.4],
                             final_decision=0, ai_recommendation=1,
                             ai_confidence=0.9)
        params = NudgeParams.for_immediate(zero_delta(2))
        independent, _ = predict_independent(post, rec.task())
        assert decision_probability(rec, post, params) == independent

    def test_params_mismatch_raises(self):
        rng = np.random.default_rng(20)
        post = random_posterior(rng, 2, size=5)
        rec = BehaviorRecord(subject_id="s1", treatment=Treatment.IMMEDIATE,
                             trial_index=0, features=[0.2, 0.4],
                             final_decision=0, ai_recommendation=1,
                             ai_confidence=0.9)
        with pytest.raises(UsageError):
            decision_probability(rec, post, NudgeParams.for_explanation(0.5))
        with pytest.raises(UsageError):
            decision_probability(rec, post, None)

    def test_degenerate_probability_clipped(self):
        post = singleton_posterior([80.0, 80.0], bias=0.0)
        rec = BehaviorRecord(subject_id="s1", treatment=Treatment.INDEPENDENT,
                             trial_index=0, features=[1.0, 1.0], final_decision=1)
        p = decision_probability(rec, post, None)
        assert p == 1.0 - 1e-6
