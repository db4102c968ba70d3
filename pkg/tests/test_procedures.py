import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_dag, with_flow
from procedures.base_procedures import (
    AdaptiveBonferroniBase,
    BonferroniBase,
    KFdrSingleStepBase,
    RejectionSet,
    WeightedBonferroniBase,
    adaptive_bonferroni,
    adaptive_m0,
    as_pvalues,
    bonferroni,
    kfdr_critical_value,
    kfdr_single_step,
    normalize_weights,
    weighted_bonferroni,
)
from procedures.dag_procedures import DagConstantMode, DagTestingBase
from procedures.weights import WeightFunction
from reference_oracles.oracles import CounterexampleBase
from utils.errors import (
    GammaOutOfRange,
    InvalidPValue,
    InvalidWeightFunction,
    KOutOfRange,
    LengthMismatch,
    NonPositiveLevel,
    WeightNormalization,
)

pvalue_lists = st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=60)
BETA_GRID = np.linspace(0.02, 2.0, 100)


def indices(rejection: RejectionSet):
    return rejection.indices().tolist()


class TestBonferroni:
    def test_threshold_comparison(self):
        assert indices(bonferroni([0.01, 0.019, 0.5], 0.06, 3)) == [0, 1]

    def test_all_ones(self):
        assert bonferroni([1.0, 1.0, 1.0], 0.5).count == 0

    def test_oracle_denominator(self):
        assert indices(bonferroni([0.03, 0.9], 0.05, denominator=1)) == [0]

    def test_rejection_is_non_strict(self):
        assert indices(bonferroni([0.025, 0.0251], 0.05)) == [0]

    @pytest.mark.parametrize("alpha", [0.0, -0.1, float("nan"), float("inf")])
    def test_bad_level(self, alpha):
        with pytest.raises(NonPositiveLevel):
            bonferroni([0.1], alpha)

    def test_bad_pvalue(self):
        with pytest.raises(InvalidPValue):
            bonferroni([0.1, 1.5], 0.05)
        with pytest.raises(InvalidPValue):
            as_pvalues([[0.1, 0.2]])

    def test_pvalues_are_read_only(self):
        p = as_pvalues([0.1, 0.2])
        with pytest.raises(ValueError):
            p[0] = 0.5


class TestWeightedBonferroni:
    def test_unequal_weights(self):
        assert weighted_bonferroni([0.04, 0.04], [1.5, 0.5], 0.05).count == 0

    def test_thresholds(self):
        rejection = weighted_bonferroni([0.01, 0.04], [1.5, 0.5], 0.05)
        np.testing.assert_allclose(rejection.thresholds, [0.0375, 0.0125])
        assert indices(rejection) == [0]

    def test_zero_weight_never_rejects(self):
        rejection = weighted_bonferroni([0.0, 0.0, 0.0], [0.0, 1.5, 1.5], 0.05)
        assert indices(rejection) == [1, 2]

    @given(pvalue_lists, st.floats(min_value=0.001, max_value=2.0))
    def test_unit_weights_match_bonferroni(self, p, beta):
        assert weighted_bonferroni(p, np.ones(len(p)), beta).same_as(bonferroni(p, beta))

    def test_weights_must_sum_to_m(self):
        with pytest.raises(WeightNormalization):
            weighted_bonferroni([0.1, 0.2], [0.5, 0.5], 0.05)
        with pytest.raises(WeightNormalization):
            weighted_bonferroni([0.1, 0.2], [-1.0, 3.0], 0.05)
        with pytest.raises(LengthMismatch):
            weighted_bonferroni([0.1, 0.2], [2.0], 0.05)

    def test_normalize_weights(self):
        np.testing.assert_allclose(normalize_weights([1.0, 3.0], 2), [0.5, 1.5])
        with pytest.raises(WeightNormalization):
            normalize_weights([0.0, 0.0], 2)


class TestAdaptive:
    def test_m0_estimate(self):
        assert adaptive_m0([0.01, 0.6, 0.7], 0.5) == pytest.approx(6.0)

    def test_m0_empty_count(self):
        assert adaptive_m0([0.1, 0.2], 0.5) == pytest.approx(2.0)

    def test_m0_full_count(self):
        assert adaptive_m0([0.6, 0.7, 0.8], 0.5) == pytest.approx(8.0)

    @pytest.mark.parametrize("gamma", [0.0, 1.0, -0.2, 1.5])
    def test_gamma_range(self, gamma):
        with pytest.raises(GammaOutOfRange):
            adaptive_m0([0.1], gamma)

    def test_threshold_uses_estimate(self):
        assert adaptive_bonferroni([0.01, 0.6, 0.7], 0.5, 0.05).count == 0
        assert indices(adaptive_bonferroni([0.001, 0.6, 0.7], 0.5, 0.05)) == [0]

    def test_saturated_threshold(self):
        assert adaptive_bonferroni([0.01, 0.6, 0.7], 0.5, 100.0).count == 3

    def test_estimate_is_frozen(self):
        base = AdaptiveBonferroniBase([0.01, 0.6, 0.7], 0.5)
        assert base.critical_value(0.06) == pytest.approx(0.01)
        assert base.critical_value(0.6) == pytest.approx(0.1)


class TestKFdrSingleStep:
    def test_k1_is_bonferroni(self, rng):
        p = rng.random(30)
        assert kfdr_single_step(p, 1, 0.05).same_as(bonferroni(p, 0.05))

    def test_worked_value(self):
        assert kfdr_critical_value(0.06, 4, 2) == pytest.approx(0.1, rel=1e-12)

    def test_k_equals_m(self):
        m, beta = 5, 0.05
        expected = (math.factorial(m - 1) * beta) ** (1.0 / m)
        assert kfdr_critical_value(beta, m, m) == pytest.approx(expected, rel=1e-12)

    def test_large_m_does_not_overflow(self):
        t = kfdr_critical_value(0.05, 5000, 10)
        assert 0.0 < t < 1.0

    def test_clamped(self):
        assert kfdr_critical_value(1e6, 4, 2) == 1.0

    @pytest.mark.parametrize("k", [0, 5, 2.5, True])
    def test_k_range(self, k):
        with pytest.raises(KOutOfRange):
            KFdrSingleStepBase([0.1, 0.2, 0.3, 0.4], k)


class TestMonotonicity:
    @given(pvalue_lists)
    @settings(max_examples=50, deadline=None)
    def test_single_step_bases(self, p):
        m = len(p)
        bases = [
            BonferroniBase(p),
            AdaptiveBonferroniBase(p, 0.5),
            KFdrSingleStepBase(p, min(2, m)),
            WeightedBonferroniBase(p, normalize_weights(np.arange(1, m + 1), m)),
        ]
        for base in bases:
            counts = [base.count(beta) for beta in BETA_GRID]
            assert all(a <= b for a, b in zip(counts, counts[1:])), base.name

    @given(pvalue_lists, st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_dag_testing_bases(self, p, seed):
        dag = random_dag(np.random.default_rng(seed), len(p))
        metrics = with_flow(dag)
        bases = [
            DagTestingBase(dag, p, metrics, lam=0.1, mode=DagConstantMode.PFER_LAMBDA),
            DagTestingBase(dag, p, metrics, mode=DagConstantMode.PFER_DEFAULT),
            DagTestingBase(dag, p, metrics, mode=DagConstantMode.BONFERRONI),
        ]
        for base in bases:
            counts = [base.count(beta) for beta in BETA_GRID]
            assert all(a <= b for a, b in zip(counts, counts[1:])), base.mode

    @given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=2, max_size=2))
    @settings(max_examples=200)
    def test_counterexample_base(self, p):
        base = CounterexampleBase(p)
        counts = [base.count(beta) for beta in BETA_GRID]
        assert all(a <= b for a, b in zip(counts, counts[1:]))

    @given(pvalue_lists, st.floats(min_value=0.001, max_value=2.0))
    @settings(max_examples=50)
    def test_count_matches_reject(self, p, beta):
        for base in (BonferroniBase(p), AdaptiveBonferroniBase(p, 0.3), KFdrSingleStepBase(p, 1)):
            assert base.count(beta) == base.reject(beta).count


class TestWeightFunction:
    def test_predefined_kinds(self):
        assert WeightFunction.pfer()(7) == 1.0
        assert WeightFunction.fdr()(0) == 1.0
        assert WeightFunction.fdr()(5) == pytest.approx(0.2)
        assert WeightFunction.kfdr(3)(1) == pytest.approx(1 / 3)
        assert WeightFunction.kfdr(3)(6) == pytest.approx(1 / 6)

    def test_fdr_level_is_exact(self):
        assert WeightFunction.fdr().level(0.05, 7) == 0.05 * 7.0

    def test_custom_table(self):
        weight = WeightFunction.custom([1.0, 1.0, 0.5, 0.25])
        assert weight(2) == 0.5
        assert weight.level(0.1, 3) == pytest.approx(0.4)
        weight.check_domain(3)
        with pytest.raises(InvalidWeightFunction):
            weight.check_domain(4)
        with pytest.raises(InvalidWeightFunction):
            weight(4)

    @pytest.mark.parametrize("table", [[], [1.0, 0.0], [0.5, 1.0], [1.0, 1.2], [1.0, float("nan")]])
    def test_custom_table_validation(self, table):
        with pytest.raises(InvalidWeightFunction):
            WeightFunction.custom(table)

    def test_penalized(self):
        weight = WeightFunction.penalized(lambda r: 1.0 / (1.0 + r), 4)
        assert weight(3) == pytest.approx(0.25)
        assert weight.max_r == 4

    def test_kfdr_k(self):
        with pytest.raises(KOutOfRange):
            WeightFunction.kfdr(0)
