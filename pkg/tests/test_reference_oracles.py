from fractions import Fraction

import numpy as np
import pytest

from conftest import random_dag, with_flow
from dag_core import chain_dag, compute_metrics, edgeless_dag
from procedures.base_procedures import BonferroniBase
from procedures.gels import gels_run
from procedures.weights import WeightFunction
from reference_oracles.oracles import (
    CounterexampleBase,
    counterexample_fdr,
    flow_recursive,
    gels_r_scan,
    leaf_flow_exact,
    naive_ancestors,
    sum_c_check,
)
from simulation.runner import gels_descent_batch
from utils.errors import AlphaOutOfRange, LengthMismatch


class TestScan:
    def test_worked_example(self):
        assert gels_r_scan(BonferroniBase([0.01, 0.02, 0.5]), WeightFunction.fdr(), 0.15) == 2

    def test_extremes(self):
        assert gels_r_scan(BonferroniBase([1.0] * 5), WeightFunction.fdr(), 0.05) == 0
        assert gels_r_scan(BonferroniBase([0.0] * 5), WeightFunction.fdr(), 0.05) == 5


class TestFlow:
    def test_nine_node_exact(self, nine_node_dag):
        flow = flow_recursive(nine_node_dag)
        assert [flow[0][j] for j in range(5, 9)] == [Fraction(1), Fraction(3, 4), Fraction(1, 4), Fraction(0)]
        assert leaf_flow_exact(nine_node_dag)[:5] == [Fraction(2), Fraction(2), Fraction(3, 2), Fraction(1), Fraction(3, 2)]

    def test_diagonal_and_non_ancestors(self, nine_node_dag):
        flow = flow_recursive(nine_node_dag)
        ancestors = naive_ancestors(nine_node_dag)
        for j in range(9):
            assert flow[j][j] == 1
            for i in range(9):
                if i not in ancestors[j]:
                    assert flow[i][j] == 0

    def test_float_flow_matches_exact(self, rng):
        for _ in range(100):
            m = int(rng.integers(1, 50))
            dag = random_dag(rng, m, density=float(rng.uniform(0.0, 0.25)))
            metrics = with_flow(dag)
            exact = flow_recursive(dag)
            for j in range(m):
                for i in range(m):
                    assert metrics.flow_value(i, j) == pytest.approx(float(exact[i][j]), abs=1e-12)
            np.testing.assert_allclose(metrics.leaf_flow, [float(x) for x in leaf_flow_exact(dag)], atol=1e-12)

    def test_naive_ancestors_match_metrics(self, rng):
        for _ in range(100):
            dag = random_dag(rng, int(rng.integers(1, 60)))
            assert tuple(naive_ancestors(dag)) == compute_metrics(dag).ancestors


class TestCoefficients:
    def test_all_false(self, nine_node_metrics):
        table, total = sum_c_check(nine_node_metrics, np.zeros(9, dtype=bool), 0.1)
        assert total == 0.0
        assert not table.values.any()

    def test_edgeless_all_true(self):
        metrics = with_flow(edgeless_dag(7))
        table, total = sum_c_check(metrics, np.ones(7, dtype=bool), 0.3)
        np.testing.assert_allclose(table.values, 1 / 7)
        assert total == pytest.approx(1.0)

    def test_chain_all_true_sums_to_one(self):
        metrics = with_flow(chain_dag(2))
        _, total = sum_c_check(metrics, np.ones(2, dtype=bool), 0.5)
        assert total == pytest.approx(1.0)

    def test_nine_node_all_true(self, nine_node_metrics):
        table, total = sum_c_check(nine_node_metrics, np.ones(9, dtype=bool), 0.1)
        assert total <= 1.0 + 1e-12
        assert table.lam == 0.1
        assert np.all(table.values > 0)

    def test_bound_on_random_triples(self, rng):
        for _ in range(500):
            m = int(rng.integers(1, 40))
            metrics = with_flow(random_dag(rng, m))
            truth = rng.random(m) < rng.uniform(0.0, 1.0)
            lam = float(rng.choice([0.01, 0.1, 1.0, 10.0]) * rng.uniform(0.5, 2.0))
            table, total = sum_c_check(metrics, truth, lam)
            assert total <= 1.0 + 1e-12
            assert np.all(table.values >= 0)
            assert not table.values[~truth].any()

    def test_truth_length(self, nine_node_metrics):
        with pytest.raises(LengthMismatch):
            sum_c_check(nine_node_metrics, np.ones(3, dtype=bool), 0.1)


class TestCounterexample:
    def test_closed_form(self):
        assert counterexample_fdr(0.05) == pytest.approx(0.05 * 1.2 / (1.1 * 1.05), rel=1e-12)
        assert counterexample_fdr(0.05) == pytest.approx(0.051948051948, rel=1e-9)
        assert counterexample_fdr(0.25) == pytest.approx(0.266666666667, rel=1e-9)
        assert counterexample_fdr(0.25) > 0.25

    def test_small_alpha_limit(self):
        assert counterexample_fdr(1e-8) / 1e-8 == pytest.approx(1.0, rel=1e-6)

    @pytest.mark.parametrize("alpha", [0.0, 0.5, 0.7, -0.1])
    def test_alpha_range(self, alpha):
        with pytest.raises(AlphaOutOfRange):
            counterexample_fdr(alpha)

    def test_base_rule(self):
        base = CounterexampleBase([0.04, 0.05])
        assert base.reject(0.05).indices().tolist() == [0, 1]
        assert base.count(0.045) == 1
        assert base.count(0.04) == 0
        assert CounterexampleBase([0.06, 0.0]).count(1.0) == 2
        assert CounterexampleBase([0.6, 0.0]).count(1.0) == 0

    def test_needs_two_pvalues(self):
        with pytest.raises(LengthMismatch):
            CounterexampleBase([0.1, 0.2, 0.3])

    def test_batched_descent_matches_gels_run(self, rng):
        p = rng.random((2000, 2)) * 0.3
        batched = gels_descent_batch(p, 0.1)
        for row, r in zip(p, batched):
            assert gels_run(CounterexampleBase(row), WeightFunction.fdr(), 0.1)[0] == r
