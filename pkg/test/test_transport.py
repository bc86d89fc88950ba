import unittest

import numpy as np
from hypothesis import given, settings, strategies as st

from snapmix.common.exceptions import InputError
from snapmix.mixture.source import MixtureSource, KSpikeDistribution
from snapmix.mixture.transport import (
    transport_distance, mixture_transport, spike_transport, MARGINAL_TOL)

from utils import lp_vertex_oracle, spike_transport_oracle


def weights_strategy(size):
    return st.lists(st.floats(0.05, 1.0), min_size=size, max_size=size).map(
        lambda w: np.array(w) / sum(w))


def spikes_strategy(k):
    return st.tuples(weights_strategy(k),
                     st.lists(st.floats(0.0, 1.0), min_size=k, max_size=k))


class TestTransportDistance(unittest.TestCase):
    def test_identical_spikes(self):
        d = KSpikeDistribution([0.3, 0.7], [0.1, 0.6])
        self.assertAlmostEqual(spike_transport(d, d).cost, 0.0, places=12)

    def test_single_edge(self):
        plan = spike_transport(KSpikeDistribution([1.0], [0.2]),
                               KSpikeDistribution([1.0], [0.7]))
        self.assertAlmostEqual(plan.cost, 0.5, places=12)
        np.testing.assert_allclose(plan.flow, [[1.0]])

    def test_two_spikes(self):
        plan = spike_transport(KSpikeDistribution([0.3, 0.7], [0.0, 1.0]),
                               KSpikeDistribution([0.5, 0.5], [0.0, 1.0]))
        self.assertAlmostEqual(plan.cost, 0.2, places=10)
        np.testing.assert_allclose(plan.flow.sum(axis=1), [0.3, 0.7],
                                   atol=MARGINAL_TOL)
        np.testing.assert_allclose(plan.flow.sum(axis=0), [0.5, 0.5],
                                   atol=MARGINAL_TOL)

    def test_unnormalized_marginals(self):
        with self.assertRaises(InputError):
            transport_distance([0.5, 0.6], [1.0], [[0.0], [1.0]])
        with self.assertRaises(InputError):
            transport_distance([1.0], [1.0], [[0.0, 1.0]])

    def test_mixture_transport(self):
        a = MixtureSource([0.5, 0.5], [[1.0, 0.0], [0.0, 1.0]])
        b = MixtureSource([0.5, 0.5], [[0.0, 1.0], [1.0, 0.0]])
        self.assertAlmostEqual(mixture_transport(a, b).cost, 0.0, places=12)
        c = MixtureSource([1.0], [[0.5, 0.5]])
        self.assertAlmostEqual(mixture_transport(a, c).cost, 0.5, places=12)

    def test_against_vertex_enumeration(self):
        gen = np.random.default_rng(21)
        for _ in range(100):
            k, l = gen.integers(2, 4, size=2)
            wA = gen.dirichlet(np.ones(k))
            wB = gen.dirichlet(np.ones(l))
            cost = gen.uniform(0, 1, size=(k, l))
            A_eq = np.zeros((k + l, k * l))
            for i in range(k):
                A_eq[i, i * l:(i + 1) * l] = 1.0
            for j in range(l):
                A_eq[k + j, j::l] = 1.0
            expected = lp_vertex_oracle(cost.ravel(), A_eq=A_eq,
                                        b_eq=np.concatenate([wA, wB]))
            got = transport_distance(wA, wB, cost).cost
            self.assertAlmostEqual(got, expected, delta=1e-8)


class TestTransportProperties(unittest.TestCase):
    @given(spikes_strategy(3), spikes_strategy(2))
    @settings(max_examples=50, deadline=None)
    def test_matches_cdf_formula(self, first, second):
        d1 = KSpikeDistribution(*first)
        d2 = KSpikeDistribution(*second)
        expected = spike_transport_oracle(d1.weights, d1.locations,
                                          d2.weights, d2.locations)
        self.assertAlmostEqual(spike_transport(d1, d2).cost, expected,
                               delta=1e-8)

    @given(spikes_strategy(2), spikes_strategy(3))
    @settings(max_examples=50, deadline=None)
    def test_symmetric(self, first, second):
        d1 = KSpikeDistribution(*first)
        d2 = KSpikeDistribution(*second)
        self.assertAlmostEqual(spike_transport(d1, d2).cost,
                               spike_transport(d2, d1).cost, delta=1e-8)

    @given(spikes_strategy(2), spikes_strategy(3), spikes_strategy(2))
    @settings(max_examples=50, deadline=None)
    def test_triangle_inequality(self, first, second, third):
        d1, d2, d3 = [KSpikeDistribution(*s) for s in (first, second, third)]
        self.assertLessEqual(
            spike_transport(d1, d3).cost,
            spike_transport(d1, d2).cost + spike_transport(d2, d3).cost + 1e-8)


if __name__ == '__main__':
    unittest.main()
