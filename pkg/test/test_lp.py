import unittest

import numpy as np

from snapmix.common.exceptions import (
    LPError, LPInfeasibleError, LPUnboundedError, InputError)
from snapmix.common.lp import solve_lp

from utils import lp_vertex_oracle


class TestSolveLP(unittest.TestCase):
    def test_inequalities(self):
        res = solve_lp([-1, -1], A_ub=[[1, 2], [3, 1]], b_ub=[4, 6])
        self.assertAlmostEqual(res.value, -2.8, places=10)
        np.testing.assert_allclose(res.x, [1.6, 1.2], atol=1e-10)

    def test_equalities(self):
        res = solve_lp([1, 1], A_eq=[[1, 1], [1, -1]], b_eq=[1, 0])
        self.assertAlmostEqual(res.value, 1.0, places=12)
        np.testing.assert_allclose(res.x, [0.5, 0.5], atol=1e-12)

    def test_redundant_equalities(self):
        res = solve_lp([1, 2], A_eq=[[1, 1], [2, 2]], b_eq=[1, 2])
        self.assertAlmostEqual(res.value, 1.0, places=12)
        np.testing.assert_allclose(res.x, [1.0, 0.0], atol=1e-12)

    def test_negative_rhs(self):
        res = solve_lp([1], A_ub=[[-1]], b_ub=[-2])
        self.assertAlmostEqual(res.value, 2.0, places=12)

    def test_infeasible(self):
        with self.assertRaises(LPInfeasibleError):
            solve_lp([1, 1], A_eq=[[1, 1]], b_eq=[-1])
        with self.assertRaises(LPError):
            solve_lp([1], A_ub=[[1]], b_ub=[1], A_eq=[[1]], b_eq=[2])

    def test_unbounded(self):
        with self.assertRaises(LPUnboundedError):
            solve_lp([-1, 0], A_ub=[[1, -1]], b_ub=[1])

    def test_shape_mismatch(self):
        with self.assertRaises(InputError):
            solve_lp([1, 1], A_ub=[[1, 1, 1]], b_ub=[1])
        with self.assertRaises(InputError):
            solve_lp([1, 1])

    def test_deterministic(self):
        c = [1, 1, 1]
        A_eq = [[1, 1, 1]]
        r1 = solve_lp(c, A_eq=A_eq, b_eq=[1])
        r2 = solve_lp(c, A_eq=A_eq, b_eq=[1])
        self.assertEqual(r1.basis, r2.basis)
        np.testing.assert_array_equal(r1.x, r2.x)


class TestAgainstVertexEnumeration(unittest.TestCase):
    def test_random_inequality_programs(self):
        gen = np.random.default_rng(11)
        for _ in range(60):
            A = gen.uniform(0.1, 1.0, size=(3, 3))
            b = gen.uniform(0.5, 2.0, size=3)
            c = gen.uniform(-1.0, 1.0, size=3)
            res = solve_lp(c, A_ub=A, b_ub=b)
            expected = lp_vertex_oracle(c, A_ub=A, b_ub=b)
            self.assertAlmostEqual(res.value, expected, delta=1e-8)
            self.assertTrue(np.all(A.dot(res.x) <= b + 1e-9))

    def test_random_equality_programs(self):
        gen = np.random.default_rng(12)
        for _ in range(60):
            A = gen.normal(size=(2, 4))
            b = A.dot(gen.uniform(0, 1, size=4))
            c = gen.uniform(0, 1, size=4)
            res = solve_lp(c, A_eq=A, b_eq=b)
            expected = lp_vertex_oracle(c, A_eq=A, b_eq=b)
            self.assertAlmostEqual(res.value, expected, delta=1e-8)
            np.testing.assert_allclose(A.dot(res.x), b, atol=1e-9)


if __name__ == '__main__':
    unittest.main()
