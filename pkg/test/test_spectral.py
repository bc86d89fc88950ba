import unittest

import numpy as np

from snapmix.common.exceptions import InputError, DegenerateMixtureError
from snapmix.common.utils import RngStream
from snapmix.mixture.sampling import SnapshotBatch, draw_snapshots
from snapmix.mixture.source import (
    MixtureSource, width_report, random_wide_source)
from snapmix.mixture.spectral import (
    empirical_M, exact_M, estimate_A, random_basis, projector_distance)


class TestEmpiricalM(unittest.TestCase):
    def test_single_snapshot(self):
        M = empirical_M(SnapshotBatch([[0, 1]], 2), 2)
        np.testing.assert_array_equal(M, [[0.0, 0.5], [0.5, 0.0]])

    def test_diagonal(self):
        M = empirical_M(SnapshotBatch([[0, 0], [1, 1]], 2), 2)
        np.testing.assert_array_equal(M, [[0.5, 0.0], [0.0, 0.5]])

    def test_errors(self):
        with self.assertRaises(InputError):
            empirical_M(SnapshotBatch(np.zeros((0, 2), dtype=int), 2), 2)
        with self.assertRaises(InputError):
            empirical_M(SnapshotBatch([[0]], 1), 2)

    def test_concentration(self):
        src = MixtureSource([0.3, 0.7], [[0.1, 0.2, 0.3, 0.4],
                                         [0.4, 0.4, 0.1, 0.1]])
        batch = draw_snapshots(src, 2, 1000000, RngStream(1))
        M = empirical_M(batch, 4)
        self.assertAlmostEqual(M.sum(), 1.0, places=12)
        self.assertLessEqual(np.linalg.norm(M - exact_M(src)), 0.01)


class TestEstimateA(unittest.TestCase):
    def test_single_constituent(self):
        src = MixtureSource([1.0], [[0.2, 0.3, 0.5]])
        sub = estimate_A(exact_M(src), src.mean(), 1.0)
        self.assertEqual(sub.kprime, 0)
        np.testing.assert_allclose(sub.Atilde(), np.zeros((3, 3)))

    def test_two_point_source(self):
        src = MixtureSource([0.5, 0.5], [[1.0, 0.0], [0.0, 1.0]])
        sub = estimate_A(exact_M(src), src.mean(), 1.0)
        self.assertEqual(sub.kprime, 1)
        self.assertAlmostEqual(sub.eigenvalues[0], 0.5, places=12)
        v = sub.retained[:, 0]
        self.assertAlmostEqual(abs(v.dot([1, -1])) / np.sqrt(2), 1.0, places=12)
        self.assertAlmostEqual(sub.threshold, 0.25)

    def test_rank_cap_keeps_largest(self):
        src = MixtureSource([0.1, 0.2, 0.3, 0.4], np.eye(4))
        full = estimate_A(exact_M(src), src.mean(), 0.5)
        self.assertEqual(full.kprime, 3)
        self.assertEqual(full.dropped, 0)
        sub = estimate_A(exact_M(src), src.mean(), 0.5, max_rank=1)
        self.assertEqual(sub.above_threshold, 3)
        self.assertEqual(sub.kprime, 1)
        self.assertEqual(sub.dropped, 2)
        vals, vecs = np.linalg.eigh(src.covariance())
        self.assertAlmostEqual(sub.eigenvalues[0], vals[-1], places=12)
        self.assertAlmostEqual(abs(sub.retained[:, 0].dot(vecs[:, -1])), 1.0,
                               places=10)
        self.assertEqual(random_basis(sub, RngStream(0)).shape, (4, 1))
        self.assertEqual(len(sub.to_json()['eigenvalues']), 1)

    def test_rank_cap_is_monotone(self):
        src = random_wide_source(12, 4, 0.1, RngStream(8))
        zeta = width_report(src).zeta
        M, r = exact_M(src), src.mean()
        ranks = [estimate_A(M, r, zeta, max_rank=cap).kprime
                 for cap in range(0, 6)]
        self.assertEqual(ranks, sorted(ranks))
        self.assertEqual(ranks[0], 0)
        self.assertEqual(ranks[-1], estimate_A(M, r, zeta).kprime)

    def test_rank_under_perturbation(self):
        src = random_wide_source(15, 3, 0.1, RngStream(3))
        report = width_report(src)
        zeta, n = report.zeta, src.n
        gen = np.random.default_rng(4)
        E = gen.normal(size=(n, n))
        E = E + E.T
        E *= zeta ** 2 / (8.0 * n) / np.linalg.norm(E, 2)
        sub = estimate_A(exact_M(src) + E, src.mean(), zeta)
        self.assertEqual(sub.kprime, report.kprime)

    def test_identity_m_equals_r_plus_a(self):
        src = random_wide_source(10, 2, 0.1, RngStream(6))
        r = src.mean()
        np.testing.assert_allclose(exact_M(src),
                                   np.outer(r, r) + src.covariance(),
                                   atol=1e-12)

    def test_asymmetric_input(self):
        with self.assertRaises(InputError):
            estimate_A([[0.5, 0.1], [0.0, 0.4]], [0.5, 0.5], 1.0)


class TestRandomBasis(unittest.TestCase):
    def test_one_dimensional(self):
        src = MixtureSource([0.5, 0.5], [[1.0, 0.0], [0.0, 1.0]])
        sub = estimate_A(exact_M(src), src.mean(), 1.0)
        b = random_basis(sub, RngStream(1))
        self.assertEqual(b.shape, (2, 1))
        self.assertAlmostEqual(abs(b[:, 0].dot(sub.retained[:, 0])), 1.0,
                               places=12)

    def test_orthonormal_and_spanning(self):
        src = random_wide_source(12, 4, 0.05, RngStream(2))
        sub = estimate_A(exact_M(src), src.mean(), width_report(src).zeta)
        self.assertEqual(sub.kprime, 3)
        b = random_basis(sub, RngStream(7))
        np.testing.assert_allclose(b.T.dot(b), np.eye(3), atol=1e-10)
        self.assertLessEqual(projector_distance(b, sub.retained), 1e-10)

    def test_different_streams(self):
        src = random_wide_source(12, 3, 0.05, RngStream(2))
        sub = estimate_A(exact_M(src), src.mean(), width_report(src).zeta)
        a = random_basis(sub, RngStream(1))
        b = random_basis(sub, RngStream(2))
        self.assertFalse(np.allclose(a, b))

    def test_degenerate(self):
        src = MixtureSource([1.0], [[0.5, 0.5]])
        sub = estimate_A(exact_M(src), src.mean(), 1.0)
        with self.assertRaises(DegenerateMixtureError):
            random_basis(sub, RngStream(0))

    def test_unit_vectors_are_spread(self):
        # For wide isotropic sources every unit vector of col(A) is flat
        for seed in range(5):
            src = random_wide_source(20, 3, 0.1, RngStream(seed))
            report = width_report(src)
            sub = estimate_A(exact_M(src), src.mean(), report.zeta)
            bound = 2.0 / (src.w_min ** 2 * report.zeta * np.sqrt(src.n))
            b = random_basis(sub, RngStream(100 + seed))
            for j in range(b.shape[1]):
                self.assertLessEqual(np.abs(b[:, j]).max(), bound + 1e-9)


class TestProjectorDistance(unittest.TestCase):
    def test_identical(self):
        U = np.linalg.qr(np.random.default_rng(0).normal(size=(5, 2)))[0]
        self.assertAlmostEqual(projector_distance(U, U), 0.0, places=12)

    def test_orthogonal_lines(self):
        self.assertAlmostEqual(projector_distance([1.0, 0.0], [0.0, 1.0]), 1.0)

    def test_not_orthonormal(self):
        with self.assertRaises(InputError):
            projector_distance([1.0, 1.0], [1.0, 0.0])

    def test_weyl(self):
        gen = np.random.default_rng(1)
        for _ in range(50):
            A = gen.normal(size=(6, 6))
            A = A + A.T
            B = gen.normal(size=(6, 6))
            B = A + 0.1 * (B + B.T)
            gap = np.abs(np.linalg.eigvalsh(A) - np.linalg.eigvalsh(B)).max()
            self.assertLessEqual(gap, np.linalg.norm(A - B, 2) + 1e-9)

    def test_perturbation_bound(self):
        gen = np.random.default_rng(2)
        eps = 0.5
        for _ in range(50):
            U = np.linalg.qr(gen.normal(size=(6, 2)))[0]
            V = np.linalg.qr(U + 0.05 * gen.normal(size=(6, 2)))[0]
            A = (U * gen.uniform(eps, 1.0, size=2)).dot(U.T)
            B = (V * gen.uniform(eps, 1.0, size=2)).dot(V.T)
            rho = np.linalg.norm(A - B, 2)
            self.assertLessEqual(projector_distance(U, V),
                                 np.sqrt(4 * rho / eps) + 1e-9)


if __name__ == '__main__':
    unittest.main()
