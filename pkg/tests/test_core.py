import math
import unittest

import numpy as np

from src.core.maps import (
    as_point,
    check_involution,
    check_reversibility,
    finite_difference_jacobian,
    jacobian,
    rotation_matrix,
    sample_box,
)
from src.core.systems import builtin_system, nf_params, rigid_rotation, twist_std
from src.utils.errors import ValidationError
from src.utils.helpers import make_rng


class TestRigidRotation(unittest.TestCase):
    def setUp(self):
        self.sys = rigid_rotation({"psi": 0.3})
        self.samples = sample_box(self.sys, make_rng(1), 1000)

    def test_reversible(self):
        report = check_reversibility(self.sys, self.samples)
        self.assertTrue(report.passed)
        self.assertLessEqual(report.max_residual, 1e-12)
        self.assertEqual(report.samples, 1000)
        self.assertEqual(report.skipped, 0)

    def test_involutions(self):
        self.assertEqual(check_involution(self.sys.g, self.samples).max_residual, 0.0)
        self.assertLessEqual(check_involution(self.sys.h2, self.samples).max_residual, 1e-12)

    def test_fixed_set_curves(self):
        """curve points are fixed by their involution"""
        for which in ("g", "fg"):
            inv = self.sys.involution(which)
            for s in (-0.7, 0.1, 0.9):
                p = inv.curve_point(s)
                self.assertLess(np.linalg.norm(inv(p) - p), 1e-14)
                self.assertLess(abs(inv.signed_distance(p)), 1e-14)

    def test_inverse_and_jacobian(self):
        p = np.array([0.4, -1.2])
        np.testing.assert_allclose(self.sys.f.inverse(self.sys.f(p)), p, atol=1e-14)
        np.testing.assert_allclose(jacobian(self.sys.f, p), rotation_matrix(0.3), atol=1e-15)
        np.testing.assert_allclose(finite_difference_jacobian(self.sys.f, p), rotation_matrix(0.3), atol=1e-8)

    def test_unknown_involution(self):
        with self.assertRaises(ValidationError):
            self.sys.involution("h3")


class TestTwistStd(unittest.TestCase):
    def setUp(self):
        self.k = 0.5
        self.sys = twist_std({"k": self.k})

    def test_reversible(self):
        samples = sample_box(self.sys, make_rng(2), 1000)
        report = check_reversibility(self.sys, samples)
        self.assertTrue(report.passed)
        self.assertLessEqual(report.max_residual, 1e-9)

    def test_exact_jacobian_matches_differences(self):
        for p in ([0.3, 0.2], [-2.0, 1.5], [3.0, -0.4]):
            exact = jacobian(self.sys.f, p)
            np.testing.assert_allclose(exact, finite_difference_jacobian(self.sys.f, p), atol=1e-7)
            self.assertAlmostEqual(np.linalg.det(exact), 1.0, places=12)

    def test_inverse(self):
        p = np.array([1.1, -0.7])
        np.testing.assert_allclose(self.sys.f.inverse(self.sys.f(p)), p, atol=1e-14)

    def test_fixed_point_traces(self):
        # (0, 0) is a saddle with trace 2 + k, (pi, 0) elliptic with trace 2 - k
        self.assertAlmostEqual(np.trace(jacobian(self.sys.f, [0.0, 0.0])), 2.0 + self.k, places=12)
        self.assertAlmostEqual(np.trace(jacobian(self.sys.f, [math.pi, 0.0])), 2.0 - self.k, places=12)

    def test_lattice_distance(self):
        self.assertLess(self.sys.distance([0.0, 0.0], [2.0 * math.pi, 0.0]), 1e-12)
        self.assertLess(self.sys.distance([0.1, 0.0], [0.1, 2.0 * math.pi]), 1e-12)

    def test_fg_curve_is_fixed(self):
        h2 = self.sys.h2
        for s in (-1.0, 0.4, 2.0):
            p = h2.curve_point(s)
            self.assertLess(np.linalg.norm(h2(p) - p), 1e-12)
            self.assertLess(abs(h2.signed_distance(p)), 1e-12)

    def test_g_curve_walks_both_branches(self):
        g = self.sys.g
        np.testing.assert_allclose(g.curve_point(0.5), [0.0, 0.5])
        np.testing.assert_allclose(g.curve_point(2.0 * math.pi + 0.5), [math.pi, 0.5], atol=1e-15)
        for s in (-2.0, 0.5, 3.5, 5.0, 8.0):
            p = g.curve_point(s)
            self.assertLess(abs(g.signed_distance(p)), 1e-15)
            self.assertLess(self.sys.distance(g(p), p), 1e-12)

    def test_differences_are_second_order(self):
        p = [0.3, 0.2]
        exact = jacobian(self.sys.f, p)
        coarse = np.max(np.abs(finite_difference_jacobian(self.sys.f, p, 0.1) - exact))
        fine = np.max(np.abs(finite_difference_jacobian(self.sys.f, p, 0.05) - exact))
        self.assertGreater(coarse, 0.0)
        self.assertGreaterEqual(coarse / fine, 3.0)

    def test_k_out_of_range(self):
        with self.assertRaises(ValidationError):
            twist_std({"k": 5.0})

    def test_unknown_parameter(self):
        with self.assertRaises(ValidationError):
            twist_std({"kk": 0.5})


class TestNfMap(unittest.TestCase):
    def test_reversible_within_integrator_budget(self):
        sys = builtin_system("nf-map", {"p": 1, "q": 5, "mu": -0.01, "psi": 1.0, "A": 1.0})
        samples = sample_box(sys, make_rng(3), 20)
        report = check_reversibility(sys, samples)
        self.assertEqual(report.tol, 1e-6)
        self.assertLessEqual(report.max_residual, 1e-6)

    def test_fg_curve_is_fixed(self):
        sys = builtin_system("nf-map", {"p": 1, "q": 5, "mu": -0.01, "psi": 1.0, "A": 1.0})
        h2 = sys.h2
        self.assertEqual(h2.curve_interval, (-0.3, 0.3))
        for s in (-0.25, -0.05, 0.0, 0.1, 0.25):
            p = h2.curve_point(s)
            self.assertLess(np.linalg.norm(h2(p) - p), 1e-9)
            ray = s * np.array([math.cos(math.pi / 5), math.sin(math.pi / 5)])
            self.assertLessEqual(np.linalg.norm(p - ray), 0.1 * abs(s) + 1e-12)

    def test_defaults_filled(self):
        rp, tol, guard = nf_params({})
        self.assertEqual((rp.p, rp.q, rp.psi), (1, 5, (1.0,)))
        self.assertEqual((tol, guard), (1e-12, 0.5))

    def test_numbered_psi(self):
        rp, _, _ = nf_params({"psi1": 1.0, "psi2": -0.5})
        self.assertEqual(rp.psi, (1.0, -0.5))

    def test_q_below_five_rejected(self):
        with self.assertRaises(ValidationError):
            builtin_system("nf-map", {"q": 4})

    def test_unknown_system(self):
        with self.assertRaises(ValidationError):
            builtin_system("henon")


class TestChecks(unittest.TestCase):
    def test_empty_samples(self):
        sys = rigid_rotation({})
        with self.assertRaises(ValidationError):
            check_involution(sys.g, np.empty((0, 2)))

    def test_non_finite_point(self):
        with self.assertRaises(ValidationError):
            as_point([math.nan, 0.0])

    def test_escaped_samples_are_skipped(self):
        sys = rigid_rotation({"psi": 0.3})
        report = check_reversibility(sys, [[0.5, 0.5], [20.0, 0.0]])
        self.assertEqual(report.skipped, 1)
        self.assertTrue(report.passed)

    def test_same_seed_same_samples(self):
        sys = twist_std({})
        a = sample_box(sys, make_rng(11), 50)
        b = sample_box(sys, make_rng(11), 50)
        np.testing.assert_array_equal(a, b)


if __name__ == "__main__":
    unittest.main()
