import math
import unittest

import numpy as np

from src.core.systems import rigid_rotation, twist_std
from src.kam.charts import AnnulusChart, CylinderChart, PolarChart, chart_for, fit_invariant_chart
from src.kam.diophantine import (
    DiophantineCertificate,
    DiophantineRefusal,
    check_gate,
    continued_fraction,
    convergents,
    diophantine_check,
    golden_mean,
)
from src.kam.fmn import Annulus, FmnSpec, curve_approx, find_fmn_fixed_points
from src.kam.rotation import (
    bump_weights,
    find_circle,
    image_rotation_number,
    rotation_from_angles,
    rotation_number,
)
from src.kam.twist import averaged_form_fit, twist_check
from src.utils import console
from src.utils.errors import NumericalError, ValidationError


class TestRotationNumbers(unittest.TestCase):
    def setUp(self):
        self.sys = rigid_rotation({"psi": 0.3})
        self.chart = PolarChart()

    def test_bump_weights(self):
        w = bump_weights(100)
        self.assertAlmostEqual(float(w.sum()), 1.0, places=14)
        self.assertTrue(np.all(w > 0))
        np.testing.assert_allclose(w, w[::-1], rtol=1e-12)

    def test_rigid_rotation(self):
        est = rotation_number(self.sys, self.chart, [0.5, 0.0], 2000)
        self.assertAlmostEqual(est.value, 0.3 / (2.0 * math.pi), places=12)
        self.assertLess(est.error, 1e-12)
        self.assertEqual(est.iterates, 2000)

    def test_image_turns_the_other_way(self):
        est = rotation_number(self.sys, self.chart, [0.5, 0.0], 500)
        image = image_rotation_number(self.sys, self.chart, [0.5, 0.0], 500)
        self.assertAlmostEqual(image.value, -est.value, places=12)

    def test_too_few_iterates(self):
        with self.assertRaises(ValidationError):
            rotation_from_angles(np.arange(10) * 0.1)

    def test_circle_not_bracketed(self):
        with self.assertRaises(ValidationError):
            find_circle(self.sys, self.chart, 0.3, (0.1, 0.5), count=200)

    def test_circle_on_the_shear(self):
        # k = 0: y is constant and the rotation number is y / 2 pi
        sys = twist_std({"k": 0.0})
        target = golden_mean()
        rho = find_circle(sys, CylinderChart(), target, (3.0, 4.5), count=200)
        self.assertAlmostEqual(rho, 2.0 * math.pi * target, places=9)


class TestDiophantine(unittest.TestCase):
    def test_golden(self):
        cert = diophantine_check(golden_mean(), 1.0, 10000)
        self.assertIsInstance(cert, DiophantineCertificate)
        self.assertAlmostEqual(cert.K, 0.381966, places=6)
        self.assertEqual(cert.k_star, 1)
        self.assertTrue(cert.as_dict()["certified"])

    def test_rational_refused(self):
        refusal = diophantine_check(0.5, 1.0, 100)
        self.assertIsInstance(refusal, DiophantineRefusal)
        self.assertEqual(refusal.k, 2)
        self.assertFalse(refusal.as_dict()["certified"])

    def test_bad_input(self):
        with self.assertRaises(ValidationError):
            diophantine_check(golden_mean(), 1.0, 0)
        with self.assertRaises(ValidationError):
            diophantine_check(golden_mean(), 0.0, 10)

    def test_continued_fraction(self):
        self.assertEqual(continued_fraction(0.5, 5), [0, 2])
        self.assertEqual(continued_fraction(golden_mean(), 6), [0, 1, 1, 1, 1, 1])

    def test_convergents(self):
        self.assertEqual(convergents(golden_mean(), 7), [(0, 1), (1, 1), (1, 2), (2, 3), (3, 5), (5, 8), (8, 13)])

    def test_gate(self):
        psi0 = golden_mean()
        self.assertTrue(check_gate(psi0, 3, 5))
        console.reset_warnings()
        self.assertFalse(check_gate(psi0, 0, 5))
        self.assertEqual(console.warning_count(), 1)
        with self.assertRaises(ValidationError):
            check_gate(psi0, 0, 5, "reject")
        with self.assertRaises(ValidationError):
            check_gate(psi0, 3, 5, "ignore")


class TestCharts(unittest.TestCase):
    def test_polar_round_trip(self):
        chart = PolarChart(center=(0.5, -0.25))
        p = chart.from_chart(0.3, 0.2)
        rho, theta = chart.to_chart(p)
        self.assertAlmostEqual(rho, 0.3, places=14)
        self.assertAlmostEqual(theta, 0.2, places=14)

    def test_cylinder_is_lifted(self):
        chart = CylinderChart(y0=1.0)
        self.assertEqual(chart.to_chart([4.0 * math.pi, 1.5]), (0.5, 2.0))
        angles = chart.lift_angles([np.array([0.0, 1.0]), np.array([10.0, 1.0])])
        self.assertAlmostEqual(angles[1], 10.0 / (2.0 * math.pi), places=14)

    def test_half_turn_is_ambiguous(self):
        chart = PolarChart()
        with self.assertRaises(NumericalError):
            chart.lift_angles([np.array([1.0, 0.0]), np.array([-1.0, 1e-9])])

    def test_default_charts(self):
        self.assertIsInstance(chart_for(twist_std({})), CylinderChart)
        self.assertIsInstance(chart_for(rigid_rotation({})), PolarChart)

    def test_chart_needs_both_directions(self):
        class RadiusOnly(AnnulusChart):
            def to_chart(self, p):
                return float(np.hypot(p[0], p[1])), 0.0

        with self.assertRaises(TypeError):
            RadiusOnly()
        with self.assertRaises(TypeError):
            AnnulusChart()

    def test_invariant_chart_of_the_shear(self):
        sys = twist_std({"k": 0.0})
        y0 = 2.0 * math.pi * golden_mean()
        chart = fit_invariant_chart(sys, y0, [-0.01, 0.0, 0.01], count=500, modes=4, degree=2)
        np.testing.assert_allclose(chart.from_chart(0.005, 0.3), [0.6 * math.pi, y0 + 0.005], atol=1e-9)
        rho, theta = chart.to_chart([0.6 * math.pi, y0 + 0.005])
        self.assertAlmostEqual(rho, 0.005, places=9)
        self.assertAlmostEqual(theta, 0.3, places=9)
        self.assertAlmostEqual(chart.rotation(0.0), golden_mean(), places=9)

    def test_invariant_chart_needs_enough_circles(self):
        with self.assertRaises(ValidationError):
            fit_invariant_chart(twist_std({"k": 0.0}), 1.0, [0.0, 0.01], degree=2)


class TestTwistAndAveragedForm(unittest.TestCase):
    def test_averaged_form_of_a_rotation_is_exact(self):
        report = averaged_form_fit(rigid_rotation({"psi": 0.3}), PolarChart(), [0.1, 0.2, 0.3])
        self.assertTrue(report.exact)
        self.assertTrue(report.passed)
        self.assertAlmostEqual(np.polyval(report.psi_coeffs, 0.2), 0.3 / (2.0 * math.pi), places=12)

    def test_averaged_form_input(self):
        with self.assertRaises(ValidationError):
            averaged_form_fit(rigid_rotation({}), PolarChart(), [0.1, 0.1])
        with self.assertRaises(ValidationError):
            averaged_form_fit(rigid_rotation({}), PolarChart(), [0.0, 0.1])

    def test_twist_of_the_shear(self):
        # rotation number y / 2 pi, slope 1 / 2 pi in y
        sys = twist_std({"k": 0.0})
        report = twist_check(sys, CylinderChart(y0=3.0), (-0.05, 0.05), 400)
        self.assertEqual(report.verdict, "pass")
        self.assertAlmostEqual(report.slope, 1.0 / (2.0 * math.pi), places=9)

    def test_rotation_has_no_twist(self):
        report = twist_check(rigid_rotation({"psi": 0.3}), PolarChart(), (0.1, 0.2), 100)
        self.assertEqual(report.verdict, "fail")
        self.assertFalse(report.passed)
        self.assertLess(abs(report.slope), 1e-9)

    def test_twist_input(self):
        sys = rigid_rotation({})
        with self.assertRaises(ValidationError):
            twist_check(sys, PolarChart(), (0.2, 0.1), 100)
        with self.assertRaises(ValidationError):
            twist_check(sys, PolarChart(), (0.1, 0.2), 100, offsets=3)


class TestFmn(unittest.TestCase):
    def test_spec(self):
        self.assertAlmostEqual(FmnSpec(3, 5).ratio, 0.6)
        with self.assertRaises(ValidationError):
            FmnSpec(1, 0)
        with self.assertRaises(ValidationError):
            FmnSpec(1, 65)

    def test_degenerate_rotation(self):
        # f^5 is the identity for psi = 2 pi / 5, every point is a root
        sys = rigid_rotation({"psi": 2.0 * math.pi / 5.0})
        chart = PolarChart()
        annulus = Annulus(curve_approx(sys, chart, 0.1, 200), curve_approx(sys, chart, 0.3, 200))
        report = find_fmn_fixed_points(sys, chart, FmnSpec(1, 5), annulus)
        self.assertTrue(report.degenerate)
        self.assertEqual(report.orbits, [])
        self.assertEqual(report.seeds, 48)

    def test_half_resonance_of_the_standard_map(self):
        # at least two orbits of rotation 1/2 between the circles, a saddle and a non-saddle
        sys = twist_std({"k": 0.5})
        chart = CylinderChart()
        annulus = Annulus(curve_approx(sys, chart, 2.6, 1000), curve_approx(sys, chart, 3.7, 1000))
        report = find_fmn_fixed_points(sys, chart, FmnSpec(1, 2), annulus)
        self.assertFalse(report.degenerate)
        self.assertGreaterEqual(len(report.orbits), 2)
        self.assertGreaterEqual(report.positive_saddles, 1)
        self.assertGreaterEqual(report.others, 1)
        for orbit in report.orbits:
            self.assertEqual(orbit.period, 2)
            self.assertAlmostEqual(orbit.jacobian_product, 1.0, places=9)
            self.assertLess(abs(orbit.points[0][1] - math.pi), 0.5)

    def test_ratio_outside_annulus(self):
        sys = twist_std({"k": 0.0})
        chart = CylinderChart()
        annulus = Annulus(curve_approx(sys, chart, 3.0, 200), curve_approx(sys, chart, 3.5, 200))
        with self.assertRaises(ValidationError):
            find_fmn_fixed_points(sys, chart, FmnSpec(1, 5), annulus)


if __name__ == "__main__":
    unittest.main()
