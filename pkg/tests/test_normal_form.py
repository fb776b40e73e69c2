import cmath
import math
import unittest

from src.normal_form.equilibria import (
    asymmetric_seeds,
    classify_linearization,
    count_by_kind,
    find_equilibria,
    reduce_equilibria,
    split_counts,
)
from src.normal_form.field import (
    divergence_cartesian,
    divergence_fd,
    eval_field_cartesian,
    eval_field_polar,
    polar_to_cartesian_velocity,
    sample_portrait,
)
from src.normal_form.flow import area_distortion, integrate_flow, poincare_inverse, poincare_map
from src.normal_form.params import ResonantParams, default_psi_length, normalize_sign, pad_psi
from src.normal_form.pendulum import expected_exponent, pendulum_deviation, rescaling, solve_rho_star
from src.utils.errors import EscapeError, ValidationError
from src.utils.helpers import make_rng


def params(q=5, mu=-0.01, psi=(1.0,), A=1.0, B=0.0, C=0.0, p=1):
    return ResonantParams(p=p, q=q, mu=mu, psi=psi, A=A, B=B, C=C)


class TestParams(unittest.TestCase):
    def test_q_at_least_five(self):
        with self.assertRaises(ValidationError):
            params(q=4)

    def test_coprime(self):
        with self.assertRaises(ValidationError):
            params(p=2, q=6)

    def test_psi_polynomial(self):
        rp = params(psi=(1.0, 2.0))
        self.assertAlmostEqual(rp.Psi(0.1), 0.0102, places=15)
        self.assertAlmostEqual(rp.dPsi(0.1), 0.208, places=15)

    def test_default_psi_length(self):
        self.assertEqual(default_psi_length(5), 2)
        self.assertEqual(default_psi_length(6, conservative=False), 3)
        self.assertEqual(pad_psi([1.0], 7), (1.0, 0.0, 0.0))

    def test_normalize_sign(self):
        rp, shift = normalize_sign(params(A=-1.0, B=0.5, C=0.25))
        self.assertEqual((rp.A, rp.B, rp.C), (1.0, -0.5, -0.25))
        self.assertAlmostEqual(shift, math.pi / 5)
        same, none = normalize_sign(params())
        self.assertEqual(none, 0.0)
        self.assertEqual(same, params())

    def test_sector_shift_flips_resonant_terms(self):
        # V'(z e^{i pi/q}) e^{-i pi/q} = V(z) with V' the flipped field
        original = params(q=6, A=-0.7, B=-0.3, C=0.2, psi=(1.0, 0.4))
        flipped, shift = normalize_sign(original)
        z = 0.2 + 0.1j
        turn = cmath.exp(1j * shift)
        lhs = eval_field_cartesian(flipped, z * turn) / turn
        self.assertAlmostEqual(abs(lhs - eval_field_cartesian(original, z)), 0.0, places=14)


class TestField(unittest.TestCase):
    def test_conservative_divergence_vanishes(self):
        rp = params(psi=(1.0, 0.3))
        rng = make_rng(5)
        for x, y in rng.uniform(-0.4, 0.4, size=(1000, 2)):
            self.assertLessEqual(abs(divergence_cartesian(rp, complex(x, y))), 1e-13)

    def test_divergence_closed_form(self):
        rp = params(q=6, A=0.5, B=1.0, C=-0.5)
        for z in (0.3 + 0.1j, -0.2 + 0.25j, 0.05 - 0.3j):
            rho, theta = abs(z), cmath.phase(z)
            closed = 2.0 * rho ** 6 * math.sin(6 * theta) * (rp.C - 7 * rp.B)
            self.assertAlmostEqual(divergence_cartesian(rp, z), closed, places=13)
            self.assertAlmostEqual(divergence_cartesian(rp, z), divergence_fd(rp, z), places=7)
            self.assertNotEqual(divergence_cartesian(rp, z), 0.0)

    def test_polar_matches_cartesian(self):
        rp = params(q=7, A=0.8, B=0.2, C=0.1, psi=(1.0, -0.5))
        rho, theta = 0.3, 0.4
        rho_dot, phi_dot = eval_field_polar(rp, rho, 7 * theta)
        v = polar_to_cartesian_velocity(rho, theta, rho_dot, phi_dot / 7)
        z = rho * cmath.exp(1j * theta)
        self.assertAlmostEqual(abs(v - eval_field_cartesian(rp, z)), 0.0, places=14)

    def test_portrait_grid(self):
        rows = sample_portrait(params(), (0.05, 0.15), (-math.pi, math.pi), (4, 6))
        self.assertEqual(len(rows), 24)
        self.assertEqual(rows[0][:2], (0.05, -math.pi))
        with self.assertRaises(ValidationError):
            sample_portrait(params(), (0.0, 0.1), (0.0, 1.0), (4, 4))


class TestFlow(unittest.TestCase):
    def test_pure_twist_flow_is_exact_rotation(self):
        # A = B = C = 0: z(t) = z0 exp(i (mu + |z0|^2) t)
        rp = params(A=0.0, mu=0.02)
        z0 = 0.3 - 0.1j
        expected = z0 * cmath.exp(1j * (0.02 + abs(z0) ** 2))
        self.assertLess(abs(integrate_flow(rp, z0) - expected), 1e-10)

    def test_inverse(self):
        rp = params(B=0.4, C=-0.3)
        z = 0.2 + 0.15j
        self.assertLess(abs(poincare_inverse(rp, poincare_map(rp, z)) - z), 1e-9)

    def test_conservative_area(self):
        dets = area_distortion(params(), 0.2 + 0.1j, 5)
        self.assertEqual(len(dets), 5)
        self.assertLessEqual(max(abs(d - 1.0) for d in dets), 1e-6)

    def test_dissipative_area(self):
        rp = params(q=6, mu=0.0, A=0.1, B=1.0, C=0.0)
        z0 = 0.3 * cmath.exp(1j * math.pi / 12)
        self.assertGreater(abs(area_distortion(rp, z0, 1)[0] - 1.0), 1e-4)

    def test_guard(self):
        with self.assertRaises(EscapeError):
            integrate_flow(params(), 0.6)


class TestEquilibria(unittest.TestCase):
    def test_two_q_equilibria(self):
        for q in (5, 6, 7):
            for sign in (1.0, -1.0):
                for mag in (1e-2, 1e-3):
                    with self.subTest(q=q, sign=sign, mu=mag):
                        rp = params(q=q, psi=(sign,), A=sign, mu=-sign * mag)
                        eqs = find_equilibria(rp)
                        counts = count_by_kind(eqs)
                        self.assertEqual(len(eqs), 2 * q)
                        self.assertEqual(counts["saddle"], q)
                        self.assertEqual(counts["center"], q)
                        for eq in eqs:
                            self.assertLessEqual(abs(math.sin(q * eq.theta)), 1e-10)
                            self.assertTrue(eq.symmetric)

    def test_none_on_the_wrong_side(self):
        for q in (5, 6, 7):
            with self.subTest(q=q):
                self.assertEqual(find_equilibria(params(q=q, mu=0.01)), [])

    def test_reduce(self):
        eqs = find_equilibria(params())
        reduced = reduce_equilibria(eqs)
        self.assertEqual(len(reduced), 2)
        self.assertEqual(sorted(e.kind for e in reduced), ["center", "saddle"])

    def test_asymmetric_pair(self):
        # rho^2 = A / (B - C) = 1e-4
        rp = params(q=6, psi=(1.0,), A=2e-4, B=1.0, C=-1.0, mu=-1e-4)
        sym, asym = split_counts(rp)
        self.assertEqual(asym, 2)
        pair = [e for e in reduce_equilibria(find_equilibria(rp)) if not e.symmetric]
        for eq in pair:
            self.assertAlmostEqual(eq.rho, 0.01, delta=0.002)
        self.assertEqual(sorted(e.kind for e in pair), ["sink", "source"])

    def test_no_isolated_asymmetric_when_b_is_zero(self):
        rp = params(q=6, A=2e-4, B=0.0, C=-1.0, mu=-2e-4)
        self.assertEqual(split_counts(rp)[1], 0)

    def test_no_asymmetric_when_a_is_zero(self):
        for mu in (-1e-4, -1e-2):
            with self.subTest(mu=mu):
                rp = params(q=6, A=0.0, B=1.0, C=-1.0, mu=mu)
                self.assertEqual(asymmetric_seeds(rp), [])
                eqs = find_equilibria(rp)
                self.assertGreater(len(eqs), 0)
                self.assertTrue(all(e.symmetric for e in eqs))
                self.assertEqual(split_counts(rp)[1], 0)

    def test_psi1_zero_rejected(self):
        with self.assertRaises(ValidationError):
            find_equilibria(params(psi=(0.0,)))

    def test_classify_linearization(self):
        self.assertEqual(classify_linearization([[0.0, 1.0], [-1.0, 0.0]])[0], "center")
        self.assertEqual(classify_linearization([[1.0, 0.0], [0.0, -1.0]])[0], "saddle")
        self.assertEqual(classify_linearization([[-1.0, 0.0], [0.0, -2.0]])[0], "sink")
        self.assertEqual(classify_linearization([[1.0, 2.0], [-2.0, 1.0]])[0], "source")
        self.assertEqual(classify_linearization([[0.0, 1.0], [0.0, 0.0]])[0], "degenerate")
        # tiny but clean spectra still classify (collar is relative)
        self.assertEqual(classify_linearization([[-1e-14, 0.0], [0.0, -2e-14]])[0], "sink")


class TestPendulum(unittest.TestCase):
    def test_resonant_circle(self):
        rp = params(mu=-0.01)
        rho = solve_rho_star(rp)
        self.assertAlmostEqual(rp.mu + rp.Psi(rho), 0.0, places=15)
        scale = rescaling(rp)
        self.assertAlmostEqual(scale.rho_star, rho)
        self.assertGreater(scale.u_scale, 0.0)

    def test_deviation_shrinks_with_mu(self):
        rp = params()
        big = pendulum_deviation(rp, -1e-3)
        small = pendulum_deviation(rp, -1e-6)
        self.assertLess(small, big)

    def test_sign_normalized(self):
        # A psi1 < 0 is turned by pi/q, same deviation
        plain = pendulum_deviation(params(A=1.0), -1e-4)
        turned = pendulum_deviation(params(A=-1.0), -1e-4)
        self.assertAlmostEqual(plain, turned, places=12)

    def test_needs_conservative(self):
        with self.assertRaises(ValidationError):
            pendulum_deviation(params(B=0.1), -1e-4)

    def test_needs_real_circle(self):
        with self.assertRaises(ValidationError):
            pendulum_deviation(params(), 1e-4)

    def test_expected_exponent(self):
        self.assertEqual(expected_exponent(5), 0.25)
        self.assertEqual(expected_exponent(8), 1.0)


if __name__ == "__main__":
    unittest.main()
