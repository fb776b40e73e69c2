import math
import unittest
from dataclasses import replace

from src.core.systems import nf_system
from src.normal_form.equilibria import find_equilibria, reduce_equilibria
from src.normal_form.params import ResonantParams
from src.orbits.orbit import g_pair
from src.scan.certify import (
    MAP_TOL,
    certify_sink_source,
    map_collar,
    map_frame,
    map_level_confirm,
    pair_swapped,
)
from src.scan.pool import GridPool
from src.scan.sweeps import (
    ScanGrid,
    _boundary_eigen,
    centered_frame,
    interval_widths,
    mu_sweep,
    pitchfork_interval,
    pitchfork_scan,
)
from src.utils.errors import ValidationError


def asymmetric_params(A=2e-4, B=1.0, C=-1.0, q=6):
    rp = ResonantParams(p=1, q=q, mu=0.0, psi=(1.0,), A=A, B=B, C=C)
    return rp.with_mu(centered_frame(rp)[0])


class TestGrid(unittest.TestCase):
    def test_point_order(self):
        grid = ScanGrid(("A", "mu"), ((0.0, 1.0), (-1.0, 1.0)), (2, 3))
        self.assertEqual(grid.points(), [(0.0, -1.0), (0.0, 0.0), (0.0, 1.0),
                                         (1.0, -1.0), (1.0, 0.0), (1.0, 1.0)])

    def test_validation(self):
        with self.assertRaises(ValidationError):
            ScanGrid(("nu",), ((0.0, 1.0),), (3,))
        with self.assertRaises(ValidationError):
            ScanGrid(("mu",), ((1.0, 0.0),), (3,))
        with self.assertRaises(ValidationError):
            ScanGrid(("mu",), ((0.0, 1.0),), (1,))
        with self.assertRaises(ValidationError):
            ScanGrid(("mu", "A"), ((0.0, 1.0),), (3,))


class TestGridPool(unittest.TestCase):
    def fn(self, x):
        if x % 3 == 0:
            raise ValidationError(f"bad point {x}", {"x": x})
        return x * x

    def test_failures_recorded_in_order(self):
        for threads in (1, 3):
            with self.subTest(threads=threads):
                pool = GridPool(threads)
                results = pool.map(self.fn, list(range(10)))
                self.assertEqual(results, [None, 1, 4, None, 16, 25, None, 49, 64, None])
                self.assertEqual([f.index for f in pool.failures], [0, 3, 6, 9])
                self.assertEqual(pool.failures[1].diagnostics, {"x": 3})

    def test_bad_threads(self):
        with self.assertRaises(ValidationError):
            GridPool(0)


class TestMuSweep(unittest.TestCase):
    def test_birth_brackets_zero(self):
        rp = ResonantParams(p=1, q=6, mu=0.0, psi=(1.0,), A=1.0)
        result = mu_sweep(rp, (-0.01, 0.01), 20)
        self.assertEqual(len(result.rows), 20)
        self.assertEqual(len(result.events), 1)
        event = result.events[0]
        lo, hi = event.location["mu"]
        self.assertTrue(lo < 0.0 < hi)
        self.assertEqual(event.before["count"], 12)
        self.assertEqual(event.after["count"], 0)
        self.assertLess(abs(event.estimate["mu"]), 1e-6)
        self.assertEqual(result.failures, [])

    def test_negative_twist_births_above_zero(self):
        rp = ResonantParams(p=1, q=6, mu=0.0, psi=(-1.0,), A=1.0)
        result = mu_sweep(rp, (-0.01, 0.01), 20)
        self.assertEqual(len(result.events), 1)
        event = result.events[0]
        lo, hi = event.location["mu"]
        self.assertTrue(lo < 0.0 < hi)
        self.assertEqual(event.before["count"], 0)
        self.assertEqual(event.after["count"], 12)
        self.assertLess(abs(event.estimate["mu"]), 1e-6)
        for row in result.rows:
            self.assertEqual(row["count"], 12 if row["mu"] > 0 else 0)

    def test_threads_match(self):
        rp = ResonantParams(p=1, q=5, mu=0.0, psi=(1.0,), A=1.0)
        one = mu_sweep(rp, (-0.01, 0.01), 8, threads=1, refine=False)
        two = mu_sweep(rp, (-0.01, 0.01), 8, threads=2, refine=False)
        self.assertEqual(one.rows, two.rows)

    def test_needs_conservative(self):
        rp = ResonantParams(p=1, q=6, mu=0.0, psi=(1.0,), A=1.0, B=0.5)
        with self.assertRaises(ValidationError):
            mu_sweep(rp, (-0.01, 0.01), 10)


class TestPitchfork(unittest.TestCase):
    def test_interval(self):
        found = pitchfork_interval(asymmetric_params())
        self.assertAlmostEqual(found.rho, 0.01, places=12)
        self.assertTrue(found.contains_prediction)
        # half width 2 |B| rho^q
        self.assertAlmostEqual(found.width / (4.0 * 0.01 ** 6), 1.0, places=5)

    def test_boundary_has_a_zero_eigenvalue(self):
        # a symmetric equilibrium goes degenerate where the pair is born
        rp = asymmetric_params()
        found = pitchfork_interval(rp)
        inside = _boundary_eigen(rp.with_mu(found.exact_center), found.rho)
        self.assertGreater(inside, 0.0)
        self.assertEqual(len(found.boundary_eigen), 2)
        for edge in found.boundary_eigen:
            self.assertLess(edge, 1e-2 * inside)

    def test_widths_shrink_like_a_cubed(self):
        widths = [iv.width for iv in interval_widths(asymmetric_params(), [2e-4, 1e-4, 5e-5])]
        self.assertGreater(widths[0], widths[1])
        self.assertGreater(widths[1], widths[2])
        self.assertAlmostEqual(widths[0] / widths[1], 8.0, delta=0.05)

    def test_no_window_without_b(self):
        self.assertIsNone(pitchfork_interval(asymmetric_params(B=0.0)))

    def test_needs_b_ne_c(self):
        with self.assertRaises(ValidationError):
            pitchfork_interval(ResonantParams(p=1, q=6, mu=-1e-4, psi=(1.0,), A=2e-4, B=1.0, C=1.0))

    def test_scan_region(self):
        # s steps of 0.45 keep the grid off the window edges at s = +-1
        result = pitchfork_scan(asymmetric_params(), (1e-4, 2e-4), (-1.8, 1.8), (2, 9))
        self.assertEqual(len(result.rows), 18)
        self.assertEqual(result.rows[0]["s"], -1.8)
        inside = [r["s"] for r in result.rows if r["reduced_asymmetric"] > 0]
        self.assertEqual(len(inside), 10)
        self.assertTrue(all(abs(s) < 1.0 for s in inside))
        self.assertEqual(len(result.events), 4)
        self.assertEqual(len(result.intervals), 2)
        self.assertEqual(len(result.region), 10)

    def test_bad_frame(self):
        with self.assertRaises(ValidationError):
            pitchfork_scan(asymmetric_params(), (1e-4, 2e-4), (-2.0, 2.0), (2, 9), mu_frame="relative")


class TestCertify(unittest.TestCase):
    def test_certified_pair(self):
        cert = certify_sink_source(asymmetric_params())
        self.assertTrue(cert.certified)
        self.assertEqual(cert.criterion, 2.0)
        self.assertEqual((cert.sink.kind, cert.source.kind), ("sink", "source"))
        sink_trace = sum(ev.real for ev in cert.sink.eigenvalues)
        source_trace = sum(ev.real for ev in cert.source.eigenvalues)
        self.assertLessEqual(abs(sink_trace + source_trace), 1e-6 * abs(sink_trace))
        self.assertAlmostEqual(cert.sink.phi + cert.source.phi, 2.0 * math.pi, places=9)

    def test_saddles_when_criterion_fails(self):
        cert = certify_sink_source(asymmetric_params(A=-2e-4, B=1.0, C=2.0))
        self.assertFalse(cert.certified)
        self.assertLess(cert.criterion, 0.0)
        self.assertIn("saddle", cert.reason)

    def test_no_pair(self):
        with self.assertRaises(ValidationError):
            certify_sink_source(asymmetric_params(B=0.0))


class TestMapConfirm(unittest.TestCase):
    def test_center_becomes_elliptic(self):
        rp = ResonantParams(p=1, q=5, mu=-0.01, psi=(1.0,), A=1.0)
        center = [e for e in reduce_equilibria(find_equilibria(rp)) if e.kind == "center"][0]
        conf = map_level_confirm(rp, center)
        self.assertTrue(conf.matches)
        self.assertEqual(conf.map_kind, "elliptic")
        self.assertLessEqual(conf.residual_history[-1], 1e-12)

    def test_sink_pairs_with_source(self):
        rp = asymmetric_params()
        sink = certify_sink_source(rp).sink
        conf = map_level_confirm(rp, sink)
        self.assertEqual(conf.map_kind, "sink")
        self.assertTrue(conf.matches)
        sys = nf_system(rp, tol=MAP_TOL)
        image = g_pair(sys, conf.orbit, 1e-6, map_collar(sink, rp.q), map_frame(sink))
        self.assertEqual(image.kind, "source")
        for m, inv in zip(conf.orbit.multipliers, reversed(image.multipliers)):
            self.assertAlmostEqual(abs(m * inv), 1.0, places=11)

    def test_sink_moduli_follow_the_flow_rates(self):
        # T^q is the time-q flow at the pair: moduli are 1 + q Re(lambda)
        rp = asymmetric_params()
        sink = certify_sink_source(rp).sink
        conf = map_level_confirm(rp, sink)
        predicted = sorted(-rp.q * ev.real for ev in sink.eigenvalues)
        measured = sorted(1.0 - abs(m) for m in conf.orbit.multipliers)
        for want, got in zip(predicted, measured):
            self.assertAlmostEqual(got / want, 1.0, delta=0.05)
        self.assertGreater(conf.delta, 0.0)
        self.assertLess(abs(conf.orbit.jacobian_product - 1.0 + sum(predicted)), 0.05 * sum(predicted))

    def test_only_sink_and_source_swap(self):
        self.assertTrue(pair_swapped("sink", "source"))
        self.assertTrue(pair_swapped("source", "sink"))
        self.assertFalse(pair_swapped("saddle", "saddle"))
        self.assertFalse(pair_swapped("sink", "sink"))
        self.assertFalse(pair_swapped("elliptic", "elliptic"))

    def test_degenerate_refused(self):
        rp = ResonantParams(p=1, q=5, mu=-0.01, psi=(1.0,), A=1.0)
        eq = reduce_equilibria(find_equilibria(rp))[0]
        with self.assertRaises(ValidationError):
            map_level_confirm(rp, replace(eq, kind="degenerate"))


if __name__ == "__main__":
    unittest.main()
