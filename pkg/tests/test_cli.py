import json
import os
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

import numpy as np

from src.cli import main as cli
from src.cli.commands import COMMANDS
from src.cli.config import validate
from src.cli.report import MANIFEST, ReportBundle, cell, plain, verify_manifest
from src.utils.errors import NumericalError, ValidationError

CHECK_REV = """
[run]
subcommand = check-rev
seed = 4

[system]
name = rigid-rotation

[params]
psi = 0.3

[options]
samples = 200
"""

NF_EQUILIBRIA = """
[run]
subcommand = nf-equilibria
seed = 3

[params]
q = 5
mu = -0.01
A = 1.0
"""


class TestValidate(unittest.TestCase):
    def test_defaults_are_filled_and_recorded(self):
        config = validate("[run]\nsubcommand = check-rev\n")
        self.assertEqual(config.system, "rigid-rotation")
        self.assertEqual(config.options["samples"], 1000)
        self.assertEqual(config.options["tol"], 1e-9)
        self.assertEqual(config.defaults["options.tol"], 1e-9)
        self.assertEqual(config.defaults["system.name"], "rigid-rotation")
        self.assertEqual((config.seed, config.threads), (0, 1))
        self.assertIn("run.seed", config.defaults)

    def test_overrides_win(self):
        config = validate(CHECK_REV, {"seed": 7, "threads": None})
        self.assertEqual(config.seed, 7)
        self.assertNotIn("run.seed", config.defaults)

    def test_parameter_case_is_kept(self):
        config = validate(NF_EQUILIBRIA.replace("A = 1.0", "A = 1.0\nB = 0.5\nC = -0.5"))
        self.assertEqual((config.params["A"], config.params["B"], config.params["C"]), (1.0, 0.5, -0.5))

    def test_unknown_option_suggests(self):
        with self.assertRaises(ValidationError) as ctx:
            validate(NF_EQUILIBRIA + "\n[options]\nrho_mx = 0.1\n")
        self.assertIn("did you mean 'rho_max'", ctx.exception.diagnostics["errors"][0])

    def test_q_below_five(self):
        with self.assertRaises(ValidationError) as ctx:
            validate(NF_EQUILIBRIA.replace("q = 5", "q = 4"))
        self.assertTrue(any("q must be >= 5" in e for e in ctx.exception.diagnostics["errors"]))

    def test_negative_resolution(self):
        text = "[run]\nsubcommand = mu-sweep\n[params]\nq = 6\n[options]\nresolution = -3\n"
        with self.assertRaises(ValidationError) as ctx:
            validate(text)
        self.assertTrue(any("resolution" in e for e in ctx.exception.diagnostics["errors"]))

    def test_errors_are_aggregated(self):
        text = CHECK_REV.replace("samples = 200", "tol = -1\nsampels = 10")
        with self.assertRaises(ValidationError) as ctx:
            validate(text)
        errors = ctx.exception.diagnostics["errors"]
        self.assertEqual(len(errors), 2)
        self.assertTrue(any("did you mean 'samples'" in e for e in errors))

    def test_unknown_subcommand(self):
        with self.assertRaises(ValidationError) as ctx:
            validate("[run]\nsubcommand = check-ref\n")
        self.assertIn("did you mean 'check-rev'", ctx.exception.diagnostics["errors"][0])

    def test_ranges(self):
        text = "[run]\nsubcommand = find-sym-orbits\n[options]\ns_lo = 1\ns_hi = -1\n"
        with self.assertRaises(ValidationError) as ctx:
            validate(text)
        self.assertTrue(any("s_lo < s_hi" in e for e in ctx.exception.diagnostics["errors"]))

    def test_diophantine_takes_no_system(self):
        with self.assertRaises(ValidationError):
            validate("[run]\nsubcommand = diophantine\n[system]\nname = twist-std\n")


class TestReportHelpers(unittest.TestCase):
    def test_plain(self):
        value = {"a": float("inf"), "b": 1 + 2j, "c": np.float64(0.5), "d": (1, np.int64(2)),
                 "e": np.bool_(True), "f": np.array([0.25, float("nan")])}
        self.assertEqual(plain(value), {"a": None, "b": [1.0, 2.0], "c": 0.5, "d": [1, 2], "e": True,
                                        "f": [0.25, None]})

    def test_cell(self):
        self.assertEqual(cell(True), "true")
        self.assertEqual(cell(0.1), "0.1")
        self.assertEqual(cell(None), "")
        self.assertEqual(cell(float("nan")), "")
        self.assertEqual(cell([1, 2]), "[1,2]")


class TestRuns(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write_config(self, text: str) -> str:
        path = self.root / "run.ini"
        path.write_text(text, encoding="utf-8")
        return str(path)

    def test_check_rev_is_deterministic(self):
        config = validate(CHECK_REV)
        first = cli.run(config, str(self.root / "a"))
        second = cli.run(config, str(self.root / "b"))
        a = (first.out_dir / "check.json").read_bytes()
        b = (second.out_dir / "check.json").read_bytes()
        self.assertEqual(a, b)
        body = json.loads(a)
        self.assertTrue(body["passed"])
        self.assertEqual((body["schema_version"], body["seed"]), (1, 4))
        self.assertEqual(verify_manifest(str(first.out_dir)), [])

    def test_manifest_catches_edits(self):
        bundle = cli.run(validate(CHECK_REV), str(self.root / "a"))
        with open(bundle.out_dir / "check.json", "a", encoding="utf-8") as f:
            f.write(" ")
        self.assertEqual(verify_manifest(str(bundle.out_dir)), ["check.json"])

    def test_nf_equilibria_bundle(self):
        bundle = cli.run(validate(NF_EQUILIBRIA), str(self.root / "eq"))
        lines = (bundle.out_dir / "equilibria.csv").read_text(encoding="utf-8").splitlines()
        self.assertEqual(lines[0], "# seed: 3")
        self.assertEqual(len(lines), 12)
        manifest = json.loads((bundle.out_dir / MANIFEST).read_text(encoding="utf-8"))
        self.assertEqual(manifest["status"], "ok")
        self.assertEqual(manifest["summary"]["total"], 10)
        self.assertEqual(manifest["summary"]["by_kind"]["saddle"], 5)
        self.assertEqual([f["name"] for f in manifest["files"]], ["equilibria.csv", "equilibria.json"])

    def test_diophantine_bundle(self):
        config = validate("[run]\nsubcommand = diophantine\n[options]\npsi0 = golden\nterms = 6\n")
        bundle = cli.run(config, str(self.root / "dio"))
        body = json.loads((bundle.out_dir / "diophantine.json").read_text(encoding="utf-8"))
        self.assertTrue(body["result"]["certified"])
        self.assertEqual(body["result"]["k_star"], 1)
        self.assertEqual(body["convergents"][:4], [[0, 1], [1, 1], [1, 2], [2, 3]])

    def test_exit_ok(self):
        out = self.root / "ok"
        code = cli.main(["--config", self.write_config(CHECK_REV), "--out", str(out)])
        self.assertEqual(code, cli.EXIT_OK)
        self.assertTrue((out / MANIFEST).exists())

    def test_exit_validation(self):
        out = self.root / "bad"
        code = cli.main(["--config", self.write_config(NF_EQUILIBRIA.replace("q = 5", "q = 4")),
                         "--out", str(out)])
        self.assertEqual(code, cli.EXIT_VALIDATION)
        self.assertFalse(out.exists())

    def test_missing_config(self):
        code = cli.main(["--config", os.path.join(self.tmp.name, "nope.ini")])
        self.assertEqual(code, cli.EXIT_VALIDATION)

    def test_symmetric_confirm_claims_no_swap(self):
        text = ("[run]\nsubcommand = map-confirm\n[system]\nname = nf-map\n"
                "[params]\nq = 5\nmu = -0.01\nA = 1.0\n[options]\nwhich = symmetric\n")
        bundle = cli.run(validate(text), str(self.root / "confirm"))
        manifest = json.loads((bundle.out_dir / MANIFEST).read_text(encoding="utf-8"))
        self.assertEqual(manifest["summary"]["confirmed"], 2)
        self.assertEqual(manifest["summary"]["matches"], 2)
        self.assertFalse(manifest["summary"]["pairs_swapped"])

    def test_fg_search_on_the_normal_form_map(self):
        text = ("[run]\nsubcommand = find-sym-orbits\n[system]\nname = nf-map\n"
                "[params]\nq = 5\nmu = -0.01\nA = 1.0\n"
                "[options]\ninvolution = fg\ntarget = g\ns_lo = 0.05\ns_hi = 0.15\nk = 2\nsamples = 40\n")
        bundle = cli.run(validate(text), str(self.root / "fg"))
        manifest = json.loads((bundle.out_dir / MANIFEST).read_text(encoding="utf-8"))
        self.assertEqual(manifest["status"], "ok")
        self.assertGreater(manifest["summary"]["orbits"], 0)
        self.assertNotIn("window_failures", manifest["diagnostics"])

    def test_unwritable_out_is_a_validation_error(self):
        blocker = self.root / "blocker"
        blocker.write_text("not a directory", encoding="utf-8")
        with self.assertRaises(ValidationError) as ctx:
            ReportBundle(str(blocker / "out"), 0)
        self.assertEqual(ctx.exception.diagnostics["out_dir"], str(blocker / "out"))
        code = cli.main(["--config", self.write_config(CHECK_REV), "--out", str(blocker / "out")])
        self.assertEqual(code, cli.EXIT_VALIDATION)

    def test_exit_numerical_writes_manifest(self):
        def broken(ctx):
            raise NumericalError("solver gave up", {"steps": 12})

        out = self.root / "num"
        with patch.dict(COMMANDS, {"check-rev": broken}):
            code = cli.main(["--config", self.write_config(CHECK_REV), "--out", str(out)])
        self.assertEqual(code, cli.EXIT_NUMERICAL)
        manifest = json.loads((out / MANIFEST).read_text(encoding="utf-8"))
        self.assertEqual(manifest["status"], "numerical-error")
        self.assertEqual(manifest["diagnostics"]["error"]["steps"], 12)


if __name__ == "__main__":
    unittest.main()
