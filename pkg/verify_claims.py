#!/usr/bin/env python3
"""
Claim Verification Script for revlab

Runs the slower end to end checks: the shipped configs go through the same
run() the CLI uses and their summaries are compared with the expected
numbers. Run this after numerical changes.
"""
import csv
import json
import math
import os
import sys
import tempfile
import time
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.cli.config import load, validate
from src.cli.main import run
from src.normal_form.equilibria import count_by_kind, find_equilibria, reduce_equilibria
from src.normal_form.field import divergence_cartesian
from src.normal_form.flow import area_distortion
from src.normal_form.params import ResonantParams
from src.scan.certify import map_level_confirm
from src.scan.sweeps import centered_frame, interval_widths
from src.utils import console
from src.utils.helpers import make_rng

CONFIGS = Path(__file__).resolve().parent / "configs"
WORK = tempfile.TemporaryDirectory()


def run_config(name: str, tag: str = "") -> dict:
    """summary of one shipped config, bundle written to a scratch dir"""
    out = Path(WORK.name) / f"{Path(name).stem}{tag}"
    bundle = run(load(str(CONFIGS / name)), str(out))
    return json.loads((bundle.out_dir / "manifest.json").read_text(encoding="utf-8"))["summary"]


def report(ok: bool, message: str) -> bool:
    print(f"  {'[PASS]' if ok else '[FAIL]'} {message}")
    return ok


def check_reversibility():
    """fgfg = id on 1000 samples for every built-in"""
    print("[CHECK] Checking reversibility of the built-in systems...")
    start = time.perf_counter()
    results = []
    for name in ("check_rev.ini", "check_rev_nf.ini"):
        summary = run_config(name)
        results.append(report(summary["passed"], f"{name}: max residual {summary['max_residual']:.3e}"))
    twist = validate("[run]\nsubcommand = check-rev\nseed = 7\n[system]\nname = twist-std\n")
    bundle = run(twist, str(Path(WORK.name) / "check_rev_twist"))
    results.append(report((bundle.out_dir / "check.json").exists(), "twist-std bundle written"))
    print(f"  runtime {time.perf_counter() - start:.1f}s")
    return all(results)


def check_equilibrium_counts():
    """2q symmetric equilibria on one side of mu = 0, none on the other"""
    print("\n[CHECK] Checking equilibrium counts of the conservative form...")
    bad = []
    for q in (5, 6, 7):
        for sign in (1.0, -1.0):
            for mag in (1e-2, 1e-3):
                rp = ResonantParams(p=1, q=q, mu=-sign * mag, psi=(sign,), A=sign)
                eqs = find_equilibria(rp)
                counts = count_by_kind(eqs)
                sym = all(abs(math.sin(q * e.theta)) <= 1e-10 for e in eqs)
                if len(eqs) != 2 * q or counts["saddle"] != q or counts["center"] != q or not sym:
                    bad.append((q, sign, mag, len(eqs)))
                if find_equilibria(rp.with_mu(sign * mag)):
                    bad.append((q, sign, -mag, "wrong side"))
    return report(not bad, "2q equilibria, q saddles + q centers" if not bad else f"mismatches: {bad}")


def check_pendulum():
    print("\n[CHECK] Checking the pendulum limit...")
    summary = run_config("pendulum.ini")
    slope = summary["slope"]
    return report(0.15 <= slope <= 0.35, f"deviation slope {slope:.4f} (expected about {summary['expected_exponent']})")


def check_pitchfork():
    print("\n[CHECK] Checking the pitchfork window and sink/source certificates...")
    results = []
    scan = run_config("pitchfork.ini")
    results.append(report(scan["region_points"] > 0 and scan["intervals"] == 3,
                          f"region points {scan['region_points']}, intervals {scan['intervals']}"))
    rp = ResonantParams(p=1, q=6, mu=0.0, psi=(1.0,), A=2e-4, B=1.0, C=-1.0)
    rp = rp.with_mu(centered_frame(rp)[0])
    pair = [e for e in reduce_equilibria(find_equilibria(rp)) if not e.symmetric]
    results.append(report(len(pair) == 2 and all(abs(e.rho - 0.01) <= 0.002 for e in pair),
                          f"asymmetric pair at rho {[round(e.rho, 6) for e in pair]}"))
    intervals = interval_widths(rp, [2e-4 * 2.0 ** -j for j in range(5)])
    widths = [iv.width for iv in intervals if iv is not None]
    results.append(report(len(widths) == 5 and all(a > b for a, b in zip(widths, widths[1:])),
                          f"widths shrink along A halvings: {[f'{w:.3e}' for w in widths]}"))
    results.append(report(all(iv.contains_prediction for iv in intervals if iv is not None),
                          "every window contains its predicted center"))
    cert = run_config("certify.ini")
    results.append(report(cert["certified"] and cert["real_part_mismatch"] <= 1e-8,
                          f"sink/source certified, real part mismatch {cert['real_part_mismatch']}"))
    b0 = run_config("certify_b0.ini")
    results.append(report(not b0["certified"], "no certificate with B = 0"))
    return all(results)


def check_map_level():
    print("\n[CHECK] Checking map level classes and the pairing law...")
    results = []
    rp = ResonantParams(p=1, q=5, mu=-0.01, psi=(1.0,), A=1.0)
    for eq in reduce_equilibria(find_equilibria(rp)):
        conf = map_level_confirm(rp, eq)
        lam, gam = conf.orbit.multipliers
        results.append(report(conf.matches and abs(lam * gam - 1.0) <= 1e-6,
                              f"flow {conf.flow_kind} -> map {conf.map_kind}, |lambda gamma - 1| = "
                              f"{abs(lam * gam - 1.0):.2e}"))
    summary = run_config("map_confirm.ini")
    results.append(report(summary["matches"] == summary["confirmed"] > 0,
                          f"asymmetric: {summary['matches']} of {summary['confirmed']} classes match"))
    results.append(report(summary["pairs_swapped"], "g-images swap sink and source"))
    return all(results)


def check_kam():
    print("\n[CHECK] Checking F_{m/n} roots and the averaged form...")
    start = time.perf_counter()
    results = []
    fmn = run_config("fmn.ini")
    results.append(report(fmn["with_roots"] == fmn["pairs"] == 4, f"roots for {fmn['with_roots']} of 4 convergents"))
    gap = fmn["gap_slope"]
    results.append(report(gap is not None and -1.3 <= gap <= -0.7, f"hausdorff gap slope {gap}"))
    radial = fmn["radial_slope"]
    results.append(report(radial is not None and radial <= -0.7, f"radial distance slope {radial}"))
    results.append(report(bool(fmn["trace_decreasing"]), "|trace - 2| decreases with n"))
    with open(Path(WORK.name) / "fmn" / "fmn.csv", encoding="utf-8") as f:
        rows = list(csv.DictReader(line for line in f if not line.startswith("#")))
    results.append(report(all(r["negative_multipliers"] == "false" for r in rows), "no real negative multipliers"))
    avg = run_config("averaged.ini")
    results.append(report(avg["passed"], f"averaged form slopes {avg['radial_slope']} / {avg['angular_slope']}"))
    control = run_config("averaged_control.ini")
    results.append(report(not control["passed"], "chart off the circle fails the slope test"))
    twist = run_config("twist.ini")
    results.append(report(twist["verdict"] == "pass", f"twist slope {twist['slope']:.4g}"))
    print(f"  runtime {time.perf_counter() - start:.1f}s")
    return all(results)


def check_conservativity():
    print("\n[CHECK] Checking the conservative / dissipative dichotomy...")
    results = []
    conservative = ResonantParams(p=1, q=6, mu=-1e-2, psi=(1.0,), A=1.0)
    dissipative = conservative.with_changes(B=1.0)
    pts = make_rng(0).uniform(-0.4, 0.4, size=(1000, 2))
    worst = max(abs(divergence_cartesian(conservative, complex(x, y))) for x, y in pts)
    results.append(report(worst <= 1e-13, f"B = C = 0: max |div| = {worst:.2e}"))
    smallest = min(abs(divergence_cartesian(dissipative, complex(x, y))) for x, y in pts[:50])
    results.append(report(smallest > 0.0, f"B = 1: min |div| over 50 samples = {smallest:.2e}"))
    dets = area_distortion(conservative, 0.2 + 0.1j, 5)
    results.append(report(max(abs(d - 1.0) for d in dets) <= 1e-6, "conservative det DF = 1 within 1e-6"))
    sink = ResonantParams(p=1, q=6, mu=0.0, psi=(1.0,), A=0.1, B=1.0)
    dets = area_distortion(sink, 0.3 * complex(math.cos(math.pi / 12), math.sin(math.pi / 12)), 3)
    results.append(report(max(abs(d - 1.0) for d in dets) > 1e-6, f"B = 1 det DF departs: {dets[0]:.6f}"))
    return all(results)


def check_determinism():
    print("\n[CHECK] Checking byte reproducibility of data files...")
    results = []
    for name in ("check_rev.ini", "nf_equilibria.ini", "diophantine.ini", "mu_sweep.ini"):
        run_config(name, "-a")
        run_config(name, "-b")
        a = Path(WORK.name) / f"{Path(name).stem}-a"
        b = Path(WORK.name) / f"{Path(name).stem}-b"
        data = sorted(p.name for p in a.iterdir() if p.suffix in (".csv", ".json") and p.name != "manifest.json")
        same = all((a / n).read_bytes() == (b / n).read_bytes() for n in data)
        results.append(report(same and bool(data), f"{name}: {len(data)} data file(s) identical"))
    return all(results)


def main():
    """Run all claim checks."""
    print("=" * 60)
    print("revlab Claim Verification")
    print("=" * 60)

    results = []

    results.append(("Reversibility", check_reversibility()))
    results.append(("Equilibrium Counts", check_equilibrium_counts()))
    results.append(("Pendulum Limit", check_pendulum()))
    results.append(("Pitchfork + Sink/Source", check_pitchfork()))
    results.append(("Map Level + Pairing", check_map_level()))
    results.append(("F_{m/n} + Averaged Form", check_kam()))
    results.append(("Conservativity", check_conservativity()))
    results.append(("Determinism", check_determinism()))

    print("\n" + "=" * 60)
    print("Summary")
    print("=" * 60)

    all_passed = all(result for _, result in results)

    for check_name, passed in results:
        status = "[PASS] PASS" if passed else "[FAIL] FAIL"
        print(f"{status}: {check_name}")

    print("=" * 60)
    WORK.cleanup()
    console.reset_warnings()

    if all_passed:
        print("\n[SUCCESS] All claim checks passed!")
        return 0
    else:
        print("\n[WARN] Some claim checks failed!")
        print("Please review the output above, the bundles carry the diagnostics.")
        return 1


if __name__ == "__main__":
    sys.exit(main())
