"""one function per subcommand

each takes a Context, writes its data files (and figures drawn from those
rows) through the bundle and returns a small summary for the manifest.
"""
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from src.cli import figures
from src.cli.config import RunConfig
from src.cli.report import ReportBundle
from src.core.maps import ReversibleSystem, check_involution, check_reversibility, sample_box
from src.core.systems import builtin_system, nf_params, nf_system
from src.kam.charts import AnnulusChart, CylinderChart, PolarChart, chart_for, fit_invariant_chart
from src.kam.diophantine import continued_fraction, convergents, diophantine_check, golden_mean
from src.kam.fmn import convergent_study
from src.kam.rotation import find_circle, image_rotation_number, rotation_number
from src.kam.twist import averaged_form_fit, twist_check
from src.normal_form.equilibria import count_by_kind, find_equilibria, reduce_equilibria
from src.normal_form.field import sample_portrait
from src.normal_form.params import ResonantParams
from src.normal_form.pendulum import expected_exponent, oriented, pendulum_slope, rescaling
from src.orbits.orbit import PeriodicOrbit, g_pair
from src.orbits.search import SymmetrySearchWindow, search_windows
from src.scan.certify import (
    FLOW_TO_MAP,
    certify_sink_source,
    map_collar,
    map_frame,
    map_level_confirm,
    pair_swapped,
)
from src.scan.sweeps import centered_frame, mu_sweep, pitchfork_scan
from src.utils import console
from src.utils.errors import LabError, ValidationError
from src.utils.helpers import geometric_sequence, loglog_slope, make_rng

ORBIT_COLUMNS = ["index", "period", "symmetry", "class", "psi", "lambda_re", "lambda_im", "gamma_re",
                 "gamma_im", "J", "x", "y", "seed", "residual"]
EQUILIBRIUM_COLUMNS = ["index", "rho", "theta", "phi", "x", "y", "type", "symmetric", "ev1_re", "ev1_im",
                       "ev2_re", "ev2_im", "residual"]
COUNT_COLUMNS = ["count", "symmetric", "asymmetric", "reduced_symmetric", "reduced_asymmetric", "saddle",
                 "center", "sink", "source", "degenerate"]


@dataclass
class Context:
    config: RunConfig
    bundle: ReportBundle
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def options(self) -> Dict[str, Any]:
        return self.config.options

    def system(self) -> ReversibleSystem:
        return builtin_system(self.config.system, self.config.params)

    def resonant(self) -> Tuple[ResonantParams, float, float]:
        return nf_params(self.config.params)


def orbit_row(index: int, orbit: PeriodicOrbit) -> dict:
    lam, gam = orbit.multipliers
    x, y = orbit.points[0]
    return {"index": index, "period": orbit.period, "symmetry": orbit.symmetry, "class": orbit.kind,
            "psi": orbit.classification.psi, "lambda_re": lam.real, "lambda_im": lam.imag,
            "gamma_re": gam.real, "gamma_im": gam.imag, "J": orbit.jacobian_product, "x": x, "y": y,
            "seed": orbit.seed, "residual": orbit.residual}


def equilibrium_csv_row(index: int, eq) -> dict:
    (e1, e2) = eq.eigenvalues
    return {"index": index, "rho": eq.rho, "theta": eq.theta, "phi": eq.phi, "x": eq.z.real, "y": eq.z.imag,
            "type": eq.kind, "symmetric": eq.symmetric, "ev1_re": e1.real, "ev1_im": e1.imag,
            "ev2_re": e2.real, "ev2_im": e2.imag, "residual": eq.residual}


def _with_frame(ctx: Context, rp: ResonantParams) -> ResonantParams:
    # mu_frame = centered puts mu at center + s * half width of the asymmetric window
    if ctx.options.get("mu_frame") != "centered":
        return rp
    if rp.B == rp.C:
        raise ValidationError("mu_frame = centered needs B != C")
    center, half = centered_frame(rp)
    return rp.with_mu(center + ctx.options["s"] * half)


def _target(text: str) -> Optional[float]:
    text = (text or "").strip()
    if not text:
        return None
    if text == "golden":
        return golden_mean()
    try:
        value = float(text)
    except ValueError as exc:
        raise ValidationError(f"psi0 must be 'golden' or a number, got {text!r}") from exc
    if not math.isfinite(value):
        raise ValidationError("psi0 must be finite")
    return value


def _chart(ctx: Context, sys: ReversibleSystem) -> AnnulusChart:
    choice = ctx.options.get("chart", "auto")
    if choice == "polar":
        return PolarChart()
    if choice == "cylinder":
        return CylinderChart(ctx.options.get("y0", 0.0))
    return chart_for(sys, ctx.options.get("y0", 0.0))


def _locate_circle(ctx: Context, sys: ReversibleSystem, chart: AnnulusChart,
                   count: int) -> Tuple[Optional[float], float]:
    """(target rotation, chart radius of its circle); radius 0 when no target is set"""
    target = _target(ctx.options.get("psi0", ""))
    if target is None:
        return None, 0.0
    lo, hi = ctx.options.get("y_lo"), ctx.options.get("y_hi")
    if lo is None or hi is None:
        if not isinstance(chart, CylinderChart):
            raise ValidationError("y_lo and y_hi are needed to locate a circle in this chart")
        lo, hi = 2.0 * math.pi * target - 0.5, 2.0 * math.pi * target + 0.5
    rho = find_circle(sys, chart, target, (lo, hi), count)
    console.info("KAM", f"circle with rotation {target:.12g} at chart radius {rho:.12g}")
    return target, rho


def check_rev(ctx: Context) -> dict:
    sys = ctx.system()
    tol = ctx.options["tol"]
    samples = sample_box(sys, make_rng(ctx.config.seed), ctx.options["samples"])
    g_report = check_involution(sys.g, samples, tol)
    try:
        h2_report = check_involution(sys.h2, samples, tol).as_dict()
    except LabError as exc:
        console.warn("CORE", f"f o g check skipped: {exc}")
        h2_report = None
        ctx.diagnostics["h2"] = {"error": str(exc), **exc.diagnostics}
    rev = check_reversibility(sys, samples, tol)
    passed = g_report.passed and rev.passed and (h2_report is None or h2_report["passed"])
    ctx.bundle.write_json("check.json", {"system": sys.name, "params": sys.params, "g": g_report.as_dict(),
                                         "fg": h2_report, "reversibility": rev.as_dict(), "passed": passed})
    (console.success if passed else console.fail)("CORE", f"max |fgfg - id| = {rev.max_residual:.3e}")
    return {"passed": passed, "max_residual": rev.max_residual}


def find_sym_orbits(ctx: Context) -> dict:
    sys = ctx.system()
    opts = ctx.options
    source = sys.involution(opts["involution"])
    s_lo = source.curve_interval[0] if opts["s_lo"] is None else opts["s_lo"]
    s_hi = source.curve_interval[1] if opts["s_hi"] is None else opts["s_hi"]
    target = None if opts["target"] == "same" else opts["target"]
    windows = [SymmetrySearchWindow(opts["involution"], s_lo, s_hi, k, opts["tol"], target, opts["samples"],
                                    opts["polish"]) for k in opts["k"]]
    failures: list = []
    orbits = search_windows(sys, windows, ctx.config.threads, opts["classify_tol"], failures)
    if failures:
        ctx.diagnostics["window_failures"] = failures
    ctx.bundle.write_csv("orbits.csv", ORBIT_COLUMNS, [orbit_row(i, o) for i, o in enumerate(orbits)])
    ctx.bundle.write_json("orbits.json", {"system": sys.name, "params": sys.params,
                                          "windows": [asdict(w) for w in windows],
                                          "orbits": [o.as_dict() for o in orbits]})
    console.success("ORBITS", f"{len(orbits)} symmetric orbit(s) found")
    return {"orbits": len(orbits), "by_class": _tally(o.kind for o in orbits)}


def _tally(kinds) -> Dict[str, int]:
    out: Dict[str, int] = {}
    for kind in kinds:
        out[kind] = out.get(kind, 0) + 1
    return dict(sorted(out.items()))


def nf_portrait(ctx: Context) -> dict:
    rp, _, _ = ctx.resonant()
    opts = ctx.options
    r0 = math.sqrt(abs(rp.mu / rp.psi1)) if rp.psi1 and rp.mu else 0.1
    rho_lo = 0.5 * r0 if opts["rho_lo"] is None else opts["rho_lo"]
    rho_hi = 1.5 * r0 if opts["rho_hi"] is None else opts["rho_hi"]
    rows = sample_portrait(rp, (rho_lo, rho_hi), (opts["phi_lo"], opts["phi_hi"]), (opts["n_rho"], opts["n_phi"]))
    ctx.bundle.write_csv("portrait.csv", ["rho", "phi", "rho_dot", "phi_dot"], rows)
    ctx.bundle.write_svg("portrait.svg", figures.portrait(rows, f"q={rp.q}, mu={rp.mu:g}"))
    return {"samples": len(rows), "rho_range": [rho_lo, rho_hi]}


def nf_equilibria(ctx: Context) -> dict:
    rp, _, _ = ctx.resonant()
    eqs = find_equilibria(rp, ctx.options["rho_max"])
    reduced = reduce_equilibria(eqs)
    counts = {"total": len(eqs), "symmetric": sum(1 for e in eqs if e.symmetric),
              "asymmetric": sum(1 for e in eqs if not e.symmetric), "reduced": len(reduced),
              "by_kind": count_by_kind(eqs)}
    ctx.bundle.write_csv("equilibria.csv", EQUILIBRIUM_COLUMNS, [equilibrium_csv_row(i, e) for i, e in enumerate(eqs)])
    ctx.bundle.write_json("equilibria.json", {"params": rp.as_dict(), "counts": counts,
                                              "equilibria": [e.as_dict() for e in eqs],
                                              "reduced": [e.as_dict() for e in reduced]})
    console.success("NF", f"{len(eqs)} equilibria ({counts['by_kind']['saddle']} saddles, "
                          f"{counts['by_kind']['center']} centers)")
    return counts


def pendulum_check(ctx: Context) -> dict:
    rp, _, _ = ctx.resonant()
    opts = ctx.options
    if rp.psi1 == 0.0:
        raise ValidationError("pendulum check needs psi1 != 0")
    mags = geometric_sequence(opts["mu_lo"], opts["mu_hi"], opts["points"])
    # mu psi1 < 0 puts the resonant circle at real rho
    mus = [-math.copysign(float(m), rp.psi1) for m in mags]
    box = {"u_range": (opts["u_lo"], opts["u_hi"]), "resolution": (opts["n_theta"], opts["n_u"])}
    slope, devs = pendulum_slope(rp, mus, **box)
    rows = [{"mu": mu, "abs_mu": abs(mu), "deviation": dev, "rho_star": rescaling(oriented(rp.with_mu(mu))).rho_star}
            for mu, dev in zip(mus, devs)]
    ctx.bundle.write_csv("pendulum.csv", ["mu", "abs_mu", "deviation", "rho_star"], rows)
    expected = expected_exponent(rp.q)
    ctx.bundle.write_json("pendulum.json", {"params": rp.as_dict(), "slope": slope, "expected_exponent": expected,
                                            "box": box})
    ctx.bundle.write_svg("pendulum.svg", figures.loglog([r["abs_mu"] for r in rows],
                                                        {"deviation": [r["deviation"] for r in rows]}, "|mu|"))
    console.info("NF", f"deviation slope {slope:.4f} (expected about {expected:.4f})")
    return {"slope": slope, "expected_exponent": expected}


def mu_sweep_cmd(ctx: Context) -> dict:
    rp, _, _ = ctx.resonant()
    opts = ctx.options
    result = mu_sweep(rp, (opts["mu_lo"], opts["mu_hi"]), opts["resolution"], ctx.config.threads, opts["refine"])
    ctx.bundle.write_csv("sweep.csv", ["mu"] + COUNT_COLUMNS, result.rows)
    ctx.bundle.write_json("events.json", {"params": rp.as_dict(), "events": [e.as_dict() for e in result.events],
                                          "failures": [f.as_dict() for f in result.failures]})
    ctx.bundle.write_svg("sweep.svg", figures.sweep_counts(result.rows, f"q={rp.q}"))
    return {"rows": len(result.rows), "events": len(result.events), "failures": len(result.failures)}


def pitchfork_scan_cmd(ctx: Context) -> dict:
    rp, _, _ = ctx.resonant()
    opts = ctx.options
    a_lo = min(0.25 * rp.A, rp.A) if opts["A_lo"] is None else opts["A_lo"]
    a_hi = max(0.25 * rp.A, rp.A) if opts["A_hi"] is None else opts["A_hi"]
    result = pitchfork_scan(rp, (a_lo, a_hi), (opts["s_lo"], opts["s_hi"]), (opts["A_points"], opts["mu_points"]),
                            opts["mu_frame"], ctx.config.threads)
    ctx.bundle.write_csv("scan.csv", ["A", "mu", "s"] + COUNT_COLUMNS, result.rows)
    interval_cols = ["A", "mu_lo", "mu_hi", "width", "rho", "center", "predicted_center", "contains_prediction",
                     "center_offset"]
    intervals = [iv.as_dict() for iv in result.intervals]
    ctx.bundle.write_csv("intervals.csv", interval_cols, intervals)
    by_a = sorted(result.intervals, key=lambda iv: iv.A)
    shrinking = all(a.width < b.width for a, b in zip(by_a, by_a[1:])) if len(by_a) > 1 else None
    ctx.bundle.write_json("events.json", {"params": rp.as_dict(), "mu_frame": opts["mu_frame"],
                                          "events": [e.as_dict() for e in result.events],
                                          "intervals": intervals, "widths_shrink_with_A": shrinking,
                                          "region_points": len(result.region),
                                          "failures": [f.as_dict() for f in result.failures]})
    ctx.bundle.write_svg("region.svg", figures.region_map(result.rows, "A", "s", "reduced_asymmetric",
                                                          "asymmetric pairs"))
    console.success("SCAN", f"{len(result.region)} grid points with an asymmetric pair, "
                            f"{len(result.intervals)} interval(s)")
    return {"region_points": len(result.region), "events": len(result.events), "intervals": len(intervals),
            "widths_shrink_with_A": shrinking}


def _real_part_mismatch(sink, source) -> float:
    # the reversor flips the sign of the spectrum, so Re of the two sets mirror
    a = sorted(ev.real for ev in sink.eigenvalues)
    b = sorted((ev.real for ev in source.eigenvalues), reverse=True)
    return max(abs(x + y) for x, y in zip(a, b))


def certify_cmd(ctx: Context) -> dict:
    rp, _, _ = ctx.resonant()
    rp = _with_frame(ctx, rp)
    try:
        cert = certify_sink_source(rp, ctx.options["delta_floor"])
        payload = cert.as_dict()
    except ValidationError as exc:
        # no asymmetric pair at all: nothing to certify, which is an answer
        console.warn("SCAN", str(exc))
        payload = {"certified": False, "criterion": rp.B * (rp.B - rp.C), "delta": None, "sink": None,
                   "source": None, "reason": str(exc)}
        cert = None
    mismatch = _real_part_mismatch(cert.sink, cert.source) if cert is not None and cert.certified else None
    payload["real_part_mismatch"] = mismatch
    ctx.bundle.write_json("certificate.json", {"params": rp.as_dict(), "certificate": payload})
    (console.success if payload["certified"] else console.warn)("SCAN", f"certified: {payload['certified']}")
    return {"certified": payload["certified"], "real_part_mismatch": mismatch}


def map_confirm(ctx: Context) -> dict:
    rp, _, guard = ctx.resonant()
    rp = _with_frame(ctx, rp)
    opts = ctx.options
    sys = nf_system(rp, tol=opts["tol"], guard=guard)
    eqs = [e for e in reduce_equilibria(find_equilibria(rp)) if e.kind in FLOW_TO_MAP]
    if opts["which"] != "all":
        want = opts["which"] == "symmetric"
        eqs = [e for e in eqs if e.symmetric == want]
    if not eqs:
        raise ValidationError("no equilibria to confirm at these parameters", {"params": rp.as_dict()})
    rows, entries = [], []
    for i, eq in enumerate(eqs):
        conf = map_level_confirm(rp, eq, opts["tol"], guard, opts["newton_tol"])
        orbit = conf.orbit
        lam, gam = orbit.multipliers
        entry = conf.as_dict()
        row = {"index": i, "rho": eq.rho, "phi": eq.phi, "symmetric": eq.symmetric, "flow_class": conf.flow_kind,
               "map_class": conf.map_kind, "matches": conf.matches, "delta": conf.delta, "J": orbit.jacobian_product,
               "lambda_re": lam.real, "lambda_im": lam.imag, "gamma_re": gam.real, "gamma_im": gam.imag,
               "lambda_gamma_minus_1": abs(lam * gam - 1.0), "pair_class": None, "pair_swapped": None}
        if not eq.symmetric:
            pair = g_pair(sys, orbit, opts["pair_tol"], map_collar(eq, rp.q), map_frame(eq))
            row["pair_class"] = pair.kind
            row["pair_swapped"] = pair_swapped(orbit.kind, pair.kind)
            entry["g_pair"] = pair.as_dict()
        rows.append(row)
        entries.append(entry)
    columns = ["index", "rho", "phi", "symmetric", "flow_class", "map_class", "matches", "delta", "J", "lambda_re",
               "lambda_im", "gamma_re", "gamma_im", "lambda_gamma_minus_1", "pair_class", "pair_swapped"]
    ctx.bundle.write_csv("confirm.csv", columns, rows)
    ctx.bundle.write_json("confirm.json", {"params": rp.as_dict(), "tol": opts["tol"], "confirmations": entries})
    matched = sum(1 for r in rows if r["matches"])
    (console.success if matched == len(rows) else console.warn)("SCAN", f"{matched} of {len(rows)} classes match")
    swaps = [r["pair_swapped"] for r in rows if r["pair_swapped"] is not None]
    return {"confirmed": len(rows), "matches": matched, "pairs_swapped": bool(swaps) and all(swaps)}


def rotation(ctx: Context) -> dict:
    sys = ctx.system()
    opts = ctx.options
    chart = _chart(ctx, sys)
    x0 = np.asarray(opts["x0"], dtype=float) if opts["x0"] is not None else chart.from_chart(opts["rho"], 0.0)
    est = rotation_number(sys, chart, x0, opts["N"])
    image = image_rotation_number(sys, chart, x0, opts["N"])
    ctx.bundle.write_json("rotation.json", {"system": sys.name, "params": sys.params, "x0": x0,
                                            "chart": type(chart).__name__, "rotation": est.as_dict(),
                                            "image_rotation": image.as_dict(), "sum": est.value + image.value})
    console.success("KAM", f"rotation number {est.value:.15g} +- {est.error:.2e}")
    return {"psi0": est.value, "error": est.error}


def diophantine(ctx: Context) -> dict:
    opts = ctx.options
    psi0 = _target(opts["psi0"])
    if psi0 is None:
        raise ValidationError("psi0 is required")
    result = diophantine_check(psi0, opts["alpha"], opts["k_max"])
    conv = convergents(psi0, opts["terms"])
    ctx.bundle.write_csv("convergents.csv", ["m", "n", "ratio", "gap"],
                         [{"m": m, "n": n, "ratio": m / n, "gap": abs(n * psi0 - m)} for m, n in conv])
    ctx.bundle.write_json("diophantine.json", {"result": result.as_dict(),
                                               "continued_fraction": continued_fraction(psi0, opts["terms"]),
                                               "convergents": [list(c) for c in conv]})
    summary = result.as_dict()
    (console.success if summary["certified"] else console.warn)("KAM", f"diophantine certified: {summary['certified']}")
    return summary


def twist(ctx: Context) -> dict:
    sys = ctx.system()
    opts = ctx.options
    chart = _chart(ctx, sys)
    _, center = _locate_circle(ctx, sys, chart, opts["steps"])
    window = (center + opts["rho_lo"], center + opts["rho_hi"])
    report = twist_check(sys, chart, window, opts["steps"], opts["offsets"], opts["noise_cap"])
    ctx.bundle.write_csv("twist.csv", ["rho", "rotation", "error"],
                         [{"rho": r, "rotation": e.value, "error": e.error}
                          for r, e in zip(report.rhos, report.estimates)])
    ctx.bundle.write_json("twist.json", {"system": sys.name, "params": sys.params, "center": center,
                                         "report": report.as_dict()})
    console.info("KAM", f"twist slope {report.slope:.6g} +- {report.uncertainty:.2e}: {report.verdict}")
    return {"slope": report.slope, "verdict": report.verdict}


def fmn_roots(ctx: Context) -> dict:
    sys = ctx.system()
    opts = ctx.options
    chart = chart_for(sys)
    target, center = _locate_circle(ctx, sys, chart, opts["count"])
    if target is None:
        raise ValidationError("fmn-roots needs psi0")
    pairs = opts["pairs"] or [(m, n) for m, n in convergents(target, 24) if opts["n_min"] <= n <= opts["n_max"]]
    if not pairs:
        raise ValidationError(f"no convergents with {opts['n_min']} <= n <= {opts['n_max']}")
    width = opts["width"]
    reports = convergent_study(sys, chart, pairs, center, center - width, center + width, opts["count"],
                               radial_seeds=opts["radial_seeds"], angular_seeds=opts["angular_seeds"],
                               gate_policy=opts["gate_policy"], classify_tol=opts["classify_tol"])
    rows = []
    for r in reports:
        negative = any(abs(m.imag) <= 1e-12 and m.real < 0 for o in r.orbits for m in o.multipliers)
        rows.append({"m": r.spec.m, "n": r.spec.n, "roots": len(r.orbits), "degenerate": r.degenerate,
                     "gate_ok": r.gate_ok, "radial_distance": r.radial_distance, "hausdorff_gap": r.hausdorff_gap,
                     "trace_deviation": r.trace_deviation, "positive_saddles": r.positive_saddles,
                     "others": r.others, "all_traces_positive": r.all_traces_positive,
                     "negative_multipliers": negative})
    ctx.bundle.write_csv("fmn.csv", list(rows[0].keys()), rows)
    fits = _fmn_fits(rows)
    ctx.bundle.write_json("fmn.json", {"system": sys.name, "params": sys.params, "psi0": target, "center": center,
                                       "width": width, "reports": [r.as_dict() for r in reports], "fits": fits})
    found = [r for r in rows if r["roots"]]
    if len(found) >= 2:
        ns = [r["n"] for r in found]
        ctx.bundle.write_svg("fmn.svg", figures.loglog(ns, {
            "radial distance": [r["radial_distance"] for r in found],
            "hausdorff gap": [r["hausdorff_gap"] for r in found],
            "|trace - 2|": [r["trace_deviation"] for r in found]}, "n"))
    console.success("KAM", f"roots for {len(found)} of {len(rows)} convergents")
    return {"pairs": len(rows), "with_roots": len(found), **fits}


def _fmn_fits(rows: List[dict]) -> dict:
    found = [r for r in rows if r["roots"] and r["radial_distance"]]
    if len(found) < 2:
        return {"radial_slope": None, "gap_slope": None, "trace_slope": None, "trace_decreasing": None}
    ns = [r["n"] for r in found]
    devs = [r["trace_deviation"] for r in found]
    return {
        "radial_slope": loglog_slope(ns, [r["radial_distance"] for r in found]),
        "gap_slope": loglog_slope(ns, [r["hausdorff_gap"] for r in found]),
        "trace_slope": loglog_slope(ns, devs) if all(d > 0 for d in devs) else None,
        "trace_decreasing": all(a > b for a, b in zip(devs, devs[1:])),
    }


def averaged_fit(ctx: Context) -> dict:
    sys = ctx.system()
    opts = ctx.options
    choice = opts["chart"]
    if choice == "auto":
        choice = "invariant" if sys.name == "twist-std" else "polar"
    control = opts["chart_k"] is not None
    if control and sys.name != "twist-std":
        raise ValidationError("chart_k only applies to twist-std")
    center = 0.0
    if choice == "invariant":
        chart_sys = builtin_system(sys.name, {**ctx.config.params, "k": opts["chart_k"]}) if control else sys
        _, center = _locate_circle(ctx, chart_sys, CylinderChart(0.0), opts["count"])
        h = opts["h"]
        chart = fit_invariant_chart(chart_sys, center, [-2 * h, -h, 0.0, h, 2 * h], opts["count"], opts["modes"],
                                    opts["degree"])
    elif choice == "cylinder":
        chart = CylinderChart(0.0)
    else:
        chart = PolarChart()
    rhos = geometric_sequence(opts["rho_lo"], opts["rho_hi"], opts["points"])
    report = averaged_form_fit(sys, chart, rhos, opts["thetas"], opts["degree"])
    ctx.bundle.write_csv("averaged.csv", ["rho", "radial_residual", "angular_residual"],
                         zip(report.rhos, report.radial, report.angular))
    ctx.bundle.write_json("averaged.json", {"system": sys.name, "params": sys.params, "chart": choice,
                                            "center": center, "control_k": opts["chart_k"],
                                            "report": report.as_dict()})
    (console.success if report.passed else console.warn)(
        "KAM", f"averaged form slopes {report.radial_slope:.3g} / {report.angular_slope:.3g}")
    return {"passed": report.passed, "radial_slope": report.radial_slope, "angular_slope": report.angular_slope,
            "exact": report.exact}


COMMANDS: Dict[str, Callable[[Context], dict]] = {
    "check-rev": check_rev,
    "find-sym-orbits": find_sym_orbits,
    "nf-portrait": nf_portrait,
    "nf-equilibria": nf_equilibria,
    "pendulum-check": pendulum_check,
    "mu-sweep": mu_sweep_cmd,
    "pitchfork-scan": pitchfork_scan_cmd,
    "certify-sink-source": certify_cmd,
    "map-confirm": map_confirm,
    "rotation": rotation,
    "diophantine": diophantine,
    "twist": twist,
    "fmn-roots": fmn_roots,
    "averaged-fit": averaged_fit,
}
