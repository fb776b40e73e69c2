import argparse
import platform
import sys
import time
from importlib import metadata
from typing import Dict, List, Optional

from src.cli.commands import COMMANDS, Context
from src.cli.config import RunConfig, load
from src.cli.report import ReportBundle
from src.utils import console
from src.utils.errors import LabError, NumericalError, ValidationError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

PACKAGES = ("numpy", "scipy", "matplotlib", "termcolor")


def versions() -> Dict[str, str]:
    out = {"python": platform.python_version()}
    for name in PACKAGES:
        try:
            out[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            out[name] = "missing"
    return out


def run(config: RunConfig, out_dir: str) -> ReportBundle:
    """execute one subcommand and write its bundle

    the manifest is written on failure too, with the error in diagnostics,
    then the error is re-raised for the exit code.
    """
    bundle = ReportBundle(out_dir, config.seed)
    ctx = Context(config, bundle)
    timings: Dict[str, float] = {}
    console.info("CLI", f"running {config.subcommand} on {config.system or 'no system'}")
    start = time.perf_counter()
    try:
        summary = COMMANDS[config.subcommand](ctx)
    except LabError as exc:
        timings["compute"] = time.perf_counter() - start
        status = "validation-error" if isinstance(exc, ValidationError) else "numerical-error"
        ctx.diagnostics["error"] = {"type": type(exc).__name__, "message": str(exc), **exc.diagnostics}
        bundle.write_manifest(config.as_dict(), timings, versions(), status, ctx.diagnostics)
        raise
    timings["compute"] = time.perf_counter() - start
    ctx.diagnostics["warnings"] = console.warning_count()
    bundle.write_manifest(config.as_dict(), timings, versions(), "ok", ctx.diagnostics, summary)
    console.success("CLI", f"wrote {len(bundle.files)} file(s) and manifest to {bundle.out_dir}")
    return bundle


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python3 -m src.main",
        description="numerical lab for reversible planar maps near resonances",
    )
    parser.add_argument("--config", required=True, metavar="PATH", help="run configuration (INI)")
    parser.add_argument("--out", default="out", metavar="DIR", help="output directory (default: out)")
    parser.add_argument("--seed", type=int, default=None, metavar="N", help="overrides [run] seed")
    parser.add_argument("--threads", type=int, default=None, metavar="N", help="overrides [run] threads")
    parser.add_argument("--verbose", action="store_true", help="print debug lines")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    console.set_verbose(args.verbose)
    console.reset_warnings()
    try:
        config = load(args.config, {"seed": args.seed, "threads": args.threads})
    except ValidationError as exc:
        console.fail("CLI", str(exc))
        for problem in exc.diagnostics.get("errors", []):
            console.fail("CLI", f"  {problem}")
        return EXIT_VALIDATION
    try:
        run(config, args.out)
    except ValidationError as exc:
        console.fail("CLI", f"invalid input: {exc}")
        return EXIT_VALIDATION
    except NumericalError as exc:
        console.fail("CLI", f"numerical failure: {exc}")
        for key, value in sorted(exc.diagnostics.items()):
            console.debug("CLI", f"  {key}: {value}")
        return EXIT_NUMERICAL
    except KeyboardInterrupt:
        console.fail("CLI", "interrupted")
        return 130
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
