"""Command-line front end.

Subcommands:
  build-sequence   construct the damping sequence and write its JSON report
  reduce           run the full reduction chain and export matrices, kernel
                   samples, and per-lambda diagnostics
  verify           run the whole property battery; exit 0 iff every check holds

Exit codes: 0 success, 1 configuration error, 2 construction failure
(empty band, refinement budget exhausted), 3 numerical failure (failed
checks, near-singular or degenerate systems, quadrature rejection).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config
from .errors import (
    ConfigError,
    DegenerateSystemError,
    EmptyBandError,
    NearSingularError,
    NotBisectableError,
    QuadratureInsufficientError,
    ToleranceUnreachableError,
)
from .kernels import eval_kernel
from .pipeline import prepare, run_reduction, run_verification
from .serialize import (
    write_grid_function_csv,
    write_json,
    write_kernel_grid_csv,
    write_matrix_csv,
)
from .solvers import ThirdKindProblem, reduce_problem

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CONSTRUCTION = 2
EXIT_NUMERICAL = 3

_CONSTRUCTION_ERRORS = (EmptyBandError, ToleranceUnreachableError, NotBisectableError)
_NUMERICAL_ERRORS = (
    NearSingularError,
    DegenerateSystemError,
    QuadratureInsufficientError,
)


def _error_payload(exc: Exception) -> dict:
    payload = {"type": type(exc).__name__.removesuffix("Error"), "message": str(exc)}
    if isinstance(exc, EmptyBandError):
        payload["band"] = exc.band
    if isinstance(exc, ToleranceUnreachableError):
        payload["achieved"] = exc.achieved
    if isinstance(exc, NearSingularError):
        payload["condition"] = exc.condition
    return payload


def _out_dir(config: RunConfig, args) -> Path:
    out = args.out or config.out
    if out is None:
        raise ConfigError("no output directory: set 'out' in the config or pass --out")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_build_sequence(config: RunConfig, args) -> int:
    out = _out_dir(config, args)
    try:
        _, _, _, seq, _ = prepare(config)
    except _CONSTRUCTION_ERRORS as exc:
        write_json(out / "sequence.json", {"error": _error_payload(exc)})
        print(f"construction failed: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    write_json(out / "sequence.json", seq.to_report())
    print(out / "sequence.json")
    return EXIT_OK


def cmd_reduce(config: RunConfig, args) -> int:
    out = _out_dir(config, args)
    try:
        run = run_reduction(config)
    except _CONSTRUCTION_ERRORS as exc:
        write_json(out / "report.json", {"error": _error_payload(exc)})
        print(f"construction failed: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    except _NUMERICAL_ERRORS as exc:
        write_json(out / "report.json", {"error": _error_payload(exc)})
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    write_json(out / "sequence.json", run.sequence.to_report())
    write_grid_function_csv(out / "phi.csv", run.phi.values)

    # the matrices do not depend on lambda; compute and write them once
    problem = ThirdKindProblem.manufactured(
        run.coefficient, run.kernel, run.config.lambdas[0], run.phi
    )
    pencil, _ = reduce_problem(problem, config.alpha, run.sequence, run.surrogate)
    write_matrix_csv(out / "a0.csv", pencil.a0)
    write_matrix_csv(out / "a.csv", pencil.a)

    probes = np.linspace(-config.probe_bound, config.probe_bound, config.probe_points)
    for idx, lam in enumerate(config.lambdas):
        pk = pencil.pencil_kernel(lam)
        for i, j in ((0, 0), (1, 0), (0, 1)):
            samples = eval_kernel(pk, i, j, probes, probes)
            write_kernel_grid_csv(
                out / f"kernel_lambda{idx}_i{i}_j{j}.csv", probes, probes, samples
            )
        write_json(out / f"report_lambda{idx}.json", run.reports[idx].to_dict())
    print(out)

    if config.strict:
        worst = max(r.passage_residual for r in run.reports)
        if worst > config.tolerances["passage_residual"]:
            print(
                f"strict mode: passage residual {worst:.3e} exceeds "
                f"{config.tolerances['passage_residual']:.1e} "
                f"(projected={run.surrogate.projected})",
                file=sys.stderr,
            )
            return EXIT_NUMERICAL
    return EXIT_OK


def cmd_verify(config: RunConfig, args) -> int:
    out = _out_dir(config, args)
    try:
        result = run_verification(config)
    except _CONSTRUCTION_ERRORS as exc:
        write_json(out / "verify.json", {"error": _error_payload(exc)})
        print(f"construction failed: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    except _NUMERICAL_ERRORS as exc:
        write_json(out / "verify.json", {"error": _error_payload(exc)})
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    write_json(out / "verify.json", result.to_dict())
    print(out / "verify.json")
    if not result.passed:
        failing = [c.name for c in result.checks if not c.passed]
        print(f"failed checks: {', '.join(failing)}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="thirdkind",
        description="Reduce third-kind integral equations to smooth kernel pencils.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("build-sequence", "reduce", "verify"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the JSON run config")
        p.add_argument("--out", help="output directory (overrides the config)")

    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        if args.command == "build-sequence":
            return cmd_build_sequence(config, args)
        if args.command == "reduce":
            return cmd_reduce(config, args)
        return cmd_verify(config, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
