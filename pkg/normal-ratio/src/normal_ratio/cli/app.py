#  Licensed to the Apache Software Foundation (ASF) under one or more
#  contributor license agreements.  See the NOTICE file distributed with
#  this work for additional information regarding copyright ownership.
#  The ASF licenses this file to You under the Apache License, Version 2.0
#  (the "License"); you may not use this file except in compliance with
#  the License.  You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.

"""normal-ratio command line.

Exit codes: 0 success, 1 validation checks failed, 2 usage or input error,
3 numerical failure.
"""

import argparse
import json
import math
import sys
from typing import List, Optional

import numpy as np
from rich.console import Console
from rich.table import Table

from normal_ratio.cli.model_file import load_model
from normal_ratio.cli.output import (
    fmt_error,
    fmt_value,
    grid_frame,
    ratio_columns,
    sample_frame,
    write_frame,
)
from normal_ratio.config import ratio_settings
from normal_ratio.operators import cdf_approx, ratio_density, sampler
from normal_ratio.operators.validation_suite import ValidationReport, run_validation
from normal_ratio.structure import NormalRatioModel, RatioPoint
from normal_ratio.utils.exceptions import InputError, NonFiniteInputError, NumericalError
from normal_ratio.utils.log import fetch_log_level, init_logger, log

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

# flags whose value is a comma-separated vector that may start with "-"
VECTOR_FLAGS = ("--point", "--t", "--lo", "--hi")


def parse_vector(text: str, flag: str) -> np.ndarray:
    """'1.5,-2,3e-1' -> array; names the offending token on failure."""
    values = []
    for pos, token in enumerate(text.split(","), start=1):
        try:
            value = float(token.strip())
        except ValueError as e:
            raise InputError(f"{flag}: invalid number {token!r} at position {pos} in {text!r}") from e
        if not math.isfinite(value):
            raise NonFiniteInputError(f"{flag}: non-finite number {token!r} at position {pos} in {text!r}")
        values.append(value)
    return np.array(values, dtype=np.float64)


def _require_model(args) -> NormalRatioModel:
    if not args.model:
        raise InputError(f"{args.command} needs --model")
    return load_model(args.model)


def _seed(args) -> int:
    seed = ratio_settings.default_seed if args.seed is None else args.seed
    if not 0 <= seed < sampler.MAX_SEED:
        raise InputError(f"--seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def _emit(args, text_value: str, payload: dict):
    if args.format == "json":
        print(json.dumps(payload))
    else:
        print(text_value)


def cmd_density(args) -> int:
    model = _require_model(args)
    point = RatioPoint(parse_vector(args.point, "--point"))
    if args.log:
        value = ratio_density.log_density(model, point)
        _emit(args, fmt_value(value), {"log_density": value})
    else:
        value = ratio_density.density(model, point)
        _emit(args, fmt_value(value), {"density": value})
    return EXIT_OK


def cmd_density_grid(args) -> int:
    model = _require_model(args)
    if model.ratio_dim not in (1, 2):
        raise InputError(f"density-grid supports p - 1 in (1, 2), got {model.ratio_dim}")
    lo = parse_vector(args.lo, "--lo")
    hi = parse_vector(args.hi, "--hi")
    if lo.shape[0] != model.ratio_dim or hi.shape[0] != model.ratio_dim:
        raise InputError(f"--lo and --hi need {model.ratio_dim} coordinate(s)")
    if args.steps < 2:
        raise InputError(f"--steps must be at least 2, got {args.steps}")
    points = ratio_density.grid_points(lo, hi, args.steps)
    values = ratio_density.density_grid(model, points, log_scale=args.log, workers=args.workers)
    frame = grid_frame(points, values, "log_density" if args.log else "density")
    write_frame(frame, args.out, args.format, ratio_columns(model.ratio_dim))
    return EXIT_OK


def cmd_cdf(args) -> int:
    model = _require_model(args)
    t = parse_vector(args.t, "--t")
    seed = _seed(args)
    if args.method == "mc":
        n = ratio_settings.mc_samples if args.n is None else args.n
        if n < 1:
            raise InputError(f"--n must be at least 1, got {n}")
        batch = sampler.sample_ratios(model, n, seed=seed, workers=args.workers)
        value = sampler.empirical_cdf(batch, t)
        error = sampler.empirical_cdf_standard_error(value, batch.n)
        method = "mc"
    else:
        fn = cdf_approx.approx_cdf if args.method == "approx" else cdf_approx.exact_cdf
        result = fn(model, t, seed=seed)
        value, error, method = result.value, result.error_estimate, result.method.value
    payload = {
        "value": value,
        "error_estimate": error,
        "method": method,
        "validity_diagnostic": cdf_approx.validity_diagnostic(model),
    }
    _emit(args, f"{fmt_value(value)} ± {fmt_error(error)}", payload)
    return EXIT_OK


def cmd_sample(args) -> int:
    model = _require_model(args)
    batch = sampler.sample_ratios(model, args.n, seed=_seed(args), workers=args.workers)
    if batch.redraws:
        print(f"redraws: {batch.redraws}", file=sys.stderr)
    write_frame(sample_frame(batch), args.out, args.format, ratio_columns(batch.ratio_dim))
    return EXIT_OK


def render_report(report: ValidationReport, console: Console):
    table = Table(title=f"Density validation (tol {fmt_error(report.tol)})")
    table.add_column("case", justify="right")
    table.add_column("p", justify="right")
    table.add_column("check")
    table.add_column("closed form", justify="right")
    table.add_column("reference", justify="right")
    table.add_column("rel. error", justify="right")
    table.add_column("bound", justify="right")
    table.add_column("result")
    for case in report.cases:
        for check in case.checks:
            table.add_row(
                str(case.index),
                str(case.p),
                check.name,
                fmt_value(check.closed_form),
                fmt_value(check.reference),
                fmt_error(check.rel_error),
                fmt_error(check.bound),
                "pass" if check.passed else "FAIL",
            )
    console.print(table)
    summary = report.summary()
    console.print(
        f"{summary['cases'] - summary['failed']}/{summary['cases']} cases passed, "
        f"max relative error {fmt_error(summary['max_rel_error'])}"
    )


def cmd_validate(args) -> int:
    model = load_model(args.model) if args.model else None
    if args.mc_samples is not None and args.mc_samples < 1:
        raise InputError(f"--mc-samples must be at least 1, got {args.mc_samples}")
    report = run_validation(
        model=model, cases=args.cases, seed=_seed(args), tol=args.tol, mc_samples=args.mc_samples
    )
    if args.json:
        print(json.dumps({"summary": report.summary(), "report": report.model_dump()}))
    else:
        # rich honours NO_COLOR on its own
        render_report(report, Console(highlight=False))
    return EXIT_OK if report.passed else EXIT_CHECKS_FAILED


def cmd_model_info(args) -> int:
    model = _require_model(args)
    info = {
        "p": model.p,
        "mu": model.mu.tolist(),
        "sigma": model.sigma.entries.tolist(),
        "log_det_sigma": model.log_det_sigma,
        "central": model.is_central,
        "validity_diagnostic": cdf_approx.validity_diagnostic(model),
    }
    if args.format == "json":
        print(json.dumps(info))
        return EXIT_OK
    print(f"p: {model.p}")
    print(f"mu: {', '.join(fmt_value(v) for v in model.mu)}")
    for i, row in enumerate(model.sigma.entries):
        print(f"sigma[{i}]: {', '.join(fmt_value(v) for v in row)}")
    print(f"log_det_sigma: {fmt_value(model.log_det_sigma)}")
    print(f"central: {str(model.is_central).lower()}")
    print(f"validity_diagnostic: {fmt_value(info['validity_diagnostic'])}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="JSON model file with keys mu and sigma")
    common.add_argument("--seed", type=int, default=None, help="64-bit seed (default from settings)")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="Output format")
    common.add_argument("--out", default=None, help="Output file (default: standard output)")
    common.add_argument("--workers", type=int, default=None, help="Worker threads for grids and sampling")
    common.add_argument(
        "--log-level", default=None, choices=("DEBUG", "INFO", "WARNING", "ERROR"), help="Console log level"
    )

    parser = argparse.ArgumentParser(
        prog="normal-ratio", description="Density, CDF and sampling of ratios of jointly normal variables"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("density", parents=[common], help="Density at one point")
    p.add_argument("--point", required=True, help='Comma-separated point, e.g. "0.5,-1"')
    p.add_argument("--log", action="store_true", help="Print the log-density")
    p.set_defaults(handler=cmd_density)

    p = sub.add_parser("density-grid", parents=[common], help="Density on a regular 1-D or 2-D grid")
    p.add_argument("--lo", required=True, help="Lower corner")
    p.add_argument("--hi", required=True, help="Upper corner")
    p.add_argument("--steps", type=int, default=101, help="Grid points per dimension")
    p.add_argument("--log", action="store_true", help="Emit log-densities")
    p.set_defaults(handler=cmd_density_grid)

    p = sub.add_parser("cdf", parents=[common], help="Pr(Y < t)")
    p.add_argument("--t", required=True, help="Comma-separated threshold")
    p.add_argument("--method", choices=("approx", "exact", "mc"), default="exact")
    p.add_argument("--n", type=int, default=None, help="Monte Carlo sample size for --method mc")
    p.set_defaults(handler=cmd_cdf)

    p = sub.add_parser("sample", parents=[common], help="Draw ratio samples")
    p.add_argument("--n", type=int, required=True, help="Number of draws")
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser("validate", parents=[common], help="Check closed-form densities against oracles")
    p.add_argument("--cases", type=int, default=None, help="Number of cases")
    p.add_argument("--tol", type=float, default=None, help="Relative error tolerance")
    p.add_argument("--mc-samples", type=int, default=None, help="Draws for the Monte Carlo CDF check")
    p.add_argument("--json", action="store_true", help="Machine-readable report")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("model-info", parents=[common], help="Describe a model file")
    p.set_defaults(handler=cmd_model_info)
    return parser


def attach_vector_values(argv: List[str]) -> List[str]:
    """Join `--point -1,2` into `--point=-1,2`.

    argparse takes "-1,2" for an option string since it is not a plain negative number.
    """
    joined = []
    i = 0
    while i < len(argv):
        if argv[i] in VECTOR_FLAGS and i + 1 < len(argv):
            joined.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            joined.append(argv[i])
            i += 1
    return joined


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(attach_vector_values(sys.argv[1:] if argv is None else list(argv)))
    level = args.log_level or ratio_settings.log_level
    init_logger(log_output=ratio_settings.log_file, log_level=fetch_log_level(level))
    reconfigure = getattr(sys.stdout, "reconfigure", None)
    if reconfigure is not None:
        reconfigure(encoding="utf-8")

    try:
        return args.handler(args)
    except (InputError, OSError) as e:
        print(f"normal-ratio: error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as e:
        print(f"normal-ratio: numerical error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except Exception as e:  # pylint: disable=broad-exception-caught
        log.debug("Unhandled error", exc_info=True)
        print(f"normal-ratio: internal error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
