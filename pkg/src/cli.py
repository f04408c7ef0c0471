"""
Command-line interface for maxpot.

Subcommands: gen (sample a catalog function), apply (run an operator), verify
(identity and inequality checks), probe (operator-norm ratios) and study
(refinement against analytic values).
"""

import argparse
import logging
import os
import sys
import time
from typing import Callable, Dict, List, Optional

import numpy as np

from .core.catalog import sample_catalog
from .core.convolution import resolve_workers
from .core.errors import (
    CatalogError,
    ConfigError,
    DomainError,
    NumericalError,
    OracleError,
    ZeroMeanError,
)
from .core.grid import Field
from .core.kernels import KernelSpec
from .core import operators, spherical
from .evaluation.checks import (
    CheckReport,
    verify_distributional_gradient,
    verify_domination,
    verify_gradient_bound,
    verify_kernel_identities,
    verify_representation,
)
from .evaluation.probes import PROBE_OPERATORS, FAMILIES, create_family, probe_operator_norm
from .evaluation.refinement import ORACLES, refinement_study
from .utils.config import RunConfig, load_run_config, parse_literal
from .utils.field_io import export_field_csv, load_field, save_field
from .utils.reports import (
    print_check_summary,
    print_probe_summary,
    print_refinement_summary,
    write_check_reports,
    write_probe_result,
    write_refinement_table,
    write_run_meta,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

CHECKS = ("representation", "distributional_gradient", "domination", "gradient_bound", "kernels")
REPRESENTATION_RADII = (0.5, 1.0, 2.0)
DEFAULT_PHI = ("gaussian_bump", {"center": (0.4, 0.25)})


def _key_values(items: Optional[List[str]], flag: str) -> Optional[Dict[str, object]]:
    if items is None:
        return None
    params = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(flag, f"expected key=value, got {item!r}")
        key, value = item.split("=", 1)
        params[key.strip()] = parse_literal(value)
    return params


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Sectioned key=value run configuration")
    common.add_argument("--n", type=int, help="Dimension (2 or 3)")
    common.add_argument("--res", type=int, help="Cells per axis")
    common.add_argument("--half-width", type=float, dest="half_width", help="Box half width L")
    common.add_argument("--symbol", help="Symbol catalog id")
    common.add_argument("--symbol-param", action="append", dest="symbol_params", metavar="KEY=VALUE")
    common.add_argument("--f", dest="function", help="Function catalog id")
    common.add_argument("--param", action="append", dest="function_params", metavar="KEY=VALUE")
    common.add_argument("--t-min", type=float, dest="t_min")
    common.add_argument("--t-max", type=float, dest="t_max")
    common.add_argument("--ratio", type=float, help="Radius ladder ratio")
    common.add_argument("--include-zero", action="store_const", const=True, dest="include_zero",
                        help="Add the t -> 0 limit to ladder maxima")
    common.add_argument("--policy", dest="policy_mode", choices=["overlap", "center"])
    common.add_argument("--subsamples", type=int)
    common.add_argument("--quad-order", type=int, dest="quad_order")
    common.add_argument("--p", type=float, help="Lebesgue exponent in (1, n)")
    common.add_argument("--t", type=float, help="Truncation radius for single-radius operators")
    common.add_argument("--out", dest="output_dir", help="Output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="maxpot",
        description="Maximal potentials, singular integrals and spherical maximal operators on grids",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("gen", parents=[common], help="Sample a catalog function to a field file")

    apply_parser = sub.add_parser("apply", parents=[common], help="Apply an operator")
    apply_parser.add_argument("op", choices=sorted(APPLY_OPERATORS))
    apply_parser.add_argument("--input", help="Field file (default: sample --f)")
    apply_parser.add_argument("--signed", action="store_true",
                              help="Spherical maximal of |average f| instead of average |f|")

    verify_parser = sub.add_parser("verify", parents=[common], help="Run verification checks")
    verify_parser.add_argument("check", choices=CHECKS + ("all",))
    verify_parser.add_argument("--radii", type=float, nargs="+", help="Representation radii")
    verify_parser.add_argument("--eps", type=float, nargs="+", help="Distributional-gradient radii")
    verify_parser.add_argument("--extended", action="store_true", help="Also check segment estimates")

    probe_parser = sub.add_parser("probe", parents=[common], help="Operator-norm probe")
    probe_parser.add_argument("--family", choices=FAMILIES, default="default")
    probe_parser.add_argument("--op", choices=PROBE_OPERATORS, default="maximal_potential")
    probe_parser.add_argument("--refine", action="store_true", help="Repeat on the refined grid")

    study_parser = sub.add_parser("study", parents=[common], help="Refinement study")
    study_parser.add_argument("--op", required=True, choices=sorted({o for o, _ in ORACLES}))
    study_parser.add_argument("--resolutions", type=int, nargs="+", default=[32, 64, 128])
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    config = load_run_config(args.config) if args.config else RunConfig()
    overrides = {
        name: getattr(args, name, None)
        for name in ("n", "res", "half_width", "symbol", "function", "t_min", "t_max", "ratio",
                     "include_zero", "policy_mode", "subsamples", "quad_order", "p", "t",
                     "output_dir", "seed")
    }
    overrides["symbol_params"] = _key_values(args.symbol_params, "symbol_params")
    overrides["function_params"] = _key_values(args.function_params, "function_params")
    return config.with_overrides(**overrides).validate()


def _source_field(config: RunConfig, path: Optional[str] = None) -> Field:
    if path:
        return load_field(path)
    return sample_catalog(config.function, config.function_params, config.grid())


def _broadcast(f: Field, m: int) -> Field:
    if f.m == m or f.m != 1:
        return f
    logger.info("broadcasting scalar field across %d symbol components", m)
    return Field(f.grid, np.repeat(f.samples, m, axis=0), support_hint=f.support_hint,
                 provenance=f.provenance, smooth=f.smooth)


def _apply_op(op: str, f: Field, config: RunConfig, signed: bool, progress: bool) -> Field:
    symbol = config.symbol_obj()
    ladder = config.ladder(f.grid)
    policy = config.policy()
    quad = config.quadrature()
    t = config.t
    if op in ("truncated_singular", "maximal_singular"):
        spec = KernelSpec.singular(symbol)
    else:
        spec = KernelSpec.potential(symbol)
    vector = _broadcast(f, symbol.m)
    table: Dict[str, Callable[[], Field]] = {
        "truncated_potential": lambda: operators.truncated_potential(vector, spec, t, policy),
        "potential": lambda: operators.potential(vector, spec),
        "maximal_potential": lambda: operators.maximal_potential(vector, spec, ladder, policy,
                                                                 progress=progress),
        "riesz_potential": lambda: operators.riesz_potential(f, policy),
        "truncated_singular": lambda: operators.truncated_singular(vector, spec, t, policy),
        "maximal_singular": lambda: operators.maximal_singular(vector, spec, ladder, policy,
                                                               progress=progress),
        "surface_convolution": lambda: spherical.surface_convolution(vector, symbol, t, quad),
        "grad_truncated_potential": lambda: operators.grad_truncated_potential(vector, spec, t, policy, quad),
        "grad_majorant": lambda: operators.grad_majorant(vector, spec, ladder, policy, quad,
                                                         progress=progress),
        "spherical_average": lambda: spherical.spherical_average(f, t, quad),
        "spherical_maximal": lambda: spherical.spherical_maximal(f, ladder, quad, use_abs=not signed,
                                                                 progress=progress),
        "spherical_via_gradient": lambda: operators.spherical_via_gradient(f, ladder, policy,
                                                                           progress=progress),
    }
    return table[op]()


APPLY_OPERATORS = (
    "truncated_potential", "potential", "maximal_potential", "riesz_potential",
    "truncated_singular", "maximal_singular", "surface_convolution",
    "grad_truncated_potential", "grad_majorant", "spherical_average",
    "spherical_maximal", "spherical_via_gradient",
)


def _run_gen(args, config: RunConfig) -> int:
    f = _source_field(config)
    base = os.path.join(config.output_dir, config.function)
    save_field(f, base + ".field")
    export_field_csv(f, base + ".csv")
    return EXIT_OK


def _run_apply(args, config: RunConfig) -> int:
    f = _source_field(config, args.input)
    result = _apply_op(args.op, f, config, args.signed, args.verbose > 0)
    base = os.path.join(config.output_dir, args.op)
    save_field(result, base + ".field")
    export_field_csv(result, base + ".csv")
    return EXIT_OK


def _run_check(name: str, args, config: RunConfig) -> CheckReport:
    progress = args.verbose > 0
    grid = config.grid()
    if name == "kernels":
        return verify_kernel_identities(config.n, order=config.quad_order)
    if name == "distributional_gradient":
        phi_name, phi_params = DEFAULT_PHI
        phi = sample_catalog(phi_name, {**phi_params, "center": phi_params["center"][:config.n]
                                        + (0.0,) * (config.n - 2)}, grid)
        eps = args.eps or [grid.h * k for k in (8, 4, 2, 1)]
        return verify_distributional_gradient(KernelSpec.potential(config.symbol_obj()), phi, eps,
                                              quad=config.quadrature(), policy=config.policy())
    f = _source_field(config)
    if name == "representation":
        return verify_representation(f, args.radii or REPRESENTATION_RADII,
                                     quad=config.quadrature(), policy=config.policy())
    symbol = config.symbol_obj()
    spec = KernelSpec.potential(symbol)
    f = _broadcast(f, symbol.m)
    if name == "domination":
        return verify_domination(f, spec, config.ladder(grid), config.policy(), progress=progress)
    return verify_gradient_bound(f, spec, config.ladder(grid), policy=config.policy(),
                                 quad=config.quadrature(), extended=args.extended,
                                 progress=progress)


def _run_verify(args, config: RunConfig) -> int:
    names = CHECKS if args.check == "all" else (args.check,)
    reports = [_run_check(name, args, config) for name in names]
    stem = os.path.join(config.output_dir, f"verify_{args.check}")
    write_check_reports(reports, config.to_dict(), stem + ".json", stem + ".csv")
    print_check_summary(reports)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


def _run_probe(args, config: RunConfig) -> int:
    settings = config.norm_settings()
    family = create_family(args.family, settings, config.seed)
    ladder = None
    if config.t_min is not None or config.t_max is not None:
        ladder = config.ladder()
    result = probe_operator_norm(args.op, family, settings, config.grid(), ladder=ladder,
                                 symbol=config.symbol_obj(), policy=config.policy(),
                                 t=config.t, ratio=config.ratio, refine=args.refine)
    stem = os.path.join(config.output_dir, "probe")
    write_probe_result(result, config.to_dict(), stem + ".csv", stem + ".json")
    print_probe_summary(result)
    return EXIT_OK


def _run_study(args, config: RunConfig) -> int:
    table = refinement_study(args.op, config.function, args.resolutions, n=config.n,
                             half_width=config.half_width)
    stem = os.path.join(config.output_dir, "study")
    write_refinement_table(table, config.to_dict(), stem + ".csv", stem + ".json")
    print_refinement_summary(table)
    return EXIT_OK


COMMANDS = {
    "gen": _run_gen,
    "apply": _run_apply,
    "verify": _run_verify,
    "probe": _run_probe,
    "study": _run_study,
}


def _configure_logging(verbose: int) -> None:
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s: %(message)s")


def dispatch(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand.

    Returns:
        0 on success, 1 when a verification fails, 2 on usage, configuration
        or catalog errors, 3 when a NaN or Inf is detected
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    _configure_logging(args.verbose)
    started = time.time()
    try:
        config = resolve_config(args)
        code = COMMANDS[args.command](args, config)
    except NumericalError as exc:
        logger.error("numerical failure: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, CatalogError, DomainError, ZeroMeanError, OracleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    write_run_meta(os.path.join(config.output_dir, "run_meta.json"), args.command,
                   resolve_workers(), started)
    return code


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
