import argparse
import csv
import math
import sys
from contextlib import contextmanager
from typing import Any, Iterator, Optional, Sequence, TextIO

import numpy as np

from .config import (
    EXAMPLE1_SPECTRUM,
    BoundsMode,
    ProblemKind,
    RunConfig,
    build_config,
    parse_config_file,
    parse_r_list,
    parse_s_list,
    parse_spectrum,
)
from .errors import EXIT_OK, EXIT_VERIFY_FAILED, DomainError, FracRBError, InsufficientDataError, exit_code_for
from .linalg import FloatArray, lambda_max_estimate, lambda_min_estimate
from .log.logger import logger
from .models import (
    Pencil,
    XorShift64Star,
    example1_spectrum,
    laplace_1d_fem,
    laplace_2d_fd,
    load_matrix_market,
    random_combination,
    synthetic_diagonal,
)
from .oracle import FULL_EIG_LIMIT, ErrorRecord, SpectralOracle, active_interval, error_sweep, fit_rate, full_eig
from .rbm import rb_eval_many
from .specfun import cstar
from .verify import print_report, run_suite, suite_names
from .zolotarev import SpectralInterval, transformed_points, zolotarev_points


def print_info(text: str) -> None:
    print(f"[>] {text}", file=sys.stderr)


def print_warning(text: str) -> None:
    print(f"[?] {text}", file=sys.stderr)


def print_error(text: str) -> None:
    print(f"[!] {text}", file=sys.stderr)


def fmt(value: float) -> str:
    return f"{value:.17g}"


@contextmanager
def open_output(path: Optional[str]) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
        return
    with open(path, "w", newline="", encoding="utf-8") as handle:
        yield handle


def build_pencil(config: RunConfig) -> Pencil:
    if config.problem is ProblemKind.LAPLACE1D:
        return laplace_1d_fem(config.n)
    if config.problem is ProblemKind.LAPLACE2D:
        return laplace_2d_fd(config.n)
    if config.problem is ProblemKind.DIAGONAL:
        if config.spectrum == EXAMPLE1_SPECTRUM:
            return synthetic_diagonal(example1_spectrum(config.lambda_u if config.lambda_u is not None else 4200.0))
        if not isinstance(config.spectrum, list):
            raise DomainError("spectrum", config.spectrum, f"'{EXAMPLE1_SPECTRUM}' or a comma list of positive reals")
        return synthetic_diagonal(config.spectrum)
    if config.matrix_m is None or config.matrix_a is None:
        raise DomainError("matrix_m", config.matrix_m, "both Matrix Market file paths")
    return load_matrix_market(config.matrix_m, config.matrix_a)


def build_oracle(pencil: Pencil, config: RunConfig) -> Optional[SpectralOracle]:
    if config.problem is ProblemKind.DIAGONAL:
        assert pencil.exact_eigenvalues is not None
        return SpectralOracle(pencil.exact_eigenvalues, np.eye(pencil.n))
    if pencil.n > FULL_EIG_LIMIT:
        return None
    return full_eig(pencil)


def build_argument(pencil: Pencil, oracle: Optional[SpectralOracle], config: RunConfig) -> FloatArray:
    """Random combination of the leading eigenvectors, or of nodal basis vectors without an oracle."""
    active = config.active if config.active > 0 else pencil.n
    if oracle is not None:
        return random_combination(pencil, active, config.seed, oracle.eigenvectors)
    print_warning(f"n={pencil.n} exceeds the oracle limit, using random nodal coefficients")
    generator = XorShift64Star(config.seed)
    return np.array([generator.uniform(-1.0, 1.0) for _ in range(pencil.n)])


def build_interval(pencil: Pencil, oracle: Optional[SpectralOracle], u: FloatArray, config: RunConfig) -> SpectralInterval:
    if config.lambda_l is not None and config.lambda_u is not None:
        return SpectralInterval(config.lambda_l, config.lambda_u)
    if config.bounds is BoundsMode.ACTIVE:
        if oracle is None:
            raise DomainError("bounds", "active", f"n <= {FULL_EIG_LIMIT} so that the eigendecomposition is available")
        return active_interval(oracle, pencil.M, u)
    return SpectralInterval(lambda_min_estimate(pencil.M, pencil.A), lambda_max_estimate(pencil.M, pencil.A))


def cmd_points(args: argparse.Namespace) -> int:
    if args.r is None:
        raise DomainError("r", None, "--r R")
    if args.delta is not None:
        delta = args.delta
        zhat_scale = 1.0 / delta
    elif args.lambda_l is not None and args.lambda_u is not None:
        interval = SpectralInterval(args.lambda_l, args.lambda_u)
        delta = interval.delta
        zhat_scale = 1.0 / interval.lambda_L_sq
    else:
        raise DomainError("delta", None, "--delta or both --lambda-l and --lambda-u")

    points = zolotarev_points(delta, args.r)
    zhat = transformed_points(zhat_scale * delta, zhat_scale, args.r)
    with open_output(args.out) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["j", "Z_j", "Zhat_j", "t_j"])
        writer.writerow(["0", "", "", fmt(0.0)])
        for j in range(args.r):
            writer.writerow([str(j + 1), fmt(float(points[j])), fmt(float(zhat[j])), fmt(math.sqrt(float(zhat[j])))])
    return EXIT_OK


def cmd_apply(config: RunConfig) -> int:
    pencil = build_pencil(config)
    oracle = build_oracle(pencil, config)
    u = build_argument(pencil, oracle, config)
    interval = build_interval(pencil, oracle, u, config)
    print_info(f"{pencil.name}, spectral interval [{fmt(interval.lambda_L_sq)}, {fmt(interval.lambda_U_sq)}]")

    actions: list[FloatArray] = []
    with open_output(config.out) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["s", "r", "norm", "k_norm", "extension_norm", "kept", "exact"])
        for r in config.r_values:
            results = rb_eval_many(
                pencil,
                u,
                interval,
                r,
                config.s_values,
                config.rel_tol,
                config.drop_tol,
                config.widened,
                config.worker_count(),
            )
            print_info(f"r={r}: kept {results[0].kept}, exact={str(results[0].exact).lower()}")
            for result in results:
                assert result.norm_value is not None
                interior = 0.0 < result.s < 1.0
                writer.writerow(
                    [
                        fmt(result.s),
                        str(r),
                        fmt(result.norm_value),
                        fmt(result.k_norm) if interior else "",
                        fmt(result.extension_norm) if interior else "",
                        str(result.kept),
                        str(result.exact).lower(),
                    ]
                )
            actions = [result.action for result in results if result.action is not None]

    if config.vector_out is not None:
        header = ",".join(f"s={fmt(s)}" for s in config.s_values)
        np.savetxt(config.vector_out, np.column_stack(actions), fmt="%.17g", delimiter=",", header=header)
        print_info(f"action for r={config.r_values[-1]} written to {config.vector_out}")
    return EXIT_OK


def convergence_rows(records: Sequence[ErrorRecord], delta: float, rel_tol: float) -> list[list[str]]:
    rate_constant = cstar(delta)
    rows: list[list[str]] = []
    for s in sorted({record.s for record in records}):
        group = [record for record in records if record.s == s]
        try:
            rate = fmt(fit_rate(group, "e_norm", rel_tol))
        except InsufficientDataError as error:
            print_warning(f"s={fmt(s)}: {error}")
            rate = ""
        for index, record in enumerate(group):
            last = index == len(group) - 1
            rows.append(
                [
                    fmt(record.s),
                    str(record.r),
                    fmt(record.e_norm),
                    fmt(record.e_op),
                    fmt(record.norm_u_1),
                    fmt(record.norm_u_2),
                    fmt(rate_constant),
                    rate if last else "",
                ]
            )
    return rows


def cmd_convergence(config: RunConfig) -> int:
    pencil = build_pencil(config)
    oracle = build_oracle(pencil, config)
    u = build_argument(pencil, oracle, config)
    interval = build_interval(pencil, oracle, u, config)
    print_info(f"{pencil.name}, delta = {fmt(interval.delta)}, cstar = {fmt(cstar(interval.delta))}")

    records = error_sweep(
        pencil,
        u,
        interval,
        config.s_values,
        config.r_values,
        config.rel_tol,
        config.drop_tol,
        oracle,
        config.worker_count(),
    )
    with open_output(config.out) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["s", "r", "e_norm", "e_op", "norm_u_1", "norm_u_2", "cstar", "fitted_rate"])
        writer.writerows(convergence_rows(records, interval.delta, config.rel_tol))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    quad_tol = args.quad_tol if args.quad_tol is not None else 1e-8
    checks = run_suite(args.suite, quad_tol)
    return EXIT_OK if print_report(args.suite, checks) else EXIT_VERIFY_FAILED


def add_run_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value experiment file; flags override it")
    parser.add_argument("--problem", type=ProblemKind, choices=list(ProblemKind), metavar="{laplace1d,laplace2d,diagonal,matrixmarket}")
    parser.add_argument("--n", type=int)
    parser.add_argument("--spectrum", type=parse_spectrum, help="'example1' or a comma list of eigenvalues")
    parser.add_argument("--matrix-m")
    parser.add_argument("--matrix-a")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--active", type=int, help="number of eigenvectors combined into u (0 = all)")
    parser.add_argument("--s", dest="s_values", type=parse_s_list, help="comma list of exponents")
    parser.add_argument("--r", dest="r_values", type=parse_r_list, help="comma list or inclusive range a:b")
    parser.add_argument("--lambda-l", type=float, help="lower end of the spectral interval (lambda_L^2)")
    parser.add_argument("--lambda-u", type=float, help="upper end of the spectral interval (lambda_U^2)")
    parser.add_argument("--bounds", type=BoundsMode, choices=list(BoundsMode), metavar="{auto,active}")
    parser.add_argument("--rel-tol", type=float)
    parser.add_argument("--quad-tol", type=float)
    parser.add_argument("--drop-tol", type=float)
    parser.add_argument("--threads", type=int)
    parser.add_argument("--widened", action="store_const", const=True, help="admit s in [0, 1]")
    parser.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracrb",
        description="Reduced basis evaluation of fractional norms and operators",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    points = commands.add_parser("points", help="Zolotarev points and snapshot times")
    points.add_argument("--delta", type=float)
    points.add_argument("--lambda-l", type=float)
    points.add_argument("--lambda-u", type=float)
    points.add_argument("--r", type=int)
    points.add_argument("--out")

    apply = commands.add_parser("apply", help="reduced norms and operator actions")
    add_run_arguments(apply)
    apply.add_argument("--vector-out", help="write the action of the largest r, one column per s")

    convergence = commands.add_parser("convergence", help="error sweep against the oracle")
    add_run_arguments(convergence)

    verify = commands.add_parser("verify", help="run an invariant suite")
    verify.add_argument("suite", choices=suite_names())
    verify.add_argument("--quad-tol", type=float)
    return parser


def load_run_config(args: argparse.Namespace) -> RunConfig:
    flags: dict[str, Any] = {
        key: value for key, value in vars(args).items() if key not in ("command", "config")
    }
    file_values = parse_config_file(args.config) if args.config else {}
    config = build_config(file_values, flags)
    config.validate()
    return config


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logger.log_info(f"starting {args.command}")
    try:
        if args.command == "points":
            code = cmd_points(args)
        elif args.command == "verify":
            code = cmd_verify(args)
        else:
            config = load_run_config(args)
            code = cmd_apply(config) if args.command == "apply" else cmd_convergence(config)
    except (FracRBError, ValueError, OSError) as error:
        code = exit_code_for(error)
        logger.log_warning(f"{args.command} failed: {error}")
        print_error(str(error))
        return code
    logger.log_info(f"{args.command} finished with exit code {code}")
    return code


if __name__ == "__main__":
    return_code: int = main()
    sys.exit(return_code)
