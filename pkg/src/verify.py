"""
Named invariant suites run by `verify`.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.special
from colorama import Fore, Style

from . import linalg, models, oracle, rbm, specfun, zolotarev
from .errors import DomainError
from .log.logger import logger

SuiteCheck = Callable[[], list["CheckResult"]]


@dataclass(frozen=True)
class CheckResult:
    name: str
    observed: float
    expected: float
    passed: bool

    @classmethod
    def close(cls, name: str, observed: float, expected: float, rel_tol: float) -> "CheckResult":
        scale = max(abs(expected), 1e-300)
        return cls(name, observed, expected, abs(observed - expected) <= rel_tol * scale)

    @classmethod
    def at_most(cls, name: str, observed: float, bound: float) -> "CheckResult":
        return cls(name, observed, bound, observed <= bound)

    def __str__(self) -> str:
        return f"{self.name}: observed {self.observed:.17g}, expected {self.expected:.17g}"


# the Zolotarev deviation meets the exponential bound to roundoff once r >= 10
_BOUND_SLACK = 1e-12


def _specfun_suite() -> list[CheckResult]:
    checks = [
        CheckResult.close("gamma(0.5) = sqrt(pi)", specfun.gamma(0.5), math.sqrt(math.pi), 1e-14),
        CheckResult.close("K(0) = pi/2", specfun.ellipk(0.0), math.pi / 2.0, 1e-15),
        CheckResult.close("d_s(0.5) = 1", specfun.d_s(0.5), 1.0, 1e-14),
        CheckResult.close("C_s(0.5) = sqrt(2/pi)", specfun.c_s(0.5), math.sqrt(2.0 / math.pi), 1e-15),
        CheckResult.close("cstar(1/1.53e5)", specfun.cstar(1.0 / 1.53e5), 0.37, 0.02 / 0.37),
    ]
    for k in (0.3, 0.9, 0.999999):
        checks.append(
            CheckResult.close(f"K({k}) vs scipy", specfun.ellipk(k), float(scipy.special.ellipk(k * k)), 1e-10)
        )
        quarter = specfun.ellipk(k)
        checks.append(CheckResult.close(f"dn(K, {k}) = k'", specfun.jacobi_dn(quarter, k), math.sqrt(1.0 - k * k), 1e-10))
    return checks


def _zolotarev_suite() -> list[CheckResult]:
    checks: list[CheckResult] = []
    for delta in (1e-2, 1e-4, 1e-6):
        checks.append(
            CheckResult.close(f"Z_1 = sqrt({delta})", float(zolotarev.zolotarev_points(delta, 1)[0]), math.sqrt(delta), 1e-12)
        )
        rate = specfun.cstar(delta)
        for r in (1, 5, 10, 20):
            points = zolotarev.transformed_points(1.0, 1.0 / delta, r)
            deviation = oracle.minmax_product(points, (delta, 1.0)).value
            checks.append(CheckResult.at_most(f"minmax(delta={delta}, r={r})", deviation, 2.0 * math.exp(-rate * r) * (1.0 + _BOUND_SLACK)))
    return checks


def _linalg_suite() -> list[CheckResult]:
    rng = np.random.default_rng(3)
    B = rng.standard_normal((12, 12))
    Q = linalg.DenseSymMatrix.symmetrized(B @ B.T + 12.0 * np.eye(12))
    eig = linalg.sym_eig(Q)
    reference = np.linalg.eigvalsh(Q.values)
    checks = [
        CheckResult.at_most("sym_eig vs numpy", float(np.max(np.abs(eig.eigenvalues - reference))), 1e-10 * float(reference[-1]))
    ]
    half = linalg.mat_pow_s(Q, 0.5).values
    checks.append(CheckResult.at_most("(Q^0.5)^2 = Q", float(np.max(np.abs(half @ half - Q.values))), 1e-10 * float(reference[-1])))

    pencil = models.laplace_1d_fem(32)
    b = np.ones(pencil.n)
    x = linalg.cg_shifted_solve(pencil.M, pencil.A, 2.0, b)
    residual = np.linalg.norm(linalg.shifted_matrix(pencil.M, pencil.A, 2.0) @ x - b) / np.linalg.norm(b)
    checks.append(CheckResult.at_most("shifted CG residual", float(residual), 1e-12))
    V, _ = linalg.gram_schmidt_m(rng.standard_normal((pencil.n, 6)), pencil.M)
    checks.append(CheckResult.at_most("V^T M V = I", float(np.max(np.abs(V.T @ (pencil.M.csr @ V) - np.eye(6)))), 1e-12))
    return checks


def _models_suite() -> list[CheckResult]:
    checks: list[CheckResult] = []
    for pencil in (models.laplace_1d_fem(16), models.laplace_2d_fd(6)):
        assert pencil.exact_eigenvalues is not None
        dense = oracle.full_eig(pencil).eigenvalues
        error = float(np.max(np.abs(dense - pencil.exact_eigenvalues) / pencil.exact_eigenvalues))
        checks.append(CheckResult.at_most(f"{pencil.name} eigenvalues", error, 1e-9))
        spd = pencil.is_positive_definite_sample()
        checks.append(CheckResult(f"{pencil.name} SPD sample", float(spd), 1.0, spd))
    return checks


def _rbm_suite() -> list[CheckResult]:
    pencil = models.synthetic_diagonal([1.0, 4.0, 9.0, 16.0])
    u = np.ones(4)
    interval = zolotarev.SpectralInterval(1.0, 16.0)
    basis = rbm.build_basis(pencil, u, zolotarev.snapshot_times(interval, 8))
    checks = [
        CheckResult.close("diag(1,4,9,16) norm s=0.5", rbm.rb_norm(basis, 0.5), math.sqrt(10.0), 1e-9),
        CheckResult("kept = 4", float(basis.kept), 4.0, basis.kept == 4),
    ]
    small = rbm.build_basis(pencil, u, zolotarev.snapshot_times(interval, 1))
    checks.append(CheckResult.at_most("overestimation r=1", math.sqrt(10.0) - 1e-10, rbm.rb_norm(small, 0.5)))

    fem = models.laplace_1d_fem(24)
    v = models.random_combination(fem, 24, seed=5)
    spectral = oracle.full_eig(fem)
    fem_interval = zolotarev.SpectralInterval(float(spectral.eigenvalues[0]), float(spectral.eigenvalues[-1]))
    fem_basis = rbm.build_basis(fem, v, zolotarev.snapshot_times(fem_interval, 6))
    for s in (0.25, 0.5, 0.75):
        norm = rbm.rb_norm(fem_basis, s)
        via_action = float(v @ (fem.M.csr @ rbm.rb_apply(fem_basis, fem, s)))
        checks.append(CheckResult.close(f"norm^2 = u^T M action, s={s}", norm * norm, via_action, 1e-10))
        exact = oracle.h_norm_exact(spectral, fem.M, v, s)
        checks.append(CheckResult.at_most(f"norm overestimates, s={s}", exact**2 - 1e-10, norm * norm))
    return checks


def _equivalence_suite(quad_tol: float = 1e-8) -> list[CheckResult]:
    rng = np.random.default_rng(11)
    checks: list[CheckResult] = []
    for trial in range(5):
        pencil = models.laplace_1d_fem(int(rng.integers(4, 20)))
        u = rng.uniform(-1.0, 1.0, pencil.n)
        s = float(rng.uniform(0.1, 0.9))
        spectral = oracle.full_eig(pencil)
        bounds = zolotarev.SpectralInterval(float(spectral.eigenvalues[0]), float(spectral.eigenvalues[-1]))
        k_norm = oracle.k_norm_quadrature(pencil, u, s, quad_tol, bounds=bounds)
        h_norm = oracle.h_norm_exact(spectral, pencil.M, u, s)
        checks.append(CheckResult.close(f"C_s K-norm = H-norm (trial {trial}, s={s:.3f})", specfun.c_s(s) * k_norm, h_norm, 1e-5))
    return checks


SUITES: dict[str, SuiteCheck] = {
    "specfun": _specfun_suite,
    "zolotarev": _zolotarev_suite,
    "linalg": _linalg_suite,
    "models": _models_suite,
    "rbm": _rbm_suite,
    "equivalence": _equivalence_suite,
}


def suite_names() -> list[str]:
    return [*SUITES, "all"]


def _run_one(name: str, quad_tol: float) -> list[CheckResult]:
    with logger.timed(f"verify {name}"):
        if name == "equivalence":
            return _equivalence_suite(quad_tol)
        return SUITES[name]()


def run_suite(name: str, quad_tol: float = 1e-8) -> list[CheckResult]:
    if name == "all":
        return [check for suite in SUITES for check in _run_one(suite, quad_tol)]
    if name not in SUITES:
        raise DomainError("suite", name, f"one of {', '.join(suite_names())}")
    return _run_one(name, quad_tol)


def print_report(name: str, checks: list[CheckResult]) -> bool:
    """Print one line per check and a summary; True when every check passed."""
    print(f"\n{Style.BRIGHT}{'=' * 60}{Style.RESET_ALL}")
    print(f"{Style.BRIGHT}{f'VERIFY {name.upper()}'.center(60)}{Style.RESET_ALL}")
    print(f"{Style.BRIGHT}{'=' * 60}{Style.RESET_ALL}\n")
    failed = 0
    for check in checks:
        if check.passed:
            print(f"{Fore.GREEN}[+] {check.name}{Style.RESET_ALL}")
        else:
            failed += 1
            print(f"{Fore.RED}[!] {check}{Style.RESET_ALL}")
    if failed:
        print(f"\n{Fore.RED}[!] {failed} of {len(checks)} checks failed{Style.RESET_ALL}")
    else:
        print(f"\n{Fore.CYAN}[>] all {len(checks)} checks passed{Style.RESET_ALL}")
    return failed == 0
