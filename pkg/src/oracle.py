"""
Brute-force reference quantities: the full generalized eigendecomposition,
exact norms and operator actions, K-functionals, a quadrature K-norm, the
Zolotarev min-max deviation and convergence-rate fits.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Literal, Optional, Sequence

import numpy as np
import scipy.linalg
from numpy.polynomial.legendre import leggauss

from .config import thread_count
from .errors import ConvergenceError, DomainError, FactorizationError, InsufficientDataError
from .linalg import (
    DEFAULT_DROP_TOL,
    DEFAULT_REL_TOL,
    FloatArray,
    SparseSymMatrix,
    cg_shifted_solve,
    lambda_max_estimate,
    lambda_min_estimate,
)
from .log.logger import logger
from .models import Pencil
from .rbm import build_basis, check_exponent, rb_apply, rb_norm
from .zolotarev import SpectralInterval, snapshot_times

FULL_EIG_LIMIT = 4096
SURROGATE_EXTRA_R = 20
MIN_FIT_POINTS = 4
# floor = FLOOR_FACTOR * rel_tol * scale
FLOOR_FACTOR = 1e2

_GAUSS_ORDER = 8
_MAX_PANELS = 4096
# truncation of t in units of 1/lambda; analytic tails cover the rest
_TAIL_SPAN = 1e4
# runs of grid values within this fraction of the max count as one alternance point
_ALTERNANCE_BAND = 0.05

ErrorField = Literal["e_norm", "e_op"]


@dataclass(frozen=True)
class SpectralOracle:
    """Ascending eigenvalues lambda_k^2 with M-orthonormal eigenvector columns."""

    eigenvalues: FloatArray
    eigenvectors: FloatArray

    @property
    def n(self) -> int:
        return int(self.eigenvalues.size)

    def coefficients(self, M: SparseSymMatrix, u: FloatArray) -> FloatArray:
        """u_k = phi_k^T M u."""
        return self.eigenvectors.T @ (M.csr @ np.asarray(u, dtype=np.float64))

    def residuals(self, M: SparseSymMatrix, A: SparseSymMatrix) -> FloatArray:
        """||A phi_k - lambda_k^2 M phi_k|| / (lambda_k^2 ||M phi_k||) per column."""
        M_phi = np.asarray(M.csr @ self.eigenvectors)
        A_phi = np.asarray(A.csr @ self.eigenvectors)
        numerator = np.linalg.norm(A_phi - M_phi * self.eigenvalues, axis=0)
        return numerator / (self.eigenvalues * np.linalg.norm(M_phi, axis=0))


@dataclass(frozen=True)
class ErrorRecord:
    r: int
    s: float
    e_norm: float
    e_op: float
    norm_u_1: float
    norm_u_2: float
    # rb_norm^2 - u^T M rb_apply, relative
    consistency: float = 0.0


@dataclass(frozen=True)
class MinMaxResult:
    value: float
    argmax: FloatArray
    alternance: int


def full_eig(pencil: Pencil) -> SpectralOracle:
    """
    Solve A phi = lambda^2 M phi densely through a Cholesky factor of M.

    Args:
        pencil: a pencil with n <= 4096

    Returns:
        The oracle with eigenvectors normalized in the M inner product
    """
    n = pencil.n
    if n > FULL_EIG_LIMIT:
        raise DomainError("n", n, f"n <= {FULL_EIG_LIMIT} for a dense eigensolve")
    with logger.timed(f"full generalized eigensolve n={n}"):
        M = pencil.M.to_dense()
        try:
            L = scipy.linalg.cholesky(M, lower=True)
        except np.linalg.LinAlgError as error:
            raise FactorizationError(f"mass matrix is not positive definite: {error}") from error
        # C = L^{-1} A L^{-T}
        left = scipy.linalg.solve_triangular(L, pencil.A.to_dense(), lower=True)
        C = scipy.linalg.solve_triangular(L, left.T, lower=True)
        eigenvalues, Y = scipy.linalg.eigh(0.5 * (C + C.T))
        phi = scipy.linalg.solve_triangular(L.T, Y, lower=False)
    norms = np.sqrt(np.einsum("ij,ij->j", phi, pencil.M.csr @ phi))
    phi = phi / norms
    if eigenvalues[0] <= 0.0:
        raise FactorizationError(f"stiffness matrix is not positive definite: smallest eigenvalue {eigenvalues[0]!r}")
    return SpectralOracle(np.asarray(eigenvalues, dtype=np.float64), np.asarray(phi, dtype=np.float64))


def h_norm_exact(oracle: SpectralOracle, M: SparseSymMatrix, u: FloatArray, s: float) -> float:
    check_exponent(s, widened=True)
    coefficients = oracle.coefficients(M, u)
    return math.sqrt(float(np.sum(np.power(oracle.eigenvalues, s) * coefficients**2)))


def op_exact(oracle: SpectralOracle, M: SparseSymMatrix, u: FloatArray, s: float) -> FloatArray:
    """(M^{-1} A)^s u through the eigen expansion."""
    check_exponent(s, widened=True)
    coefficients = oracle.coefficients(M, u)
    return oracle.eigenvectors @ (np.power(oracle.eigenvalues, s) * coefficients)


def norm_0(pencil: Pencil, u: FloatArray) -> float:
    vector = np.asarray(u, dtype=np.float64)
    return math.sqrt(float(vector @ (pencil.M.csr @ vector)))


def norm_1(pencil: Pencil, u: FloatArray) -> float:
    vector = np.asarray(u, dtype=np.float64)
    return math.sqrt(float(vector @ (pencil.A.csr @ vector)))


def norm_2(pencil: Pencil, u: FloatArray, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """||M^{-1} A u||_0 with one CG solve on M."""
    w = cg_shifted_solve(pencil.M, pencil.A, 0.0, pencil.A.csr @ np.asarray(u, dtype=np.float64), rel_tol)
    return norm_0(pencil, w)


def active_interval(
    oracle: SpectralOracle,
    M: SparseSymMatrix,
    u: FloatArray,
    tol: float = 1e-12,
) -> SpectralInterval:
    """Interval spanned by the eigenvalues whose coefficient exceeds tol * ||u||_0."""
    coefficients = oracle.coefficients(M, u)
    scale = math.sqrt(float(np.sum(coefficients**2)))
    active = oracle.eigenvalues[np.abs(coefficients) > tol * scale]
    if active.size == 0 or float(active[-1]) <= float(active[0]):
        raise DomainError("u", f"{active.size} active eigenvalue(s)", "at least two distinct active eigenvalues")
    return SpectralInterval(float(active[0]), float(active[-1]))


def k_functional_sq(
    pencil: Pencil,
    u: FloatArray,
    t: float,
    rel_tol: float = DEFAULT_REL_TOL,
) -> float:
    """
    K^2(t; u) = u^T M (M^{-1} - (M + t^2 A)^{-1}) M u, evaluated as
    t^2 u^T M (M + t^2 A)^{-1} A u to avoid cancellation at small t.
    """
    if not (t >= 0.0):
        raise DomainError("t", t, "t >= 0")
    if t == 0.0:
        return 0.0
    vector = np.asarray(u, dtype=np.float64)
    x = cg_shifted_solve(pencil.M, pencil.A, t, pencil.A.csr @ vector, rel_tol)
    return max((t * t) * float((pencil.M.csr @ vector) @ x), 0.0)


def _panel_integral(
    integrand: Callable[[float], float],
    lo: float,
    hi: float,
    nodes: FloatArray,
    weights: FloatArray,
) -> float:
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    values = np.array([integrand(float(mid + half * node)) for node in nodes])
    return half * float(np.sum(weights * values))


def k_norm_quadrature(
    pencil: Pencil,
    u: FloatArray,
    s: float,
    quad_tol: float = 1e-8,
    rel_tol: float = DEFAULT_REL_TOL,
    bounds: Optional[SpectralInterval] = None,
) -> float:
    """
    K-method norm sqrt(int_0^inf t^{-2s-1} K^2(t; u) dt) by adaptive
    Gauss-Legendre panels in tau = ln t.

    Args:
        pencil: the pencil (M, A)
        u: coefficient vector
        s: exponent in (0, 1)
        quad_tol: panel acceptance tolerance relative to the total
        rel_tol: CG tolerance of each K-functional evaluation
        bounds: spectral enclosure; estimated by power and inverse iteration
            when omitted

    Returns:
        The K-norm; C_s times it equals the Hilbert norm
    """
    check_exponent(s)
    if bounds is None:
        bounds = SpectralInterval(lambda_min_estimate(pencil.M, pencil.A), lambda_max_estimate(pencil.M, pencil.A))
    t_lo = 1.0 / (_TAIL_SPAN * math.sqrt(bounds.lambda_U_sq))
    t_hi = _TAIL_SPAN / math.sqrt(bounds.lambda_L_sq)
    tau_lo, tau_hi = math.log(t_lo), math.log(t_hi)

    def integrand_at(tau: float) -> float:
        t = math.exp(tau)
        return t ** (-2.0 * s) * k_functional_sq(pencil, u, t, rel_tol)

    nodes, weights = leggauss(_GAUSS_ORDER)

    # K^2 ~ t^2 ||u||_1^2 below t_lo and ~ ||u||_0^2 above t_hi
    tails = norm_1(pencil, u) ** 2 * t_lo ** (2.0 - 2.0 * s) / (2.0 - 2.0 * s)
    tails += norm_0(pencil, u) ** 2 * t_hi ** (-2.0 * s) / (2.0 * s)

    edges = np.linspace(tau_lo, tau_hi, max(1, math.ceil(tau_hi - tau_lo)) + 1)
    pending = [(float(a), float(b), _panel_integral(integrand_at, float(a), float(b), nodes, weights)) for a, b in zip(edges, edges[1:])]
    estimate = tails + sum(coarse for _, _, coarse in pending)
    total = tails
    panels = len(pending)
    while pending:
        lo, hi, coarse = pending.pop()
        mid = 0.5 * (lo + hi)
        left = _panel_integral(integrand_at, lo, mid, nodes, weights)
        right = _panel_integral(integrand_at, mid, hi, nodes, weights)
        fine = left + right
        if abs(fine - coarse) <= quad_tol * abs(estimate):
            total += fine
            continue
        panels += 1
        if panels > _MAX_PANELS:
            raise ConvergenceError("k-norm quadrature", panels, abs(fine - coarse) / abs(estimate))
        pending.append((lo, mid, left))
        pending.append((mid, hi, right))
    logger.log_debug(f"k-norm quadrature s={s} used {panels} panels")
    return math.sqrt(total)


def _deviation(points: FloatArray, x: FloatArray) -> FloatArray:
    product = np.ones_like(x)
    for p in points:
        product *= np.abs((1.0 - p * x) / (1.0 + p * x))
    return product


def minmax_product(
    points: Sequence[float],
    domain: tuple[float, float],
    grid_size: int = 100_000,
) -> MinMaxResult:
    """
    max over a uniform grid on domain of prod_j |(1 - p_j x) / (1 + p_j x)|.

    The points live on the inverse of the domain (transformed Zolotarev
    points of sigma^inv for x in sigma).
    """
    lo, hi = domain
    if not (hi > lo):
        raise DomainError("domain", domain, "lo < hi")
    if grid_size < 1000:
        raise DomainError("grid_size", grid_size, "grid_size >= 1000")
    x = np.linspace(lo, hi, grid_size)
    values = _deviation(np.asarray(points, dtype=np.float64), x)
    peak = float(np.max(values))
    near = np.concatenate(([0], (values >= (1.0 - _ALTERNANCE_BAND) * peak).astype(np.int8), [0]))
    # maximal runs of near-extremal grid points, [start, stop)
    edges = np.flatnonzero(np.diff(near))
    runs = list(zip(edges[::2], edges[1::2]))
    argmax = np.array([x[start + int(np.argmax(values[start:stop]))] for start, stop in runs])
    return MinMaxResult(value=peak, argmax=argmax, alternance=len(runs))


def _norms_from_oracle(oracle: SpectralOracle, M: SparseSymMatrix, u: FloatArray) -> tuple[float, float]:
    coefficients = oracle.coefficients(M, u)
    norm_1_sq = float(np.sum(oracle.eigenvalues * coefficients**2))
    norm_2_sq = float(np.sum(oracle.eigenvalues**2 * coefficients**2))
    return math.sqrt(norm_1_sq), math.sqrt(norm_2_sq)


def error_sweep(
    pencil: Pencil,
    u: FloatArray,
    interval: SpectralInterval,
    s_list: Sequence[float],
    r_list: Sequence[int],
    rel_tol: float = DEFAULT_REL_TOL,
    drop_tol: float = DEFAULT_DROP_TOL,
    oracle: Optional[SpectralOracle] = None,
    threads: Optional[int] = None,
) -> list[ErrorRecord]:
    """
    E^Norm and E^Op for every (s, r), sorted by (s, r).

    Args:
        pencil: the pencil (M, A)
        u: coefficient vector
        interval: spectral enclosure for the snapshot times
        s_list: exponents in (0, 1)
        r_list: reduced space sizes
        rel_tol: CG tolerance of the snapshot solves
        drop_tol: Gram-Schmidt drop tolerance
        oracle: precomputed eigendecomposition; computed when omitted and
            n <= 4096, otherwise a reduced space with r = max(r_list) + 20
            stands in for the exact quantities
        threads: worker count, FRACRB_THREADS when omitted

    Returns:
        One record per (s, r)
    """
    if not s_list or not r_list:
        raise DomainError("s_list/r_list", (list(s_list), list(r_list)), "nonempty lists")
    for s in s_list:
        check_exponent(s)
    vector = np.asarray(u, dtype=np.float64)
    M = pencil.M
    exact_norms: dict[float, float] = {}
    exact_ops: dict[float, FloatArray] = {}

    if oracle is None and pencil.n <= FULL_EIG_LIMIT:
        oracle = full_eig(pencil)
    if oracle is not None:
        for s in s_list:
            exact_norms[s] = h_norm_exact(oracle, M, vector, s)
            exact_ops[s] = op_exact(oracle, M, vector, s)
        norm_u_1, norm_u_2 = _norms_from_oracle(oracle, M, vector)
    else:
        r_star = max(r_list) + SURROGATE_EXTRA_R
        logger.log_info(f"n={pencil.n} too large for the oracle, using surrogate r*={r_star}")
        reference = build_basis(pencil, vector, snapshot_times(interval, r_star), rel_tol, drop_tol, threads)
        for s in s_list:
            exact_norms[s] = rb_norm(reference, s)
            exact_ops[s] = rb_apply(reference, pencil, s)
        norm_u_1, norm_u_2 = norm_1(pencil, vector), norm_2(pencil, vector, rel_tol)

    def cell(r: int) -> list[ErrorRecord]:
        with logger.timed(f"sweep cell r={r}"):
            basis = build_basis(pencil, vector, snapshot_times(interval, r), rel_tol, drop_tol, threads=1)
            records = []
            for s in s_list:
                reduced_norm = rb_norm(basis, s)
                action = rb_apply(basis, pencil, s)
                difference = action - exact_ops[s]
                via_action = float(vector @ (M.csr @ action))
                records.append(
                    ErrorRecord(
                        r=r,
                        s=s,
                        e_norm=reduced_norm**2 - exact_norms[s] ** 2,
                        e_op=math.sqrt(max(float(difference @ (M.csr @ difference)), 0.0)),
                        norm_u_1=norm_u_1,
                        norm_u_2=norm_u_2,
                        consistency=abs(reduced_norm**2 - via_action) / max(reduced_norm**2, 1e-300),
                    )
                )
            return records

    workers = thread_count() if threads is None else max(1, threads)
    if workers == 1:
        cells = [cell(r) for r in r_list]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(cell, r_list))
    records = [record for records in cells for record in records]
    return sorted(records, key=lambda record: (record.s, record.r))


def fit_rate(
    records: Sequence[ErrorRecord],
    field: ErrorField,
    rel_tol: float = DEFAULT_REL_TOL,
    floor: Optional[float] = None,
) -> float:
    """
    Negated least-squares slope of ln(error) against r over the pre-floor range.

    The range ends at the first record (in r order) whose error is at or
    below the floor, 1e2 * rel_tol * scale by default with scale ||u||_1^2
    for e_norm and ||u||_2 for e_op.
    """
    if field not in ("e_norm", "e_op"):
        raise DomainError("field", field, "'e_norm' or 'e_op'")
    if len({record.s for record in records}) > 1:
        raise DomainError("records", "mixed s", "records of a single exponent")
    ordered = sorted(records, key=lambda record: record.r)
    r_values: list[float] = []
    errors: list[float] = []
    for record in ordered:
        error = record.e_norm if field == "e_norm" else record.e_op
        scale = record.norm_u_1**2 if field == "e_norm" else record.norm_u_2
        limit = floor if floor is not None else FLOOR_FACTOR * rel_tol * scale
        if not error > limit:
            break
        r_values.append(float(record.r))
        errors.append(math.log(error))
    if len(r_values) < MIN_FIT_POINTS:
        raise InsufficientDataError(
            f"fit_rate needs {MIN_FIT_POINTS} records above the floor for {field}, got {len(r_values)}"
        )
    slope = float(np.polyfit(np.asarray(r_values), np.asarray(errors), 1)[0])
    return -slope
