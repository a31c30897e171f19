"""
Sparse and small dense symmetric linear algebra for pencils (M, A).
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import numpy.typing as npt
import scipy.sparse

from .errors import ConvergenceError, DimensionError, DomainError, FactorizationError
from .log.logger import logger

FloatArray = npt.NDArray[np.float64]

DEFAULT_REL_TOL = 1e-12
DEFAULT_DROP_TOL = 1e-10
POWER_SAFETY = 0.05
_POWER_MAX_ITER = 10_000
_JACOBI_MAX_SWEEPS = 60


@dataclass(frozen=True)
class SparseSymMatrix:
    """Symmetric matrix in compressed row storage holding the full pattern."""

    csr: "scipy.sparse.csr_matrix"

    def __post_init__(self) -> None:
        rows, cols = self.csr.shape
        if rows != cols:
            raise DimensionError(f"matrix must be square, got {rows}x{cols}")
        scale = float(abs(self.csr).max()) if self.csr.nnz else 0.0
        asymmetry = abs(self.csr - self.csr.T)
        if asymmetry.nnz and float(asymmetry.max()) > 1e-14 * scale:
            raise DomainError("matrix", f"{rows}x{cols}", "a symmetric matrix")

    @classmethod
    def from_any(cls, matrix: Union[FloatArray, "scipy.sparse.spmatrix"]) -> "SparseSymMatrix":
        csr = scipy.sparse.csr_matrix(matrix, dtype=np.float64)
        csr.sum_duplicates()
        csr.sort_indices()
        return cls(csr)

    @classmethod
    def identity(cls, n: int) -> "SparseSymMatrix":
        return cls(scipy.sparse.identity(n, dtype=np.float64, format="csr"))

    @property
    def n(self) -> int:
        return int(self.csr.shape[0])

    @property
    def row_offsets(self) -> npt.NDArray[np.int32]:
        return self.csr.indptr

    @property
    def column_indices(self) -> npt.NDArray[np.int32]:
        return self.csr.indices

    @property
    def values(self) -> FloatArray:
        return self.csr.data

    def diagonal(self) -> FloatArray:
        return np.asarray(self.csr.diagonal(), dtype=np.float64)

    def to_dense(self) -> FloatArray:
        return np.asarray(self.csr.toarray(), dtype=np.float64)


@dataclass(frozen=True)
class DenseSymMatrix:
    values: FloatArray

    def __post_init__(self) -> None:
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {self.values.shape}")
        scale = float(np.max(np.abs(self.values))) if self.values.size else 0.0
        if self.values.size and float(np.max(np.abs(self.values - self.values.T))) > 1e-12 * max(scale, 1e-300):
            raise DomainError("matrix", f"{self.m}x{self.m}", "a symmetric matrix")

    @classmethod
    def symmetrized(cls, values: FloatArray) -> "DenseSymMatrix":
        values = np.asarray(values, dtype=np.float64)
        return cls(0.5 * (values + values.T))

    @property
    def m(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues with orthonormal eigenvector columns."""

    eigenvalues: FloatArray
    eigenvectors: FloatArray

    def require_positive(self) -> None:
        if self.eigenvalues.size and float(self.eigenvalues[0]) <= 0.0:
            raise FactorizationError(
                f"fractional power needs a positive definite matrix, smallest eigenvalue is {float(self.eigenvalues[0])!r}"
            )

    def _powered(self, s: float) -> FloatArray:
        self.require_positive()
        return np.power(self.eigenvalues, s)

    def power_apply(self, s: float, x: FloatArray) -> FloatArray:
        """Q^s x without forming Q^s."""
        return self.eigenvectors @ (self._powered(s) * (self.eigenvectors.T @ x))

    def quad_form(self, s: float, x: FloatArray) -> float:
        y = self.eigenvectors.T @ x
        return float(np.dot(self._powered(s), y * y))

    def power_matrix(self, s: float) -> FloatArray:
        return (self.eigenvectors * self._powered(s)) @ self.eigenvectors.T


def _as_vector(x: Union[FloatArray, Sequence[float]]) -> FloatArray:
    return np.asarray(x, dtype=np.float64)


def spmv(Q: SparseSymMatrix, x: Union[FloatArray, Sequence[float]]) -> FloatArray:
    vector = _as_vector(x)
    if vector.shape != (Q.n,):
        raise DimensionError(f"vector of length {vector.shape} does not match dimension {Q.n}")
    return np.asarray(Q.csr @ vector, dtype=np.float64)


def pcg(
    S: "scipy.sparse.csr_matrix",
    b: FloatArray,
    rel_tol: float,
    max_iter: Optional[int] = None,
) -> FloatArray:
    """
    Jacobi-preconditioned conjugate gradients for an SPD matrix S.

    Stops once the true residual satisfies ||Sx - b|| <= rel_tol ||b||;
    the recursive residual is replaced by the true one when they disagree.
    """
    n = int(S.shape[0])
    if b.shape != (n,):
        raise DimensionError(f"right-hand side of length {b.shape} does not match dimension {n}")
    if max_iter is None:
        max_iter = max(10 * n, 10_000)
    x = np.zeros(n, dtype=np.float64)
    norm_b = float(np.linalg.norm(b))
    if norm_b == 0.0:
        return x

    diagonal = np.asarray(S.diagonal(), dtype=np.float64)
    if np.any(diagonal <= 0.0):
        raise FactorizationError("matrix has a nonpositive diagonal entry and is not SPD")
    inv_diagonal = 1.0 / diagonal
    target = rel_tol * norm_b

    r = b.copy()
    z = inv_diagonal * r
    p = z.copy()
    gamma = float(r @ z)
    iteration = 0
    while iteration < max_iter:
        iteration += 1
        Sp = S @ p
        curvature = float(p @ Sp)
        if curvature <= 0.0:
            raise FactorizationError("conjugate gradients met nonpositive curvature; matrix is not SPD")
        alpha = gamma / curvature
        x += alpha * p
        r -= alpha * Sp
        if float(np.linalg.norm(r)) <= target:
            r = b - S @ x
            if float(np.linalg.norm(r)) <= target:
                logger.log_debug(f"pcg converged in {iteration} iterations (n={n})")
                return x
            # recursive residual drifted: restart from the true residual
            z = inv_diagonal * r
            p = z.copy()
            gamma = float(r @ z)
            continue
        z = inv_diagonal * r
        gamma_old = gamma
        gamma = float(r @ z)
        p = z + (gamma / gamma_old) * p

    residual = float(np.linalg.norm(b - S @ x)) / norm_b
    raise ConvergenceError("pcg", iteration, residual)


def _check_rel_tol(rel_tol: float) -> None:
    if not (0.0 < rel_tol <= 1e-6):
        raise DomainError("rel_tol", rel_tol, "0 < rel_tol <= 1e-6")


def shifted_matrix(M: SparseSymMatrix, A: SparseSymMatrix, t: float) -> "scipy.sparse.csr_matrix":
    if M.n != A.n:
        raise DimensionError(f"pencil dimensions differ: M is {M.n}, A is {A.n}")
    if t == 0.0:
        return M.csr
    return scipy.sparse.csr_matrix(M.csr + (t * t) * A.csr)


def cg_shifted_solve(
    M: SparseSymMatrix,
    A: SparseSymMatrix,
    t: float,
    b: Union[FloatArray, Sequence[float]],
    rel_tol: float = DEFAULT_REL_TOL,
) -> FloatArray:
    """Solve (M + t^2 A) x = b."""
    if not (t >= 0.0):
        raise DomainError("t", t, "t >= 0")
    _check_rel_tol(rel_tol)
    rhs = _as_vector(b)
    try:
        return pcg(shifted_matrix(M, A, t), rhs, rel_tol)
    except ConvergenceError as error:
        raise error.with_shift(t) from error


def gram_schmidt_m(
    columns: Union[FloatArray, Sequence[FloatArray]],
    M: SparseSymMatrix,
    drop_tol: float = DEFAULT_DROP_TOL,
) -> tuple[FloatArray, int]:
    """
    Chronological Gram-Schmidt in the M inner product with one
    reorthogonalization pass per column.

    Args:
        columns: candidate vectors, processed in the given order
        M: SPD matrix defining the inner product
        drop_tol: a candidate whose M-norm shrinks below drop_tol times its
            original M-norm is treated as dependent and discarded

    Returns:
        (V, kept) with V of shape (n, kept) and V^T M V = I
    """
    candidates = [_as_vector(c) for c in (columns.T if isinstance(columns, np.ndarray) else columns)]
    if not candidates:
        raise DomainError("columns", "[]", "at least one column")
    basis: list[FloatArray] = []
    M_basis: list[FloatArray] = []
    for index, column in enumerate(candidates):
        if column.shape != (M.n,):
            raise DimensionError(f"column {index} has length {column.shape}, expected {M.n}")
        w = column.copy()
        pre_norm = math.sqrt(max(float(w @ (M.csr @ w)), 0.0))
        if index == 0 and pre_norm == 0.0:
            raise DomainError("u", "0", "a vector with nonzero M-norm")
        if pre_norm == 0.0:
            logger.log_debug(f"gram-schmidt dropped zero column {index}")
            continue
        if basis:
            V = np.column_stack(basis)
            MV = np.column_stack(M_basis)
            for _ in range(2):
                w -= V @ (MV.T @ w)
        Mw = np.asarray(M.csr @ w, dtype=np.float64)
        post_norm = math.sqrt(max(float(w @ Mw), 0.0))
        if post_norm < drop_tol * pre_norm:
            logger.log_debug(f"gram-schmidt dropped column {index} (ratio {post_norm / pre_norm:.2e})")
            continue
        basis.append(w / post_norm)
        M_basis.append(Mw / post_norm)
    return np.column_stack(basis), len(basis)


def _jacobi_rotate(a: FloatArray, v: FloatArray, p: int, q: int) -> None:
    apq = a[p, q]
    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
    if abs(theta) > 1e150:
        t = 1.0 / (2.0 * theta)
    else:
        t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c

    col_p = a[:, p].copy()
    col_q = a[:, q]
    a[:, p] = c * col_p - s * col_q
    a[:, q] = s * col_p + c * col_q
    row_p = a[p, :].copy()
    row_q = a[q, :]
    a[p, :] = c * row_p - s * row_q
    a[q, :] = s * row_p + c * row_q
    a[p, q] = 0.0
    a[q, p] = 0.0

    vec_p = v[:, p].copy()
    vec_q = v[:, q]
    v[:, p] = c * vec_p - s * vec_q
    v[:, q] = s * vec_p + c * vec_q


def _off_diagonal_norm(a: FloatArray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def sym_eig(Q: DenseSymMatrix) -> EigenDecomposition:
    """Cyclic Jacobi eigendecomposition, eigenvalues ascending."""
    a = np.array(Q.values, dtype=np.float64, copy=True)
    m = Q.m
    v = np.eye(m, dtype=np.float64)
    target = 1e-13 * float(np.linalg.norm(a))
    sweeps = 0
    while _off_diagonal_norm(a) > target:
        if sweeps >= _JACOBI_MAX_SWEEPS:
            raise ConvergenceError("cyclic jacobi", sweeps, _off_diagonal_norm(a))
        sweeps += 1
        for p in range(m - 1):
            for q in range(p + 1, m):
                if a[p, q] != 0.0:
                    _jacobi_rotate(a, v, p, q)
    eigenvalues = np.diag(a).copy()
    # stable sort keeps rotation order for ties
    order = np.argsort(eigenvalues, kind="stable")
    return EigenDecomposition(eigenvalues[order], v[:, order])


def _check_power(s: float) -> None:
    if not (0.0 <= s <= 1.0):
        raise DomainError("s", s, "0 <= s <= 1")


def mat_pow_s(Q: DenseSymMatrix, s: float) -> DenseSymMatrix:
    _check_power(s)
    eig = sym_eig(Q)
    eig.require_positive()
    if s == 0.0:
        return DenseSymMatrix(np.eye(Q.m))
    if s == 1.0:
        return Q
    return DenseSymMatrix.symmetrized(eig.power_matrix(s))


def quad_form_pow(Q: DenseSymMatrix, s: float, x: Union[FloatArray, Sequence[float]]) -> float:
    vector = _as_vector(x)
    if vector.shape != (Q.m,):
        raise DimensionError(f"vector of length {vector.shape} does not match dimension {Q.m}")
    return sym_eig(Q).quad_form(s, vector)


def _start_vector(n: int) -> FloatArray:
    return np.random.default_rng(20240101).uniform(0.5, 1.5, size=n)


def _rayleigh(M: SparseSymMatrix, A: SparseSymMatrix, x: FloatArray) -> float:
    return float(x @ (A.csr @ x)) / float(x @ (M.csr @ x))


def lambda_max_estimate(M: SparseSymMatrix, A: SparseSymMatrix, tol: float = 1e-6) -> float:
    """
    Upper bound for the largest eigenvalue of A x = lambda M x by power
    iteration, returned as estimate * 1.05 + 1.
    """
    if M.n != A.n:
        raise DimensionError(f"pencil dimensions differ: M is {M.n}, A is {A.n}")
    x = _start_vector(M.n)
    rho = _rayleigh(M, A, x)
    for iteration in range(1, _POWER_MAX_ITER + 1):
        y = pcg(M.csr, np.asarray(A.csr @ x, dtype=np.float64), DEFAULT_REL_TOL)
        norm = math.sqrt(float(y @ (M.csr @ y)))
        if norm == 0.0:
            return 1.0
        x = y / norm
        rho_new = _rayleigh(M, A, x)
        if abs(rho_new - rho) < tol * abs(rho_new):
            logger.log_debug(f"power iteration converged in {iteration} steps, rho={rho_new!r}")
            return rho_new * (1.0 + POWER_SAFETY) + 1.0
        rho = rho_new
    raise ConvergenceError("power iteration", _POWER_MAX_ITER, abs(rho))


def lambda_min_estimate(M: SparseSymMatrix, A: SparseSymMatrix, tol: float = 1e-6) -> float:
    """Lower bound for the smallest eigenvalue by inverse iteration, times 0.95."""
    if M.n != A.n:
        raise DimensionError(f"pencil dimensions differ: M is {M.n}, A is {A.n}")
    x = _start_vector(M.n)
    rho = _rayleigh(M, A, x)
    for iteration in range(1, _POWER_MAX_ITER + 1):
        y = pcg(A.csr, np.asarray(M.csr @ x, dtype=np.float64), DEFAULT_REL_TOL)
        x = y / math.sqrt(float(y @ (M.csr @ y)))
        rho_new = _rayleigh(M, A, x)
        if abs(rho_new - rho) < tol * abs(rho_new):
            logger.log_debug(f"inverse iteration converged in {iteration} steps, rho={rho_new!r}")
            return rho_new * (1.0 - POWER_SAFETY)
        rho = rho_new
    raise ConvergenceError("inverse iteration", _POWER_MAX_ITER, abs(rho))
