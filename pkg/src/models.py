"""
Model pencils (M, A) with known spectra, synthetic diagonal pencils and
Matrix Market ingestion.
"""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import numpy.typing as npt
import scipy.io
import scipy.linalg
import scipy.sparse

from .errors import DimensionError, DomainError, FormatError
from .linalg import FloatArray, SparseSymMatrix
from .log.logger import logger

# dense generalized eigensolves for exact_eigenvalues are done up to this size
_DENSE_EIGEN_LIMIT = 512

PathLike = Union[str, Path]


@dataclass(frozen=True)
class Pencil:
    M: SparseSymMatrix
    A: SparseSymMatrix
    exact_eigenvalues: Optional[FloatArray] = None
    name: str = "pencil"

    def __post_init__(self) -> None:
        if self.M.n != self.A.n:
            raise DimensionError(f"pencil dimensions differ: M is {self.M.n}, A is {self.A.n}")

    @property
    def n(self) -> int:
        return self.M.n

    def is_positive_definite_sample(self, samples: int = 20, seed: int = 7) -> bool:
        """Sampled SPD check: x^T M x > 0 and x^T A x > 0 for random x."""
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            x = rng.standard_normal(self.n)
            if float(x @ (self.M.csr @ x)) <= 0.0 or float(x @ (self.A.csr @ x)) <= 0.0:
                return False
        return True


class XorShift64Star:
    """
    xorshift64* generator (Vigna 2016) with a fixed recipe so that test
    vectors are reproducible in any language:

        x ^= x >> 12; x ^= x << 25; x ^= x >> 27; out = x * 2685821657736338717
        uniform = (out >> 11) * 2**-53
    """

    _MASK = (1 << 64) - 1
    _MULTIPLIER = 2685821657736338717

    def __init__(self, seed: int) -> None:
        # splitmix-style scrambling keeps seed 0 usable
        state = (seed * 0x9E3779B97F4A7C15 + 0x6A09E667F3BCC909) & self._MASK
        self.state = state or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & self._MASK
        x ^= x >> 27
        self.state = x
        return (x * self._MULTIPLIER) & self._MASK

    def uniform(self, low: float, high: float) -> float:
        unit = (self.next_u64() >> 11) * 2.0**-53
        return low + (high - low) * unit


def _dense_generalized_eigenvalues(M: SparseSymMatrix, A: SparseSymMatrix) -> FloatArray:
    values = scipy.linalg.eigh(A.to_dense(), M.to_dense(), eigvals_only=True)
    return np.sort(np.asarray(values, dtype=np.float64))


def _check_grid_size(n: int) -> None:
    if n < 2:
        raise DomainError("n", n, "n >= 2")


def laplace_1d_fem(n: int) -> Pencil:
    """Piecewise linear elements on (0, 1) with n interior nodes, Dirichlet."""
    _check_grid_size(n)
    h = 1.0 / (n + 1)
    ones = np.ones(n)
    A = scipy.sparse.diags([-ones[1:], 2.0 * ones, -ones[1:]], [-1, 0, 1], format="csr") / h
    M = scipy.sparse.diags([ones[1:], 4.0 * ones, ones[1:]], [-1, 0, 1], format="csr") * (h / 6.0)
    pencil_M = SparseSymMatrix.from_any(M)
    pencil_A = SparseSymMatrix.from_any(A)
    exact = _dense_generalized_eigenvalues(pencil_M, pencil_A) if n <= _DENSE_EIGEN_LIMIT else None
    return Pencil(pencil_M, pencil_A, exact, name=f"laplace1d(n={n})")


def laplace_2d_fd(n: int) -> Pencil:
    """5-point finite differences on an n x n interior grid of the unit square."""
    _check_grid_size(n)
    h = 1.0 / (n + 1)
    ones = np.ones(n)
    T = scipy.sparse.diags([-ones[1:], 2.0 * ones, -ones[1:]], [-1, 0, 1], format="csr")
    identity = scipy.sparse.identity(n, format="csr")
    A = (scipy.sparse.kron(identity, T) + scipy.sparse.kron(T, identity)) / (h * h)

    k = np.arange(1, n + 1, dtype=np.float64)
    one_dim = np.sin(k * math.pi * h / 2.0) ** 2
    exact = np.sort((4.0 / (h * h)) * (one_dim[:, None] + one_dim[None, :]).ravel())
    return Pencil(
        SparseSymMatrix.identity(n * n),
        SparseSymMatrix.from_any(A),
        exact,
        name=f"laplace2d(n={n})",
    )


def synthetic_diagonal(eigenvalues_sq: Union[FloatArray, Sequence[float]]) -> Pencil:
    values = np.asarray(eigenvalues_sq, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise DomainError("eigenvalues_sq", values.shape, "a nonempty sequence")
    if np.any(values <= 0.0):
        raise DomainError("eigenvalues_sq", float(values.min()), "all entries > 0")
    if np.any(np.diff(values) < 0.0):
        raise DomainError("eigenvalues_sq", "unsorted", "an ascending sequence")
    return Pencil(
        SparseSymMatrix.identity(values.size),
        SparseSymMatrix.from_any(scipy.sparse.diags(values, format="csr")),
        values.copy(),
        name=f"diagonal(n={values.size})",
    )


def example1_spectrum(lambda_u: float = 4200.0) -> FloatArray:
    """Ascending pi^2 (i^2 + j^2) <= lambda_u over i, j >= 1 (unit square)."""
    bound = int(math.sqrt(lambda_u) / math.pi) + 1
    index = np.arange(1, bound + 1, dtype=np.float64)
    values = (math.pi**2) * (index[:, None] ** 2 + index[None, :] ** 2).ravel()
    return np.sort(values[values <= lambda_u])


def _read_symmetric(path: PathLike) -> "scipy.sparse.csr_matrix":
    source = str(path)
    try:
        rows, cols, _, fmt, field, symmetry = scipy.io.mminfo(source)
    except (OSError, ValueError) as error:
        raise FormatError(source, f"cannot read Matrix Market header: {error}") from error
    if fmt != "coordinate":
        raise FormatError(source, f"expected coordinate format, got {fmt!r}")
    if field not in ("real", "integer"):
        raise FormatError(source, f"expected a real matrix, got field {field!r}")
    if symmetry != "symmetric":
        raise FormatError(source, f"expected a symmetric header, got {symmetry!r}")
    if rows != cols:
        raise FormatError(source, f"matrix is {rows}x{cols}, not square")
    try:
        # mmread mirrors the stored lower triangle
        matrix = scipy.io.mmread(source)
    except (OSError, ValueError) as error:
        raise FormatError(source, f"cannot parse entries: {error}") from error
    return scipy.sparse.csr_matrix(matrix, dtype=np.float64)


def load_matrix_market(path_M: PathLike, path_A: PathLike) -> Pencil:
    M = _read_symmetric(path_M)
    A = _read_symmetric(path_A)
    if M.shape != A.shape:
        raise DimensionError(f"{path_M} is {M.shape[0]}x{M.shape[1]} but {path_A} is {A.shape[0]}x{A.shape[1]}")
    logger.log_info(f"loaded Matrix Market pencil n={M.shape[0]} from {path_M}, {path_A}")
    return Pencil(
        SparseSymMatrix.from_any(M),
        SparseSymMatrix.from_any(A),
        None,
        name=f"matrixmarket({Path(path_M).name},{Path(path_A).name})",
    )


def write_matrix_market(pencil: Pencil, path_M: PathLike, path_A: PathLike) -> None:
    for matrix, path in ((pencil.M, path_M), (pencil.A, path_A)):
        scipy.io.mmwrite(str(path), matrix.csr, field="real", symmetry="symmetric", precision=17)


def random_combination(
    pencil: Pencil,
    active_count: int,
    seed: int,
    eigenvectors: Optional[FloatArray] = None,
) -> FloatArray:
    """
    u = sum_{k <= active_count} c_k phi_k with c_k uniform in (-1, 1).

    Args:
        pencil: the pencil whose eigenvectors are combined
        active_count: number of leading eigenvectors used
        seed: seed of the xorshift64* stream
        eigenvectors: M-orthonormal eigenvector columns; computed with the
            full oracle when omitted

    Returns:
        The coefficient vector of u
    """
    if not (1 <= active_count <= pencil.n):
        raise DomainError("active_count", active_count, f"1 <= active_count <= n = {pencil.n}")
    if eigenvectors is None:
        from .oracle import full_eig

        eigenvectors = full_eig(pencil).eigenvectors
    generator = XorShift64Star(seed)
    coefficients = np.array([generator.uniform(-1.0, 1.0) for _ in range(active_count)])
    u: npt.NDArray[np.float64] = eigenvectors[:, :active_count] @ coefficients
    return u
