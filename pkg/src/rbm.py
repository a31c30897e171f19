"""
Reduced basis evaluation of fractional norms and fractional operator powers.

A reduced space is spanned by the snapshots (M + t_j^2 A)^{-1} M u at the
times of a Zolotarev space. It depends on u, so a ReducedBasis refuses to act
on any other vector.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .config import thread_count
from .errors import BasisMismatchError, DimensionError, DomainError
from .linalg import (
    DEFAULT_DROP_TOL,
    DEFAULT_REL_TOL,
    DenseSymMatrix,
    EigenDecomposition,
    FloatArray,
    cg_shifted_solve,
    gram_schmidt_m,
    sym_eig,
)
from .log.logger import logger
from .models import Pencil
from .specfun import c_s, d_s
from .zolotarev import SnapshotTimes, SpectralInterval, snapshot_times


def check_exponent(s: float, widened: bool = False) -> None:
    if widened:
        if not (0.0 <= s <= 1.0):
            raise DomainError("s", s, "0 <= s <= 1")
    elif not (0.0 < s < 1.0):
        raise DomainError("s", s, "0 < s < 1")


def _check_argument(pencil: Pencil, u: FloatArray) -> FloatArray:
    vector = np.asarray(u, dtype=np.float64)
    if vector.shape != (pencil.n,):
        raise DimensionError(f"vector of length {vector.shape} does not match pencil dimension {pencil.n}")
    if not np.any(vector):
        raise DomainError("u", "0", "a nonzero vector")
    return vector


@dataclass(frozen=True)
class ReducedBasis:
    u: FloatArray
    times: SnapshotTimes
    V: FloatArray
    A_r: DenseSymMatrix
    eig: EigenDecomposition
    beta: float
    projected_u: FloatArray

    @property
    def kept(self) -> int:
        return int(self.V.shape[1])

    @property
    def exact(self) -> bool:
        """Gram-Schmidt dropped a snapshot, so the space holds every active mode."""
        return self.kept < len(self.times)

    def first_unit_coefficients(self) -> FloatArray:
        """Phi^T e_1, the first row of the eigenvectors of A_r."""
        return self.eig.eigenvectors[0, :]


@dataclass(frozen=True)
class FracResult:
    s: float
    norm_value: Optional[float] = None
    action: Optional[FloatArray] = field(default=None, repr=False)
    kept: int = 0
    exact: bool = False

    @property
    def k_norm(self) -> float:
        """K-method norm, equal to the Hilbert norm divided by C_s."""
        if self.norm_value is None:
            raise ValueError("result carries no norm value")
        return self.norm_value / c_s(self.s)

    @property
    def extension_norm(self) -> float:
        if self.norm_value is None:
            raise ValueError("result carries no norm value")
        return float(np.sqrt(d_s(self.s))) * self.norm_value


def solve_snapshots(
    pencil: Pencil,
    u: FloatArray,
    times: SnapshotTimes,
    rel_tol: float = DEFAULT_REL_TOL,
    threads: Optional[int] = None,
) -> list[FloatArray]:
    """
    Snapshots (M + t_j^2 A)^{-1} M u in the order of times.

    Args:
        pencil: the pencil (M, A)
        u: coefficient vector of the argument
        times: snapshot times, t_0 = 0 first
        rel_tol: relative residual tolerance of each CG solve
        threads: worker count, FRACRB_THREADS when omitted

    Returns:
        One vector per time; the t_0 = 0 entry is a copy of u
    """
    vector = _check_argument(pencil, u)
    rhs = np.asarray(pencil.M.csr @ vector, dtype=np.float64)
    workers = thread_count() if threads is None else max(1, threads)

    def solve(t: float) -> FloatArray:
        if t == 0.0:
            return vector.copy()
        return cg_shifted_solve(pencil.M, pencil.A, t, rhs, rel_tol)

    if workers == 1 or len(times) <= 2:
        return [solve(t) for t in times.times]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(solve, times.times))


def build_basis(
    pencil: Pencil,
    u: FloatArray,
    times: SnapshotTimes,
    rel_tol: float = DEFAULT_REL_TOL,
    drop_tol: float = DEFAULT_DROP_TOL,
    threads: Optional[int] = None,
) -> ReducedBasis:
    vector = _check_argument(pencil, u)
    with logger.timed(f"basis build r={times.r} n={pencil.n}"):
        snapshots = solve_snapshots(pencil, vector, times, rel_tol, threads)
        V, kept = gram_schmidt_m(snapshots, pencil.M, drop_tol)
        A_r = DenseSymMatrix.symmetrized(V.T @ (pencil.A.csr @ V))
        eig = sym_eig(A_r)
    beta = float(np.sqrt(vector @ (pencil.M.csr @ vector)))
    projected_u = V.T @ (pencil.M.csr @ vector)
    if kept < len(times):
        logger.log_info(f"reduced space saturated: kept {kept} of {len(times)} snapshots")
    return ReducedBasis(
        u=vector.copy(),
        times=times,
        V=V,
        A_r=A_r,
        eig=eig,
        beta=beta,
        projected_u=np.asarray(projected_u, dtype=np.float64),
    )


def _unit(m: int) -> FloatArray:
    e1 = np.zeros(m, dtype=np.float64)
    e1[0] = 1.0
    return e1


def rb_norm(basis: ReducedBasis, s: float, widened: bool = False) -> float:
    """Reduced Hilbert interpolation norm beta * ||e_1||_{A_r^s}."""
    check_exponent(s, widened)
    return basis.beta * float(np.sqrt(max(basis.eig.quad_form(s, _unit(basis.kept)), 0.0)))


def rb_apply(
    basis: ReducedBasis,
    pencil: Pencil,
    s: float,
    u: Optional[FloatArray] = None,
    widened: bool = False,
) -> FloatArray:
    """
    Reduced fractional operator beta * V A_r^s e_1.

    Args:
        basis: reduced basis built from u
        pencil: the pencil the basis was built on
        s: fractional exponent
        u: the vector acted on; it must be the one the basis was built from
        widened: admit s in [0, 1]

    Returns:
        Coefficient vector of the reduced action
    """
    check_exponent(s, widened)
    if pencil.n != basis.V.shape[0]:
        raise DimensionError(f"basis has dimension {basis.V.shape[0]}, pencil has {pencil.n}")
    if u is not None and not np.array_equal(np.asarray(u, dtype=np.float64), basis.u):
        raise BasisMismatchError("reduced basis was built from a different vector")
    return basis.beta * (basis.V @ basis.eig.power_apply(s, _unit(basis.kept)))


def rb_inner(basis: ReducedBasis, pencil: Pencil, w: FloatArray, s: float, widened: bool = False) -> float:
    """Reduced scalar product w^T M V A_r^s V^T M u."""
    check_exponent(s, widened)
    vector = np.asarray(w, dtype=np.float64)
    if vector.shape != (pencil.n,):
        raise DimensionError(f"vector of length {vector.shape} does not match pencil dimension {pencil.n}")
    projected_w = basis.V.T @ (pencil.M.csr @ vector)
    return float(projected_w @ basis.eig.power_apply(s, basis.projected_u))


def rb_k_functional_sq(basis: ReducedBasis, t: float) -> float:
    if not (t >= 0.0):
        raise DomainError("t", t, "t >= 0")
    weights = basis.first_unit_coefficients() ** 2
    scaled = (t * t) * basis.eig.eigenvalues
    return basis.beta**2 * float(np.sum(weights * scaled / (1.0 + scaled)))


def rb_k_norm(basis: ReducedBasis, s: float) -> float:
    return rb_norm(basis, s) / c_s(s)


def rb_eval_many(
    pencil: Pencil,
    u: FloatArray,
    interval: SpectralInterval,
    r: int,
    s_list: Sequence[float],
    rel_tol: float = DEFAULT_REL_TOL,
    drop_tol: float = DEFAULT_DROP_TOL,
    widened: bool = False,
    threads: Optional[int] = None,
) -> list[FracResult]:
    """One offline basis build, then norm and action for every s."""
    if not s_list:
        raise DomainError("s_list", "[]", "at least one exponent")
    for s in s_list:
        check_exponent(s, widened)
    basis = build_basis(pencil, u, snapshot_times(interval, r), rel_tol, drop_tol, threads)
    results = []
    for s in s_list:
        results.append(
            FracResult(
                s=s,
                norm_value=rb_norm(basis, s, widened),
                action=rb_apply(basis, pencil, s, widened=widened),
                kept=basis.kept,
                exact=basis.exact,
            )
        )
    return results
