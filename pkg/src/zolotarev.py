"""
Zolotarev points, their transformation onto a spectral interval, and the
snapshot times of a Zolotarev reduced space.
"""

import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .errors import DomainError
from .log.logger import logger
from .specfun import EllipticModulus, complete_k, cstar, landen_sncndn

FloatArray = npt.NDArray[np.float64]

# snapshot times closer than this (relative) are merged
_DUPLICATE_TOL = 1e-14


@dataclass(frozen=True)
class SpectralInterval:
    """Enclosure [lambda_L^2, lambda_U^2] of the generalized spectrum."""

    lambda_L_sq: float
    lambda_U_sq: float

    def __post_init__(self) -> None:
        if not (self.lambda_L_sq > 0.0):
            raise DomainError("lambda_L_sq", self.lambda_L_sq, "lambda_L_sq > 0")
        if not (self.lambda_U_sq > self.lambda_L_sq):
            raise DomainError(
                "lambda_U_sq", self.lambda_U_sq, f"lambda_U_sq > lambda_L_sq = {self.lambda_L_sq!r}"
            )

    @property
    def delta(self) -> float:
        return self.lambda_L_sq / self.lambda_U_sq

    def inverse(self) -> tuple[float, float]:
        """The interval [1/lambda_U^2, 1/lambda_L^2] holding the squared times."""
        return 1.0 / self.lambda_U_sq, 1.0 / self.lambda_L_sq

    def contains(self, value: float, rel_tol: float = 0.0) -> bool:
        slack = rel_tol * self.lambda_U_sq
        return self.lambda_L_sq - slack <= value <= self.lambda_U_sq + slack


@dataclass(frozen=True)
class SnapshotTimes:
    times: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.times or self.times[0] != 0.0:
            raise DomainError("times", self.times, "a sequence starting with t0 = 0")
        for previous, current in zip(self.times, self.times[1:]):
            if not current > previous:
                raise DomainError("times", self.times, "strictly increasing times")

    @property
    def r(self) -> int:
        return len(self.times) - 1

    def __len__(self) -> int:
        return len(self.times)

    def as_array(self) -> FloatArray:
        return np.asarray(self.times, dtype=np.float64)


def _check_delta(delta: float) -> None:
    if not (0.0 < delta < 1.0):
        raise DomainError("delta", delta, "0 < delta < 1")


def zolotarev_points(delta: float, r: int) -> FloatArray:
    """
    Zolotarev points Z_j = dn((2(r-j)+1)/(2r) K(d'), d') on [delta, 1].

    Args:
        delta: left end of the interval [delta, 1]
        r: number of points

    Returns:
        r strictly ascending values inside (delta, 1)
    """
    _check_delta(delta)
    if r < 0:
        raise DomainError("r", r, "r >= 0")
    if r == 0:
        return np.empty(0, dtype=np.float64)

    # modulus sqrt(1 - delta^2) built from its complement to keep tiny delta exact
    modulus = EllipticModulus.of_complement(delta)
    quarter_period = complete_k(modulus)
    points = np.empty(r, dtype=np.float64)
    for j in range(1, r + 1):
        numerator = 2 * (r - j) + 1
        if numerator == r:
            # dn(K/2) = sqrt(k')
            points[j - 1] = math.sqrt(delta)
        elif numerator > r:
            # past K/2 use dn(K - v) = k' / dn(v), cn is tiny there
            reflected = (2.0 * j - 1.0) / (2.0 * r) * quarter_period
            points[j - 1] = delta / landen_sncndn(reflected, modulus)[2]
        else:
            points[j - 1] = landen_sncndn(numerator / (2.0 * r) * quarter_period, modulus)[2]
    return points


def transformed_points(a: float, b: float, r: int) -> FloatArray:
    if not (a > 0.0):
        raise DomainError("a", a, "a > 0")
    if not (b > a):
        raise DomainError("b", b, f"b > a = {a!r}")
    return b * zolotarev_points(a / b, r)


def snapshot_times(interval: SpectralInterval, r: int) -> SnapshotTimes:
    if r < 1:
        raise DomainError("r", r, "r >= 1")
    a, b = interval.inverse()
    squared = transformed_points(a, b, r)
    times = [0.0]
    for t in np.sqrt(squared):
        t = float(t)
        if t - times[-1] <= _DUPLICATE_TOL * t:
            logger.log_debug(f"dropping duplicate snapshot time t={t!r}")
            continue
        times.append(t)
    return SnapshotTimes(tuple(times))


def r_for_tolerance(eps: float, delta: float) -> int:
    """Smallest r with 2 exp(-C* r) <= eps."""
    if not (0.0 < eps < 1.0):
        raise DomainError("eps", eps, "0 < eps < 1")
    rate = cstar(delta)
    if math.isinf(rate):
        raise DomainError("delta", delta, "delta bounded away from 1 (C* is infinite)")
    return max(1, math.ceil(math.log(2.0 / eps) / rate))
