"""
Special functions and the analytic constants of the interpolation norms.

Elliptic functions use the modulus convention k throughout (not the
parameter m = k**2 that scipy.special uses). Internally a modulus is carried
together with its complement k' so that moduli within 1e-16 of one stay
representable.
"""

import math
from dataclasses import dataclass

import scipy.special

from .errors import DomainError

_EPS = 2.0**-52
_MAX_AGM_STEPS = 64
# 1 - k < 1e-12  <=>  k'^2 < ~2e-12
_ASYMPTOTIC_KPRIME_SQ = 2e-12


@dataclass(frozen=True)
class EllipticModulus:
    k: float
    kprime: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.k <= 1.0 and 0.0 < self.kprime <= 1.0):
            raise DomainError("k", self.k, "0 <= k < 1")
        if abs(self.k * self.k + self.kprime * self.kprime - 1.0) > 1e-14:
            raise DomainError("kprime", self.kprime, "k^2 + kprime^2 = 1")

    @classmethod
    def of_modulus(cls, k: float) -> "EllipticModulus":
        if not (0.0 <= k < 1.0):
            raise DomainError("k", k, "0 <= k < 1")
        return cls(k, math.sqrt((1.0 - k) * (1.0 + k)))

    @classmethod
    def of_complement(cls, kprime: float) -> "EllipticModulus":
        if not (0.0 < kprime <= 1.0):
            raise DomainError("kprime", kprime, "0 < kprime <= 1")
        return cls(math.sqrt((1.0 - kprime) * (1.0 + kprime)), kprime)


@dataclass(frozen=True)
class RateConstants:
    """Constants relating the interpolation norms and the convergence rate."""

    s: float
    delta: float
    d_s: float
    c_s: float
    cstar: float

    @classmethod
    def evaluate(cls, s: float, delta: float) -> "RateConstants":
        return cls(s=s, delta=delta, d_s=d_s(s), c_s=c_s(s), cstar=cstar(delta))


def _agm(a: float, b: float) -> float:
    for _ in range(_MAX_AGM_STEPS):
        if abs(a - b) <= _EPS * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def _landen_sequence(modulus: EllipticModulus) -> tuple[list[float], list[float]]:
    """AGM sequence a_i, c_i seeded with (1, k', k), run to stagnation."""
    a = [1.0]
    c = [modulus.k]
    b = modulus.kprime
    while abs(c[-1]) > _EPS * a[-1] and len(a) < _MAX_AGM_STEPS:
        a_prev = a[-1]
        c.append(0.5 * (a_prev - b))
        a.append(0.5 * (a_prev + b))
        b = math.sqrt(a_prev * b)
    return a, c


def landen_sncndn(u: float, modulus: EllipticModulus) -> tuple[float, float, float]:
    """sn, cn and dn by the descending Landen transformation."""
    a, c = _landen_sequence(modulus)
    n = len(a) - 1
    phi = (2.0**n) * a[n] * u
    for i in range(n, 0, -1):
        phi = 0.5 * (phi + math.asin(c[i] * math.sin(phi) / a[i]))
    sn = math.sin(phi)
    cn = math.cos(phi)
    # dn^2 = cn^2 + k'^2 sn^2 avoids the cancellation in 1 - k^2 sn^2
    dn = math.hypot(cn, modulus.kprime * sn)
    return sn, cn, dn


def complete_k(modulus: EllipticModulus) -> float:
    kprime = modulus.kprime
    if kprime * kprime < _ASYMPTOTIC_KPRIME_SQ:
        log_term = math.log(4.0 / kprime)
        return log_term + 0.25 * kprime * kprime * (log_term - 1.0)
    return math.pi / (2.0 * _agm(1.0, kprime))


def gamma(x: float) -> float:
    if not x > 0.0:
        raise DomainError("x", x, "x > 0")
    return float(scipy.special.gamma(x))


def ellipk(k: float) -> float:
    """Complete elliptic integral of the first kind K(k), modulus k."""
    return complete_k(EllipticModulus.of_modulus(k))


def jacobi_dn(u: float, k: float) -> float:
    modulus = EllipticModulus.of_modulus(k)
    if u < 0.0:
        raise DomainError("u", u, "u >= 0")
    return landen_sncndn(u, modulus)[2]


def _check_exponent(s: float) -> None:
    if not (0.0 < s < 1.0):
        raise DomainError("s", s, "0 < s < 1")


def d_s(s: float) -> float:
    _check_exponent(s)
    return 2.0 ** (1.0 - 2.0 * s) * gamma(1.0 - s) / gamma(s)


def c_s(s: float) -> float:
    _check_exponent(s)
    return math.sqrt(2.0 * math.sin(math.pi * s) / math.pi)


def cstar(delta: float) -> float:
    """
    Rate constant pi*K(mu1) / (4*K(mu)) of the Zolotarev min-max bound.

    Args:
        delta: ratio lambda_L^2 / lambda_U^2 of the spectral interval

    Returns:
        The constant, or math.inf when mu underflows to zero (delta ~ 1)
    """
    if not (0.0 < delta < 1.0):
        raise DomainError("delta", delta, "0 < delta < 1")
    q = math.sqrt(delta)
    mu = ((1.0 - q) / (1.0 + q)) ** 2
    if mu == 0.0:
        return math.inf
    # mu1 = sqrt(1 - mu^2) with 1 - mu = 4q / (1 + q)^2 kept exact
    mu1 = (2.0 * math.sqrt(q) / (1.0 + q)) * math.sqrt(1.0 + mu)
    # K(mu) = pi / (2 agm(1, mu1)) and K(mu1) = pi / (2 agm(1, mu))
    return math.pi * _agm(1.0, mu1) / (4.0 * _agm(1.0, mu))
