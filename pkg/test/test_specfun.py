import math

import pytest
import scipy.special

from src.errors import DomainError
from src.specfun import (
    EllipticModulus,
    RateConstants,
    c_s,
    complete_k,
    cstar,
    d_s,
    ellipk,
    gamma,
    jacobi_dn,
    landen_sncndn,
)


class TestGamma:
    @pytest.mark.parametrize(
        "x,expected",
        [
            (0.5, math.sqrt(math.pi)),
            (1.0, 1.0),
            (2.0, 1.0),
            (5.0, 24.0),
            (0.25, 3.6256099082219083),
        ],
    )
    def test_known_values(self, x, expected):
        assert gamma(x) == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
    def test_nonpositive_argument(self, x):
        with pytest.raises(DomainError, match="x="):
            gamma(x)


class TestEllipticModulus:
    def test_of_complement_keeps_tiny_complement(self):
        modulus = EllipticModulus.of_complement(1e-17)
        assert modulus.kprime == 1e-17
        assert modulus.k == 1.0

    def test_of_modulus_rejects_one(self):
        with pytest.raises(DomainError):
            EllipticModulus.of_modulus(1.0)

    def test_inconsistent_pair(self):
        with pytest.raises(DomainError):
            EllipticModulus(0.5, 0.5)


class TestEllipk:
    def test_zero_modulus(self):
        assert ellipk(0.0) == pytest.approx(math.pi / 2.0, rel=1e-15)

    @pytest.mark.parametrize("k", [0.1, 0.5, 0.9, 0.99, 0.999999])
    def test_matches_scipy_parameter_convention(self, k):
        # scipy takes the parameter m = k^2
        assert ellipk(k) == pytest.approx(float(scipy.special.ellipk(k * k)), rel=1e-10)

    def test_asymptotic_branch(self):
        kprime = 1e-8
        expected = math.log(4.0 / kprime)
        assert complete_k(EllipticModulus.of_complement(kprime)) == pytest.approx(expected, rel=1e-14)

    def test_asymptotic_branch_matches_scipy(self):
        kprime = 1e-7
        assert complete_k(EllipticModulus.of_complement(kprime)) == pytest.approx(
            float(scipy.special.ellipkm1(kprime * kprime)), rel=1e-12
        )

    def test_modulus_one_rejected(self):
        with pytest.raises(DomainError):
            ellipk(1.0)


class TestJacobiDn:
    def test_at_zero(self):
        assert jacobi_dn(0.0, 0.7) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("k", [0.3, 0.8, 0.99])
    def test_at_quarter_period(self, k):
        assert jacobi_dn(ellipk(k), k) == pytest.approx(math.sqrt(1.0 - k * k), rel=1e-10)

    @pytest.mark.parametrize("k,u", [(0.3, 0.4), (0.8, 1.1), (0.95, 2.0), (0.5, 0.0)])
    def test_matches_scipy(self, k, u):
        _, _, dn_reference, _ = scipy.special.ellipj(u, k * k)
        assert jacobi_dn(u, k) == pytest.approx(float(dn_reference), rel=1e-12)

    def test_pythagorean_identities(self):
        modulus = EllipticModulus.of_modulus(0.6)
        sn, cn, dn = landen_sncndn(0.9, modulus)
        assert sn * sn + cn * cn == pytest.approx(1.0, abs=1e-14)
        assert dn * dn + 0.36 * sn * sn == pytest.approx(1.0, abs=1e-14)

    def test_negative_argument(self):
        with pytest.raises(DomainError, match="u="):
            jacobi_dn(-0.1, 0.5)


class TestInterpolationConstants:
    def test_half(self):
        assert d_s(0.5) == pytest.approx(1.0, rel=1e-14)
        assert c_s(0.5) == pytest.approx(math.sqrt(2.0 / math.pi), rel=1e-15)

    @pytest.mark.parametrize("s", [0.1, 0.25, 0.75, 0.9])
    def test_d_s_closed_form(self, s):
        expected = 2.0 ** (1.0 - 2.0 * s) * scipy.special.gamma(1.0 - s) / scipy.special.gamma(s)
        assert d_s(s) == pytest.approx(float(expected), rel=1e-13)

    def test_c_s_symmetric(self):
        assert c_s(0.2) == pytest.approx(c_s(0.8), rel=1e-15)

    @pytest.mark.parametrize("s", [0.0, 1.0, -0.1, 1.5])
    def test_domain(self, s):
        with pytest.raises(DomainError):
            d_s(s)
        with pytest.raises(DomainError):
            c_s(s)

    def test_rate_constants_bundle(self):
        constants = RateConstants.evaluate(0.5, 0.01)
        assert constants.d_s == pytest.approx(1.0)
        assert constants.cstar == cstar(0.01)


def cstar_reference(delta):
    """pi K(mu1) / (4 K(mu)) through scipy in the parameter convention."""
    mu = ((1.0 - math.sqrt(delta)) / (1.0 + math.sqrt(delta))) ** 2
    mu1_sq = 1.0 - mu * mu
    return math.pi * float(scipy.special.ellipk(mu1_sq)) / (4.0 * float(scipy.special.ellipk(mu * mu)))


class TestCstar:
    @pytest.mark.parametrize("delta", [1e-1, 1e-2, 2.0 * math.pi**2 / 4200.0, 1e-4, 1.0 / 1.53e5, 1e-6])
    def test_matches_scipy(self, delta):
        assert cstar(delta) == pytest.approx(cstar_reference(delta), rel=1e-9)

    def test_unit_square_example_value(self):
        # sigma = [2 pi^2, 4200]
        assert 2.0 * cstar(2.0 * math.pi**2 / 4200.0) == pytest.approx(1.463, abs=0.01)

    def test_second_example_value(self):
        assert abs(cstar(1.0 / 1.53e5) - 0.37) <= 0.02

    def test_decreasing_in_condition(self):
        values = [cstar(delta) for delta in (1e-1, 1e-2, 1e-4, 1e-6, 1e-8)]
        assert values == sorted(values, reverse=True)

    def test_logarithmic_decay(self):
        # C* ~ pi^2 / (2 ln(4 / delta)) for small delta
        assert cstar(1e-8) / cstar(1e-4) == pytest.approx(0.5, rel=0.15)

    @pytest.mark.parametrize("delta", [0.0, 1.0, -0.5, 2.0])
    def test_domain(self, delta):
        with pytest.raises(DomainError, match="delta="):
            cstar(delta)
