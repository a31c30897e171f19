import math

import numpy as np
import pytest
import scipy.special

from src.errors import DomainError
from src.zolotarev import (
    SnapshotTimes,
    SpectralInterval,
    r_for_tolerance,
    snapshot_times,
    transformed_points,
    zolotarev_points,
)


def points_reference(delta, r):
    """dn through scipy, parameter m = 1 - delta^2."""
    m = 1.0 - delta * delta
    quarter = float(scipy.special.ellipk(m))
    arguments = [(2.0 * (r - j) + 1.0) / (2.0 * r) * quarter for j in range(1, r + 1)]
    return np.array([float(scipy.special.ellipj(u, m)[2]) for u in arguments])


class TestZolotarevPoints:
    @pytest.mark.parametrize("delta", [1e-2, 1e-4, 1e-6])
    def test_single_point_is_geometric_mean(self, delta):
        assert zolotarev_points(delta, 1)[0] == pytest.approx(math.sqrt(delta), rel=1e-12)

    def test_example_delta_001(self):
        assert zolotarev_points(0.01, 1)[0] == pytest.approx(0.1, rel=1e-12)

    def test_empty(self):
        assert zolotarev_points(0.3, 0).size == 0

    @pytest.mark.parametrize("delta,r", [(1e-2, 2), (1e-2, 7), (1e-4, 10), (1e-6, 20), (0.5, 5)])
    def test_ascending_inside_interval(self, delta, r):
        points = zolotarev_points(delta, r)
        assert points.shape == (r,)
        assert np.all(np.diff(points) > 0.0)
        assert points[0] > delta
        assert points[-1] < 1.0

    @pytest.mark.parametrize("delta,r", [(1e-2, 4), (1e-4, 9), (1e-6, 16)])
    def test_product_symmetry(self, delta, r):
        points = zolotarev_points(delta, r)
        assert points * points[::-1] == pytest.approx(np.full(r, delta), rel=1e-12)

    @pytest.mark.parametrize("delta,r", [(0.1, 3), (1e-2, 6), (1e-3, 8)])
    def test_matches_scipy(self, delta, r):
        assert zolotarev_points(delta, r) == pytest.approx(points_reference(delta, r), rel=1e-9)

    def test_tiny_delta_stays_ordered(self):
        points = zolotarev_points(1e-17, 6)
        assert np.all(np.diff(points) > 0.0)
        assert points[0] > 1e-17

    @pytest.mark.parametrize("delta", [0.0, 1.0, 1.5, -0.1])
    def test_delta_domain(self, delta):
        with pytest.raises(DomainError, match="delta="):
            zolotarev_points(delta, 3)

    def test_negative_r(self):
        with pytest.raises(DomainError, match="r="):
            zolotarev_points(0.1, -1)


class TestTransformedPoints:
    def test_scaling(self):
        assert transformed_points(2.0, 8.0, 3) == pytest.approx(8.0 * zolotarev_points(0.25, 3), rel=1e-15)

    def test_single_point_geometric_mean(self):
        assert transformed_points(1.0, 100.0, 1)[0] == pytest.approx(10.0, rel=1e-12)

    @pytest.mark.parametrize("a,b", [(0.0, 1.0), (2.0, 1.0), (1.0, 1.0)])
    def test_domain(self, a, b):
        with pytest.raises(DomainError):
            transformed_points(a, b, 2)


class TestSpectralInterval:
    def test_delta_and_inverse(self):
        interval = SpectralInterval(2.0, 50.0)
        assert interval.delta == pytest.approx(0.04)
        assert interval.inverse() == (1.0 / 50.0, 0.5)

    def test_contains(self):
        interval = SpectralInterval(1.0, 4.0)
        assert interval.contains(2.0)
        assert not interval.contains(4.5)
        assert interval.contains(4.0 + 1e-12, rel_tol=1e-10)

    @pytest.mark.parametrize("low,high", [(0.0, 1.0), (-1.0, 1.0), (3.0, 3.0), (4.0, 2.0)])
    def test_invalid(self, low, high):
        with pytest.raises(DomainError):
            SpectralInterval(low, high)


class TestSnapshotTimes:
    def test_four_rows_for_r_three(self):
        times = snapshot_times(SpectralInterval(1.0, 100.0), 3)
        assert len(times) == 4
        assert times.r == 3
        assert times.times[0] == 0.0

    def test_times_inside_inverse_interval(self):
        interval = SpectralInterval(2.0 * math.pi**2, 4200.0)
        times = snapshot_times(interval, 12).as_array()[1:]
        assert np.all(np.diff(times) > 0.0)
        assert times[0] ** 2 >= 1.0 / 4200.0
        assert times[-1] ** 2 <= 1.0 / (2.0 * math.pi**2)

    def test_single_time(self):
        times = snapshot_times(SpectralInterval(1.0, 100.0), 1)
        # t_1^2 = geometric mean of [1/100, 1]
        assert times.times[1] == pytest.approx(math.sqrt(0.1), rel=1e-12)

    def test_r_zero_rejected(self):
        with pytest.raises(DomainError):
            snapshot_times(SpectralInterval(1.0, 2.0), 0)

    @pytest.mark.parametrize("times", [(), (0.5, 1.0), (0.0, 1.0, 1.0), (0.0, 2.0, 1.0)])
    def test_invalid_sequences(self, times):
        with pytest.raises(DomainError):
            SnapshotTimes(times)


class TestRForTolerance:
    def test_bound_is_met(self):
        delta = 1e-4
        r = r_for_tolerance(1e-8, delta)
        from src.specfun import cstar

        assert 2.0 * math.exp(-cstar(delta) * r) <= 1e-8
        assert 2.0 * math.exp(-cstar(delta) * (r - 1)) > 1e-8

    def test_at_least_one(self):
        assert r_for_tolerance(0.99, 0.9) >= 1

    @pytest.mark.parametrize("eps", [0.0, 1.0, -1e-3])
    def test_domain(self, eps):
        with pytest.raises(DomainError):
            r_for_tolerance(eps, 0.1)
