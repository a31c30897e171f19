"""
End-to-end convergence and exactness checks on the model problems.
"""

import math
import os
import shutil
import tempfile

import numpy as np
import pytest

from src.linalg import lambda_max_estimate, lambda_min_estimate
from src.main import main
from src.models import example1_spectrum, laplace_1d_fem, laplace_2d_fd, random_combination, synthetic_diagonal
from src.oracle import error_sweep, fit_rate, full_eig, h_norm_exact, k_norm_quadrature, minmax_product, op_exact
from src.rbm import build_basis, rb_apply, rb_norm
from src.specfun import c_s, cstar
from src.zolotarev import SpectralInterval, snapshot_times, transformed_points, zolotarev_points

S_VALUES = [0.25, 0.5, 0.75]


@pytest.fixture
def temp_dir():
    path = tempfile.mkdtemp()
    yield path
    shutil.rmtree(path, ignore_errors=True)


@pytest.fixture
def restore_threads():
    original = os.environ.get("FRACRB_THREADS")
    yield
    if original is None:
        os.environ.pop("FRACRB_THREADS", None)
    else:
        os.environ["FRACRB_THREADS"] = original


def auto_interval(pencil):
    return SpectralInterval(lambda_min_estimate(pencil.M, pencil.A), lambda_max_estimate(pencil.M, pencil.A))


class TestUnitSquareNormDecay:
    def test_norm_error_rate(self):
        pencil = synthetic_diagonal(example1_spectrum(4200.0))
        u = random_combination(pencil, 300, 2024, np.eye(pencil.n))
        interval = SpectralInterval(2.0 * math.pi**2, 4200.0)
        records = error_sweep(pencil, u, interval, S_VALUES, list(range(1, 13)))
        assert all(record.e_norm >= -1e-10 for record in records)
        for s in S_VALUES:
            rate = fit_rate([record for record in records if record.s == s], "e_norm")
            assert rate >= 1.5

    def test_csv_identical_across_thread_counts(self, temp_dir, restore_threads):
        outputs = []
        for threads in ("1", "8"):
            os.environ["FRACRB_THREADS"] = threads
            path = os.path.join(temp_dir, f"convergence-{threads}.csv")
            config = os.path.join(os.path.dirname(__file__), os.pardir, "sample.cfg")
            assert main(["convergence", "--config", config, "--out", path]) == 0
            with open(path, "rb") as f:
                outputs.append(f.read())
        assert outputs[0] == outputs[1]
        assert outputs[0].count(b"\n") == 1 + 3 * 12


class TestExactness:
    @pytest.mark.parametrize(
        "pencil_factory,m",
        [
            (lambda: synthetic_diagonal([1.0, 4.0, 9.0, 16.0]), 1),
            (lambda: synthetic_diagonal([1.0, 4.0, 9.0, 16.0]), 2),
            (lambda: synthetic_diagonal([1.0, 4.0, 9.0, 16.0]), 4),
            (lambda: laplace_1d_fem(16), 1),
            (lambda: laplace_1d_fem(16), 2),
            (lambda: laplace_1d_fem(16), 5),
        ],
    )
    def test_saturated_space_is_exact(self, pencil_factory, m):
        pencil = pencil_factory()
        oracle = full_eig(pencil)
        u = random_combination(pencil, m, 17, oracle.eigenvectors)
        interval = SpectralInterval(float(oracle.eigenvalues[0]), float(oracle.eigenvalues[-1]))
        basis = build_basis(pencil, u, snapshot_times(interval, m))
        for s in S_VALUES:
            exact_norm = h_norm_exact(oracle, pencil.M, u, s)
            assert abs(rb_norm(basis, s) - exact_norm) <= 1e-9 * exact_norm
            exact_op = op_exact(oracle, pencil.M, u, s)
            difference = rb_apply(basis, pencil, s) - exact_op
            mass_norm = math.sqrt(float(difference @ (pencil.M.csr @ difference)))
            assert mass_norm <= 1e-9 * math.sqrt(float(exact_op @ (pencil.M.csr @ exact_op)))


class TestZolotarevBound:
    @pytest.mark.parametrize("delta", [1e-2, 1e-4, 1e-6])
    def test_bound_over_r(self, delta):
        assert zolotarev_points(delta, 1)[0] == pytest.approx(math.sqrt(delta), rel=1e-12)
        rate = cstar(delta)
        for r in range(1, 21):
            result = minmax_product(transformed_points(1.0, 1.0 / delta, r), (delta, 1.0), grid_size=100_000)
            assert result.value <= 2.0 * math.exp(-rate * r) * (1.0 + 1e-12)


@pytest.mark.slow
class TestInterpolationEquivalence:
    def test_random_triples(self):
        rng = np.random.default_rng(2718)
        for _ in range(50):
            pencil = laplace_1d_fem(int(rng.integers(4, 51)))
            u = rng.uniform(-1.0, 1.0, pencil.n)
            s = float(rng.uniform(0.1, 0.9))
            oracle = full_eig(pencil)
            bounds = SpectralInterval(float(oracle.eigenvalues[0]), float(oracle.eigenvalues[-1]))
            k_norm = k_norm_quadrature(pencil, u, s, quad_tol=1e-8, bounds=bounds)
            h_norm = h_norm_exact(oracle, pencil.M, u, s)
            assert abs(c_s(s) * k_norm - h_norm) <= 1e-5 * h_norm


@pytest.mark.slow
class TestOperatorDecay:
    def test_operator_error_rate_on_unit_square(self):
        pencil = laplace_2d_fd(31)
        oracle = full_eig(pencil)
        u = random_combination(pencil, pencil.n, 5, oracle.eigenvectors)
        interval = auto_interval(pencil)
        records = error_sweep(pencil, u, interval, S_VALUES, list(range(1, 25)), oracle=oracle)
        threshold = 0.9 * cstar(interval.delta)
        for s in S_VALUES:
            rate = fit_rate([record for record in records if record.s == s], "e_op")
            assert rate >= threshold
        assert all(record.consistency <= 1e-10 for record in records)
        assert all(record.e_op >= 0.0 for record in records)

    def test_rate_deteriorates_with_mesh_size(self):
        rates = []
        for n in (7, 15, 31, 63):
            pencil = laplace_2d_fd(n)
            oracle = full_eig(pencil)
            u = random_combination(pencil, pencil.n, 9, oracle.eigenvectors)
            records = error_sweep(pencil, u, auto_interval(pencil), [0.9], list(range(1, 13)), oracle=oracle)
            rates.append(fit_rate(records, "e_op"))
        assert all(rate > 0.0 for rate in rates)
        assert rates == sorted(rates, reverse=True)
