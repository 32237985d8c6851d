import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ksdt.errors import ContractError, NumericError
from ksdt.kernel import BaseKernelSpec, SteinKernel, base_cross_diag, base_eval, base_grad_x, stein_eval
from ksdt.target import Gaussian

from conftest import _mp, base_fd, central_diff, cross_diag_fd, stein_by_fd

IMQ = BaseKernelSpec("imq")
RBF1 = BaseKernelSpec("rbf", 1.0)


class TestBaseEval:
    def test_imq_zero_distance(self):
        for d in (1, 3, 7):
            assert base_eval(IMQ, np.ones(d), np.ones(d)) == 1.0

    def test_imq_unit_distance(self):
        assert base_eval(IMQ, [0.0], [1.0]) == pytest.approx(0.70710678, abs=1e-8)

    def test_rbf_hand_value(self):
        assert base_eval(RBF1, [1.0, 1.0], [0.0, 0.0]) == pytest.approx(math.exp(-1), abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ContractError):
            base_eval(IMQ, [0.0, 1.0], [1.0])

    def test_rbf_requires_bandwidth(self):
        with pytest.raises(ContractError):
            BaseKernelSpec("rbf")
        with pytest.raises(ContractError):
            BaseKernelSpec("rbf", -1.0)

    def test_rbf_default_bandwidth_is_dimension(self):
        assert BaseKernelSpec.for_dim("rbf", 3).bandwidth == 3.0
        assert BaseKernelSpec.for_dim("rbf", 3, 0.5).bandwidth == 0.5
        assert BaseKernelSpec.for_dim("imq", 3).bandwidth is None

    @settings(max_examples=200, deadline=None)
    @given(
        arrays(np.float64, 3, elements=st.floats(-5, 5)),
        arrays(np.float64, 3, elements=st.floats(-5, 5)),
        st.sampled_from([IMQ, RBF1, BaseKernelSpec("rbf", 3.0)]),
    )
    def test_range_and_identity(self, x, y, spec):
        k = base_eval(spec, x, y)
        assert 0.0 < k <= 1.0
        if np.array_equal(x, y):
            assert k == 1.0
        elif np.sum((x - y) ** 2) > 1e-12:
            assert k < 1.0


class TestDerivatives:
    def test_grad_zero_on_diagonal(self):
        for spec in (IMQ, RBF1):
            np.testing.assert_array_equal(base_grad_x(spec, [0.3, -1.0], [0.3, -1.0]), [0.0, 0.0])

    @pytest.mark.parametrize(
        "spec, expected", [(RBF1, -math.exp(-0.5)), (IMQ, -(2**-1.5))], ids=["rbf", "imq"]
    )
    def test_grad_hand_values(self, spec, expected):
        fd = central_diff(lambda a: base_fd(spec)(a, _mp([0.0])), [1.0])
        assert fd[0] == pytest.approx(expected, rel=1e-6)
        assert base_grad_x(spec, [1.0], [0.0])[0] == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize(
        "spec, d, expected",
        [(RBF1, 1, 1.0), (IMQ, 2, 2.0), (BaseKernelSpec("rbf", 2.0), 3, 1.5)],
        ids=["rbf-h1-d1", "imq-d2", "rbf-h2-d3"],
    )
    def test_cross_diag_on_diagonal(self, spec, d, expected):
        x = np.full(d, 0.25)
        fd = cross_diag_fd(base_fd(spec), x, x)
        assert fd == pytest.approx(expected, rel=1e-6)
        assert base_cross_diag(spec, x, x) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("spec", [IMQ, RBF1, BaseKernelSpec("rbf", 2.5)], ids=["imq", "rbf1", "rbf2.5"])
    def test_against_finite_differences(self, spec, rng):
        for _ in range(30):
            d = int(rng.integers(1, 5))
            x, y = rng.normal(size=d), rng.normal(size=d)
            k = base_fd(spec)
            np.testing.assert_allclose(base_grad_x(spec, x, y), central_diff(lambda a: k(a, _mp(y)), x), rtol=1e-5)
            assert base_cross_diag(spec, x, y) == pytest.approx(cross_diag_fd(k, x, y), rel=1e-5)


class TestSteinKernel:
    @pytest.fixture
    def sk_rbf(self):
        target = Gaussian([0.0], [1.0])
        return SteinKernel(RBF1, target.score, 1)

    def test_std_normal_origin(self, sk_rbf):
        assert stein_eval(sk_rbf, [0.0], [0.0]) == pytest.approx(1.0, abs=1e-14)

    def test_std_normal_at_two(self, sk_rbf):
        assert stein_eval(sk_rbf, [2.0], [2.0]) == pytest.approx(5.0, abs=1e-12)

    def test_symmetry(self, mixture_kernel, rng):
        for _ in range(100):
            x, y = rng.normal(scale=2, size=(2, 2))
            a, b = mixture_kernel(x, y), mixture_kernel(y, x)
            assert abs(a - b) <= 1e-12 * max(1.0, abs(a))

    @pytest.mark.parametrize("family", ["imq", "rbf"])
    def test_matches_fd_assembly(self, mixture_2d, family, rng):
        spec = BaseKernelSpec.for_dim(family, 2)
        sk = SteinKernel(spec, mixture_2d.score, 2)
        for _ in range(10):
            x, y = rng.normal(size=(2, 2))
            assert sk(x, y) == pytest.approx(stein_by_fd(spec, mixture_2d.score, x, y), rel=1e-5)

    @pytest.mark.parametrize("family", ["imq", "rbf"])
    def test_gram_psd(self, mixture_2d, family, rng):
        sk = SteinKernel(BaseKernelSpec.for_dim(family, 2), mixture_2d.score, 2)
        for n in (2, 5, 12, 20):
            g = sk.gram(rng.normal(scale=1.5, size=(n, 2)))
            np.testing.assert_allclose(g, g.T, rtol=1e-12, atol=1e-12)
            assert np.linalg.eigvalsh(g).min() >= -1e-8 * np.abs(g).max()

    def test_row_counts_evaluations(self, mixture_kernel, rng):
        pts = rng.normal(size=(7, 2))
        x = rng.normal(size=2)
        mixture_kernel.evals = 0
        mixture_kernel.row(x, mixture_kernel.scores(x), pts, mixture_kernel.scores(pts))
        assert mixture_kernel.evals == 7

    def test_row_matches_scalar(self, mixture_kernel, rng):
        pts = rng.normal(size=(5, 2))
        x = rng.normal(size=2)
        row = mixture_kernel.row(x, mixture_kernel.scores(x), pts, mixture_kernel.scores(pts))
        np.testing.assert_allclose(row, [mixture_kernel(x, p) for p in pts], rtol=1e-14)

    def test_non_finite_score_raises(self):
        sk = SteinKernel(IMQ, lambda x: np.full_like(np.asarray(x, dtype=float), np.nan), 1)
        with pytest.raises(NumericError) as info:
            sk([1.0], [2.0])
        assert info.value.point is not None

    def test_wrong_dimension(self, mixture_kernel):
        with pytest.raises(ContractError):
            mixture_kernel([0.0], [0.0, 1.0])
