from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vskextrap.errors import ConfigError, DomainError, ShapeError
from vskextrap.kernels import CUBIC
from vskextrap.svr import PolynomialKernel, cross_validate, dual_objective, gram, predict_svr, train_svr

LINEAR = PolynomialKernel(degree=1, offset=1.0)


def brute_force_dual(kmat, f, epsilon, zeta, ridge=1e-10):
    """Exact minimizer of the dual by enumerating active sets (test oracle).

    Every variable is at ``-zeta``, ``0`` or ``+zeta``, or free with a fixed
    sign. For each pattern the free part solves the equality-constrained
    stationarity system; feasible solutions are compared by objective.
    """
    n = f.shape[0]
    kr = kmat + ridge * np.eye(n)
    best = None
    for pattern in product(range(5), repeat=n):
        pattern = np.array(pattern)
        beta = np.zeros(n)
        beta[pattern == 1] = zeta
        beta[pattern == 2] = -zeta
        free = np.flatnonzero(pattern >= 3)
        sign = np.where(pattern[free] == 3, 1.0, -1.0)
        if free.size:
            fixed = np.setdiff1d(np.arange(n), free)
            m = free.size
            sys_ = np.zeros((m + 1, m + 1))
            sys_[:m, :m] = kr[np.ix_(free, free)]
            sys_[:m, m] = 1.0
            sys_[m, :m] = 1.0
            rhs = np.r_[f[free] - epsilon * sign - kr[np.ix_(free, fixed)] @ beta[fixed], -beta[fixed].sum()]
            try:
                sol = np.linalg.solve(sys_, rhs)
            except np.linalg.LinAlgError:
                continue
            beta[free] = sol[:m]
            if np.any(sign * beta[free] < 0) or np.any(np.abs(beta[free]) > zeta):
                continue
        if abs(beta.sum()) > 1e-9:
            continue
        value = dual_objective(kmat, beta, f, epsilon)
        if best is None or value < best[0]:
            best = (value, beta)
    return best


class TestTrain:
    def test_single_point(self):
        model = train_svr(PolynomialKernel(), [0.7], [2.5], 0.1, 1.0)
        np.testing.assert_array_equal(model.dual_diffs, [0.0])
        assert model.bias == 2.5
        assert model(np.array([-3.0, 0.0, 9.0])).tolist() == [2.5, 2.5, 2.5]

    def test_values_inside_band(self):
        x = np.linspace(0.1, 2, 8)
        f = 1.0 + 0.04 * np.sin(5 * x)
        model = train_svr(PolynomialKernel(), x, f, 0.05, 1.0)
        np.testing.assert_array_equal(model.dual_diffs, 0.0)
        assert model.support_index_set == ()
        assert np.all(np.abs(model(x) - f) <= 0.05)

    def test_linear_toy_matches_oracle(self):
        x = np.array([0.0, 1.0, 2.0, 3.0])
        f = np.array([0.1, 1.3, 1.8, 3.4])
        model = train_svr(LINEAR, x, f, 0.1, 1.0)
        kmat = gram(LINEAR, x, x)
        value, beta = brute_force_dual(kmat, f, 0.1, 1.0)
        assert dual_objective(kmat, model.dual_diffs, f, 0.1) == pytest.approx(value, abs=1e-4)
        np.testing.assert_allclose(kmat @ model.dual_diffs, kmat @ beta, atol=1e-4)

    def test_feasibility(self):
        rng = np.random.default_rng(4)
        x = np.sort(rng.uniform(0.1, 2, 30))
        f = np.arctan(20 / x) + 1e-3 * rng.standard_normal(30)
        model = train_svr(PolynomialKernel(), x, f, 1e-3, 1.0)
        assert abs(model.dual_diffs.sum()) <= 1e-8
        assert np.all(np.abs(model.dual_diffs) <= 1.0)
        assert np.all(model.alpha * model.alpha_star == 0)
        np.testing.assert_array_equal(model.alpha_star - model.alpha, model.dual_diffs)

    def test_free_vector_sits_on_tube_edge(self):
        x = np.linspace(0.1, 2, 12)
        f = np.sin(3 * x)
        model = train_svr(PolynomialKernel(), x, f, 0.05, 10.0)
        beta = model.dual_diffs
        upper = np.flatnonzero((beta > 1e-9) & (beta < 10.0 - 1e-9))
        lower = np.flatnonzero((beta < -1e-9) & (beta > -10.0 + 1e-9))
        assert upper.size + lower.size > 0
        for i in upper:
            assert model(x[i]) == pytest.approx(f[i] - 0.05, abs=1e-5)
        for i in lower:
            assert model(x[i]) == pytest.approx(f[i] + 0.05, abs=1e-5)

    def test_phs_kernel_option(self):
        x = np.linspace(0.1, 2, 6)
        model = train_svr(CUBIC, x, x**2, 0.01, 1.0)
        assert model.kernel == CUBIC
        assert abs(model.dual_diffs.sum()) <= 1e-8

    def test_iteration_cap_flags_model(self):
        x = np.linspace(0.1, 2, 20)
        model = train_svr(PolynomialKernel(), x, np.sin(4 * x), 1e-4, 100.0, max_iter=5)
        assert not model.converged and model.iterations == 5 and model.gap >= 1e-6

    def test_errors(self):
        with pytest.raises(DomainError):
            train_svr(LINEAR, [0.0, 1.0], [1.0, 2.0], -0.1, 1.0)
        with pytest.raises(DomainError):
            train_svr(LINEAR, [0.0, 1.0], [1.0, 2.0], 0.1, 0.0)
        with pytest.raises(ShapeError):
            train_svr(LINEAR, [0.0, 1.0], [1.0], 0.1, 1.0)
        with pytest.raises(DomainError):
            PolynomialKernel(degree=0)


class TestPredict:
    def test_zero_duals_give_bias(self):
        model = train_svr(LINEAR, [0.0, 1.0, 2.0], [1.0, 1.0, 1.0], 0.1, 1.0)
        np.testing.assert_array_equal(model(np.linspace(-5, 5, 7)), model.bias)
        assert model.bias == 1.0

    def test_direct_summation(self):
        x = np.linspace(0.1, 2, 7)
        model = train_svr(PolynomialKernel(), x, np.cos(x), 0.01, 1.0)
        for t in (-0.5, 0.33, 1.7, 2.9):
            total = sum(b * (1.0 + t * xi) ** 3 for b, xi in zip(model.dual_diffs, x)) + model.bias
            assert predict_svr(model, t) == pytest.approx(total, rel=1e-12, abs=1e-12)

    def test_scalar_and_vector(self):
        model = train_svr(LINEAR, [0.0, 1.0, 2.0], [0.0, 1.0, 2.0], 0.0, 10.0)
        assert isinstance(predict_svr(model, 0.5), float)
        assert predict_svr(model, np.array([0.5, 1.5])).shape == (2,)


class TestCrossValidate:
    x = np.linspace(0.1, 2, 12)

    def test_single_pair(self):
        assert cross_validate(self.x, np.sin(self.x), epsilons=[0.01], zetas=[1.0]) == (0.01, 1.0)

    def test_linear_data(self):
        f = 2 * self.x - 1
        eps, zeta = cross_validate(self.x, f, kernel=LINEAR, epsilons=[0.0, 0.1], zetas=[0.01, 1e3])
        model = train_svr(LINEAR, self.x, f, eps, zeta)
        t = np.linspace(0.1, 2, 50)
        assert np.sqrt(np.mean((model(t) - (2 * t - 1)) ** 2)) <= 1e-3

    def test_tie_rule(self):
        # constant data are reproduced exactly by every pair
        (eps, zeta), scores = cross_validate(
            self.x, np.full(12, 3.0), epsilons=[0.1, 0.01], zetas=[10.0, 1.0], return_scores=True
        )
        assert len(set(scores.values())) == 1
        assert (eps, zeta) == (0.01, 1.0)

    def test_parallel_matches_serial(self):
        f = np.exp(-self.x)
        kw = dict(epsilons=[1e-3, 1e-2], zetas=[0.1, 1.0], return_scores=True)
        assert cross_validate(self.x, f, jobs=3, **kw) == cross_validate(self.x, f, **kw)

    def test_unsorted_input(self):
        rng = np.random.default_rng(0)
        perm = rng.permutation(12)
        f = np.sin(self.x)
        kw = dict(epsilons=[1e-3, 1e-1], zetas=[0.1, 10.0])
        assert cross_validate(self.x[perm], f[perm], **kw) == cross_validate(self.x, f, **kw)

    def test_errors(self):
        with pytest.raises(ConfigError):
            cross_validate([0.1, 0.2], [1.0, 2.0])
        with pytest.raises(ConfigError):
            cross_validate(np.linspace(0, 1, 5), np.zeros(5))
        with pytest.raises(ConfigError):
            cross_validate(self.x, self.x, folds=1)
        with pytest.raises(ConfigError):
            cross_validate(self.x, self.x, epsilons=[])
        with pytest.raises(ShapeError):
            cross_validate(self.x, self.x[:-1])


problems = st.integers(1, 5).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(0.1, 2.0), min_size=n, max_size=n, unique=True),
        st.lists(st.floats(-2.0, 2.0), min_size=n, max_size=n),
        st.sampled_from([0.0, 1e-3, 0.1, 0.5]),
        st.sampled_from([0.01, 0.1, 1.0, 10.0]),
        st.sampled_from([LINEAR, PolynomialKernel(degree=2), PolynomialKernel()]),
    )
)


@settings(max_examples=60, deadline=None)
@given(problems)
def test_oracle_equivalence(problem):
    xs, fs, eps, zeta, kernel = problem
    x = np.array(xs)
    f = np.array(fs)
    model = train_svr(kernel, x, f, eps, zeta)
    kmat = gram(kernel, x, x)
    value, _ = brute_force_dual(kmat, f, eps, zeta)
    ours = dual_objective(kmat, model.dual_diffs, f, eps)
    assert ours == pytest.approx(value, abs=1e-4 * max(1.0, abs(value)))


@settings(max_examples=60, deadline=None)
@given(problems)
def test_kkt_consistency(problem):
    xs, fs, eps, zeta, kernel = problem
    x = np.array(xs)
    f = np.array(fs)
    model = train_svr(kernel, x, f, eps, zeta)
    beta = model.dual_diffs
    assert abs(beta.sum()) <= 1e-8
    assert np.all(np.abs(beta) <= zeta)
    resid = f - model(x)
    inside = np.abs(resid) < eps - 1e-6
    assert np.all(beta[inside] == 0)
    free = (np.abs(beta) > 1e-9 * zeta) & (np.abs(beta) < zeta * (1 - 1e-9))
    np.testing.assert_allclose(np.abs(resid[free]), eps, atol=1e-4)
