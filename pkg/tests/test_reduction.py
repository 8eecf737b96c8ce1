import numpy as np
import pytest
from scipy.linalg import eigvalsh

from tcheb import (
    Design,
    Interval,
    criterion_value,
    information_matrix,
    jacobi_spectrum,
    make_model,
    optimize_in_class,
    reduce_design,
    verify_domination,
)
from tcheb.errors import ConfigurationError, DegeneracyError, PreconditionError

MM_IV = (0.0, 10.0)


def mm():
    return make_model("michaelis_menten", [1.0, 1.0], MM_IV)


def uniform(points, interval):
    n = len(points)
    return Design(points=tuple(points), weights=(1.0 / n,) * n, interval=Interval(*interval))


class TestJacobi:
    def test_matches_lapack_on_random_symmetric(self):
        rng = np.random.default_rng(31)
        for n in (2, 3, 5, 8):
            for _ in range(5):
                B = rng.normal(size=(n, n))
                S = (B + B.T) / 2
                np.testing.assert_allclose(
                    jacobi_spectrum(S), eigvalsh(S), rtol=1e-10, atol=1e-10
                )

    def test_sorted_ascending(self):
        S = np.diag([3.0, -1.0, 2.0])
        np.testing.assert_allclose(jacobi_spectrum(S), [-1.0, 2.0, 3.0])

    def test_rejects_asymmetric(self):
        with pytest.raises(ConfigurationError):
            jacobi_spectrum(np.array([[1.0, 2.0], [0.0, 1.0]]))


class TestReduce:
    def test_identity_branch_low_index(self):
        # one interior point: index 1 < k/2 = 1.5
        xi = Design(points=(2.0,), weights=(1.0,), interval=Interval(*MM_IV))
        rep = reduce_design(mm(), [1.0, 1.0], xi, "upper")
        assert rep.branch == "Identity"
        assert rep.output is rep.input
        assert rep.output.points == xi.points
        assert rep.output.weights == xi.weights
        assert all(g == 0.0 for _, g in rep.q_checks)

    def test_mm_eight_point_upper(self):
        xi = uniform(range(1, 9), MM_IV)
        rep = reduce_design(mm(), [1.0, 1.0], xi, "upper")
        assert rep.branch == "OddCase"
        assert rep.input_index.value == 8
        assert rep.output.size <= 2
        assert 10.0 in rep.output.points
        np.testing.assert_allclose(
            rep.moments_out.coordinates, rep.moments_in.coordinates, rtol=1e-8, atol=1e-10
        )
        M = information_matrix(mm(), [1.0, 1.0], xi)
        norm = float(np.max(np.abs(eigvalsh(M))))
        assert rep.loewner_min_eigenvalue >= -1e-8 * max(1.0, norm)
        assert all(g >= -1e-9 for _, g in rep.q_checks)

    def test_mm_lower_refused(self):
        # the negated last function breaks the determinant condition here
        xi = uniform(range(1, 9), MM_IV)
        with pytest.raises(PreconditionError):
            reduce_design(mm(), [1.0, 1.0], xi, "lower")

    def test_exponential_lower_contains_a(self):
        theta = [1.0, -1.0]
        model = make_model("exponential", theta, (0.0, 3.0))
        xi = uniform(np.linspace(0.2, 2.8, 6), (0.0, 3.0))
        rep = reduce_design(model, theta, xi, "lower")
        assert rep.branch == "OddCase"
        # k = 3 odd: lower representation has 2 points including A
        assert rep.output.size <= 2
        assert 0.0 in rep.output.points
        assert all(g >= -1e-9 for _, g in rep.q_checks)
        dom = verify_domination(model, theta, rep.output, xi)
        assert dom.dominates

    def test_exponential3_upper_positive_rate(self):
        theta = [1.0, 1.0, 1.0]
        model = make_model("exponential3", theta, (0.0, 3.0))
        xi = uniform(np.linspace(0.0, 3.0, 7), (0.0, 3.0))
        rep = reduce_design(model, theta, xi, "upper")
        assert rep.branch == "OddCase"
        assert rep.output.size <= 3
        assert 3.0 in rep.output.points
        np.testing.assert_allclose(
            rep.moments_out.coordinates, rep.moments_in.coordinates, rtol=1e-8, atol=1e-10
        )

    def test_exponential3_lower_negative_rate(self):
        theta = [1.0, 1.0, -1.0]
        model = make_model("exponential3", theta, (0.0, 3.0))
        xi = uniform(np.linspace(0.0, 3.0, 7), (0.0, 3.0))
        rep = reduce_design(model, theta, xi, "lower")
        assert rep.branch == "OddCase"
        assert rep.output.size <= 3
        assert 0.0 in rep.output.points
        dom = verify_domination(model, theta, rep.output, xi)
        assert dom.dominates

    def test_exponential3_upper_negative_rate_refused(self):
        """With a negative rate the augmented determinants are negative, so
        the upper branch must fail its precondition."""
        theta = [1.0, 1.0, -1.0]
        model = make_model("exponential3", theta, (0.0, 3.0))
        xi = uniform(np.linspace(0.0, 3.0, 7), (0.0, 3.0))
        with pytest.raises(PreconditionError):
            reduce_design(model, theta, xi, "upper")

    def test_polynomial_lower_refused(self):
        """-x^{2d} cannot be the last function of a positive-determinant
        system, so the lower branch is never valid for the polynomial model."""
        theta = [0.0, 1.0, 1.0]
        model = make_model("polynomial", theta, (-1.0, 1.0))
        xi = uniform(np.linspace(-1.0, 1.0, 6), (-1.0, 1.0))
        with pytest.raises(PreconditionError):
            reduce_design(model, theta, xi, "lower")

    def test_polynomial_upper_even_case(self):
        theta = [0.0, 1.0, 1.0]
        model = make_model("polynomial", theta, (-1.0, 1.0))
        xi = uniform(np.linspace(-1.0, 1.0, 6), (-1.0, 1.0))
        rep = reduce_design(model, theta, xi, "upper")
        assert rep.branch == "EvenCase"
        # k = 4 even: at most (k+2)/2 = 3 points, both endpoints in support
        assert rep.output.size <= 3
        assert -1.0 in rep.output.points
        assert 1.0 in rep.output.points

    def test_idempotence(self):
        xi = uniform(range(1, 9), MM_IV)
        first = reduce_design(mm(), [1.0, 1.0], xi, "upper")
        second = reduce_design(mm(), [1.0, 1.0], first.output, "upper")
        np.testing.assert_allclose(second.output.points, first.output.points, atol=1e-8)
        np.testing.assert_allclose(second.output.weights, first.output.weights, atol=1e-8)

    def test_direction_validation(self):
        xi = uniform(range(1, 9), MM_IV)
        with pytest.raises(ConfigurationError):
            reduce_design(mm(), [1.0, 1.0], xi, "sideways")


class TestDomination:
    def test_identical_designs(self):
        xi = uniform(range(1, 9), MM_IV)
        rep = verify_domination(mm(), [1.0, 1.0], xi, xi)
        assert rep.dominates
        np.testing.assert_allclose(rep.difference_spectrum, 0.0, atol=1e-15)

    def test_reduction_output_dominates_input(self):
        xi = uniform(range(1, 9), MM_IV)
        red = reduce_design(mm(), [1.0, 1.0], xi, "upper")
        rep = verify_domination(mm(), [1.0, 1.0], red.output, xi)
        assert rep.dominates

    def test_rank_one_cannot_dominate(self):
        one = Design(points=(5.0,), weights=(1.0,), interval=Interval(*MM_IV))
        two = uniform([2.0, 8.0], MM_IV)
        rep = verify_domination(mm(), [1.0, 1.0], one, two)
        assert not rep.dominates

    def test_spectrum_is_sorted(self):
        xi = uniform(range(1, 9), MM_IV)
        red = reduce_design(mm(), [1.0, 1.0], xi, "upper")
        spec = red.difference_spectrum
        assert list(spec) == sorted(spec)


class TestOptimize:
    def test_mm_d_optimal(self):
        best = optimize_in_class(mm(), [1.0, 1.0], criterion="d", direction="upper")
        assert best.size == 2
        assert best.points[1] == pytest.approx(10.0)
        # classical result: interior point at B/(2 theta2/1 + ...) = 5/6 here
        assert best.points[0] == pytest.approx(10.0 / 12.0, abs=1e-4)
        assert best.weights == pytest.approx((0.5, 0.5), abs=1e-4)

    def test_linear_model_d_optimal(self):
        model = make_model("polynomial", [0.0, 1.0], (-1.0, 1.0))
        best = optimize_in_class(model, [0.0, 1.0], criterion="d", direction="upper")
        assert best.points == pytest.approx((-1.0, 1.0))
        assert best.weights == pytest.approx((0.5, 0.5), abs=1e-6)

    def test_exponential_negative_rate_class_optimum(self):
        theta = [1.0, -1.0]
        model = make_model("exponential", theta, (0.0, 3.0))
        best = optimize_in_class(model, theta, criterion="d", direction="upper")
        assert best.size == 2
        assert best.points[1] == pytest.approx(3.0)

    def test_a_criterion_runs(self):
        best = optimize_in_class(mm(), [1.0, 1.0], criterion="a", direction="upper", restarts=6)
        assert best.size == 2
        assert best.points[1] == pytest.approx(10.0)
        assert criterion_value(mm(), [1.0, 1.0], best, "a") > -np.inf

    def test_deterministic_in_seed(self):
        a = optimize_in_class(mm(), [1.0, 1.0], criterion="d", direction="upper", restarts=4, seed=9)
        b = optimize_in_class(mm(), [1.0, 1.0], criterion="d", direction="upper", restarts=4, seed=9)
        assert a.points == b.points
        assert a.weights == b.weights

    def test_optimum_not_improvable_by_reduction(self):
        best = optimize_in_class(mm(), [1.0, 1.0], criterion="d", direction="upper")
        rep = reduce_design(mm(), [1.0, 1.0], best, "upper")
        v0 = criterion_value(mm(), [1.0, 1.0], best, "d")
        v1 = criterion_value(mm(), [1.0, 1.0], rep.output, "d")
        assert abs(v1 - v0) <= 1e-6 * max(1.0, abs(v0))

    def test_lower_even_class_degenerate(self):
        """The lower class for the quadratic model has k/2 = 2 support
        points for p = 3 parameters; every information matrix in the class
        is singular."""
        theta = [0.0, 1.0, 1.0]
        model = make_model("polynomial", theta, (-1.0, 1.0))
        with pytest.raises(DegeneracyError):
            optimize_in_class(model, theta, criterion="d", direction="lower", restarts=3)
