import numpy as np
import pytest

from dichotomy import (GeneratorModel, PolynomialNonlinearity,
                       apply_nonlinearity, as_norm_value, beurling_spectrum,
                       build_sampled_function, lipschitz_bound, mild_residual,
                       picard_solve, residual_pairs, resolvent_bound, sup_norm)
from dichotomy.errors import ParameterError, ResolutionError
from dichotomy.green import conditioning_span_cap

from util import DEFAULT_GRID as GRID

QUAD = PolynomialNonlinearity([np.zeros((1, 1)), 0.01 * np.ones((1, 1, 1))])


def cosine_rhs(scale):
    return build_sampled_function(
        GRID, [(1.0, [scale / 2]), (-1.0, [scale / 2])])


class TestPolynomialNonlinearity:
    def test_norm_estimates_scalar(self):
        assert QUAD.term_norms[0] == 0.0
        assert QUAD.term_norms[1] == pytest.approx(0.01, rel=1e-9)

    def test_linear_term_norm_matches_spectral_norm(self):
        rng = np.random.default_rng(71)
        a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        nl = PolynomialNonlinearity([a])
        assert nl.term_norms[0] == pytest.approx(np.linalg.norm(a, 2), rel=1e-6)

    def test_symmetry_enforced(self):
        bad = np.zeros((2, 2, 2))
        bad[0, 0, 1] = 1.0  # asymmetric in the input slots
        with pytest.raises(ParameterError):
            PolynomialNonlinearity([np.zeros((2, 2)), bad])

    def test_apply_zero(self):
        zero = PolynomialNonlinearity.zero(dim=1)
        x = build_sampled_function(GRID, [(1.0, [1.0])])
        assert sup_norm(apply_nonlinearity(zero, x)) == 0.0

    def test_apply_quadratic_to_constant(self):
        x = build_sampled_function(GRID, [(0.0, [3.0])])
        out = apply_nonlinearity(QUAD, x)
        assert np.abs(out.values - 0.01 * 9.0).max() <= 1e-12

    def test_quadratic_doubles_frequency(self):
        x = build_sampled_function(GRID, [(1.0, [1.0])])
        out = apply_nonlinearity(QUAD, x)
        assert beurling_spectrum(out).frequencies == (2.0,)

    def test_vector_evaluation_matches_tensor_sum(self):
        rng = np.random.default_rng(72)
        t1 = rng.standard_normal((2, 2))
        t2 = rng.standard_normal((2, 2, 2))
        t2 = (t2 + t2.transpose(0, 2, 1)) / 2
        nl = PolynomialNonlinearity([t1, t2])
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        expected = t1 @ v + np.einsum("abc,b,c->a", t2, v, v)
        assert np.abs(nl.apply_vector(v) - expected).max() <= 1e-12


class TestLipschitzBound:
    def test_zero_nonlinearity(self):
        assert lipschitz_bound(PolynomialNonlinearity.zero(1), 1.0, 1.0) == 0.0

    def test_linear_term_value(self):
        nl = PolynomialNonlinearity([0.01 * np.eye(1)])
        expected = (18 / np.pi) * np.sqrt(10.0) * 0.01
        assert lipschitz_bound(nl, 1.0, 5.0) == pytest.approx(expected, rel=1e-6)

    def test_quadratic_term_value(self):
        expected = (18 / np.pi) * np.sqrt(10.0) * 2 * 0.01
        assert lipschitz_bound(QUAD, 1.0, 1.0) == pytest.approx(expected, rel=1e-6)

    def test_rejects_nonpositive_arguments(self):
        with pytest.raises(ParameterError):
            lipschitz_bound(QUAD, 0.0, 1.0)
        with pytest.raises(ParameterError):
            lipschitz_bound(QUAD, 1.0, -1.0)


class TestPicard:
    def test_zero_nonlinearity_converges_immediately(self):
        m = GeneratorModel([[-1.0]])
        report = picard_solve(m, cosine_rhs(1.0), PolynomialNonlinearity.zero(1),
                              beta=1.0)
        assert report.converged
        assert report.iterations == 1
        assert report.final_residual_as <= 1e-12
        assert np.abs(report.solution.values - report.linear_part.values).max() == 0.0

    def test_quadratic_scenario_certified(self):
        m = GeneratorModel([[-1.0]])
        y = cosine_rhs(0.25)
        report = picard_solve(m, y, QUAD, beta=1.0)
        assert report.hypotheses_hold
        assert report.converged
        assert report.final_residual_as <= 1e-8
        assert report.distance_to_linear_as <= report.beta + 1e-8
        assert report.lipschitz_empirical <= report.lipschitz_certificate + 1e-6

    def test_uniqueness_within_ball(self):
        m = GeneratorModel([[-1.0]])
        y = cosine_rhs(0.25)
        base = picard_solve(m, y, QUAD, beta=1.0)
        bump = build_sampled_function(GRID, [(2.0, [0.05]), (0.0, [0.02])])
        other = picard_solve(m, y, QUAD, beta=1.0,
                             initial=base.linear_part + bump)
        gap = as_norm_value(base.solution - other.solution)
        assert gap <= 1e-8

    def test_band_mode_agrees_with_green_mode(self):
        m = GeneratorModel([[-1.0]])
        y = cosine_rhs(0.25)
        green = picard_solve(m, y, QUAD, beta=1.0, mode="green")
        band = picard_solve(m, y, QUAD, beta=1.0, mode="band")
        gap = sup_norm(green.solution - band.solution)
        assert gap <= 1e-8

    def test_solution_satisfies_mild_identity_with_full_rhs(self):
        m = GeneratorModel([[-1.0]])
        y = cosine_rhs(0.25)
        report = picard_solve(m, y, QUAD, beta=1.0)
        x = report.solution
        rhs = y + apply_nonlinearity(QUAD, x)
        tol = 1e-6
        for s, t in residual_pairs(GRID, 13, span_cap=conditioning_span_cap(m)):
            assert mild_residual(m, x, rhs, s, t) <= tol

    def test_failed_certificate_still_iterates(self):
        # L >= 1 so no guarantee is claimed, yet the damped dynamics
        # converge; flags must say the hypotheses failed
        m = GeneratorModel([[-1.0]])
        strong = PolynomialNonlinearity([0.08 * np.eye(1)])
        msup = resolvent_bound(m).supremum
        assert lipschitz_bound(strong, msup, 1.0) >= 1.0
        report = picard_solve(m, cosine_rhs(0.25), strong, beta=1.0)
        assert not report.certificate_holds
        assert not report.hypotheses_hold
        assert report.converged

    def test_nyquist_guard(self):
        m = GeneratorModel([[-1.0]])
        cubic = PolynomialNonlinearity(
            [np.zeros((1, 1)), np.zeros((1, 1, 1)), 0.001 * np.ones((1, 1, 1, 1))])
        y_high = build_sampled_function(GRID, [(43.0, [0.1])])
        with pytest.raises(ResolutionError):
            picard_solve(m, y_high, cubic, beta=1.0)

    def test_rejects_bad_ball(self):
        m = GeneratorModel([[-1.0]])
        with pytest.raises(ParameterError):
            picard_solve(m, cosine_rhs(0.1), QUAD, beta=0.0)


class TestPicardReportInvariants:
    def test_steps_decrease_once_certified(self):
        m = GeneratorModel([[-1.0]])
        report = picard_solve(m, cosine_rhs(0.25), QUAD, beta=1.0)
        assert report.hypotheses_hold
        steps = report.step_as_norms
        assert all(b <= a for a, b in zip(steps, steps[1:]))

    def test_final_residual_within_ten_tolerances(self):
        m = GeneratorModel([[-1.0]])
        tol = 1e-9
        report = picard_solve(m, cosine_rhs(0.25), QUAD, beta=1.0, tol=tol)
        assert report.final_residual_as <= 10 * tol
