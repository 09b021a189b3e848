import numpy as np
import pytest

from dichotomy import (FejerWindow, as_membership_criterion, as_norm,
                       as_norm_value, as_tilde_norm, band_filter,
                       beurling_spectrum, build_sampled_function,
                       decompose_bands, fejer_hat, modulate, sup_norm)
from dichotomy.errors import ParameterError, ResolutionError

from util import DEFAULT_GRID as GRID
from util import random_trig_poly


def harmonic(freq, coeff):
    return build_sampled_function(GRID, [(freq, coeff)])


def scalar_poly(rng, n_terms=6, max_freq=8.0):
    return random_trig_poly(rng, GRID, dim=1, n_terms=n_terms, max_freq=max_freq)


class TestWindow:
    @pytest.mark.parametrize("a,lam,expected", [
        (0.0, 0.0, 1.0),    # peak value of the triangle
        (3.0, 4.0, 0.0),    # support edge
        (3.0, 3.5, 0.5),    # linear ramp
    ])
    def test_hat_values(self, a, lam, expected):
        assert fejer_hat(a, lam) == expected

    def test_time_kernel_peak(self):
        w = FejerWindow(0.0)
        assert w.time(0.0) == pytest.approx(1.0 / (2 * np.pi), rel=1e-12)
        assert w.time(1e-6) == pytest.approx(1.0 / (2 * np.pi), rel=1e-9)

    def test_time_kernel_integrates_to_one(self):
        # quadrature over [-T, T] plus the analytic 2/(pi T) tail correction
        w = FejerWindow(0.0)
        T = 1000.0
        nodes, weights = np.polynomial.legendre.leggauss(12)
        total = 0.0
        edges = np.linspace(-T, T, 4001)
        for a, b in zip(edges[:-1], edges[1:]):
            ts = (a + b) / 2 + (b - a) / 2 * nodes
            total += (b - a) / 2 * (weights * w.time(ts).real).sum()
        tail = (2 / np.pi) * (1 / T + np.sin(T) / T ** 2)
        assert total + tail == pytest.approx(1.0, abs=1e-8)

    def test_partition_of_unity_is_exact(self):
        lams = np.linspace(-20, 20, 40001)
        total = sum(fejer_hat(n, lams) for n in range(-22, 23))
        assert np.abs(total - 1.0).max() <= 1e-15


class TestBandFilter:
    def test_in_band_harmonic_passes(self):
        x = harmonic(2.0, [1.0, -1.0])
        assert np.abs(band_filter(x, 2.0).values - x.values).max() <= 1e-13

    def test_out_of_band_harmonic_dies(self):
        x = harmonic(2.0, [1.0])
        assert sup_norm(band_filter(x, 3.0)) <= 1e-15

    def test_ramp_halves_midpoint(self):
        x = harmonic(2.5, [2.0])
        got = band_filter(x, 2.0)
        assert np.abs(got.values - 0.5 * x.values).max() <= 1e-13

    def test_support_inclusion(self):
        rng = np.random.default_rng(51)
        for _ in range(10):
            x = scalar_poly(rng)
            a = float(rng.uniform(-6, 6))
            spec = beurling_spectrum(band_filter(x, a))
            source = set(beurling_spectrum(x).frequencies)
            for f in spec.frequencies:
                assert a - 1 <= f <= a + 1
                assert f in source


class TestSummableNorms:
    def test_zero(self):
        zero = build_sampled_function(GRID, [(0.0, [0.0])])
        assert as_norm_value(zero) == 0.0
        assert as_tilde_norm(zero) == 0.0

    def test_unit_harmonic_band_sum(self):
        assert as_norm_value(harmonic(2.0, [1.0])) == pytest.approx(5.0, abs=1e-12)

    def test_split_harmonic_band_sum(self):
        # frequency 2.5 contributes half to each neighbor band
        assert as_norm_value(harmonic(2.5, [1.0])) == pytest.approx(5.0, abs=1e-12)

    def test_unit_harmonic_integral_norm(self):
        assert as_tilde_norm(harmonic(2.0, [1.0])) == pytest.approx(1.0, abs=1e-9)

    def test_norm_equivalence_seeded(self):
        rng = np.random.default_rng(52)
        for _ in range(50):
            d = int(rng.integers(1, 5))
            x = random_trig_poly(rng, GRID, d, n_terms=int(rng.integers(1, 13)),
                                 max_freq=10.0)
            tilde = as_tilde_norm(x)
            value = as_norm_value(x)
            assert tilde <= value + 1e-6
            assert value <= 20.0 * tilde + 1e-6

    def test_scalar_product_submultiplicative(self):
        from dichotomy.grid import SampledFunction
        rng = np.random.default_rng(53)
        for _ in range(50):
            x = scalar_poly(rng, n_terms=int(rng.integers(1, 7)), max_freq=10.0)
            y = scalar_poly(rng, n_terms=int(rng.integers(1, 7)), max_freq=10.0)
            xy = SampledFunction(GRID, x.values * y.values)
            assert (as_norm_value(xy)
                    <= as_norm_value(x) * as_norm_value(y) + 1e-6)

    def test_modulation_relabels_bands(self):
        rng = np.random.default_rng(54)
        x = scalar_poly(rng, n_terms=4, max_freq=5.0)
        assert as_norm_value(modulate(x, 3.0)) == pytest.approx(
            as_norm_value(x), rel=1e-12)

    def test_band_norm_bounded_by_continuity_modulus(self):
        # k ||phi_k * x|| / omega_x(1/k) stays bounded per instance; use
        # instances with mass in every probed band so the median is sound
        from dichotomy import modulus_of_continuity
        rng = np.random.default_rng(55)
        for _ in range(5):
            terms = [(k + 0.25, [complex(*rng.standard_normal(2))])
                     for k in range(2, 10)]
            x = build_sampled_function(GRID, terms)
            ratios = []
            for k in range(2, 13):
                shift = max(1, round(1.0 / (k * GRID.h))) * GRID.h
                omega = modulus_of_continuity(x, shift)
                value = sup_norm(band_filter(x, float(k)))
                if omega > 0 and value > 0:
                    ratios.append(k * value / omega)
            ratios = np.array(ratios)
            assert len(ratios) >= 5
            assert ratios.max() <= 10.0 * np.median(ratios)

    def test_tilde_rejects_coarse_step(self):
        with pytest.raises(ParameterError):
            as_tilde_norm(harmonic(1.0, [1.0]), da=0.5)


class TestDecomposition:
    def test_components_reassemble(self):
        rng = np.random.default_rng(56)
        x = random_trig_poly(rng, GRID, 2, n_terms=6, max_freq=8.0)
        dec = decompose_bands(x)
        total = np.zeros_like(x.values)
        for _, comp, _ in dec.entries:
            total += comp.values
        assert np.abs(total - x.values).max() <= 1e-9 * max(1, sup_norm(x))

    def test_component_spectra_nested(self):
        rng = np.random.default_rng(57)
        x = random_trig_poly(rng, GRID, 1, n_terms=5, max_freq=6.0)
        dec = decompose_bands(x)
        for n, comp, _ in dec.entries:
            for f in beurling_spectrum(comp).frequencies:
                assert n - 1 <= f <= n + 1

    def test_as_norm_matches_decomposition(self):
        rng = np.random.default_rng(58)
        x = random_trig_poly(rng, GRID, 1, n_terms=4)
        value, dec = as_norm(x)
        assert value == pytest.approx(5.0 * sum(dec.norms.values()), rel=1e-12)


class TestBeurlingSpectrum:
    def test_single_harmonic(self):
        assert beurling_spectrum(harmonic(2.0, [1.0])).frequencies == (2.0,)

    def test_two_harmonics(self):
        x = build_sampled_function(GRID, [(1.0, [1.0]), (2.0, [0.5])])
        assert beurling_spectrum(x).frequencies == (1.0, 2.0)

    def test_product_lands_in_sumset(self):
        from dichotomy.grid import SampledFunction
        x = harmonic(1.0, [1.0])
        y = harmonic(2.0, [1.0])
        xy = SampledFunction(GRID, x.values * y.values)
        assert beurling_spectrum(xy).frequencies == (3.0,)

    def test_exactness_for_lattice_polynomials(self):
        rng = np.random.default_rng(59)
        for _ in range(5):
            span = int(6 * GRID.m)
            ks = rng.choice(np.arange(-span, span), size=4, replace=False)
            x = build_sampled_function(
                GRID, [(k / GRID.m, [1.0 + 0.1 * abs(k)]) for k in ks])
            got = beurling_spectrum(x).frequencies
            assert got == tuple(sorted(k / GRID.m for k in ks))

    def test_threshold_domain(self):
        with pytest.raises(ParameterError):
            beurling_spectrum(harmonic(1.0, [1.0]), threshold=2.0)


class TestMembershipCriterion:
    def test_harmonic_is_bounded(self):
        report = as_membership_criterion(harmonic(2.0, [1.0]), k_max=16)
        assert report.verdict == "bounded"
        # terms behave like 2/k^2: partial sums settle
        assert report.partial_sums[-1] - report.partial_sums[-4] <= 0.1

    def test_constant_gives_zero_terms(self):
        report = as_membership_criterion(
            build_sampled_function(GRID, [(0.0, [3.0])]), k_max=8)
        assert all(t == 0.0 for t in report.terms)
        assert report.verdict == "bounded"

    def test_lacunary_smooth_instance_bounded(self):
        # derivative has a Holder-1/2 envelope: sum_k omega(1/k)/k converges
        terms = [(2.0 ** j, [2.0 ** (-1.5 * j)]) for j in range(0, 7)]
        x = build_sampled_function(GRID, terms)
        report = as_membership_criterion(x, k_max=16)
        assert report.verdict == "bounded"

    def test_saturated_modulus_reads_growing(self):
        # derivative modulus saturates at every probed shift, so the terms
        # sit exactly on the 1/k divergence boundary
        report = as_membership_criterion(harmonic(100.0, [1.0]), k_max=16)
        assert report.verdict == "growing"

    def test_resolution_limit(self):
        with pytest.raises(ResolutionError):
            as_membership_criterion(harmonic(1.0, [1.0]), k_max=GRID.m + 1)
