"""Triangle-window band machinery: decomposition, summable-spectrum norms,
spectrum estimation, and the smoothness membership criterion.

The window family phi_a has Fourier transform the unit triangle centered
at a; integer translates tile the line (sum_n phi_hat_n == 1), so the band
components phi_n * x reassemble x exactly.  The summable-spectrum norm is

    ||x||_as = 5 * sum_n ||phi_n * x||_sup,

with the factor 5 making the norm submultiplicative for scalar products;
the integral variant ||x||_as~ = integral ||phi_a * x|| da satisfies
||x||_as~ <= ||x||_as <= 20 ||x||_as~.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ResolutionError
from .grid import (SampledFunction, ScalarKernel, modulus_of_continuity,
                   pointwise_norms, sup_norm)


def fejer_hat(a: float, lam) -> float | np.ndarray:
    """Triangle multiplier max(0, 1 - |lambda - a|)."""
    lam = np.asarray(lam, dtype=float)
    out = np.maximum(0.0, 1.0 - np.abs(lam - a))
    return out if out.shape else float(out)


@dataclass(frozen=True)
class FejerWindow:
    """Band window centered at `a`: triangle transform, sinc^2-type kernel."""

    a: float = 0.0

    def hat(self, lam):
        return fejer_hat(self.a, lam)

    def time(self, t):
        """phi_a(t) = exp(i a t) (1 - cos t) / (pi t^2), value 1/(2 pi) at 0."""
        t = np.asarray(t, dtype=float)
        # series branch: (1-cos t)/t^2 cancels catastrophically near zero
        with np.errstate(divide="ignore", invalid="ignore"):
            base = np.where(np.abs(t) < 1e-3,
                            1.0 / (2.0 * np.pi) - t * t / (24.0 * np.pi),
                            (1.0 - np.cos(t)) / (np.pi * t * t))
        out = np.exp(1j * self.a * t) * base
        return out if out.shape else complex(out)

    def kernel(self) -> ScalarKernel:
        """As a convolution kernel; integral |phi_a| = 1 exactly."""
        return ScalarKernel(f"fejer({self.a})", lambda lam: fejer_hat(self.a, lam), 1.0)


def fejer_kernel(a: float = 0.0) -> ScalarKernel:
    return FejerWindow(a).kernel()


def band_filter(x: SampledFunction, a: float) -> SampledFunction:
    """Band component phi_a * x via the exact triangle multiplier.

    ||phi_a * x||_sup <= ||x||_sup since the window has unit mass.
    """
    mult = fejer_hat(a, x.grid.frequencies)
    return x.with_coefficients(mult[:, None] * x.coefficients)


def band_range(grid) -> int:
    """Largest window center tracked: ceil(Nyquist) + 1."""
    return int(np.ceil(grid.nyquist)) + 1


@dataclass
class BandDecomposition:
    """Band components phi_n * x over the active center range.

    `entries` holds (n, component, sup norm) for every center with a
    nonzero component; `norms` records the sup norm for all centers in
    [-n_max, n_max] (zero bands carry no stored component).  The entries
    reassemble the source exactly by the window tiling.
    """

    source: SampledFunction
    n_max: int
    norms: dict = field(default_factory=dict)
    entries: list = field(default_factory=list)

    def component(self, n: int) -> SampledFunction:
        for k, comp, _ in self.entries:
            if k == n:
                return comp
        return band_filter(self.source, float(n))


def decompose_bands(x: SampledFunction, keep_components: bool = True) -> BandDecomposition:
    """All band components phi_n * x, n in [-n_max, n_max], ascending n.

    With keep_components=False only the per-band sup norms are stored
    (components re-filter on demand), which keeps long decompositions of
    roundoff-contaminated inputs cheap.
    """
    n_max = band_range(x.grid)
    dec = BandDecomposition(source=x, n_max=n_max)
    coeffs = x.coefficients
    lam = x.grid.frequencies
    g = x.grid
    for n in range(-n_max, n_max + 1):
        mult = fejer_hat(float(n), lam)
        banded = mult[:, None] * coeffs
        if not banded.any():
            dec.norms[n] = 0.0
            continue
        values = np.fft.ifft(banded * g._sign[:, None] / g.h, axis=0)
        nrm = float(np.linalg.norm(values, axis=1).max())
        dec.norms[n] = nrm
        if keep_components:
            comp = SampledFunction(g, values, exact_lattice=x.exact_lattice,
                                   _freq=banded)
            dec.entries.append((n, comp, nrm))
    return dec


def as_norm(x: SampledFunction):
    """Summable-spectrum norm 5 * sum_n ||phi_n * x||_sup.

    Returns (value, decomposition); the decomposition carries per-band
    norms and re-filters components on demand.
    """
    dec = decompose_bands(x, keep_components=False)
    value = 5.0 * sum(dec.norms[n] for n in range(-dec.n_max, dec.n_max + 1))
    return float(value), dec


def as_norm_value(x: SampledFunction) -> float:
    return as_norm(x)[0]


def as_tilde_norm(x: SampledFunction, da: float = 0.125) -> float:
    """Integral norm: trapezoid of a -> ||phi_a * x||_sup over the active range.

    `da` must divide 1 so integer centers (where the integrand kinks for
    integer-frequency inputs) land on quadrature nodes.
    """
    if da > 0.125 + 1e-12:
        raise ParameterError(f"center step da must be at most 1/8, got {da}")
    steps_per_unit = round(1.0 / da)
    if abs(steps_per_unit * da - 1.0) > 1e-12:
        raise ParameterError(f"center step da must divide 1, got {da}")
    coeffs = x.coefficients
    lam = x.grid.frequencies
    mags = np.linalg.norm(coeffs, axis=1)
    active = np.nonzero(mags > 0.0)[0]
    if len(active) == 0:
        return 0.0
    lo = int(np.floor(lam[active].min())) - 1
    hi = int(np.ceil(lam[active].max())) + 1
    centers = lo + np.arange(round((hi - lo) / da) + 1) * da
    values = np.empty(len(centers))
    for i, a in enumerate(centers):
        mult = fejer_hat(float(a), lam)
        banded = mult[:, None] * coeffs
        values[i] = sup_norm(x.with_coefficients(banded))
    return float(np.trapezoid(values, dx=da))


@dataclass(frozen=True)
class SpectrumEstimate:
    """Thresholded frequency support of a sampled function.

    Exact (the set of term frequencies) for lattice trigonometric
    polynomials.  Frequencies are sorted ascending; ties at the threshold
    are included.
    """

    frequencies: tuple
    threshold: float
    peak: float

    def __contains__(self, freq):
        return any(abs(f - freq) < 1e-12 for f in self.frequencies)

    def within(self, lo: float, hi: float) -> bool:
        return all(lo - 1e-12 <= f <= hi + 1e-12 for f in self.frequencies)


def beurling_spectrum(x: SampledFunction, threshold: float = 1e-9) -> SpectrumEstimate:
    """Frequency support: lattice bins with |x_hat| >= threshold * max |x_hat|."""
    if not 0.0 < threshold < 1.0:
        raise ParameterError(f"threshold must lie in (0, 1), got {threshold}")
    mags = np.linalg.norm(x.coefficients, axis=1)
    peak = float(mags.max())
    if peak == 0.0:
        return SpectrumEstimate(frequencies=(), threshold=threshold, peak=0.0)
    keep = mags >= threshold * peak
    freqs = np.sort(x.grid.frequencies[keep])
    return SpectrumEstimate(frequencies=tuple(float(f) for f in freqs),
                            threshold=threshold, peak=peak)


def spectral_derivative(x: SampledFunction) -> SampledFunction:
    """d/dt on the frequency lattice: multiply x_hat by i*lambda."""
    mult = 1j * x.grid.frequencies
    return x.with_coefficients(mult[:, None] * x.coefficients)


@dataclass(frozen=True)
class MembershipReport:
    """Partial sums of sum_k omega_y(1/k)/k with a boundedness verdict."""

    partial_sums: tuple
    terms: tuple
    verdict: str

    @property
    def bounded(self) -> bool:
        return self.verdict == "bounded"


def as_membership_criterion(x: SampledFunction, k_max: int) -> MembershipReport:
    """Summability test for the derivative's modulus of continuity.

    Accumulates omega_y(1/k)/k for k = 1..k_max with y the spectral
    derivative of x and shifts rounded to grid multiples; convergent sums
    certify membership in the summable-spectrum class.  The verdict
    compares the average term of the last quartile against the previous
    quartile: decay faster than 1/k marks the sum bounded.
    """
    g = x.grid
    if k_max > g.m:
        raise ResolutionError(
            f"k_max={k_max} exceeds the grid resolution limit m={g.m}")
    if k_max < 8:
        raise ParameterError("need k_max >= 8 for a quartile verdict")
    y = spectral_derivative(x)
    terms = []
    for k in range(1, k_max + 1):
        shift = max(1, round(1.0 / (k * g.h))) * g.h
        terms.append(modulus_of_continuity(y, shift) / k)
    terms = np.array(terms)
    partial = np.cumsum(terms)
    # terms ~ k^(-p) have quartile-mean ratio base^p with base the mean-k
    # ratio; p = 1 is the divergence boundary, so demand a 10% margin below
    ks = np.arange(1, k_max + 1, dtype=float)
    third = slice(k_max // 2, 3 * k_max // 4)
    fourth = slice(3 * k_max // 4, k_max)
    base = ks[third].mean() / ks[fourth].mean()
    verdict = ("bounded"
               if terms[fourth].mean() <= 0.9 * base * terms[third].mean() + 1e-15
               else "growing")
    return MembershipReport(partial_sums=tuple(partial), terms=tuple(terms),
                            verdict=verdict)
