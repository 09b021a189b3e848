"""Uniform periodic time grid and sampled vector-valued functions.

Functions on the whole line are modeled on one period [-L/2, L/2) with
L = 2*pi*m, so integer frequencies sit exactly on the frequency lattice
lambda_k = k/m and triangle windows act as exact multipliers.  The Fourier
convention matches the continuous transform

    x_hat(lambda) = integral x(t) exp(-i*lambda*t) dt,

realized on the grid as x_hat(lambda_k) = h * sum_j x(t_j) exp(-i*lambda_k*t_j)
with inverse x(t_j) = (1/L) * sum_k x_hat(lambda_k) exp(i*lambda_k*t_j).
"""

from __future__ import annotations

import numpy as np

from .errors import LatticeError, NyquistError, ParameterError

_LATTICE_TOL = 1e-9


class TimeGrid:
    """Uniform grid of N points on one period of length L = 2*pi*m.

    Parameters
    ----------
    m : int
        Period multiplier, L = 2*pi*m.  Integer frequencies are lattice
        points exactly.
    n : int
        Sample count, a power of two.

    Attributes
    ----------
    h : float
        Step size L/N.
    times : ndarray
        Sample times t_j = j*h - L/2, j = 0..N-1.
    frequencies : ndarray
        Lattice frequencies k/m in FFT (native) order.
    """

    __slots__ = ("m", "n", "length", "h", "times", "kappa", "frequencies",
                 "_sign", "_nyquist")

    def __init__(self, m: int = 16, n: int = 4096):
        if m < 1 or int(m) != m:
            raise ParameterError(f"period multiplier m must be a positive integer, got {m}")
        if n < 2 or (n & (n - 1)) != 0:
            raise ParameterError(f"sample count must be a power of two >= 2, got {n}")
        self.m = int(m)
        self.n = int(n)
        self.length = 2.0 * np.pi * self.m
        self.h = self.length / self.n
        self.times = np.arange(self.n) * self.h - self.length / 2.0
        self.times.setflags(write=False)
        # integer frequency indices kappa and frequencies kappa/m, native FFT order
        self.kappa = np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.int64)
        self.kappa.setflags(write=False)
        self.frequencies = self.kappa / self.m
        self.frequencies.setflags(write=False)
        # exp(-i*lambda_k*t_j) carries a (-1)^kappa phase relative to the raw DFT
        self._sign = np.where(self.kappa % 2 == 0, 1.0, -1.0)
        self._sign.setflags(write=False)
        self._nyquist = np.pi / self.h  # = n/(2m)

    @property
    def nyquist(self) -> float:
        """Largest representable frequency magnitude, pi/h."""
        return self._nyquist

    def frequency_index(self, freq: float) -> int:
        """Map a lattice frequency to its integer index kappa = freq*m.

        Raises LatticeError off the lattice and NyquistError at or above
        the Nyquist frequency.
        """
        kf = freq * self.m
        kappa = int(round(kf))
        if abs(kf - kappa) > _LATTICE_TOL:
            raise LatticeError(f"frequency {freq} is not on the lattice k/{self.m}")
        if abs(kappa) >= self.n // 2:
            raise NyquistError(
                f"frequency {freq} at or beyond the Nyquist limit {self._nyquist}")
        return kappa

    def shift_steps(self, t: float) -> int:
        """Number of grid steps for an on-grid shift t; LatticeError otherwise."""
        s = t / self.h
        steps = int(round(s))
        if abs(s - steps) > _LATTICE_TOL:
            raise LatticeError(f"shift {t} is not a multiple of the grid step {self.h}")
        return steps

    def time_index(self, t: float) -> int:
        """Index j with t_j = t for an on-grid time in [-L/2, L/2)."""
        j = self.shift_steps(t + self.length / 2.0)
        if not 0 <= j < self.n:
            raise LatticeError(f"time {t} outside the grid period [{-self.length/2}, {self.length/2})")
        return j

    def __eq__(self, other):
        return isinstance(other, TimeGrid) and other.m == self.m and other.n == self.n

    def __hash__(self):
        return hash((self.m, self.n))

    def __repr__(self):
        return f"TimeGrid(m={self.m}, n={self.n})"


class SampledFunction:
    """Complex d-vector valued function sampled on a TimeGrid.

    Immutable after construction; the frequency cache is filled lazily and
    idempotently (safe for concurrent readers).  `exact_lattice` marks
    functions assembled from lattice trigonometric terms, for which the
    spectrum is exact; raw sample vectors are flagged approximate.
    """

    __slots__ = ("grid", "values", "dim", "exact_lattice", "_freq")

    def __init__(self, grid: TimeGrid, values, exact_lattice: bool = False,
                 _freq=None):
        values = np.asarray(values, dtype=complex)
        if values.ndim == 1:
            values = values[:, None]
        if values.shape[0] != grid.n:
            raise ParameterError(
                f"values length {values.shape[0]} does not match grid size {grid.n}")
        self.grid = grid
        self.values = values
        self.values.setflags(write=False)
        self.dim = values.shape[1]
        self.exact_lattice = exact_lattice
        self._freq = _freq
        if _freq is not None:
            self._freq.setflags(write=False)

    @property
    def coefficients(self):
        """Frequency samples x_hat(lambda_k), native FFT order, shape (n, dim)."""
        if self._freq is None:
            g = self.grid
            freq = g.h * g._sign[:, None] * np.fft.fft(self.values, axis=0)
            freq.setflags(write=False)
            self._freq = freq
        return self._freq

    def with_coefficients(self, coeffs, exact_lattice=None):
        """New function synthesized from frequency samples (native order)."""
        g = self.grid
        coeffs = np.asarray(coeffs, dtype=complex)
        values = np.fft.ifft(coeffs * g._sign[:, None] / g.h, axis=0)
        if exact_lattice is None:
            exact_lattice = self.exact_lattice
        return SampledFunction(g, values, exact_lattice=exact_lattice,
                               _freq=coeffs.copy())

    def __add__(self, other):
        _check_compatible(self, other)
        return SampledFunction(self.grid, self.values + other.values,
                               exact_lattice=self.exact_lattice and other.exact_lattice)

    def __sub__(self, other):
        _check_compatible(self, other)
        return SampledFunction(self.grid, self.values - other.values,
                               exact_lattice=self.exact_lattice and other.exact_lattice)

    def __mul__(self, scalar):
        return SampledFunction(self.grid, self.values * scalar,
                               exact_lattice=self.exact_lattice)

    __rmul__ = __mul__

    def __repr__(self):
        return (f"SampledFunction(dim={self.dim}, grid={self.grid!r}, "
                f"exact_lattice={self.exact_lattice})")


def _check_compatible(x: SampledFunction, y: SampledFunction):
    if x.grid != y.grid:
        raise ParameterError("operands live on different grids")
    if x.dim != y.dim:
        raise ParameterError(f"dimension mismatch: {x.dim} vs {y.dim}")


class ScalarKernel:
    """Scalar convolution kernel known through its Fourier transform.

    `hat` evaluates f_hat(lambda) vectorized over lambda; `l1_norm` is an
    upper estimate of integral |f|, which bounds the sup-norm amplification
    of the convolution.
    """

    __slots__ = ("name", "hat", "l1_norm")

    def __init__(self, name: str, hat, l1_norm: float):
        self.name = name
        self.hat = hat
        self.l1_norm = float(l1_norm)

    @classmethod
    def from_samples(cls, grid: TimeGrid, values, name: str = "sampled"):
        """Kernel given by samples on the grid; l1 norm by quadrature."""
        values = np.asarray(values, dtype=complex).reshape(-1)
        if values.shape[0] != grid.n:
            raise ParameterError("sample count does not match the grid")
        coeffs = grid.h * grid._sign * np.fft.fft(values)
        table = {int(k): c for k, c in zip(grid.kappa, coeffs)}

        def hat(lam):
            lam = np.asarray(lam, dtype=float)
            idx = np.round(lam * grid.m).astype(np.int64)
            out = np.array([table.get(int(i), 0.0) for i in np.atleast_1d(idx)],
                           dtype=complex)
            return out.reshape(lam.shape) if lam.shape else out[0]

        return cls(name, hat, float(grid.h * np.abs(values).sum()))

    def __repr__(self):
        return f"ScalarKernel({self.name!r}, l1={self.l1_norm:.6g})"


def build_sampled_function(grid: TimeGrid, terms) -> SampledFunction:
    """Assemble a lattice trigonometric polynomial sum_k c_k exp(i w_k t).

    Parameters
    ----------
    terms : iterable of (frequency, coefficient)
        Each frequency must lie on the lattice {k/m} strictly below the
        Nyquist limit; coefficients are complex d-vectors (or scalars for
        d = 1).  Repeated frequencies accumulate.

    Returns
    -------
    SampledFunction with an exact frequency cache: one nonzero bin per
    distinct frequency, value L * c at its bin.
    """
    terms = list(terms)
    if terms:
        dim = np.atleast_1d(np.asarray(terms[0][1])).shape[0]
    else:
        dim = 1
    values = np.zeros((grid.n, dim), dtype=complex)
    coeffs = np.zeros((grid.n, dim), dtype=complex)
    for freq, c in terms:
        c = np.atleast_1d(np.asarray(c, dtype=complex))
        if c.shape[0] != dim:
            raise ParameterError("all coefficients must share one dimension")
        kappa = grid.frequency_index(freq)
        omega = kappa / grid.m
        values += np.exp(1j * omega * grid.times)[:, None] * c[None, :]
        coeffs[kappa % grid.n] += grid.length * c
    return SampledFunction(grid, values, exact_lattice=True, _freq=coeffs)


def fourier_transform(x: SampledFunction):
    """Frequency samples of x in ascending-frequency order.

    Returns (frequencies, coefficients); coefficients has shape (n, dim).
    """
    return (np.fft.fftshift(x.grid.frequencies),
            np.fft.fftshift(x.coefficients, axes=0))


def inverse_fourier(samples, grid: TimeGrid) -> SampledFunction:
    """Inverse of fourier_transform; samples in ascending-frequency order."""
    samples = np.asarray(samples, dtype=complex)
    if samples.ndim == 1:
        samples = samples[:, None]
    if samples.shape[0] != grid.n:
        raise ParameterError("frequency sample count does not match the grid")
    coeffs = np.fft.ifftshift(samples, axes=0)
    values = np.fft.ifft(coeffs * grid._sign[:, None] / grid.h, axis=0)
    return SampledFunction(grid, values, _freq=coeffs.copy())


def pointwise_norms(x: SampledFunction):
    """Euclidean vector norm of x at every grid point."""
    return np.linalg.norm(x.values, axis=1)


def sup_norm(x: SampledFunction) -> float:
    return float(pointwise_norms(x).max())


def norm(x: SampledFunction, kind: str = "sup", p: float = 1.0) -> float:
    """Sup norm or Stepanov norm of a sampled function.

    kind="sup" is max_j ||x(t_j)||.  kind="stepanov" is the supremum over
    grid starts t of the unit-window local mean (integral_t^{t+1}
    ||x||^p)^(1/p); the window quadrature weights sum to exactly one, so
    constants evaluate exactly and the Stepanov norm never exceeds the sup
    norm.
    """
    if kind == "sup":
        return sup_norm(x)
    if kind != "stepanov":
        raise ParameterError(f"unknown norm kind {kind!r}")
    if p < 1:
        raise ParameterError(f"stepanov exponent must satisfy p >= 1, got {p}")
    g = x.grid
    s = pointwise_norms(x) ** p
    width = int(np.ceil(1.0 / g.h))
    weights = np.full(width, g.h)
    weights[-1] = 1.0 - g.h * (width - 1)  # partial last cell, total weight 1
    idx = (np.arange(g.n)[:, None] + np.arange(width)[None, :]) % g.n
    window = s[idx] @ weights
    return float(window.max() ** (1.0 / p))


def translate(x: SampledFunction, t: float) -> SampledFunction:
    """Translation (S(t)x)(s) = x(s+t) for an on-grid shift t.

    Periodic wraparound; an exact sup-norm isometry.
    """
    steps = x.grid.shift_steps(t)
    return SampledFunction(x.grid, np.roll(x.values, -steps, axis=0),
                           exact_lattice=x.exact_lattice)


def modulate(x: SampledFunction, freq: float) -> SampledFunction:
    """Modulation (V(lambda)x)(t) = exp(i*lambda*t) x(t), lambda on lattice.

    An exact sup-norm isometry; the frequency content shifts by lambda
    (the cache, when present, is carried by an exact bin roll).
    """
    g = x.grid
    kappa = g.frequency_index(freq)
    values = np.exp(1j * (kappa / g.m) * g.times)[:, None] * x.values
    cache = None
    if x._freq is not None:
        cache = np.roll(x._freq, kappa, axis=0)
    return SampledFunction(g, values, exact_lattice=x.exact_lattice, _freq=cache)


def convolve(f: ScalarKernel, x: SampledFunction) -> SampledFunction:
    """Module action f*x, executed as the exact lattice multiplier f_hat.

    Satisfies ||f*x||_sup <= l1(f) * ||x||_sup.
    """
    mult = np.asarray(f.hat(x.grid.frequencies), dtype=complex)
    return x.with_coefficients(mult[:, None] * x.coefficients)


def modulus_of_continuity(x: SampledFunction, t: float) -> float:
    """omega_x(t) = max over on-grid |s| <= t of ||translate(x,s) - x||_sup.

    Nondecreasing and subadditive in t.  Shifts by -s give the same sup by
    translation invariance, so only one sign is scanned.
    """
    if t < 0:
        raise ParameterError(f"modulus of continuity needs t >= 0, got {t}")
    steps = int(np.floor(t / x.grid.h + _LATTICE_TOL))
    best = 0.0
    for k in range(1, steps + 1):
        diff = np.roll(x.values, -k, axis=0) - x.values
        best = max(best, float(np.linalg.norm(diff, axis=1).max()))
    return best
