"""Seeded builders shared by the test modules."""

import numpy as np

from dichotomy import GeneratorModel, TimeGrid, build_sampled_function

DEFAULT_GRID = TimeGrid(m=16, n=4096)


def random_hyperbolic_model(rng, dim, re_range=(1.0, 2.2), coupling=0.35,
                            stable=None):
    """Diagonalizable generator with eigenvalue real parts off the axis.

    Real parts are drawn from +-re_range (at least one stable direction
    when dim > 1 unless `stable` pins the split); mild non-normal coupling
    keeps decay certificates within the default grid period.
    """
    if stable is None:
        stable = int(rng.integers(1, dim)) if dim > 1 else 1
    signs = np.array([-1.0] * stable + [1.0] * (dim - stable))
    re = signs * rng.uniform(*re_range, dim)
    mu = re + 1j * rng.uniform(-2.0, 2.0, dim)
    basis = np.eye(dim) + coupling * (rng.standard_normal((dim, dim))
                                      + 1j * rng.standard_normal((dim, dim)))
    return GeneratorModel(basis @ np.diag(mu) @ np.linalg.inv(basis))


def random_gap_model(rng, dim, gap=0.05):
    """Eigenvalue real parts +-gap: spectral gap holds, margin is tiny."""
    stable = max(1, dim // 2)
    signs = np.array([-1.0] * stable + [1.0] * (dim - stable))
    mu = signs * gap + 1j * rng.uniform(-2.0, 2.0, dim)
    basis = np.eye(dim) + 0.2 * (rng.standard_normal((dim, dim))
                                 + 1j * rng.standard_normal((dim, dim)))
    return GeneratorModel(basis @ np.diag(mu) @ np.linalg.inv(basis))


def random_trig_poly(rng, grid, dim, n_terms=5, max_freq=6.0):
    """Lattice trigonometric polynomial with distinct random frequencies."""
    span = int(max_freq * grid.m)
    ks = rng.choice(np.arange(-span, span + 1), size=n_terms, replace=False)
    terms = [(k / grid.m,
              rng.standard_normal(dim) + 1j * rng.standard_normal(dim))
             for k in ks]
    return build_sampled_function(grid, terms)


def slow_fourier(x, freqs):
    """Direct quadrature transform h * sum x(t_j) exp(-i lambda t_j).

    Independent of the FFT path; used as the transform oracle.
    """
    g = x.grid
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    out = np.empty((len(freqs), x.dim), dtype=complex)
    for i, lam in enumerate(freqs):
        out[i] = g.h * (x.values * np.exp(-1j * lam * g.times)[:, None]).sum(axis=0)
    return out
