"""Hyperbolicity test, Riesz spectral projections, and the Green kernel.

For a hyperbolic generator (no spectrum of exp(A) on the unit circle) the
state space splits into stable and unstable invariant subspaces via the
contour-quadrature Riesz projector.  The Green kernel

    G(t) = -exp(tA) P_in   (t >= 0),      G(t) = exp(tA) P_out   (t < 0)

decays exponentially both ways; its Fourier transform equals the resolvent
R(i*lambda, A) on the axis, which is what the whole-line solver multiplies
by in frequency space.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .errors import (NotHyperbolicError, ParameterError, PeriodTooShortError,
                     QuadratureError)
from .generator import GeneratorModel, expm
from .grid import TimeGrid

_HYPERBOLIC_TOL = 1e-8


class DichotomySplit:
    """Riesz spectral projections of the time-one operator exp(A).

    P_in projects onto the span of eigenvectors with |exp(mu)| < 1 (the
    stable subspace), P_out = I - P_in onto the rest; both commute with
    exp(tA).  `margin` is the distance of the spectrum of exp(A) to the
    unit circle; `q_nodes` the contour node count actually used.
    """

    __slots__ = ("p_in", "p_out", "sigma_in", "sigma_out", "margin", "q_nodes")

    def __init__(self, p_in, p_out, sigma_in, sigma_out, margin, q_nodes):
        self.p_in = p_in
        self.p_out = p_out
        self.sigma_in = sigma_in
        self.sigma_out = sigma_out
        self.margin = float(margin)
        self.q_nodes = int(q_nodes)

    @property
    def stable_rank(self) -> int:
        return len(self.sigma_in)

    def __repr__(self):
        return (f"DichotomySplit(stable={len(self.sigma_in)}, "
                f"unstable={len(self.sigma_out)}, margin={self.margin:.4g})")


def check_hyperbolic(model: GeneratorModel) -> float:
    """Distance of the spectrum of exp(A) to the unit circle.

    Equals min over eigenvalues mu of A of |exp(Re mu) - 1|; the semigroup
    is hyperbolic when the margin is positive.
    """
    return float(np.abs(np.exp(model.eigenvalues.real) - 1.0).min())


def _contour_projector(t_one, q: int):
    """Trapezoid contour quadrature (1/Q) sum lam_q (lam_q I - T)^(-1)."""
    d = t_one.shape[0]
    nodes = np.exp(2j * np.pi * np.arange(q) / q)
    shifted = nodes[:, None, None] * np.eye(d)[None, :, :] - t_one[None, :, :]
    return (nodes[:, None, None] * np.linalg.inv(shifted)).mean(axis=0)


def riesz_projections(model: GeneratorModel, q_nodes: int = 256) -> DichotomySplit:
    """Spectral projections of exp(A) by unit-circle contour quadrature.

    Nodes double adaptively until two consecutive levels agree to 1e-10;
    failure to converge by Q = 2^20 raises QuadratureError.  The standard
    Riesz orientation (lam*I - T)^(-1) is used so that P_in is idempotent
    with range equal to the stable subspace.
    """
    if q_nodes < 64:
        raise ParameterError(f"need at least 64 contour nodes, got {q_nodes}")
    margin = check_hyperbolic(model)
    if margin <= _HYPERBOLIC_TOL:
        raise NotHyperbolicError(
            f"unit-circle margin {margin:.3e} <= {_HYPERBOLIC_TOL}")
    t_one = expm(model, 1.0)
    q = int(q_nodes)
    p_prev = _contour_projector(t_one, q)
    while True:
        q *= 2
        p_next = _contour_projector(t_one, q)
        if np.abs(p_next - p_prev).max() <= 1e-10:
            break
        if q > 2 ** 20:
            raise QuadratureError(
                f"contour quadrature not converged at Q={q}; "
                f"last change {np.abs(p_next - p_prev).max():.3e} > 1e-8")
        p_prev = p_next
    p_in = p_next
    p_out = np.eye(model.dim) - p_in
    mults = np.exp(model.eigenvalues)
    inside = np.abs(mults) < 1.0
    return DichotomySplit(p_in, p_out, mults[inside], mults[~inside],
                          margin, q)


class GreenKernel:
    """Sampled, exponentially decaying Green kernel with tail certificates.

    The analytic evaluator applies the defining formula at arbitrary t.
    `decay_scale` and `decay_rate` certify ||G(t)|| <= C exp(-alpha |t|)
    (fitted on dense samples with a 20% rate margin); `t_cut` truncates
    where the certificate falls below `eps_tail`.  `multiplier` holds the
    Fourier transform of the truncated kernel on the grid's frequency
    lattice, computed by panel Gauss quadrature of the time integral --
    this is the solver's frequency multiplier.
    """

    __slots__ = ("model", "split", "grid", "eps_tail", "decay_rate",
                 "decay_scale", "t_cut", "_multiplier", "_samples",
                 "_restrictions")

    def __init__(self, model, split, grid, eps_tail, decay_rate, decay_scale,
                 t_cut):
        self.model = model
        self.split = split
        self.grid = grid
        self.eps_tail = float(eps_tail)
        self.decay_rate = float(decay_rate)
        self.decay_scale = float(decay_scale)
        self.t_cut = float(t_cut)
        self._multiplier = None
        self._samples = None
        self._restrictions = (_restrict(model, split.p_in),
                              _restrict(model, split.p_out))

    def evaluate(self, t: float):
        """G(t) = -exp(tA) P_in for t >= 0, exp(tA) P_out for t < 0.

        Evaluated through the invariant-subspace restriction, which keeps
        the decaying branch stable for arbitrarily large |t| (the raw
        product expm(tA) @ P loses all digits to roundoff leakage once
        exp(|t| growth rate) exceeds 1/eps).
        """
        side = 0 if t >= 0 else 1
        rest = self._restrictions[side]
        if rest is None:
            return np.zeros((self.model.dim, self.model.dim), dtype=complex)
        basis, small, coords = rest
        value = basis @ sla.expm(t * small) @ coords
        return -value if t >= 0 else value

    @property
    def samples(self):
        """G at the grid times, shape (n, d, d); computed on first use."""
        if self._samples is None:
            g = self.grid
            d = self.model.dim
            out = np.empty((g.n, d, d), dtype=complex)
            e_h = sla.expm(g.h * self.model.matrix)
            e_hinv = sla.expm(-g.h * self.model.matrix)
            j0 = g.time_index(0.0)
            cur = self.split.p_in.copy()
            for j in range(j0, g.n):          # forward branch, reprojected
                out[j] = -cur
                cur = self.split.p_in @ (e_h @ cur)
            cur = self.split.p_out.copy()
            for j in range(j0 - 1, -1, -1):   # backward branch
                cur = self.split.p_out @ (e_hinv @ cur)
                out[j] = cur
            self._samples = out
        return self._samples

    @property
    def multiplier(self):
        """Fourier transform of the truncated kernel at the lattice bins."""
        if self._multiplier is None:
            self._multiplier = _kernel_multiplier(self)
        return self._multiplier

    def __repr__(self):
        return (f"GreenKernel(t_cut={self.t_cut:.4g}, eps_tail={self.eps_tail:g}, "
                f"decay={self.decay_scale:.3g}*exp(-{self.decay_rate:.3g}|t|))")


def _restrict(model, projector):
    """(basis, restricted A, coordinates) for the range of a projector.

    `basis` is an orthonormal column basis Q of the invariant subspace,
    the restricted matrix is Q^H A Q, and coordinates Q^H P map a vector
    to its basis coefficients; exp(tA) P = Q exp(t Q^H A Q) Q^H P holds
    because the subspace is A-invariant.
    """
    u, s, _ = np.linalg.svd(projector)
    rank = int((s > 0.5).sum())  # projector singular values are >= 1 or ~0
    if rank == 0:
        return None
    basis = u[:, :rank]
    small = basis.conj().T @ model.matrix @ basis
    coords = basis.conj().T @ projector
    return basis, small, coords


def _decay_samples(model, projector, step_matrix, t_max, dt, floor):
    """||exp(tA) P|| on a t-walk with per-step reprojection.

    Reprojection kills roundoff leakage into the complementary subspace,
    which would otherwise grow exponentially and wreck the fit.
    """
    out_t, out_v = [], []
    cur = projector.copy()
    t = 0.0
    while t <= t_max:
        v = np.linalg.norm(cur, 2)
        out_t.append(t)
        out_v.append(v)
        if v < floor:
            break
        cur = projector @ (step_matrix @ cur)
        t += dt
    return np.array(out_t), np.array(out_v)


def green_kernel(model: GeneratorModel, split: DichotomySplit, grid: TimeGrid,
                 eps_tail: float = 1e-12) -> GreenKernel:
    """Build the Green kernel of a hyperbolic generator on a grid.

    Fits the decay certificate ||G(t)|| <= C exp(-alpha |t|) with
    alpha = 0.8 * (spectral decay rate) -- the 20% margin absorbs
    polynomial Jordan factors -- and C the sampled maximum of
    ||G(t)|| exp(alpha |t|).  Raises PeriodTooShortError when the grid
    period cannot hold the truncated kernel (L < 2 * t_cut).
    """
    if eps_tail <= 0:
        raise ParameterError("eps_tail must be positive")
    re = model.eigenvalues.real
    stable = re[re < 0]
    unstable = re[re > 0]
    rates = []
    if split.stable_rank > 0 and len(stable):
        rates.append(-stable.max())
    if split.stable_rank < model.dim and len(unstable):
        rates.append(unstable.min())
    if not rates:
        raise NotHyperbolicError("spectrum has no stable/unstable separation")
    alpha = 0.8 * min(rates)

    dt = 0.25  # the norm curve varies on the O(1) beat scale, not 1/||A||
    t_max = (np.log(1.0 / eps_tail) + 20.0) / alpha
    scale = 1e-300
    if split.stable_rank > 0:
        ts, vs = _decay_samples(model, split.p_in,
                                sla.expm(dt * model.matrix), t_max, dt,
                                eps_tail * 1e-3)
        scale = max(scale, (vs * np.exp(alpha * ts)).max())
    if split.stable_rank < model.dim:
        ts, vs = _decay_samples(model, split.p_out,
                                sla.expm(-dt * model.matrix), t_max, dt,
                                eps_tail * 1e-3)
        scale = max(scale, (vs * np.exp(alpha * ts)).max())
    scale *= 1.01  # slack for intra-sample variation of a smooth curve

    t_cut = np.log(max(scale, eps_tail) / eps_tail) / alpha
    if grid.length < 2.0 * t_cut:
        min_m = int(np.ceil(2.0 * t_cut / (2 * np.pi)))
        raise PeriodTooShortError(
            f"grid period L={grid.length:.4g} < 2*t_cut={2*t_cut:.4g}; "
            f"need L >= {2*t_cut:.4g} (period multiplier m >= {min_m})")
    return GreenKernel(model, split, grid, eps_tail, alpha, scale, t_cut)


def _kernel_multiplier(kernel: GreenKernel):
    """Panel Gauss-Legendre Fourier transform of the truncated kernel.

    Panels of width w = L/Np tile the period with a boundary at t = 0, so
    the jump of G never meets a quadrature node.  Because the panel grid
    is commensurate with the frequency lattice, the panel sums collapse to
    one FFT per Gauss offset.
    """
    model, grid, split = kernel.model, kernel.grid, kernel.split
    d = model.dim
    n_panels = int(2 ** np.ceil(np.log2(max(64, 0.2 * grid.n))))
    w = grid.length / n_panels
    k_gauss = 12
    xi, eta = np.polynomial.legendre.leggauss(k_gauss)
    offsets = w * (xi + 1.0) / 2.0
    weights = w * eta / 2.0

    p_fwd = min(int(np.ceil(kernel.t_cut / w)), n_panels // 2)
    p_bwd = p_fwd
    e_w = sla.expm(w * model.matrix)
    e_winv = sla.expm(-w * model.matrix)
    e_off = np.stack([sla.expm(o * model.matrix) for o in offsets])

    panel_vals = np.zeros((n_panels, k_gauss, d, d), dtype=complex)
    cur = split.p_in.copy()
    fwd = np.empty((p_fwd, d, d), dtype=complex)
    for p in range(p_fwd):
        fwd[p] = cur
        cur = split.p_in @ (e_w @ cur)
    panel_vals[:p_fwd] = -np.einsum("kab,pbc->pkac", e_off, fwd)
    cur = split.p_out.copy()
    bwd = np.empty((p_bwd, d, d), dtype=complex)
    for i in range(p_bwd):
        cur = split.p_out @ (e_winv @ cur)
        bwd[i] = cur
    panel_vals[np.arange(-p_bwd, 0) % n_panels] = np.einsum(
        "kab,pbc->pkac", e_off, bwd[::-1])

    panel_fft = np.fft.fft(panel_vals, axis=0)           # (Np, K, d, d)
    gather = panel_fft[kernel.grid.kappa % n_panels]     # (n, K, d, d)
    phases = weights[None, :] * np.exp(
        -1j * np.outer(grid.frequencies, offsets))       # (n, K)
    flat = gather.reshape(grid.n, k_gauss, d * d)
    return (phases[:, None, :] @ flat).reshape(grid.n, d, d)


def kernel_l1_norm(kernel, rel_tol: float = 1e-8) -> float:
    """Quadrature L1 norm of an operator kernel, integral of ||K(t)||.

    Green kernels integrate ||G|| over [-t_cut, t_cut] by trapezoid sums
    with step halving and Richardson extrapolation until the relative
    change is below `rel_tol`, plus the certified exponential tail.  Band
    kernels carry their own windowed quadrature (see band_solver).
    """
    if hasattr(kernel, "l1_norm"):          # BandKernel carries its own
        return float(kernel.l1_norm)
    model, split = kernel.model, kernel.split
    t_cut = kernel.t_cut

    def norms_on(projector, step_sign, n_cells):
        """||exp(tA) P|| at n_cells+1 equispaced t in [0, t_cut]."""
        dt = t_cut / n_cells
        step = sla.expm(step_sign * dt * model.matrix)
        out = np.empty(n_cells + 1)
        cur = projector.copy()
        for i in range(n_cells + 1):
            out[i] = np.linalg.norm(cur, 2)
            cur = projector @ (step @ cur)
        return out, dt

    def romberg(projector, step_sign, n_cells):
        vals, dt = norms_on(projector, step_sign, n_cells)

        def trapz(stride):
            sel = vals[::stride]
            return dt * stride * (sel.sum() - 0.5 * (sel[0] + sel[-1]))

        t1, t2, t4 = trapz(1), trapz(2), trapz(4)
        r11 = (4 * t1 - t2) / 3
        r21 = (4 * t2 - t4) / 3
        return (16 * r11 - r21) / 15

    total = 0.0
    for projector, sign, active in ((split.p_in, 1.0, split.stable_rank > 0),
                                    (split.p_out, -1.0,
                                     split.stable_rank < model.dim)):
        if not active:
            continue
        n_cells = 1024
        prev = romberg(projector, sign, n_cells)
        while True:
            n_cells *= 2
            cur = romberg(projector, sign, n_cells)
            if abs(cur - prev) <= rel_tol * max(abs(cur), 1e-300) or n_cells >= 2 ** 14:
                break
            prev = cur
        total += cur
    tail = 2.0 * kernel.eps_tail / kernel.decay_rate
    return float(total + tail)
