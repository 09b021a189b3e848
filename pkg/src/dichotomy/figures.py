"""Figure rendering for the report path.

Figures accompany the CSV output when requested; the JSON report and the
CSV remain the machine contract, so everything here is presentational.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .grid import pointwise_norms


def _save(fig, outdir, name):
    path = outdir / f"{name}.png"
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path.name


def _plot_trajectory(x, title):
    fig, ax = plt.subplots(figsize=(7, 3.2))
    for i in range(x.dim):
        ax.plot(x.grid.times, x.values[:, i].real, lw=0.9,
                label=f"Re x{i + 1}")
        ax.plot(x.grid.times, x.values[:, i].imag, lw=0.9, ls="--",
                label=f"Im x{i + 1}")
    ax.set_xlabel("t")
    ax.set_title(title)
    if x.dim <= 3:
        ax.legend(fontsize=8, ncol=2)
    return fig


def _plot_kernel(kernel):
    fig, ax = plt.subplots(figsize=(7, 3.2))
    ts = kernel.grid.times
    norms = np.linalg.norm(kernel.samples, ord=2, axis=(1, 2))
    ax.semilogy(ts, np.maximum(norms, 1e-18), lw=0.9, label="||G(t)||")
    env = kernel.decay_scale * np.exp(-kernel.decay_rate * np.abs(ts))
    ax.semilogy(ts, np.maximum(env, 1e-18), lw=0.9, ls="--",
                label="decay certificate")
    for tc in (-kernel.t_cut, kernel.t_cut):
        ax.axvline(tc, color="gray", lw=0.7, ls=":")
    ax.set_xlabel("t")
    ax.set_title("Green kernel decay")
    ax.legend(fontsize=8)
    return fig


def _plot_scan(scan):
    fig, ax = plt.subplots(figsize=(7, 3.2))
    ax.plot(scan.lambdas, scan.values, lw=0.9)
    ax.axhline(scan.supremum, color="crimson", lw=0.8, ls="--",
               label=f"M = {scan.supremum:.4g}")
    ax.set_xlabel("lambda")
    ax.set_ylabel("||R(i lambda, A)||")
    ax.set_title("Resolvent norm on the imaginary axis")
    ax.legend(fontsize=8)
    return fig


def _plot_spectrum(x):
    fig, ax = plt.subplots(figsize=(7, 3.2))
    mags = np.linalg.norm(x.coefficients, axis=1)
    order = np.argsort(x.grid.frequencies)
    lam = x.grid.frequencies[order]
    mags = np.maximum(mags[order], 1e-20)
    ax.semilogy(lam, mags, lw=0.7)
    ax.set_xlabel("lambda")
    ax.set_ylabel("|x_hat|")
    ax.set_title("Frequency content")
    return fig


def _plot_bands(dec):
    fig, ax = plt.subplots(figsize=(7, 3.2))
    ns = sorted(n for n, v in dec.norms.items() if v > 0)
    vals = [dec.norms[n] for n in ns]
    if ns:
        ax.stem(ns, vals)
    ax.set_xlabel("band center n")
    ax.set_ylabel("||phi_n * x||_sup")
    ax.set_title("Band norms")
    return fig


def _plot_band_report(report):
    fig, ax = plt.subplots(figsize=(7, 3.2))
    ns = [e["n"] for e in report.per_band]
    ax.stem(ns, [e["rhs_band_sup"] for e in report.per_band])
    if any("l1_norm" in e for e in report.per_band):
        ax.axhline(report.per_band[0].get("l1_bound", 0.0), color="crimson",
                   lw=0.8, ls="--", label="per-band L1 certificate")
        ax.legend(fontsize=8)
    ax.set_xlabel("band center n")
    ax.set_title("Right-hand side band norms")
    return fig


def _plot_picard(picard):
    fig, ax = plt.subplots(figsize=(7, 3.2))
    steps = picard.step_as_norms
    ax.semilogy(range(1, len(steps) + 1), np.maximum(steps, 1e-18),
                marker="o", ms=3, lw=0.9)
    ax.set_xlabel("iteration")
    ax.set_ylabel("step size (summable norm)")
    ax.set_title(f"Fixed-point convergence (L <= {picard.lipschitz_certificate:.3g})")
    return fig


def render_figures(result, outdir) -> list:
    """Render the figure payload of a RunResult into outdir; returns names."""
    written = []
    payload = result.figures
    if "solution" in payload:
        written.append(_save(_plot_trajectory(payload["solution"], "solution"),
                             outdir, "solution"))
    if "rhs" in payload:
        written.append(_save(_plot_trajectory(payload["rhs"], "rhs"),
                             outdir, "rhs"))
    if "kernel" in payload:
        written.append(_save(_plot_kernel(payload["kernel"]), outdir, "kernel"))
    if "resolvent_scan" in payload:
        written.append(_save(_plot_scan(payload["resolvent_scan"]), outdir,
                             "resolvent_scan"))
    if "certify_scan" in payload:
        written.append(_save(_plot_scan(payload["certify_scan"]), outdir,
                             "resolvent_scan"))
    if "spectrum_of" in payload:
        written.append(_save(_plot_spectrum(payload["spectrum_of"]), outdir,
                             "spectrum"))
    if "decomposition" in payload:
        written.append(_save(_plot_bands(payload["decomposition"]), outdir,
                             "band_norms"))
    if "band_report" in payload:
        written.append(_save(_plot_band_report(payload["band_report"]), outdir,
                             "band_norms"))
    if "picard" in payload:
        written.append(_save(_plot_picard(payload["picard"]), outdir,
                             "picard_convergence"))
    solution = result.trajectories.get("solution")
    if solution is not None:
        fig, ax = plt.subplots(figsize=(7, 3.2))
        ax.plot(solution.grid.times, pointwise_norms(solution), lw=0.9)
        ax.set_xlabel("t")
        ax.set_ylabel("||x(t)||")
        ax.set_title("Solution magnitude")
        written.append(_save(fig, outdir, "solution_magnitude"))
    return written
