"""Command dispatch and machine-readable reports.

Every command consumes a Scenario and produces a JSON-serializable report:
inputs echoed, computed quantities, certificate triples
(computed, bound, ok), and timing isolated in its own section so golden
comparisons can strip it.  Sampled trajectories go to CSV; the optional
figure payload is rendered by the CLI layer.
"""

from __future__ import annotations

import time

import numpy as np

from . import bands
from .band_solver import (band_kernel_l1_bound, inverse_norm_certificate,
                          solve_band, verify_window_kernel_bound)
from .errors import ParameterError, ScenarioError
from .generator import (GeneratorModel, check_spectral_gap, growth_bound,
                        resolvent_bound, resolvent_on_axis)
from .green import (conditioning_span_cap, mild_residual, residual_pairs,
                    solve_green)
from .grid import TimeGrid, build_sampled_function, sup_norm
from .hyperbolic import check_hyperbolic, green_kernel, kernel_l1_norm, riesz_projections
from .nonlinear import PolynomialNonlinearity, picard_solve
from .scenario import SCHEMA_VERSION, Scenario

COMMANDS = ("check", "solve-green", "solve-band", "asnorm", "spectrum",
            "certify", "nonlinear")


class RunResult:
    """Report document plus side artifacts for the CLI layer."""

    def __init__(self, report, trajectories=None, figures=None):
        self.report = report
        self.trajectories = trajectories or {}
        self.figures = figures or {}


def _certificate(name, computed, bound, slack=1e-6):
    return {"name": name, "computed": float(computed), "bound": float(bound),
            "ok": bool(computed <= bound + slack)}


def _base_report(command, scenario: Scenario):
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs": scenario.to_document(),
        "seed": scenario.seed,
        "results": {},
        "certificates": [],
        "timing": {},
    }


def _build_inputs(scenario: Scenario):
    grid = TimeGrid(m=scenario.grid["m"], n=scenario.grid["n"])
    model = GeneratorModel(scenario.generator_matrix())
    terms = scenario.rhs_terms()
    for _, vec in terms:
        if vec.shape[0] != model.dim:
            raise ScenarioError(
                f"rhs: vector dimension {vec.shape[0]} does not match "
                f"generator dimension {model.dim}")
    y = build_sampled_function(grid, terms) if terms else \
        build_sampled_function(grid, [(0.0, np.zeros(model.dim))])
    return grid, model, y


def _residual_summary(model, x, y, seed, count):
    cap = conditioning_span_cap(model)
    pairs = residual_pairs(y.grid, seed, count=count, span_cap=cap)
    values = [mild_residual(model, x, y, s, t) for s, t in pairs]
    return {
        "pairs": [[s, t] for s, t in pairs],
        "values": values,
        "max": float(max(values)),
        "tolerance": 1e-6 * (1.0 + sup_norm(y)),
    }


def run_command(command: str, scenario: Scenario) -> RunResult:
    """Dispatch one command; returns the report and side artifacts."""
    if command not in COMMANDS:
        raise ParameterError(f"unknown command {command!r}")
    started = time.perf_counter()
    handler = {
        "check": _run_check,
        "solve-green": _run_solve_green,
        "solve-band": _run_solve_band,
        "asnorm": _run_asnorm,
        "spectrum": _run_spectrum,
        "certify": _run_certify,
        "nonlinear": _run_nonlinear,
    }[command]
    result = handler(scenario)
    result.report["timing"]["elapsed_s"] = time.perf_counter() - started
    return result


def _run_check(scenario):
    report = _base_report("check", scenario)
    _, model, _ = _build_inputs(scenario)
    gap = check_spectral_gap(model)
    results = {
        "dimension": model.dim,
        "operator_norm": model.operator_norm,
        "eigenvalues": [[float(mu.real), float(mu.imag)]
                        for mu in model.eigenvalues],
        "gap": gap,
        "growth_bound": growth_bound(model),
        "hyperbolic_margin": check_hyperbolic(model),
    }
    figures = {}
    if gap > 1e-8:
        scan = resolvent_bound(model, dlambda=scenario.solver["dlambda"])
        results["M"] = scan.supremum
        results["resolvent_scan"] = {
            "half_width": scan.half_width,
            "tail_bound": scan.tail_bound,
            "evaluations": scan.evaluations,
        }
        figures["resolvent_scan"] = scan
    else:
        results["M"] = None
    report["results"] = results
    return RunResult(report, figures=figures)


def _run_solve_green(scenario):
    report = _base_report("solve-green", scenario)
    grid, model, y = _build_inputs(scenario)
    split = riesz_projections(model, q_nodes=scenario.solver["q_nodes"])
    kernel = green_kernel(model, split, grid,
                          eps_tail=scenario.solver["eps_tail"])
    x = solve_green(model, y, kernel=kernel)
    l1 = kernel_l1_norm(kernel)
    residuals = _residual_summary(model, x, y, scenario.seed,
                                  scenario.solver["residual_pairs"])
    report["results"] = {
        "solution_sup_norm": sup_norm(x),
        "solution_as_norm": bands.as_norm_value(x),
        "rhs_sup_norm": sup_norm(y),
        "rhs_exact_lattice": y.exact_lattice,
        "kernel": {
            "t_cut": kernel.t_cut,
            "eps_tail": kernel.eps_tail,
            "decay_rate": kernel.decay_rate,
            "decay_scale": kernel.decay_scale,
            "l1_norm": l1,
        },
        "hyperbolic_margin": split.margin,
        "contour_nodes": split.q_nodes,
        "mild_residual": residuals,
    }
    report["certificates"] = [
        _certificate("solution_sup_vs_kernel_l1",
                     sup_norm(x), l1 * sup_norm(y) * (1 + 1e-6)),
        _certificate("mild_residual_max", residuals["max"],
                     residuals["tolerance"], slack=0.0),
    ]
    return RunResult(report, trajectories={"solution": x},
                     figures={"kernel": kernel, "solution": x, "rhs": y})


def _run_solve_band(scenario):
    report = _base_report("solve-band", scenario)
    grid, model, y = _build_inputs(scenario)
    centers = None
    if scenario.solver["band_range"] is not None:
        lo, hi = scenario.solver["band_range"]
        centers = list(range(int(lo), int(hi) + 1))
    x, band_report = solve_band(model, y,
                                oversample=scenario.solver["oversample"],
                                certify=True, band_centers=centers)
    residuals = _residual_summary(model, x, y, scenario.seed,
                                  scenario.solver["residual_pairs"])
    report["results"] = {
        "solution_sup_norm": sup_norm(x),
        "solution_as_norm": band_report.solution_as_norm,
        "rhs_as_norm": band_report.rhs_as_norm,
        "rhs_exact_lattice": y.exact_lattice,
        "M": band_report.m_sup,
        "fast_path_gap": band_report.fast_path_gap,
        "per_band": band_report.per_band,
        "mild_residual": residuals,
    }
    certs = [
        _certificate("as_norm_ratio", band_report.as_ratio,
                     band_report.inverse_bound),
        _certificate("fast_path_agreement", band_report.fast_path_gap, 1e-9,
                     slack=0.0),
        _certificate("mild_residual_max", residuals["max"],
                     residuals["tolerance"], slack=0.0),
    ]
    certs += [_certificate(f"band_{entry['n']}_l1", entry["l1_norm"],
                           entry["l1_bound"])
              for entry in band_report.per_band if "l1_norm" in entry]
    report["certificates"] = certs
    return RunResult(report, trajectories={"solution": x},
                     figures={"solution": x, "rhs": y,
                              "band_report": band_report})


def _run_asnorm(scenario):
    report = _base_report("asnorm", scenario)
    _, _, y = _build_inputs(scenario)
    value, dec = bands.as_norm(y)
    tilde = bands.as_tilde_norm(y)
    report["results"] = {
        "as_norm": value,
        "as_tilde_norm": tilde,
        "band_sup_norms": {str(n): dec.norms[n]
                           for n in range(-dec.n_max, dec.n_max + 1)
                           if dec.norms[n] > 0.0},
    }
    report["certificates"] = [
        _certificate("tilde_le_as", tilde, value),
        _certificate("as_le_20_tilde", value, 20.0 * tilde),
    ]
    return RunResult(report, figures={"decomposition": dec, "rhs": y})


def _run_spectrum(scenario):
    report = _base_report("spectrum", scenario)
    _, _, y = _build_inputs(scenario)
    est = bands.beurling_spectrum(y)
    report["results"] = {
        "frequencies": list(est.frequencies),
        "threshold": est.threshold,
        "peak_magnitude": est.peak,
    }
    return RunResult(report, figures={"spectrum_of": y})


def _run_certify(scenario):
    report = _base_report("certify", scenario)
    _, model, _ = _build_inputs(scenario)
    scan = resolvent_bound(model, dlambda=scenario.solver["dlambda"])
    m_sup = scan.supremum
    results = {
        "M": m_sup,
        "band_kernel_l1_bound": band_kernel_l1_bound(m_sup),
        "inverse_norm_bound": inverse_norm_certificate(m_sup),
    }
    eye = np.eye(model.dim)
    const_l1, const_bound, const_ok = verify_window_kernel_bound(
        lambda lam: np.broadcast_to(eye, (len(lam), model.dim, model.dim)),
        lambda lam: np.zeros((len(lam), model.dim, model.dim)),
        lambda lam: np.zeros((len(lam), model.dim, model.dim)))

    def res(lam):
        return resolvent_on_axis(model, lam)

    def dres(lam):
        r = resolvent_on_axis(model, lam)
        return 1j * np.einsum("nab,nbc->nac", r, r)

    def d2res(lam):
        r = resolvent_on_axis(model, lam)
        return -2.0 * np.einsum("nab,nbc,ncd->nad", r, r, r)

    res_l1, res_bound, res_ok = verify_window_kernel_bound(res, dres, d2res)
    report["results"] = results
    report["certificates"] = [
        {"name": "window_kernel_constant", "computed": const_l1,
         "bound": const_bound, "ok": const_ok},
        {"name": "window_kernel_resolvent", "computed": res_l1,
         "bound": res_bound, "ok": res_ok},
    ]
    return RunResult(report, figures={"certify_scan": scan})


def _run_nonlinear(scenario):
    report = _base_report("nonlinear", scenario)
    grid, model, y = _build_inputs(scenario)
    if scenario.nonlinearity is None:
        raise ScenarioError("nonlinearity: section required for this command")
    tensors = scenario.nonlinearity_tensors()
    nonlin = PolynomialNonlinearity(tensors, seed=scenario.seed)
    beta = scenario.nonlinearity["beta"]
    picard = picard_solve(model, y, nonlin, beta,
                          tol=scenario.solver["tol"],
                          maxit=scenario.solver["maxit"],
                          mode=scenario.solver["mode"])
    report["results"] = {
        "converged": picard.converged,
        "iterations": picard.iterations,
        "beta": picard.beta,
        "M": picard.m_sup,
        "term_norm_estimates": list(nonlin.term_norms),
        "term_norm_method": nonlin.norm_method,
        "lipschitz_certificate": picard.lipschitz_certificate,
        "lipschitz_empirical": picard.lipschitz_empirical,
        "certificate_holds": picard.certificate_holds,
        "seed_condition_holds": picard.seed_condition_holds,
        "phi_z_as_norm": picard.phi_z_as_norm,
        "step_as_norms": picard.step_as_norms,
        "final_residual_as": picard.final_residual_as,
        "final_residual_sup": picard.final_residual_sup,
        "distance_to_linear_as": picard.distance_to_linear_as,
        "solution_sup_norm": sup_norm(picard.solution),
        "solver_mode": picard.solver_mode,
    }
    certs = [
        _certificate("lipschitz_certificate_lt_1",
                     picard.lipschitz_certificate, 1.0, slack=0.0),
        _certificate("phi_z_within_ball", picard.phi_z_as_norm,
                     picard.beta * (1.0 - min(picard.lipschitz_certificate, 1.0)),
                     slack=0.0),
        _certificate("distance_to_linear_le_beta",
                     picard.distance_to_linear_as, picard.beta, slack=1e-8),
    ]
    if picard.lipschitz_empirical > 0:
        certs.append(_certificate("empirical_lipschitz",
                                  picard.lipschitz_empirical,
                                  picard.lipschitz_certificate))
    report["certificates"] = certs
    return RunResult(report, trajectories={"solution": picard.solution,
                                           "linear_part": picard.linear_part},
                     figures={"picard": picard})


def write_csv(path, x):
    """Sampled trajectory as CSV: t, Re x_i, Im x_i per component."""
    g = x.grid
    header = ["t"]
    for i in range(x.dim):
        header += [f"re_x{i + 1}", f"im_x{i + 1}"]
    columns = [g.times]
    for i in range(x.dim):
        columns += [x.values[:, i].real, x.values[:, i].imag]
    data = np.column_stack(columns)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in data:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
