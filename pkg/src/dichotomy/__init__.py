"""Bounded whole-line mild solutions of matrix evolution equations.

Two independent constructions invert A - d/dt on controlled function
classes: the dichotomy Green kernel (hyperbolic generators) and the
triangle-window band sum of resolvent kernels (spectral gap only), each
with numerically certified norm bounds, plus a Picard solver for
polynomial perturbations.

Submodules load lazily so the CLI can configure threading before numpy.
"""

_EXPORTS = {
    "TimeGrid": "grid",
    "SampledFunction": "grid",
    "ScalarKernel": "grid",
    "build_sampled_function": "grid",
    "fourier_transform": "grid",
    "inverse_fourier": "grid",
    "norm": "grid",
    "sup_norm": "grid",
    "translate": "grid",
    "modulate": "grid",
    "convolve": "grid",
    "modulus_of_continuity": "grid",
    "GeneratorModel": "generator",
    "ResolventScan": "generator",
    "expm": "generator",
    "resolvent": "generator",
    "resolvent_on_axis": "generator",
    "check_spectral_gap": "generator",
    "resolvent_bound": "generator",
    "growth_bound": "generator",
    "howland_apply": "generator",
    "DichotomySplit": "hyperbolic",
    "GreenKernel": "hyperbolic",
    "check_hyperbolic": "hyperbolic",
    "riesz_projections": "hyperbolic",
    "green_kernel": "hyperbolic",
    "kernel_l1_norm": "hyperbolic",
    "solve_green": "green",
    "mild_residual": "green",
    "residual_pairs": "green",
    "conditioning_span_cap": "green",
    "FejerWindow": "bands",
    "fejer_hat": "bands",
    "fejer_kernel": "bands",
    "band_filter": "bands",
    "BandDecomposition": "bands",
    "decompose_bands": "bands",
    "as_norm": "bands",
    "as_norm_value": "bands",
    "as_tilde_norm": "bands",
    "SpectrumEstimate": "bands",
    "beurling_spectrum": "bands",
    "spectral_derivative": "bands",
    "as_membership_criterion": "bands",
    "BandKernel": "band_solver",
    "band_kernel": "band_solver",
    "band_kernel_transform": "band_solver",
    "band_kernel_l1_bound": "band_solver",
    "inverse_norm_certificate": "band_solver",
    "verify_window_kernel_bound": "band_solver",
    "solve_band": "band_solver",
    "solve_band_limited": "band_solver",
    "PolynomialNonlinearity": "nonlinear",
    "apply_nonlinearity": "nonlinear",
    "lipschitz_bound": "nonlinear",
    "picard_solve": "nonlinear",
    "PicardReport": "nonlinear",
    "Scenario": "scenario",
    "parse_scenario": "scenario",
    "run_command": "reports",
}

__all__ = sorted(_EXPORTS) + ["errors"]

__version__ = "0.1.0"


def __getattr__(name):
    if name == "errors":
        from . import errors
        return errors
    module_name = _EXPORTS.get(name)
    if module_name is None:
        raise AttributeError(f"module 'dichotomy' has no attribute {name!r}")
    import importlib

    module = importlib.import_module(f".{module_name}", __name__)
    return getattr(module, name)
