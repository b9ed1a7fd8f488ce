"""Point clouds on the zero sets of bandlimited potentials.

Explicit feature maps and annihilation fitting in low dimension, kernel
Gram matrices and IRLS nuclear-norm recovery in high dimension. Submodules
load lazily so the CLI can pin thread counts before numpy initializes.
"""

import importlib

__version__ = "0.1.0"

_EXPORTS = {
    "geometry": [
        "PointCloud",
        "SupportSet",
        "FourierCoeffs",
        "DirichletSpec",
        "GaussianSpec",
        "wrap_point",
        "cube_support",
        "translate_count",
    ],
    "features": [
        "FeatureMatrix",
        "feature_map",
        "feature_matrix",
        "annihilation_residual",
        "evaluate_potential",
        "weight_vector",
    ],
    "surface": [
        "SurfaceModel",
        "gram_Q",
        "fit_surface",
        "eval_potential",
        "sos_potential",
        "extract_levelset_2d",
    ],
    "kernels": [
        "GramMatrix",
        "RankProfile",
        "kernel_eval",
        "gram_matrix",
        "kernel_rank_profile",
        "kernel_trace_gradient",
        "median_pairwise_sigma",
    ],
    "operators": [
        "IdentityOp",
        "EntryMaskOp",
        "FourierMaskOp",
        "center_kspace_op",
        "variable_density_masks",
    ],
    "irls": [
        "IrlsConfig",
        "IrlsState",
        "q_update",
        "nuclear_norm_estimate",
        "build_laplacian",
        "surrogate_gradient_check",
        "solve_subproblem",
        "irls_recover",
        "two_step_recover",
    ],
    "synthdata": [
        "ShapeSpec",
        "DynSeriesSpec",
        "make_shape",
        "cos_curve",
        "two_circle_union",
        "lemniscate",
        "sample_surface",
        "add_noise",
        "make_dynamic_series",
    ],
    "metrics": [
        "EvalReport",
        "curve_distance",
        "relative_error",
        "rmse",
    ],
    "errors": [
        "LskrError",
        "InvalidInputError",
        "CapacityExceededError",
        "UnsupportedError",
        "EmptyCloudError",
        "NoNullspaceError",
        "NoZeroSetError",
        "NumericalFailureError",
        "IllPosedError",
        "ConvergenceWarning",
    ],
}

_NAME_TO_MODULE = {
    name: module for module, names in _EXPORTS.items() for name in names
}

__all__ = sorted(_NAME_TO_MODULE) + sorted(_EXPORTS)


def __getattr__(name):
    if name in _NAME_TO_MODULE:
        module = importlib.import_module(f".{_NAME_TO_MODULE[name]}", __name__)
        value = getattr(module, name)
        globals()[name] = value
        return value
    if name in _EXPORTS:
        return importlib.import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return __all__
