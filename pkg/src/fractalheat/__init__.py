"""Numerical toolkit for semilinear heat equations driven by heat-kernel bounds.

The package discretizes a metric measure space into a weighted point set,
realizes the heat semigroup as dense quadrature matrices, and implements
the quantitative machinery around the mild formulation
u = K_t phi + int K f + int K u^p: Picard iteration, local existence
horizons, blow-up witnesses, semigroup comparison inequalities, regime
classification by the volume/walk exponents, and Hoelder regularity fits.

Submodules load lazily so the command line can configure BLAS thread
pools before numpy is first imported.
"""
from importlib import import_module

__version__ = "0.1.0"

# public name -> home submodule
_EXPORTS = {
    "MetricMeasureGrid": "space",
    "RegularityReport": "space",
    "build_lattice_space": "space",
    "ball_measure": "space",
    "check_alpha_regularity": "space",
    "save_grid_csv": "space",
    "load_grid_csv": "space",
    "load_point_cloud": "space",
    "constant_field": "space",
    "gaussian_bump_field": "space",
    "power_decay_field": "space",
    "GaussType": "profiles",
    "CauchyType": "profiles",
    "TableProfile": "profiles",
    "ConditionWitness": "profiles",
    "ProfilePredicateReport": "profiles",
    "profile_eval": "profiles",
    "check_profile_conditions": "profiles",
    "verify_split_bound": "profiles",
    "GaussWeierstrass": "kernel",
    "CauchyPoisson": "kernel",
    "ProfileKernel": "kernel",
    "NormalizedKernel": "kernel",
    "KernelAxiomReport": "kernel",
    "KernelHolderFit": "kernel",
    "TwoSidedReport": "kernel",
    "kernel_eval": "kernel",
    "two_sided_bounds": "kernel",
    "verify_two_sided": "kernel",
    "estimate_holder_kernel": "kernel",
    "verify_kernel_axioms": "kernel",
    "TimeGrid": "semigroup",
    "kernel_matrix": "semigroup",
    "apply_semigroup": "semigroup",
    "source_integral": "semigroup",
    "duhamel_step": "semigroup",
    "duhamel_full": "semigroup",
    "set_cache_budget": "semigroup",
    "ProblemSpec": "solver",
    "Trajectory": "solver",
    "SolveReport": "solver",
    "HorizonReport": "solver",
    "WitnessReport": "solver",
    "picard_solve": "solver",
    "local_horizon": "solver",
    "nonexistence_witness": "solver",
    "HarnackConstants": "analysis",
    "HarnackReport": "analysis",
    "RegimeVerdict": "analysis",
    "WeightedIntegralReport": "analysis",
    "MomentBoundReport": "analysis",
    "HolderParams": "analysis",
    "HolderReport": "analysis",
    "EnvelopeReport": "analysis",
    "FeasibilityReport": "analysis",
    "SmallDataConstants": "analysis",
    "harnack_constants": "analysis",
    "verify_harnack": "analysis",
    "classify_regime": "analysis",
    "check_weighted_integrals": "analysis",
    "check_moment_bound": "analysis",
    "holder_estimate": "analysis",
    "envelope_check": "analysis",
    "contraction_feasibility": "analysis",
    "measure_smalldata_constants": "analysis",
}

__all__ = sorted(_EXPORTS) + ["__version__"]


def __getattr__(name):
    home = _EXPORTS.get(name)
    if home is None:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    value = getattr(import_module(f".{home}", __name__), name)
    globals()[name] = value
    return value


def __dir__():
    return sorted(set(globals()) | set(_EXPORTS))
