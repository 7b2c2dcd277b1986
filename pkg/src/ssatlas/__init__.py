"""Spectra, scattering and spectral singularities of the PT-symmetric
potential V(x) = -A^2 sech^2 x - 2 g A sech x + i A sech x tanh x."""

from importlib.metadata import PackageNotFoundError, version

from .atlas import (
    SSAtlas,
    SSNotFound,
    SSRoot,
    Window,
    count_ss,
    cross_validate_transition,
    find_ss,
    predicted_count,
    scan_ss,
    trace_gc_curve,
)
from .eigensolver import (
    GridSpec,
    SpectrumResult,
    TransitionPoint,
    classify_states,
    compute_spectrum,
    eigenvalues,
    find_bifurcation_g,
    find_collision_g,
    first_bifurcation,
    spectrum_sweep,
)
from .errors import CoarseGridWarning, NoTransitionError, NumericalError
from .potential import PotentialParams, check_pt_symmetry, eval_V, exact_bound_state
from .scattering import (
    ScatteringCoefficients,
    TransferMatrix,
    integrate_transfer_matrix,
    scattering_coefficients,
    scattering_sweep,
)

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0+unknown"

__all__ = [
    "CoarseGridWarning",
    "GridSpec",
    "NoTransitionError",
    "NumericalError",
    "PotentialParams",
    "SSAtlas",
    "SSNotFound",
    "SSRoot",
    "ScatteringCoefficients",
    "SpectrumResult",
    "TransferMatrix",
    "TransitionPoint",
    "Window",
    "check_pt_symmetry",
    "classify_states",
    "compute_spectrum",
    "count_ss",
    "cross_validate_transition",
    "eigenvalues",
    "eval_V",
    "exact_bound_state",
    "find_bifurcation_g",
    "find_collision_g",
    "find_ss",
    "first_bifurcation",
    "integrate_transfer_matrix",
    "predicted_count",
    "scan_ss",
    "scattering_coefficients",
    "scattering_sweep",
    "spectrum_sweep",
    "trace_gc_curve",
]
