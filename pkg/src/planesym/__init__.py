"""Objective plane-symmetry classification of noisy periodic images.

Structure-bearing Fourier coefficients are extracted from a square image
selection, symmetrized for every plane-group setting, and compared through
sums of squared residuals. Geometric-AIC model selection over the subgroup
hierarchy then yields the K-L-best group, geometric Akaike weights, evidence
ratios and confidence levels.
"""
from .core import (
    GROUP_NAMES, GROUPS, HIERARCHY, LAUE_CLASSES, SELECTABLE, HierarchyGraph, LaueClass,
    PlaneGroup, UnsupportedGroupError, get_group, maximal_subgroups, minimal_supergroups,
    multiplicity,
)
from .estimator import FourierCoefficientExtractor, PlaneSymmetryClassifier
from .imageio import load_image, save_png16, select_region, tile_image
from .pipeline import classify_fcs, classify_image, extract
from .residuals import (
    ResidualSet, amp_residual, extinction_ratio, normalize_amplitudes, phase_residual,
    ssr_fc, ssr_laue,
)
from .selection import (
    ClassificationReport, akaike_weights, classify, climb_allowed, confidence,
    estimate_noise, evidence_ratio, find_kl_best, gaic,
)
from .spectrum import (
    FCSet, IndexedFC, InsufficientPeriodicityError, DegenerateLatticeError, ReciprocalLattice,
    Spectrum, amplitude_map, detect_peaks, dft2_centered, direct_lattice, fit_reciprocal_lattice,
    idft2_centered, index_and_extract, power_spectrum,
)
from .symmetry import (
    GroupModel, build_group_model, orbit, reflection_conditions, refine_origin, symmetrize,
    symmetrize_amplitudes, symmetrize_phases, synthesize_image,
)

__version__ = "0.1.0"
