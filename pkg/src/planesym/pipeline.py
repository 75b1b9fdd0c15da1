"""End-to-end analysis: image -> coefficients -> group models -> report."""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import SELECTABLE, get_group
from .imageio import select_region
from .residuals import ResidualSet, compute_residuals, normalize_amplitudes
from .residuals import amp_residual, phase_residual, ssr_fc, ssr_laue, extinction_ratio
from .selection import DEFAULT_SUBSET, ClassificationReport, classify
from .spectrum import (
    DEFAULT_MIN_AMP, FCSet, ReciprocalLattice, Spectrum, amplitude_map,
    default_radius_cut, detect_peaks, dft2_centered, fit_reciprocal_lattice,
    index_and_extract,
)
from .symmetry import build_group_model

logger = logging.getLogger(__name__)


def thread_count() -> int:
    """Worker threads, capped by ``PLANESYM_THREADS``."""
    n = os.cpu_count() or 1
    cap = os.environ.get("PLANESYM_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            logger.warning("ignoring PLANESYM_THREADS=%r", cap)
    return n


@dataclass
class Extraction:
    spectrum: Spectrum
    peaks: np.ndarray
    lattice: ReciprocalLattice
    fcs: FCSet


def extract(img, radius_cut=None, min_amp=DEFAULT_MIN_AMP) -> Extraction:
    """DFT, peak search, lattice fit and coefficient extraction for a square selection."""
    spec = dft2_centered(img)
    if radius_cut is None:
        radius_cut = default_radius_cut(spec.size)
    peaks = detect_peaks(amplitude_map(spec), min_amp=min_amp, radius_cut=radius_cut)
    lattice = fit_reciprocal_lattice(peaks, size=spec.size)
    fcs = index_and_extract(spec, lattice, radius_cut=radius_cut, min_amp=min_amp)
    logger.info("extracted %d coefficients, gamma* = %.2f", len(fcs), lattice.gamma_star)
    return Extraction(spec, peaks, lattice, fcs)


def model_groups(fcs: FCSet, groups: Sequence[str] = SELECTABLE, refine: bool = True) -> dict:
    """Build a :class:`GroupModel` for each group, in parallel when allowed."""
    groups = list(groups)
    workers = min(thread_count(), len(groups))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            models = list(pool.map(lambda g: build_group_model(fcs, g, refine), groups))
    else:
        models = [build_group_model(fcs, g, refine) for g in groups]
    return dict(zip(groups, models))


@dataclass
class Analysis:
    report: ClassificationReport
    residuals: dict
    models: dict = field(repr=False)
    extraction: Optional[Extraction] = field(default=None, repr=False)


def classify_fcs(fcs: FCSet, groups: Sequence[str] = SELECTABLE,
                 subset: Optional[Sequence[str]] = DEFAULT_SUBSET, refine: bool = True) -> Analysis:
    models = model_groups(fcs, groups, refine)
    residuals = {g: compute_residuals(m) for g, m in models.items()}
    return Analysis(classify(residuals, subset=subset), residuals, models)


def classify_image(img, selection: str = "square", size: Optional[int] = None, center=None,
                   radius_cut=None, min_amp=DEFAULT_MIN_AMP, groups: Sequence[str] = SELECTABLE,
                   subset: Optional[Sequence[str]] = DEFAULT_SUBSET) -> Analysis:
    """Run the full pipeline on a gray image.

    ``size`` defaults to the largest power of two fitting the image (at most
    1024).
    """
    img = np.asarray(img, dtype=float)
    if size is None:
        side = min(img.shape)
        size = 1 << int(np.floor(np.log2(side)))
        size = min(size, 1024)
    region = select_region(img, selection, size, center)
    ext = extract(region, radius_cut=radius_cut, min_amp=min_amp)
    out = classify_fcs(ext.fcs, groups, subset)
    out.extraction = ext
    return out


def residuals_from_pair(obs: FCSet, sym: Optional[FCSet], group) -> ResidualSet:
    """Residuals for externally supplied coefficients.

    Without symmetrized values the group is enforced internally (after
    completing Friedel mates). With them the pairs are used as given.
    """
    g = get_group(group)
    if sym is None:
        closed = obs.friedel_closed()
        model = build_group_model(closed, g, refine=g.name != "p1")
        return compute_residuals(model)
    if len(sym) != len(obs) or not np.array_equal(sym.hk, obs.hk):
        raise ValueError("observed and symmetrized indices differ")
    mask = obs.unique_mask() if obs.is_friedel_closed() else np.ones(len(obs), bool)
    o = FCSet(obs.hk[mask], obs.amplitude[mask], obs.phase[mask])
    s = FCSet(sym.hk[mask], sym.amplitude[mask], sym.phase[mask])
    o_n, s_n = normalize_amplitudes(o, s)
    phased = s_n.amplitude > 0
    phi = phase_residual((o_n.amplitude[phased], o_n.phase[phased]),
                         (s_n.amplitude[phased], s_n.phase[phased])) if phased.any() else 0.0
    ratio = extinction_ratio(o, g) if not g.centered else None
    return ResidualSet(amp_residual(o_n, s_n), phi, ratio, ssr_fc(o_n, s_n),
                       ssr_laue(o_n, s_n), int(mask.sum()))
