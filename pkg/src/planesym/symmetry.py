"""Orbits, symmetrization, origin refinement and Fourier synthesis.

A direct-space operation ``x -> W x + t`` relates structure factors by
``F(h W) = F(h) exp(-2 pi i h.t)``, with ``h = (h, k)`` a row vector. The phase
shift attached to the target index ``h W`` is therefore ``-360 h.t`` degrees.
An index mapped onto itself with a nonzero shift is systematically absent.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from .core import PlaneGroup, UnsupportedGroupError, get_group
from .spectrum import FCSet
from .validation import wrap_degrees

logger = logging.getLogger(__name__)

ORIGIN_STEPS = 200
_FLAT = 1e-9


class OrbitElement(NamedTuple):
    source: tuple
    target: tuple
    phase_shift: float


def _group(group) -> PlaneGroup:
    g = get_group(group)
    if g.centered:
        raise UnsupportedGroupError(f"{g.name} is centered and not supported here")
    return g


def orbit(group, h: int, k: int) -> list:
    """Images of ``(h, k)`` under every operation of ``group``, one per operation."""
    g = _group(group)
    if h == 0 and k == 0:
        raise ValueError("the DC term has no orbit")
    hk = np.array([h, k])
    out = []
    for w, t in g.operations:
        target = tuple(int(v) for v in hk @ w)
        out.append(OrbitElement((h, k), target, float(wrap_degrees(-360.0 * hk @ t))))
    return out


def _shifts(g: PlaneGroup, hk: np.ndarray):
    """Targets ``(n, k, 2)`` and phase shifts ``(n, k)`` for every index and operation."""
    targets = np.einsum("ni,jil->njl", hk, g.matrices)
    shifts = wrap_degrees(-360.0 * hk @ g.translations.T)
    return targets, shifts


def forbidden_mask(group, hk) -> np.ndarray:
    """True where an index is systematically absent in ``group``."""
    g = _group(group)
    hk = np.asarray(hk, dtype=int).reshape(-1, 2)
    targets, shifts = _shifts(g, hk)
    fixed = np.all(targets == hk[:, None, :], axis=2)
    return np.any(fixed & (np.abs(shifts) > 1e-9), axis=1)


def condition_class_mask(group, hk) -> np.ndarray:
    """True for indices subject to a reflection condition (fixed by a glide)."""
    g = _group(group)
    hk = np.asarray(hk, dtype=int).reshape(-1, 2)
    targets, _ = _shifts(g, hk)
    fixed = np.all(targets == hk[:, None, :], axis=2)
    glide = np.any(g.translations % 1.0 != 0, axis=1)
    return np.any(fixed & glide[None, :], axis=1)


def reflection_conditions(group):
    """Predicate ``f(h, k) -> bool`` that is True for forbidden reflections."""
    g = _group(group)

    def forbidden(h, k) -> bool:
        return bool(forbidden_mask(g, [[h, k]])[0])

    forbidden.group = g.name
    return forbidden


@dataclass
class _OrbitTable:
    """Lookup of orbit members present in an FC set, per index and operation."""

    member: np.ndarray   # (n, k) row index of target in the set, -1 if absent
    shift: np.ndarray    # (n, k) phase shift in degrees
    targets: np.ndarray  # (n, k, 2)
    forbidden: np.ndarray

    @classmethod
    def build(cls, fcs: FCSet, g: PlaneGroup):
        lookup = fcs.lookup()
        targets, shifts = _shifts(g, fcs.hk)
        member = np.array(
            [[lookup.get((int(a), int(b)), -1) for a, b in row] for row in targets],
            dtype=int,
        ).reshape(len(fcs), g.k)
        return cls(member, shifts, targets, forbidden_mask(g, fcs.hk))


def _require_closed(fcs: FCSet):
    if not fcs.is_friedel_closed():
        raise ValueError("FC set is not Friedel-closed")


def symmetrize_amplitudes(fcs: FCSet, group) -> np.ndarray:
    """Replace each orbit's amplitudes by the mean over members present in the set."""
    g = _group(group)
    table = _OrbitTable.build(fcs, g)
    present = table.member >= 0
    amps = np.where(present, fcs.amplitude[np.maximum(table.member, 0)], 0.0)
    out = amps.sum(axis=1) / present.sum(axis=1)
    out[table.forbidden] = 0.0
    return out


def _phase_sum(fcs: FCSet, table: _OrbitTable, phase=None) -> np.ndarray:
    phase = fcs.phase if phase is None else phase
    present = table.member >= 0
    idx = np.maximum(table.member, 0)
    terms = fcs.amplitude[idx] * np.exp(1j * np.radians(phase[idx] - table.shift))
    return np.where(present, terms, 0.0).sum(axis=1)


def symmetrize_phases(fcs: FCSet, group, return_flags: bool = False):
    """Amplitude-weighted circular mean of orbit phases (complex form).

    For every index the estimates ``F(hW_j) exp(-i s_j)`` from all present
    orbit members are summed and the argument is taken. Forbidden indices and
    vanishing sums get phase 0 and are flagged.
    """
    g = _group(group)
    table = _OrbitTable.build(fcs, g)
    total = _phase_sum(fcs, table)
    flags = (np.abs(total) <= 1e-12 * max(fcs.amplitude.max(initial=0.0), 1e-300)) | table.forbidden
    phases = np.where(flags, 0.0, wrap_degrees(np.degrees(np.angle(total))))
    return (phases, flags) if return_flags else phases


def symmetrize_phases_trig(fcs: FCSet, group) -> np.ndarray:
    """Same as :func:`symmetrize_phases` via the arctangent and quadrant rule.

    Shifts in the standard settings are multiples of 180 degrees, so each
    orbit member enters with a sign ``sigma = cos(shift)``.
    """
    g = _group(group)
    table = _OrbitTable.build(fcs, g)
    present = table.member >= 0
    idx = np.maximum(table.member, 0)
    sigma = np.round(np.cos(np.radians(table.shift)))
    if np.any(np.abs(np.sin(np.radians(table.shift))) > 1e-9):
        raise ValueError("trigonometric form needs shifts of 0 or 180 degrees")
    eta = np.where(present, fcs.amplitude[idx], 0.0)
    phi = np.radians(fcs.phase[idx])
    num = (sigma * eta * np.sin(phi)).sum(axis=1)
    den = (sigma * eta * np.cos(phi)).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        base = np.degrees(np.arctan(num / den))
    base = np.where(den == 0, np.sign(num) * 90.0, base)
    out = wrap_degrees(base + np.where(den < 0, 180.0, 0.0))
    out[table.forbidden] = 0.0
    return out


def symmetrize(fcs: FCSet, group, method: str = "mean") -> FCSet:
    """Enforce ``group`` on a Friedel-closed FC set.

    The unique Friedel half is symmetrized and mirrored by conjugation so the
    result stays exactly Friedel-closed.

    Parameters
    ----------
    fcs : FCSet
    group : str or PlaneGroup
    method : {"mean", "projection"}
        ``"mean"`` averages orbit amplitudes and takes the amplitude-weighted
        circular mean of the phases. ``"projection"`` replaces every orbit by
        the mean of its complex estimates, which is the orthogonal projection
        onto the symmetric coefficient sets; its residual can only grow when
        further symmetry is imposed.
    """
    _require_closed(fcs)
    g = _group(group)
    if method == "mean":
        amp = symmetrize_amplitudes(fcs, g)
        phase = symmetrize_phases(fcs, g)
    elif method == "projection":
        table = _OrbitTable.build(fcs, g)
        mean = _phase_sum(fcs, table) / (table.member >= 0).sum(axis=1)
        mean[table.forbidden] = 0.0
        amp = np.abs(mean)
        phase = np.where(amp > 0, wrap_degrees(np.degrees(np.angle(mean))), 0.0)
    else:
        raise ValueError(f"unknown method {method!r}")
    half = fcs.unique_mask()
    lookup = fcs.lookup()
    mate = np.array([lookup[(-int(h), -int(k))] for h, k in fcs.hk], dtype=int)
    amp = np.where(half, amp, amp[mate])
    phase = np.where(half, phase, wrap_degrees(-phase[mate]))
    zero = (fcs.hk[:, 0] == 0) & (fcs.hk[:, 1] == 0)
    phase[zero] = fcs.phase[zero]
    if method == "projection":
        amp[zero] = fcs.amplitude[zero]
    return fcs.copy(amplitude=amp, phase=phase)


def _phase_residual(obs_amp, obs_phase, sym_phase, mask):
    w = obs_amp[mask]
    if w.sum() <= 0:
        return 0.0
    d = np.abs(wrap_degrees(obs_phase[mask] - sym_phase[mask]))
    return float((w * d).sum() / w.sum())


def origin_residual(fcs: FCSet, group, shift) -> float:
    """Phase residual after moving the origin by a fractional ``shift``."""
    g = _group(group)
    moved = fcs.shift_origin(shift)
    table = _OrbitTable.build(moved, g)
    sym = symmetrize_phases(moved, g)
    mask = moved.unique_mask() & ~table.forbidden
    return _phase_residual(moved.amplitude, moved.phase, sym, mask)


class _OriginObjective:
    """Phase residual as a function of the origin shift, with orbit tables cached.

    For every unique, allowed index the estimates from its orbit members are
    stored relative to its own observed coefficient; moving the origin by
    ``s`` rotates estimate ``j`` by ``2 pi (h W_j - h).s``.
    """

    def __init__(self, fcs: FCSet, g: PlaneGroup):
        table = _OrbitTable.build(fcs, g)
        rows = np.nonzero(fcs.unique_mask() & ~table.forbidden)[0]
        present = table.member[rows] >= 0
        idx = np.maximum(table.member[rows], 0)
        coef = fcs.amplitude[idx] * np.exp(
            1j * np.radians(fcs.phase[idx] - table.shift[rows] - fcs.phase[rows][:, None]))
        self.coef = np.where(present, coef, 0.0)
        self.rel = (table.targets[rows] - fcs.hk[rows][:, None, :]).astype(float)
        self.weights = fcs.amplitude[rows]
        self.total_weight = self.weights.sum()

    def __call__(self, shift) -> float:
        if self.total_weight <= 0:
            return 0.0
        total = (self.coef * np.exp(2j * np.pi * (self.rel @ np.asarray(shift, float)))).sum(axis=1)
        return float(self.weights @ np.abs(np.angle(total, deg=True)) / self.total_weight)

    def grid(self, steps: int, chunk: int = 16) -> np.ndarray:
        """Residuals on a ``steps x steps`` grid over the cell."""
        acc = np.zeros((steps, steps))
        if self.total_weight <= 0:
            return acc
        grid = np.arange(steps) / steps
        for s in range(0, len(self.weights), chunk):
            sl = slice(s, s + chunk)
            px = np.exp(2j * np.pi * grid[None, :, None] * self.rel[sl, None, :, 0])
            py = np.exp(2j * np.pi * grid[None, :, None] * self.rel[sl, None, :, 1])
            total = np.matmul(px * self.coef[sl, None, :], py.transpose(0, 2, 1))
            acc += np.tensordot(self.weights[sl], np.abs(np.angle(total, deg=True)), axes=1)
        return acc / self.total_weight


def _wrapped_norm(shift) -> float:
    s = (np.asarray(shift, float) + 0.5) % 1.0 - 0.5
    s[np.isclose(s, -0.5)] = 0.5
    return float(np.hypot(*s))


def refine_origin(fcs: FCSet, group, steps: int = ORIGIN_STEPS):
    """Origin shift minimizing the phase residual.

    Exhaustive search on a ``steps x steps`` grid over the cell followed by a
    Nelder-Mead polish around the best grid point. Among equally good grid
    points the one closest to the current origin wins.

    Returns
    -------
    (x0, y0, residual)
        Shift to apply as ``phi -> phi + 360 (h x0 + k y0)``, wrapped to
        ``(-1/2, 1/2]``, and the residual there.
    """
    g = _group(group)
    if g.name == "p1":
        raise ValueError("origin refinement is undefined for p1")
    objective = _OriginObjective(fcs, g)
    res = objective.grid(steps)
    best = res.min()
    tol = _FLAT * max(1.0, best) + 1e-9
    cand = np.argwhere(res <= best + tol)
    norms = [_wrapped_norm(c / steps) for c in cand]
    shift = cand[int(np.argmin(norms))] / steps
    value = objective(shift)
    # the residual has kinks along oblique valleys, so polish in 2-D
    step = 1.0 / steps
    opt = minimize(objective, shift, method="Nelder-Mead",
                   options={"initial_simplex": [shift, shift + [step, 0], shift + [0, step]],
                            "xatol": 1e-7, "fatol": 1e-10})
    if opt.fun < value - 1e-12 and np.all(np.abs(opt.x - shift) <= 2 * step):
        shift, value = np.asarray(opt.x, float), float(opt.fun)
    shift = (shift + 0.5) % 1.0 - 0.5
    shift[np.isclose(shift, -0.5)] = 0.5
    return float(shift[0]), float(shift[1]), float(value)


@dataclass
class GroupModel:
    """Observed and symmetrized coefficients for one plane-group setting."""

    group: PlaneGroup
    origin_shift: tuple
    fcs_obs: FCSet
    fcs_sym: FCSet
    forbidden: np.ndarray = field(repr=False)

    @property
    def mask(self) -> np.ndarray:
        """Coefficients entering the residuals: one per Friedel pair."""
        return self.fcs_obs.unique_mask()

    @property
    def N(self) -> int:
        return int(self.mask.sum())


def build_group_model(fcs: FCSet, group, refine: bool = True, origin=None,
                      method: str = "mean") -> GroupModel:
    """Move to the refined origin (unless given or disabled) and symmetrize."""
    g = _group(group)
    _require_closed(fcs)
    if origin is not None:
        shift = tuple(float(v) for v in origin)
    elif refine and g.name != "p1":
        x0, y0, _ = refine_origin(fcs, g)
        shift = (x0, y0)
    else:
        shift = (0.0, 0.0)
    obs = fcs.shift_origin(shift) if any(shift) else fcs
    sym = symmetrize(obs, g, method)
    return GroupModel(g, shift, obs, sym, forbidden_mask(g, obs.hk))


def synthesize_image(fcs: FCSet, size: int, lattice=None) -> np.ndarray:
    """Real-space image from a Friedel-closed coefficient list.

    Coefficients are placed at ``h a* + k b*`` (rounded to the nearest grid
    point) when a reciprocal lattice is given, otherwise at ``(u, v) = (h, k)``.
    """
    if not fcs.is_friedel_closed():
        raise ValueError("synthesis of a non-Friedel-closed set gives a complex image")
    grid = np.zeros((size, size), dtype=complex)
    if len(fcs):
        pos = fcs.hk.astype(float) if lattice is None else fcs.hk @ lattice.matrix
        uv = np.round(pos).astype(int)
        np.add.at(grid, ((uv[:, 1] + size // 2) % size, (uv[:, 0] + size // 2) % size), fcs.complex())
    out = np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(grid))) / (size * size)
    return out.real
