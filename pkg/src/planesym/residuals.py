"""Figures of merit comparing observed and symmetrized Fourier coefficients.

Traditional residuals (amplitude and phase residuals, extinction ratio) are
kept for comparison with established practice; the sums of squared residuals
``J_FC`` and ``J_L`` are the ones that feed model selection.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

from .spectrum import FCSet
from .symmetry import GroupModel, _group, condition_class_mask, forbidden_mask
from .validation import wrap_degrees


def _amps(x) -> np.ndarray:
    if isinstance(x, FCSet):
        return x.amplitude
    return np.asarray(x, dtype=float).reshape(-1)


def _amp_phase(x):
    if isinstance(x, FCSet):
        return x.amplitude, x.phase
    amp, phase = x
    return np.asarray(amp, float).reshape(-1), np.asarray(phase, float).reshape(-1)


def _same_length(a, b):
    if len(a) != len(b):
        raise ValueError(f"paired lists differ in length ({len(a)} vs {len(b)})")


def amp_residual(obs, sym) -> float:
    """Amplitude residual in percent: ``100 sum||Fo| - |Fs|| / sum|Fo|``."""
    a, b = _amps(obs), _amps(sym)
    _same_length(a, b)
    total = np.abs(a).sum()
    if total == 0:
        raise ValueError("observed amplitudes are all zero")
    return float(100.0 * np.abs(np.abs(a) - np.abs(b)).sum() / total)


def phase_residual(obs, sym) -> float:
    """Amplitude-weighted mean absolute phase difference in degrees.

    ``obs`` and ``sym`` are FC sets or ``(amplitude, phase)`` pairs; differences
    are wrapped into ``[-180, 180)`` before taking the absolute value.
    """
    ao, po = _amp_phase(obs)
    _, ps = _amp_phase(sym)
    _same_length(po, ps)
    w = ao.sum()
    if w <= 0:
        raise ValueError("zero total weight in phase residual")
    return float((ao * np.abs(wrap_degrees(po - ps))).sum() / w)


def extinction_ratio(obs, group) -> Optional[float]:
    """Mean observed amplitude of forbidden FCs over that of allowed FCs in the same index classes.

    Returns ``None`` for groups without reflection conditions.
    """
    g = _group(group)
    if not g.has_glides:
        return None
    if not isinstance(obs, FCSet):
        hk, amp = obs
        obs = FCSet(hk, amp, np.zeros(len(amp)))
    forb = forbidden_mask(g, obs.hk)
    allowed = condition_class_mask(g, obs.hk) & ~forb
    if not forb.any():
        return 0.0
    if not allowed.any():
        return float("inf")
    return float(obs.amplitude[forb].mean() / obs.amplitude[allowed].mean())


def normalize_amplitudes(obs: FCSet, sym: Optional[FCSet] = None):
    """Divide observed (and symmetrized) amplitudes by the largest observed amplitude."""
    top = obs.amplitude.max(initial=0.0)
    if top <= 0:
        raise ValueError("cannot normalize: maximum observed amplitude is zero")
    obs_n = obs.copy(amplitude=obs.amplitude / top)
    if sym is None:
        return obs_n
    return obs_n, sym.copy(amplitude=sym.amplitude / top)


def ssr_fc(obs, sym) -> float:
    """Sum of squared moduli of complex differences, ``sum|Fo - Fs|^2``."""
    ao, po = _amp_phase(obs)
    as_, ps = _amp_phase(sym)
    _same_length(ao, as_)
    d = ao * np.exp(1j * np.radians(po)) - as_ * np.exp(1j * np.radians(ps))
    return float(np.sum(d.real ** 2 + d.imag ** 2))


def ssr_laue(obs, sym) -> float:
    """Sum of squared amplitude differences, ``sum(|Fo| - |Fs|)^2``."""
    a, b = _amps(obs), _amps(sym)
    _same_length(a, b)
    return float(np.sum((np.abs(a) - np.abs(b)) ** 2))


@dataclass(frozen=True)
class ResidualSet:
    F_res: float
    phi_res: float
    Ao_over_Ae: Optional[float]
    J_FC: float
    J_L: float
    N: int

    def as_dict(self) -> dict:
        return asdict(self)


def _subset(fcs: FCSet, mask) -> FCSet:
    return FCSet(fcs.hk[mask], fcs.amplitude[mask], fcs.phase[mask])


def compute_residuals(model: GroupModel) -> ResidualSet:
    """All residuals for a group model, over one coefficient per Friedel pair.

    Forbidden reflections count towards the amplitude residual and the sums of
    squares (their symmetrized value is zero) but not towards the phase
    residual, where the symmetrized phase is undefined.
    """
    mask = model.mask
    obs_n, sym_n = normalize_amplitudes(_subset(model.fcs_obs, mask), _subset(model.fcs_sym, mask))
    phased = ~model.forbidden[mask]
    if phased.any():
        phi = phase_residual(_subset(obs_n, phased), _subset(sym_n, phased))
    else:
        phi = 0.0
    return ResidualSet(
        F_res=amp_residual(obs_n, sym_n),
        phi_res=phi,
        Ao_over_Ae=extinction_ratio(model.fcs_obs, model.group),
        J_FC=ssr_fc(obs_n, sym_n),
        J_L=ssr_laue(obs_n, sym_n),
        N=int(mask.sum()),
    )
