"""Centered 2-D DFT, peak finding, reciprocal-lattice fitting and FC extraction.

Sign conventions: the forward transform uses ``exp(+2 pi i (x u + y v) / Q)``
with pixel coordinates ``x, y`` running from ``-Q/2`` to ``Q/2 - 1`` (origin
at the image centre); the inverse uses the negative exponent and a ``1/Q**2``
factor. Spectrum arrays are stored centred: ``data[v + Q//2, u + Q//2]``.
Reciprocal vectors are in grid units (cycles per selection width).
"""
from __future__ import annotations

import csv
import itertools
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np
from PIL import Image
from scipy import ndimage

from .validation import check_image, wrap_degrees

logger = logging.getLogger(__name__)

DEFAULT_MIN_AMP = 5e-3
MIN_PEAKS = 5


class InsufficientPeriodicityError(ValueError):
    """Too few structure-bearing peaks to fit a lattice."""


class DegenerateLatticeError(ValueError):
    """Peaks do not span two independent lattice directions."""


def default_radius_cut(size: int) -> float:
    """128 px for a 1024 selection, 256 px for 2048, i.e. one eighth of the side."""
    return size / 8.0


@dataclass(frozen=True)
class Spectrum:
    data: np.ndarray

    @property
    def size(self) -> int:
        return self.data.shape[0]

    def __getitem__(self, uv):
        u, v = uv
        q = self.size
        return self.data[(v + q // 2) % q, (u + q // 2) % q]

    def frequencies(self):
        """Centred integer frequency axes ``(u, v)`` matching ``data`` columns/rows."""
        q = self.size
        ax = np.arange(q) - q // 2
        return ax, ax


def dft2_centered(img) -> Spectrum:
    img = check_image(img, square=True, power_of_two=True)
    q = img.shape[0]
    data = q * q * np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(img)))
    return Spectrum(data)


def idft2_centered(spec) -> np.ndarray:
    """Inverse of :func:`dft2_centered`; returns the real part."""
    data = spec.data if isinstance(spec, Spectrum) else np.asarray(spec)
    q = data.shape[0]
    out = np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(data))) / (q * q)
    return out.real


def amplitude_map(spec) -> np.ndarray:
    data = spec.data if isinstance(spec, Spectrum) else np.asarray(spec)
    return np.abs(data)


def power_spectrum(spec) -> np.ndarray:
    return amplitude_map(spec) ** 2


def save_amplitude_png(path, spec) -> None:
    """Dump ``log(1 + |R|)`` scaled to the full 16-bit range."""
    amp = np.log1p(amplitude_map(spec))
    top = amp.max()
    scaled = amp / top if top > 0 else amp
    Image.fromarray(np.round(scaled * 65535).astype(np.uint16)).save(
        Path(path), format="PNG"
    )


def _radius_grid(q):
    ax = np.arange(q) - q // 2
    return np.hypot(ax[None, :], ax[:, None])


def detect_peaks(ampmap, min_amp=DEFAULT_MIN_AMP, radius_cut=None) -> np.ndarray:
    """Local maxima of a centred amplitude map, refined to subpixel positions.

    Parameters
    ----------
    ampmap : ndarray
        Centred ``Q x Q`` amplitude map.
    min_amp : float
        Threshold as a fraction of the largest amplitude off the DC term.
    radius_cut : float, optional
        Only maxima within this many pixels of the centre are kept.

    Returns
    -------
    ndarray, shape (n, 2)
        Peak positions ``(u, v)`` relative to the centre, strongest first.
    """
    amp = np.asarray(ampmap, dtype=float)
    q = amp.shape[0]
    r = _radius_grid(q)
    if radius_cut is None:
        radius_cut = default_radius_cut(q)
    usable = (r > 1.5) & (r <= radius_cut)
    work = np.where(r > 1.5, amp, 0.0)
    top = work[usable].max(initial=0.0)
    if top <= 0:
        raise InsufficientPeriodicityError("insufficient periodic repeats: flat spectrum")
    is_max = (work == ndimage.maximum_filter(work, size=3, mode="wrap")) & usable
    is_max &= work >= min_amp * top
    rows, cols = np.nonzero(is_max)
    if len(rows) < MIN_PEAKS:
        raise InsufficientPeriodicityError(
            f"insufficient periodic repeats: {len(rows)} peaks above threshold"
        )
    offs = np.array([-1, 0, 1])
    win = work[(rows[:, None, None] + offs[None, :, None]) % q,
               (cols[:, None, None] + offs[None, None, :]) % q]
    total = win.sum(axis=(1, 2))
    dv = (win.sum(axis=2) * offs).sum(axis=1) / total
    du = (win.sum(axis=1) * offs).sum(axis=1) / total
    pos = np.column_stack([cols - q // 2 + du, rows - q // 2 + dv])
    order = np.argsort(-work[rows, cols], kind="stable")
    return pos[order]


@dataclass(frozen=True)
class ReciprocalLattice:
    """Reciprocal basis in grid units of a ``size``-pixel selection."""

    a_star: np.ndarray
    b_star: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return np.vstack([self.a_star, self.b_star])

    @property
    def gamma_star(self) -> float:
        a, b = self.a_star, self.b_star
        c = np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
        return float(np.degrees(np.arccos(np.clip(c, -1, 1))))

    def node(self, h, k) -> np.ndarray:
        return np.outer(np.atleast_1d(h), self.a_star) + np.outer(np.atleast_1d(k), self.b_star)

    def index(self, positions) -> np.ndarray:
        """Fractional lattice coordinates of grid positions."""
        return np.asarray(positions, float) @ np.linalg.inv(self.matrix)


def _reduce(v1, v2):
    """Lagrange-Gauss reduction of a 2-D basis."""
    v1, v2 = np.asarray(v1, float), np.asarray(v2, float)
    for _ in range(100):
        if v1 @ v1 > v2 @ v2:
            v1, v2 = v2, v1
        m = np.round((v1 @ v2) / (v1 @ v1))
        if m == 0:
            break
        v2 = v2 - m * v1
    return v1, v2


def _orient(v1, v2, size=1.0):
    """Pick the conventional reduced basis: acute gamma*, a closest to +x, det>0."""
    base_det = abs(v1[0] * v2[1] - v1[1] * v2[0])
    longest = max(np.linalg.norm(v1), np.linalg.norm(v2)) * 1.02
    pool = [s * v for v in (v1, v2, v1 + v2, v1 - v2) for s in (1, -1)]
    best, best_key = None, None
    for a_s, b_s in itertools.permutations(pool, 2):
        det = a_s[0] * b_s[1] - a_s[1] * b_s[0]
        if abs(abs(det) - base_det) > 1e-6 * base_det:
            continue
        la, lb = np.linalg.norm(a_s), np.linalg.norm(b_s)
        if max(la, lb) > longest or a_s @ b_s < -0.02 * la * lb:
            continue
        direct = size * np.linalg.inv(np.vstack([a_s, b_s]))
        a, b = direct[:, 0], direct[:, 1]
        key = (round(a[0] / np.linalg.norm(a), 3), a[0] * b[1] - a[1] * b[0] > 0,
               round(b[1] / np.linalg.norm(b), 3))
        if best_key is None or key > best_key:
            best, best_key = (a_s, b_s), key
    return best


def _candidate_vectors(pts, min_len=2.0, keep=12):
    diffs = (pts[:, None, :] - pts[None, :, :]).reshape(-1, 2)
    vecs = np.vstack([pts, diffs])
    vecs = vecs[np.hypot(*vecs.T) >= min_len]
    flip = (vecs[:, 0] < 0) | ((vecs[:, 0] == 0) & (vecs[:, 1] < 0))
    vecs[flip] *= -1
    vecs = vecs[np.argsort(np.hypot(*vecs.T), kind="stable")]
    chosen = []
    for v in vecs:
        if all(np.hypot(*(v - c)) > 0.75 for c in chosen):
            chosen.append(v)
            if len(chosen) == keep:
                break
    return chosen


def _assign_refine(pts, basis, tol, rounds=2):
    for _ in range(rounds):
        frac = pts @ np.linalg.inv(basis)
        hk = np.round(frac)
        ok = (np.abs(frac - hk).max(axis=1) < tol) & np.any(hk != 0, axis=1)
        if ok.sum() < 3:
            break
        sol, *_ = np.linalg.lstsq(hk[ok], pts[ok], rcond=None)
        if abs(np.linalg.det(sol)) < 1e-9:
            break
        basis = sol
    return basis


def fit_reciprocal_lattice(peaks, size: int = 1, tol: float = 0.2) -> ReciprocalLattice:
    """Least-squares reciprocal basis for a set of peak positions.

    Integer indices are found by trying pairs of short candidate vectors and
    keeping the coarsest lattice that indexes (nearly) every strong peak; the
    basis is then refined by alternating index assignment and linear least
    squares, reduced and put in the conventional orientation.
    """
    pts = np.asarray(peaks, dtype=float).reshape(-1, 2)
    if len(pts) < MIN_PEAKS:
        raise InsufficientPeriodicityError(f"need at least {MIN_PEAKS} peaks, got {len(pts)}")
    strong = pts[:40]
    cands = _candidate_vectors(strong[:20])
    scored = []
    for v1, v2 in itertools.combinations(cands, 2):
        det = v1[0] * v2[1] - v1[1] * v2[0]
        if abs(det) < 0.2 * np.hypot(*v1) * np.hypot(*v2):
            continue
        basis = np.vstack([v1, v2])
        frac = strong @ np.linalg.inv(basis)
        hits = int((np.abs(frac - np.round(frac)).max(axis=1) < tol).sum())
        scored.append((hits, abs(det), basis))
    if not scored:
        raise DegenerateLatticeError("peaks are collinear; no 2-D lattice")
    most = max(s[0] for s in scored)
    good = [s for s in scored if s[0] >= 0.95 * most]
    _, _, basis = max(good, key=lambda s: s[1])
    basis = _assign_refine(pts, basis, tol=0.25)
    v1, v2 = _reduce(*basis)
    if abs(v1[0] * v2[1] - v1[1] * v2[0]) < 1e-9:
        raise DegenerateLatticeError("fitted basis is singular")
    a_s, b_s = _orient(v1, v2, size)
    return ReciprocalLattice(np.asarray(a_s, float), np.asarray(b_s, float))


def direct_lattice(lattice: ReciprocalLattice, size: float = 1.0):
    """Direct basis ``(a, b, gamma)`` in pixels and degrees.

    ``a_star . a = b_star . b = 1`` and ``a_star . b = b_star . a = 0`` with the
    reciprocal vectors expressed in cycles per pixel (grid units / ``size``).
    """
    m = lattice.matrix / float(size)
    if abs(np.linalg.det(m)) < 1e-15:
        raise DegenerateLatticeError("singular reciprocal basis")
    direct = np.linalg.inv(m)
    a, b = direct[:, 0], direct[:, 1]
    gamma = np.degrees(np.arccos(np.clip(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)), -1, 1)))
    return a, b, float(gamma)


class IndexedFC(NamedTuple):
    h: int
    k: int
    amplitude: float
    phase: float


class FCSet:
    """Indexed structure-bearing Fourier coefficients (amplitudes, phases in degrees)."""

    def __init__(self, hk, amplitude, phase):
        self.hk = np.asarray(hk, dtype=int).reshape(-1, 2)
        self.amplitude = np.asarray(amplitude, dtype=float).reshape(-1)
        self.phase = wrap_degrees(np.asarray(phase, dtype=float).reshape(-1))
        if not (len(self.hk) == len(self.amplitude) == len(self.phase)):
            raise ValueError("hk, amplitude and phase lengths differ")

    @classmethod
    def from_complex(cls, hk, values):
        values = np.asarray(values, dtype=complex)
        return cls(hk, np.abs(values), np.degrees(np.angle(values)))

    @classmethod
    def from_records(cls, records):
        records = list(records)
        if not records:
            return cls(np.zeros((0, 2), int), [], [])
        arr = np.array([(r[0], r[1], r[2], r[3]) for r in records], dtype=float)
        return cls(arr[:, :2].astype(int), arr[:, 2], arr[:, 3])

    def __len__(self):
        return len(self.amplitude)

    def __iter__(self) -> Iterator[IndexedFC]:
        for (h, k), a, p in zip(self.hk, self.amplitude, self.phase):
            yield IndexedFC(int(h), int(k), float(a), float(p))

    def __repr__(self):
        return f"FCSet(n={len(self)})"

    def complex(self) -> np.ndarray:
        return self.amplitude * np.exp(1j * np.radians(self.phase))

    def copy(self, amplitude=None, phase=None):
        return FCSet(self.hk.copy(),
                     self.amplitude.copy() if amplitude is None else amplitude,
                     self.phase.copy() if phase is None else phase)

    def lookup(self) -> dict:
        return {(int(h), int(k)): i for i, (h, k) in enumerate(self.hk)}

    def unique_mask(self) -> np.ndarray:
        """One representative of each Friedel pair: ``h > 0`` or ``h == 0, k > 0``."""
        h, k = self.hk[:, 0], self.hk[:, 1]
        return (h > 0) | ((h == 0) & (k > 0))

    def is_friedel_closed(self) -> bool:
        idx = self.lookup()
        for i, (h, k) in enumerate(self.hk):
            j = idx.get((-int(h), -int(k)))
            if j is None:
                return False
            if not np.isclose(self.amplitude[i], self.amplitude[j]):
                return False
            if (h, k) != (0, 0) and abs(wrap_degrees(self.phase[i] + self.phase[j])) > 1e-6:
                return False
        return True

    def friedel_closed(self):
        """Complete the set with conjugate mates (existing mates are kept)."""
        idx = self.lookup()
        extra = [i for i, (h, k) in enumerate(self.hk) if (-int(h), -int(k)) not in idx]
        if not extra:
            return self
        hk = np.vstack([self.hk, -self.hk[extra]])
        return FCSet(hk, np.concatenate([self.amplitude, self.amplitude[extra]]),
                     np.concatenate([self.phase, -self.phase[extra]]))

    def shift_origin(self, shift):
        """Apply ``phi -> phi + 360 (h x0 + k y0)`` for a fractional shift."""
        ramp = 360.0 * (self.hk @ np.asarray(shift, float))
        return self.copy(phase=wrap_degrees(self.phase + ramp))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["h", "k", "amp", "phase"])
            for fc in self:
                w.writerow([fc.h, fc.k, repr(fc.amplitude), repr(fc.phase)])


def index_and_extract(spec: Spectrum, lattice: ReciprocalLattice, radius_cut=None,
                      min_amp=DEFAULT_MIN_AMP) -> FCSet:
    """Integrate the spectrum at every reciprocal-lattice node inside ``radius_cut``.

    Each coefficient is the complex sum over the 3x3 window around the grid
    point nearest the predicted node. Nodes weaker than ``min_amp`` times the
    strongest extracted amplitude are dropped. The result is Friedel-closed
    by construction.
    """
    q = spec.size
    if radius_cut is None:
        radius_cut = default_radius_cut(q)
    a, b, _ = direct_lattice(lattice, q)
    hmax = int(np.ceil(radius_cut * np.linalg.norm(a) / q)) + 1
    kmax = int(np.ceil(radius_cut * np.linalg.norm(b) / q)) + 1
    hh, kk = np.meshgrid(np.arange(0, hmax + 1), np.arange(-kmax, kmax + 1), indexing="ij")
    hk = np.column_stack([hh.ravel(), kk.ravel()])
    hk = hk[(hk[:, 0] > 0) | ((hk[:, 0] == 0) & (hk[:, 1] > 0))]
    nodes = hk @ lattice.matrix
    hk = hk[np.hypot(*nodes.T) <= radius_cut]
    nodes = hk @ lattice.matrix
    if len(hk) == 0:
        return FCSet(np.zeros((0, 2), int), [], [])
    centre = np.round(nodes).astype(int)
    offs = np.array([-1, 0, 1])
    rows = (centre[:, 1, None, None] + offs[None, :, None] + q // 2) % q
    cols = (centre[:, 0, None, None] + offs[None, None, :] + q // 2) % q
    values = spec.data[rows, cols].sum(axis=(1, 2))
    amps = np.abs(values)
    top = amps.max()
    keep = amps >= min_amp * top if top > 0 else np.zeros(len(amps), bool)
    hk, values = hk[keep], values[keep]
    half = FCSet.from_complex(hk, values)
    return FCSet(np.vstack([half.hk, -half.hk]),
                 np.concatenate([half.amplitude, half.amplitude]),
                 np.concatenate([half.phase, wrap_degrees(-half.phase)]))
