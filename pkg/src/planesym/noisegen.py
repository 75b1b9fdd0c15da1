"""Synthetic wallpaper patterns and the two noise models used for testing.

Patterns are built in fractional cell coordinates on an ``M x M`` grid, where
every plane-group operation maps grid points onto grid points, so the cell is
exactly symmetric. The cell is then rendered into a square raster through its
Fourier coefficients on a reciprocal lattice snapped to integer frequencies,
which makes the raster exactly periodic and free of resampling error.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, asdict

import numpy as np

from .core import get_group
from .spectrum import ReciprocalLattice
from .validation import check_image, is_power_of_two

logger = logging.getLogger(__name__)

RGB_SIGMA = 0.25


@dataclass(frozen=True)
class NoiseSpec:
    rgb_level: float = 0.0
    spread_distance: int = 0
    seed: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def _rng(seed, stream: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, stream)``."""
    return np.random.Generator(np.random.Philox(key=[int(seed) & (2**64 - 1), stream]))


def _op_indices(g, m: int):
    """Grid images ``(k, M, M, 2)`` of every fractional grid point under each operation."""
    if m % 2:
        raise ValueError("cell grid size must be even")
    i, j = np.meshgrid(np.arange(m), np.arange(m), indexing="xy")
    pts = np.stack([i, j], axis=-1)  # [row=j, col=i] -> (xi, eta) grid indices
    out = []
    for w, t in g.operations:
        moved = np.einsum("ab,rcb->rca", w, pts) + np.round(t * m).astype(int)
        out.append(moved % m)
    return np.stack(out)


def symmetrize_cell(cell, group) -> np.ndarray:
    """Average a cell over the orbit of every grid point (exactly symmetric result).

    ``cell`` is an ``M x M`` array indexed ``[eta, xi]`` in fractional units.
    """
    g = get_group(group)
    cell = np.asarray(cell, dtype=float)
    idx = _op_indices(g, cell.shape[0])
    return np.mean([cell[p[..., 1], p[..., 0]] for p in idx], axis=0)


def place_motif(motif, group) -> np.ndarray:
    """Copy a motif to every symmetry-equivalent position, later writers winning.

    Undefined motif pixels (NaN) are transparent. Overwriting a different
    motif value triggers a warning since it means the motif is larger than
    the asymmetric unit. Pixels left empty are filled with the motif mean.
    """
    g = get_group(group)
    motif = np.asarray(motif, dtype=float)
    m = motif.shape[0]
    cell = np.full_like(motif, np.nan)
    defined = ~np.isnan(motif)
    clash = False
    for p in _op_indices(g, m):
        rows, cols = p[..., 1][defined], p[..., 0][defined]
        prev = cell[rows, cols]
        vals = motif[defined]
        clash |= bool(np.any(~np.isnan(prev) & ~np.isclose(prev, vals)))
        cell[rows, cols] = vals
    if clash:
        warnings.warn("motif exceeds the asymmetric unit; overlapping copies overwritten",
                      RuntimeWarning, stacklevel=2)
    fill = np.nanmean(motif) if defined.any() else 0.0
    return np.where(np.isnan(cell), fill, cell)


def blob_cell(m: int, n_blobs: int = 6, seed: int = 0, width=(0.02, 0.05)) -> np.ndarray:
    """Random periodic field of Gaussian blobs on an ``M x M`` fractional grid."""
    rng = _rng(seed, 1)
    ax = np.arange(m) / m
    cell = np.zeros((m, m))
    for _ in range(n_blobs):
        cx, cy = rng.random(2)
        s = rng.uniform(*width)
        amp = rng.uniform(0.5, 1.0)
        dx = (ax - cx + 0.5) % 1.0 - 0.5
        dy = (ax - cy + 0.5) % 1.0 - 0.5
        cell += amp * np.exp(-(dy[:, None] ** 2 + dx[None, :] ** 2) / (2 * s * s))
    return cell


def pattern_cell(group, m: int = 96, seed: int = 0, n_blobs: int = 6) -> np.ndarray:
    """Symmetric cell of a random blob motif for ``group``."""
    return symmetrize_cell(blob_cell(m, n_blobs, seed), group)


def pseudo_hexagonal_cell(m: int = 96, seed: int = 0, perturbation: float = 0.25) -> np.ndarray:
    """A p2 cell close to p6: a sixfold pattern plus a weaker twofold-only part.

    On a hexagonal lattice this reproduces the pseudosymmetry signature of a
    p2 pattern with strong threefold motif pseudosymmetry, where the p3 and
    p6 models fit almost equally well.
    """
    six = symmetrize_cell(blob_cell(m, 5, seed), "p6")
    two = symmetrize_cell(blob_cell(m, 3, seed + 7919, width=(0.04, 0.07)), "p2")
    return six + perturbation * (two - two.mean())


def _snapped_lattice(a: float, b: float, gamma: float, size: int) -> ReciprocalLattice:
    """Reciprocal basis with integer grid coordinates closest to the requested cell.

    Direct ``a`` points along +x and ``b`` lies at ``gamma`` from it, towards +y.
    """
    g = math.radians(gamma)
    direct = np.array([[a, b * math.cos(g)], [0.0, b * math.sin(g)]])  # columns a, b
    recip = size * np.linalg.inv(direct)  # rows a*, b*
    snapped = np.round(recip)
    if abs(np.linalg.det(snapped)) < 0.5:
        raise ValueError("cell too large for the raster")
    return ReciprocalLattice(snapped[0], snapped[1])


def render_wallpaper(motif, group, cell, repeats=None, size: int = None,
                     bandwidth: float = None, mode: str = "auto",
                     levels: tuple = (0.1, 0.9), offset=(0.0, 0.0)) -> np.ndarray:
    """Render a plane-group pattern into a square raster.

    Parameters
    ----------
    motif : ndarray
        ``M x M`` array (``M`` even) over the unit cell in fractional
        coordinates, indexed ``[eta, xi]``. NaN marks undefined pixels.
    group : str
        Primitive plane-group setting.
    cell : (a, b, gamma)
        Cell lengths in pixels and the angle in degrees. The reciprocal basis
        is rounded to integer frequencies, so the realized cell may differ
        slightly.
    repeats : (nx, ny), optional
        Used to choose ``size`` when it is not given: the smallest power of
        two holding ``nx`` cells along x and ``ny`` along y.
    size : int, optional
        Side of the square output raster (power of two).
    bandwidth : float, optional
        Width, in pixels of frequency, of a smooth orbit-symmetric Gaussian
        taper on the coefficients; ``None`` keeps the full band.
    mode : {"auto", "average", "place"}
        ``average`` symmetrizes the motif by orbit averaging, ``place`` copies
        it with :func:`place_motif`; ``auto`` places when the motif has NaNs.
    levels : (lo, hi)
        Output intensity range, or ``None`` to keep the raw synthesis.
    offset : (dx, dy)
        Position of the cell origin relative to the raster centre, in pixels.

    Returns
    -------
    ndarray
        The pattern, with the cell origin at the raster centre plus ``offset``.
    """
    g = get_group(group)
    if g.centered:
        raise ValueError(f"{g.name} is centered; only primitive settings are rendered")
    motif = np.asarray(motif, dtype=float)
    m = motif.shape[0]
    if motif.shape != (m, m) or m % 2:
        raise ValueError("motif must be a square array with an even side")
    if mode == "auto":
        mode = "place" if np.isnan(motif).any() else "average"
    cellgrid = place_motif(motif, g) if mode == "place" else symmetrize_cell(motif, g)

    a, b, gamma = cell
    if size is None:
        nx, ny = repeats if repeats is not None else (1, 1)
        need = max(nx * a, ny * b * math.sin(math.radians(gamma)))
        size = 1 << max(int(math.ceil(math.log2(max(need, 2)) - 1e-9)), 1)
    if not is_power_of_two(size):
        raise ValueError("size must be a power of two")
    lat = _snapped_lattice(a, b, gamma, size)

    # coefficients of rho(x) = sum F(h) exp(-2 pi i h.x)
    F = np.fft.ifft2(cellgrid)  # axis 0 -> k (eta), axis 1 -> h (xi)
    hmax = m // 2 - 1
    hs = np.arange(-hmax, hmax + 1)
    hh, kk = np.meshgrid(hs, hs, indexing="xy")
    hk = np.column_stack([hh.ravel(), kk.ravel()])
    coef = F[hk[:, 1] % m, hk[:, 0] % m]
    if bandwidth is not None:
        r2 = np.zeros(len(hk))
        for w in g.matrices:
            u = (hk @ w) @ lat.matrix
            r2 += (u ** 2).sum(axis=1)
        r2 /= g.k
        coef = coef * np.exp(-0.5 * r2 / bandwidth ** 2)
    uv = np.round(hk @ lat.matrix).astype(int)
    coef = coef * np.exp(2j * np.pi * (uv @ np.asarray(offset, float)) / size)
    inside = np.all(np.abs(uv) < size // 2, axis=1)
    grid = np.zeros((size, size), dtype=complex)
    np.add.at(grid, ((uv[inside, 1] + size // 2) % size, (uv[inside, 0] + size // 2) % size),
              size * size * coef[inside])
    img = (np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(grid))) / (size * size)).real
    if levels is not None:
        lo, hi = levels
        span = img.max() - img.min()
        img = lo + (hi - lo) * (img - img.min()) / span if span > 0 else np.full_like(img, (lo + hi) / 2)
    return img


def render_lattice(a: float, b: float, gamma: float, size: int) -> ReciprocalLattice:
    """Reciprocal lattice actually realized by :func:`render_wallpaper`."""
    return _snapped_lattice(a, b, gamma, size)


def quantize(img, bits: int = 8) -> np.ndarray:
    """Round intensities in ``[0, 1]`` to ``2**bits`` levels."""
    top = (1 << bits) - 1
    return np.round(np.clip(check_image(img), 0.0, 1.0) * top) / top


def add_rgb_noise(img, level: float, seed: int = 0) -> np.ndarray:
    """Add zero-mean Gaussian gray-level noise of standard deviation ``0.25 * level``."""
    img = check_image(img)
    if not 0.0 <= level <= 1.0:
        raise ValueError("noise level must lie in [0, 1]")
    if level == 0:
        return img.copy()
    noise = _rng(seed, 2).standard_normal(img.size).reshape(img.shape)
    return np.clip(img + RGB_SIGMA * level * noise, 0.0, 1.0)


def add_spread_noise(img, distance: int, seed: int = 0) -> np.ndarray:
    """Swap each pixel, in raster order, with a random partner within ``distance``.

    Offsets are uniform integers in ``[-distance, distance]`` per axis and the
    partner position is clipped to the image. The result is a permutation of
    the input pixel values.
    """
    img = check_image(img)
    d = int(distance)
    if d < 0:
        raise ValueError("spread distance must be nonnegative")
    if d == 0:
        return img.copy()
    h, w = img.shape
    rng = _rng(seed, 3)
    offs = rng.integers(-d, d + 1, size=(h * w, 2))
    ys, xs = np.divmod(np.arange(h * w), w)
    py = np.clip(ys + offs[:, 1], 0, h - 1)
    px = np.clip(xs + offs[:, 0], 0, w - 1)
    partner = (py * w + px).tolist()
    flat = img.ravel().tolist()
    for i, j in enumerate(partner):
        flat[i], flat[j] = flat[j], flat[i]
    return np.array(flat).reshape(h, w)


def apply_noise(img, spec: NoiseSpec) -> np.ndarray:
    """RGB noise first, then spread noise, both seeded from ``spec.seed``."""
    out = add_rgb_noise(img, spec.rgb_level, spec.seed)
    return add_spread_noise(out, spec.spread_distance, spec.seed)


def paper_matrix():
    """The fourteen noise settings of the reference study."""
    specs = [NoiseSpec(level, spread) for spread in (0, 10)
             for level in (0.0, 0.25, 0.5, 0.75, 1.0)]
    specs += [NoiseSpec(1.0, d) for d in (20, 30, 40, 50)]
    return specs
