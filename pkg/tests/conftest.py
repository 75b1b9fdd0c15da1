import itertools
import sys
from pathlib import Path

import numpy as np
import pytest

from planesym.core import get_group
from planesym.noisegen import add_rgb_noise, pattern_cell, quantize, render_wallpaper
from planesym.spectrum import FCSet

sys.path.insert(0, str(Path(__file__).parent))


def index_disc(hmax=6):
    """All nonzero indices with h^2 + k^2 <= hmax^2 (closed under -h)."""
    r = range(-hmax, hmax + 1)
    return np.array([(h, k) for h in r for k in r
                     if (h, k) != (0, 0) and h * h + k * k <= hmax * hmax])


def random_fcs(rng, hmax=6, amp=(0.05, 1.0)) -> FCSet:
    """Friedel-closed set with random unique-half amplitudes and phases."""
    hk = index_disc(hmax)
    half = (hk[:, 0] > 0) | ((hk[:, 0] == 0) & (hk[:, 1] > 0))
    n = int(half.sum())
    return FCSet(hk[half], rng.uniform(*amp, n), rng.uniform(-180, 180, n)).friedel_closed()


def add_complex_noise(fcs: FCSet, sigma, rng) -> FCSet:
    """Complex Gaussian noise on the unique half, mirrored to keep Friedel symmetry."""
    half = fcs.unique_mask()
    z = fcs.complex()[half] + sigma * (rng.standard_normal(half.sum())
                                       + 1j * rng.standard_normal(half.sum()))
    noisy = FCSet.from_complex(fcs.hk[half], z)
    return noisy.friedel_closed()


def _op_keys(g):
    return {(tuple(w.ravel()), tuple(np.round(t % 1.0, 6) % 1.0))
            for w, t in zip(g.matrices, g.translations)}


def setting_shift(sub, sup):
    """Origin offset placing ``sub``'s standard setting inside ``sup``'s.

    Returns ``s`` such that every operation of ``sub`` conjugated by the
    translation ``s`` is an operation of ``sup``.
    """
    sub, sup = get_group(sub), get_group(sup)
    target = _op_keys(sup)
    eye = np.eye(2)
    for s in itertools.product((0.0, 0.25, 0.5, 0.75), repeat=2):
        s = np.array(s)
        if all((tuple(w.ravel()), tuple(np.round((t + (eye - w) @ s) % 1.0, 6) % 1.0)) in target
               for w, t in zip(sub.matrices, sub.translations)):
            return s
    raise AssertionError(f"{sub.name} is not a subgroup of {sup.name}")


SMALL = {"p4": (24, 24, 90), "p2mg": (26, 20, 90), "p31m": (24, 24, 120)}


def small_render(group, seed=1):
    clean = render_wallpaper(pattern_cell(group, 48, seed=seed), group, SMALL[group], size=256,
                             offset=(0.37, -0.21))
    return quantize(add_rgb_noise(clean, 0.04, seed=seed))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
