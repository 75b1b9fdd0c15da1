"""Loading, tiling and windowing of grayscale images.

Images are plain 2-D ``float`` numpy arrays indexed ``[row, column]`` (i.e.
``[y, x]``) with nominal intensities in ``[0, 1]``.
"""
from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
from PIL import Image

from .validation import check_image, is_power_of_two

logger = logging.getLogger(__name__)

LUMINANCE = np.array([0.2126, 0.7152, 0.0722])
MAX_PIXELS = 1 << 28


class ImageReadError(IOError):
    pass


def _normalise(arr: np.ndarray) -> np.ndarray:
    if arr.dtype == np.uint8:
        return arr.astype(float) / 255.0
    if arr.dtype in (np.uint16, np.dtype(">u2"), np.dtype("<u2")):
        return arr.astype(float) / 65535.0
    if arr.dtype.kind == "f":
        return arr.astype(float)
    raise ImageReadError(f"unsupported sample type {arr.dtype}")


def load_image(path) -> np.ndarray:
    """Read an 8/16-bit PNG or TIFF as a float gray image in ``[0, 1]``.

    RGB(A) input is collapsed to Rec. 709 luminance.
    """
    path = Path(path)
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("I;16", "I;16B", "I;16L", "I;16N"):
                arr = np.asarray(im, dtype=np.uint16)
            elif mode == "I":
                # Pillow widens 16-bit grayscale PNGs to 32-bit "I"
                arr = np.asarray(im)
                if arr.max(initial=0) > 65535 or arr.min(initial=0) < 0:
                    raise ImageReadError(f"{path}: unsupported 32-bit integer data")
                arr = arr.astype(np.uint16)
            elif mode in ("L", "RGB", "RGBA", "LA", "P", "1"):
                if mode == "P":
                    im = im.convert("RGB")
                elif mode == "LA":
                    im = im.convert("L")
                elif mode == "1":
                    im = im.convert("L")
                arr = np.asarray(im)
            elif mode == "F":
                arr = np.asarray(im, dtype=float)
            else:
                raise ImageReadError(f"{path}: unsupported image mode {mode}")
    except ImageReadError:
        raise
    except (OSError, ValueError) as exc:
        raise ImageReadError(f"cannot read {path}: {exc}") from exc

    if arr.ndim == 3:
        arr = _normalise(arr[..., :3]) @ LUMINANCE
    else:
        arr = _normalise(arr)
    return check_image(arr)


def save_png16(path, img) -> None:
    """Write an image in ``[0, 1]`` as a 16-bit grayscale PNG (values clipped)."""
    img = check_image(img)
    data = np.round(np.clip(img, 0.0, 1.0) * 65535.0).astype(np.uint16)
    Image.fromarray(data).save(Path(path), format="PNG")


def tile_image(img, nx: int, ny: int) -> np.ndarray:
    """Repeat ``img`` ``nx`` times horizontally and ``ny`` times vertically."""
    img = check_image(img)
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise ValueError("tile counts must be positive integers")
    h, w = img.shape
    if h * ny * w * nx > MAX_PIXELS:
        raise OverflowError(f"tiled image would exceed {MAX_PIXELS} pixels")
    return np.tile(img, (int(ny), int(nx)))


def select_region(img, shape: str = "square", size: int = 1024, center=None) -> np.ndarray:
    """Crop a ``size`` x ``size`` square, optionally masked to its inscribed circle.

    ``center`` is ``(x, y)`` in pixels and defaults to the image center. For a
    circular selection the pixels outside the circle are replaced by the mean
    of the pixels inside it.
    """
    img = check_image(img)
    if not is_power_of_two(size):
        raise ValueError(f"selection size must be a power of two, got {size}")
    if shape not in ("square", "circle"):
        raise ValueError(f"selection shape must be 'square' or 'circle', got {shape!r}")
    h, w = img.shape
    if center is None:
        cx, cy = w // 2, h // 2
    else:
        cx, cy = (int(round(c)) for c in center)
    x0, y0 = cx - size // 2, cy - size // 2
    if x0 < 0 or y0 < 0 or x0 + size > w or y0 + size > h:
        raise ValueError(
            f"{size}px selection centred at ({cx}, {cy}) does not fit a {w}x{h} image"
        )
    out = img[y0:y0 + size, x0:x0 + size].copy()
    if shape == "circle":
        inside = circle_mask(size)
        out[~inside] = out[inside].mean()
    return out


def circle_mask(size: int) -> np.ndarray:
    """Boolean mask of pixel centres inside the circle inscribed in a square."""
    c = (size - 1) / 2.0
    yy, xx = np.mgrid[:size, :size]
    return (xx - c) ** 2 + (yy - c) ** 2 <= (size / 2.0) ** 2
