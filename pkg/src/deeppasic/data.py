"""Dataset ingestion and the synthetic toy corpus.

Images are handled as float32 arrays shaped [3, H, W] with values in
[0, 1].  ``ingest_dataset`` center-crops a directory of images and splits
train/validation deterministically by seed.  ``synthesize_corpus`` renders a
reproducible corpus of smooth geometric scenes so the testbed can run
without any external image collection.
"""

from __future__ import annotations

import warnings
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw, ImageFilter

from .errors import EmptyDataset, SkippedImageWarning

_IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".ppm", ".webp"}


def center_crop(arr: np.ndarray, side: int) -> np.ndarray:
    """Center-crop an [H, W, 3] uint8/float array to side x side."""
    h, w = arr.shape[:2]
    top = (h - side) // 2
    left = (w - side) // 2
    return arr[top : top + side, left : left + side]


def _load_image(path: Path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))


def ingest_dataset(path, crop: int = 64, split_seed: int = 0, val_fraction: float = 0.1):
    """Load, crop and split a directory of images.

    Returns (train, val) float32 arrays shaped [N, 3, crop, crop] in [0, 1].
    Images smaller than the crop are skipped with a SkippedImageWarning;
    an empty result raises EmptyDataset.  Split membership depends only on
    the sorted file names and the seed.
    """
    root = Path(path)
    files = sorted(p for p in root.iterdir() if p.suffix.lower() in _IMAGE_SUFFIXES)
    images = []
    for f in files:
        try:
            arr = _load_image(f)
        except Exception as exc:  # undecodable file
            warnings.warn(f"skipping {f.name}: {exc}", SkippedImageWarning)
            continue
        if arr.shape[0] < crop or arr.shape[1] < crop:
            warnings.warn(
                f"skipping {f.name}: {arr.shape[1]}x{arr.shape[0]} smaller than crop {crop}",
                SkippedImageWarning,
            )
            continue
        arr = center_crop(arr, crop)
        images.append(np.transpose(arr, (2, 0, 1)).astype(np.float32) / 255.0)
    if not images:
        raise EmptyDataset(f"no usable images under {root}")
    stack = np.stack(images)
    rng = np.random.default_rng(split_seed)
    order = rng.permutation(len(stack))
    n_val = max(1, int(round(len(stack) * val_fraction))) if len(stack) > 1 else 0
    val_idx = order[:n_val]
    train_idx = order[n_val:]
    return stack[train_idx], stack[val_idx]


def _random_color(rng):
    return tuple(int(c) for c in rng.integers(30, 226, size=3))


def _synthesize_image(side: int, seed) -> np.ndarray:
    """One smooth scene: bilinear color wash plus a few soft shapes."""
    rng = np.random.default_rng(seed)
    corners = rng.uniform(0.1, 0.9, size=(2, 2, 3))
    yy, xx = np.mgrid[0:side, 0:side].astype(np.float64) / (side - 1)
    base = (
        corners[0, 0] * ((1 - yy) * (1 - xx))[..., None]
        + corners[0, 1] * ((1 - yy) * xx)[..., None]
        + corners[1, 0] * (yy * (1 - xx))[..., None]
        + corners[1, 1] * (yy * xx)[..., None]
    )
    im = Image.fromarray((np.clip(base, 0, 1) * 255).astype(np.uint8))
    draw = ImageDraw.Draw(im)
    for _ in range(int(rng.integers(2, 7))):
        kind = rng.integers(0, 3)
        cx, cy = rng.uniform(0, side, size=2)
        r1, r2 = rng.uniform(side * 0.08, side * 0.4, size=2)
        color = _random_color(rng)
        if kind == 0:
            draw.ellipse([cx - r1, cy - r2, cx + r1, cy + r2], fill=color)
        elif kind == 1:
            draw.rectangle([cx - r1, cy - r2, cx + r1, cy + r2], fill=color)
        else:
            x2, y2 = rng.uniform(0, side, size=2)
            draw.line([cx, cy, x2, y2], fill=color, width=max(1, side // 24))
    im = im.filter(ImageFilter.GaussianBlur(radius=side / 64.0))
    arr = np.asarray(im).astype(np.float32) / 255.0
    arr += rng.normal(0.0, 0.01, size=arr.shape).astype(np.float32)
    return np.clip(arr, 0.0, 1.0)


def synthesize_corpus(path, n_images: int, side: int = 64, seed: int = 0) -> list:
    """Write ``n_images`` deterministic PNG scenes of size side x side under ``path``."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    master = np.random.SeedSequence(seed)
    children = master.spawn(n_images)
    written = []
    for i, child in enumerate(children):
        arr = _synthesize_image(side, child)
        img = Image.fromarray((arr * 255).round().astype(np.uint8))
        dest = out / f"img_{i:05d}.png"
        img.save(dest)
        written.append(dest)
    return written
