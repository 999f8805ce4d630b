"""JPEG source coding fit to a bit budget (interchange format, 4:2:0)."""

from __future__ import annotations

import io

import numpy as np
from PIL import Image

from ..errors import BudgetInfeasible

QUALITY_RANGE = (1, 95)
MID_GRAY = 0.5


def _to_pil(image: np.ndarray) -> Image.Image:
    """Accept [3, H, W] float in [0, 1] (or [H, W, 3] uint8) images."""
    arr = np.asarray(image)
    if arr.ndim == 3 and arr.shape[0] == 3 and arr.dtype != np.uint8:
        arr = np.transpose(np.clip(arr, 0.0, 1.0) * 255.0, (1, 2, 0)).round().astype(np.uint8)
    return Image.fromarray(arr)


def _encode_at(im: Image.Image, quality: int) -> bytes:
    buf = io.BytesIO()
    im.save(buf, "JPEG", quality=quality, optimize=True, subsampling=2)  # 4:2:0
    return buf.getvalue()


def jpeg_fit_to_budget(image, bit_budget: int):
    """Encode at the maximum quality in [1, 95] whose size fits the budget.

    Returns (encoded bytes, quality used).  Scans downward from quality 95
    so the answer is the exact maximum feasible quality even where the
    size-vs-quality curve is locally non-monotone.
    """
    if bit_budget <= 0:
        raise BudgetInfeasible(f"bit budget must be positive, got {bit_budget}")
    im = _to_pil(image)
    lo, hi = QUALITY_RANGE
    for q in range(hi, lo - 1, -1):
        payload = _encode_at(im, q)
        if len(payload) * 8 <= bit_budget:
            return payload, q
    raise BudgetInfeasible(
        f"smallest JPEG ({len(payload)} bytes at quality {lo}) exceeds "
        f"budget of {bit_budget} bits"
    )


def jpeg_decode_or_gray(payload: bytes, side: int) -> np.ndarray:
    """Decode a JPEG payload to [3, side, side] float in [0, 1].

    Any decoding failure (corrupt stream, wrong size) falls back to a
    mid-gray image so PSNR stays defined for every frame.
    """
    try:
        with Image.open(io.BytesIO(payload)) as im:
            im.load()
            arr = np.asarray(im.convert("RGB"))
        if arr.shape != (side, side, 3):
            raise ValueError(f"decoded size {arr.shape} != {(side, side, 3)}")
        return np.transpose(arr, (2, 0, 1)).astype(np.float32) / 255.0
    except Exception:
        return np.full((3, side, side), MID_GRAY, dtype=np.float32)


def bytes_to_bits(payload: bytes, n_bits: int) -> np.ndarray:
    """Byte-aligned payload -> {0,1} array zero-padded to n_bits."""
    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8))
    if bits.size > n_bits:
        raise BudgetInfeasible(f"payload of {bits.size} bits exceeds frame of {n_bits}")
    return np.concatenate([bits, np.zeros(n_bits - bits.size, dtype=np.uint8)]).astype(np.int64)


def bits_to_bytes(bits: np.ndarray) -> bytes:
    """Inverse of bytes_to_bits; trailing pad bits are kept (JPEG self-terminates)."""
    bits = np.asarray(bits).astype(np.uint8)
    usable = (bits.size // 8) * 8
    return np.packbits(bits[:usable]).tobytes()
