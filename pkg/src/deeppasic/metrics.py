"""Image quality metric."""

from __future__ import annotations

import numpy as np
import torch

from .errors import ShapeMismatch

PSNR_CAP_DB = 100.0


def compute_psnr(a, b) -> float:
    """Peak signal-to-noise ratio in dB for unit-peak images.

    -10*log10(MSE) with peak 1; a zero MSE is capped at 100 dB.
    """
    if isinstance(a, torch.Tensor):
        a = a.detach().cpu().numpy()
    if isinstance(b, torch.Tensor):
        b = b.detach().cpu().numpy()
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatch(f"shape mismatch: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse <= 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, -10.0 * np.log10(mse))
