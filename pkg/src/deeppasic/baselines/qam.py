"""Gray-mapped square 16QAM with exact and max-log soft demapping.

Per-axis levels are {-3, -1, +1, +3}/sqrt(10) so the constellation has unit
average energy.  A symbol carries 4 bits [b0 b1 b2 b3]: (b0, b1) select the
in-phase level and (b2, b3) the quadrature level through the Gray table
00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3 (so 0000 maps to (-3 - 3j)/sqrt(10)).
LLRs follow the convention positive <=> bit 0.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidNoise, PaddingRequired

_SCALE = 1.0 / np.sqrt(10.0)
# Gray code order over the 2-bit axis value (b_hi, b_lo) -> level index
_AXIS_LEVELS = np.array([-3.0, -1.0, 1.0, 3.0]) * _SCALE
_GRAY_TO_LEVEL = {(0, 0): 0, (0, 1): 1, (1, 1): 2, (1, 0): 3}
# per level index, the (b_hi, b_lo) bits
_LEVEL_BITS = np.zeros((4, 2), dtype=np.int64)
for bits, idx in _GRAY_TO_LEVEL.items():
    _LEVEL_BITS[idx] = bits


def qam16_map(bits: np.ndarray) -> np.ndarray:
    """Map a {0,1} bit array (last axis length divisible by 4) to symbols."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.shape[-1] % 4:
        raise PaddingRequired(f"bit count {bits.shape[-1]} not divisible by 4")
    quads = bits.reshape(bits.shape[:-1] + (-1, 4))
    i_idx = _gray_pair_to_index(quads[..., 0], quads[..., 1])
    q_idx = _gray_pair_to_index(quads[..., 2], quads[..., 3])
    return _AXIS_LEVELS[i_idx] + 1j * _AXIS_LEVELS[q_idx]


def _gray_pair_to_index(b_hi, b_lo):
    # 00->0, 01->1, 11->2, 10->3
    return b_hi * (3 - 2 * b_lo) + b_lo


def qam16_hard_demap(symbols: np.ndarray) -> np.ndarray:
    """Nearest-level per-axis hard decisions back to bits."""
    symbols = np.asarray(symbols)
    i_idx = np.abs(symbols.real[..., None] - _AXIS_LEVELS).argmin(axis=-1)
    q_idx = np.abs(symbols.imag[..., None] - _AXIS_LEVELS).argmin(axis=-1)
    out = np.concatenate([_LEVEL_BITS[i_idx], _LEVEL_BITS[q_idx]], axis=-1)
    return out.reshape(symbols.shape[:-1] + (-1,)) if symbols.ndim > 1 else out.reshape(-1)


def qam16_soft_demod(
    received: np.ndarray, effective_noise_var: float, method: str = "max-log"
) -> np.ndarray:
    """Per-bit LLRs by Gaussian marginalization over the constellation.

    ``effective_noise_var`` is the total complex noise-plus-interference
    power (each axis sees half of it).  ``method`` selects exact
    log-sum-exp marginalization or the max-log approximation.
    """
    if effective_noise_var <= 0:
        raise InvalidNoise(f"noise variance must be positive, got {effective_noise_var}")
    received = np.asarray(received)
    axis_var = effective_noise_var / 2.0
    llr_i = _axis_llrs(received.real, axis_var, method)
    llr_q = _axis_llrs(received.imag, axis_var, method)
    out = np.concatenate([llr_i, llr_q], axis=-1)
    return out.reshape(received.shape[:-1] + (-1,)) if received.ndim > 1 else out.reshape(-1)


def _axis_llrs(y, axis_var, method):
    d2 = (y[..., None] - _AXIS_LEVELS) ** 2  # [..., 4]
    metric = -d2 / (2.0 * axis_var)
    llrs = []
    for bit_pos in range(2):
        mask0 = _LEVEL_BITS[:, bit_pos] == 0
        if method == "max-log":
            llr = metric[..., mask0].max(axis=-1) - metric[..., ~mask0].max(axis=-1)
        elif method in ("exact", "log-map"):
            llr = np.logaddexp.reduce(metric[..., mask0], axis=-1) - np.logaddexp.reduce(
                metric[..., ~mask0], axis=-1
            )
        else:
            raise InvalidNoise(f"unknown demod method {method!r}")
        llrs.append(llr[..., None])
    return np.concatenate(llrs, axis=-1)
