"""Orthogonal / TIN / SIC receivers over the complex interference channel.

Each receiver consumes the complex samples of one user's frame (already at
the receiver, direct gain normalized out), soft-demaps with the effective
noise variance of its interference model, and turbo decodes.  Alongside the
decoded info bits every receiver reports its pre-decoder hard decisions,
the regime where TIN/SIC orderings remain measurable after the code has
saturated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeMismatch
from .qam import qam16_hard_demap, qam16_map, qam16_soft_demod
from .turbo import TurboConfig, turbo_decode, turbo_encode


@dataclass
class ReceiverOutput:
    info_bits: np.ndarray  # [.., k] decoded info bits
    raw_bits: np.ndarray  # [.., 4*uses] pre-decoder hard decisions
    effective_noise_var: float


def _decode_frame(y, effective_var, cfg: TurboConfig, k_info: int) -> ReceiverOutput:
    llrs = qam16_soft_demod(y, effective_var, method=_demod_method(cfg))
    coded_len = cfg.coded_length(k_info)
    if llrs.shape[-1] < coded_len:
        raise ShapeMismatch(
            f"frame carries {llrs.shape[-1]} coded positions, need {coded_len}"
        )
    info = turbo_decode(llrs[..., :coded_len], cfg)
    return ReceiverOutput(info, qam16_hard_demap(y), effective_var)


def _demod_method(cfg: TurboConfig) -> str:
    return "max-log" if cfg.metric == "max-log" else "exact"


def receive_orthogonal(y, noise_var: float, cfg: TurboConfig, k_info: int) -> ReceiverOutput:
    """Time-division slot: no interference by construction."""
    return _decode_frame(np.asarray(y), noise_var, cfg, k_info)


def receive_tin(y, h: float, noise_var: float, cfg: TurboConfig, k_info: int) -> ReceiverOutput:
    """Treat interference as noise: effective variance sigma2 + h^2 (unit interferer power)."""
    return _decode_frame(np.asarray(y), noise_var + h * h, cfg, k_info)


def receive_sic(
    y,
    h: float,
    noise_var: float,
    cfg: TurboConfig,
    k_info: int,
    interferer_cfg: TurboConfig | None = None,
    interferer_k_info: int | None = None,
) -> ReceiverOutput:
    """Successive cancellation: decode the interferer first, subtract, decode own.

    The interferer is decoded treating the desired signal as noise
    (effective variance sigma2 + 1); a failed interferer decode is not
    detected, its errors propagate into the subtraction.  At h = 0 the
    subtraction is skipped (it would remove nothing).
    """
    y = np.asarray(y)
    icfg = interferer_cfg or cfg
    ik = interferer_k_info if interferer_k_info is not None else k_info
    if h > 0:
        # interferer appears with amplitude h; renormalize to a unit constellation
        y_int = y / h
        var_int = (noise_var + 1.0) / (h * h)
        llrs_int = qam16_soft_demod(y_int, var_int, method=_demod_method(icfg))
        bits_int = turbo_decode(llrs_int[..., : icfg.coded_length(ik)], icfg)
        coded_int = turbo_encode(bits_int, icfg)
        frame_bits = np.zeros(y.shape[:-1] + (y.shape[-1] * 4,), dtype=np.int64)
        frame_bits[..., : coded_int.shape[-1]] = coded_int
        y = y - h * qam16_map(frame_bits)
    return _decode_frame(y, noise_var, cfg, k_info)
