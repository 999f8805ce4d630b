"""End-to-end classical chains: JPEG -> turbo -> 16QAM -> IC -> receiver -> JPEG.

All schemes are rate-matched to the learned system through
:class:`LinkBudget`.  A corrupted JPEG payload falls back to a mid-gray
reconstruction so PSNR is defined for every frame.  Batched entry points
stack frames so the turbo decoder amortizes its trellis recursions over
images (chunked to bound memory).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..channel import ChannelMatrix, NoiseSpec, apply_awgn_complex, split_streams
from ..errors import InvalidConfig
from .budget import LinkBudget
from .jpeg import bits_to_bytes, bytes_to_bits, jpeg_decode_or_gray, jpeg_fit_to_budget
from .qam import qam16_map
from .receivers import receive_orthogonal, receive_sic, receive_tin
from .turbo import TurboConfig, turbo_encode

_DECODE_CHUNK = 32  # frames per batched turbo decode, bounds BCJR memory


@dataclass
class LinkResult:
    reconstruction: np.ndarray  # [3, side, side] float
    quality: int  # JPEG quality actually used
    info_ber: float  # decoded info-bit error rate
    raw_ber: float  # pre-decoder hard-decision BER over the coded frame
    payload_intact: bool  # decoded payload bytes match transmitted ones


def _encode_user_frame(image, budget: LinkBudget, scheme: str, cfg: TurboConfig):
    """JPEG-fit one image and build its unit-energy symbol frame."""
    payload, quality = jpeg_fit_to_budget(image, budget.info_bit_budget(scheme))
    info = bytes_to_bits(payload, budget.info_bits(scheme))
    coded = turbo_encode(info, cfg)
    frame = np.zeros(budget.coded_bits(scheme), dtype=np.int64)
    frame[: coded.size] = coded
    return qam16_map(frame), info, payload, quality, frame


def _interferer_frame(budget: LinkBudget, scheme: str, cfg: TurboConfig, seed):
    """A valid random-payload frame through the identical chain."""
    rng = np.random.default_rng(seed)
    info = rng.integers(0, 2, size=budget.info_bits(scheme), dtype=np.int64)
    coded = turbo_encode(info, cfg)
    frame = np.zeros(budget.coded_bits(scheme), dtype=np.int64)
    frame[: coded.size] = coded
    return qam16_map(frame)


def run_classical_link(
    image,
    scheme: str,
    budget: LinkBudget,
    channel: ChannelMatrix,
    noise: NoiseSpec,
    seed,
    cfg: TurboConfig | None = None,
    interferer_image=None,
) -> LinkResult:
    """Transmit one image for user 1 and reconstruct it at receiver 1."""
    if scheme not in ("orthogonal", "tin", "sic"):
        raise InvalidConfig(f"unknown classical scheme {scheme!r}")
    cfg = cfg or TurboConfig()
    side = np.asarray(image).shape[-1]
    noise_seed, int_seed = split_streams(seed, 2)

    x1, info, payload, quality, frame_bits = _encode_user_frame(image, budget, scheme, cfg)
    if scheme == "orthogonal":
        x2 = np.zeros_like(x1)  # other user occupies its own slot
    elif interferer_image is not None:
        x2 = _encode_user_frame(interferer_image, budget, scheme, cfg)[0]
    else:
        x2 = _interferer_frame(budget, scheme, cfg, int_seed)

    x = np.stack([x1, x2])
    y = apply_awgn_complex(channel, x, noise, noise_seed)[0]
    y = y / channel.gains[0, 0]  # normalize out the direct gain
    h = float(channel.gains[0, 1] / channel.gains[0, 0])

    k_info = budget.info_bits(scheme)
    if scheme == "orthogonal":
        out = receive_orthogonal(y, noise.sigma2, cfg, k_info)
    elif scheme == "tin":
        out = receive_tin(y, h, noise.sigma2, cfg, k_info)
    else:
        out = receive_sic(y, h, noise.sigma2, cfg, k_info)

    return _finish(out, info, payload, quality, frame_bits, side)


def _finish(out, info, payload, quality, frame_bits, side):
    decoded_payload = bits_to_bytes(out.info_bits)[: len(payload)]
    recon = jpeg_decode_or_gray(decoded_payload, side)
    return LinkResult(
        reconstruction=recon,
        quality=quality,
        info_ber=float(np.mean(out.info_bits != info)),
        raw_ber=float(np.mean(out.raw_bits != frame_bits)),
        payload_intact=decoded_payload == payload,
    )


def run_classical_links(
    images,
    scheme: str,
    budget: LinkBudget,
    channel: ChannelMatrix,
    noise: NoiseSpec,
    seed,
    cfg: TurboConfig | None = None,
) -> list[LinkResult]:
    """Batched Monte-Carlo variant: one result per image, matched per-image seeds.

    Per-image noise and interferer seeds depend only on (seed, image index),
    so runs at different h or scheme see identical noise realizations.
    """
    if scheme not in ("orthogonal", "tin", "sic"):
        raise InvalidConfig(f"unknown classical scheme {scheme!r}")
    cfg = cfg or TurboConfig()
    images = np.asarray(images)
    n = images.shape[0]
    side = images.shape[-1]
    k_info = budget.info_bits(scheme)
    h = float(channel.gains[0, 1] / channel.gains[0, 0])

    frames, infos, payloads, qualities = [], [], [], []
    ys = []
    for i in range(n):
        noise_seed, int_seed = split_streams([seed_entropy(seed), i], 2)
        x1, info, payload, quality, frame_bits = _encode_user_frame(images[i], budget, scheme, cfg)
        if scheme == "orthogonal":
            x2 = np.zeros_like(x1)
        else:
            x2 = _interferer_frame(budget, scheme, cfg, int_seed)
        y = apply_awgn_complex(channel, np.stack([x1, x2]), noise, noise_seed)[0]
        ys.append(y / channel.gains[0, 0])
        frames.append(frame_bits)
        infos.append(info)
        payloads.append(payload)
        qualities.append(quality)

    results = []
    for start in range(0, n, _DECODE_CHUNK):
        stop = min(start + _DECODE_CHUNK, n)
        y_block = np.stack(ys[start:stop])
        if scheme == "orthogonal":
            out = receive_orthogonal(y_block, noise.sigma2, cfg, k_info)
        elif scheme == "tin":
            out = receive_tin(y_block, h, noise.sigma2, cfg, k_info)
        else:
            out = receive_sic(y_block, h, noise.sigma2, cfg, k_info)
        for j, i in enumerate(range(start, stop)):
            single = type(out)(out.info_bits[j], out.raw_bits[j], out.effective_noise_var)
            results.append(
                _finish(single, infos[i], payloads[i], qualities[i], frames[i], side)
            )
    return results


def seed_entropy(seed) -> int:
    """Stable integer entropy from an int or SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        ent = seed.entropy
        return int(ent[0]) if isinstance(ent, (list, tuple)) else int(ent)
    return int(seed)
