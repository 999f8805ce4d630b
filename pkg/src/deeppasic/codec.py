"""Semantic image codec: residual conv encoder/decoder and the feature split.

The encoder maps [3, H, W] images (H, W divisible by 4) to feature maps
[E, H/4, W/4] through three residual convolutional blocks with two
stride-2 downsampling stages; the decoder mirrors it with transposed
convolutions and a sigmoid onto [0, 1].  Features are power normalized to
unit mean square per sample before transmission, then split layer-wise:
the first P layers are the private part (the prompt), the remaining
C = E - P layers the common part.  ``pad_embed`` places either part back at
its layer indices inside a zero [E, h, w] map, so private + common padding
reconstructs the feature map exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import torch
from torch import nn

from .errors import DegenerateZeroPower, InvalidSplit, ShapeMismatch
from .plan import ResourcePlan


@dataclass(frozen=True)
class ArchWidths:
    """Channel widths of the conv stacks; defaults match the reference design."""

    codec: tuple = (64, 128)
    generator: int = 128
    discriminator: tuple = (64, 128, 256)


COMPACT_WIDTHS = ArchWidths(codec=(32, 64), generator=128, discriminator=(32, 64, 128))


def _norm_groups(channels: int) -> int:
    for g in (8, 4, 2):
        if channels % g == 0:
            return g
    return 1


class ResidualBlock(nn.Module):
    """conv-norm-act-conv-norm with a (possibly strided/projected) skip."""

    def __init__(self, c_in, c_out, stride=1, transposed=False, out_act=True):
        super().__init__()
        if transposed and stride > 1:
            conv1 = nn.ConvTranspose2d(c_in, c_out, 3, stride, 1, output_padding=stride - 1)
            skip_conv = nn.ConvTranspose2d(c_in, c_out, 1, stride, 0, output_padding=stride - 1)
        else:
            conv1 = nn.Conv2d(c_in, c_out, 3, stride, 1)
            skip_conv = nn.Conv2d(c_in, c_out, 1, stride, 0)
        self.body = nn.Sequential(
            conv1,
            nn.GroupNorm(_norm_groups(c_out), c_out),
            nn.PReLU(c_out),
            nn.Conv2d(c_out, c_out, 3, 1, 1),
            nn.GroupNorm(_norm_groups(c_out), c_out),
        )
        self.skip = skip_conv if (c_in != c_out or stride != 1) else nn.Identity()
        self.act = nn.PReLU(c_out) if out_act else nn.Identity()

    def forward(self, x):
        return self.act(self.body(x) + self.skip(x))


class SemanticEncoder(nn.Module):
    """Three cascaded residual conv blocks, strides 1-2-2, linear output."""

    def __init__(self, e_layers: int, widths: tuple = ArchWidths().codec):
        super().__init__()
        w1, w2 = widths
        self.e_layers = e_layers
        self.blocks = nn.Sequential(
            ResidualBlock(3, w1, stride=1),
            ResidualBlock(w1, w2, stride=2),
            ResidualBlock(w2, e_layers, stride=2, out_act=False),
        )

    def forward(self, image: torch.Tensor) -> torch.Tensor:
        h, w = image.shape[-2], image.shape[-1]
        if h % 4 or w % 4:
            raise ShapeMismatch(f"image dims must be divisible by 4, got {h}x{w}")
        return self.blocks(image)


class SemanticDecoder(nn.Module):
    """Three residual transposed-conv blocks, strides 2-2-1, sigmoid onto [0, 1]."""

    def __init__(self, e_layers: int, widths: tuple = ArchWidths().codec):
        super().__init__()
        w1, w2 = widths
        self.blocks = nn.Sequential(
            ResidualBlock(e_layers, w2, stride=2, transposed=True),
            ResidualBlock(w2, w1, stride=2, transposed=True),
            ResidualBlock(w1, 3, stride=1, out_act=False),
        )

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        return torch.sigmoid(self.blocks(features))


def encode(image: torch.Tensor, encoder: SemanticEncoder) -> torch.Tensor:
    """Run the encoder; accepts [3, H, W] or [B, 3, H, W]."""
    single = image.ndim == 3
    out = encoder(image.unsqueeze(0) if single else image)
    return out.squeeze(0) if single else out


def power_normalize(features: torch.Tensor, eps: float = 0.0) -> torch.Tensor:
    """Rescale to unit mean square (per sample for batched input).

    Raises DegenerateZeroPower on an all-zero input.
    """
    if features.ndim == 4:
        ms = features.pow(2).mean(dim=(1, 2, 3), keepdim=True)
        if torch.any(ms <= eps):
            raise DegenerateZeroPower("all-zero feature map cannot be normalized")
        return features / torch.sqrt(ms)
    ms = features.pow(2).mean()
    if ms <= eps:
        raise DegenerateZeroPower("all-zero feature map cannot be normalized")
    return features / torch.sqrt(ms)


class SplitFeatures(NamedTuple):
    private: torch.Tensor  # layers [0, P)
    common: torch.Tensor  # layers [P, E)


def split_features(features: torch.Tensor, p_layers: int) -> SplitFeatures:
    """Layer-wise split: first P layers private, remaining C = E - P common."""
    e = features.shape[-3]
    if p_layers < 0 or p_layers > e:
        raise InvalidSplit(f"P must lie in [0, {e}], got {p_layers}")
    return SplitFeatures(
        private=features[..., :p_layers, :, :], common=features[..., p_layers:, :, :]
    )


def pad_embed(part: torch.Tensor, plan: ResourcePlan, role: str) -> torch.Tensor:
    """Zero-pad a private/common part back to the uniform [E, h, w] shape."""
    expected = plan.p_layers if role == "private" else plan.c_layers
    if role not in ("private", "common"):
        raise ShapeMismatch(f"unknown role {role!r}")
    if part.shape[-3] != expected or part.shape[-2:] != (plan.h_feat, plan.w_feat):
        raise ShapeMismatch(
            f"{role} part shaped {tuple(part.shape)} does not match plan "
            f"[{expected}, {plan.h_feat}, {plan.w_feat}]"
        )
    shape = part.shape[:-3] + (plan.e_layers, plan.h_feat, plan.w_feat)
    out = torch.zeros(shape, dtype=part.dtype, device=part.device)
    if role == "private":
        out[..., : plan.p_layers, :, :] = part
    else:
        out[..., plan.p_layers :, :, :] = part
    return out


def merge_and_decode(
    common_hat: torch.Tensor,
    own_private_rx: torch.Tensor,
    plan: ResourcePlan,
    decoder: SemanticDecoder,
) -> torch.Tensor:
    """Re-embed the separated common part with the received prompt and decode.

    Output is upsampled x4 back to pixel space and clamped to [0, 1].
    """
    merged = pad_embed(common_hat, plan, "common") + pad_embed(own_private_rx, plan, "private")
    single = merged.ndim == 3
    out = decoder(merged.unsqueeze(0) if single else merged)
    out = out.clamp(0.0, 1.0)
    return out.squeeze(0) if single else out
