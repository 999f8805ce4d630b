"""GAN separator: input assembly, generator, discriminator and losses.

At receiver k the received common block and the K received prompt blocks
are zero-padded to the uniform [E, h, w] shape and concatenated along the
channel axis into a [K*E, h, w] tensor (the first prompt is added onto the
common block rather than occupying its own slot).  The generator maps that
tensor to the predicted common parts of all K users; the discriminator
scores common-part candidates and is used only during training.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import torch
from torch import nn

from .codec import ResidualBlock, pad_embed
from .errors import EmptyCommon, InvalidScore, ShapeMismatch
from .plan import ResourcePlan

_SCORE_EPS = 1e-6


@dataclass(frozen=True)
class GanWeights:
    """Balance between reconstruction and adversarial generator terms."""

    alpha: float = 1.0
    beta: float = 0.01

    def __post_init__(self):
        if self.alpha <= 0:
            raise InvalidScore(f"alpha must be positive, got {self.alpha}")
        if self.beta < 0:
            raise InvalidScore(f"beta must be nonnegative, got {self.beta}")


def assemble_input(
    y_common: torch.Tensor, prompts: Sequence[torch.Tensor], plan: ResourcePlan
) -> torch.Tensor:
    """Stack received blocks into the [K*E, h, w] separator input.

    Channel block 0 = padded received common + padded prompt of user 1;
    block j-1 (j >= 2) = padded prompt of user j.
    """
    if len(prompts) != plan.k_users:
        raise ShapeMismatch(f"expected {plan.k_users} prompt blocks, got {len(prompts)}")
    first = pad_embed(y_common, plan, "common") + pad_embed(prompts[0], plan, "private")
    blocks = [first] + [pad_embed(p, plan, "private") for p in prompts[1:]]
    return torch.cat(blocks, dim=-3)


class CommonPartGenerator(nn.Module):
    """Resolution-preserving residual stack from [K*E, h, w] to [K*C, h, w]."""

    def __init__(self, plan: ResourcePlan, width: int = 128):
        super().__init__()
        self.k_users = plan.k_users
        self.c_layers = plan.c_layers
        c_in = plan.k_users * plan.e_layers
        c_out = plan.k_users * plan.c_layers
        self.net = nn.Sequential(
            nn.Conv2d(c_in, width, 3, 1, 1),
            nn.PReLU(width),
            *[ResidualBlock(width, width) for _ in range(4)],
            nn.Conv2d(width, max(c_out, 1), 3, 1, 1),
        )

    def forward(self, assembled: torch.Tensor) -> torch.Tensor:
        return self.net(assembled)


def generate(assembled: torch.Tensor, generator: CommonPartGenerator):
    """Predicted common parts of all users, as a list of K [.., C, h, w] tensors."""
    if generator.c_layers == 0:
        raise EmptyCommon("plan has no common part (C = 0); separation must be skipped")
    single = assembled.ndim == 3
    out = generator(assembled.unsqueeze(0) if single else assembled)
    if single:
        out = out.squeeze(0)
    return list(torch.split(out, generator.c_layers, dim=-3))


class CommonPartDiscriminator(nn.Module):
    """Three strided conv layers, global average pooling, one logit."""

    def __init__(self, c_layers: int, widths: tuple = (64, 128, 256)):
        super().__init__()
        w1, w2, w3 = widths
        self.c_layers = c_layers
        self.net = nn.Sequential(
            nn.Conv2d(c_layers, w1, 3, 2, 1),
            nn.LeakyReLU(0.2),
            nn.Conv2d(w1, w2, 3, 2, 1),
            nn.LeakyReLU(0.2),
            nn.Conv2d(w2, w3, 3, 2, 1),
            nn.LeakyReLU(0.2),
        )
        self.head = nn.Linear(w3, 1)

    def forward(self, candidate: torch.Tensor) -> torch.Tensor:
        feats = self.net(candidate).mean(dim=(-2, -1))
        return self.head(feats).squeeze(-1)


def discriminate(candidate: torch.Tensor, discriminator: CommonPartDiscriminator) -> torch.Tensor:
    """Realness score in the open interval (0, 1), one per sample."""
    if candidate.shape[-3] != discriminator.c_layers:
        raise ShapeMismatch(
            f"candidate has {candidate.shape[-3]} layers, discriminator expects "
            f"{discriminator.c_layers}"
        )
    single = candidate.ndim == 3
    logit = discriminator(candidate.unsqueeze(0) if single else candidate)
    score = torch.sigmoid(logit).clamp(_SCORE_EPS, 1.0 - _SCORE_EPS)
    return score.squeeze(0) if single else score


def _check_scores(scores):
    for s in scores:
        s = torch.as_tensor(s)
        if torch.any(s <= 0) or torch.any(s >= 1):
            raise InvalidScore("scores must lie strictly inside (0, 1)")


def loss_discriminator(real_scores, fake_scores) -> torch.Tensor:
    """(1/K) sum_k [log D(x_k) + log(1 - D(x~_k))], averaged over the batch.

    The discriminator is trained to maximize this quantity.
    """
    if len(real_scores) != len(fake_scores):
        raise ShapeMismatch("real/fake score counts differ")
    _check_scores(real_scores)
    _check_scores(fake_scores)
    total = 0.0
    for real, fake in zip(real_scores, fake_scores):
        real = torch.as_tensor(real)
        fake = torch.as_tensor(fake)
        total = total + torch.log(real).mean() + torch.log(1.0 - fake).mean()
    return total / len(real_scores)


def loss_generator(predicted, truth) -> torch.Tensor:
    """(1/K) sum_k MSE(true common k, predicted common k)."""
    if len(predicted) != len(truth):
        raise ShapeMismatch("predicted/truth counts differ")
    total = 0.0
    for pred, true in zip(predicted, truth):
        if pred.shape != true.shape:
            raise ShapeMismatch(f"shape mismatch: {tuple(pred.shape)} vs {tuple(true.shape)}")
        total = total + (pred - true).pow(2).mean()
    return total / len(predicted)


def adversarial_objective(gen_loss, fake_scores, weights: GanWeights) -> torch.Tensor:
    """alpha * L_G - beta * (1/K) sum_k mean log D(x~_k) (non-saturating form).

    Minimized by the generator; the adversarial term rewards fakes the
    discriminator scores as real.
    """
    _check_scores(fake_scores)
    adv = 0.0
    for fake in fake_scores:
        adv = adv + torch.log(torch.as_tensor(fake)).mean()
    adv = adv / len(fake_scores)
    return weights.alpha * gen_loss - weights.beta * adv
