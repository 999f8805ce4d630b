"""Three-phase training: autoencoder, adversarial separator, alternation.

Phase 1 trains the codec alone on pixel MSE (no channel, no separator).
Phase 2 freezes the codec and trains the GAN separator on channel
simulations.  Phase 3 alternates: codec updated end-to-end through the
frozen separator, then the separator fine-tuned against the updated codec,
until the end-to-end validation loss converges.  Phase ordering is
enforced; every phase is reproducible under a fixed master seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import torch

from . import channel as ch
from . import codec as cd
from . import separator as sp
from .errors import (
    EmptyDataset,
    PhaseOrderViolation,
    PlanInconsistent,
    ShapeMismatch,
    TrainingDiverged,
)
from .plan import ResourcePlan, validate_plan

_EVAL_BATCH = 50


@dataclass
class PhaseConfig:
    """Knobs for one training phase (1, 2 or 3)."""

    phase: int
    epochs: int = 10
    batch_size: int = 32
    lr_codec: float = 1e-4
    lr_generator: float = 1e-4
    lr_discriminator: float = 2e-4
    snr_db: float = 15.0
    h_policy: str = "fixed"  # "fixed" or "uniform"
    h_value: float = 1.0
    h_range: tuple = (0.0, 2.0)
    seed: int = 0
    tol: float = 1e-3  # phase 3 convergence tolerance
    patience: int = 3  # phase 3 window length (alternations)
    max_alternations: int = 8

    def __post_init__(self):
        if self.phase not in (1, 2, 3):
            raise PhaseOrderViolation(f"unknown phase {self.phase}")
        if self.epochs <= 0 or self.batch_size <= 0:
            raise ShapeMismatch("epochs and batch size must be positive")
        # lr = 0 is allowed as an explicit no-op optimizer
        if min(self.lr_codec, self.lr_generator, self.lr_discriminator) < 0:
            raise ShapeMismatch("learning rates must be nonnegative")
        if self.h_policy not in ("fixed", "uniform"):
            raise ShapeMismatch(f"unknown interference policy {self.h_policy!r}")
        if self.max_alternations < 1 or self.patience < 1:
            raise ShapeMismatch("patience and max_alternations must be >= 1")


@dataclass
class TrainState:
    """Networks plus progress bookkeeping for the 3-step schedule."""

    plan: ResourcePlan
    arch: cd.ArchWidths
    encoder: cd.SemanticEncoder
    decoder: cd.SemanticDecoder
    generator: sp.CommonPartGenerator
    discriminator: sp.CommonPartDiscriminator
    gan_weights: sp.GanWeights = field(default_factory=sp.GanWeights)
    completed_phases: set = field(default_factory=set)
    loss_history: dict = field(default_factory=dict)
    alternations: int = 0

    def require_phases(self, *phases):
        missing = [p for p in phases if p not in self.completed_phases]
        if missing:
            raise PhaseOrderViolation(f"phases {missing} must complete first")

    def record(self, phase, name, value):
        self.loss_history.setdefault(phase, {}).setdefault(name, []).append(float(value))


def init_state(
    plan: ResourcePlan,
    arch: cd.ArchWidths = cd.ArchWidths(),
    gan_weights: sp.GanWeights | None = None,
    seed: int = 0,
) -> TrainState:
    """Seeded network construction for a validated plan."""
    validate_plan(plan)
    torch.manual_seed(seed)
    return TrainState(
        plan=plan,
        arch=arch,
        encoder=cd.SemanticEncoder(plan.e_layers, arch.codec),
        decoder=cd.SemanticDecoder(plan.e_layers, arch.codec),
        generator=sp.CommonPartGenerator(plan, arch.generator),
        discriminator=sp.CommonPartDiscriminator(max(plan.c_layers, 1), arch.discriminator),
        gan_weights=gan_weights or sp.GanWeights(),
    )


class TrainLogger:
    """Plain-text loss log: one `phase step name value` record per line."""

    def __init__(self, path):
        self.path = path
        self._fh = open(path, "a")

    def write(self, phase, step, name, value):
        self._fh.write(f"{phase} {step} {name} {value:.8g}\n")

    def close(self):
        self._fh.flush()
        self._fh.close()


def _as_tensor(images) -> torch.Tensor:
    arr = np.ascontiguousarray(images, dtype=np.float32)
    if arr.ndim != 4 or arr.shape[1] != 3:
        raise ShapeMismatch(f"corpus must be [N, 3, H, W], got {arr.shape}")
    if arr.shape[0] == 0:
        raise EmptyDataset("corpus is empty")
    return torch.from_numpy(arr)


def _check_finite(value, what):
    if not np.isfinite(float(value)):
        raise TrainingDiverged(f"{what} became non-finite")


def _set_trainable(module, flag):
    for p in module.parameters():
        p.requires_grad_(flag)


def _channel_for(k_users: int, h: float) -> ch.ChannelMatrix:
    gains = np.full((k_users, k_users), float(h))
    np.fill_diagonal(gains, 1.0)
    return ch.ChannelMatrix(gains)


def _draw_h(config: PhaseConfig, rng) -> float:
    if config.h_policy == "fixed":
        return float(config.h_value)
    return float(rng.uniform(*config.h_range))


def _autoencode(state: TrainState, images: torch.Tensor) -> torch.Tensor:
    return state.decoder(cd.power_normalize(state.encoder(images)))


def train_autoencoder_phase(state: TrainState, corpus, config: PhaseConfig, log=None) -> TrainState:
    """Phase 1: pixel-MSE autoencoder on the interference-free path."""
    if config.phase != 1:
        raise PhaseOrderViolation(f"expected a phase-1 config, got phase {config.phase}")
    train, val = (_as_tensor(corpus[0]), _as_tensor(corpus[1]))
    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)
    opt = torch.optim.Adam(
        list(state.encoder.parameters()) + list(state.decoder.parameters()), lr=config.lr_codec
    )
    step = 0
    for epoch in range(config.epochs):
        for idx in _batches(len(train), config.batch_size, rng):
            batch = train[idx]
            loss = torch.mean((batch - _autoencode(state, batch)) ** 2)
            opt.zero_grad()
            loss.backward()
            opt.step()
            _check_finite(loss, "phase-1 train loss")
            step += 1
        train_mse = float(loss.detach())
        val_mse = _autoencoder_val_mse(state, val, config.batch_size)
        _check_finite(val_mse, "phase-1 validation loss")
        state.record(1, "train_mse", train_mse)
        state.record(1, "val_mse", val_mse)
        if log:
            log.write(1, step, "train_mse", train_mse)
            log.write(1, step, "val_mse", val_mse)
    state.completed_phases.add(1)
    return state


def _autoencoder_val_mse(state, val, batch_size):
    total, n = 0.0, 0
    with torch.no_grad():
        for start in range(0, len(val), batch_size):
            batch = val[start : start + batch_size]
            total += float(torch.sum((batch - _autoencode(state, batch)) ** 2))
            n += batch.numel()
    return total / n


def _batches(n, batch_size, rng):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]


def _paired_batches(n, k_users, batch_size, rng):
    """K index rows per step: user 1 order shuffled, others cyclically shifted."""
    order = rng.permutation(n)
    shift = max(1, n // k_users)
    rows = [np.roll(order, j * shift) for j in range(k_users)]
    for start in range(0, n, batch_size):
        yield [row[start : start + batch_size] for row in rows]


def simulate_two_stage(state: TrainState, user_images, channel, noise: ch.NoiseSpec, seed):
    """Encode K user batches and push them through the ST + OB stages.

    ``channel`` is a ChannelMatrix or a scalar cross gain (symmetric
    channel with unit direct gains).  Returns a dict with the true
    normalized features/splits and, per receiver r, the received common
    block and the K received prompt blocks.  Torch end to end, so gradients
    flow back into the encoder.
    """
    plan = state.plan
    k = plan.k_users
    if len(user_images) != k:
        raise ShapeMismatch(f"need {k} user batches, got {len(user_images)}")
    b = user_images[0].shape[0]
    feats = [cd.power_normalize(state.encoder(imgs)) for imgs in user_images]
    splits = [cd.split_features(f, plan.p_layers) for f in feats]
    st_seed, ob_seed = ch.split_streams(seed, 2)
    hmat = channel if isinstance(channel, ch.ChannelMatrix) else _channel_for(k, channel)
    if hmat.k_users != k:
        raise PlanInconsistent(f"channel is {hmat.k_users}-user, plan expects {k}")

    received_common = [None] * k
    if plan.c_layers > 0:
        rows = torch.stack([s.common.reshape(-1) for s in splits])  # [K, B*U]
        y_c = ch.st_stage(hmat, rows, noise, st_seed)
        received_common = [
            y_c[r].reshape(b, plan.c_layers, plan.h_feat, plan.w_feat) for r in range(k)
        ]
    privates = [s.private.reshape(-1) for s in splits]  # [B*V] each
    y_p = ch.ob_stage(hmat, privates, noise, ob_seed)
    received_prompts = [
        [y_p[j][r].reshape(b, plan.p_layers, plan.h_feat, plan.w_feat) for j in range(k)]
        for r in range(k)
    ]
    return {
        "features": feats,
        "splits": splits,
        "received_common": received_common,
        "received_prompts": received_prompts,
        "channel": hmat,
    }


def _receiver_assembled(state, sim, r):
    plan = state.plan
    if plan.c_layers == 0:
        return None
    return sp.assemble_input(sim["received_common"][r], sim["received_prompts"][r], plan)


def train_separator_phase(state: TrainState, corpus, config: PhaseConfig, log=None) -> TrainState:
    """Phase 2: adversarial separator training against the frozen codec."""
    if config.phase != 2:
        raise PhaseOrderViolation(f"expected a phase-2 config, got phase {config.phase}")
    state.require_phases(1)
    if state.plan.c_layers == 0:
        # degenerate plan: nothing is superimposed, separation is skipped
        state.completed_phases.add(2)
        return state
    train, _val = (_as_tensor(corpus[0]), _as_tensor(corpus[1]))
    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)
    seed_root = np.random.SeedSequence(config.seed)
    noise = ch.NoiseSpec.from_snr_db(config.snr_db)
    _set_trainable(state.encoder, False)
    _set_trainable(state.decoder, False)
    _set_trainable(state.generator, True)
    _set_trainable(state.discriminator, True)
    g_opt = torch.optim.Adam(state.generator.parameters(), lr=config.lr_generator)
    d_opt = torch.optim.Adam(state.discriminator.parameters(), lr=config.lr_discriminator)
    step = 0
    for epoch in range(config.epochs):
        for rows in _paired_batches(len(train), state.plan.k_users, config.batch_size, rng):
            user_images = [train[idx] for idx in rows]
            h = _draw_h(config, rng)
            with torch.no_grad():
                sim = simulate_two_stage(state, user_images, h, noise, seed_root.spawn(1)[0])
            r = step % state.plan.k_users
            assembled = _receiver_assembled(state, sim, r)
            truths = [s.common for s in sim["splits"]]
            preds = sp.generate(assembled, state.generator)

            real_scores = [sp.discriminate(t, state.discriminator) for t in truths]
            fake_scores = [sp.discriminate(p.detach(), state.discriminator) for p in preds]
            l_d = sp.loss_discriminator(real_scores, fake_scores)
            d_opt.zero_grad()
            (-l_d).backward()  # ascent on L_D
            d_opt.step()

            fake_scores = [sp.discriminate(p, state.discriminator) for p in preds]
            l_g = sp.loss_generator(preds, truths)
            objective = sp.adversarial_objective(l_g, fake_scores, state.gan_weights)
            g_opt.zero_grad()
            objective.backward()
            g_opt.step()

            _check_finite(l_d, "discriminator loss")
            _check_finite(l_g, "generator loss")
            state.record(2, "loss_d", float(l_d))
            state.record(2, "loss_g", float(l_g))
            if log:
                log.write(2, step, "loss_d", float(l_d))
                log.write(2, step, "loss_g", float(l_g))
            step += 1
    _set_trainable(state.encoder, True)
    _set_trainable(state.decoder, True)
    state.completed_phases.add(2)
    return state


def _pipeline_reconstruction(state, sim, r):
    """Receiver r's end-to-end reconstruction (separated common + own prompt)."""
    plan = state.plan
    own_prompt = sim["received_prompts"][r][r]
    if plan.c_layers == 0:
        merged = cd.pad_embed(own_prompt, plan, "private")
        return state.decoder(merged)
    assembled = _receiver_assembled(state, sim, r)
    preds = sp.generate(assembled, state.generator)
    merged = cd.pad_embed(preds[r], plan, "common") + cd.pad_embed(own_prompt, plan, "private")
    return state.decoder(merged)


def end_to_end_val_loss(state: TrainState, val_images, config: PhaseConfig, seed=None) -> float:
    """Mean pixel MSE of receiver-1 reconstructions over the validation set."""
    val = _as_tensor(val_images)
    rng = np.random.default_rng(config.seed if seed is None else seed)
    seed_root = np.random.SeedSequence((config.seed if seed is None else seed) + 1)
    noise = ch.NoiseSpec.from_snr_db(config.snr_db)
    total, n = 0.0, 0
    with torch.no_grad():
        for rows in _paired_batches(len(val), state.plan.k_users, _EVAL_BATCH, rng):
            user_images = [val[idx] for idx in rows]
            h = _draw_h(config, rng)
            sim = simulate_two_stage(state, user_images, h, noise, seed_root.spawn(1)[0])
            recon = _pipeline_reconstruction(state, sim, 0)
            total += float(torch.sum((user_images[0] - recon) ** 2))
            n += user_images[0].numel()
    return total / n


def alternate_phase(state: TrainState, corpus, config: PhaseConfig, log=None) -> TrainState:
    """Phase 3: alternately refine codec (separator frozen) and separator.

    Stops when the end-to-end validation loss improves by less than ``tol``
    (relative) over a window of min(t, patience) alternations, or at
    ``max_alternations``.
    """
    if config.phase != 3:
        raise PhaseOrderViolation(f"expected a phase-3 config, got phase {config.phase}")
    state.require_phases(1, 2)
    train, val = corpus
    train_t = _as_tensor(train)
    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)
    seed_root = np.random.SeedSequence(config.seed)
    noise = ch.NoiseSpec.from_snr_db(config.snr_db)
    codec_opt = torch.optim.Adam(
        list(state.encoder.parameters()) + list(state.decoder.parameters()), lr=config.lr_codec
    )
    sep_config = replace(config, phase=2, epochs=1)
    history = [end_to_end_val_loss(state, val, config)]
    step = 0
    for t in range(1, config.max_alternations + 1):
        # (a) codec end-to-end, separator frozen
        _set_trainable(state.generator, False)
        _set_trainable(state.discriminator, False)
        _set_trainable(state.encoder, True)
        _set_trainable(state.decoder, True)
        for rows in _paired_batches(len(train_t), state.plan.k_users, config.batch_size, rng):
            user_images = [train_t[idx] for idx in rows]
            h = _draw_h(config, rng)
            sim = simulate_two_stage(state, user_images, h, noise, seed_root.spawn(1)[0])
            r = step % state.plan.k_users
            recon = _pipeline_reconstruction(state, sim, r)
            loss = torch.mean((user_images[r] - recon) ** 2)
            codec_opt.zero_grad()
            loss.backward()
            codec_opt.step()
            _check_finite(loss, "phase-3 codec loss")
            state.record(3, "codec_mse", float(loss))
            if log:
                log.write(3, step, "codec_mse", float(loss))
            step += 1
        # (b) separator fine-tune, codec frozen
        _set_trainable(state.generator, True)
        _set_trainable(state.discriminator, True)
        state.completed_phases.discard(2)
        state.completed_phases.add(1)
        state.completed_phases.add(2)  # re-run phase-2 inner loop below
        train_separator_phase(state, (train, val), replace(sep_config, seed=config.seed + t), log)
        state.alternations = t

        v = end_to_end_val_loss(state, val, config)
        _check_finite(v, "phase-3 validation loss")
        history.append(v)
        state.record(3, "val_mse", v)
        if log:
            log.write(3, step, "val_mse", v)
        window = min(t, config.patience)
        ref = history[t - window]
        if ref <= 0 or (ref - v) / ref < config.tol:
            break
    state.completed_phases.add(3)
    return state
