"""K-user Gaussian interference channel simulation.

All learned-path signals are real, one real value per channel dimension;
``apply_awgn_ic`` injects i.i.d. zero-mean Gaussian noise of variance
``sigma2`` per real dimension with ``sigma2 = 10**(-snr_db/10)``, so the
per-dimension SNR of a unit-power signal equals the transmit SNR.  The
classical chain carries complex symbols; :func:`apply_awgn_complex` injects
circular complex noise of total power ``sigma2`` (``sigma2/2`` per
component), the same SNR under the two-real-dimensions-per-complex-use
accounting.

Every operation is pure given (inputs, seed): per-stage noise streams are
split off the caller's seed with :func:`split_streams`, so simultaneous and
orthogonal stages draw independent but reproducible noise.  Arrays may be
numpy (simulation, baselines) or torch tensors (training; noise injection
keeps autograd intact).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from .errors import InvalidNoise, ShapeMismatch


@dataclass(frozen=True)
class ChannelMatrix:
    """Real nonnegative K x K gain matrix; entry (i, j) is transmitter j -> receiver i."""

    gains: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gains, dtype=np.float64)
        object.__setattr__(self, "gains", g)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ShapeMismatch(f"channel matrix must be square, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise ShapeMismatch("channel gains must be finite")
        if np.any(g < 0):
            raise ShapeMismatch("channel gains must be nonnegative")
        if np.any(np.diag(g) <= 0):
            raise ShapeMismatch("direct gains (diagonal) must be positive")

    @property
    def k_users(self) -> int:
        return self.gains.shape[0]

    @classmethod
    def symmetric_pair(cls, h: float) -> "ChannelMatrix":
        """Two-user symmetric channel with unit direct gains and cross gain |h|."""
        return cls(np.array([[1.0, h], [h, 1.0]]))

    @classmethod
    def identity(cls, k: int) -> "ChannelMatrix":
        return cls(np.eye(k))


@dataclass(frozen=True)
class NoiseSpec:
    """Transmit SNR in dB and the derived noise power sigma2 = 10**(-snr_db/10)."""

    snr_db: float
    sigma2: float
    noiseless: bool = False

    def __post_init__(self):
        if self.noiseless:
            if self.sigma2 != 0.0:
                raise InvalidNoise("noiseless spec must carry sigma2 = 0")
            return
        if self.sigma2 <= 0:
            raise InvalidNoise(f"sigma2 must be positive, got {self.sigma2}")
        expected = 10.0 ** (-self.snr_db / 10.0)
        if abs(self.sigma2 - expected) > 1e-12 * expected:
            raise InvalidNoise(
                f"sigma2={self.sigma2!r} inconsistent with snr_db={self.snr_db!r} "
                f"(expected {expected!r})"
            )

    @classmethod
    def from_snr_db(cls, snr_db: float) -> "NoiseSpec":
        return cls(snr_db=snr_db, sigma2=10.0 ** (-snr_db / 10.0))

    @classmethod
    def none(cls) -> "NoiseSpec":
        """Explicit noiseless channel (sigma2 = 0)."""
        return cls(snr_db=float("inf"), sigma2=0.0, noiseless=True)


@dataclass
class SignalBlock:
    """Stacked per-user signal rows [K, L] with a stage tag ('common' or 'private:j')."""

    values: object  # numpy array or torch tensor, shape [K, L]
    stage: str = "common"

    def __post_init__(self):
        if getattr(self.values, "ndim", None) != 2:
            raise ShapeMismatch("signal block must be a 2-D [K, L] array")


def split_streams(seed, n):
    """Split a master seed into ``n`` independent child seeds.

    ``seed`` may be an int or a numpy SeedSequence; children are
    SeedSequences usable anywhere a seed is accepted.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return ss.spawn(n)


def _as_seedseq(seed):
    if seed is None:
        return np.random.SeedSequence()
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _randn_like(x, seed):
    """Standard-normal array matching x's backend, shape and dtype."""
    ss = _as_seedseq(seed)
    if isinstance(x, torch.Tensor):
        gen = torch.Generator()
        gen.manual_seed(int(ss.generate_state(1, np.uint64)[0] & 0x7FFFFFFFFFFFFFFF))
        return torch.randn(x.shape, generator=gen, dtype=x.dtype, device=x.device)
    rng = np.random.default_rng(ss)
    return rng.standard_normal(size=x.shape).astype(x.dtype, copy=False)


def _matmul_gains(channel: ChannelMatrix, x):
    if isinstance(x, torch.Tensor):
        h = torch.as_tensor(channel.gains, dtype=x.dtype, device=x.device)
        return h @ x
    return channel.gains.astype(x.dtype, copy=False) @ x


def _check_noise(noise: NoiseSpec):
    if noise.sigma2 <= 0 and not noise.noiseless:
        raise InvalidNoise("sigma2 <= 0 requires the explicit noiseless flag")


def apply_awgn_ic(channel: ChannelMatrix, block, noise: NoiseSpec, seed=None):
    """Y = H X + N over real dimensions; noise variance sigma2 per entry.

    ``block`` may be a SignalBlock or a bare [K, L] array (numpy or torch);
    the return type mirrors the input.  Deterministic given ``seed``.
    """
    is_block = isinstance(block, SignalBlock)
    x = block.values if is_block else block
    if getattr(x, "ndim", None) != 2 or x.shape[0] != channel.k_users:
        raise ShapeMismatch(
            f"expected [K={channel.k_users}, L] signal rows, got shape {tuple(x.shape)}"
        )
    _check_noise(noise)
    y = _matmul_gains(channel, x)
    if not noise.noiseless and noise.sigma2 > 0:
        y = y + np.sqrt(noise.sigma2) * _randn_like(y, seed)
    return SignalBlock(y, block.stage) if is_block else y


def st_stage(channel: ChannelMatrix, commons, noise: NoiseSpec, seed=None):
    """Simultaneous-transmission stage: all users' common parts share one block."""
    is_block = isinstance(commons, SignalBlock)
    x = commons.values if is_block else commons
    y = apply_awgn_ic(channel, x, noise, seed)
    return SignalBlock(y, "common") if is_block else y


def ob_stage(channel: ChannelMatrix, privates, noise: NoiseSpec, seed=None):
    """Orthogonal-broadcast stage: one transmitter active per block.

    ``privates`` is a sequence of K per-user vectors of equal length V.
    Block j carries user j's private part in row j and zeros elsewhere;
    each block draws an independent noise stream split from ``seed``.
    Returns a list of K received [K, V] arrays (Y_p,1 .. Y_p,K).
    """
    k = channel.k_users
    if len(privates) != k:
        raise ShapeMismatch(f"expected {k} private vectors, got {len(privates)}")
    lengths = {tuple(np.shape(p)) for p in privates}
    if len(lengths) != 1 or len(next(iter(lengths))) != 1:
        raise ShapeMismatch(f"private vectors must be 1-D and equal length, got {lengths}")
    _check_noise(noise)
    streams = split_streams(_as_seedseq(seed), k)
    outputs = []
    for j, (vec, stream) in enumerate(zip(privates, streams)):
        if isinstance(vec, torch.Tensor):
            x = torch.zeros((k, vec.shape[0]), dtype=vec.dtype, device=vec.device)
        else:
            x = np.zeros((k, vec.shape[0]), dtype=np.asarray(vec).dtype)
        x[j] = vec
        outputs.append(apply_awgn_ic(channel, x, noise, stream))
    return outputs


def apply_awgn_complex(channel: ChannelMatrix, x, noise: NoiseSpec, seed=None):
    """Complex-symbol IC: Y = H X + N with total complex noise power sigma2.

    ``x`` is a complex [K, L] numpy array; each noise component (real and
    imaginary) has variance sigma2 / 2.
    """
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != channel.k_users:
        raise ShapeMismatch(f"expected [K={channel.k_users}, L] symbols, got {x.shape}")
    _check_noise(noise)
    y = channel.gains @ x
    if not noise.noiseless and noise.sigma2 > 0:
        rng = np.random.default_rng(_as_seedseq(seed))
        scale = np.sqrt(noise.sigma2 / 2.0)
        y = y + scale * (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape))
    return y
