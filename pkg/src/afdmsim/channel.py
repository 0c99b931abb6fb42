"""Delay-Doppler multipath channels and their transform-domain form.

A channel is a set of paths (complex gain, integer sample delay, integer
Doppler bin).  Applied in the time domain it is a Doppler-modulated tapped
delay line; seen through the AFDM transform pair it collapses to a sparse
matrix with one cyclic off-diagonal per path, at column offset

    offset = doppler + (2*alpha_c1 + 1) * delay   (mod N)

That collapse is the load-bearing identity of the whole library and is
verified two independent ways in the tests (dense matrix products of the
modulation pipeline, and the brute-force geometric sum).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .core import AfdmConfig, TimeSignal
from .errors import ConfigError, ShapeError

__all__ = [
    "ChannelPath",
    "ChannelRealization",
    "NoiseSpec",
    "path_offset",
    "generate_channel",
    "apply_channel",
    "build_effective_channel",
    "effective_channel_from_triples",
    "geometric_sum_kernel",
    "awgn",
]


@dataclass(frozen=True)
class ChannelPath:
    """One propagation path: complex gain, sample delay, Doppler bin."""

    gain: complex
    delay: int
    doppler: int

    def __post_init__(self) -> None:
        if self.delay < 0:
            raise ConfigError(f"path delay must be non-negative, got {self.delay}")


@dataclass(frozen=True)
class ChannelRealization:
    paths: tuple[ChannelPath, ...]
    max_delay: int
    max_doppler: int

    def __post_init__(self) -> None:
        if not self.paths:
            raise ConfigError("channel needs at least one path")
        delays = [p.delay for p in self.paths]
        if len(set(delays)) != len(delays):
            raise ConfigError("path delays must be pairwise distinct")
        if max(delays) != self.max_delay:
            raise ConfigError("max_delay must equal the largest path delay")
        if max(abs(p.doppler) for p in self.paths) != self.max_doppler:
            raise ConfigError("max_doppler must equal the largest |doppler|")


@dataclass(frozen=True)
class NoiseSpec:
    """Complex noise variance per sample."""

    n0: float

    def __post_init__(self) -> None:
        if self.n0 < 0:
            raise ConfigError(f"noise variance must be >= 0, got {self.n0}")


def path_offset(doppler: int, delay: int, alpha_c1: int, n: int) -> int:
    """Cyclic column offset a path maps to in the transform domain."""
    return (doppler + (2 * alpha_c1 + 1) * delay) % n


def generate_channel(
    rng_seed: int,
    num_paths: int,
    max_delay: int,
    max_doppler: int,
) -> ChannelRealization:
    """Draw a random channel with the stated extremes actually present.

    Delays are distinct values from {0..max_delay} with both endpoints forced,
    Doppler bins are uniform in [-max_doppler, max_doppler] with one path
    forced to the extreme magnitude, and gains are i.i.d. circularly-symmetric
    Gaussian with total mean power 1.  Deterministic for a given seed.
    """
    if num_paths < 1:
        raise ConfigError("need at least one path")
    if num_paths > max_delay + 1:
        raise ConfigError(
            f"{num_paths} distinct delays do not fit in 0..{max_delay}"
        )
    if max_delay > 0 and num_paths < 2:
        raise ConfigError(
            "cannot realize max_delay > 0 with a single path at delay 0"
        )
    rng = np.random.default_rng(rng_seed)
    if max_delay == 0:
        delays = np.array([0])
    else:
        middle = rng.permutation(np.arange(1, max_delay))[: num_paths - 2]
        delays = np.sort(np.concatenate([[0, max_delay], middle]))
    dopplers = rng.integers(-max_doppler, max_doppler + 1, size=num_paths)
    forced = int(rng.integers(num_paths))
    dopplers[forced] = max_doppler * (1 if rng.integers(2) else -1)
    gains = rng.standard_normal(num_paths) + 1j * rng.standard_normal(num_paths)
    gains *= np.sqrt(1.0 / (2 * num_paths))
    paths = tuple(
        ChannelPath(gain=complex(g), delay=int(d), doppler=int(a))
        for g, d, a in zip(gains, delays, dopplers)
    )
    return ChannelRealization(
        paths=paths, max_delay=int(max_delay), max_doppler=int(max_doppler)
    )


def apply_channel(
    cfg: AfdmConfig,
    chan: ChannelRealization,
    s: TimeSignal,
    noise: NoiseSpec,
    rng_seed: int,
) -> TimeSignal:
    """Pass a prefixed signal through the channel and add noise.

    Time index n = 0 sits at the first body sample; the prefix carries the
    negative indices that supply the delayed history, which is why the prefix
    must be at least as long as the largest path delay.
    """
    if not s.has_prefix:
        raise ShapeError("channel input must carry its prefix")
    if cfg.cpp_len < chan.max_delay:
        raise ConfigError(
            f"prefix of {cfg.cpp_len} samples cannot absorb delay "
            f"{chan.max_delay}"
        )
    total = len(s.samples)
    n_idx = np.arange(total) - s.prefix_len
    out = np.zeros(total, dtype=np.complex128)
    for p in chan.paths:
        shifted = np.zeros(total, dtype=np.complex128)
        if p.delay == 0:
            shifted[:] = s.samples
        else:
            shifted[p.delay :] = s.samples[: total - p.delay]
        phase = np.exp(-2j * np.pi * ((p.doppler * n_idx) % cfg.n) / cfg.n)
        out += p.gain * phase * shifted
    out += awgn(total, noise.n0, rng_seed)
    return TimeSignal(samples=out, has_prefix=True, body_len=s.body_len)


def effective_channel_from_triples(
    n: int,
    alpha_c1: int,
    c2: float,
    triples: list[tuple[complex, int, int]],
) -> sp.csr_matrix:
    """Assemble the sparse transform-domain channel from (gain, delay, doppler).

    Row p draws from column q = (p + offset) mod n with per-entry phase
    exp(j*2*pi/n * (n*c1*delay^2 - q*delay + n*c2*(q^2 - p^2))).  Shared by
    the ground-truth builder and by receiver-side reconstruction so that both
    sides of the link use one index/phase convention.
    """
    rows_all, cols_all, vals_all = [], [], []
    p = np.arange(n, dtype=np.int64)
    stride = 2 * alpha_c1 + 1
    c2_frac = float(c2) - np.floor(float(c2))
    for gain, delay, doppler in triples:
        q = (p + doppler + stride * delay) % n
        # c1 part has an exact rational representation with denominator 2n
        t1 = (stride * delay * delay - 2 * q * delay) % (2 * n)
        ph = t1 / (2.0 * n) + (c2_frac * (q * q - p * p).astype(np.float64)) % 1.0
        vals_all.append(gain * np.exp(2j * np.pi * ph))
        rows_all.append(p)
        cols_all.append(q)
    if not triples:
        return sp.csr_matrix((n, n), dtype=np.complex128)
    mat = sp.coo_matrix(
        (np.concatenate(vals_all), (np.concatenate(rows_all), np.concatenate(cols_all))),
        shape=(n, n),
    )
    return mat.tocsr()


def build_effective_channel(
    cfg: AfdmConfig, chan: ChannelRealization
) -> sp.csr_matrix:
    """Exact transform-domain channel matrix for a known realization.

    Each path contributes one non-zero per row; paths whose (delay, doppler)
    pairs alias to the same cyclic offset sum on the same diagonal, which is
    the mechanism behind missed-Doppler estimation errors.
    """
    triples = [(p.gain, p.delay, p.doppler) for p in chan.paths]
    return effective_channel_from_triples(cfg.n, cfg.alpha_c1, float(cfg.c2), triples)


def geometric_sum_kernel(
    n: int, p: int, q: int, alpha: int, delay: int, alpha_c1: int
) -> complex:
    """Brute-force inner sum of the transform-domain channel entry.

    sum_k exp(-j*2*pi/n * (p - q + alpha + (2*alpha_c1+1)*delay) * k).
    Collapses to n exactly when q matches the path's cyclic offset from p and
    to 0 otherwise; the closed-form builders rely on that collapse, so this
    literal sum is kept as their independent witness.
    """
    if not (0 <= p < n and 0 <= q < n):
        raise ShapeError("row and column indices must lie in [0, n)")
    k = np.arange(n)
    arg = (p - q + alpha + (2 * alpha_c1 + 1) * delay) % n
    return complex(np.sum(np.exp(-2j * np.pi * arg * k / n)))


def awgn(length: int, n0: float, rng_seed: int) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with variance n0."""
    if n0 < 0:
        raise ConfigError(f"noise variance must be >= 0, got {n0}")
    if n0 == 0:
        return np.zeros(length, dtype=np.complex128)
    rng = np.random.default_rng(rng_seed)
    w = rng.standard_normal(length) + 1j * rng.standard_normal(length)
    return w * np.sqrt(n0 / 2.0)
