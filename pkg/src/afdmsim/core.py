"""Core AFDM modulation: exact DAFT/IDAFT transforms and the chirp-periodic prefix.

The transform pair is a unitary DFT sandwiched between two quadratic-phase
(chirp) multiplications with parameters c1 and c2.  Forward (demodulation):

    y[m] = (1/sqrt(N)) * sum_n r[n] * exp(-j*2*pi*(c1*n^2 + m*n/N + c2*m^2))

and the inverse (modulation) conjugates every phase.  c1 is kept as an exact
rational so that 2*N*c1 being an odd integer - the condition that makes
delay-Doppler paths separate onto distinct cyclic diagonals - can be checked
and exploited without float drift.  c2 stays a float; its sub-1e-6 sensitivity
is a feature, not an accident.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ConfigError, ShapeError, StateError

__all__ = [
    "AfdmConfig",
    "TimeSignal",
    "DaftSymbols",
    "make_config",
    "idaft_modulate",
    "daft_demodulate",
    "add_cpp",
    "remove_cpp",
    "guard_region_size",
]


def guard_region_size(alpha_max: int, l_guard_max: int) -> int:
    """Number of null symbols reserved around the pilot.

    One full block span (2*alpha_max+1)*(l_guard_max+1) below the pilot plus a
    two-sided Doppler margin of 2*alpha_max above it.
    """
    return (2 * alpha_max + 1) * (l_guard_max + 1) + 2 * alpha_max


@dataclass(frozen=True)
class AfdmConfig:
    """Frame-level AFDM parameters shared by transmitter and receiver.

    c1 is an exact rational.  For a delay-Doppler-separable waveform it has
    the form (2*alpha_c1 + 1) / (2*n); `alpha_c1` exposes that integer and
    raises for configs outside the separable grid (useful only for degenerate
    test setups such as c1 = 0, where the transform reduces to a plain DFT).
    """

    n: int
    c1: Fraction
    c2: float
    alpha_max: int
    l_guard_max: int
    cpp_len: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ConfigError(f"frame length must be >= 2, got {self.n}")
        if not isinstance(self.c1, Fraction):
            object.__setattr__(self, "c1", Fraction(self.c1))
        if self.alpha_max < 0 or self.l_guard_max < 0:
            raise ConfigError("guard bounds must be non-negative")
        if self.cpp_len < self.l_guard_max:
            raise ConfigError(
                f"prefix length {self.cpp_len} shorter than delay guard "
                f"{self.l_guard_max}"
            )
        capacity = guard_region_size(self.alpha_max, self.l_guard_max) + 1
        if self.n < capacity + 1:
            raise ConfigError(
                f"frame of {self.n} symbols cannot hold pilot + guard "
                f"({capacity}) and at least one data symbol"
            )

    @property
    def alpha_c1(self) -> int:
        """Doppler-separation capability (2*n*c1 - 1) / 2.

        Defined only when 2*n*c1 is an odd integer; that is what makes each
        propagation path land on a single cyclic diagonal.
        """
        twice = 2 * self.n * self.c1
        if twice.denominator != 1 or twice.numerator % 2 != 1:
            raise ConfigError(
                f"c1 = {self.c1} is not of the form (2k+1)/(2n); "
                "paths do not separate"
            )
        alpha = (twice.numerator - 1) // 2
        if alpha < 0:
            raise ConfigError(f"c1 = {self.c1} gives negative alpha_c1")
        return alpha


@dataclass(eq=False)
class TimeSignal:
    """A complex baseband signal, optionally carrying a chirp-periodic prefix."""

    samples: np.ndarray
    has_prefix: bool
    body_len: int

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.complex128)
        if self.samples.ndim != 1:
            raise ShapeError("time signal must be one-dimensional")
        if not self.has_prefix and len(self.samples) != self.body_len:
            raise ShapeError(
                f"unprefixed signal length {len(self.samples)} != body "
                f"length {self.body_len}"
            )
        if self.has_prefix and len(self.samples) < self.body_len:
            raise ShapeError("prefixed signal shorter than its body")

    @property
    def prefix_len(self) -> int:
        return len(self.samples) - self.body_len


@dataclass(eq=False)
class DaftSymbols:
    """One frame of transform-domain symbols."""

    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.ndim != 1:
            raise ShapeError("symbol frame must be one-dimensional")

    def __len__(self) -> int:
        return len(self.values)


def make_config(
    n: int,
    alpha_c1: int,
    c2: float,
    alpha_max: int,
    l_guard_max: int,
    cpp_len: int | None = None,
) -> AfdmConfig:
    """Build a config with c1 = (2*alpha_c1 + 1) / (2*n) stored exactly.

    The prefix length defaults to the delay guard bound, the smallest value
    that keeps every in-bound channel's history inside the prefix.
    """
    if n < 2:
        raise ConfigError(f"frame length must be >= 2, got {n}")
    if alpha_c1 < 0:
        raise ConfigError(f"alpha_c1 must be non-negative, got {alpha_c1}")
    c1 = Fraction(2 * alpha_c1 + 1, 2 * n)
    return AfdmConfig(
        n=n,
        c1=c1,
        c2=float(c2),
        alpha_max=alpha_max,
        l_guard_max=l_guard_max,
        cpp_len=l_guard_max if cpp_len is None else cpp_len,
    )


# Chirp phases are reduced to [0, 1) turns in exact rational arithmetic before
# the complex exponential is evaluated.  For c1 = p/q the products p*k^2 grow
# like N^2 and a naive float product would cost ~1e-9 of phase at N = 512.
@lru_cache(maxsize=64)
def _chirp_vector(n: int, c: Fraction) -> np.ndarray:
    p, q = c.numerator, c.denominator
    turns = [(p * k * k) % q for k in range(n)]
    vec = np.exp(2j * np.pi * np.array(turns, dtype=np.float64) / q)
    vec.setflags(write=False)
    return vec


@lru_cache(maxsize=256)
def _chirp_vector_float(n: int, c: float) -> np.ndarray:
    frac = Fraction(c)
    turns = [float((frac * k * k) % 1) for k in range(n)]
    vec = np.exp(2j * np.pi * np.array(turns, dtype=np.float64))
    vec.setflags(write=False)
    return vec


def _chirps(cfg: AfdmConfig) -> tuple[np.ndarray, np.ndarray]:
    return (
        _chirp_vector(cfg.n, cfg.c1),
        _chirp_vector_float(cfg.n, float(cfg.c2)),
    )


def idaft_modulate(cfg: AfdmConfig, x: DaftSymbols) -> TimeSignal:
    """Map one frame of transform-domain symbols into the time domain.

    s[n] = (1/sqrt(N)) * sum_m x[m] * exp(j*2*pi*(c1*n^2 + m*n/N + c2*m^2))

    Implemented as chirp-multiply, unitary inverse FFT, chirp-multiply; the
    literal double-loop summation is kept in the test suite as an oracle.
    """
    if len(x) != cfg.n:
        raise ShapeError(f"expected {cfg.n} symbols, got {len(x)}")
    chirp1, chirp2 = _chirps(cfg)
    body = chirp1 * (np.fft.ifft(chirp2 * x.values) * np.sqrt(cfg.n))
    return TimeSignal(samples=body, has_prefix=False, body_len=cfg.n)


def daft_demodulate(cfg: AfdmConfig, r: TimeSignal) -> DaftSymbols:
    """Map a prefix-free time-domain signal back to transform-domain symbols.

    Inverse of :func:`idaft_modulate`; the two directions share the cached
    chirp vectors, so the round trip is exact to FFT roundoff.
    """
    if r.has_prefix:
        raise StateError("remove the prefix before demodulating")
    if len(r.samples) != cfg.n:
        raise ShapeError(f"expected {cfg.n} samples, got {len(r.samples)}")
    chirp1, chirp2 = _chirps(cfg)
    values = np.conj(chirp2) * (np.fft.fft(np.conj(chirp1) * r.samples) / np.sqrt(cfg.n))
    return DaftSymbols(values=values)


def _cpp_factors(cfg: AfdmConfig) -> np.ndarray:
    # prefix position j holds body sample n = j - cpp_len, scaled by
    # exp(-j*2*pi*c1*(N^2 + 2*N*n)); reduced exactly, the factor is +/-1 for
    # every c1 on the separable grid (+1 when N is even).
    n_body = cfg.n
    factors = np.empty(cfg.cpp_len, dtype=np.complex128)
    for j in range(cfg.cpp_len):
        n_idx = j - cfg.cpp_len
        turns = (-cfg.c1 * (n_body * n_body + 2 * n_body * n_idx)) % 1
        if turns == 0:
            factors[j] = 1.0
        elif turns == Fraction(1, 2):
            factors[j] = -1.0
        else:
            factors[j] = np.exp(2j * np.pi * float(turns))
    return factors


def add_cpp(cfg: AfdmConfig, s: TimeSignal) -> TimeSignal:
    """Prepend the chirp-periodic prefix.

    The prefix copies the tail of the body with a c1-dependent phase; on the
    separable c1 grid with even N that phase is exactly 1 and the prefix
    degenerates to a plain cyclic prefix.
    """
    if s.has_prefix:
        raise StateError("signal already carries a prefix")
    if len(s.samples) != cfg.n:
        raise ShapeError(f"expected body of {cfg.n} samples, got {len(s.samples)}")
    if cfg.cpp_len == 0:
        return TimeSignal(samples=s.samples.copy(), has_prefix=True, body_len=cfg.n)
    prefix = s.samples[cfg.n - cfg.cpp_len :] * _cpp_factors(cfg)
    return TimeSignal(
        samples=np.concatenate([prefix, s.samples]),
        has_prefix=True,
        body_len=cfg.n,
    )


def remove_cpp(cfg: AfdmConfig, r: TimeSignal) -> TimeSignal:
    """Drop the prefix samples, leaving the frame body."""
    if not r.has_prefix:
        raise StateError("signal has no prefix to remove")
    if r.prefix_len != cfg.cpp_len:
        raise ShapeError(
            f"signal prefix length {r.prefix_len} != configured {cfg.cpp_len}"
        )
    return TimeSignal(
        samples=r.samples[cfg.cpp_len :].copy(),
        has_prefix=False,
        body_len=r.body_len,
    )
