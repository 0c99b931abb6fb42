"""Pilot frame construction and pilot-aided path estimation.

One pilot symbol is embedded per frame, surrounded by a null guard sized by
the preset bounds (alpha_max, L_max).  A path with Doppler bin a and delay l
moves the pilot from input index u to output index u - (a + (2*alpha_c1+1)*l)
mod N, so the guard is laid out from that offset map rather than transcribed
from interval endpoints: all indices reachable under in-bound channels sit
below the pilot (plus a Doppler margin above), and anything the estimator
scans beyond the presets provably lands on data symbols.

The estimator is a matched filter on the candidate grid
(l in [0, l_max], a in [-alpha_c1, alpha_c1]): each candidate reads one
output index, strips the known per-path phase, and normalizes by the pilot
amplitude.  Candidates are kept above a relative threshold with an absolute
noise floor.  The same machinery serves legitimate receivers and
eavesdroppers; only their parameters differ.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .channel import effective_channel_from_triples, path_offset
from .core import AfdmConfig, DaftSymbols, guard_region_size
from .errors import ConfigError, ShapeError

__all__ = [
    "FrameLayout",
    "ReceiverParams",
    "PathEstimate",
    "build_frame_layout",
    "place_frame",
    "extract_data",
    "estimate_channel",
    "reconstruct_heff",
]


@dataclass(eq=False)
class FrameLayout:
    """Index roles of one frame: a pilot, a null guard, and data."""

    n: int
    pilot_index: int
    pilot_amplitude: float
    guard_indices: np.ndarray
    data_indices: np.ndarray

    def __post_init__(self) -> None:
        if self.pilot_amplitude <= 0:
            raise ConfigError("pilot amplitude must be positive")
        self.guard_indices = np.asarray(self.guard_indices, dtype=np.int64)
        self.data_indices = np.asarray(self.data_indices, dtype=np.int64)
        roles = 1 + len(self.guard_indices) + len(self.data_indices)
        combined = set(self.guard_indices) | set(self.data_indices) | {self.pilot_index}
        if roles != self.n or len(combined) != self.n:
            raise ConfigError("pilot, guard and data must partition the frame")


@dataclass(frozen=True)
class ReceiverParams:
    """Estimation-side knobs of one receiver (legitimate or eavesdropper)."""

    alpha_c1_rx: int
    c2_rx: float
    l_max_rx: int
    detection_threshold: float = 0.05

    def __post_init__(self) -> None:
        if not 0 < self.detection_threshold < 1:
            raise ConfigError("detection threshold must be in (0, 1)")
        if self.alpha_c1_rx < 0 or self.l_max_rx < 0:
            raise ConfigError("receiver bounds must be non-negative")


@dataclass(frozen=True)
class PathEstimate:
    gain_hat: complex
    delay_hat: int
    doppler_hat: int


def build_frame_layout(cfg: AfdmConfig, pilot_amplitude: float = 1.0) -> FrameLayout:
    """Place pilot, guard and data indices for the preset bounds.

    The pilot sits exactly at the largest in-bound offset, so the guard below
    it absorbs every delay-shifted pilot image while the first out-of-preset
    estimation block already overlaps data.  Above the pilot the guard keeps a
    margin for negative-Doppler images.  Guard size is
    (2*alpha_max+1)*(L_max+1) + 2*alpha_max.
    """
    n, a_max, l_max = cfg.n, cfg.alpha_max, cfg.l_guard_max
    reach_below = max(
        a + (2 * a_max + 1) * l
        for l in range(l_max + 1)
        for a in range(-a_max, a_max + 1)
    )
    pilot = reach_below
    guard_total = guard_region_size(a_max, l_max)
    above = guard_total - reach_below
    guard = np.concatenate(
        [np.arange(0, pilot), np.arange(pilot + 1, pilot + above + 1)]
    )
    data = np.arange(pilot + above + 1, n)
    layout = FrameLayout(
        n=n,
        pilot_index=pilot,
        pilot_amplitude=pilot_amplitude,
        guard_indices=guard,
        data_indices=data,
    )
    _verify_guard_containment(layout, cfg)
    return layout


def _verify_guard_containment(layout: FrameLayout, cfg: AfdmConfig) -> None:
    # every pilot image under an in-bound channel must land on guard or pilot
    safe = set(layout.guard_indices.tolist()) | {layout.pilot_index}
    u, n = layout.pilot_index, layout.n
    for l in range(cfg.l_guard_max + 1):
        for a in range(-cfg.alpha_max, cfg.alpha_max + 1):
            hit = (u - path_offset(a, l, cfg.alpha_max, n)) % n
            if hit not in safe:
                raise ConfigError(
                    f"guard does not absorb pilot image at index {hit} "
                    f"for (delay={l}, doppler={a})"
                )


def place_frame(
    layout: FrameLayout, data_symbols: np.ndarray
) -> DaftSymbols:
    """Assemble one transform-domain frame from data symbols and the pilot."""
    data_symbols = np.asarray(data_symbols, dtype=np.complex128)
    if len(data_symbols) != len(layout.data_indices):
        raise ShapeError(
            f"expected {len(layout.data_indices)} data symbols, "
            f"got {len(data_symbols)}"
        )
    values = np.zeros(layout.n, dtype=np.complex128)
    values[layout.pilot_index] = layout.pilot_amplitude
    values[layout.data_indices] = data_symbols
    return DaftSymbols(values=values)


def extract_data(layout: FrameLayout, frame: DaftSymbols) -> np.ndarray:
    """Pull the data symbols back out of a (possibly equalized) frame."""
    if len(frame) != layout.n:
        raise ShapeError(f"expected frame of {layout.n} symbols, got {len(frame)}")
    return frame.values[layout.data_indices]


def _candidate_grid(rx: ReceiverParams) -> tuple[np.ndarray, np.ndarray]:
    ls = np.arange(rx.l_max_rx + 1, dtype=np.int64)
    alphas = np.arange(-rx.alpha_c1_rx, rx.alpha_c1_rx + 1, dtype=np.int64)
    L, A = np.meshgrid(ls, alphas, indexing="ij")
    return L.ravel(), A.ravel()


def candidate_read_indices(rx: ReceiverParams, layout: FrameLayout) -> np.ndarray:
    """Output indices the estimator reads for its candidate grid."""
    L, A = _candidate_grid(rx)
    stride = 2 * rx.alpha_c1_rx + 1
    return (layout.pilot_index - (A + stride * L)) % layout.n


def estimate_channel(
    rx: ReceiverParams,
    layout: FrameLayout,
    y: DaftSymbols,
    n0: float,
) -> list[PathEstimate]:
    """Matched-filter scan of the candidate grid against the received pilot.

    For each candidate (l, a) the read index and phase follow the same offset
    map used to build the effective channel, so on a noiseless matched link
    the estimator inverts the forward model exactly.  Candidates survive two
    gates: a threshold (relative fraction of the strongest candidate, with an
    absolute floor of four noise standard deviations on the normalized gain)
    and a per-delay-block maximum.  The block maximum encodes the channel
    model's pairwise-distinct delays: each delay block holds at most one
    path, so weaker same-block candidates are leakage, not paths.
    """
    n = len(y)
    if layout.n != n:
        raise ShapeError("layout and frame sizes disagree")
    u = layout.pilot_index
    amp = layout.pilot_amplitude
    L, A = _candidate_grid(rx)
    stride = 2 * rx.alpha_c1_rx + 1
    p = (u - (A + stride * L)) % n
    t1 = (stride * L * L - 2 * u * L) % (2 * n)
    c2f = rx.c2_rx - np.floor(rx.c2_rx)
    ph = t1 / (2.0 * n) + (c2f * (u * u - p * p).astype(np.float64)) % 1.0
    gains = y.values[p] * np.exp(-2j * np.pi * ph) / amp
    mags = np.abs(gains)
    threshold = max(
        rx.detection_threshold * float(mags.max(initial=0.0)),
        4.0 * np.sqrt(n0) / amp,
    )
    estimates = []
    for l in range(rx.l_max_rx + 1):
        idx = np.flatnonzero(L == l)
        best = idx[np.argmax(mags[idx])]
        if mags[best] > threshold:
            estimates.append(
                PathEstimate(
                    gain_hat=complex(gains[best]),
                    delay_hat=int(L[best]),
                    doppler_hat=int(A[best]),
                )
            )
    return estimates


def reconstruct_heff(
    rx: ReceiverParams, estimates: list[PathEstimate], n: int
) -> sp.csr_matrix:
    """Rebuild the transform-domain channel from estimates.

    Uses the same entry formula as the ground-truth builder, driven by the
    receiver's own chirp parameters; estimates aliased to one cyclic offset
    sum on the same diagonal, mirroring the physical collision.
    """
    triples = [(e.gain_hat, e.delay_hat, e.doppler_hat) for e in estimates]
    return effective_channel_from_triples(n, rx.alpha_c1_rx, rx.c2_rx, triples)
