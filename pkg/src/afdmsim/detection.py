"""Symbol mapping and recovery: Gray-coded QAM, MMSE equalization, bit accounting.

Gray tables (unit average energy):

  4-QAM:  bits (b0, b1) -> ((1 - 2*b0) + 1j*(1 - 2*b1)) / sqrt(2),
          so 00 -> (1+1j)/sqrt(2).
  16-QAM: two bits per axis, Gray levels 00 -> -3, 01 -> -1, 11 -> +1,
          10 -> +3, scaled by 1/sqrt(10); symbol bits are (b0, b1) for the
          in-phase axis and (b2, b3) for the quadrature axis.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .core import DaftSymbols
from .errors import ConfigError, EqualizerConditioningWarning, ShapeError

__all__ = [
    "BitBlock",
    "BerRecord",
    "qam_map",
    "qam_demap",
    "mmse_equalize",
    "count_errors",
    "bits_per_symbol",
]

_GRAY_LEVELS = np.array([-3.0, -1.0, 1.0, 3.0])
_GRAY_BITS = [(0, 0), (0, 1), (1, 1), (1, 0)]  # bits for levels -3,-1,+1,+3


@dataclass(eq=False)
class BitBlock:
    bits: np.ndarray
    bits_per_symbol: int

    def __post_init__(self) -> None:
        self.bits = np.asarray(self.bits, dtype=np.uint8)
        if self.bits.ndim != 1:
            raise ShapeError("bits must be one-dimensional")
        if np.any(self.bits > 1):
            raise ShapeError("bits must be 0 or 1")
        if self.bits_per_symbol < 1:
            raise ConfigError("bits_per_symbol must be positive")
        if len(self.bits) % self.bits_per_symbol:
            raise ShapeError(
                f"{len(self.bits)} bits not divisible by "
                f"{self.bits_per_symbol} bits/symbol"
            )

    def __len__(self) -> int:
        return len(self.bits)


@dataclass
class BerRecord:
    """One Monte-Carlo measurement point.

    err_sq_sum accumulates the squared per-trial error counts so that a
    frame-level standard error of the BER can be formed after merging; it is
    not part of the CSV schema.
    """

    scenario_id: str
    role: str
    sweep_param: str
    sweep_value: float
    snr_db: float
    trials: int
    bits_total: int
    bit_errors: int
    err_sq_sum: int = field(default=0)

    def __post_init__(self) -> None:
        if not 0 <= self.bit_errors <= self.bits_total:
            raise ConfigError("bit_errors must lie in [0, bits_total]")

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_total if self.bits_total else 0.0

    def ber_stderr(self) -> float:
        """Standard error of the BER from per-trial spread."""
        if self.trials < 2 or self.bits_total == 0:
            return 0.0
        mean = self.bit_errors / self.trials
        var = self.err_sq_sum / self.trials - mean * mean
        bits_per_trial = self.bits_total / self.trials
        return float(np.sqrt(max(var, 0.0) / self.trials) / bits_per_trial)


def bits_per_symbol(order: int) -> int:
    if order == 4:
        return 2
    if order == 16:
        return 4
    raise ConfigError(f"unsupported QAM order {order} (use 4 or 16)")


def qam_map(bits: BitBlock, order: int) -> np.ndarray:
    """Gray-coded square QAM with unit average symbol energy."""
    k = bits_per_symbol(order)
    if bits.bits_per_symbol != k:
        raise ShapeError(
            f"bit block carries {bits.bits_per_symbol} bits/symbol, "
            f"order {order} needs {k}"
        )
    b = bits.bits.reshape(-1, k)
    if order == 4:
        return ((1.0 - 2.0 * b[:, 0]) + 1j * (1.0 - 2.0 * b[:, 1])) / np.sqrt(2.0)
    level_of = np.zeros(4)
    for lvl, (b0, b1) in zip(_GRAY_LEVELS, _GRAY_BITS):
        level_of[2 * b0 + b1] = lvl
    re = level_of[2 * b[:, 0] + b[:, 1]]
    im = level_of[2 * b[:, 2] + b[:, 3]]
    return (re + 1j * im) / np.sqrt(10.0)


def _gray_axis_demap(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # nearest of {-3,-1,1,3}: thresholds at -2, 0, 2
    idx = np.digitize(values, [-2.0, 0.0, 2.0])
    bits = np.array(_GRAY_BITS, dtype=np.uint8)[idx]
    return bits[:, 0], bits[:, 1]


def qam_demap(symbols: np.ndarray, order: int) -> BitBlock:
    """Minimum-distance hard decision; exact inverse of qam_map on clean input."""
    symbols = np.asarray(symbols, dtype=np.complex128)
    k = bits_per_symbol(order)
    out = np.empty((len(symbols), k), dtype=np.uint8)
    if order == 4:
        out[:, 0] = symbols.real < 0
        out[:, 1] = symbols.imag < 0
    else:
        out[:, 0], out[:, 1] = _gray_axis_demap(symbols.real * np.sqrt(10.0))
        out[:, 2], out[:, 3] = _gray_axis_demap(symbols.imag * np.sqrt(10.0))
    return BitBlock(bits=out.ravel(), bits_per_symbol=k)


_SINGULAR_EPS = 1e-12


def mmse_equalize(
    h_eff: sp.spmatrix | np.ndarray, y: DaftSymbols, n0: float
) -> DaftSymbols:
    """MMSE symbol estimate x_hat = H^H (H H^H + n0 I)^{-1} y.

    At n0 = 0 with invertible H this reduces to zero forcing.  A singular
    noiseless system is retried with a 1e-12 diagonal load and flagged with
    EqualizerConditioningWarning.
    """
    n = len(y)
    if h_eff.shape != (n, n):
        raise ShapeError(f"channel matrix {h_eff.shape} does not match frame {n}")
    sparse = sp.issparse(h_eff)
    h = h_eff.tocsr() if sparse else np.asarray(h_eff, dtype=np.complex128)
    gram = (h @ h.getH()).toarray() if sparse else h @ h.conj().T
    gram.flat[:: n + 1] += n0
    scale = float(np.max(gram.flat[:: n + 1].real, initial=0.0))
    factor = None
    try:
        factor = scipy.linalg.cho_factor(gram, check_finite=False)
        # a rank-deficient Gram can still factor; tiny pivots flag it
        min_pivot = float(np.min(np.abs(np.diag(factor[0]))))
        singular = min_pivot * min_pivot <= 1e-10 * scale
    except scipy.linalg.LinAlgError:
        singular = True
    if singular:
        warnings.warn(
            f"singular equalizer system; regularizing with eps={_SINGULAR_EPS}",
            EqualizerConditioningWarning,
            stacklevel=2,
        )
        gram.flat[:: n + 1] += _SINGULAR_EPS
        factor = scipy.linalg.cho_factor(gram, check_finite=False)
    z = scipy.linalg.cho_solve(factor, y.values, check_finite=False)
    x_hat = h.getH() @ z if sparse else h.conj().T @ z
    return DaftSymbols(values=np.asarray(x_hat))


def count_errors(tx: BitBlock, rx: BitBlock) -> int:
    """Hamming distance between two equal-length bit blocks."""
    if len(tx) != len(rx):
        raise ShapeError(f"bit blocks differ in length: {len(tx)} vs {len(rx)}")
    return int(np.count_nonzero(tx.bits != rx.bits))
