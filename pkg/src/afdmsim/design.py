"""Parameter-design rules for secure AFDM links, as queryable pure functions.

The rules connect three facts about the waveform:

  * c1 must be one of the discrete values (2k+1)/(2N) with the integer k
    between the channel's actual Doppler extreme and the preset guard bound;
    smaller k misses Doppler bins (they alias into neighbouring delay
    blocks), larger k pushes the estimation window past the guard and turns
    data symbols into spurious paths.
  * c2 is 1-periodic at the waveform level, so only its fractional part
    matters; within a period, sub-1e-6 deviations already destroy detection.
  * an estimation depth l_max anywhere in [actual max delay, preset L_max]
    recovers the channel completely, so that whole interval is usable by an
    eavesdropper; presetting L_max equal to the actual maximum delay shrinks
    the usable interval to a point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

from .core import AfdmConfig
from .errors import ConfigError
from .framing import ReceiverParams

__all__ = [
    "AdmissibleC1Set",
    "SecurityRiskRange",
    "Classification",
    "admissible_c1",
    "canonicalize_c2",
    "security_risk_range",
    "classify_receiver",
]


@dataclass(frozen=True)
class AdmissibleC1Set:
    n: int
    alpha_lo: int
    alpha_hi: int
    values: tuple[Fraction, ...]

    def __contains__(self, c1: Fraction) -> bool:
        return Fraction(c1) in self.values


@dataclass(frozen=True)
class SecurityRiskRange:
    """Estimation depths that still achieve full channel recovery."""

    lo: int
    hi: int

    @property
    def width(self) -> int:
        return self.hi - self.lo

    @property
    def optimal(self) -> bool:
        return self.width == 0


class Classification(enum.Enum):
    FULL_RECOVERY = "full_recovery"
    MISSED_DOPPLER = "missed_doppler"
    MISSED_DELAY = "missed_delay"
    SPURIOUS_PATHS = "spurious_paths"
    C2_MISMATCH = "c2_mismatch"


def admissible_c1(n: int, alpha_c_max: int, alpha_max: int) -> AdmissibleC1Set:
    """Enumerate the chirp values that keep estimation complete and clean.

    Empty when the channel's Doppler extreme already exceeds the preset
    guard.  alpha_c1 = 0 is admitted when both bounds are zero (a static
    channel needs no Doppler separation).
    """
    if alpha_c_max < 0 or alpha_max < 0:
        raise ConfigError("Doppler bounds must be non-negative")
    values = tuple(
        Fraction(2 * k + 1, 2 * n) for k in range(alpha_c_max, alpha_max + 1)
    )
    return AdmissibleC1Set(
        n=n, alpha_lo=alpha_c_max, alpha_hi=alpha_max, values=values
    )


def canonicalize_c2(c2: float) -> float:
    """Reduce c2 to [0, 1); the waveform is identical for any integer shift."""
    if not math.isfinite(c2):
        raise ConfigError(f"c2 must be finite, got {c2}")
    return float(c2 - math.floor(c2))


def security_risk_range(actual_max_delay: int, preset_l_max: int) -> SecurityRiskRange:
    """Estimation-depth interval an eavesdropper can exploit."""
    if actual_max_delay > preset_l_max:
        raise ConfigError(
            f"channel delay {actual_max_delay} exceeds preset guard "
            f"{preset_l_max}; estimation is undefined past the guard"
        )
    return SecurityRiskRange(lo=actual_max_delay, hi=preset_l_max)


_C2_MATCH_TOL = 1e-9


def classify_receiver(
    cfg_tx: AfdmConfig,
    chan_bounds: tuple[int, int],
    rx: ReceiverParams,
) -> Classification:
    """Predict a receiver's estimation regime from its parameters alone.

    chan_bounds is (actual max |Doppler|, actual max delay).  FULL_RECOVERY
    requires alpha_c1 in [alpha_c_max, alpha_max], l_max in [L_c_max, L_max],
    and c2 congruent to the transmitter's mod 1.  When several bounds are
    violated the first matching category below wins; missed-Doppler outranks
    the delay categories because Doppler aliasing corrupts the delay blocks
    it lands in.
    """
    alpha_c_max, l_c_max = chan_bounds
    if rx.alpha_c1_rx < alpha_c_max:
        return Classification.MISSED_DOPPLER
    if rx.l_max_rx < l_c_max:
        return Classification.MISSED_DELAY
    if rx.alpha_c1_rx > cfg_tx.alpha_max or rx.l_max_rx > cfg_tx.l_guard_max:
        return Classification.SPURIOUS_PATHS
    dev = abs(canonicalize_c2(rx.c2_rx) - canonicalize_c2(float(cfg_tx.c2)))
    if min(dev, 1.0 - dev) > _C2_MATCH_TOL:
        return Classification.C2_MISMATCH
    return Classification.FULL_RECOVERY
