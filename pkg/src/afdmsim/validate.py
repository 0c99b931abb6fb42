"""Self-check suites: every structural identity the library relies on.

Each check exercises one invariant at desk scale and reports the measured
error against its tolerance.  The oracles here are deliberately literal --
dense matrix products and double loops written straight from the defining
formulas -- so they share no code with the fast paths they certify.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import (
    NoiseSpec,
    apply_channel,
    build_effective_channel,
    generate_channel,
    geometric_sum_kernel,
    awgn,
    path_offset,
)
from .core import (
    DaftSymbols,
    add_cpp,
    daft_demodulate,
    idaft_modulate,
    make_config,
    remove_cpp,
)
from .detection import BitBlock, count_errors, mmse_equalize, qam_demap, qam_map
from .framing import (
    ReceiverParams,
    build_frame_layout,
    candidate_read_indices,
    estimate_channel,
    extract_data,
    place_frame,
    reconstruct_heff,
)

__all__ = ["CheckResult", "run_all_checks"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return (
            f"{status} {self.name}: measured {self.measured:.3e} "
            f"vs tolerance {self.threshold:.3e}{extra}"
        )


def _random_frame(n: int, rng: np.random.Generator) -> DaftSymbols:
    bits = rng.integers(0, 2, size=2 * n)
    syms = ((1 - 2 * bits[0::2]) + 1j * (1 - 2 * bits[1::2])) / np.sqrt(2)
    return DaftSymbols(values=syms)


def _dense_daft_matrix(n: int, c1: float, c2: float) -> np.ndarray:
    # literal formula: A[m, n] = exp(-j*2*pi*(c1*n^2 + m*n/N + c2*m^2)) / sqrt(N)
    m = np.arange(n).reshape(-1, 1)
    t = np.arange(n).reshape(1, -1)
    return np.exp(-2j * np.pi * (c1 * t**2 + m * t / n + c2 * m**2)) / np.sqrt(n)


def _dense_channel_matrix(n: int, c1: float, paths) -> np.ndarray:
    # H = sum_i h_i * Gamma_i * Delta_i * Pi^L_i built entry by entry
    h = np.zeros((n, n), dtype=np.complex128)
    for p in paths:
        shift = np.zeros((n, n))
        for r in range(n):
            shift[r, (r - p.delay) % n] = 1.0
        delta = np.diag(np.exp(-2j * np.pi * p.doppler * np.arange(n) / n))
        gamma = np.diag(
            np.where(
                np.arange(n) < p.delay,
                np.exp(-2j * np.pi * c1 * (n**2 - 2 * n * (p.delay - np.arange(n)))),
                1.0,
            )
        )
        h += p.gain * gamma @ delta @ shift
    return h


def check_unitarity(sizes=(4, 16, 64, 512), frames: int = 100) -> CheckResult:
    rng = np.random.default_rng(101)
    worst = 0.0
    for n in sizes:
        cfg = make_config(n, int(rng.integers(0, 4)), float(rng.uniform(0, 1)), 0, 0)
        for _ in range(frames):
            x = _random_frame(n, rng)
            back = daft_demodulate(cfg, idaft_modulate(cfg, x))
            worst = max(worst, float(np.max(np.abs(back.values - x.values))))
    return CheckResult("unitarity_round_trip", worst < 1e-10, worst, 1e-10)


def check_energy(sizes=(4, 16, 64, 512), frames: int = 20) -> CheckResult:
    rng = np.random.default_rng(102)
    worst = 0.0
    for n in sizes:
        cfg = make_config(n, int(rng.integers(0, 4)), float(rng.uniform(0, 1)), 0, 0)
        for _ in range(frames):
            x = _random_frame(n, rng)
            s = idaft_modulate(cfg, x)
            e_in = float(np.sum(np.abs(x.values) ** 2))
            e_out = float(np.sum(np.abs(s.samples) ** 2))
            worst = max(worst, abs(e_out - e_in) / e_in)
    return CheckResult("energy_conservation", worst < 1e-10, worst, 1e-10)


def check_fast_equals_direct(sizes=(4, 8, 16), frames: int = 5) -> CheckResult:
    rng = np.random.default_rng(103)
    worst = 0.0
    for n in sizes:
        alpha = int(rng.integers(0, 3))
        c2 = float(rng.uniform(0, 1))
        cfg = make_config(n, alpha, c2, 0, 0)
        c1 = float(cfg.c1)
        a = _dense_daft_matrix(n, c1, c2)
        for _ in range(frames):
            x = _random_frame(n, rng)
            fast = idaft_modulate(cfg, x).samples
            direct = a.conj().T @ x.values
            worst = max(worst, float(np.max(np.abs(fast - direct))))
            y_fast = daft_demodulate(
                cfg,
                idaft_modulate(cfg, x),
            ).values
            y_direct = a @ (a.conj().T @ x.values)
            worst = max(worst, float(np.max(np.abs(y_fast - y_direct))))
    return CheckResult("fast_path_equals_direct_summation", worst < 1e-12, worst, 1e-12)


def check_effective_channel_oracle(n: int = 16, channels: int = 20) -> CheckResult:
    rng = np.random.default_rng(104)
    worst = 0.0
    for trial in range(channels):
        cfg = make_config(n, int(rng.integers(0, 3)), float(rng.uniform(0, 1)), 1, 2)
        chan = generate_channel(1000 + trial, 3, 2, 1)
        a = _dense_daft_matrix(n, float(cfg.c1), float(cfg.c2))
        dense = a @ _dense_channel_matrix(n, float(cfg.c1), chan.paths) @ a.conj().T
        sparse = build_effective_channel(cfg, chan).toarray()
        worst = max(worst, float(np.max(np.abs(dense - sparse))))
    return CheckResult("effective_channel_dense_oracle", worst < 1e-10, worst, 1e-10)


def check_model_equivalence(sizes=(16, 64), channels: int = 50) -> CheckResult:
    rng = np.random.default_rng(105)
    worst = 0.0
    for n in sizes:
        for trial in range(channels):
            cfg = make_config(n, int(rng.integers(0, 3)), float(rng.uniform(0, 1)), 1, 2)
            chan = generate_channel(2000 + trial, 3, 2, 1)
            x = _random_frame(n, rng)
            sent = add_cpp(cfg, idaft_modulate(cfg, x))
            got = apply_channel(cfg, chan, sent, NoiseSpec(0.0), 0)
            y = daft_demodulate(cfg, remove_cpp(cfg, got)).values
            ref = build_effective_channel(cfg, chan) @ x.values
            worst = max(worst, float(np.max(np.abs(y - ref))))
    return CheckResult("time_domain_vs_effective_channel", worst < 1e-9, worst, 1e-9)


def check_geometric_sum(n: int = 16) -> CheckResult:
    worst = 0.0
    for alpha_c1 in (0, 1):
        for p in range(n):
            for q in range(n):
                for alpha in range(-3, 4):
                    for delay in range(6):
                        val = geometric_sum_kernel(n, p, q, alpha, delay, alpha_c1)
                        collapse = q == (p + path_offset(alpha, delay, alpha_c1, n)) % n
                        expect = n if collapse else 0
                        worst = max(worst, abs(val - expect))
    return CheckResult("geometric_sum_collapse", worst < 1e-9, worst, 1e-9)


def check_periodicity() -> CheckResult:
    rng = np.random.default_rng(106)
    worst = 0.0
    # c2 + 1 at full size; c2 + 10 with an exactly representable c2 so the
    # shifted parameter is the same real number plus an integer
    for n, c2, shift in ((512, 0.3, 1.0), (512, 0.3125, 10.0), (64, 0.3, 10.0)):
        x = _random_frame(n, rng)
        s_base = idaft_modulate(make_config(n, 3, c2, 0, 0), x).samples
        s_shift = idaft_modulate(make_config(n, 3, c2 + shift, 0, 0), x).samples
        worst = max(worst, float(np.max(np.abs(s_base - s_shift))))
    # c1 + 1 means alpha_c1 + n
    n = 512
    x = _random_frame(n, rng)
    s_base = idaft_modulate(make_config(n, 7, 0.3, 0, 0), x).samples
    s_shift = idaft_modulate(make_config(n, 7 + n, 0.3, 0, 0), x).samples
    worst = max(worst, float(np.max(np.abs(s_base - s_shift))))
    return CheckResult("chirp_periodicity", worst < 1e-9, worst, 1e-9)


def check_cpp_degeneracy(n: int = 512) -> CheckResult:
    rng = np.random.default_rng(107)
    cfg = make_config(n, 7, 0.3, 7, 7)
    x = _random_frame(n, rng)
    s = idaft_modulate(cfg, x)
    prefixed = add_cpp(cfg, s)
    # even N on the separable grid: prefix must equal the body tail exactly
    diff = np.max(np.abs(prefixed.samples[: cfg.cpp_len] - s.samples[n - cfg.cpp_len :]))
    return CheckResult("cpp_reduces_to_cyclic_prefix", diff == 0.0, float(diff), 0.0)


def check_layout_geometry() -> CheckResult:
    cfg = make_config(512, 7, 0.3, 7, 7)
    layout = build_frame_layout(cfg)
    ok = (
        len(layout.guard_indices) == 134
        and len(layout.data_indices) == 377
        and layout.pilot_index not in set(layout.guard_indices)
    )
    # pilot-only frame spreads no energy onto data indices for in-bound channels
    spread_ok = True
    for seed in range(5):
        chan = generate_channel(3000 + seed, 6, 5, 3)
        h = build_effective_channel(cfg, chan)
        frame = place_frame(layout, np.zeros(len(layout.data_indices)))
        y = h @ frame.values
        spread_ok &= bool(np.max(np.abs(y[layout.data_indices])) < 1e-12)
    # estимation windows beyond the presets must reach data symbols
    data = set(layout.data_indices.tolist())
    over_delay = ReceiverParams(alpha_c1_rx=7, c2_rx=0.3, l_max_rx=8)
    over_doppler = ReceiverParams(alpha_c1_rx=8, c2_rx=0.3, l_max_rx=7)
    inside = ReceiverParams(alpha_c1_rx=7, c2_rx=0.3, l_max_rx=7)
    exposure_ok = (
        bool(data & set(candidate_read_indices(over_delay, layout).tolist()))
        and bool(data & set(candidate_read_indices(over_doppler, layout).tolist()))
        and not (data & set(candidate_read_indices(inside, layout).tolist()))
    )
    passed = ok and spread_ok and exposure_ok
    return CheckResult(
        "frame_layout_geometry",
        passed,
        0.0 if passed else 1.0,
        0.5,
        detail="sizes, pilot containment, guard-overrun exposure",
    )


def check_noiseless_recovery(n: int = 64, channels: int = 10) -> CheckResult:
    import warnings as _warnings

    from .experiment import run_sounded_link

    failures = 0
    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore")  # singular noiseless systems expected
        for alpha_c1 in (1, 2):
            for l_max_rx in (2, 3):
                for seed in range(channels):
                    cfg = make_config(n, alpha_c1, 0.3, 2, 3)
                    chan = generate_channel(4000 + seed, 3, 2, 1)
                    layout = build_frame_layout(cfg, pilot_amplitude=100.0)
                    rng = np.random.default_rng(500 + seed)
                    bits = BitBlock(
                        bits=rng.integers(0, 2, size=2 * len(layout.data_indices)),
                        bits_per_symbol=2,
                    )
                    rx = ReceiverParams(
                        alpha_c1_rx=alpha_c1, c2_rx=0.3, l_max_rx=l_max_rx
                    )
                    decoded = run_sounded_link(
                        cfg, chan, rx, cfg, layout, bits, 4, 0.0, 0
                    )
                    failures += count_errors(bits, decoded)
    return CheckResult(
        "noiseless_matched_recovery", failures == 0, float(failures), 0.5,
        detail="bit errors across matched small-frame links",
    )


def check_awgn_statistics(n: int = 16, total: int = 100_000) -> CheckResult:
    from .core import TimeSignal

    w = awgn(total, 1.0, 108)
    var_err = abs(float(np.mean(np.abs(w) ** 2)) - 1.0)
    # demodulated noise keeps its covariance because the transform is unitary
    cfg = make_config(n, 1, 0.37, 0, 0)
    frames = total // n
    acc = np.zeros((n, n), dtype=np.complex128)
    for row in w[: frames * n].reshape(frames, n):
        y = daft_demodulate(cfg, TimeSignal(samples=row, has_prefix=False, body_len=n))
        acc += np.outer(y.values, np.conj(y.values))
    cov = acc / frames
    off = cov - np.diag(np.diag(cov))
    off_err = float(np.max(np.abs(off)))
    diag_err = float(np.max(np.abs(np.diag(cov).real - 1.0)))
    worst = max(var_err, off_err, diag_err)
    return CheckResult("awgn_and_demodulated_covariance", worst < 0.05, worst, 0.05)


def run_all_checks() -> list[CheckResult]:
    return [
        check_unitarity(),
        check_energy(),
        check_fast_equals_direct(),
        check_effective_channel_oracle(),
        check_model_equivalence(),
        check_geometric_sum(),
        check_periodicity(),
        check_cpp_degeneracy(),
        check_layout_geometry(),
        check_noiseless_recovery(),
        check_awgn_statistics(),
    ]
