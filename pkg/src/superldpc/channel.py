"""Superposition signaling over a real AWGN channel with unit noise variance.

Each of ell binary streams is BPSK-mapped and scaled by a per-time amplitude;
the receiver sees y_t = sum_i h_i * alpha_t_i * (1 - 2 c_t_i) + z_t with
z_t ~ N(0, 1).  Powers are therefore expressed relative to sigma^2 = 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SIGMA2 = 1.0

_NORMALIZED_SNR = ("sm", "mac")            # SNR normalized by (2^{2r} - 1)
_PER_USER_SNR = ("gifc", "twrc", "multiway_relay")  # SNR is per-user power in dB

ENERGY_SLACK = 1e-9


def method2_allocation(ell: int, delta_db: float) -> tuple[np.ndarray, np.ndarray]:
    """Geometric per-level power ladder.

    Level 0 gets P0 = 10^(delta_db/10); each further level is the previous
    scaled by (1 + P0), i.e. powers[i] = P0 * (1 + P0)**i.  Returns
    (powers, ratios) with ratios = powers / powers.sum().
    """
    if ell < 1:
        raise ValueError("ell must be at least 1")
    p0 = 10.0 ** (delta_db / 10.0)
    powers = p0 * (1.0 + p0) ** np.arange(ell, dtype=np.float64)
    return powers, powers / powers.sum()


def snr_to_power(scenario: str, snr_db: float, rate: float | None = None,
                 ell: int | None = None) -> float:
    """Total transmit power for a scenario's SNR convention.

    sm/mac use the rate-normalized convention P = (2^(2r) - 1) * 10^(snr/10)
    with r the sum rate in bits per channel use.  gifc/twrc/multiway_relay
    quote per-user SNR, so P = n_users * 10^(snr/10).
    """
    if scenario in _NORMALIZED_SNR:
        if rate is None or rate <= 0:
            raise ValueError(f"scenario {scenario!r} needs a positive rate, got {rate}")
        return (2.0 ** (2.0 * rate) - 1.0) * 10.0 ** (snr_db / 10.0)
    if scenario in _PER_USER_SNR:
        n_users = 2 if scenario in ("gifc", "twrc") else ell
        if n_users is None or n_users < 1:
            raise ValueError(f"scenario {scenario!r} needs ell to fix the user count")
        return n_users * 10.0 ** (snr_db / 10.0)
    raise ValueError(f"unknown scenario {scenario!r}")


@dataclass(frozen=True)
class SignalingSchedule:
    """Per-time, per-stream amplitudes plus channel gains for one block.

    amplitudes has shape (period, ell); time t uses row t % period.  The
    constructor enforces nonnegative amplitudes, nonnegative real gains, and
    the average-energy budget per stream:
    (1/n) * sum_t alpha_t_i^2 <= per_user_power[i] + slack.
    """

    ell: int
    n: int
    h: np.ndarray
    amplitudes: np.ndarray
    per_user_power: np.ndarray
    total_power: float

    def __post_init__(self):
        h = np.asarray(self.h, dtype=np.float64)
        amp = np.asarray(self.amplitudes, dtype=np.float64)
        pup = np.asarray(self.per_user_power, dtype=np.float64)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "per_user_power", pup)
        if self.ell < 1 or self.n < 1:
            raise ValueError("ell and n must be positive")
        if h.shape != (self.ell,):
            raise ValueError(f"h must have shape ({self.ell},)")
        if np.iscomplexobj(self.h) or np.any(h < 0):
            raise ValueError("unsupported channel gains: h must be real and nonnegative")
        if amp.ndim != 2 or amp.shape[1] != self.ell:
            raise ValueError("amplitudes must have shape (period, ell)")
        if np.any(amp < 0):
            raise ValueError("amplitudes must be nonnegative")
        if pup.shape != (self.ell,):
            raise ValueError(f"per_user_power must have shape ({self.ell},)")
        avg = self.average_energy()
        if np.any(avg > pup + ENERGY_SLACK):
            worst = int(np.argmax(avg - pup))
            raise ValueError(
                f"energy budget violated for stream {worst}: "
                f"average {avg[worst]:.6g} > allowed {pup[worst]:.6g}"
            )

    @property
    def period(self) -> int:
        return self.amplitudes.shape[0]

    def average_energy(self) -> np.ndarray:
        """Exact per-stream time-average of alpha^2 over the n-symbol block."""
        period = self.amplitudes.shape[0]
        counts = np.full(period, self.n // period, dtype=np.float64)
        counts[: self.n % period] += 1.0
        return counts @ (self.amplitudes ** 2) / self.n

    def amplitude_matrix(self) -> np.ndarray:
        """(n, ell) amplitudes actually used at each time index."""
        idx = np.arange(self.n) % self.amplitudes.shape[0]
        return self.amplitudes[idx]

    def constellation_points(self) -> np.ndarray:
        """(period, 2^ell) noiseless channel values per residue and symbol.

        Symbol s carries bit i of s on stream i (bit 0 = LSB), BPSK-mapped
        as (1 - 2 bit).
        """
        q = 1 << self.ell
        bits = ((np.arange(q)[:, None] >> np.arange(self.ell)[None, :]) & 1)
        signs = 1.0 - 2.0 * bits  # (q, ell)
        gains = self.amplitudes * self.h[None, :]  # (period, ell)
        return gains @ signs.T  # (period, q)

    def point_matrix(self) -> np.ndarray:
        """(n, 2^ell) noiseless channel values at every time index."""
        idx = np.arange(self.n) % self.amplitudes.shape[0]
        return self.constellation_points()[idx]


def constant_schedule(ratios: np.ndarray, total_power: float, n: int,
                      h: np.ndarray | None = None) -> SignalingSchedule:
    """Time-invariant split: stream i always transmits at ratios[i] * total_power."""
    r = np.asarray(ratios, dtype=np.float64)
    ell = r.size
    if np.any(r < 0):
        raise ValueError("power ratios must be nonnegative")
    if h is None:
        h = np.ones(ell)
    per_user = r * total_power
    amp = np.sqrt(per_user)[None, :]
    return SignalingSchedule(ell=ell, n=n, h=np.asarray(h, dtype=np.float64),
                             amplitudes=amp, per_user_power=per_user,
                             total_power=float(total_power))


def cyclic_schedule(ratios: np.ndarray, total_power: float, n: int,
                    h: np.ndarray | None = None) -> SignalingSchedule:
    """Cyclically rotated split: stream i uses ratios[(i + t) % ell] at time t.

    Every stream cycles through the whole ratio list, so when ell divides n
    each stream's average power is exactly total_power / ell; otherwise the
    actual average is computed and declared as the budget.
    """
    r = np.asarray(ratios, dtype=np.float64)
    ell = r.size
    if np.any(r < 0):
        raise ValueError("power ratios must be nonnegative")
    if h is None:
        h = np.ones(ell)
    r = r / r.sum()
    amp = np.empty((ell, ell))
    for t in range(ell):
        amp[t] = np.sqrt(r[(np.arange(ell) + t) % ell] * total_power)
    if n % ell == 0:
        # every stream sees every ratio equally often: the exact split
        per_user = np.full(ell, total_power / ell)
    else:
        # uneven residue counts; declare the actual average as the budget
        # (same expression as average_energy, so the invariant is tight)
        counts = np.full(ell, n // ell, dtype=np.float64)
        counts[: n % ell] += 1.0
        per_user = counts @ (amp ** 2) / n
    return SignalingSchedule(ell=ell, n=n, h=np.asarray(h, dtype=np.float64),
                             amplitudes=amp, per_user_power=per_user,
                             total_power=float(total_power))


def transmit(schedule: SignalingSchedule, symbols: np.ndarray, seed,
             noise_scale: float = 1.0) -> np.ndarray:
    """Superpose the scheduled streams for a symbol sequence and add noise.

    seed feeds numpy's PCG64 generator (ziggurat normals), so a given
    (schedule, symbols, seed) triple is bit-reproducible.  noise_scale
    exists for noiseless checks (0.0 disables the noise draw's effect).
    """
    s = np.asarray(symbols, dtype=np.int64)
    if s.shape != (schedule.n,):
        raise ValueError(f"expected {schedule.n} symbols")
    q = 1 << schedule.ell
    if np.any((s < 0) | (s >= q)):
        raise ValueError(f"symbols must lie in 0..{q - 1}")
    points = schedule.constellation_points()
    residue = np.arange(schedule.n) % schedule.amplitudes.shape[0]
    clean = points[residue, s]
    rng = np.random.default_rng(seed)
    return clean + noise_scale * rng.standard_normal(schedule.n)
