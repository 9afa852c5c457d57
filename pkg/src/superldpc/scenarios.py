"""Scenario configuration: which channel setup to run, with which code,
signaling schedule, target/intermediate maps, algorithm, and budgets.

Config files are flat ``key = value`` text grouped under four section
headers: [scenario], [code], [signaling], [run].  ``#`` starts a comment.
See the README for the full key reference.
"""
from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field

import numpy as np

from .binmap import BinaryLinearMap, parse_map_literal
from .channel import (SignalingSchedule, constant_schedule, cyclic_schedule,
                      method2_allocation, snr_to_power)
from .ldpc import (AlistFormatError, Encoder, SparseParityCheck,
                   build_regular_code, parse_alist)

SCENARIOS = ("sm", "mac", "gifc", "twrc", "multiway_relay")
ALGORITHMS = ("dc", "cd", "cdc", "joint")


class ConfigError(ValueError):
    """Invalid or inconsistent scenario configuration."""


def scenario_defaults(scenario: str, ell: int
                      ) -> tuple[BinaryLinearMap, BinaryLinearMap | None]:
    """Default (target map, suggested intermediate map) for a scenario.

    The target map is what the receiver must recover; the intermediate map
    is a known-good invertible basis change for the cdc pipeline where one
    exists, else None.
    """
    if ell < 1:
        raise ConfigError("ell must be at least 1")
    if scenario in ("sm", "mac"):
        tau = BinaryLinearMap.identity(ell)
        if ell == 2:
            return tau, BinaryLinearMap.from_strings(["11", "01"])
        if ell == 3:
            return tau, BinaryLinearMap.from_strings(["111", "010", "001"])
        return tau, None
    if scenario == "gifc":
        if ell != 2:
            raise ConfigError("gifc is a two-user scenario (ell must be 2)")
        return (BinaryLinearMap.from_strings(["10"]),
                BinaryLinearMap.from_strings(["10", "11"]))
    if scenario == "twrc":
        if ell != 2:
            raise ConfigError("twrc is a two-user scenario (ell must be 2)")
        return BinaryLinearMap.from_strings(["11"]), None
    if scenario == "multiway_relay":
        if ell != 3:
            raise ConfigError("multiway_relay is a three-user scenario (ell must be 3)")
        return BinaryLinearMap.from_strings(["110", "101"]), None
    raise ConfigError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")


@dataclass
class ScenarioConfig:
    scenario: str
    ell: int
    code: SparseParityCheck
    algorithm: str
    tau: BinaryLinearMap | None = None
    tau_tilde: BinaryLinearMap | None = None
    signaling: str | None = None          # constant | cyclic; None = scenario default
    ratios: np.ndarray | None = None      # per-user power split, normalized
    h: np.ndarray | None = None           # channel coefficients, length ell
    snr_grid: tuple[float, ...] = ()
    k_max: int = 30
    i_max: int = 50
    max_trials: int = 100_000
    min_frame_errors: int = 100
    master_seed: int = 1
    out_prefix: str | None = None
    strict: bool = False
    noise_scale: float = 1.0              # test hook; 0 disables channel noise
    _encoder: Encoder | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if not 1 <= self.ell <= 16:
            raise ConfigError("ell must be in 1..16")

        default_tau, default_tt = scenario_defaults(self.scenario, self.ell)
        if self.tau is None:
            self.tau = default_tau
        if self.tau_tilde is None:
            self.tau_tilde = default_tt
        if self.tau.in_dim != self.ell:
            raise ConfigError(
                f"tau takes {self.tau.in_dim}-bit input but the scenario has ell={self.ell}")
        if self.tau_tilde is not None:
            tt = self.tau_tilde
            if tt.in_dim != self.ell or tt.out_dim != self.ell:
                raise ConfigError(f"tau_tilde must be a square {self.ell}x{self.ell} map")
            if not tt.is_invertible:
                raise ConfigError("singular tau_tilde: the intermediate map must be invertible")
        if self.algorithm == "cdc" and self.tau_tilde is None:
            raise ConfigError("algorithm cdc requires an invertible tau_tilde")

        if self.signaling is None:
            self.signaling = "cyclic" if self.scenario == "mac" else "constant"
        if self.signaling not in ("constant", "cyclic"):
            raise ConfigError(f"unknown signaling style {self.signaling!r}")

        if self.ratios is None:
            self.ratios = np.full(self.ell, 1.0 / self.ell)
        self.ratios = np.asarray(self.ratios, dtype=np.float64)
        if self.ratios.shape != (self.ell,):
            raise ConfigError(f"ratios must list {self.ell} values")
        if np.any(self.ratios <= 0) or not np.all(np.isfinite(self.ratios)):
            raise ConfigError("ratios must be positive and finite")
        self.ratios = self.ratios / self.ratios.sum()

        if self.h is None:
            self.h = np.ones(self.ell)
        self.h = np.asarray(self.h, dtype=np.float64)
        if self.h.shape != (self.ell,):
            raise ConfigError(f"h must list {self.ell} coefficients")
        if np.any(self.h < 0) or not np.all(np.isfinite(self.h)):
            raise ConfigError("unsupported channel gains: h must be nonnegative reals")

        self.snr_grid = tuple(float(s) for s in self.snr_grid)
        for name, value, low in (("k_max", self.k_max, 1), ("i_max", self.i_max, 1),
                                 ("max_trials", self.max_trials, 1),
                                 ("min_frame_errors", self.min_frame_errors, 0)):
            if int(value) != value or value < low:
                raise ConfigError(f"{name} must be an integer >= {low}")
        if self.noise_scale < 0 or not math.isfinite(self.noise_scale):
            raise ConfigError("noise_scale must be a nonnegative real")

    # -- derived quantities --------------------------------------------------

    @property
    def encoder(self) -> Encoder:
        if self._encoder is None:
            self._encoder = Encoder(self.code)
        return self._encoder

    @property
    def k(self) -> int:
        return self.encoder.k

    @property
    def n(self) -> int:
        return self.code.n_cols

    def rate_bits_per_dim(self) -> float:
        """Sum rate over all ell streams, in bits per real dimension."""
        return self.ell * self.k / self.n

    def total_power(self, snr_db: float) -> float:
        return snr_to_power(self.scenario, snr_db,
                            rate=self.rate_bits_per_dim(), ell=self.ell)

    def schedule(self, snr_db: float) -> SignalingSchedule:
        power = self.total_power(snr_db)
        if self.signaling == "constant":
            return constant_schedule(self.ratios, power, self.n, h=self.h)
        return cyclic_schedule(self.ratios, power, self.n, h=self.h)

    def describe(self) -> str:
        """Human-readable resolution of the config (for the check command)."""
        lines = [
            f"scenario: {self.scenario} (ell={self.ell})",
            f"code: n={self.n}, checks={self.code.n_rows}, k={self.k}, "
            f"sum rate={self.rate_bits_per_dim():.4g} bits/dim",
            f"algorithm: {self.algorithm} (k_max={self.k_max}, i_max={self.i_max}, "
            f"strict={str(self.strict).lower()})",
            f"tau: {list(self.tau.to_strings())}",
            f"tau_tilde: "
            + ("none" if self.tau_tilde is None else f"{list(self.tau_tilde.to_strings())}"),
            f"signaling: {self.signaling}",
            f"ratios: " + " ".join(f"{r:.6g}" for r in self.ratios),
            f"h: " + " ".join(f"{v:.6g}" for v in self.h),
        ]
        for snr in self.snr_grid:
            p = self.total_power(snr)
            per_user = " ".join(f"{r * p:.6g}" for r in self.ratios)
            lines.append(f"snr {snr:g} dB -> total power {p:.6g}, per-user {per_user}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# config file parsing
# ---------------------------------------------------------------------------

_SECTIONS = ("scenario", "code", "signaling", "run")
_MISSING = object()


class _Entries:
    """Section/key store with line numbers for error messages."""

    def __init__(self):
        self.data: dict[tuple[str, str], tuple[str, int]] = {}

    def put(self, section: str, key: str, value: str, line_no: int):
        if (section, key) in self.data:
            raise ConfigError(f"line {line_no}: duplicate key '{key}' in [{section}]")
        self.data[(section, key)] = (value, line_no)

    def take(self, section: str, key: str, default=_MISSING):
        if (section, key) in self.data:
            return self.data.pop((section, key))
        if default is _MISSING:
            raise ConfigError(f"missing required key '{key}' in section [{section}]")
        return default, -1

    def check_empty(self):
        for (section, key), (_, line_no) in self.data.items():
            raise ConfigError(f"line {line_no}: unknown key '{key}' in section [{section}]")


def _as_int(value: str, line_no: int, what: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"line {line_no}: {what} must be an integer, got {value!r}") from None


def _as_float(value: str, line_no: int, what: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"line {line_no}: {what} must be a number, got {value!r}") from None


def _as_floats(value: str, line_no: int, what: str) -> list[float]:
    toks = value.replace(",", " ").split()
    if not toks:
        raise ConfigError(f"line {line_no}: {what} must list at least one number")
    return [_as_float(t, line_no, what) for t in toks]


def _as_bool(value: str, line_no: int, what: str) -> bool:
    v = value.strip().lower()
    if v in ("true", "yes", "on", "1"):
        return True
    if v in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"line {line_no}: {what} must be true/false, got {value!r}")


def _as_map(value: str, line_no: int, what: str, ell: int) -> BinaryLinearMap | None:
    v = value.strip()
    if v.lower() == "none":
        return None
    try:
        return parse_map_literal(v, expected_in_dim=ell)
    except ValueError as exc:
        raise ConfigError(f"line {line_no}: bad {what}: {exc}") from None


_METHOD2_RE = re.compile(r"^method2\(\s*([^)]+?)\s*\)$", re.IGNORECASE)


def parse_config_text(text: str, base_dir: str = ".") -> ScenarioConfig:
    """Parse config text into a validated ScenarioConfig.

    Relative alist paths resolve against base_dir (the config file's
    directory when loaded from disk).
    """
    entries = _Entries()
    section: str | None = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in _SECTIONS:
                raise ConfigError(
                    f"line {line_no}: unknown section [{section}]; "
                    f"expected one of {_SECTIONS}")
            continue
        if section is None:
            raise ConfigError(f"line {line_no}: key before any [section] header")
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value'")
        key, _, value = line.partition("=")
        entries.put(section, key.strip().lower(), value.strip(), line_no)

    # [scenario]
    kind, ln = entries.take("scenario", "kind")
    kind = kind.strip().lower()
    ell_s, ln = entries.take("scenario", "ell")
    ell = _as_int(ell_s, ln, "ell")
    tau = tau_tilde = None
    raw, ln = entries.take("scenario", "tau", default=None)
    if raw is not None:
        tau = _as_map(raw, ln, "tau", ell)
        if tau is None:
            raise ConfigError(f"line {ln}: tau cannot be none")
    raw, ln = entries.take("scenario", "tau_tilde", default=None)
    has_tau_tilde = raw is not None
    if has_tau_tilde:
        tau_tilde = _as_map(raw, ln, "tau_tilde", ell)
    raw, ln = entries.take("scenario", "strict", default="false")
    strict = _as_bool(raw, ln, "strict")

    # [code]
    reg, reg_ln = entries.take("code", "regular", default=None)
    alist, alist_ln = entries.take("code", "alist", default=None)
    if (reg is None) == (alist is None):
        raise ConfigError("section [code] needs exactly one of 'regular' or 'alist'")
    if reg is not None:
        parts = reg.split()
        if len(parts) not in (3, 4):
            raise ConfigError(
                f"line {reg_ln}: regular = 'n col_deg row_deg [seed]', got {reg!r}")
        nums = [_as_int(p, reg_ln, "regular code parameter") for p in parts]
        seed = nums[3] if len(nums) == 4 else 1
        try:
            code = build_regular_code(nums[0], nums[1], nums[2], seed)
        except ValueError as exc:
            raise ConfigError(f"line {reg_ln}: {exc}") from None
    else:
        path = alist if os.path.isabs(alist) else os.path.join(base_dir, alist)
        try:
            with open(path, "r", encoding="ascii") as fh:
                code = parse_alist(fh.read())
        except OSError as exc:
            raise ConfigError(f"line {alist_ln}: cannot read alist file: {exc}") from None
        except AlistFormatError as exc:
            raise ConfigError(f"line {alist_ln}: bad alist file {alist!r}: {exc}") from None

    # [signaling]
    style, ln = entries.take("signaling", "style", default=None)
    if style is not None:
        style = style.strip().lower()
    ratios = None
    raw, ln = entries.take("signaling", "ratios", default=None)
    if raw is not None:
        m = _METHOD2_RE.match(raw.strip())
        if m:
            delta = _as_float(m.group(1), ln, "method2 delta")
            try:
                _, ratios = method2_allocation(ell, delta)
            except ValueError as exc:
                raise ConfigError(f"line {ln}: {exc}") from None
        else:
            ratios = _as_floats(raw, ln, "ratios")
    h = None
    raw, ln = entries.take("signaling", "h", default=None)
    if raw is not None:
        h = _as_floats(raw, ln, "h")
    raw, h1_ln = entries.take("signaling", "h1_sq", default=None)
    if raw is not None:
        if h is not None:
            raise ConfigError(f"line {h1_ln}: give either 'h' or 'h1_sq', not both")
        if ell != 2:
            raise ConfigError(f"line {h1_ln}: h1_sq shorthand needs ell = 2")
        h1_sq = _as_float(raw, h1_ln, "h1_sq")
        if h1_sq < 0:
            raise ConfigError(f"line {h1_ln}: h1_sq must be nonnegative")
        h = [1.0, math.sqrt(h1_sq)]

    # [run]
    algorithm, ln = entries.take("run", "algorithm")
    algorithm = algorithm.strip().lower()
    raw, ln = entries.take("run", "snr_db")
    snr_grid = tuple(_as_floats(raw, ln, "snr_db"))
    ints = {}
    for key, default in (("k_max", 30), ("i_max", 50), ("max_trials", 100_000),
                         ("min_frame_errors", 100), ("seed", 1)):
        raw, ln = entries.take("run", key, default=None)
        ints[key] = default if raw is None else _as_int(raw, ln, key)
    out, _ = entries.take("run", "out", default=None)
    raw, ln = entries.take("run", "noise_scale", default=None)
    noise_scale = 1.0 if raw is None else _as_float(raw, ln, "noise_scale")

    entries.check_empty()

    cfg = ScenarioConfig(
        scenario=kind, ell=ell, code=code, algorithm=algorithm,
        tau=tau, tau_tilde=tau_tilde, signaling=style, ratios=ratios, h=h,
        snr_grid=snr_grid, k_max=ints["k_max"], i_max=ints["i_max"],
        max_trials=ints["max_trials"], min_frame_errors=ints["min_frame_errors"],
        master_seed=ints["seed"], out_prefix=out, strict=strict,
        noise_scale=noise_scale,
    )
    if has_tau_tilde and tau_tilde is None:
        cfg.tau_tilde = None  # explicit 'tau_tilde = none' overrides the default
        if algorithm == "cdc":
            raise ConfigError("algorithm cdc requires an invertible tau_tilde")
    return cfg


def load_config(path: str) -> ScenarioConfig:
    """Read and parse a config file; alist paths resolve relative to it."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    return parse_config_text(text, base_dir=os.path.dirname(os.path.abspath(path)))
