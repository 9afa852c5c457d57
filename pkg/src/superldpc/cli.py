"""Command-line entry point.

Subcommands:
  simulate <config>   run the configured SNR sweep, write CSV + curve files
  check <config>      validate a config and print the resolved setup
  oracle <config>     compare decoders against exhaustive-enumeration oracles
                      on a small tree-structured instance and print the
                      maximum deviations

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from .binmap import BinaryLinearMap, pack_bits
from .channel import transmit
from .joint import JointDecoder, check_node_update
from .ldpc import SumProductDecoder
from .likelihoods import likelihood_table
from .oracle import (EnumeratedCodebook, direct_xor_convolution,
                     exact_bit_marginals, exact_symbol_marginals,
                     random_tree_code)
from .scenarios import ConfigError, ScenarioConfig, load_config
from .sim import BerRecord, run_sweep


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="superldpc",
        description="LDPC-coded superposition transmission: simulation and checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_sim = sub.add_parser("simulate", help="run the configured SNR sweep")
    p_sim.add_argument("config", help="path to a config file")
    p_check = sub.add_parser("check", help="validate a config and print the resolved setup")
    p_check.add_argument("config", help="path to a config file")
    p_oracle = sub.add_parser("oracle", help="run desk-scale oracle comparisons")
    p_oracle.add_argument("config", help="path to a config file")
    return parser


def _cmd_simulate(cfg: ScenarioConfig, config_path: str) -> int:
    if cfg.out_prefix is None:
        cfg.out_prefix = os.path.splitext(os.path.basename(config_path))[0]

    def report(rec: BerRecord):
        flag = "  (censored)" if rec.censored else ""
        print(f"{rec.scenario} {rec.algorithm} snr_db={rec.snr_db:g} "
              f"trials={rec.trials} ber={rec.ber:.3e} fer={rec.fer:.3e} "
              f"mean_iters={rec.mean_iters:.3g}{flag}")

    run_sweep(cfg, on_point=report)
    prefix = f"{cfg.out_prefix}_{cfg.algorithm}"
    print(f"wrote {prefix}.csv and {prefix}.dat")
    return 0


def _cmd_check(cfg: ScenarioConfig) -> int:
    print(cfg.describe())
    return 0


def _prob_zero(llrs: np.ndarray) -> np.ndarray:
    """P(bit=0) from LLRs, stable for large magnitudes."""
    out = np.empty_like(llrs)
    pos = llrs >= 0
    e = np.exp(-llrs[pos])
    out[pos] = 1.0 / (1.0 + e)
    e = np.exp(llrs[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _cmd_oracle(cfg: ScenarioConfig) -> int:
    """Exhaustive-enumeration cross-checks on a small tree-structured code.

    Tree graphs make message passing exact, so decoder outputs must agree
    with brute-force marginalization up to floating-point noise.
    """
    ell = cfg.ell
    max_k = max(2, 20 // ell)
    n_tree = min(16, max_k + 8)
    code = random_tree_code(n_tree, seed=cfg.master_seed,
                            min_k=min(4, max_k), max_k=max_k)
    small = replace(cfg, code=code, _encoder=None)
    n, k = small.n, small.k
    snr = small.snr_grid[0]
    schedule = small.schedule(snr)
    print(f"oracle instance: tree code n={n}, k={k}, ell={ell}, "
          f"snr_db={snr:g} ({small.scenario} convention)")

    rng = np.random.default_rng(np.random.SeedSequence((small.master_seed, 0xA11CE)))
    info = rng.integers(0, 2, size=(ell, k), dtype=np.uint8)
    code_bits = np.stack([small.encoder.encode(info[i]) for i in range(ell)])
    y = transmit(schedule, pack_bits(code_bits), rng, noise_scale=small.noise_scale)

    codebook = EnumeratedCodebook(code)
    sweeps = n + 2  # past the tree diameter, message passing is stationary
    failures = 0

    # joint decoder posteriors vs exhaustive symbol marginals
    exact = exact_symbol_marginals(codebook, schedule, y, BinaryLinearMap.identity(ell))
    res = JointDecoder(code, ell).decode(likelihood_table(schedule, y),
                                         BinaryLinearMap.identity(ell),
                                         sweeps, early_stop=False)
    dev_joint = float(np.max(np.abs(res.posteriors - exact)))
    ok = dev_joint <= 1e-8
    failures += not ok
    print(f"joint posteriors vs exhaustive marginals: max deviation "
          f"{dev_joint:.3e} ({'ok' if ok else 'FAIL'}, tolerance 1e-8)")

    # binary sum-product vs exhaustive codeword marginals (probability domain)
    priors = rng.normal(0.0, 2.0, size=n)
    _, ext, _ = SumProductDecoder(code).decode(priors, sweeps, early_stop=False)
    oracle_llrs = exact_bit_marginals(codebook, priors)
    dev_spa = float(np.max(np.abs(_prob_zero(priors + ext) - _prob_zero(oracle_llrs))))
    ok = dev_spa <= 1e-8
    failures += not ok
    print(f"sum-product posteriors vs exhaustive marginals: max deviation "
          f"{dev_spa:.3e} ({'ok' if ok else 'FAIL'}, tolerance 1e-8)")

    # transform-domain check update vs direct XOR convolution
    dev_conv = 0.0
    for _ in range(50):
        deg = int(rng.integers(2, 7))
        pmfs = rng.random((deg, 1 << ell))
        pmfs /= pmfs.sum(axis=1, keepdims=True)
        direct = direct_xor_convolution(pmfs)
        fast = check_node_update(pmfs)
        dev_conv = max(dev_conv, float(np.max(np.abs(fast - direct))))
    ok = dev_conv <= 1e-12
    failures += not ok
    print(f"transform check update vs direct convolution: max deviation "
          f"{dev_conv:.3e} ({'ok' if ok else 'FAIL'}, tolerance 1e-12)")

    return 0 if failures == 0 else 2


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "simulate":
            return _cmd_simulate(cfg, args.config)
        if args.command == "check":
            return _cmd_check(cfg)
        return _cmd_oracle(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
