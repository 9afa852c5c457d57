"""LDPC-coded superposition transmission: multistage and joint
decoding/computing algorithms, exact small-scale oracles, and a
reproducible Monte-Carlo harness."""

from .binmap import BinaryLinearMap, pack_bits, parse_map_literal, unpack_bits
from .channel import (SignalingSchedule, constant_schedule, cyclic_schedule,
                      method2_allocation, snr_to_power, transmit)
from .joint import (JointDecoder, JointResult, check_node_update,
                    decide_and_project, run_joint, variable_node_update,
                    walsh_hadamard)
from .ldpc import (AlistFormatError, Encoder, SparseParityCheck, SumProductDecoder,
                   build_regular_code, make_encoder, parse_alist, serialize_alist,
                   spa_decode, syndrome)
from .likelihoods import (Constellation, build_constellation, change_basis,
                          likelihood_table, partition_distance, pushforward,
                          symbol_likelihoods)
from .multistage import (MultistageResult, MultistageRunner, demap_level,
                         run_compute_decode, run_compute_decode_compute,
                         run_decode_compute)
from .oracle import (EnumeratedCodebook, direct_xor_convolution,
                     exact_bit_marginals, exact_symbol_marginals,
                     random_tree_code)
from .scenarios import (ConfigError, ScenarioConfig, load_config,
                        parse_config_text, scenario_defaults)
from .sim import BerRecord, run_point, run_sweep

__version__ = "0.1.0"

__all__ = [
    "AlistFormatError", "BerRecord", "BinaryLinearMap", "ConfigError",
    "Constellation", "Encoder", "EnumeratedCodebook", "JointDecoder",
    "JointResult", "MultistageResult", "MultistageRunner", "ScenarioConfig",
    "SignalingSchedule", "SparseParityCheck", "SumProductDecoder",
    "build_constellation", "build_regular_code", "change_basis",
    "check_node_update", "constant_schedule", "cyclic_schedule",
    "decide_and_project", "demap_level", "direct_xor_convolution",
    "exact_bit_marginals", "exact_symbol_marginals", "likelihood_table",
    "load_config", "make_encoder", "method2_allocation", "pack_bits",
    "parse_alist", "parse_config_text", "parse_map_literal",
    "partition_distance", "pushforward", "random_tree_code",
    "run_compute_decode", "run_compute_decode_compute", "run_decode_compute",
    "run_joint", "run_point", "run_sweep", "scenario_defaults",
    "serialize_alist", "snr_to_power", "spa_decode", "symbol_likelihoods",
    "syndrome", "transmit", "unpack_bits", "variable_node_update",
    "walsh_hadamard",
]
