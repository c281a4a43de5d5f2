"""RNS-CKKS with generalized key-switching and memory-lean transforms.

The package splits into arithmetic kernels (modmath, ntt, rnspoly), the
leveled scheme (embedding, ckks), the homomorphic transform pipeline
with its key-reuse and seeded-plaintext variants (hdft), an analytical
traffic and compute model (costmodel), and file formats plus a CLI
(serial, cli).
"""

from .ckks import (Ciphertext, CkksParams, EvaluationKey, NoiseBudgets,
                   Plaintext, SecretKey, decode, decrypt, encode, encrypt,
                   hadd, hmult, hrescale, hrot, hsub, keygen, make_relin_key,
                   make_rotation_key, make_rotation_keys, modulus_chain,
                   pmult, slot_values)
from .costmodel import (PROFILES, SCALED_F1, CostReport, DataSizes,
                        KeySwitchMults, MachineProfile, ParamProfile,
                        PassShape, bootstrap_pass_shapes, data_sizes,
                        distribution_transfer, hdft_pass_cost,
                        keyswitch_mults, tas_metric, utilization_bound)
from .errors import (BasisMismatchError, ConfigurationError,
                     LevelExhaustedError, MissingKeyError,
                     RepresentationError, ScaleMismatchError,
                     SeedRangeError, SerializationError)
from .hdft import (DFT, IDFT, DftPlan, EvkUsageLog, PlaintextSeed, bootstrap,
                   build_dft_plan, hdft_apply, make_plaintext_seed,
                   mod_raise, of_limb_extend)
from .modmath import PrimeModulus, generate_ntt_primes
from .ntt import NttTables, four_step_ntt, ntt
from .rnspoly import (LimbBasis, RnsPolynomial, base_convert,
                      crt_reconstruct, make_base_table)

__version__ = "0.1.0"

__all__ = [
    "BasisMismatchError", "Ciphertext", "CkksParams", "ConfigurationError",
    "CostReport", "DataSizes", "DFT", "DftPlan", "EvaluationKey",
    "EvkUsageLog", "IDFT", "KeySwitchMults", "LevelExhaustedError",
    "LimbBasis", "MachineProfile", "MissingKeyError", "NoiseBudgets",
    "NttTables", "ParamProfile", "PassShape", "Plaintext", "PlaintextSeed",
    "PrimeModulus", "PROFILES", "RepresentationError", "RnsPolynomial",
    "SCALED_F1", "ScaleMismatchError", "SecretKey", "SeedRangeError",
    "SerializationError", "base_convert", "bootstrap",
    "bootstrap_pass_shapes", "build_dft_plan", "crt_reconstruct",
    "data_sizes", "decode", "decrypt", "distribution_transfer", "encode",
    "encrypt", "four_step_ntt", "generate_ntt_primes", "hadd",
    "hdft_apply", "hdft_pass_cost", "hmult", "hrescale", "hrot", "hsub",
    "keygen", "keyswitch_mults", "make_base_table", "make_plaintext_seed",
    "make_relin_key", "make_rotation_key", "make_rotation_keys",
    "mod_raise", "modulus_chain", "ntt", "of_limb_extend", "pmult",
    "slot_values", "tas_metric", "utilization_bound",
]
