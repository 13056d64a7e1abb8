"""Bridged homomorphic arithmetic: bit-level words, native modular scalars and
the conversions between them, over a metering plaintext backend or a toy BFV
lattice backend."""
from .backend import (BackendParams, Ciphertext, ContextMismatchError, CostReport, EvalContext,
                      TrackedBackend, create_context)
from .bench import BenchmarkSpec, BenchResult, run_benchmark
from .circuits import BitWord, decrypt_word, encrypt_word
from .lattice import DepthGuardError, LatticeBackend, LatticeParams
from .secure import (SecureBool, SecureInt, SecureMod, SecureUint, int_to_mod, mod_pow, mod_to_int,
                     mod_to_uint, uint_to_mod)

__version__ = "0.1.0"

__all__ = [
    "BackendParams", "Ciphertext", "ContextMismatchError", "CostReport", "EvalContext",
    "TrackedBackend", "create_context", "BenchmarkSpec", "BenchResult", "run_benchmark",
    "BitWord", "decrypt_word", "encrypt_word", "DepthGuardError", "LatticeBackend",
    "LatticeParams", "SecureBool", "SecureInt", "SecureMod", "SecureUint", "int_to_mod",
    "mod_pow", "mod_to_int", "mod_to_uint", "uint_to_mod",
]
