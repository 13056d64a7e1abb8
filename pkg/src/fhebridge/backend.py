"""Backend contract, metered evaluation context and the tracked-plaintext backend.

Every homomorphic operation goes through an :class:`EvalContext`, which
forwards the ring arithmetic to a backend and keeps the operation counts
(:class:`CostMeter`) and per-ciphertext depth metadata.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Protocol, Sequence

import numpy as np

DEFAULT_NOISE_BUDGET = 880
# simulated noise is kept in half-bit units so an addition can cost 0.5 bits
MUL_NOISE_HALVES = 60
ADD_NOISE_HALVES = 1


class ContextMismatchError(ValueError):
    """Operands belong to different evaluation contexts."""


@dataclass(frozen=True)
class BackendParams:
    t: int
    slots: int = 1
    noise_budget_0: int = DEFAULT_NOISE_BUDGET

    def __post_init__(self):
        if self.t < 2:
            raise ValueError(f"plaintext modulus must be >= 2, got {self.t}")
        if self.slots < 1:
            raise ValueError(f"slot count must be >= 1, got {self.slots}")
        if self.noise_budget_0 < 0:
            raise ValueError("initial noise budget must be non-negative")


@dataclass(frozen=True)
class Ciphertext:
    payload: Any
    mult_depth: int
    add_depth: int
    noise_halves: int
    ctx: "EvalContext" = field(repr=False, compare=False)

    @property
    def noise_budget(self) -> int:
        return self.noise_halves // 2


@dataclass(frozen=True)
class CostReport:
    ct_adds: int = 0
    ct_mults: int = 0
    pt_ops: int = 0
    mult_depth: int = 0
    add_depth: int = 0

    def __sub__(self, other: "CostReport") -> "CostReport":
        # depths are maxima, not counters; a delta keeps the later value
        return CostReport(
            self.ct_adds - other.ct_adds,
            self.ct_mults - other.ct_mults,
            self.pt_ops - other.pt_ops,
            self.mult_depth,
            self.add_depth,
        )

    def as_dict(self) -> dict:
        return {
            "ct_adds": self.ct_adds,
            "ct_mults": self.ct_mults,
            "pt_ops": self.pt_ops,
            "mult_depth": self.mult_depth,
            "add_depth": self.add_depth,
        }


@dataclass
class CostMeter:
    ct_adds: int = 0
    ct_mults: int = 0
    pt_ops: int = 0
    max_mult_depth: int = 0
    max_add_depth: int = 0

    def observe(self, ct: Ciphertext) -> None:
        if ct.mult_depth > self.max_mult_depth:
            self.max_mult_depth = ct.mult_depth
        if ct.add_depth > self.max_add_depth:
            self.max_add_depth = ct.add_depth

    def snapshot(self) -> CostReport:
        return CostReport(self.ct_adds, self.ct_mults, self.pt_ops,
                          self.max_mult_depth, self.max_add_depth)


class Backend(Protocol):
    """Ring arithmetic on opaque payloads; metering is the context's job."""

    t: int
    slots: int
    supports_batching: bool
    simulates_noise: bool

    def encrypt(self, values: Sequence[int]) -> Any: ...
    def decrypt(self, payload: Any) -> list[int]: ...
    def add(self, a: Any, b: Any) -> Any: ...
    def sub(self, a: Any, b: Any) -> Any: ...
    def mul(self, a: Any, b: Any) -> Any: ...
    def add_plain(self, a: Any, k: int) -> Any: ...
    def rsub_plain(self, k: int, a: Any) -> Any: ...
    def mul_plain(self, a: Any, k: int) -> Any: ...


class TrackedBackend:
    """Stores slot residues in the clear; exact, fast and batching-capable."""

    supports_batching = True
    simulates_noise = True

    def __init__(self, t: int, slots: int = 1):
        self.t = t
        self.slots = slots
        # products of two residues must fit in int64
        self._dtype = np.int64 if t < 2**31 else object

    def encrypt(self, values):
        arr = np.array([int(v) % self.t for v in values], dtype=self._dtype)
        arr.flags.writeable = False
        return arr

    def decrypt(self, payload):
        return [int(v) for v in payload]

    def _wrap(self, arr):
        arr = arr % self.t
        arr.flags.writeable = False
        return arr

    def add(self, a, b):
        return self._wrap(a + b)

    def sub(self, a, b):
        return self._wrap(a - b)

    def mul(self, a, b):
        return self._wrap(a * b)

    def add_plain(self, a, k):
        return self._wrap(a + (k % self.t))

    def rsub_plain(self, k, a):
        return self._wrap((k % self.t) - a)

    def mul_plain(self, a, k):
        return self._wrap(a * (k % self.t))


class Decrypted(list):
    """Decrypted slot values; ``corrupted`` is set when the noise budget ran out."""

    corrupted = False


class EvalContext:
    """Owns one backend instance and meters every operation issued through it.

    A context is meant to be driven from a single thread; ciphertexts are
    immutable and may be shared freely.
    """

    def __init__(self, params: BackendParams, backend: Backend | None = None, seed: int = 0):
        if backend is None:
            backend = TrackedBackend(params.t, params.slots)
        if backend.t != params.t:
            raise ValueError("backend plaintext modulus does not match params")
        if params.slots > 1 and not backend.supports_batching:
            raise ValueError(f"{type(backend).__name__} does not support batching")
        self.params = params
        self.backend = backend
        self.meter = CostMeter()
        self.seed = seed
        self._junk = random.Random(seed)

    @property
    def t(self) -> int:
        return self.params.t

    @property
    def slots(self) -> int:
        return self.params.slots

    def _check(self, *cts: Ciphertext) -> None:
        for c in cts:
            if c.ctx is not self:
                raise ContextMismatchError("ciphertext was created in another context")

    def _emit(self, payload, mult_depth, add_depth, noise_halves) -> Ciphertext:
        ct = Ciphertext(payload, mult_depth, add_depth, noise_halves, self)
        self.meter.observe(ct)
        return ct

    def broadcast(self, value: int | Sequence[int]) -> list[int]:
        if isinstance(value, (int, np.integer)):
            return [int(value)] * self.slots
        values = [int(v) for v in value]
        if len(values) != self.slots:
            raise ValueError(f"expected {self.slots} slot values, got {len(values)}")
        return values

    def encrypt(self, values: int | Sequence[int]) -> Ciphertext:
        payload = self.backend.encrypt(self.broadcast(values))
        return self._emit(payload, 0, 0, 2 * self.params.noise_budget_0)

    def decrypt(self, c: Ciphertext) -> Decrypted:
        self._check(c)
        out = Decrypted(self.backend.decrypt(c.payload))
        if self.backend.simulates_noise and c.noise_halves < 0:
            out = Decrypted(self._junk.randrange(self.t) for _ in out)
            out.corrupted = True
        return out

    def add(self, a: Ciphertext, b: Ciphertext) -> Ciphertext:
        self._check(a, b)
        self.meter.ct_adds += 1
        return self._emit(self.backend.add(a.payload, b.payload),
                          max(a.mult_depth, b.mult_depth),
                          max(a.add_depth, b.add_depth) + 1,
                          min(a.noise_halves, b.noise_halves) - ADD_NOISE_HALVES)

    def sub(self, a: Ciphertext, b: Ciphertext) -> Ciphertext:
        self._check(a, b)
        self.meter.ct_adds += 1
        return self._emit(self.backend.sub(a.payload, b.payload),
                          max(a.mult_depth, b.mult_depth),
                          max(a.add_depth, b.add_depth) + 1,
                          min(a.noise_halves, b.noise_halves) - ADD_NOISE_HALVES)

    def mul(self, a: Ciphertext, b: Ciphertext) -> Ciphertext:
        self._check(a, b)
        self.meter.ct_mults += 1
        return self._emit(self.backend.mul(a.payload, b.payload),
                          max(a.mult_depth, b.mult_depth) + 1,
                          max(a.add_depth, b.add_depth),
                          min(a.noise_halves, b.noise_halves) - MUL_NOISE_HALVES)

    def _plain(self, a: Ciphertext, payload) -> Ciphertext:
        self.meter.pt_ops += 1
        return self._emit(payload, a.mult_depth, a.add_depth, a.noise_halves)

    def add_plain(self, a: Ciphertext, k: int) -> Ciphertext:
        self._check(a)
        return self._plain(a, self.backend.add_plain(a.payload, k))

    def sub_plain(self, a: Ciphertext, k: int) -> Ciphertext:
        self._check(a)
        return self._plain(a, self.backend.add_plain(a.payload, -k))

    def rsub_plain(self, k: int, a: Ciphertext) -> Ciphertext:
        """``k - a`` for a plaintext constant ``k``."""
        self._check(a)
        return self._plain(a, self.backend.rsub_plain(k, a.payload))

    def mul_plain(self, a: Ciphertext, k: int) -> Ciphertext:
        self._check(a)
        return self._plain(a, self.backend.mul_plain(a.payload, k))

    def meter_snapshot(self) -> CostReport:
        return self.meter.snapshot()


def create_context(params: BackendParams, backend: Backend | None = None, seed: int = 0) -> EvalContext:
    return EvalContext(params, backend, seed)
