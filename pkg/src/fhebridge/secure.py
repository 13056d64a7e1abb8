"""Bridged secure types: bit-level words, booleans and native modular scalars.

``SecureUint``/``SecureInt`` hold encrypted bits and evaluate every operator
as a Boolean circuit. ``SecureMod`` holds one ciphertext and uses the
scheme's native modular add/mul. Converting a word to ``SecureMod`` is cheap.
The opposite direction costs a linear search over all residues, which is
only practical for very small plaintext moduli.
"""
from __future__ import annotations

import heapq
from typing import Sequence

from . import circuits as C
from .backend import Ciphertext, EvalContext
from .circuits import BitWord
from .gates import gate_and, gate_not, gate_or, gate_xor


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


class SecureBool:
    __hash__ = None

    def __init__(self, bit: Ciphertext):
        self.bit = bit

    @property
    def ctx(self) -> EvalContext:
        return self.bit.ctx

    @classmethod
    def encrypt(cls, ctx: EvalContext, value) -> "SecureBool":
        return cls(ctx.encrypt([int(bool(v)) for v in ctx.broadcast(value)]))

    def decrypt(self) -> list[int]:
        return list(self.ctx.decrypt(self.bit))

    def __invert__(self) -> "SecureBool":
        return SecureBool(gate_not(self.bit))

    def __and__(self, other: "SecureBool") -> "SecureBool":
        return SecureBool(gate_and(self.bit, other.bit))

    def __or__(self, other: "SecureBool") -> "SecureBool":
        return SecureBool(gate_or(self.bit, other.bit))

    def __xor__(self, other: "SecureBool") -> "SecureBool":
        return SecureBool(gate_xor(self.bit, other.bit))

    def __mul__(self, other):
        if isinstance(other, SecureBool):
            return self & other
        if isinstance(other, _SecureWord):
            return type(other)(C.circ_bool_mul(self.bit, other.word))
        if isinstance(other, SecureMod):
            return self.to_mod() * other
        return NotImplemented

    __rmul__ = __mul__

    def to_mod(self) -> "SecureMod":
        # 0 and 1 are valid residues already
        return SecureMod(self.bit)

    def to_word(self, cls: type, width: int):
        return cls(C.extend_bit(self.bit, width))


class _SecureWord:
    signed = False
    __hash__ = None

    def __init__(self, word: BitWord):
        self.word = word

    @property
    def ctx(self) -> EvalContext:
        return self.word.ctx

    @property
    def width(self) -> int:
        return self.word.width

    @classmethod
    def encrypt(cls, ctx: EvalContext, value: int | Sequence[int], width: int):
        return cls(C.encrypt_word(ctx, value, width))

    def decrypt(self) -> list[int]:
        return C.decrypt_word(self.ctx, self.word, signed=self.signed)

    def _coerce(self, other):
        if isinstance(other, type(self)):
            return other.word
        if isinstance(other, int):
            return C.encrypt_word(self.ctx, other, self.width)
        raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")

    def __add__(self, other):
        return type(self)(C.circ_add(self.word, self._coerce(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return type(self)(C.circ_sub(self.word, self._coerce(other)))

    def __rsub__(self, other):
        return type(self)(C.circ_sub(self._coerce(other), self.word))

    def __mul__(self, other):
        if isinstance(other, SecureBool):
            return other * self
        if isinstance(other, SecureMod):
            return NotImplemented
        return type(self)(C.circ_mul(self.word, self._coerce(other)))

    __rmul__ = __mul__

    def __neg__(self):
        return type(self)(C.circ_neg(self.word))

    def __invert__(self):
        return type(self)(C.circ_not(self.word))

    def __eq__(self, other) -> SecureBool:  # type: ignore[override]
        return SecureBool(C.circ_eq(self.word, self._coerce(other)))

    def __ne__(self, other) -> SecureBool:  # type: ignore[override]
        return SecureBool(C.circ_ne(self.word, self._coerce(other)))

    def __gt__(self, other) -> SecureBool:
        gt = C.circ_gt_s if self.signed else C.circ_gt_u
        return SecureBool(gt(self.word, self._coerce(other)))

    def __lt__(self, other) -> SecureBool:
        lt = C.circ_lt_s if self.signed else C.circ_lt_u
        return SecureBool(lt(self.word, self._coerce(other)))


class SecureUint(_SecureWord):
    signed = False

    def to_mod(self) -> "SecureMod":
        return uint_to_mod(self)


class SecureInt(_SecureWord):
    signed = True

    def to_mod(self) -> "SecureMod":
        return int_to_mod(self)


class SecureMod:
    """One ciphertext per value, native arithmetic modulo t."""

    __hash__ = None

    def __init__(self, ct: Ciphertext):
        self.ct = ct

    @property
    def ctx(self) -> EvalContext:
        return self.ct.ctx

    @classmethod
    def encrypt(cls, ctx: EvalContext, value) -> "SecureMod":
        return cls(ctx.encrypt(value))

    @classmethod
    def of(cls, value, ctx: EvalContext | None = None) -> "SecureMod":
        """Explicit conversion from any secure type (or an int, given ``ctx``)."""
        if isinstance(value, SecureMod):
            return value
        if isinstance(value, (SecureBool, SecureUint, SecureInt)):
            return value.to_mod()
        if isinstance(value, int) and ctx is not None:
            return cls.encrypt(ctx, value)
        raise TypeError(f"cannot convert {type(value).__name__} to SecureMod")

    def decrypt(self) -> list[int]:
        return list(self.ctx.decrypt(self.ct))

    def _lift(self, other):
        if isinstance(other, SecureMod):
            return other.ct
        if isinstance(other, SecureBool):
            return other.bit
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is not None:
            return SecureMod(self.ctx.add(self.ct, o))
        if isinstance(other, int):
            return SecureMod(self.ctx.add_plain(self.ct, other))
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is not None:
            return SecureMod(self.ctx.sub(self.ct, o))
        if isinstance(other, int):
            return SecureMod(self.ctx.sub_plain(self.ct, other))
        return NotImplemented

    def __rsub__(self, other):
        o = self._lift(other)
        if o is not None:
            return SecureMod(self.ctx.sub(o, self.ct))
        if isinstance(other, int):
            return SecureMod(self.ctx.rsub_plain(other, self.ct))
        return NotImplemented

    def __mul__(self, other):
        o = self._lift(other)
        if o is not None:
            return SecureMod(self.ctx.mul(self.ct, o))
        if isinstance(other, int):
            return SecureMod(self.ctx.mul_plain(self.ct, other))
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "SecureMod":
        return mod_pow(self, e)


# -- bridging conversions ----------------------------------------------------

def uint_to_mod(x: SecureUint) -> SecureMod:
    """Horner fold of the bits: doubling by self-addition, no multiplications."""
    ctx = x.ctx
    bits = x.word.bits
    acc = bits[-1]
    for bit in reversed(bits[:-1]):
        acc = ctx.add(acc, acc)
        acc = ctx.add(acc, bit)
    return SecureMod(acc)


def int_to_mod(x: SecureInt) -> SecureMod:
    """Two's-complement word to residue: msb selects between pos and pos + t - 2^s."""
    ctx = x.ctx
    s = x.width
    if ctx.t < 2**s:
        raise ValueError(f"int_to_mod needs t >= 2^s (t={ctx.t}, s={s})")
    pos = uint_to_mod(SecureUint(x.word)).ct
    neg = ctx.add_plain(pos, ctx.t - 2**s)
    msb = x.word[-1]
    out = ctx.add(ctx.mul(msb, neg), ctx.mul(ctx.rsub_plain(1, msb), pos))
    return SecureMod(out)


def mod_pow(x: SecureMod, e: int) -> SecureMod:
    """x^e with floor(log2 e) + popcount(e) - 1 products and depth ceil(log2 e).

    Squarings produce x^(2^k); the selected powers are multiplied together
    shallowest-first, which reaches depth ceil(log2 e).
    """
    if e < 1:
        raise ValueError(f"exponent must be >= 1, got {e}")
    ctx = x.ctx
    power = x.ct
    terms = []
    k = 0
    while True:
        if (e >> k) & 1:
            terms.append((power.mult_depth, k, power))
        if e >> (k + 1) == 0:
            break
        power = ctx.mul(power, power)
        k += 1
    heapq.heapify(terms)
    tie = k + 1
    while len(terms) > 1:
        da, _, a = heapq.heappop(terms)
        db, _, b = heapq.heappop(terms)
        prod = ctx.mul(a, b)
        heapq.heappush(terms, (prod.mult_depth, tie, prod))
        tie += 1
    return SecureMod(terms[0][2])


def _check_small_t(ctx: EvalContext) -> None:
    if not is_prime(ctx.t):
        raise ValueError(f"SecureMod to word conversion needs a prime t, got {ctx.t}")


def _residue_search(x: SecureMod, width: int, label) -> BitWord:
    """sum over residues i of [x == i] * word(label(i)).

    The indicator is 1 - (x - i)^(t-1) (Fermat). Exactly one indicator is
    set, so the selected words are merged by plain ciphertext addition.
    """
    ctx = x.ctx
    t = ctx.t
    acc = None
    for i in range(t):
        diff = SecureMod(ctx.sub_plain(x.ct, i))
        hit = ctx.rsub_plain(1, mod_pow(diff, t - 1).ct)
        const = C.encrypt_word(ctx, label(i) % 2**width, width)
        sel = C.circ_bool_mul(hit, const)
        acc = sel.bits if acc is None else tuple(ctx.add(a, b) for a, b in zip(acc, sel.bits))
    return BitWord(acc)


def mod_to_uint(x: SecureMod, width: int) -> SecureUint:
    """Residue to unsigned word by linear search over every residue.

    Correct only when the residue is below 2^width; a larger residue wraps
    and that cannot be detected under encryption.
    """
    _check_small_t(x.ctx)
    return SecureUint(_residue_search(x, width, lambda i: i))


def mod_to_int(x: SecureMod, width: int) -> SecureInt:
    """Residue X to signed word: X if its msb is clear, else 2^s - t + X."""
    ctx = x.ctx
    _check_small_t(ctx)
    if 2**width < ctx.t:
        raise ValueError(f"mod_to_int needs 2^s >= t (s={width}, t={ctx.t})")
    pos = _residue_search(x, width, lambda i: i)
    neg = _residue_search(x, width, lambda i: 2**width - ctx.t + i)
    msb = pos[-1]
    keep = C.circ_bool_mul(gate_not(msb), pos)
    flip = C.circ_bool_mul(msb, neg)
    # one of the two words is all zeros, so bitwise addition never carries
    return SecureInt(BitWord(tuple(ctx.add(a, b) for a, b in zip(keep, flip))))
