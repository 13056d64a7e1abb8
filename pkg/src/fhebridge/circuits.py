"""Canonical combinational circuits over encrypted bits.

Words are little-endian tuples of bit ciphertexts and wrap modulo 2^s.
Every gate goes through :mod:`fhebridge.gates`, so the context meter sees
the true cost of each circuit. Adders ripple and the multiplier is
schoolbook; neither is depth-optimized.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

from .backend import EvalContext
from .gates import Bit, gate_and, gate_mux, gate_not, gate_or, gate_xnor, gate_xor

MAX_WIDTH = 64


@dataclass(frozen=True)
class BitWord:
    bits: tuple[Bit, ...]

    def __post_init__(self):
        if not 1 <= len(self.bits) <= MAX_WIDTH:
            raise ValueError(f"word width must be in [1, {MAX_WIDTH}], got {len(self.bits)}")
        ctx = self.bits[0].ctx
        if any(b.ctx is not ctx for b in self.bits):
            raise ValueError("all bits of a word must share one context")

    @property
    def width(self) -> int:
        return len(self.bits)

    @property
    def ctx(self) -> EvalContext:
        return self.bits[0].ctx

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self) -> Iterator[Bit]:
        return iter(self.bits)

    def __getitem__(self, i):
        return self.bits[i]


def _same_width(a: BitWord, b: BitWord) -> None:
    if a.width != b.width:
        raise ValueError(f"width mismatch: {a.width} vs {b.width}")


def encrypt_word(ctx: EvalContext, value: int | Sequence[int], width: int) -> BitWord:
    """Encrypt ``value`` (one int, or one per slot) as a two's-complement word."""
    values = ctx.broadcast(value)
    return BitWord(tuple(ctx.encrypt([(v >> i) & 1 for v in values]) for i in range(width)))


def decrypt_word(ctx: EvalContext, word: BitWord, signed: bool = False) -> list[int]:
    """Per-slot integer value of ``word``."""
    out = [0] * ctx.slots
    for i, bit in enumerate(word):
        for k, v in enumerate(ctx.decrypt(bit)):
            out[k] |= (v & 1) << i
    if signed:
        top = 1 << (word.width - 1)
        out = [v - 2 * top if v & top else v for v in out]
    return out


def extend_bit(bit: Bit, width: int) -> BitWord:
    """Zero-extend a single bit into a word; the upper bits are encrypted zeros."""
    ctx = bit.ctx
    return BitWord((bit,) + tuple(ctx.encrypt(0) for _ in range(width - 1)))


def tree_reduce(items: Sequence, op: Callable):
    """Fold ``items`` with ``op`` as a balanced binary tree."""
    items = list(items)
    if not items:
        raise ValueError("cannot reduce an empty sequence")
    while len(items) > 1:
        nxt = [op(items[i], items[i + 1]) for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def circ_eq(a: BitWord, b: BitWord) -> Bit:
    """1 iff a == b: s XNOR gates feeding a balanced AND tree."""
    _same_width(a, b)
    return tree_reduce([gate_xnor(x, y) for x, y in zip(a, b)], gate_and)


def circ_ne(a: BitWord, b: BitWord) -> Bit:
    return gate_not(circ_eq(a, b))


def _greater(a: BitWord, b: BitWord, signed: bool) -> Bit:
    # scan from the MSB keeping (all higher bits equal, already greater)
    _same_width(a, b)
    top = a.width - 1
    if signed:
        gt = gate_and(gate_not(a[top]), b[top])
    else:
        gt = gate_and(a[top], gate_not(b[top]))
    if top == 0:
        return gt
    eq = gate_xnor(a[top], b[top])
    for i in range(top - 1, -1, -1):
        here = gate_and(a[i], gate_not(b[i]))
        gt = gate_mux(eq, here, gt)
        if i:
            eq = gate_and(eq, gate_xnor(a[i], b[i]))
    return gt


def circ_gt_u(a: BitWord, b: BitWord) -> Bit:
    return _greater(a, b, signed=False)


def circ_lt_u(a: BitWord, b: BitWord) -> Bit:
    return _greater(b, a, signed=False)


def circ_gt_s(a: BitWord, b: BitWord) -> Bit:
    return _greater(a, b, signed=True)


def circ_lt_s(a: BitWord, b: BitWord) -> Bit:
    return _greater(b, a, signed=True)


def circ_add(a: BitWord, b: BitWord) -> BitWord:
    """Ripple-carry a + b mod 2^s."""
    _same_width(a, b)
    out = [gate_xor(a[0], b[0])]
    if a.width == 1:
        return BitWord(tuple(out))
    carry = gate_and(a[0], b[0])
    for i in range(1, a.width):
        p = gate_xor(a[i], b[i])
        out.append(gate_xor(p, carry))
        if i < a.width - 1:
            # equal inputs decide the carry themselves
            carry = gate_mux(p, carry, a[i])
    return BitWord(tuple(out))


def circ_sub(a: BitWord, b: BitWord) -> BitWord:
    """a + NOT(b) + 1 mod 2^s, rippled without an encrypted carry-in."""
    _same_width(a, b)
    out = [gate_xor(a[0], b[0])]
    if a.width == 1:
        return BitWord(tuple(out))
    carry = gate_or(a[0], gate_not(b[0]))
    for i in range(1, a.width):
        p = gate_xnor(a[i], b[i])
        out.append(gate_xor(p, carry))
        if i < a.width - 1:
            carry = gate_mux(p, carry, a[i])
    return BitWord(tuple(out))


def circ_neg(a: BitWord) -> BitWord:
    """Two's-complement negation: NOT(a) + 1."""
    inv = [gate_not(x) for x in a]
    out = [a[0]]
    carry = inv[0]
    for i in range(1, a.width):
        out.append(gate_xor(inv[i], carry))
        if i < a.width - 1:
            carry = gate_and(inv[i], carry)
    return BitWord(tuple(out))


def circ_mul(a: BitWord, b: BitWord) -> BitWord:
    """Schoolbook product truncated to s bits."""
    _same_width(a, b)
    s = a.width
    acc = [gate_and(a[j], b[0]) for j in range(s)]
    for i in range(1, s):
        row = BitWord(tuple(gate_and(a[j], b[i]) for j in range(s - i)))
        acc[i:] = circ_add(BitWord(tuple(acc[i:])), row).bits
    return BitWord(tuple(acc))


def circ_bool_mul(sel: Bit, a: BitWord) -> BitWord:
    """Select ``a`` or zero with one AND gate per bit."""
    return BitWord(tuple(gate_and(sel, x) for x in a))


def circ_not(a: BitWord) -> BitWord:
    return BitWord(tuple(gate_not(x) for x in a))


def circ_sum(words: Sequence[BitWord]) -> BitWord:
    return tree_reduce(words, circ_add)


def circ_product(words: Sequence[BitWord]) -> BitWord:
    return tree_reduce(words, circ_mul)
