"""Homomorphic Boolean gates written as ring arithmetic on {0, 1} ciphertexts.

With a generic plaintext modulus each two-input gate costs one ciphertext
multiplication. Modulo 2 the XOR family becomes free:
x XOR y = x + y and x XNOR y = 1 + x + y.
The constant 1 is always a plaintext operand.
"""
from __future__ import annotations

from .backend import Ciphertext, ContextMismatchError

Bit = Ciphertext


def _ctx(*bits: Bit):
    ctx = bits[0].ctx
    for b in bits[1:]:
        if b.ctx is not ctx:
            raise ContextMismatchError("gate operands come from different contexts")
    return ctx


def gate_not(a: Bit) -> Bit:
    return a.ctx.rsub_plain(1, a)


def gate_and(a: Bit, b: Bit) -> Bit:
    return _ctx(a, b).mul(a, b)


def gate_nand(a: Bit, b: Bit) -> Bit:
    return gate_not(gate_and(a, b))


def gate_or(a: Bit, b: Bit) -> Bit:
    ctx = _ctx(a, b)
    ab = ctx.mul(a, b)
    s = ctx.add(a, b)
    if ctx.t == 2:
        return ctx.add(s, ab)
    return ctx.sub(s, ab)


def gate_nor(a: Bit, b: Bit) -> Bit:
    return gate_not(gate_or(a, b))


def gate_xor(a: Bit, b: Bit) -> Bit:
    ctx = _ctx(a, b)
    if ctx.t == 2:
        return ctx.add(a, b)
    two_ab = ctx.mul_plain(ctx.mul(a, b), 2)
    return ctx.sub(ctx.add(a, b), two_ab)


def gate_xnor(a: Bit, b: Bit) -> Bit:
    return gate_not(gate_xor(a, b))


def gate_mux(x: Bit, y: Bit, z: Bit) -> Bit:
    """``y if x else z`` as x*(y - z) + z."""
    ctx = _ctx(x, y, z)
    return ctx.add(ctx.mul(x, ctx.sub(y, z)), z)


GATES = {
    "AND": gate_and,
    "NAND": gate_nand,
    "OR": gate_or,
    "NOR": gate_nor,
    "XOR": gate_xor,
    "XNOR": gate_xnor,
    "NOT": gate_not,
    "MUX": gate_mux,
}

TRUTH = {
    "AND": lambda x, y: x & y,
    "NAND": lambda x, y: 1 - (x & y),
    "OR": lambda x, y: x | y,
    "NOR": lambda x, y: 1 - (x | y),
    "XOR": lambda x, y: x ^ y,
    "XNOR": lambda x, y: 1 - (x ^ y),
    "NOT": lambda x: 1 - x,
    "MUX": lambda x, y, z: y if x else z,
}

ARITY = {"NOT": 1, "MUX": 3}


def arity(name: str) -> int:
    return ARITY.get(name, 2)
