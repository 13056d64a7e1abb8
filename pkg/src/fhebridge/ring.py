"""Integer polynomial arithmetic in Z[X]/(X^n + 1)."""
from __future__ import annotations

try:
    from gmpy2 import mpz as _bigint
except ImportError:  # pragma: no cover
    _bigint = int


def negacyclic_mul_schoolbook(a: list[int], b: list[int]) -> list[int]:
    """Exact product of two integer polynomials modulo X^n + 1 (quadratic)."""
    n = len(a)
    out = [0] * n
    for i, ai in enumerate(a):
        if not ai:
            continue
        for j, bj in enumerate(b):
            k = i + j
            if k < n:
                out[k] += ai * bj
            else:
                out[k - n] -= ai * bj
    return out


def _pack(coeffs: list[int], width: int, offset: int) -> int:
    nbytes = width // 8
    return int.from_bytes(b"".join((c + offset).to_bytes(nbytes, "little") for c in coeffs), "little")


def _repeat(digit: int, width: int, count: int) -> int:
    """Integer whose ``count`` base-2^width digits all equal ``digit``."""
    return int.from_bytes(digit.to_bytes(width // 8, "little") * count, "little")


def negacyclic_mul(a: list[int], b: list[int]) -> list[int]:
    """Exact product modulo X^n + 1 via Kronecker substitution.

    Coefficients may be negative. Both polynomials are packed into one big
    integer each with digits wide enough that no product coefficient can
    overflow, multiplied once, and unpacked. Agrees exactly with
    :func:`negacyclic_mul_schoolbook`.
    """
    n = len(a)
    if len(b) != n:
        raise ValueError("polynomials must have the same length")
    ma = max((abs(x) for x in a), default=0)
    mb = max((abs(x) for x in b), default=0)
    if ma == 0 or mb == 0:
        return [0] * n
    bound = n * ma * mb  # |c_k| <= bound for every full-product coefficient
    width = bound.bit_length() + 2
    width += -width % 8
    half_a = 1 << (ma.bit_length())
    half_b = 1 << (mb.bit_length())
    # signed digits: shift to non-negative, then remove the shift exactly
    A = _pack(a, width, half_a) - _repeat(half_a, width, n)
    B = _pack(b, width, half_b) - _repeat(half_b, width, n)
    C = int(_bigint(A) * _bigint(B))
    half = 1 << (width - 1)
    C += _repeat(half, width, 2 * n - 1)
    nbytes = width // 8
    raw = C.to_bytes(nbytes * (2 * n - 1) + 1, "little")
    full = [int.from_bytes(raw[k * nbytes:(k + 1) * nbytes], "little") - half
            for k in range(2 * n - 1)]
    out = full[:n]
    for k in range(n, 2 * n - 1):
        out[k - n] -= full[k]
    return out


def center(x: int, q: int) -> int:
    """Representative of x mod q in (-q/2, q/2]."""
    x %= q
    return x - q if x > q // 2 else x


def poly_mod(a: list[int], q: int) -> list[int]:
    return [x % q for x in a]


def poly_center(a: list[int], q: int) -> list[int]:
    return [center(x, q) for x in a]


def poly_add(a: list[int], b: list[int], q: int) -> list[int]:
    return [(x + y) % q for x, y in zip(a, b)]


def poly_sub(a: list[int], b: list[int], q: int) -> list[int]:
    return [(x - y) % q for x, y in zip(a, b)]


def poly_mulmod(a: list[int], b: list[int], q: int) -> list[int]:
    return poly_mod(negacyclic_mul(poly_center(a, q), poly_center(b, q)), q)
