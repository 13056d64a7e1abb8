"""Toy textbook BFV over Z_q[X]/(X^n + 1).

No security is claimed for any parameter set. Multiplication is the raw
tensor product and there is no relinearization, so ciphertext arity grows
with every product until :data:`MAX_COMPONENTS` stops it.
"""
from __future__ import annotations

import math
import random
import struct
from dataclasses import dataclass
from pathlib import Path

from .ring import center, negacyclic_mul, poly_add, poly_center, poly_mod, poly_sub

MAX_COMPONENTS = 16
TAIL_CUT = 12
MAGIC = b"FHBRIDG1"
KIND_SECRET, KIND_PUBLIC = 0, 1


class DepthGuardError(RuntimeError):
    """A raw product would exceed the component-count guard."""


@dataclass(frozen=True)
class LatticeParams:
    n: int
    q: int
    t: int
    error_stddev: float = 3.2

    def __post_init__(self):
        n, q, t = self.n, self.q, self.t
        if n < 16 or n > 4096 or n & (n - 1):
            raise ValueError(f"ring degree must be a power of two in [16, 4096], got {n}")
        if not 2 <= t <= 2**17:
            raise ValueError(f"plaintext modulus must lie in [2, 2^17], got {t}")
        if not 2**30 <= q <= 2**62:
            raise ValueError(f"ciphertext modulus must lie in [2^30, 2^62], got {q}")
        if t >= q or q // t < 2:
            raise ValueError("need t < q and floor(q/t) >= 2")
        if self.error_stddev <= 0:
            raise ValueError("error_stddev must be positive")

    @property
    def delta(self) -> int:
        return self.q // self.t


@dataclass(frozen=True)
class SecretKey:
    params: LatticeParams
    s: tuple[int, ...]  # ternary coefficients in {-1, 0, 1}


@dataclass(frozen=True)
class PublicKey:
    params: LatticeParams
    p0: tuple[int, ...]
    p1: tuple[int, ...]


@dataclass(frozen=True)
class LatticeCiphertext:
    components: tuple[tuple[int, ...], ...]

    @property
    def mult_depth(self) -> int:
        return len(self.components) - 2


def sample_gaussian(rng: random.Random, n: int, sigma: float) -> list[int]:
    """Discrete Gaussian by rejection on [-TAIL_CUT*sigma, TAIL_CUT*sigma]."""
    bound = math.ceil(TAIL_CUT * sigma)
    out = []
    while len(out) < n:
        x = rng.randint(-bound, bound)
        if rng.random() < math.exp(-x * x / (2 * sigma * sigma)):
            out.append(x)
    return out


def sample_ternary(rng: random.Random, n: int) -> list[int]:
    return [rng.randint(-1, 1) for _ in range(n)]


def sample_uniform(rng: random.Random, n: int, modulus: int) -> list[int]:
    return [rng.randrange(modulus) for _ in range(n)]


def _mul(a, b, modulus: int) -> list[int]:
    return poly_mod(negacyclic_mul(poly_center(list(a), modulus), poly_center(list(b), modulus)), modulus)


def keygen(params: LatticeParams, seed: int | None = None, rng: random.Random | None = None):
    """Return ``(SecretKey, PublicKey)``; identical for identical seeds."""
    rng = rng or random.Random(seed)
    n, q = params.n, params.q
    s = sample_ternary(rng, n)
    a = sample_uniform(rng, n, q)
    e = sample_gaussian(rng, n, params.error_stddev)
    p0 = [(-x) % q for x in poly_add(_mul(a, s, q), e, q)]
    return SecretKey(params, tuple(s)), PublicKey(params, tuple(p0), tuple(a))


def keygen_error(params: LatticeParams, seed: int) -> list[int]:
    """The error polynomial drawn by :func:`keygen` for ``seed`` (for tail checks)."""
    rng = random.Random(seed)
    sample_ternary(rng, params.n)
    sample_uniform(rng, params.n, params.q)
    return sample_gaussian(rng, params.n, params.error_stddev)


def enc(pk: PublicKey, m, rng: random.Random | None = None) -> LatticeCiphertext:
    params = pk.params
    n, q, t = params.n, params.q, params.t
    m = list(m) + [0] * (n - len(m))
    if len(m) != n:
        raise ValueError(f"message has more than {n} coefficients")
    rng = rng or random.Random()
    u = sample_ternary(rng, n)
    e1 = sample_gaussian(rng, n, params.error_stddev)
    e2 = sample_gaussian(rng, n, params.error_stddev)
    dm = [params.delta * (x % t) for x in m]
    pu0 = negacyclic_mul(poly_center(list(pk.p0), q), u)
    pu1 = negacyclic_mul(poly_center(list(pk.p1), q), u)
    c0 = [(x + y + z) % q for x, y, z in zip(pu0, e1, dm)]
    c1 = [(x + y) % q for x, y in zip(pu1, e2)]
    return LatticeCiphertext((tuple(c0), tuple(c1)))


def _phase(sk: SecretKey, c: LatticeCiphertext) -> list[int]:
    """Centered sum_i c_i * s^i mod q."""
    q = sk.params.q
    s = list(sk.s)
    acc = list(c.components[0])
    power = None
    for comp in c.components[1:]:
        power = s if power is None else poly_mod(negacyclic_mul(power, s), q)
        power = poly_center(power, q)
        acc = [x + y for x, y in zip(acc, negacyclic_mul(poly_center(list(comp), q), power))]
    return poly_center(acc, q)


def _round_div(x: int, num: int, den: int) -> int:
    """round(x * num / den) with halves rounded up; exact for negative x."""
    return (2 * num * x + den) // (2 * den)


def dec(sk: SecretKey, c: LatticeCiphertext) -> list[int]:
    q, t = sk.params.q, sk.params.t
    return [_round_div(x, t, q) % t for x in _phase(sk, c)]


def _pad(c: LatticeCiphertext, size: int, n: int):
    comps = list(c.components)
    return comps + [(0,) * n] * (size - len(comps))


def lat_add(a: LatticeCiphertext, b: LatticeCiphertext, q: int) -> LatticeCiphertext:
    size = max(len(a.components), len(b.components))
    n = len(a.components[0])
    return LatticeCiphertext(tuple(tuple(poly_add(x, y, q))
                                   for x, y in zip(_pad(a, size, n), _pad(b, size, n))))


def lat_sub(a: LatticeCiphertext, b: LatticeCiphertext, q: int) -> LatticeCiphertext:
    size = max(len(a.components), len(b.components))
    n = len(a.components[0])
    return LatticeCiphertext(tuple(tuple(poly_sub(x, y, q))
                                   for x, y in zip(_pad(a, size, n), _pad(b, size, n))))


def lat_mul(a: LatticeCiphertext, b: LatticeCiphertext, params: LatticeParams) -> LatticeCiphertext:
    """Tensor product with t/q rescaling; result has |a| + |b| - 1 components."""
    la, lb = len(a.components), len(b.components)
    if la + lb > MAX_COMPONENTS:
        raise DepthGuardError(
            f"product of {la}- and {lb}-component ciphertexts exceeds the guard of {MAX_COMPONENTS}")
    q, t = params.q, params.t
    ca = [poly_center(list(x), q) for x in a.components]
    cb = [poly_center(list(x), q) for x in b.components]
    n = params.n
    out = [[0] * n for _ in range(la + lb - 1)]
    for i, x in enumerate(ca):
        for j, y in enumerate(cb):
            prod = negacyclic_mul(x, y)
            acc = out[i + j]
            for k in range(n):
                acc[k] += prod[k]
    return LatticeCiphertext(tuple(tuple(_round_div(v, t, q) % q for v in comp) for comp in out))


def noise_budget(sk: SecretKey, c: LatticeCiphertext, expected=None) -> int:
    """Remaining noise headroom in bits.

    Noise is measured against the nearest valid encoding, or against
    ``expected`` when the true plaintext is known; only the latter can go
    negative once decryption has failed.
    """
    params = sk.params
    q, t, delta = params.q, params.t, params.delta
    phase = _phase(sk, c)
    if expected is None:
        msg = [_round_div(x, t, q) for x in phase]
    else:
        expected = list(expected) + [0] * (params.n - len(expected))
        msg = [center(m, t) for m in expected]
    worst = max(abs(center(x - delta * m, q)) for x, m in zip(phase, msg))
    return math.floor(math.log2(q / (2 * t)) - math.log2(max(1, worst)))


class LatticeBackend:
    """Backend-contract adapter; one plaintext scalar per ciphertext.

    The scalar sits in the constant coefficient, so ring products act as
    scalar products.
    """

    supports_batching = False
    simulates_noise = False
    slots = 1

    def __init__(self, params: LatticeParams, seed: int = 0, keys=None):
        self.params = params
        self.t = params.t
        self.rng = random.Random(seed)
        self.sk, self.pk = keys if keys is not None else keygen(params, rng=self.rng)

    def encrypt(self, values):
        (v,) = values
        return enc(self.pk, [v % self.t], self.rng)

    def decrypt(self, payload):
        return [dec(self.sk, payload)[0]]

    def add(self, a, b):
        return lat_add(a, b, self.params.q)

    def sub(self, a, b):
        return lat_sub(a, b, self.params.q)

    def mul(self, a, b):
        return lat_mul(a, b, self.params)

    def add_plain(self, a, k):
        q = self.params.q
        shift = self.params.delta * (k % self.t)
        c0 = list(a.components[0])
        c0[0] = (c0[0] + shift) % q
        return LatticeCiphertext((tuple(c0),) + a.components[1:])

    def rsub_plain(self, k, a):
        q = self.params.q
        neg = LatticeCiphertext(tuple(tuple((-x) % q for x in comp) for comp in a.components))
        return self.add_plain(neg, k)

    def mul_plain(self, a, k):
        q = self.params.q
        k = center(k, self.t)
        return LatticeCiphertext(tuple(tuple((x * k) % q for x in comp) for comp in a.components))

    def noise_budget(self, payload, expected=None) -> int:
        return noise_budget(self.sk, payload, expected)


# -- key files ---------------------------------------------------------------
# layout: MAGIC, u64 kind, u64 n, u64 t, f64 error_stddev, then
# length-prefixed arrays (u64 count, count little-endian u64 words)

def _write_array(buf: list[bytes], coeffs) -> None:
    buf.append(struct.pack(f"<Q{len(coeffs)}Q", len(coeffs), *coeffs))


def _read_array(data: bytes, pos: int):
    (count,) = struct.unpack_from("<Q", data, pos)
    end = pos + 8 + 8 * count
    if end > len(data):
        raise ValueError("truncated key file")
    return list(struct.unpack_from(f"<{count}Q", data, pos + 8)), end


def dump_key(key) -> bytes:
    params = key.params
    if isinstance(key, SecretKey):
        kind = KIND_SECRET
        arrays = [[params.q], [x % params.q for x in key.s]]
    elif isinstance(key, PublicKey):
        kind = KIND_PUBLIC
        arrays = [[params.q], key.p0, key.p1]
    else:
        raise TypeError(f"not a key: {type(key).__name__}")
    buf = [MAGIC, struct.pack("<QQQd", kind, params.n, params.t, params.error_stddev)]
    for arr in arrays:
        _write_array(buf, arr)
    return b"".join(buf)


def load_key(data: bytes):
    if data[:8] != MAGIC:
        raise ValueError("not a key file (bad magic header)")
    kind, n, t, sigma = struct.unpack_from("<QQQd", data, 8)
    pos = 8 + struct.calcsize("<QQQd")
    arrays = []
    while pos < len(data):
        arr, pos = _read_array(data, pos)
        arrays.append(arr)
    q = arrays[0][0]
    params = LatticeParams(n, q, t, sigma)
    if kind == KIND_SECRET:
        return SecretKey(params, tuple(center(x, q) for x in arrays[1]))
    if kind == KIND_PUBLIC:
        return PublicKey(params, tuple(arrays[1]), tuple(arrays[2]))
    raise ValueError(f"unknown key kind {kind}")


def save_keys(directory, sk: SecretKey, pk: PublicKey) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, key in (("secret.key", sk), ("public.key", pk)):
        path = directory / name
        path.write_bytes(dump_key(key))
        paths.append(path)
    return paths


def load_keys(directory):
    directory = Path(directory)
    sk = load_key((directory / "secret.key").read_bytes())
    pk = load_key((directory / "public.key").read_bytes())
    return sk, pk
