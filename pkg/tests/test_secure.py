import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fhebridge.backend import BackendParams, create_context
from fhebridge.secure import (SecureBool, SecureInt, SecureMod, SecureUint, int_to_mod, is_prime, mod_pow,
                              mod_to_int, mod_to_uint, uint_to_mod)


def ctx_for(t=65537, slots=1):
    return create_context(BackendParams(t, slots=slots))


def omega(e):
    return bin(e).count("1")


def floor_log2(e):
    return e.bit_length() - 1


def ceil_log2(e):
    return (e - 1).bit_length()


@pytest.mark.parametrize("s, x", [(4, 13), (8, 200), (4, 0)])
def test_uint_to_mod_examples(s, x):
    ctx = ctx_for()
    v = SecureUint.encrypt(ctx, x, s)
    before = ctx.meter_snapshot()
    out = uint_to_mod(v)
    cost = ctx.meter_snapshot() - before
    assert out.decrypt() == [x]
    assert (cost.ct_mults, cost.ct_adds) == (0, 2 * (s - 1))
    assert out.ct.mult_depth == 0


@pytest.mark.parametrize("s", [2, 4, 8])
def test_uint_to_mod_exhaustive(s):
    ctx = ctx_for(slots=2**s)
    assert uint_to_mod(SecureUint.encrypt(ctx, list(range(2**s)), s)).decrypt() == list(range(2**s))


@pytest.mark.parametrize("s", [2, 4, 8])
def test_int_to_mod_exhaustive(s):
    t = 65537
    vals = list(range(-(2 ** (s - 1)), 2 ** (s - 1)))
    ctx = ctx_for(t, slots=len(vals))
    x = SecureInt.encrypt(ctx, vals, s)
    before = ctx.meter_snapshot()
    out = int_to_mod(x)
    cost = ctx.meter_snapshot() - before
    assert out.decrypt() == [v % t for v in vals]
    assert cost.ct_mults == 2 and out.ct.mult_depth == 1
    # the plaintext constant additions show up separately
    assert (cost.ct_adds, cost.pt_ops) == (2 * s - 1, 2)


def test_int_to_mod_examples_and_precondition():
    ctx = ctx_for(17)
    assert int_to_mod(SecureInt.encrypt(ctx, -3, 4)).decrypt() == [14]
    assert int_to_mod(SecureInt.encrypt(ctx, 5, 4)).decrypt() == [5]
    with pytest.raises(ValueError):
        int_to_mod(SecureInt.encrypt(ctx, 1, 5))


@pytest.mark.parametrize("e", [1, 2, 3, 4, 5, 16, 100, 65536])
def test_mod_pow_cost(e):
    t = 65537
    ctx = ctx_for(t, slots=5)
    x = SecureMod.encrypt(ctx, [0, 1, 2, 3, 12345])
    before = ctx.meter.ct_mults
    out = mod_pow(x, e)
    assert ctx.meter.ct_mults - before == floor_log2(e) + omega(e) - 1
    assert out.ct.mult_depth == ceil_log2(e)
    assert out.decrypt() == [pow(v, e, t) for v in (0, 1, 2, 3, 12345)]


def test_mod_pow_fermat_and_errors():
    ctx = ctx_for(5)
    assert (SecureMod.encrypt(ctx, 3) ** 4).decrypt() == [1]
    with pytest.raises(ValueError):
        mod_pow(SecureMod.encrypt(ctx, 3), 0)


def search_cost(t, s):
    return t * (s + floor_log2(t - 1) + omega(t - 1) - 1)


@pytest.mark.parametrize("t, s", [(5, 3), (17, 4), (17, 5), (2, 1), (3, 2)])
def test_mod_to_uint_exhaustive_and_cost(t, s):
    ctx = ctx_for(t, slots=t)
    x = SecureMod.encrypt(ctx, list(range(t)))
    before = ctx.meter.ct_mults
    out = mod_to_uint(x, s)
    assert ctx.meter.ct_mults - before == search_cost(t, s)
    assert max(b.mult_depth for b in out.word) == ceil_log2(t - 1) + 1
    assert out.decrypt() == [r % 2**s for r in range(t)]


def eq3_oracle(x, s, t):
    # sign from the msb of the residue, then wrap into two's complement
    y = x if not (x >> (s - 1)) & 1 else 2**s - t + x
    y %= 2**s
    return y - 2**s if y >> (s - 1) else y


@pytest.mark.parametrize("t, s", [(5, 3), (17, 5), (3, 2)])
def test_mod_to_int_exhaustive(t, s):
    ctx = ctx_for(t, slots=t)
    x = SecureMod.encrypt(ctx, list(range(t)))
    before = ctx.meter.ct_mults
    out = mod_to_int(x, s)
    got = out.decrypt()
    assert got == [eq3_oracle(r, s, t) for r in range(t)]
    assert all(g % t == r for g, r in zip(got, range(t)))
    # two residue searches plus one select per word
    assert ctx.meter.ct_mults - before == 2 * search_cost(t, s) + 2 * s
    assert max(b.mult_depth for b in out.word) == ceil_log2(t - 1) + 2


def test_mod_to_int_examples():
    ctx = ctx_for(5)
    assert mod_to_int(SecureMod.encrypt(ctx, 4), 3).decrypt() == [-1]
    assert mod_to_int(SecureMod.encrypt(ctx, 3), 3).decrypt() == [3]


def test_word_conversions_reject_bad_moduli():
    with pytest.raises(ValueError):
        mod_to_uint(SecureMod.encrypt(ctx_for(16), 3), 4)
    with pytest.raises(ValueError):
        mod_to_int(SecureMod.encrypt(ctx_for(17), 3), 4)
    assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]


def test_bool_times_mod():
    ctx = ctx_for(17)
    a = SecureUint.encrypt(ctx, 7, 4)
    b = SecureUint.encrypt(ctx, 7, 4)
    eq = a == b
    eq_mults = ctx.meter.ct_mults
    out = eq * SecureMod.of(a)
    assert out.decrypt() == [7]
    assert ctx.meter.ct_mults == eq_mults + 1
    zero = SecureBool.encrypt(ctx, 0) * SecureMod.encrypt(ctx, 9)
    assert zero.decrypt() == [0]


def test_operator_surface():
    ctx = ctx_for(65537)
    a, b = SecureInt.encrypt(ctx, -3, 8), SecureInt.encrypt(ctx, 5, 8)
    assert (a + b).decrypt() == [2]
    assert (a - b).decrypt() == [-8]
    assert (a * b).decrypt() == [-15]
    assert (-a).decrypt() == [3]
    assert (a < b).decrypt() == [1] and (a > b).decrypt() == [0]
    assert (a == b).decrypt() == [0] and (a != b).decrypt() == [1]
    assert (~(a == b)).decrypt() == [1]
    assert ((a < b) * b).decrypt() == [5]
    assert (a + 1).decrypt() == [-2] and (10 - b).decrypt() == [5]
    u = SecureUint.encrypt(ctx, 200, 8)
    assert (u > SecureUint.encrypt(ctx, 5, 8)).decrypt() == [1]
    m = SecureMod.encrypt(ctx, 10)
    assert (m * 3 + 1).decrypt() == [31] and (1 - m).decrypt() == [65537 - 9]
    assert (m - SecureMod.encrypt(ctx, 4)).decrypt() == [6]
    with pytest.raises(TypeError):
        a + u


def test_explicit_conversions():
    ctx = ctx_for(65537)
    assert SecureMod.of(SecureInt.encrypt(ctx, -1, 4)).decrypt() == [65536]
    assert SecureMod.of(SecureUint.encrypt(ctx, 9, 4)).decrypt() == [9]
    assert SecureMod.of(SecureBool.encrypt(ctx, 1)).decrypt() == [1]
    assert SecureMod.of(5, ctx).decrypt() == [5]
    with pytest.raises(TypeError):
        SecureMod.of(5)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(["add", "mul", "sel", "sub"]), min_size=1, max_size=6),
       st.integers(0, 255), st.integers(0, 255), st.integers(0, 255))
def test_mixed_programs_match_plaintext(ops, x, y, z):
    """Random programs mixing word circuits and modular arithmetic."""
    t = 65537
    ctx = ctx_for(t)
    wx, wy = SecureUint.encrypt(ctx, x, 8), SecureUint.encrypt(ctx, y, 8)
    acc, ref = SecureMod.encrypt(ctx, z), z
    for op in ops:
        if op == "add":
            acc, ref = acc + SecureMod.of(wx + wy), (ref + (x + y) % 256) % t
        elif op == "mul":
            acc, ref = acc * uint_to_mod(wy), ref * y % t
        elif op == "sub":
            acc, ref = acc - SecureMod.of(wx - wy), (ref - (x - y) % 256) % t
        else:
            acc, ref = (wx < wy) * acc, ref * int(x < y)
    assert acc.decrypt() == [ref]


def test_conversion_depths_do_not_depend_on_values():
    rng = random.Random(0)
    costs = set()
    for _ in range(10):
        ctx = ctx_for(17)
        mod_to_uint(SecureMod.encrypt(ctx, rng.randrange(17)), 5)
        costs.add(ctx.meter_snapshot())
    assert len(costs) == 1
