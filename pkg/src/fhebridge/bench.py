"""The six data-oblivious benchmarks, each in a bit-level and a bridged variant.

Every benchmark is written once against the secure types and takes a
``mode`` switch: ``bit`` keeps all values as encrypted words, ``bridged``
moves everything after the comparisons into native modular arithmetic.
Instances may be batched, one independent instance per slot.
"""
from __future__ import annotations

import operator
import random
import time
from dataclasses import dataclass
from typing import Any, Callable, Sequence

from .backend import Backend, BackendParams, CostReport, EvalContext, create_context
from .circuits import tree_reduce
from .secure import SecureInt, SecureMod, SecureUint

BENCHMARKS = ("FIB", "LOG", "MAX", "MUX", "PKS", "SOR")
MODES = ("bit", "bridged")
WIDTHS = (4, 8, 16)

FIB_MAX_ITER = 10
PKS_LENGTH = 8
VECTOR_LENGTH = 4
LOG_ROWS = 4
LOG_COLS = 4
LOG_OUTPUTS = 2
LOG_POSITIONS = (0, 2)
# bit-level runs reach depth 120+ at s=16; the default 880-bit budget would
# turn the count comparison into a noise comparison
BENCH_NOISE_BUDGET = 1 << 16


@dataclass(frozen=True)
class BenchmarkSpec:
    """One benchmark run. ``instances`` holds one input dict per slot;
    when omitted, ``slots`` random instances are drawn from ``seed``."""

    name: str
    mode: str
    width: int
    instances: tuple | None = None
    seed: int = 0
    t: int = 65537
    slots: int = 1
    signed: bool = False
    noise_budget_0: int = BENCH_NOISE_BUDGET

    def __post_init__(self):
        if self.name not in BENCHMARKS:
            raise ValueError(f"unknown benchmark {self.name!r}; choose from {BENCHMARKS}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; choose from {MODES}")
        if self.width not in WIDTHS:
            raise ValueError(f"width must be one of {WIDTHS}, got {self.width}")
        if self.instances is not None and len(self.instances) != self.slots:
            raise ValueError(f"{len(self.instances)} instances for {self.slots} slots")


@dataclass
class BenchResult:
    outputs: list[tuple[int, ...]]
    cost: CostReport
    wall_ms: float
    slots_used: int
    instances: tuple = ()
    corrupted: bool = False

    @property
    def amortized_ms(self) -> float:
        return self.wall_ms / self.slots_used


# -- plaintext oracles ---------------------------------------------------------

def fib_reference(n: int, max_iter: int = FIB_MAX_ITER) -> int:
    i, a, b, r = 0, 0, 1, 0
    for _ in range(max_iter):
        r += (i == n) * a
        i += 1
        a, b = b, a + b
    return r


def pks_reference(v: Sequence[int], k: int) -> int:
    return sum(x for i, x in enumerate(v) if i == k)


def max_reference(v: Sequence[int]) -> int:
    return max(v)


def mux_reference(inp: int, item: int, tval: int, fval: int) -> int:
    return tval if inp == item else fval


def sor_reference(v: Sequence[int]) -> list[int]:
    return sorted(v)


def log_reference(inputs, weights, threshold: int, positions=LOG_POSITIONS):
    rows = []
    for row in inputs:
        row = list(row)
        for p in positions:
            if row[p] > threshold:
                row[p] = threshold
        row.append(1)
        rows.append(row)
    return [[sum(r[k] * weights[k][j] for k in range(len(r))) for j in range(len(weights[0]))]
            for r in rows]


def reference(name: str, inst: dict) -> tuple[int, ...]:
    """Flattened plaintext result for one instance."""
    if name == "FIB":
        return (fib_reference(inst["in"]),)
    if name == "PKS":
        return (pks_reference(inst["v"], inst["k"]),)
    if name == "MAX":
        return (max_reference(inst["v"]),)
    if name == "MUX":
        return (mux_reference(inst["input"], inst["item"], inst["tval"], inst["fval"]),)
    if name == "SOR":
        return tuple(sor_reference(inst["v"]))
    if name == "LOG":
        return tuple(x for row in log_reference(inst["inputs"], inst["weights"], inst["threshold"])
                     for x in row)
    raise ValueError(name)


# -- instance generation -------------------------------------------------------

def value_limit(width: int, t: int) -> int:
    # outputs must be representable as non-negative signed words and as residues
    return min(2 ** (width - 1), t)


def random_instance(name: str, width: int, rng: random.Random, t: int = 65537) -> dict:
    """Random inputs whose result fits both the word width and the modulus."""
    lim = value_limit(width, t)
    if name == "FIB":
        ok = [n for n in range(FIB_MAX_ITER + 2) if fib_reference(n) < lim and n < lim]
        return {"in": rng.choice(ok)}
    if name == "PKS":
        return {"v": [rng.randrange(lim) for _ in range(PKS_LENGTH)],
                "k": rng.randrange(min(PKS_LENGTH + 2, lim))}
    if name in ("MAX", "SOR"):
        return {"v": rng.sample(range(lim), VECTOR_LENGTH)}
    if name == "MUX":
        inp = rng.randrange(lim)
        item = inp if rng.random() < 0.5 else rng.randrange(lim)
        return {"input": inp, "item": item, "tval": rng.randrange(lim), "fval": rng.randrange(lim)}
    if name == "LOG":
        # five products per output, each below m^2
        m = 1
        while 5 * (m + 1) ** 2 < lim:
            m += 1
        return {"inputs": [[rng.randrange(m + 1) for _ in range(LOG_COLS)] for _ in range(LOG_ROWS)],
                "weights": [[rng.randrange(m + 1) for _ in range(LOG_OUTPUTS)] for _ in range(LOG_COLS + 1)],
                "threshold": rng.randrange(m + 1)}
    raise ValueError(name)


def random_instances(name: str, width: int, count: int, seed: int, t: int = 65537) -> tuple:
    rng = random.Random(f"{name}/{width}/{seed}")
    return tuple(random_instance(name, width, rng, t) for _ in range(count))


# -- benchmark bodies ----------------------------------------------------------

def _sum(items):
    return tree_reduce(items, operator.add)


def _product(items):
    return tree_reduce(items, operator.mul)


class _Env:
    """Encrypts per-slot inputs with the word type and mode of one run."""

    def __init__(self, ctx: EvalContext, width: int, mode: str, signed: bool):
        self.ctx = ctx
        self.width = width
        self.bridged = mode == "bridged"
        self.word = SecureInt if signed else SecureUint

    def enc(self, values) -> Any:
        return self.word.encrypt(self.ctx, values, self.width)

    def enc_mod(self, values) -> SecureMod:
        return SecureMod.encrypt(self.ctx, values)

    def one(self):
        return self.enc_mod(1) if self.bridged else self.enc(1)

    def as_mod(self, x):
        return SecureMod.of(x) if self.bridged else x


def _col(instances, getter) -> list[int]:
    return [getter(inst) for inst in instances]


def _fib(env: _Env, inst) -> list:
    n = env.enc(_col(inst, lambda d: d["in"]))
    i = env.enc(0)
    one_w = env.enc(1)
    if env.bridged:
        a, b, r = env.enc_mod(0), env.enc_mod(1), env.enc_mod(0)
    else:
        a, b, r = env.enc(0), env.enc(1), env.enc(0)
    for _ in range(FIB_MAX_ITER):
        hit = i == n
        r = r + hit * a
        i = i + one_w
        a, b = b, a + b
    return [r]


def _pks(env: _Env, inst) -> list:
    v = [env.enc(_col(inst, lambda d, j=j: d["v"][j])) for j in range(PKS_LENGTH)]
    k = env.enc(_col(inst, lambda d: d["k"]))
    picks = []
    for i, vi in enumerate(v):
        eq = env.enc(i) == k
        picks.append(eq * env.as_mod(vi))
    return [_sum(picks)]


def _indices(env: _Env, v: list, combine: Callable, bridged_indicators: bool) -> list:
    size = len(v)
    m = [[] for _ in range(size)]
    for i in range(size):
        for j in range(i + 1, size):
            cond = v[i] > v[j]
            if bridged_indicators:
                m[i].append(cond.to_mod())
                m[j].append((~cond).to_mod())
            else:
                m[i].append(cond.to_word(env.word, env.width))
                m[j].append((~cond).to_word(env.word, env.width))
    return [combine(row) if row else None for row in m]


def _max(env: _Env, inst) -> list:
    v = [env.enc(_col(inst, lambda d, j=j: d["v"][j])) for j in range(len(inst[0]["v"]))]
    idx = _indices(env, v, _product, env.bridged)
    idx = [env.one() if x is None else x for x in idx]
    vals = [env.as_mod(x) for x in v]
    return [_sum([w * x for w, x in zip(idx, vals)])]


def _mux(env: _Env, inst) -> list:
    inp = env.enc(_col(inst, lambda d: d["input"]))
    item = env.enc(_col(inst, lambda d: d["item"]))
    tv = env.enc(_col(inst, lambda d: d["tval"]))
    fv = env.enc(_col(inst, lambda d: d["fval"]))
    cond = inp == item
    return [cond * env.as_mod(tv) + ~cond * env.as_mod(fv)]


def _sor(env: _Env, inst) -> list:
    size = len(inst[0]["v"])
    v = [env.enc(_col(inst, lambda d, j=j: d["v"][j])) for j in range(size)]
    # ranks stay bit-level: they are compared against positions below
    idx = _indices(env, v, _sum, False)
    idx = [env.enc(0) if x is None else x for x in idx]
    vals = [env.as_mod(x) for x in v]
    out = []
    for i in range(size):
        pos = env.enc(i)
        out.append(_sum([(pos == idx[j]) * vals[j] for j in range(size)]))
    return out


def _log(env: _Env, inst) -> list:
    rows = [[env.enc(_col(inst, lambda d, r=r, c=c: d["inputs"][r][c])) for c in range(LOG_COLS)]
            for r in range(LOG_ROWS)]
    threshold = env.enc(_col(inst, lambda d: d["threshold"]))
    for p in LOG_POSITIONS:
        for row in rows:
            cond = row[p] > threshold
            row[p] = cond * threshold + ~cond * row[p]
    one = env.one()
    mat = [[env.as_mod(x) for x in row] + [one] for row in rows]
    if env.bridged:
        w = [[env.enc_mod(_col(inst, lambda d, k=k, j=j: d["weights"][k][j])) for j in range(LOG_OUTPUTS)]
             for k in range(LOG_COLS + 1)]
    else:
        w = [[env.enc(_col(inst, lambda d, k=k, j=j: d["weights"][k][j])) for j in range(LOG_OUTPUTS)]
             for k in range(LOG_COLS + 1)]
    out = []
    for row in mat:
        for j in range(LOG_OUTPUTS):
            out.append(_sum([row[k] * w[k][j] for k in range(LOG_COLS + 1)]))
    return out


_BODIES = {"FIB": _fib, "PKS": _pks, "MAX": _max, "MUX": _mux, "SOR": _sor, "LOG": _log}


def _decrypt(value) -> tuple[list[int], bool]:
    ctx = value.ctx
    cts = [value.ct] if isinstance(value, SecureMod) else list(value.word.bits)
    corrupted = any(ctx.decrypt(c).corrupted for c in cts)
    return value.decrypt(), corrupted


def evaluate(ctx: EvalContext, name: str, mode: str, width: int, instances: Sequence[dict],
             signed: bool = False) -> tuple[list[tuple[int, ...]], bool]:
    """Run one benchmark body in ``ctx``; returns per-slot outputs and the corruption flag."""
    env = _Env(ctx, width, mode, signed)
    results = _BODIES[name](env, list(instances))
    columns = []
    corrupted = False
    for value in results:
        vals, bad = _decrypt(value)
        corrupted |= bad
        columns.append(vals)
    return [tuple(col[k] for col in columns) for k in range(ctx.slots)], corrupted


def run_benchmark(spec: BenchmarkSpec, backend: Backend | None = None) -> BenchResult:
    """Encrypt, evaluate, decrypt and meter one benchmark run."""
    instances = spec.instances
    if instances is None:
        instances = random_instances(spec.name, spec.width, spec.slots, spec.seed, spec.t)
    params = BackendParams(spec.t, spec.slots, spec.noise_budget_0)
    ctx = create_context(params, backend, seed=spec.seed)
    start = time.perf_counter()
    outputs, corrupted = evaluate(ctx, spec.name, spec.mode, spec.width, instances, spec.signed)
    wall_ms = (time.perf_counter() - start) * 1000.0
    return BenchResult(outputs, ctx.meter_snapshot(), wall_ms, spec.slots, tuple(instances), corrupted)
