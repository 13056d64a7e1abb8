"""Command-line entry point: ``fhebridge {bench,convert,keygen,gates}``."""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import bench as B
from .backend import BackendParams, create_context
from .gates import GATES, TRUTH, arity
from .lattice import DepthGuardError, LatticeBackend, LatticeParams, keygen, save_keys
from .secure import SecureInt, SecureMod, SecureUint, int_to_mod, mod_to_int, mod_to_uint, uint_to_mod

RECORD_FIELDS = (
    "benchmark", "mode", "bits", "t", "slots", "backend", "ct_adds", "ct_mults",
    "pt_ops", "mult_depth", "wall_ms", "amortized_ms", "output_digest",
)
# searching every residue is hopeless beyond this without an explicit override
CONVERT_T_LIMIT = 2**12
DEFAULT_LATTICE_Q_BITS = 62

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def output_digest(outputs) -> str:
    text = ";".join(",".join(str(v) for v in slot) for slot in outputs)
    return f"{fnv1a_64(text.encode()):016x}"


@dataclass
class RunConfig:
    backend: str = "plain"
    t: int = 65537
    slots: int = 1
    bits: tuple = (8,)
    benchmark: tuple = B.BENCHMARKS
    mode: str = "both"
    seed: int = 0
    out: str | None = None
    format: str = "json"
    signed: bool = False
    noise_budget: int = B.BENCH_NOISE_BUDGET
    n: int = 32  # at q = 2^62, n = 64 leaves too little headroom for depth-4 programs
    q_bits: int = DEFAULT_LATTICE_Q_BITS
    workers: int = 1

    def __post_init__(self):
        if self.backend not in ("plain", "lattice"):
            raise ValueError(f"backend must be 'plain' or 'lattice', got {self.backend!r}")
        if self.mode not in ("bit", "bridged", "both"):
            raise ValueError(f"mode must be bit, bridged or both, got {self.mode!r}")
        if self.format not in ("json", "csv"):
            raise ValueError(f"format must be json or csv, got {self.format!r}")
        if self.backend == "lattice":
            LatticeParams(self.n, 2**self.q_bits, self.t)
        for name in self.benchmark:
            if name not in B.BENCHMARKS:
                raise ValueError(f"unknown benchmark {name!r}")
        for s in self.bits:
            if s not in B.WIDTHS:
                raise ValueError(f"bits must be among {B.WIDTHS}, got {s}")
        if self.slots < 1 or self.workers < 1:
            raise ValueError("slots and workers must be >= 1")

    @property
    def modes(self) -> tuple:
        return B.MODES if self.mode == "both" else (self.mode,)


def _split(value) -> tuple:
    if isinstance(value, (list, tuple)):
        return tuple(value)
    return tuple(v.strip() for v in str(value).split(",") if v.strip())


def _bool(value) -> bool:
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() in ("1", "true", "yes", "on")


_COERCE = {
    "backend": str, "t": int, "slots": int, "seed": int, "out": str, "format": str,
    "mode": str, "noise_budget": int, "n": int, "q_bits": int, "workers": int,
    "signed": _bool,
    "bits": lambda v: tuple(int(x) for x in _split(v)),
    "benchmark": lambda v: tuple(x.upper() for x in _split(v)) if str(v).lower() != "all" else B.BENCHMARKS,
}


def load_config(path) -> dict:
    """Flat key/value document: JSON object or ``key = value`` lines."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        raw = json.loads(text)
    else:
        parser = configparser.ConfigParser()
        parser.read_string("[run]\n" + text)
        raw = dict(parser["run"])
    out = {}
    for key, value in raw.items():
        key = key.replace("-", "_")
        if key not in _COERCE:
            raise ValueError(f"unknown config key {key!r}")
        out[key] = _COERCE[key](value)
    return out


def build_config(args: argparse.Namespace, env=os.environ) -> RunConfig:
    """Flags override the config file, which overrides ``FHEBRIDGE_SEED`` and defaults."""
    values: dict = {}
    if env.get("FHEBRIDGE_SEED"):
        values["seed"] = int(env["FHEBRIDGE_SEED"])
    if args.config:
        values.update(load_config(args.config))
    for key in _COERCE:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = _COERCE[key](flag)
    return RunConfig(**values)


def _make_backend(cfg: RunConfig, seed: int):
    if cfg.backend == "plain":
        return None
    return LatticeBackend(LatticeParams(cfg.n, 2**cfg.q_bits, cfg.t), seed=seed)


def _run_one(cfg: RunConfig, name: str, mode: str, bits: int) -> dict:
    spec = B.BenchmarkSpec(name, mode, bits, seed=cfg.seed, t=cfg.t, slots=cfg.slots,
                           signed=cfg.signed, noise_budget_0=cfg.noise_budget)
    base = {"benchmark": name, "mode": mode, "bits": bits}
    try:
        res = B.run_benchmark(spec, _make_backend(cfg, cfg.seed))
    except DepthGuardError as exc:
        return {**base, "error": "depth_guard", "detail": str(exc)}
    record = {
        **base, "t": cfg.t, "slots": cfg.slots, "backend": cfg.backend,
        "ct_adds": res.cost.ct_adds, "ct_mults": res.cost.ct_mults, "pt_ops": res.cost.pt_ops,
        "mult_depth": res.cost.mult_depth, "wall_ms": res.wall_ms,
        "amortized_ms": res.amortized_ms, "output_digest": output_digest(res.outputs),
    }
    expected = [B.reference(name, inst) for inst in res.instances]
    if res.corrupted:
        return {**record, "error": "corrupted", "detail": "noise budget exhausted"}
    if res.outputs != expected:
        return {**record, "error": "mismatch", "detail": "decrypted outputs differ from the plaintext oracle"}
    return record


def run_bench(cfg: RunConfig) -> dict:
    if cfg.backend == "lattice" and cfg.slots != 1:
        print("lattice backend has no batching; using slots=1", file=sys.stderr)
        cfg.slots = 1
    jobs = [(name, mode, s) for name in cfg.benchmark for s in cfg.bits for mode in cfg.modes]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        results = list(pool.map(lambda job: _run_one(cfg, *job), jobs))
    records, errors = [], []
    for res in results:
        if "error" in res:
            errors.append(res)
        else:
            records.append(res)
    comparisons = []
    if cfg.mode == "both":
        by_key = {(r["benchmark"], r["bits"], r["mode"]): r for r in records}
        for name in cfg.benchmark:
            for s in cfg.bits:
                bit, bri = by_key.get((name, s, "bit")), by_key.get((name, s, "bridged"))
                if bit and bri:
                    comparisons.append({
                        "benchmark": name, "bits": s,
                        "mult_ratio": bit["ct_mults"] / bri["ct_mults"],
                        "bit_mult_depth": bit["mult_depth"],
                        "bridged_mult_depth": bri["mult_depth"],
                        "outputs_equal": bit["output_digest"] == bri["output_digest"],
                    })
    return {"records": records, "comparisons": comparisons, "errors": errors}


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=RECORD_FIELDS, lineterminator="\n")
    writer.writeheader()
    for rec in report["records"]:
        writer.writerow({k: rec[k] for k in RECORD_FIELDS})
    return buf.getvalue()


def cmd_bench(args) -> int:
    try:
        cfg = build_config(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = run_bench(cfg)
    text = render(report, cfg.format)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    if cfg.format == "csv":
        for item in report["comparisons"] + report["errors"]:
            print(json.dumps(item), file=sys.stderr)
    for err in report["errors"]:
        print(f"{err['benchmark']}/{err['mode']}/{err['bits']}: {err['error']}: {err['detail']}",
              file=sys.stderr)
    return 1 if report["errors"] else 0


def convert(direction: str, bits: int, t: int, value: int, force: bool = False) -> dict:
    """Run one conversion on the tracked backend; returns the result and its cost."""
    if direction in ("m2u", "m2i") and t > CONVERT_T_LIMIT and not force:
        raise ValueError(
            f"{direction} with t={t} is impractical: it searches all t residues, each with an "
            f"exponentiation to t-1 (refused above t={CONVERT_T_LIMIT}; pass --force to run anyway)")
    ctx = create_context(BackendParams(t))
    if direction == "u2m":
        x = SecureUint.encrypt(ctx, value, bits)
        before = ctx.meter_snapshot()
        out = uint_to_mod(x)
    elif direction == "i2m":
        x = SecureInt.encrypt(ctx, value, bits)
        before = ctx.meter_snapshot()
        out = int_to_mod(x)
    elif direction in ("m2u", "m2i"):
        x = SecureMod.encrypt(ctx, value)
        before = ctx.meter_snapshot()
        out = mod_to_uint(x, bits) if direction == "m2u" else mod_to_int(x, bits)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    (result,) = out.decrypt()
    cost = ctx.meter_snapshot() - before
    return {"direction": direction, "bits": bits, "t": t, "value": value, "result": result,
            **cost.as_dict()}


def cmd_convert(args) -> int:
    try:
        out = convert(args.direction, args.bits, args.t, args.value, args.force)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(out))
    return 0


def cmd_keygen(args) -> int:
    q = args.q if args.q is not None else 2**args.q_bits
    try:
        params = LatticeParams(args.n, q, args.t)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    seed = args.seed if args.seed is not None else int(os.environ.get("FHEBRIDGE_SEED", 0))
    sk, pk = keygen(params, seed=seed)
    for path in save_keys(args.out, sk, pk):
        print(path)
    return 0


def gate_table(t: int) -> list[dict]:
    """Truth table and measured ct_mults of every gate at modulus ``t``."""
    rows = []
    for name, gate in GATES.items():
        n = arity(name)
        inputs = [tuple((k >> (n - 1 - j)) & 1 for j in range(n)) for k in range(2**n)]
        ctx = create_context(BackendParams(t, slots=len(inputs)))
        args = [ctx.encrypt([row[j] for row in inputs]) for j in range(n)]
        out = list(ctx.decrypt(gate(*args)))
        expected = [TRUTH[name](*row) for row in inputs]
        rows.append({"gate": name, "ct_mults": ctx.meter.ct_mults,
                     "table": [[*row, o] for row, o in zip(inputs, out)],
                     "correct": out == expected})
    return rows


def cmd_gates(args) -> int:
    rows = gate_table(args.t)
    if args.format == "json":
        print(json.dumps(rows, indent=2))
    else:
        for row in rows:
            table = " ".join("".join(map(str, r[:-1])) + ">" + str(r[-1]) for r in row["table"])
            status = "ok" if row["correct"] else "WRONG"
            print(f"{row['gate']:<5} mults={row['ct_mults']}  {table}  {status}")
    return 0 if all(r["correct"] for r in rows) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fhebridge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bench", help="run benchmarks and write a cost report")
    p.add_argument("--config", help="flat key/value file (JSON or key = value lines)")
    p.add_argument("--benchmark", help="comma list of benchmark names, or 'all'")
    p.add_argument("--mode", choices=("bit", "bridged", "both"))
    p.add_argument("--bits", help="comma list of word widths (4, 8, 16)")
    p.add_argument("--t", type=int)
    p.add_argument("--slots", type=int)
    p.add_argument("--backend", choices=("plain", "lattice"))
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--signed", action="store_const", const=True, help="use signed words")
    p.add_argument("--noise-budget", dest="noise_budget", type=int,
                   help="initial simulated noise budget in bits (plain backend)")
    p.add_argument("--n", type=int, help="lattice ring degree")
    p.add_argument("--q-bits", dest="q_bits", type=int, help="lattice ciphertext modulus is 2^q_bits")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("convert", help="run one bridging conversion and print its cost")
    p.add_argument("direction", choices=("u2m", "i2m", "m2u", "m2i"))
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--t", type=int, default=65537)
    p.add_argument("--value", type=int, required=True)
    p.add_argument("--force", action="store_true", help="allow m2u/m2i with a large t")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("keygen", help="generate lattice key files")
    p.add_argument("--n", type=int, default=64)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--q", type=int)
    group.add_argument("--q-bits", dest="q_bits", type=int, default=40)
    p.add_argument("--t", type=int, default=17)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="directory for the key files")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("gates", help="print gate truth tables with their mult costs")
    p.add_argument("--t", type=int, default=2)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_gates)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
