import csv
import io
import json
import random

import pytest

from fhebridge import cli
from fhebridge.lattice import LatticeParams, dec, enc, load_keys


def run_cli(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_fnv1a_known_vectors():
    assert cli.fnv1a_64(b"") == 0xCBF29CE484222325
    assert cli.fnv1a_64(b"a") == 0xAF63DC4C8601EC8C


def test_bench_pks_both(capsys):
    code, out, _ = run_cli(["bench", "--benchmark", "pks", "--mode", "both", "--bits", "8",
                            "--t", "65537"], capsys)
    assert code == 0
    report = json.loads(out)
    recs = {r["mode"]: r for r in report["records"]}
    assert set(recs) == {"bit", "bridged"}
    assert recs["bridged"]["ct_mults"] < recs["bit"]["ct_mults"]
    for rec in report["records"]:
        assert tuple(rec) == cli.RECORD_FIELDS
    (cmp,) = report["comparisons"]
    assert cmp["outputs_equal"] and cmp["mult_ratio"] > 1


def test_bench_batched_amortized(capsys):
    code, out, _ = run_cli(["bench", "--benchmark", "fib", "--mode", "bridged", "--bits", "8",
                            "--slots", "1024"], capsys)
    assert code == 0
    (rec,) = json.loads(out)["records"]
    assert rec["slots"] == 1024
    assert rec["amortized_ms"] == rec["wall_ms"] / 1024


def test_same_seed_same_digest(capsys):
    argv = ["bench", "--benchmark", "sor,max", "--mode", "bit", "--bits", "4", "--seed", "5"]
    _, first, _ = run_cli(argv, capsys)
    _, second, _ = run_cli(argv, capsys)
    digests = lambda text: [r["output_digest"] for r in json.loads(text)["records"]]
    assert digests(first) == digests(second)
    _, other, _ = run_cli(argv[:-1] + ["6"], capsys)
    assert digests(other) != digests(first)


def test_csv_report(tmp_path, capsys):
    path = tmp_path / "r.csv"
    code, _, _ = run_cli(["bench", "--benchmark", "mux", "--bits", "4,8", "--format", "csv",
                          "--out", str(path)], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    assert len(rows) == 4
    assert tuple(rows[0]) == cli.RECORD_FIELDS


def test_config_file_and_env(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("benchmark = mux\nmode = bridged\nbits = 4\nseed = 3\n")
    monkeypatch.setenv("FHEBRIDGE_SEED", "99")
    _, out, _ = run_cli(["bench", "--config", str(cfg)], capsys)
    (rec,) = json.loads(out)["records"]
    assert (rec["benchmark"], rec["mode"], rec["bits"]) == ("MUX", "bridged", 4)
    # a flag beats the file
    _, out2, _ = run_cli(["bench", "--config", str(cfg), "--bits", "8"], capsys)
    assert json.loads(out2)["records"][0]["bits"] == 8
    jcfg = tmp_path / "run.json"
    jcfg.write_text(json.dumps({"benchmark": "fib", "mode": "bit", "bits": "4"}))
    _, out3, _ = run_cli(["bench", "--config", str(jcfg)], capsys)
    assert json.loads(out3)["records"][0]["benchmark"] == "FIB"


def test_env_seed_fallback(monkeypatch):
    args = cli.build_parser().parse_args(["bench"])
    assert cli.build_config(args, env={"FHEBRIDGE_SEED": "42"}).seed == 42
    args = cli.build_parser().parse_args(["bench", "--seed", "1"])
    assert cli.build_config(args, env={"FHEBRIDGE_SEED": "42"}).seed == 1


def test_bad_config_exits_nonzero(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    code, _, err = run_cli(["bench", "--config", str(cfg)], capsys)
    assert code == 2 and "colour" in err
    code, _, _ = run_cli(["bench", "--benchmark", "nope"], capsys)
    assert code == 2


def test_corruption_sets_exit_code(capsys):
    code, out, err = run_cli(["bench", "--benchmark", "max", "--mode", "both", "--bits", "8",
                              "--noise-budget", "880"], capsys)
    report = json.loads(out)
    assert code == 1
    assert [e["mode"] for e in report["errors"]] == ["bit"]
    assert report["errors"][0]["error"] == "corrupted"
    assert "corrupted" in err


def test_lattice_bench_and_depth_guard(capsys):
    code, out, _ = run_cli(["bench", "--benchmark", "mux", "--mode", "both", "--bits", "4",
                            "--t", "17", "--backend", "lattice"], capsys)
    report = json.loads(out)
    assert code == 1
    (rec,) = report["records"]
    assert (rec["backend"], rec["mode"]) == ("lattice", "bridged")
    (err,) = report["errors"]
    assert (err["mode"], err["error"]) == ("bit", "depth_guard")
    code, _, _ = run_cli(["bench", "--backend", "lattice", "--q-bits", "70"], capsys)
    assert code == 2


@pytest.mark.parametrize("argv, result, key, cost", [
    (["u2m", "--bits", "8", "--value", "200"], 200, "ct_adds", 14),
    (["m2u", "--bits", "3", "--t", "5", "--value", "4"], 4, "ct_mults", 25),
    (["i2m", "--bits", "4", "--t", "17", "--value", "-3"], 14, "ct_mults", 2),
    (["m2i", "--bits", "3", "--t", "5", "--value", "4"], -1, "mult_depth", 4),
])
def test_convert(argv, result, key, cost, capsys):
    code, out, _ = run_cli(["convert"] + argv, capsys)
    rec = json.loads(out)
    assert code == 0 and rec["result"] == result and rec[key] == cost


def test_convert_refuses_large_t(capsys):
    code, _, err = run_cli(["convert", "m2u", "--bits", "8", "--value", "3"], capsys)
    assert code == 2 and "impractical" in err


def test_keygen_files(tmp_path, capsys):
    code, out, _ = run_cli(["keygen", "--n", "64", "--q-bits", "40", "--t", "17", "--seed", "1",
                            "--out", str(tmp_path)], capsys)
    assert code == 0 and len(out.split()) == 2
    for name in ("secret.key", "public.key"):
        assert (tmp_path / name).read_bytes()[:8] == b"FHBRIDG1"
    sk, pk = load_keys(tmp_path)
    rng = random.Random(0)
    for _ in range(100):
        m = [rng.randrange(17) for _ in range(64)]
        assert dec(sk, enc(pk, m, rng)) == m


def test_mismatched_keys_garble(tmp_path, capsys):
    run_cli(["keygen", "--seed", "1", "--out", str(tmp_path / "a")], capsys)
    run_cli(["keygen", "--seed", "2", "--out", str(tmp_path / "b")], capsys)
    sk_a, _ = load_keys(tmp_path / "a")
    _, pk_b = load_keys(tmp_path / "b")
    rng = random.Random(0)
    wrong = 0
    for _ in range(20):
        m = [rng.randrange(17) for _ in range(64)]
        wrong += dec(sk_a, enc(pk_b, m, rng)) != m
    assert wrong == 20


def test_keygen_rejects_bad_params(tmp_path, capsys):
    code, _, _ = run_cli(["keygen", "--n", "48", "--out", str(tmp_path)], capsys)
    assert code == 2
    assert LatticeParams(64, 2**40, 17).delta == 2**40 // 17


@pytest.mark.parametrize("t", [2, 65537])
def test_gates_command(t, capsys):
    code, out, _ = run_cli(["gates", "--t", str(t), "--format", "json"], capsys)
    rows = {r["gate"]: r for r in json.loads(out)}
    assert code == 0 and all(r["correct"] for r in rows.values())
    assert rows["NOT"]["ct_mults"] == 0
    assert rows["XOR"]["ct_mults"] == (0 if t == 2 else 1)
    others = [r["ct_mults"] for g, r in rows.items() if g not in ("NOT", "XOR", "XNOR")]
    assert others == [1] * len(others)


def test_gates_text(capsys):
    code, out, _ = run_cli(["gates"], capsys)
    assert code == 0 and "XOR   mults=0" in out
