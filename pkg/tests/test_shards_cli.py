import json
import struct
import zlib

import numpy as np
import pytest

from coopmsr.cli import main
from coopmsr.errors import ShardFormatError
from coopmsr.shards import ShardFile, bytes_to_symbols, read_shard, symbols_to_bytes


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def desc_path(tmp_path, capsys):
    path = tmp_path / "ex1.json"
    code, out, _ = run(capsys, "construct", "--n", 6, "--k", 3, "--d", 4, "--h", 2, "--out", path)
    assert code == 0
    return path


@pytest.mark.parametrize("m", [3, 4, 5, 8, 12])
def test_byte_packing_roundtrip(m):
    data = bytes(np.random.default_rng(m).integers(0, 256, 37, dtype=np.uint8))
    sym = bytes_to_symbols(data, m)
    assert sym.max() < 2 ** m
    assert symbols_to_bytes(sym, m, len(data)) == data


def test_nibble_order():
    assert bytes_to_symbols(b"\xa5", 4).tolist() == [0x5, 0xA]


def test_shard_layout():
    sh = ShardFile(6, 3, 4, 3, 4, 2, 1, 9, bytes(range(24)))
    blob = sh.to_bytes()
    assert blob[:5] == b"CMSR\x01"
    assert struct.unpack_from("<6HIQ", blob, 5) == (6, 3, 4, 3, 4, 2, 1, 9)
    assert blob[-4:] == struct.pack("<I", zlib.crc32(bytes(range(24))))
    assert ShardFile.from_bytes(blob) == sh


def test_shard_rejects_damage():
    blob = bytearray(ShardFile(6, 3, 4, 3, 4, 0, 1, 9, bytes(24)).to_bytes())
    blob[30] ^= 1
    with pytest.raises(ShardFormatError):
        ShardFile.from_bytes(bytes(blob))
    with pytest.raises(ShardFormatError):
        ShardFile.from_bytes(b"XXXX" + bytes(blob[4:]))


def test_construct_reports(capsys, tmp_path):
    code, out, _ = run(capsys, "construct", "--n", 6, "--k", 3, "--d", 4, "--h", 2)
    info = json.loads(out)
    assert code == 0 and (info["ell_tilde"], info["ell"], info["q"]) == (8, 24, 16)
    code, out, _ = run(capsys, "construct", "--n", 7, "--k", 3, "--d", 5, "--h", 2)
    info = json.loads(out)
    assert (info["ell_tilde"], info["ell"], info["n_internal"]) == (81, 324, 8)


def test_construct_bad_params(capsys):
    code, _, err = run(capsys, "construct", "--n", 6, "--k", 3, "--d", 4, "--h", 4)
    assert code == 2 and "n-h" in err


def test_verify(capsys, desc_path):
    code, out, _ = run(capsys, "verify", desc_path, "--repair", "exhaustive")
    rep = json.loads(out)
    assert code == 0 and rep["passed"]
    assert [c["name"] for c in rep["checks"]] == ["load", "mds", "repair"]
    assert rep["checks"][1]["checked"] == 20 and rep["checks"][2]["checked"] == 15


def test_verify_sampled_is_seeded(capsys, desc_path):
    runs = []
    for _ in range(2):
        code, out, _ = run(capsys, "--seed", 7, "verify", desc_path, "--mds", "sample", 5, "--repair", "sample", 3)
        assert code == 0
        rep = json.loads(out)
        runs.append([(c["name"], c.get("checked"), c["passed"]) for c in rep["checks"]])
    assert runs[0] == runs[1]


def test_verify_tampered(capsys, desc_path, tmp_path):
    data = json.loads(desc_path.read_text())
    data["lambda"][1] = data["lambda"][0]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    code, out, _ = run(capsys, "verify", bad)
    assert code == 1 and "DuplicateLambda" in out


def test_encode_decode_repair(capsys, desc_path, tmp_path):
    payload = bytes(np.random.default_rng(1).integers(0, 256, 1000, dtype=np.uint8))
    src = tmp_path / "in.bin"
    src.write_bytes(payload)
    outdir = tmp_path / "shards"
    code, out, _ = run(capsys, "encode", desc_path, src, outdir)
    info = json.loads(out)
    assert code == 0 and len(info["shards"]) == 6
    stripes = -(-2 * len(payload) // 72)
    assert info["stripes"] == stripes
    sh = read_shard(outdir / "node_0.shard")
    assert len(sh.payload) == stripes * 24 * 1 and sh.original_byte_length == 1000

    shards = sorted(outdir.iterdir())
    code, _, _ = run(capsys, "decode", desc_path, *shards, "--out", tmp_path / "all.bin")
    assert code == 0 and (tmp_path / "all.bin").read_bytes() == payload
    code, _, _ = run(capsys, "decode", desc_path, shards[1], shards[3], shards[4], "--out", tmp_path / "k.bin")
    assert code == 0 and (tmp_path / "k.bin").read_bytes() == payload
    code, _, _ = run(capsys, "decode", desc_path, shards[0], shards[1], "--out", tmp_path / "x.bin")
    assert code == 4

    originals = {i: (outdir / f"node_{i}.shard").read_bytes() for i in (0, 2)}
    for i in originals:
        (outdir / f"node_{i}.shard").unlink()
    rest = sorted(outdir.iterdir())
    code, out, _ = run(capsys, "repair", desc_path, *rest, "--failed", "0,2")
    rep = json.loads(out)
    assert code == 0 and rep["optimal"] and rep["ledger"]["total"] == 80 == rep["cut_set_bound"]
    assert rep["ledger"]["step1"] == 64 and rep["ledger"]["step2"] == 16
    for i, blob in originals.items():
        assert (outdir / f"node_{i}.shard").read_bytes() == blob

    code, _, _ = run(capsys, "repair", desc_path, *rest, "--failed", "0,1,2")
    assert code == 5


def test_empty_file(capsys, desc_path, tmp_path):
    src = tmp_path / "empty"
    src.write_bytes(b"")
    code, out, _ = run(capsys, "encode", desc_path, src, tmp_path / "s")
    assert code == 0 and json.loads(out)["stripes"] == 1
    code, _, _ = run(capsys, "decode", desc_path, *sorted((tmp_path / "s").iterdir())[:3], "--out", tmp_path / "o")
    assert code == 0 and (tmp_path / "o").read_bytes() == b""


def test_encode_missing_input(capsys, desc_path, tmp_path):
    code, _, err = run(capsys, "encode", desc_path, tmp_path / "nope", tmp_path / "s")
    assert code == 3 and "I/O" in err


def test_decode_crc_failure(capsys, desc_path, tmp_path):
    src = tmp_path / "in.bin"
    src.write_bytes(b"hello world")
    run(capsys, "encode", desc_path, src, tmp_path / "s")
    shards = sorted((tmp_path / "s").iterdir())
    blob = bytearray(shards[0].read_bytes())
    blob[40] ^= 0xFF
    shards[0].write_bytes(bytes(blob))
    code, _, err = run(capsys, "decode", desc_path, *shards, "--out", tmp_path / "o")
    assert code == 4 and "CRC" in err


def test_bench(capsys, desc_path):
    code, out, _ = run(capsys, "--seed", 3, "bench", desc_path, "--stripes", 50)
    rep = json.loads(out)
    assert code == 0 and rep["correct"]
    assert rep["repair_bandwidth_per_stripe"] == rep["cut_set_bound"] == 80
    code, out2, _ = run(capsys, "--seed", 3, "bench", desc_path, "--stripes", 50)
    assert set(json.loads(out2)) == set(rep)
