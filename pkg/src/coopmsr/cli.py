"""Command-line interface: ``cmsr construct|verify|encode|decode|repair|bench``.

Reports go to stdout as JSON, logs to stderr.  Exit codes: 0 success,
1 verification failure, 2 bad parameters, 3 encode I/O, 4 decode, 5 repair.
"""
from __future__ import annotations

import argparse
import itertools
import json
import logging
import os
import sys
import time

import numpy as np

from .codec import decode_erasures, encode_systematic
from .construction import (
    build_descriptor,
    derive_params,
    load_descriptor,
    save_descriptor,
    verify_mds,
)
from .errors import CoopMSRError, ShardFormatError
from .repair import cooperative_repair, cut_set_bound, verify_repair_identities
from .shards import ShardFile, bytes_to_symbols, read_shard, shard_name, symbols_to_bytes, write_shard

log = logging.getLogger("coopmsr")

EXIT_VERIFY, EXIT_PARAMS, EXIT_ENCODE, EXIT_DECODE, EXIT_REPAIR = 1, 2, 3, 4, 5


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _int_list(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _load(path, code):
    try:
        return load_descriptor(path)
    except (OSError, ValueError, KeyError, CoopMSRError) as exc:
        raise CliError(code, f"cannot load descriptor {path}: {exc}") from None


# -- construct ------------------------------------------------------------------

def cmd_construct(args) -> int:
    try:
        params = derive_params(args.n, args.k, args.d, args.h, field_bits=args.field_bits)
        desc = build_descriptor(params)
    except CoopMSRError as exc:
        raise CliError(EXIT_PARAMS, str(exc)) from None
    if args.out:
        save_descriptor(desc, args.out)
        log.info("wrote %s", args.out)
    p = params
    _emit({"n": p.n, "k": p.k, "d": p.d, "h_set": list(p.h_set), "n_internal": p.n_int,
           "ell_tilde": p.ell_tilde, "ell": p.ell, "rho": p.rho, "m": p.m, "q": p.q,
           "gamma": desc.gamma, "descriptor": args.out})
    return 0


# -- verify ---------------------------------------------------------------------

def _mode(mode):
    if mode is None:
        return None
    if mode[0] == "exhaustive" and len(mode) == 1:
        return ("exhaustive", 0)
    if mode[0] == "sample" and len(mode) == 2 and mode[1].isdigit():
        return ("sample", int(mode[1]))
    raise CliError(EXIT_PARAMS, f"mode must be 'exhaustive' or 'sample N', got {' '.join(mode)}")


def _repair_configs(params, mode, rng):
    configs = []
    for h in params.h_set:
        if params.rho % (params.s + h - 1):
            continue
        for F in itertools.combinations(range(params.n), h):
            H = [x for x in range(params.n) if x not in F][:params.d]
            configs.append((F, tuple(H)))
    if mode[0] == "sample" and mode[1] < len(configs):
        pick = sorted(rng.choice(len(configs), size=mode[1], replace=False))
        configs = [configs[i] for i in pick]
    return configs


def cmd_verify(args) -> int:
    report = {"descriptor": args.descriptor, "checks": [], "passed": True}
    t0 = time.perf_counter()
    try:
        desc = load_descriptor(args.descriptor)
    except (OSError, ValueError, KeyError) as exc:
        report["checks"].append({"name": "load", "passed": False, "error": f"{type(exc).__name__}: {exc}"})
        report["passed"] = False
        _emit(report)
        return EXIT_VERIFY
    report["checks"].append({"name": "load", "passed": True})
    rng = np.random.default_rng(args.seed)
    mds = _mode(args.mds) or ("exhaustive", 0)
    mr = verify_mds(desc, mode=mds[0], samples=mds[1], seed=args.seed)
    report["checks"].append({"name": "mds", "mode": mds[0], **mr.to_dict()})

    rmode = _mode(args.repair)
    if rmode is not None:
        p = desc.params
        failures = []
        t1 = time.perf_counter()
        configs = _repair_configs(p, rmode, rng)
        for F, H in configs:
            ident = verify_repair_identities(desc, F, seed=args.seed)
            word = encode_systematic(desc, rng.integers(0, p.q, (2, p.k * p.ell)))
            fixed, ledger = cooperative_repair(desc, word, F, H)
            exact = all(np.array_equal(fixed[i], word[:, i]) for i in F)
            optimal = ledger.per_stripe()["total"] == cut_set_bound(p, len(F))
            if not (ident.passed and exact and optimal):
                failures.append({"failed": list(F), "helpers": list(H), "exact": exact,
                                 "optimal": optimal, "identities": ident.checks})
        report["checks"].append({"name": "repair", "mode": rmode[0], "checked": len(configs),
                                 "failures": failures, "passed": not failures,
                                 "seconds": round(time.perf_counter() - t1, 4)})
    report["passed"] = all(c["passed"] for c in report["checks"])
    report["seconds"] = round(time.perf_counter() - t0, 4)
    _emit(report)
    return 0 if report["passed"] else EXIT_VERIFY


# -- encode / decode --------------------------------------------------------------

def _stripes(desc, data: bytes) -> np.ndarray:
    p = desc.params
    sym = bytes_to_symbols(data, p.m)
    per = p.k * p.ell
    count = max(1, -(-sym.size // per))
    buf = np.zeros(count * per, dtype=desc.gf.dtype)
    buf[:sym.size] = sym
    return buf.reshape(count, per)


def cmd_encode(args) -> int:
    desc = _load(args.descriptor, EXIT_PARAMS)
    p = desc.params
    gf = desc.gf
    try:
        with open(args.input, "rb") as fh:
            data = fh.read()
        os.makedirs(args.outdir, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_ENCODE, f"I/O error: {exc}") from None
    msg = _stripes(desc, data)
    word = encode_systematic(desc, msg)
    paths = []
    try:
        for i in range(p.n):
            shard = ShardFile(p.n, p.k, p.d, p.rho, p.m, i, msg.shape[0], len(data), gf.to_bytes(word[:, i]))
            path = os.path.join(args.outdir, shard_name(i))
            write_shard(path, shard)
            paths.append(path)
    except OSError as exc:
        raise CliError(EXIT_ENCODE, f"I/O error: {exc}") from None
    _emit({"shards": paths, "stripes": int(msg.shape[0]), "original_byte_length": len(data),
           "shard_payload_bytes": int(msg.shape[0] * p.ell * gf.symbol_bytes)})
    return 0


def _read_shards(desc, paths, code):
    """Load and cross-check shards; returns ``({index: symbols}, stripes, length)``."""
    p = desc.params
    found = {}
    meta = None
    for path in paths:
        try:
            sh = read_shard(path)
        except (OSError, ShardFormatError) as exc:
            raise CliError(code, f"{path}: {exc}") from None
        if (sh.n, sh.k, sh.d, sh.rho, sh.m) != (p.n, p.k, p.d, p.rho, p.m):
            raise CliError(code, f"{path}: header does not match the descriptor")
        if not 0 <= sh.node_index < p.n:
            raise CliError(code, f"{path}: node index {sh.node_index} out of range")
        if meta is None:
            meta = (sh.stripe_count, sh.original_byte_length)
        elif meta != (sh.stripe_count, sh.original_byte_length):
            raise CliError(code, f"{path}: stripe count or length differs from the other shards")
        try:
            found[sh.node_index] = sh.symbols(desc.gf, p.ell)
        except ShardFormatError as exc:
            raise CliError(code, f"{path}: {exc}") from None
    if meta is None:
        raise CliError(code, "no shards given")
    return found, meta[0], meta[1]


def cmd_decode(args) -> int:
    desc = _load(args.descriptor, EXIT_DECODE)
    p = desc.params
    found, stripes, length = _read_shards(desc, args.shards, EXIT_DECODE)
    if len(found) < p.k:
        raise CliError(EXIT_DECODE, f"need at least k={p.k} distinct shards, got {len(found)}")
    word = np.zeros((stripes, p.n, p.ell), dtype=desc.gf.dtype)
    for i, sym in found.items():
        word[:, i] = sym
    erased = [i for i in range(p.n) if i not in found]
    try:
        word = decode_erasures(desc, word, erased)
        data = symbols_to_bytes(word[:, :p.k].reshape(-1), p.m, length)
    except (CoopMSRError, ValueError) as exc:
        raise CliError(EXIT_DECODE, str(exc)) from None
    try:
        with open(args.out, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise CliError(EXIT_DECODE, f"I/O error: {exc}") from None
    _emit({"out": args.out, "bytes": length, "used_shards": sorted(found), "reconstructed": erased})
    return 0


# -- repair -------------------------------------------------------------------------

def cmd_repair(args) -> int:
    desc = _load(args.descriptor, EXIT_REPAIR)
    p = desc.params
    gf = desc.gf
    found, stripes, length = _read_shards(desc, args.shards, EXIT_REPAIR)
    F = sorted(set(args.failed))
    if args.helpers:
        H = sorted(set(args.helpers))
    else:
        H = [i for i in sorted(found) if i not in F][:p.d]
    missing = [j for j in H if j not in found]
    if missing:
        raise CliError(EXIT_REPAIR, f"no shard for helpers {missing}")
    try:
        fixed, ledger = cooperative_repair(desc, {j: found[j] for j in H}, F, H)
        bound = cut_set_bound(p, len(F))
    except CoopMSRError as exc:
        raise CliError(EXIT_REPAIR, str(exc)) from None
    outdir = args.out_dir or os.path.dirname(os.path.abspath(args.shards[0]))
    written = []
    try:
        os.makedirs(outdir, exist_ok=True)
        for i in F:
            shard = ShardFile(p.n, p.k, p.d, p.rho, p.m, i, stripes, length, gf.to_bytes(fixed[i]))
            path = os.path.join(outdir, shard_name(i))
            write_shard(path, shard)
            written.append(path)
    except OSError as exc:
        raise CliError(EXIT_REPAIR, f"I/O error: {exc}") from None
    per = ledger.per_stripe()
    edges = [{"src": s, "dst": d, "symbols_per_stripe": c // ledger.stripes}
             for (s, d), c in sorted(ledger.edges.items())]
    _emit({"failed": F, "helpers": H, "written": written, "stripes": stripes,
           "ledger": {"edges": edges, **per}, "cut_set_bound": bound,
           "optimal": per["total"] == bound})
    return 0


# -- bench ----------------------------------------------------------------------------

def cmd_bench(args) -> int:
    desc = _load(args.descriptor, EXIT_PARAMS)
    p = desc.params
    rng = np.random.default_rng(args.seed)
    msg = rng.integers(0, p.q, (args.stripes, p.k * p.ell)).astype(desc.gf.dtype)
    mbytes = msg.size * p.m / 8 / 1e6

    t = time.perf_counter()
    word = encode_systematic(desc, msg)
    t_enc = time.perf_counter() - t

    erased = list(range(p.n - p.k))
    t = time.perf_counter()
    back = decode_erasures(desc, word, erased)
    t_dec = time.perf_counter() - t

    h = min(h for h in p.h_set if p.rho % (p.s + h - 1) == 0)
    F = list(range(h))
    H = list(range(h, h + p.d))
    t = time.perf_counter()
    fixed, ledger = cooperative_repair(desc, word, F, H)
    t_rep = time.perf_counter() - t
    ok = np.array_equal(back, word) and all(np.array_equal(fixed[i], word[:, i]) for i in F)

    def rate(sec):
        return round(mbytes / sec, 3) if sec > 0 else None

    _emit({"stripes": args.stripes, "seed": args.seed, "message_mb": round(mbytes, 6),
           "encode_mb_s": rate(t_enc), "decode_mb_s": rate(t_dec), "repair_mb_s": rate(t_rep),
           "repair_h": h, "repair_bandwidth_per_stripe": ledger.per_stripe()["total"],
           "cut_set_bound": cut_set_bound(p, h), "correct": bool(ok)})
    return 0 if ok else EXIT_VERIFY


# -- entry point --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cmsr", description="Cooperative MSR erasure coding toolkit.")
    ap.add_argument("--seed", type=int, default=0, help="seed for sampled checks and synthetic data")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="derive parameters and write a descriptor")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--d", type=int, required=True)
    c.add_argument("--h", type=_int_list, required=True, help="failure counts, e.g. 2 or 1,2")
    c.add_argument("--field-bits", type=int, default=None)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", help="check the MDS property and repair identities")
    v.add_argument("descriptor")
    v.add_argument("--mds", nargs="+", metavar="MODE", help="exhaustive | sample N")
    v.add_argument("--repair", nargs="+", metavar="MODE", help="exhaustive | sample N")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("encode", help="stripe a file into n shard files")
    e.add_argument("descriptor")
    e.add_argument("input")
    e.add_argument("outdir")
    e.set_defaults(func=cmd_encode)

    d = sub.add_parser("decode", help="rebuild a file from at least k shards")
    d.add_argument("descriptor")
    d.add_argument("shards", nargs="+")
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_decode)

    r = sub.add_parser("repair", help="regenerate failed shards cooperatively")
    r.add_argument("descriptor")
    r.add_argument("shards", nargs="+")
    r.add_argument("--failed", type=_int_list, required=True)
    r.add_argument("--helpers", type=_int_list, default=None)
    r.add_argument("--out-dir", default=None)
    r.set_defaults(func=cmd_repair)

    b = sub.add_parser("bench", help="encode/decode/repair throughput on synthetic stripes")
    b.add_argument("descriptor")
    b.add_argument("--stripes", type=int, default=1000)
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
