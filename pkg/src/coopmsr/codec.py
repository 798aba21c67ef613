"""Systematic encoding, syndromes and erasure decoding.

Codewords are arrays of shape ``(..., n, ell)``; any leading axes are a
batch of independent stripes.  Internally a word of an odd-length code
carries one extra (punctured) node, and every node splits into ``rho``
layers of length ``ell_tilde`` which are codewords of the intermediate code
on their own.
"""
from __future__ import annotations

import numpy as np

from . import linalg as la
from .construction import CodeDescriptor
from .errors import BadIndex, DimensionMismatch, SingularMatrix, SingularParityBlock, TooManyErasures


def layers(desc: CodeDescriptor, word) -> np.ndarray:
    """View ``(..., nodes, ell)`` as ``(..., nodes, rho, ell_tilde)``."""
    p = desc.params
    word = np.asarray(word)
    if word.shape[-1] != p.ell:
        raise DimensionMismatch(f"node length {word.shape[-1]} != ell={p.ell}")
    return word.reshape(word.shape[:-1] + (p.rho, p.ell_tilde))


def _rows(x, width):
    """Flatten leading axes so ``x`` becomes ``(count, width)``."""
    return x.reshape(-1, width)


def _apply(desc: CodeDescriptor, M, segments):
    """Apply ``M`` to every stacked segment: ``segments (..., nodes, rho, lt)`` -> ``(..., rho, M.rows)``.

    The node axis is folded into the vector so that ``M`` sees the vertical
    concatenation of the nodes' layer segments.
    """
    gf = desc.gf
    seg = np.moveaxis(segments, -3, -2)  # (..., rho, nodes, lt)
    lead = seg.shape[:-2]
    flat = _rows(np.ascontiguousarray(seg), seg.shape[-2] * seg.shape[-1])
    out = gf.matmul(flat, np.ascontiguousarray(M.T))
    return out.reshape(lead + (M.shape[0],))


def _unstack(desc: CodeDescriptor, vec, count):
    """``(..., rho, count*lt)`` -> ``(..., count, rho*lt)``."""
    p = desc.params
    v = vec.reshape(vec.shape[:-1] + (count, p.ell_tilde))
    v = np.moveaxis(v, -2, -3)  # (..., count, rho, lt)
    return v.reshape(v.shape[:-2] + (p.ell,))


def _encode_matrix(desc: CodeDescriptor) -> np.ndarray:
    """``-P^{-1} [H_0 ... H_{k-1}]``, mapping message segments to parity segments."""
    cache = desc.__dict__.setdefault("_codec_cache", {})
    if "encode" not in cache:
        p = desc.params
        gf = desc.gf
        Hs = np.concatenate(desc.parity_blocks[:p.k], axis=1)
        cache["encode"] = gf.neg(la.mat_mul(gf, desc.parity_inverse, Hs))
    return cache["encode"]


def _internal(desc: CodeDescriptor, word) -> np.ndarray:
    """Append the punctured node (if any) to a public word."""
    p = desc.params
    word = np.asarray(word, dtype=desc.gf.dtype)
    if word.shape[-2] == p.n_int:
        return word
    if word.shape[-2] != p.n:
        raise DimensionMismatch(f"expected {p.n} nodes, got {word.shape[-2]}")
    if not p.punctured:
        return word
    full = encode_systematic(desc, word[..., :p.k, :], internal=True)
    return np.concatenate([word, full[..., p.n:, :]], axis=-2)


def syndrome(desc: CodeDescriptor, word):
    """Per-layer residual ``sum_i H_i c_i`` with shape ``(..., rho, r*ell_tilde)`` and a codeword flag.

    For an odd-length code the punctured node is first completed from the
    systematic nodes; the public word is a codeword iff the completed word is.
    """
    p = desc.params
    full = _internal(desc, word)
    if full.shape[-1] != p.ell:
        raise DimensionMismatch(f"node length {full.shape[-1]} != ell={p.ell}")
    H = np.concatenate(desc.parity_blocks, axis=1)
    res = _apply(desc, H, layers(desc, full))
    return res, not res.any()


def encode_systematic(desc: CodeDescriptor, message, internal: bool = False) -> np.ndarray:
    """Encode ``message`` (``(..., k*ell)`` or ``(..., k, ell)``) into ``(..., n, ell)``.

    Nodes ``0..k-1`` carry the message verbatim.  ``internal=True`` keeps the
    punctured node of an odd-length code.
    """
    p = desc.params
    gf = desc.gf
    msg = np.asarray(message)
    if msg.ndim >= 2 and msg.shape[-2:] == (p.k, p.ell):
        pass
    elif msg.shape[-1] == p.k * p.ell:
        msg = msg.reshape(msg.shape[:-1] + (p.k, p.ell))
    else:
        raise DimensionMismatch(f"message must hold k*ell = {p.k * p.ell} symbols per stripe")
    msg = msg.astype(gf.dtype)
    if msg.size and int(msg.max()) >= gf.q:
        raise ValueError("message symbols outside the field")
    try:
        G = _encode_matrix(desc)
    except SingularMatrix as exc:
        raise SingularParityBlock(str(exc)) from None
    parity = _unstack(desc, _apply(desc, G, layers(desc, msg)), p.r)
    word = np.concatenate([msg, parity], axis=-2)
    return word if internal else word[..., :p.n, :]


def _erasure_plan(desc: CodeDescriptor, erased):
    """Square system for a padded erasure set, cached per set."""
    p = desc.params
    gf = desc.gf
    cache = desc.__dict__.setdefault("_codec_cache", {})
    key = ("decode", erased)
    if key not in cache:
        known = [i for i in range(p.n_int) if i not in erased]
        A = np.concatenate([desc.parity_blocks[i] for i in erased], axis=1)
        B = np.concatenate([desc.parity_blocks[i] for i in known], axis=1)
        cache[key] = (known, gf.neg(la.mat_mul(gf, la.mat_inverse(gf, A), B)))
    return cache[key]


def decode_erasures(desc: CodeDescriptor, word, erased) -> np.ndarray:
    """Rebuild the nodes in ``erased`` from the surviving ones.

    ``word`` has shape ``(..., n, ell)``; the contents of erased positions are
    ignored.  Returns a new array with every node filled in.
    """
    p = desc.params
    word = np.asarray(word, dtype=desc.gf.dtype)
    if word.shape[-2:] != (p.n, p.ell):
        raise DimensionMismatch(f"expected nodes of shape ({p.n}, {p.ell}), got {word.shape[-2:]}")
    E = sorted({int(e) for e in erased})
    if any(not 0 <= e < p.n for e in E):
        raise BadIndex(f"erasure index outside [0, {p.n})")
    if len(E) > p.n - p.k:
        raise TooManyErasures(f"{len(E)} erasures exceed the tolerance n-k = {p.n - p.k}")
    out = word.copy()
    if not E and not p.punctured:
        return out
    internal = set(E) | ({p.n_int - 1} if p.punctured else set())
    # pad with the highest-indexed survivors to get a square system
    for i in range(p.n - 1, -1, -1):
        if len(internal) == p.r:
            break
        if i not in internal:
            internal.add(i)
    erased_int = tuple(sorted(internal))
    known, M = _erasure_plan(desc, erased_int)
    full = np.concatenate([word, np.zeros(word.shape[:-2] + (p.n_int - p.n, p.ell), word.dtype)], axis=-2)
    solved = _unstack(desc, _apply(desc, M, layers(desc, full[..., known, :])), len(erased_int))
    for slot, e in enumerate(erased_int):
        if e in E:
            out[..., e, :] = solved[..., slot, :]
    return out
