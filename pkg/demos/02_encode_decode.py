"""Encode a batch of stripes and rebuild them after losing n - k nodes.

Run: python3 demos/02_encode_decode.py
"""
import itertools

import numpy as np

from coopmsr import build_descriptor, decode_erasures, derive_params, encode_systematic

desc = build_descriptor(derive_params(8, 4, 6, [2]))
p = desc.params
rng = np.random.default_rng(0)

message = rng.integers(0, p.q, (16, p.k * p.ell))
words = encode_systematic(desc, message)
print(f"{words.shape[0]} stripes of shape {words.shape[1:]} over GF(2^{p.m})")

# the first k nodes carry the message verbatim
assert np.array_equal(words[:, :p.k].reshape(16, -1), message)

worst = 0
for erased in itertools.combinations(range(p.n), p.n - p.k):
    damaged = words.copy()
    damaged[:, list(erased)] = 0
    assert np.array_equal(decode_erasures(desc, damaged, erased), words)
    worst += 1
print(f"all {worst} patterns of {p.n - p.k} erasures decoded exactly")
