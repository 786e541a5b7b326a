# %% [markdown]
# Encode a block of text into a rateless stream, lose half of it, decode.

# %%
import numpy as np

from rfcode.code import CodeConfig
from rfcode.codec import SourceBlock, decode, encode
from rfcode.galois import gf

cfg = CodeConfig(k=50, c=6, field=gf(8), master_seed=2024)
print("parity degree d(k) =", cfg.degree)

text = b"Any k-ish symbols of the stream are enough to get this sentence back. " * 8
block = SourceBlock.from_bytes(cfg, text)
print(block.k, "source symbols of", block.symbol_size, "bytes")

# %%
# The stream has no fixed length: ids 0..k-1 are the source itself,
# every later id is a fresh parity.
stream = encode(cfg, block, range(200))

rng = np.random.default_rng(1)
survivors = [stream[i] for i in sorted(rng.choice(200, size=56, replace=False))]
n_sys = sum(s.index < cfg.k for s in survivors)
print(f"kept {len(survivors)} symbols, {n_sys} of them systematic")

# %%
rep = decode(cfg, survivors)
print(rep)
assert rep.ok and rep.block.to_bytes()[: len(text)] == text

# %%
# With exactly k parities the decoder sometimes comes up short; a few extra fix it.
for extra in (0, 2, 5):
    fails = 0
    for t in range(200):
        ids = rng.choice(np.arange(cfg.k, 1000), size=cfg.k + extra, replace=False)
        fails += not decode(cfg, encode(cfg, block, ids)).ok
    print(f"k + {extra} parities: {fails}/200 failures")
