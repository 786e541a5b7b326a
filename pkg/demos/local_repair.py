# %% [markdown]
# Repairing one lost symbol reads only a handful of others.

# %%
import numpy as np

from rfcode.code import CodeConfig
from rfcode.codec import SourceBlock
from rfcode.galois import gf
from rfcode.repair import availability, encode_for_repair, repair

cfg = CodeConfig(k=128, c=6, field=gf(8), master_seed=7)
rng = np.random.default_rng(0)
block = SourceBlock.from_bytes(cfg, rng.bytes(128 * 256), 256)
store = encode_for_repair(cfg, block, range(256))  # rate 1/2

# %%
lost = 17
res = repair(cfg, lost, store)
print(f"symbol {lost} rebuilt from parity {res.group.parity_id}")
print(f"reads: {len(res.reads)} (a full decode would read {cfg.k}); bound d+1 = {cfg.degree + 1}")
assert res.payload == block.symbol(lost)

# %%
# Lost parities are simply re-encoded from their support.
res = repair(cfg, 200, store)
print("parity 200 rebuilt from", len(res.reads), "systematic symbols")

# %%
# Availability: how many covering parities have pairwise disjoint footprints,
# i.e. how many independent repair paths the symbol has.
a = availability(cfg, lost, range(cfg.k, 256))
print(f"covered by {a.coverage} parities, {a.count} isolated ({a.method})")
for g in a.groups:
    print(f"  parity {g.parity_id}: footprint of {len(g.footprint)} symbols")
