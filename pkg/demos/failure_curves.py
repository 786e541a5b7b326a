# %% [markdown]
# Decoding failure against erasure probability and against overhead.
# Small counts so it runs in about a minute; the CLI runs the full sizes:
#     rfcode simulate figures --k 100,300,500

# %%
from rfcode.code import CodeConfig
from rfcode.galois import gf
from rfcode.sim import ErasureExperiment, Mode, parse_grid, run_erasure_sweep

for k in (100, 300):
    exp = ErasureExperiment(CodeConfig(k, 6, gf(8)), rate=0.5, mode=Mode.ERASURE,
                            instances=20, trials_per_instance=20)
    res = run_erasure_sweep(exp, parse_grid("0.3:0.5:0.05"), seed=1)
    print(f"k={k}")
    for p in res.points:
        lo, hi = p.interval
        print(f"  P_e={p.grid_value:.2f}  failure {p.failure_rate:.4f}  [{lo:.4f}, {hi:.4f}]")

# %%
exp = ErasureExperiment(CodeConfig(100, 4, gf(8)), rate=0.5, mode=Mode.OVERHEAD,
                        instances=20, trials_per_instance=50)
print(run_erasure_sweep(exp, parse_grid("0:0.3:0.05"), seed=1).to_csv())
