"""Checking the exact engine against plain simulation.

Run with ``python demos/04_monte_carlo.py``.  Uses SFE_LAB_THREADS worker
processes (default: up to 8).
"""

# %%
from fractions import Fraction

from sfe_lab import catalog
from sfe_lab.engine import EvePolicy, build_tree
from sfe_lab.sampling import compare_outputs, sample_runs

eve = EvePolicy(Fraction(1, 8))
n = 20_000

for name in ("max-plain", "masked-leaky", "collide"):
    spec = catalog.protocol(name)
    tree = build_tree(spec, eve)
    rows = compare_outputs(tree, sample_runs(spec, n, seed=0, eve=eve))
    print(name)
    for r in rows:
        print(f"  output {r['output']!s:4s} exact {str(r['exact']):6s} sampled {r['count'] / n:.4f}  z={r['z']:.2f}")
