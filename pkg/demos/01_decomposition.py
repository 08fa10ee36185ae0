"""Which finite functions can two parties compute with perfect privacy?

Run with ``python demos/01_decomposition.py``.  Cells are marked ``# %%`` so
the file also opens as a notebook in editors that understand the marker.
"""

# %% [markdown]
# A function table is decomposable when one party can announce which block of
# a partition its input falls in, the table restricted to that block is again
# decomposable, and so on down to constant tables.  Such a run of announcements
# is itself a perfectly private protocol.

# %%
import json

from sfe_lab import catalog
from sfe_lab.engine import measure_semihonest_error
from sfe_lab.functions import classify, decompose, find_undecomposable_minor, tree_to_json
from sfe_lab.synth import synthesize_for

f = catalog.function("max")
print("max table:")
for x, row in zip(f.x_labels, f.out):
    print(f"  x={x}:", [a for a, _ in row])
print(json.dumps(tree_to_json(decompose(f)), indent=1))

# %% [markdown]
# The tree reads top down: Alice first says whether her input is 5, then Bob
# whether his is 4, and so on.  The synthesizer turns it into a protocol in
# the DSL, and the exact engine confirms zero error.

# %%
spec = synthesize_for(f, "max-synth")
rep = measure_semihonest_error(spec, f)
print(f"rounds={spec.rounds} game error={rep.error} correctness error={rep.correctness_error}")

# %% [markdown]
# OR, spiral and weave have no first cut.  The certificate names a small
# sub-table that is stuck on its own.

# %%
for name in ("or", "spiral", "weave"):
    g = catalog.function(name)
    xs, ys = find_undecomposable_minor(g)
    print(f"{name:7s} verdict={classify(g).verdict:18s} stuck minor x={list(xs)} y={list(ys)}")
