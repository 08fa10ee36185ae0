"""A public eavesdropper that asks the oracle every heavy query.

Run with ``python demos/02_eve.py``.
"""

# %% [markdown]
# In the shared-nonce protocol Alice picks a random string r, asks the oracle
# H(r) and sends r.  Bob then asks H(r) as well.  Seen from the transcript, the
# two parties end up sharing the secret H(r): their views are far from
# independent.

# %%
from fractions import Fraction

from sfe_lab import catalog
from sfe_lab.dsl import format_protocol
from sfe_lab.engine import EvePolicy, build_tree
from sfe_lab.eve import audit_independence, audit_lightness, audit_likely_input_lemmas

eps = Fraction(1, 8)
spec = catalog.protocol("shared-nonce")
print(format_protocol(spec))

plain = build_tree(spec)
rep = audit_independence(plain, eps)
print(f"no Eve:   {rep.verdict}  bad mass={rep.violation_mass}  worst SD={rep.worst_value}  per round={rep.per_round}")

# %% [markdown]
# Eve reads r off the transcript, sees that r is queried with probability 1
# and asks H(r) herself.  Conditioned on what she now knows, the views split
# into independent parts.

# %%
with_eve = build_tree(spec, EvePolicy(eps))
for audit in (audit_independence, audit_lightness):
    r = audit(with_eve, eps)
    print(f"with Eve: {r.name:12s} {r.verdict}  bad mass={r.violation_mass}")

# %% [markdown]
# The likely-input checks look at a fixed input triple and ask whether Alice's
# next queries can collide with either of two candidate Bob views outside what
# Eve already knows.

# %%
for label, tree in (("no Eve", plain), ("with Eve", with_eve)):
    r = audit_likely_input_lemmas(tree, 0, 0, 1, eps)
    print(f"{label:9s} {r.verdict}  {r.per_round}")
