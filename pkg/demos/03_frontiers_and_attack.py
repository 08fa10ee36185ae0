"""Where does a protocol first reveal an input, and can Bob exploit it?

Run with ``python demos/03_frontiers_and_attack.py``.
"""

# %% [markdown]
# The X frontier is the set of first transcript nodes at which the chance of
# getting there depends noticeably on Alice's input (for some Bob input that
# is still plausible).  The Y frontier is the same for Bob.  For a function with
# no first cut, some input must be revealed with high probability, so the
# frontiers are rarely missed.

# %%
from fractions import Fraction

from sfe_lab import catalog
from sfe_lab.attack import attack, switch_identity_sweep
from sfe_lab.engine import EvePolicy, build_tree
from sfe_lab.frontier import FrontierParams, all_frontiers, check_frontier_fullness, check_frontier_ordering

eve = EvePolicy(Fraction(1, 8))
spiral = catalog.function("spiral")

for name in ("leaky", "bob-first", "masked-leaky"):
    tree = build_tree(catalog.protocol(name), eve)
    params = FrontierParams.for_tree(tree)
    fr = all_frontiers(tree, params)
    full = check_frontier_fullness(tree, spiral, params, frontiers=fr)
    order = check_frontier_ordering(tree, params, fr)
    sizes = {k: len(v) for k, v in fr.items()}
    print(f"{name:13s} frontier sizes={sizes} fullness holds={full.holds} cover holds={order.holds}")

# %% [markdown]
# The attack picks two Alice inputs that a chain of shared outputs links, then
# tries to tell them apart.  In the leaky protocol Alice's first message is her
# input, so a plain comparison of messages wins outright.  In the masked
# protocol the message is hidden behind the oracle, and Bob has to explore
# alternative continuations with an edited oracle instead.

# %%
for name in ("leaky", "masked-leaky"):
    tree = build_tree(catalog.protocol(name), eve)
    rep = attack(tree, spiral)
    parts = {"message": rep.part2 and rep.part2.advantage, "curious Bob": rep.part3 and rep.part3.advantage}
    print(f"{name:13s} minor={rep.minor.as_tuple()} advantage={rep.advantage} parts={parts}")

# %% [markdown]
# A perfectly private protocol gives the attack nothing to work with.

# %%
from sfe_lab.synth import synthesize_for  # noqa: E402

f = catalog.function("max")
tree = build_tree(synthesize_for(f), eve)
print("max, synthesized: advantage", attack(tree, f, force=True).advantage)

# %% [markdown]
# The curious experiment and the comparison experiment induce the same
# distribution on where Bob's exploration ends, but only on the event that no
# query is shared outside Eve's knowledge.  Without Eve, the collide protocol
# shows the two sides drift apart once that event is dropped.

# %%
for label, policy in (("with Eve", eve), ("no Eve", None)):
    tree = build_tree(catalog.protocol("collide"), policy)
    sweep = switch_identity_sweep(tree, FrontierParams.for_tree(tree))
    print(f"{label:9s} checked={sweep.checked} unsafe cases={sweep.unsafe_nodes} mismatches={len(sweep.failures)}")
    if sweep.failures:
        first = sweep.failures[0]
        print(f"          e.g. at {first['u']}: curious {first['curious']} vs compare {first['compare']}")
