from fractions import Fraction

import pytest

from sfe_lab import catalog
from sfe_lab.attack import (
    EVE_VIEW, FRESH, REAL, SAMPLED_VIEW, attack, edited_oracle_answer, exploration_roots, node_tables,
    run_curious_bob, select_minor, switch_identity_sweep, verify_switch_identity,
)
from sfe_lab.engine import EvePolicy, build_tree
from sfe_lab.errors import ZeroConditioning
from sfe_lab.frontier import FY0, FrontierParams, all_frontiers

EPS = Fraction(1, 8)


def setup(name, eve=EvePolicy(EPS)):
    tree = build_tree(catalog.protocol(name), eve)
    return tree, catalog.function(catalog.PROTOCOLS[name]), FrontierParams.for_tree(tree)


def never(q):
    raise AssertionError(f"oracle should not be asked for {q}")


def test_edited_oracle_routing_order():
    assert edited_oracle_answer("a", {"a": "1"}, {"a": "2"}, {"a": "3"}, never, never) == ("1", SAMPLED_VIEW)
    assert edited_oracle_answer("a", {}, {"a": "2"}, {"a": "3"}, never, never) == ("2", EVE_VIEW)
    assert edited_oracle_answer("a", {}, {}, {"a": "3"}, never, lambda q: "F") == ("F", FRESH)
    assert edited_oracle_answer("b", {}, {}, {"a": "3"}, lambda q: "R", never) == ("R", REAL)


def test_leaky_advantage_comes_from_alices_message():
    tree, f, params = setup("leaky")
    rep = attack(tree, f, params)
    assert rep.advantage == 1
    assert rep.minor.as_tuple() == (0, 1, 2, 0)
    assert rep.part2.advantage == 1 and rep.part3 is None
    assert rep.part2.detail["bound_holds"]
    assert rep.identity.holds


def test_masked_leaky_advantage_comes_from_curious_bob():
    tree, f, params = setup("masked-leaky")
    seg = select_minor(tree, f, params)
    assert not seg.s_hat and len(seg.r_hat) == 16 and not seg.forced
    exact = run_curious_bob(tree, seg, params)
    assert exact.advantage == 1 and exact.p0 == {0: 1, 1: 0}
    sampled = run_curious_bob(tree, seg, params, mode="sampled", n=500, seed=3)
    assert sampled.p0 == exact.p0


def test_forced_attack_on_perfect_protocol_has_no_advantage():
    tree, f, params = setup("max-plain")
    rep = attack(tree, f, params, force=True)
    assert rep.advantage == 0
    assert any("fallback" in n for n in rep.notes)
    assert not rep.part2.detail["bound_applicable"]


@pytest.mark.parametrize("name", sorted(catalog.PROTOCOLS))
def test_switch_identity_with_eve(name):
    tree, _, params = setup(name)
    sweep = switch_identity_sweep(tree, params)
    assert sweep.holds and sweep.unsafe_nodes == 0


def test_switch_identity_needs_the_safe_event():
    # without Eve the collide protocol leaves unsafe mass, and the identity is off
    tree, _, params = setup("collide", eve=None)
    sweep = switch_identity_sweep(tree, params)
    assert sweep.unsafe_nodes > 0
    first = sweep.failures[0]
    assert (first["curious"], first["compare"]) == (Fraction(1, 8), Fraction(1, 4))


def test_verify_switch_identity_single_pair():
    tree, f, params = setup("masked-leaky")
    seg = select_minor(tree, f, params)
    w = exploration_roots(tree, all_frontiers(tree, params)[FY0])[0]
    u = next(n for n in tree.nodes.values() if n.apred is w and n is not w)
    res = verify_switch_identity(tree, seg.minor, w, u)
    assert res.holds and res.detail["max_diff"] == 0
    with pytest.raises(ValueError):
        verify_switch_identity(tree, seg.minor, u, w)


def test_zero_safe_mass_raises():
    # Alice's first message in the leaky protocol is her input, so x=1 never reaches "00"
    tree, f, params = setup("leaky")
    seg = select_minor(tree, f, params)
    w = tree.node(("*", "*", "00"))
    u = next(n for n in tree.nodes.values() if n.apred is w and n is not w)
    assert node_tables(tree, w, 1, seg.minor.y0, seg.minor.y1).curious_safe_mass == 0
    with pytest.raises(ZeroConditioning):
        verify_switch_identity(tree, seg.minor, w, u, x=1)


def test_report_is_json_ready():
    import json

    tree, f, params = setup("leaky")
    json.dumps(attack(tree, f, params).to_json())
