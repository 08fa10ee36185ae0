from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sfe_lab import catalog
from sfe_lab.engine import EvePolicy, build_tree
from sfe_lab.errors import HypothesisViolated
from sfe_lab.frontier import (
    FLAVORS, FX, FX0, FY, FY0, FrontierParams, FrontierSet, all_frontiers, check_frontier_fullness,
    check_frontier_ordering, check_minvsnomin, compute_frontier, miss_mass, precedes,
)

EPS = Fraction(1, 8)
TREES = {}


def tree_for(name):
    if name not in TREES:
        TREES[name] = build_tree(catalog.protocol(name), EvePolicy(EPS))
    return TREES[name]


def covered_by(later: FrontierSet, earlier: FrontierSet) -> bool:
    """Every member of ``later`` has a member of ``earlier`` at or above it."""
    return all(earlier.hit_at_or_above(m) is not None for m in later.members)


@pytest.mark.parametrize("name", sorted(catalog.PROTOCOLS))
def test_frontiers_are_antichains_without_dummies(name):
    tree = tree_for(name)
    for fr in all_frontiers(tree, FrontierParams.for_tree(tree)).values():
        keys = fr.keys
        for m in fr.members:
            assert not m.dummy
            assert not any(m.key[:i] in keys for i in range(len(m.key)))
        assert fr.mass() <= 1


def test_antichain_is_enforced():
    tree = tree_for("leaky")
    a = tree.node(("*", "*"))
    child = next(iter(a.children.values()))
    with pytest.raises(ValueError):
        FrontierSet(FX, [a, child])


@settings(max_examples=30, deadline=None)
@given(st.fractions(0, 1), st.fractions(0, 1), st.sampled_from(["leaky", "collide", "bob-first"]))
def test_theta_monotone(t1, t2, name):
    lo, hi = sorted((t1, t2))
    tree = tree_for(name)
    base = FrontierParams.for_tree(tree)
    for flavor in (FX, FY):
        f_lo = compute_frontier(tree, FrontierParams(lo, base.delta, base.depth, base.nx, base.ny), flavor)
        f_hi = compute_frontier(tree, FrontierParams(hi, base.delta, base.depth, base.nx, base.ny), flavor)
        assert covered_by(f_hi, f_lo)
        assert miss_mass(tree, f_lo) <= miss_mass(tree, f_hi)


@pytest.mark.parametrize("name", sorted(catalog.PROTOCOLS))
def test_zero_theta_frontier_comes_first(name):
    tree = tree_for(name)
    fr = all_frontiers(tree, FrontierParams.for_tree(tree))
    assert covered_by(fr[FX], fr[FX0]) and covered_by(fr[FY], fr[FY0])
    zero = FrontierParams.for_tree(tree, theta=0)
    assert compute_frontier(tree, zero, FX).keys == fr[FX0].keys


def test_coin_protocol_has_empty_frontiers():
    tree = tree_for("coin")
    fr = all_frontiers(tree, FrontierParams.for_tree(tree))
    assert all(len(fr[fl]) == 0 for fl in FLAVORS)
    assert precedes(tree.leaves()[0], fr[FX])


def test_leaky_frontier_is_alices_first_message():
    tree = tree_for("leaky")
    fx = compute_frontier(tree, FrontierParams.for_tree(tree), FX)
    assert sorted(m.key for m in fx.members) == [("*", "*", b) for b in ("00", "01", "10")]
    assert fx.mass() == 1


def test_params_defaults():
    tree = tree_for("leaky")
    p = FrontierParams.for_tree(tree)
    assert p.depth == 6 and p.delta == Fraction(1, 6) and p.theta == Fraction(1, 288)
    assert p.mu == Fraction(7, 6) ** 6
    lo, hi = p.delta_prime(bits=40)
    assert (1 + lo) ** 2 <= Fraction(7, 6) <= (1 + hi) ** 2
    with pytest.raises(ValueError):
        FrontierParams(0, 0, 1, 2, 2)


@pytest.mark.parametrize("name", ["leaky", "masked-leaky", "bob-first", "coin"])
def test_claims_hold_on_undecomposable_pairs(name):
    tree = tree_for(name)
    f = catalog.function(catalog.PROTOCOLS[name])
    params = FrontierParams.for_tree(tree)
    fr = all_frontiers(tree, params)
    full = check_frontier_fullness(tree, f, params, frontiers=fr, strict=True)
    assert full.hypothesis_ok and full.holds
    assert check_minvsnomin(tree, params, fr).holds
    assert check_frontier_ordering(tree, params, fr).holds


def test_decomposable_function_flags_hypothesis():
    tree = tree_for("max-plain")
    params = FrontierParams.for_tree(tree)
    rep = check_frontier_fullness(tree, catalog.function("max"), params)
    assert not rep.hypothesis_ok
    # max is perfectly computable, so nothing forces the frontier to be full
    assert not rep.holds and rep.lhs == Fraction(1, 3)
    with pytest.raises(HypothesisViolated):
        check_frontier_fullness(tree, catalog.function("max"), params, strict=True)


def test_leaky_segments():
    tree = tree_for("leaky")
    rep = check_frontier_ordering(tree, FrontierParams.for_tree(tree))
    assert rep.masses["breve_X"] == 1 and rep.masses["tilde_X"] == 1
