from fractions import Fraction

import pytest

from sfe_lab import catalog
from sfe_lab.engine import EvePolicy, build_tree, measure_semihonest_error, run_once
from sfe_lab.errors import BudgetExceeded
from sfe_lab.functions import max_table
from sfe_lab.synth import leaky_protocol, synthesize_for

EPS = Fraction(1, 8)


def test_max_plain_tree_shape():
    tree = build_tree(catalog.protocol("max-plain"))
    assert len(tree.nodes) == 31 and tree.depth == 10
    assert sum(l.mass for l in tree.leaves()) == 1
    assert tree.node(()).parent is None
    assert tree.node(("*",)).kind == "B" and tree.node(("*", "*")).kind == "A"


def test_run_once_is_seeded_and_correct():
    spec = catalog.protocol("max-plain")
    f = max_table()
    for x in range(3):
        for y in range(3):
            assert run_once(spec, x, y).output == f.token(x, y)
    a = run_once(catalog.protocol("shared-nonce"), 0, 1, EvePolicy(EPS), seed=7)
    b = run_once(catalog.protocol("shared-nonce"), 0, 1, EvePolicy(EPS), seed=7)
    assert a == b


@pytest.mark.parametrize(
    "name,error,correctness",
    [("max-plain", 0, 0), ("leaky", 1, 0), ("bob-first", 1, 0), ("coin", 0, 1), ("shared-nonce", 0, 0), ("collide", Fraction(5, 8), 0)],
)
def test_security_reports(name, error, correctness):
    spec = catalog.protocol(name)
    f = catalog.function(catalog.PROTOCOLS[name])
    rep = measure_semihonest_error(build_tree(spec, EvePolicy(EPS)), f)
    assert rep.error == error and rep.correctness_error == correctness


def test_leaves_have_probability_one_per_input():
    tree = build_tree(catalog.protocol("collide"), EvePolicy(EPS))
    for x, y in tree.inputs():
        assert sum(tree.reach(l, x, y) for l in tree.leaves()) == 1


def test_synthesized_max_is_perfect():
    f = max_table()
    rep = measure_semihonest_error(synthesize_for(f), f)
    assert rep.error == 0 and rep.correctness_error == 0


def test_leaky_protocol_leaks():
    f = catalog.function("spiral")
    assert measure_semihonest_error(leaky_protocol(f), f).error == 1


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        build_tree(catalog.protocol("masked-leaky"), EvePolicy(EPS), budget=3)


def test_eve_cap_enforced_when_set_low():
    with pytest.raises(BudgetExceeded):
        build_tree(catalog.protocol("shared-nonce"), EvePolicy(EPS, cap=0, strict=True))
