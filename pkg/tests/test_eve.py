from fractions import Fraction

import pytest

from sfe_lab import catalog
from sfe_lab.engine import EvePolicy, build_tree
from sfe_lab.eve import (
    audit_independence, audit_lightness, audit_likely_input_lemmas, default_eps_prime, eve_terminal_nodes,
    eve_turn, independence_gap, lightness_violations,
)

EPS = Fraction(1, 8)


@pytest.fixture(scope="module")
def nonce_plain():
    return build_tree(catalog.protocol("shared-nonce"))


@pytest.fixture(scope="module")
def nonce_eve():
    return build_tree(catalog.protocol("shared-nonce"), EvePolicy(EPS))


def test_shared_nonce_without_eve_fails(nonce_plain):
    rep = audit_independence(nonce_plain, EPS)
    assert rep.verdict == "FAIL"
    assert rep.violation_mass == 1
    assert rep.per_round == {1: 1, 2: 1}
    assert rep.worst_value == Fraction(3, 4)
    assert not rep.lightness_holds


def test_shared_nonce_with_eve_passes(nonce_eve):
    rep = audit_independence(nonce_eve, EPS)
    assert rep.passed and rep.violation_mass == 0 and rep.lightness_holds
    for n in eve_terminal_nodes(nonce_eve):
        assert lightness_violations(nonce_eve, n, EPS) == []
        assert independence_gap(n) == 0


def test_eve_turn_forks_on_the_nonce(nonce_eve):
    node = nonce_eve.node(("*", "*", "00"))
    recs = eve_turn(nonce_eve, node, EPS)
    assert [r.pairs for r in recs] == [(("00", a),) for a in ("00", "01", "10", "11")]
    assert all(r.triggers == (1,) and r.final_max == 0 for r in recs)
    with pytest.raises(ValueError):
        eve_turn(nonce_eve, nonce_eve.node(()), EPS)


@pytest.mark.parametrize("name", sorted(catalog.PROTOCOLS))
@pytest.mark.parametrize("eps", [Fraction(1, 8), Fraction(1, 2)])
def test_corpus_audits_pass(name, eps):
    tree = build_tree(catalog.protocol(name), EvePolicy(eps))
    assert audit_lightness(tree, eps).passed
    assert audit_independence(tree, eps).passed
    assert not tree.cap_bound


def test_lightness_is_a_union_not_a_sum(nonce_plain):
    rep = audit_lightness(nonce_plain, EPS)
    assert rep.verdict == "FAIL" and rep.violation_mass == 1


def test_default_eps_prime():
    assert default_eps_prime(EPS) == Fraction(1, 2)
    assert default_eps_prime(Fraction(1)) == 1
    e = default_eps_prime(Fraction(1, 10))
    assert e ** 3 >= Fraction(1, 10) and (e - Fraction(1, 2 ** 30)) ** 3 < Fraction(1, 10)


def test_likely_input_lemmas(nonce_plain, nonce_eve):
    bad = audit_likely_input_lemmas(nonce_plain, 0, 0, 1, EPS)
    assert bad.verdict == "FAIL" and bad.per_round["nocol"][2] == 1
    good = audit_likely_input_lemmas(nonce_eve, 0, 0, 1, EPS)
    assert good.passed and good.detail["eps_prime"] == Fraction(1, 2)
