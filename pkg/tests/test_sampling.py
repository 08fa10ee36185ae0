from fractions import Fraction

from sfe_lab import catalog
from sfe_lab.engine import EvePolicy, build_tree
from sfe_lab.sampling import compare_outputs, exact_output_distribution, sample_runs, within_sigmas

EVE = EvePolicy(Fraction(1, 8))


def test_counts_do_not_depend_on_worker_count():
    spec = catalog.protocol("collide")
    one = sample_runs(spec, 25_000, seed=4, eve=EVE, workers=1)
    two = sample_runs(spec, 25_000, seed=4, eve=EVE, workers=2)
    assert one == two and one.n == sum(one.outputs.values())


def test_exact_output_distribution_sums_to_one():
    tree = build_tree(catalog.protocol("max-plain"))
    dist = exact_output_distribution(tree)
    assert sum(dist.values()) == 1
    # max over {1,3,5} x {0,2,4}: output 5 occurs in 3 of 9 cells
    assert dist["5"] == Fraction(1, 3)


def test_within_sigmas_edges():
    assert within_sigmas(0, 100, Fraction(0)) == (True, 0.0)
    assert not within_sigmas(1, 100, Fraction(0))[0]
    assert within_sigmas(50, 100, Fraction(1, 2))[0]
    assert not within_sigmas(80, 100, Fraction(1, 2))[0]


def test_compare_outputs_rows():
    spec = catalog.protocol("leaky")
    tree = build_tree(spec)
    rows = compare_outputs(tree, sample_runs(spec, 5_000, seed=1, workers=1))
    assert all(r["ok"] for r in rows)
    assert sum(r["count"] for r in rows) == 5_000
