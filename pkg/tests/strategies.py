"""Hypothesis strategies for small rational distributions."""

from fractions import Fraction

from hypothesis import strategies as st

from sfe_lab.prob import FiniteDistribution, JointDistribution


def weights(n: int):
    return st.lists(st.integers(0, 6), min_size=n, max_size=n).filter(lambda w: sum(w) > 0)


@st.composite
def distributions(draw, outcomes=("a", "b", "c", "d")):
    k = draw(st.integers(1, len(outcomes)))
    w = draw(weights(k))
    return FiniteDistribution({o: Fraction(v) for o, v in zip(outcomes[:k], w)}, normalize=True)


@st.composite
def joints(draw, left=("a0", "a1", "a2"), right=("b0", "b1", "b2")):
    na = draw(st.integers(1, len(left)))
    nb = draw(st.integers(1, len(right)))
    w = draw(weights(na * nb))
    cells = {(left[i], right[j]): Fraction(w[i * nb + j]) for i in range(na) for j in range(nb)}
    return JointDistribution(cells, normalize=True)
