"""Exact finite probability over rationals.

Distributions keep their support in insertion order so that every derived
object iterates deterministically.  Masses are ``fractions.Fraction``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

from .errors import PreconditionViolated, ZeroConditioning, ZeroEvent

Rational = Fraction

__all__ = [
    "Rational",
    "FiniteDistribution",
    "JointDistribution",
    "NULL_DISTRIBUTION",
    "CheckResult",
    "statistical_distance",
    "condition",
    "product",
    "uniform",
    "point",
    "check_inverse_lemma",
    "check_inputs_likely",
    "check_blow_lemma",
    "check_close_to_margin",
    "check_still_prod",
]


def _as_fraction(v: Any) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        raise TypeError("floating point masses are not allowed")
    return Fraction(v)


class FiniteDistribution:
    """Immutable distribution with rational masses summing to exactly one."""

    __slots__ = ("_support", "_mass")

    def __init__(self, masses: Mapping[Hashable, Any] | Iterable[tuple[Hashable, Any]], *, normalize: bool = False):
        items = masses.items() if isinstance(masses, Mapping) else masses
        mass: dict[Hashable, Fraction] = {}
        for k, v in items:
            f = _as_fraction(v)
            if f < 0:
                raise ValueError(f"negative mass for outcome {k!r}")
            mass[k] = mass.get(k, Fraction(0)) + f
        total = sum(mass.values(), Fraction(0))
        if normalize:
            if total == 0:
                raise ZeroConditioning("cannot normalize a zero measure")
            mass = {k: v / total for k, v in mass.items()}
        elif total != 1:
            raise ValueError(f"masses sum to {total}, not 1")
        self._mass = mass
        self._support = tuple(mass)

    @property
    def support(self) -> tuple[Hashable, ...]:
        """All listed outcomes, including any with zero mass."""
        return self._support

    def items(self):
        return self._mass.items()

    def __getitem__(self, outcome: Hashable) -> Fraction:
        return self._mass.get(outcome, Fraction(0))

    def prob(self, event: Callable[[Hashable], bool]) -> Fraction:
        return sum((m for k, m in self._mass.items() if event(k)), Fraction(0))

    def map(self, fn: Callable[[Hashable], Hashable]) -> "FiniteDistribution":
        out: dict[Hashable, Fraction] = {}
        for k, m in self._mass.items():
            key = fn(k)
            out[key] = out.get(key, Fraction(0)) + m
        return FiniteDistribution(out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteDistribution):
            return NotImplemented
        keys = set(self._mass) | set(other._mass)
        return all(self[k] == other[k] for k in keys)

    def __hash__(self) -> int:
        return hash(frozenset((k, m) for k, m in self._mass.items() if m))

    def __repr__(self) -> str:
        body = ", ".join(f"{k!r}: {m}" for k, m in self._mass.items())
        return f"FiniteDistribution({{{body}}})"


class JointDistribution(FiniteDistribution):
    """Distribution over pairs ``(left, right)`` with exact marginals."""

    __slots__ = ()

    def __init__(self, masses, *, normalize: bool = False):
        super().__init__(masses, normalize=normalize)
        for k in self._support:
            if not (isinstance(k, tuple) and len(k) == 2):
                raise ValueError("joint outcomes must be pairs")

    def left(self) -> FiniteDistribution:
        return self.map(lambda k: k[0])

    def right(self) -> FiniteDistribution:
        return self.map(lambda k: k[1])

    def swap(self) -> "JointDistribution":
        return JointDistribution(((r, l), m) for (l, r), m in self.items())


class _NullDistribution:
    """Result of conditioning on a null event under the zero convention.

    Every probability evaluated against it is zero.
    """

    support: tuple = ()

    def __getitem__(self, outcome) -> Fraction:
        return Fraction(0)

    def prob(self, event) -> Fraction:
        return Fraction(0)

    def items(self):
        return iter(())

    def __repr__(self) -> str:
        return "NULL_DISTRIBUTION"


NULL_DISTRIBUTION = _NullDistribution()


def uniform(outcomes: Iterable[Hashable]) -> FiniteDistribution:
    outs = list(outcomes)
    return FiniteDistribution((o, Fraction(1, len(outs))) for o in outs)


def point(outcome: Hashable) -> FiniteDistribution:
    return FiniteDistribution({outcome: 1})


def statistical_distance(p, q) -> Fraction:
    """Half the L1 distance over the union of supports."""
    keys = dict.fromkeys(list(p.support) + list(q.support))
    return sum((abs(p[k] - q[k]) for k in keys), Fraction(0)) / 2


def condition(d: FiniteDistribution, event: Callable[[Hashable], bool], *, zero_convention: bool = False):
    kept = [(k, m) for k, m in d.items() if event(k)]
    total = sum((m for _, m in kept), Fraction(0))
    if total == 0:
        if zero_convention:
            return NULL_DISTRIBUTION
        raise ZeroConditioning("conditioning event has probability zero")
    cls = JointDistribution if isinstance(d, JointDistribution) else FiniteDistribution
    return cls((k, m / total) for k, m in kept)


def product(p: FiniteDistribution, q: FiniteDistribution) -> JointDistribution:
    return JointDistribution(((a, b), ma * mb) for a, ma in p.items() for b, mb in q.items())


@dataclass(frozen=True)
class CheckResult:
    """Outcome of an inequality check.  ``detail`` carries extra exact values."""

    name: str
    lhs: Fraction
    rhs: Fraction
    holds: bool
    detail: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# lemma checkers


def check_inverse_lemma(
    paths: FiniteDistribution,
    event: Callable[[Hashable], bool],
    theta: Fraction,
    *,
    path_of: Callable[[Hashable], Sequence] = lambda o: o,
) -> CheckResult:
    """First-crossing bound for a sequence of leaking messages.

    ``paths`` is a distribution over outcomes; ``path_of(outcome)`` gives the
    message sequence and ``event(outcome)`` tells whether X happened.  S is the
    set of outcomes whose path has a prefix (length >= 1) with P[X|prefix] < theta.
    """
    theta = _as_fraction(theta)
    p_x = paths.prob(event)
    if p_x == 0:
        raise ZeroEvent("P[X] = 0")
    prefix_mass: dict[tuple, Fraction] = {}
    prefix_x: dict[tuple, Fraction] = {}
    for o, m in paths.items():
        seq = tuple(path_of(o))
        hit = event(o)
        for t in range(1, len(seq) + 1):
            pre = seq[:t]
            prefix_mass[pre] = prefix_mass.get(pre, Fraction(0)) + m
            if hit:
                prefix_x[pre] = prefix_x.get(pre, Fraction(0)) + m

    def crosses(o) -> bool:
        seq = tuple(path_of(o))
        for t in range(1, len(seq) + 1):
            pre = seq[:t]
            if prefix_mass[pre] > 0 and prefix_x.get(pre, Fraction(0)) / prefix_mass[pre] < theta:
                return True
        return False

    s_and_x = sum((m for o, m in paths.items() if event(o) and crosses(o)), Fraction(0))
    lhs = s_and_x / p_x
    rhs = theta / p_x
    s_mass = sum((m for o, m in paths.items() if crosses(o)), Fraction(0))
    holds = lhs < rhs if s_mass > 0 else lhs == 0
    return CheckResult("inverse", lhs, rhs, holds, {"p_x": p_x, "p_s": s_mass})


def check_inputs_likely(
    paths: FiniteDistribution,
    inputs_of: Callable[[Hashable], Hashable],
    target: Hashable,
    theta: Fraction,
    *,
    path_of: Callable[[Hashable], Sequence] = lambda o: o,
) -> CheckResult:
    """Probability of ever making a target input pair unlikely, given that pair.

    The bound used is theta / P[target].
    """
    res = check_inverse_lemma(paths, lambda o: inputs_of(o) == target, theta, path_of=path_of)
    return CheckResult("inputs_likely", res.lhs, res.rhs, res.holds, res.detail)


def _event_fn(event) -> Callable[[Hashable], bool]:
    if callable(event):
        return event
    members = set(event)
    return lambda o: o in members


def check_blow_lemma(a: FiniteDistribution, b: FiniteDistribution, event, delta: Fraction) -> CheckResult:
    delta = _as_fraction(delta)
    ev = _event_fn(event)
    pa, pb = a.prob(ev), b.prob(ev)
    if not (delta > 0 and pa >= delta and pb > 0):
        raise PreconditionViolated(f"need P[a in E]={pa} >= delta={delta} > 0 and P[b in E]={pb} > 0")
    eps = statistical_distance(a, b)
    lhs = statistical_distance(condition(a, ev), condition(b, ev))
    rhs = eps / delta
    keys = dict.fromkeys(list(a.support) + list(b.support))
    diff_inside = all(ev(k) for k in keys if a[k] != b[k])
    return CheckResult(
        "blow", lhs, rhs, lhs <= rhs,
        {"sd": eps, "p_a_in_e": pa, "equality_condition": diff_inside and pa == delta},
    )


def check_close_to_margin(joint: JointDistribution, u: FiniteDistribution, v: FiniteDistribution) -> CheckResult:
    eps = statistical_distance(joint, product(u, v))
    lhs = statistical_distance(joint, product(joint.left(), joint.right()))
    return CheckResult("close_to_margin", lhs, 3 * eps, lhs <= 3 * eps, {"eps": eps})


def check_still_prod(
    joint: JointDistribution, leak: Callable[[Hashable], FiniteDistribution]
) -> CheckResult:
    """``leak(b)`` is the distribution of c given b; a' is drawn from (a | c)."""
    a_marg, b_marg = joint.left(), joint.right()
    leaks = {b: leak(b) for b in b_marg.support}
    # P[a, c]
    a_c: dict[tuple, Fraction] = {}
    c_mass: dict[Hashable, Fraction] = {}
    for (a, b), m in joint.items():
        for c, mc in leaks[b].items():
            w = m * mc
            a_c[(a, c)] = a_c.get((a, c), Fraction(0)) + w
            c_mass[c] = c_mass.get(c, Fraction(0)) + w
    out: dict[tuple, Fraction] = {}
    for b, mb in b_marg.items():
        for c, mc in leaks[b].items():
            if mb * mc == 0 or c_mass.get(c, 0) == 0:
                continue
            for (a, c2), mac in a_c.items():
                if c2 != c or mac == 0:
                    continue
                key = (b, a)
                out[key] = out.get(key, Fraction(0)) + mb * mc * mac / c_mass[c]
    b_aprime = JointDistribution(out)
    lhs = statistical_distance(b_aprime, product(b_marg, a_marg))
    rhs = statistical_distance(joint, product(a_marg, b_marg))
    return CheckResult("still_prod", lhs, rhs, lhs <= rhs)
