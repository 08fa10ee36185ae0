"""Eve, the public heavy-query learner, and audits of her two guarantees."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .engine import EveTurnRecord, Node, TranscriptTree, run_eve_turn
from .exact import root_upper
from .prob import FiniteDistribution, JointDistribution, product, statistical_distance


def eve_turn(tree: TranscriptTree, node: Node, epsilon: Fraction, cap: int | None = None) -> list[EveTurnRecord]:
    """Replay Eve's rule at an Eve-to-move node with a given threshold.

    Returns one record per possible outcome of the turn (the answers she gets
    branch the turn).  ``cap`` defaults to unlimited for this stand-alone call.
    """
    if node.kind != "E":
        raise ValueError("Eve moves only at nodes right after a party message")
    known = [q for q, _ in node.eve_pairs]
    left = cap if cap is not None else 10 ** 9
    return [rec for _, _, rec in run_eve_turn(node.key, node.worlds, known, Fraction(epsilon), tree.spec.answer_bits, left)]


@dataclass(frozen=True)
class AuditReport:
    name: str
    verdict: str
    epsilon: Fraction
    violation_mass: Fraction
    per_round: dict
    worst_node: str | None = None
    worst_value: Fraction = Fraction(0)
    lightness_holds: bool = True
    cap_bound: bool = False
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"


def eve_terminal_nodes(tree: TranscriptTree) -> list[Node]:
    """Nodes right after an Eve turn (Eve's view V_E^(i) for the round i just completed)."""
    return [n for n in tree.nodes.values() if n.parent is not None and n.parent.kind == "E"]


def view_joint(node: Node) -> JointDistribution:
    acc: dict = {}
    for w in node.worlds:
        k = (w.alice_key(), w.bob_key())
        acc[k] = acc.get(k, Fraction(0)) + w.mass
    return JointDistribution(acc, normalize=True)


def independence_gap(node: Node) -> Fraction:
    """SD of the parties' joint view from the product of its marginals, given the node."""
    if node.mass == 0:
        return Fraction(0)
    j = view_joint(node)
    return statistical_distance(j, product(j.left(), j.right()))


def lightness_violations(tree: TranscriptTree, node: Node, epsilon: Fraction) -> list[tuple[str, str, Fraction]]:
    """Unqueried points whose posterior probability of lying in one party's view is >= epsilon."""
    if node.mass == 0:
        return []
    known = tree.eve_queries(node)
    out = []
    for side in ("A", "B"):
        acc: dict[str, Fraction] = {}
        for w in node.worlds:
            for q in (w.qa if side == "A" else w.qb):
                if q not in known:
                    acc[q] = acc.get(q, Fraction(0)) + w.mass
        for q, m in sorted(acc.items()):
            p = m / node.mass
            if p >= epsilon:
                out.append((side, q, p))
    return out


def audit_independence(tree: TranscriptTree, epsilon: Fraction) -> AuditReport:
    """Mass of Eve views where independence or lightness fails, by round and overall."""
    epsilon = Fraction(epsilon)
    bad: dict[tuple, bool] = {}
    per_round: dict[int, Fraction] = {}
    worst_node, worst = None, Fraction(-1)
    light_ok = True
    gaps = {}
    for n in eve_terminal_nodes(tree):
        gap = independence_gap(n)
        gaps[n.id] = gap
        light = lightness_violations(tree, n, epsilon)
        if light:
            light_ok = False
        r = n.parent.round
        failed = gap > epsilon or bool(light)
        bad[n.key] = failed
        if failed:
            per_round[r] = per_round.get(r, Fraction(0)) + n.mass
        per_round.setdefault(r, Fraction(0))
        if gap > worst:
            worst, worst_node = gap, n.id
    # union over rounds: a full Eve view is bad if any prefix view is bad
    total = Fraction(0)
    for leaf in tree.leaves():
        if any(bad.get(a.key, False) for a in leaf.path()):
            total += leaf.mass
    verdict = "PASS" if total <= epsilon else "FAIL"
    return AuditReport(
        "independence", verdict, epsilon, total, dict(sorted(per_round.items())),
        worst_node, max(worst, Fraction(0)), light_ok, tree.cap_bound,
        {"gap_mass": sum((n.mass for n in eve_terminal_nodes(tree) if gaps[n.id] > epsilon), Fraction(0))},
    )


def audit_lightness(tree: TranscriptTree, epsilon: Fraction) -> AuditReport:
    """Check at every quiescent Eve node that no unqueried point is epsilon-heavy."""
    epsilon = Fraction(epsilon)
    viol = Fraction(0)
    per_round: dict[int, Fraction] = {}
    worst_node, worst = None, Fraction(0)
    bad: set = set()
    for n in eve_terminal_nodes(tree):
        v = lightness_violations(tree, n, epsilon)
        r = n.parent.round
        per_round.setdefault(r, Fraction(0))
        if v:
            per_round[r] += n.mass
            bad.add(n.key)
            top = max(p for _, _, p in v)
            if top > worst:
                worst, worst_node = top, n.id
    for leaf in tree.leaves():
        if any(a.key in bad for a in leaf.path()):
            viol += leaf.mass
    return AuditReport(
        "lightness", "PASS" if viol == 0 else "FAIL", epsilon, viol, per_round,
        worst_node, worst, viol == 0, tree.cap_bound,
    )


def default_eps_prime(epsilon: Fraction) -> Fraction:
    """Cube root of epsilon (exact when it is a perfect cube, else a tight upper bound)."""
    return min(Fraction(1), root_upper(Fraction(epsilon), 3, bits=32))


def _even_views(tree: TranscriptTree, i: int) -> list[Node]:
    """Eve's view after round i, i.e. the nodes where round i+1 (or the end) comes next."""
    if i == 0:
        return [tree.first]
    return [n for n in eve_terminal_nodes(tree) if n.parent.round == i]


def audit_likely_input_lemmas(
    tree: TranscriptTree, x: int, y: int, y2: int, epsilon: Fraction, eps_prime: Fraction | None = None
) -> AuditReport:
    """Exact evaluation of the likely-input independence and no-collision events.

    For every even i, the likely-input check classifies each Eve view reached
    under (x, y) into: y unlikely, y2 unlikely, or Alice's next message nearly
    independent of the choice between y and y2.  The no-collision check draws a
    second Bob view for y2 given Eve's view and Alice's next message and asks
    whether Alice's queries meet either Bob view outside Eve's queries.
    """
    epsilon = Fraction(epsilon)
    ep = Fraction(eps_prime) if eps_prime is not None else default_eps_prime(epsilon)
    scale = tree.nx * tree.ny
    n_rounds = tree.spec.rounds
    il: dict[int, Fraction] = {}
    nocol: dict[int, Fraction] = {}
    for i in range(0, n_rounds + 1, 2):
        il_mass = Fraction(0)
        nc_mass = Fraction(0)
        for v in _even_views(tree, i):
            pv = tree.reach(v, x, y)
            if pv == 0:
                continue
            p_y = tree.posterior_y_given_x(v, x, y)
            p_y2 = tree.posterior_y_given_x(v, x, y2)
            kids = list(v.children.values()) if i < n_rounds else []
            if i < n_rounds:
                d1 = FiniteDistribution({c.key: tree.cond_reach(c, v, x, y) for c in kids})
                if tree.reach(v, x, y2) > 0:
                    d2 = FiniteDistribution({c.key: tree.cond_reach(c, v, x, y2) for c in kids})
                    sd = statistical_distance(d1, d2)
                else:
                    sd = Fraction(1)
                if not (p_y < ep or p_y2 < ep or sd <= ep):
                    il_mass += pv
            if p_y2 < ep:
                continue
            known = tree.eve_queries(v)
            for w in (kids or [v]):
                if tree.reach(w, x, y) == 0:
                    continue
                alt: dict[frozenset, Fraction] = {}
                tot = Fraction(0)
                for wd in w.worlds:
                    if wd.y == y2:
                        alt[wd.qb] = alt.get(wd.qb, Fraction(0)) + wd.mass
                        tot += wd.mass
                for wd in w.worlds:
                    if (wd.x, wd.y) != (x, y):
                        continue
                    p_world = wd.mass * scale
                    if tot == 0:
                        bad = not (wd.qa & wd.qb) <= known
                        nc_mass += p_world if bad else 0
                        continue
                    for qb2, m2 in alt.items():
                        if not (wd.qa & (wd.qb | qb2)) <= known:
                            nc_mass += p_world * m2 / tot
        if i < n_rounds:
            il[i] = il_mass
        nocol[i] = nc_mass
    worst = max(list(il.values()) + list(nocol.values()), default=Fraction(0))
    verdict = "PASS" if worst <= ep else "FAIL"
    return AuditReport(
        "likely-input", verdict, epsilon, worst,
        {"il_input": il, "nocol": nocol},
        None, worst, True, tree.cap_bound,
        {"eps_prime": ep, "inputs": (x, y, y2)},
    )
