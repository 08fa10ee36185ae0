"""Exact transcript trees, lazy random oracles and honest executions.

A *world* is one joint assignment of inputs, both randomness tapes and the
oracle answers on every point queried so far along a path.  Each tree node
stores the worlds consistent with it; the mass of a world is its probability
under uniformly random inputs.  Worlds at a node are disjoint events, so all
conditionals are plain ratios of sums.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .dsl import NeedQuery, PartyView, ProtocolSpec, evaluate_round
from .errors import BudgetExceeded, ZeroConditioning
from .functions import FunctionTable
from .prob import FiniteDistribution, statistical_distance

DUMMY = "*"
DEFAULT_BUDGET = 24


# ---------------------------------------------------------------------------
# worlds and nodes


@dataclass(frozen=True)
class World:
    x: int
    y: int
    tape_a: str
    tape_b: str
    oracle: tuple[tuple[str, str], ...]  # sorted pairs
    qa: frozenset
    qb: frozenset
    mass: Fraction

    def answers(self) -> dict[str, str]:
        return dict(self.oracle)

    def with_answer(self, q: str, a: str, factor: Fraction) -> "World":
        o = tuple(sorted(self.oracle + ((q, a),)))
        return World(self.x, self.y, self.tape_a, self.tape_b, o, self.qa, self.qb, self.mass * factor)

    def alice_key(self) -> tuple:
        ans = dict(self.oracle)
        return (self.x, self.tape_a, tuple(sorted((q, ans[q]) for q in self.qa)))

    def bob_key(self) -> tuple:
        ans = dict(self.oracle)
        return (self.y, self.tape_b, tuple(sorted((q, ans[q]) for q in self.qb)))

    def view_key(self, owner: str) -> tuple:
        return self.alice_key() if owner == "A" else self.bob_key()


@dataclass(frozen=True)
class EveTurnRecord:
    """One completed Eve turn: the pairs she announced and why."""

    node: tuple
    pairs: tuple[tuple[str, str], ...]
    triggers: tuple[Fraction, ...]
    final_max: Fraction
    cap_bound: bool = False


@dataclass(eq=False)
class Node:
    key: tuple
    kind: str            # "A", "B", "E" (Eve to move) or "L" (leaf)
    parent: "Node | None"
    round: int           # A/B: round about to be spoken; E: round just spoken; L: last round
    party_msgs: tuple
    eve_pairs: tuple
    worlds: list
    dummy: bool = False
    achild: bool = False
    bchild: bool = False
    children: dict = field(default_factory=dict)
    reach: dict = field(default_factory=dict)
    apred: "Node | None" = None
    bpred: "Node | None" = None
    eve_record: EveTurnRecord | None = None
    mass: Fraction = Fraction(0)

    @property
    def depth(self) -> int:
        return len(self.key)

    @property
    def id(self) -> str:
        return "/".join(self.key)

    def ancestors(self) -> list["Node"]:
        """Strict ancestors, root first."""
        out = []
        cur = self.parent
        while cur is not None:
            out.append(cur)
            cur = cur.parent
        return out[::-1]

    def path(self) -> list["Node"]:
        return self.ancestors() + [self]

    def is_ancestor_of(self, other: "Node") -> bool:
        """Non-strict: a node is its own ancestor."""
        return other.key[: len(self.key)] == self.key

    def __repr__(self) -> str:
        return f"Node({self.id!r}, {self.kind})"


def eve_message(pairs: Sequence[tuple[str, str]]) -> str:
    return ";".join(f"{q}={a}" for q, a in pairs)


@dataclass(frozen=True)
class EvePolicy:
    epsilon: Fraction
    cap: int | None = None
    strict: bool = False

    def __post_init__(self):
        eps = Fraction(self.epsilon)
        object.__setattr__(self, "epsilon", eps)
        if not (0 < eps <= 1):
            raise ValueError("epsilon must lie in (0, 1]")
        if self.cap is not None and self.cap < 0:
            raise ValueError("budget must be non-negative")

    def cap_for(self, spec: ProtocolSpec) -> int:
        if self.cap is not None:
            return self.cap
        return math.ceil(64 * spec.m / self.epsilon)


# ---------------------------------------------------------------------------
# Eve's heavy-query rule on a set of worlds


def hit_probabilities(worlds: Iterable[World], exclude: Iterable[str]) -> dict[str, Fraction]:
    """P[q in Q_A u Q_B | node] for every q not in ``exclude``, under uniform inputs."""
    worlds = list(worlds)
    total = sum((w.mass for w in worlds), Fraction(0))
    skip = set(exclude)
    hits: dict[str, Fraction] = {}
    for w in worlds:
        for q in w.qa | w.qb:
            if q not in skip:
                hits[q] = hits.get(q, Fraction(0)) + w.mass
    if total == 0:
        return {}
    return {q: m / total for q, m in hits.items()}


def _split_on(worlds: Iterable[World], q: str, answer_bits: int) -> dict[str, list[World]]:
    out: dict[str, list[World]] = {}
    factor = Fraction(1, 2 ** answer_bits)
    for w in worlds:
        ans = w.answers().get(q)
        if ans is not None:
            out.setdefault(ans, []).append(w)
        else:
            for v in range(2 ** answer_bits):
                a = format(v, f"0{answer_bits}b") if answer_bits else ""
                out.setdefault(a, []).append(w.with_answer(q, a, factor))
    return dict(sorted(out.items()))


def run_eve_turn(
    node_key: tuple,
    worlds: list[World],
    known: Iterable[str],
    epsilon: Fraction,
    answer_bits: int,
    cap_left: int,
    strict: bool = False,
    decisions: dict | None = None,
):
    """Run one Eve turn; yields (pairs, worlds, record) for each outcome.

    ``decisions`` (if given) collects the strategy table
    ``(node_key, pairs_so_far) -> query or None``.
    """
    known = set(known)
    results = []

    def rec(pairs: tuple, ws: list[World], triggers: tuple):
        asked = known | {q for q, _ in pairs}
        hits = hit_probabilities(ws, asked)
        best = max(hits.values(), default=Fraction(0))
        capped = False
        if best >= epsilon and len(pairs) >= cap_left:
            capped = True
            if strict:
                raise BudgetExceeded(f"Eve's query cap reached at node {'/'.join(node_key)}", "eve-cap")
        if best < epsilon or capped:
            if decisions is not None:
                decisions[(node_key, pairs)] = None
            rec_ = EveTurnRecord(node_key, pairs, triggers, best, capped)
            results.append((pairs, ws, rec_))
            return
        q = min(k for k, v in hits.items() if v == best)
        if decisions is not None:
            decisions[(node_key, pairs)] = q
        for a, part in _split_on(ws, q, answer_bits).items():
            rec(pairs + ((q, a),), part, triggers + (best,))

    rec((), worlds, ())
    return results


# ---------------------------------------------------------------------------
# party steps with lazy oracle branching


def _party_step(spec: ProtocolSpec, r: int, world: World, msgs: Sequence[str], budget: int):
    side = spec.speaker(r)
    factor = Fraction(1, 2 ** spec.answer_bits)
    base_bits = spec.alice_rand_bits + spec.bob_rand_bits
    out: list[tuple[str, World]] = []
    pending = deque([world])
    while pending:
        w = pending.popleft()
        ans = w.answers()

        def lookup(q: str) -> str:
            a = ans.get(q)
            if a is None:
                raise NeedQuery(q)
            return a

        inp, tape = (w.x, w.tape_a) if side == "A" else (w.y, w.tape_b)
        try:
            bits, queries = evaluate_round(spec, r, inp, tape, msgs, lookup)
        except NeedQuery as need:
            if base_bits + spec.answer_bits * (len(w.oracle) + 1) > budget:
                raise BudgetExceeded(
                    f"exact mode needs more than {budget} random bits on one path "
                    f"(tapes {base_bits} + answers); use sampling mode",
                    "oracle-branching",
                ) from None
            for v in range(2 ** spec.answer_bits):
                a = format(v, f"0{spec.answer_bits}b") if spec.answer_bits else ""
                pending.append(w.with_answer(need.query, a, factor))
            continue
        if side == "A":
            w = World(w.x, w.y, w.tape_a, w.tape_b, w.oracle, w.qa | frozenset(queries), w.qb, w.mass)
        else:
            w = World(w.x, w.y, w.tape_a, w.tape_b, w.oracle, w.qa, w.qb | frozenset(queries), w.mass)
        out.append((bits, w))
    return out


# ---------------------------------------------------------------------------
# the tree


class TranscriptTree:
    """Augmented transcript tree with exact per-input reach probabilities."""

    def __init__(self, spec: ProtocolSpec, eve: EvePolicy | None, budget: int = DEFAULT_BUDGET):
        self.spec = spec
        self.eve = eve
        self.budget = budget
        self.nx = spec.alice_inputs
        self.ny = spec.bob_inputs
        self.nodes: dict[tuple, Node] = {}
        self.decisions: dict = {}
        self.cap = eve.cap_for(spec) if eve is not None else 0
        self.cap_bound = False
        self._build()

    # construction -------------------------------------------------------
    def _add(self, node: Node) -> Node:
        self.nodes[node.key] = node
        if node.parent is not None:
            node.parent.children[node.key[-1]] = node
            p = node.parent
            node.achild = p.kind == "A"
            node.bchild = p.kind == "B"
            node.apred = p if node.achild else self._last(p, "achild")
            node.bpred = p if node.bchild else self._last(p, "bchild")
        node.mass = sum((w.mass for w in node.worlds), Fraction(0))
        scale = self.nx * self.ny
        reach: dict[tuple[int, int], Fraction] = {}
        for w in node.worlds:
            reach[(w.x, w.y)] = reach.get((w.x, w.y), Fraction(0)) + w.mass * scale
        node.reach = reach
        return node

    @staticmethod
    def _last(node: Node | None, attr: str) -> Node | None:
        while node is not None and not getattr(node, attr):
            node = node.parent
        return node

    def _build(self):
        spec = self.spec
        ra, rb = spec.alice_rand_bits, spec.bob_rand_bits
        if ra + rb > self.budget:
            raise BudgetExceeded(f"tapes need {ra + rb} bits, budget is {self.budget}", "tape-bits")
        m0 = Fraction(1, self.nx * self.ny * 2 ** (ra + rb))
        worlds = [
            World(x, y, format(ta, f"0{ra}b") if ra else "", format(tb, f"0{rb}b") if rb else "",
                  (), frozenset(), frozenset(), m0)
            for x in range(self.nx)
            for y in range(self.ny)
            for ta in range(2 ** ra)
            for tb in range(2 ** rb)
        ]
        root = self._add(Node((), "A", None, 0, (), (), worlds, dummy=True))
        dummy_b = self._add(Node((DUMMY,), "B", root, 0, (), (), worlds, dummy=True))
        first = self._add(Node((DUMMY, DUMMY), "A", dummy_b, 1, (), (), worlds))
        stack = [first]
        while stack:
            node = stack.pop()
            if node.kind in ("A", "B"):
                groups: dict[str, list[World]] = {}
                for w in node.worlds:
                    for bits, w2 in _party_step(spec, node.round, w, node.party_msgs, self.budget):
                        groups.setdefault(bits, []).append(w2)
                for bits in sorted(groups, reverse=True):
                    child = Node(node.key + (bits,), "E", node, node.round,
                                 node.party_msgs + (bits,), node.eve_pairs, groups[bits])
                    stack.append(self._add(child))
            elif node.kind == "E":
                for pairs, ws, rec in self._eve(node):
                    r = node.round
                    kind = "L" if r == spec.rounds else spec.speaker(r + 1)
                    child = Node(node.key + (eve_message(pairs),), kind, node,
                                 r if kind == "L" else r + 1, node.party_msgs,
                                 node.eve_pairs + pairs, ws)
                    child.eve_record = rec
                    self.cap_bound |= rec.cap_bound
                    self._add(child)
                    if kind != "L":
                        stack.append(child)
        # deterministic node order: sorted by message sequence
        self.nodes = dict(sorted(self.nodes.items()))
        self.root = root
        self.dummy_b = dummy_b
        self.first = first

    def _eve(self, node: Node):
        if self.eve is None:
            self.decisions[(node.key, ())] = None
            return [((), node.worlds, EveTurnRecord(node.key, (), (), Fraction(0)))]
        known = [q for q, _ in node.eve_pairs]
        base = self.spec.alice_rand_bits + self.spec.bob_rand_bits
        results = run_eve_turn(
            node.key, node.worlds, known, self.eve.epsilon, self.spec.answer_bits,
            self.cap - len(known), self.eve.strict, self.decisions,
        )
        for _, ws, _ in results:
            for w in ws:
                if base + self.spec.answer_bits * len(w.oracle) > self.budget:
                    raise BudgetExceeded("Eve's queries push the path past the exact budget", "oracle-branching")
        return results

    # queries ------------------------------------------------------------
    @property
    def depth(self) -> int:
        """Depth of the augmented tree (length of the longest root-leaf path)."""
        return max(n.depth for n in self.nodes.values())

    def leaves(self) -> list[Node]:
        return [n for n in self.nodes.values() if n.kind == "L"]

    def node(self, key) -> Node:
        if isinstance(key, str):
            key = tuple(key.split("/")) if key else ()
        return self.nodes[tuple(key)]

    def inputs(self) -> list[tuple[int, int]]:
        return [(x, y) for x in range(self.nx) for y in range(self.ny)]

    def reach(self, v: Node, x: int, y: int) -> Fraction:
        return v.reach.get((x, y), Fraction(0))

    def cond_reach(self, v: Node, w: Node | None, x: int, y: int) -> Fraction:
        """P[v | w; x, y] with the zero convention."""
        if w is None:
            return self.reach(v, x, y)
        pw = self.reach(w, x, y)
        return Fraction(0) if pw == 0 else self.reach(v, x, y) / pw

    def prob(self, v: Node) -> Fraction:
        """P[v] under uniform inputs."""
        return v.mass

    def posterior_y(self, v: Node, y: int) -> Fraction:
        if v.mass == 0:
            return Fraction(0)
        return sum((w.mass for w in v.worlds if w.y == y), Fraction(0)) / v.mass

    def posterior_x(self, v: Node, x: int) -> Fraction:
        if v.mass == 0:
            return Fraction(0)
        return sum((w.mass for w in v.worlds if w.x == x), Fraction(0)) / v.mass

    def posterior_y_given_x(self, v: Node, x: int, y: int) -> Fraction:
        tot = sum((self.reach(v, x, yy) for yy in range(self.ny)), Fraction(0))
        return Fraction(0) if tot == 0 else self.reach(v, x, y) / tot

    def posterior_x_given_y(self, v: Node, x: int, y: int) -> Fraction:
        tot = sum((self.reach(v, xx, y) for xx in range(self.nx)), Fraction(0))
        return Fraction(0) if tot == 0 else self.reach(v, x, y) / tot

    def eve_queries(self, v: Node) -> frozenset:
        return frozenset(q for q, _ in v.eve_pairs)

    def output_of(self, leaf: Node) -> str | None:
        return self.spec.decode_output(leaf.party_msgs)

    def to_json(self) -> dict:
        from .report import rat

        nodes = []
        for key, n in self.nodes.items():
            nodes.append({
                "id": n.id,
                "kind": n.kind,
                "dummy": n.dummy,
                "apred": n.apred.id if n.apred is not None else None,
                "bpred": n.bpred.id if n.bpred is not None else None,
                "reach": {f"{x},{y}": rat(p) for (x, y), p in sorted(n.reach.items())},
            })
        return {"depth": self.depth, "nodes": nodes}


def build_tree(spec: ProtocolSpec, eve: EvePolicy | None = None, budget: int = DEFAULT_BUDGET) -> TranscriptTree:
    return TranscriptTree(spec, eve, budget)


# ---------------------------------------------------------------------------
# sampled executions


class LazyOracle:
    """Random oracle answered on demand; every answer is memoized."""

    def __init__(self, answer_bits: int, rng: random.Random, preset: dict | None = None):
        self.answer_bits = answer_bits
        self.rng = rng
        self.answered: dict[str, str] = dict(preset or {})
        self.trace: list[tuple[str, str]] = []

    def __call__(self, q: str) -> str:
        a = self.answered.get(q)
        if a is None:
            v = self.rng.getrandbits(self.answer_bits) if self.answer_bits else 0
            a = format(v, f"0{self.answer_bits}b") if self.answer_bits else ""
            self.answered[q] = a
        self.trace.append((q, a))
        return a


class EveStrategy:
    """Eve's deterministic next-query table, read off an exact tree."""

    def __init__(self, decisions: dict, cap: int):
        self.decisions = decisions
        self.cap = cap

    @classmethod
    def from_tree(cls, tree: TranscriptTree) -> "EveStrategy":
        return cls(tree.decisions, tree.cap)

    def next_query(self, key: tuple, pairs: tuple) -> str | None:
        return self.decisions.get((key, pairs))


@dataclass(frozen=True)
class RunResult:
    transcript: tuple[str, ...]
    alice: PartyView
    bob: PartyView
    eve_pairs: tuple[tuple[str, str], ...]
    oracle_trace: tuple[tuple[str, str, str], ...]
    output: str | None


_STRATEGY_CACHE: dict = {}


def _strategy_for(spec: ProtocolSpec, eve) -> EveStrategy | None:
    if eve is None or isinstance(eve, EveStrategy):
        return eve
    key = (id(spec), eve)
    hit = _STRATEGY_CACHE.get(key)
    if hit is None or hit[0] is not spec:
        hit = (spec, EveStrategy.from_tree(build_tree(spec, eve)))
        _STRATEGY_CACHE[key] = hit
    return hit[1]


def run_once(spec: ProtocolSpec, x: int, y: int, eve=None, seed: int = 0, rng: random.Random | None = None) -> RunResult:
    """One seeded augmented execution.

    ``eve`` may be ``None`` (no Eve turns announced), an :class:`EvePolicy`
    (the strategy is read off the exact tree) or an :class:`EveStrategy`.
    """
    rng = rng or random.Random(seed)
    strategy = _strategy_for(spec, eve)
    ra, rb = spec.alice_rand_bits, spec.bob_rand_bits
    ta = format(rng.getrandbits(ra), f"0{ra}b") if ra else ""
    tb = format(rng.getrandbits(rb), f"0{rb}b") if rb else ""
    oracle = LazyOracle(spec.answer_bits, rng)
    trace: list[tuple[str, str, str]] = []
    pairs = {"A": {}, "B": {}}
    key: tuple = (DUMMY, DUMMY)
    msgs: list[str] = []
    eve_all: list[tuple[str, str]] = []
    for r in range(1, spec.rounds + 1):
        side = spec.speaker(r)

        def lookup(q: str, side=side) -> str:
            a = oracle(q)
            trace.append((side, q, a))
            pairs[side][q] = a
            return a

        bits, _ = evaluate_round(spec, r, x if side == "A" else y, ta if side == "A" else tb, msgs, lookup)
        msgs.append(bits)
        key = key + (bits,)
        turn: list[tuple[str, str]] = []
        if strategy is not None:
            while True:
                q = strategy.next_query(key, tuple(turn))
                if q is None:
                    break
                if len(eve_all) + len(turn) >= strategy.cap:
                    raise BudgetExceeded("Eve exceeded her query cap", "eve-cap")
                a = oracle(q)
                trace.append(("E", q, a))
                turn.append((q, a))
        eve_all.extend(turn)
        key = key + (eve_message(turn),)
    alice = PartyView("A", x, ta, tuple(msgs), tuple(sorted(pairs["A"].items())))
    bob = PartyView("B", y, tb, tuple(msgs), tuple(sorted(pairs["B"].items())))
    return RunResult(key, alice, bob, tuple(eve_all), tuple(trace), spec.decode_output(msgs))


# ---------------------------------------------------------------------------
# semi-honest security


@dataclass(frozen=True)
class SecurityReport:
    error: Fraction                 # game-based error on party views
    alice_error: Fraction
    bob_error: Fraction
    correctness_error: Fraction | None
    augmented_error: Fraction       # same game, views include Eve's public announcements
    worst_alice_pair: tuple | None = None
    worst_bob_pair: tuple | None = None

    @property
    def nu0(self) -> Fraction:
        """Conservative error used by the frontier claims."""
        vals = [self.error, self.augmented_error]
        if self.correctness_error is not None:
            vals.append(self.correctness_error)
        return max(vals)


def _view_dists(tree: TranscriptTree, owner: str, augmented: bool) -> dict[tuple[int, int], FiniteDistribution]:
    scale = tree.nx * tree.ny
    acc: dict[tuple[int, int], dict] = {}
    for leaf in tree.leaves():
        pub = leaf.key if augmented else leaf.party_msgs
        for w in leaf.worlds:
            k = (w.view_key(owner), pub)
            d = acc.setdefault((w.x, w.y), {})
            d[k] = d.get(k, Fraction(0)) + w.mass * scale
    return {xy: FiniteDistribution(d) for xy, d in acc.items()}


def measure_semihonest_error(spec_or_tree, f: FunctionTable, eve: EvePolicy | None = None) -> SecurityReport:
    tree = spec_or_tree if isinstance(spec_or_tree, TranscriptTree) else build_tree(spec_or_tree, eve)
    if (tree.nx, tree.ny) != (f.nx, f.ny):
        raise ValueError("protocol input domains do not match the function table")

    def worst(owner: str, augmented: bool):
        dists = _view_dists(tree, owner, augmented)
        best, arg = Fraction(0), None
        if owner == "A":
            for x in range(f.nx):
                for y in range(f.ny):
                    for y2 in range(y + 1, f.ny):
                        if f.alice_out(x, y) == f.alice_out(x, y2):
                            d = statistical_distance(dists[(x, y)], dists[(x, y2)])
                            if d > best:
                                best, arg = d, ((x, y), (x, y2))
        else:
            for y in range(f.ny):
                for x in range(f.nx):
                    for x2 in range(x + 1, f.nx):
                        if f.bob_out(x, y) == f.bob_out(x2, y):
                            d = statistical_distance(dists[(x, y)], dists[(x2, y)])
                            if d > best:
                                best, arg = d, ((x, y), (x2, y))
        return best, arg

    ea, pa = worst("A", False)
    eb, pb = worst("B", False)
    aa, _ = worst("A", True)
    ab, _ = worst("B", True)
    corr = None
    if tree.spec.output_expr is not None:
        corr = Fraction(0)
        outs = {leaf.key: tree.output_of(leaf) for leaf in tree.leaves()}
        for x in range(f.nx):
            for y in range(f.ny):
                tok = f.token(x, y)
                bad = sum((tree.reach(l, x, y) for l in tree.leaves() if outs[l.key] != tok), Fraction(0))
                corr = max(corr, bad)
    return SecurityReport(max(ea, eb), ea, eb, corr, max(aa, ab), pa, pb)


# ---------------------------------------------------------------------------
# conditioned views


def view_distribution(tree: TranscriptTree, w: Node, owner: str, inp: int) -> FiniteDistribution:
    """Posterior of ``owner``'s view at ``w`` given that owner's input is ``inp``."""
    acc: dict = {}
    for wd in w.worlds:
        if (wd.x if owner == "A" else wd.y) != inp:
            continue
        k = wd.view_key(owner)
        acc[k] = acc.get(k, Fraction(0)) + wd.mass
    if not acc or sum(acc.values()) == 0:
        raise ZeroConditioning(f"input {inp} has zero posterior mass at node {w.id!r}")
    return FiniteDistribution(acc, normalize=True)


def exact_choice(dist: FiniteDistribution, rng: random.Random):
    """Draw from a rational distribution without floating point."""
    items = [(k, m) for k, m in dist.items() if m > 0]
    den = math.lcm(*(m.denominator for _, m in items))
    r = rng.randrange(den)
    acc = 0
    for k, m in items:
        acc += m.numerator * (den // m.denominator)
        if r < acc:
            return k
    return items[-1][0]


def sample_conditioned_view(tree: TranscriptTree, w: Node, owner: str, inp: int, rng: random.Random | None = None, seed: int = 0) -> PartyView:
    rng = rng or random.Random(seed)
    inp_, tape, pairs = exact_choice(view_distribution(tree, w, owner, inp), rng)
    return PartyView(owner, inp_, tape, w.party_msgs, pairs)
