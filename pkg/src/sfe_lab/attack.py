"""The curious-Bob oracle-editing attack and the Alice-message distinguisher.

Everything here runs on an exact transcript tree (built with Eve).  The exact
modes integrate over all randomness with rational arithmetic; the sampled mode
replays the same strategy with seeded randomness for cross-checking.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .dsl import ProtocolSpec, evaluate_round
from .engine import (
    DUMMY, LazyOracle, Node, TranscriptTree, World, _party_step, eve_message, exact_choice,
    measure_semihonest_error, view_distribution,
)
from .errors import BudgetExceeded, EmptySegment, HypothesisViolated, ZeroConditioning
from .exact import root_bracket
from .frontier import FX, FY0, FrontierParams, FrontierSet, all_frontiers, segment
from .functions import FunctionTable, confusability_chain, is_undecomposable_top_level
from .prob import CheckResult

SAMPLED_VIEW, EVE_VIEW, FRESH, REAL = "sampled-view", "eve-view", "fresh", "real"


# ---------------------------------------------------------------------------
# minor selection


@dataclass(frozen=True)
class MinorSelection:
    x0: int
    x1: int
    y0: int
    y1: int

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.x0, self.x1, self.y0, self.y1)


@dataclass
class Segments:
    """The selected part of the frontier, split by the kind of Alice predecessor."""

    minor: MinorSelection
    hat: list[Node]
    s_hat: list[Node]           # Alice predecessor is an Alice node (u is her message)
    r_hat: list[Node]           # Alice predecessor is an earlier Alice child
    tuple_mass: dict = field(default_factory=dict)
    skipped: list = field(default_factory=list)
    forced: bool = False

    @property
    def r_keys(self) -> set:
        return {u.key for u in self.r_hat}


def _chain_step(tree: TranscriptTree, f: FunctionTable, u: Node, wit, delta: Fraction):
    """Pick (x_i, x_{i+1}, y_i, y*) along the confusability chain for frontier node u."""
    y_star, x_hi, x_lo = wit
    chain = confusability_chain(f, x_hi, x_lo)
    if chain is None:
        return None
    w = u.apred
    t = len(chain) - 1
    p = [tree.cond_reach(u, w, xi, y_star) for xi, _ in chain]
    for i in range(t):
        # p_i > (1+delta)^(1/t) p_{i+1}  and  p_i > p_0 / (1+delta)
        if p[i] ** t > (1 + delta) * p[i + 1] ** t and p[i] * (1 + delta) > p[0]:
            return (chain[i][0], chain[i + 1][0], chain[i][1], y_star)
    return None


def select_minor(
    tree: TranscriptTree, f: FunctionTable, params: FrontierParams,
    frontiers: dict | None = None, force: bool = False,
) -> Segments:
    """Group the tilde segment of F_X by witness tuple and keep the heaviest tuple.

    Ties in mass resolve to the lexicographically smallest tuple.  Without a
    usable tuple, ``force`` falls back to the first equal-output pair and keeps
    the whole tilde segment so the distinguishers still measure something.
    """
    fr = frontiers or all_frontiers(tree, params)
    tilde = segment(fr[FX], "apred", fr[FY0])
    groups: dict[tuple, list[Node]] = {}
    skipped = []
    for u in tilde:
        tup = _chain_step(tree, f, u, fr[FX].witnesses[u.key], params.delta)
        if tup is None:
            if not force:
                raise HypothesisViolated(
                    f"no confusability chain for frontier node {u.id!r}; the function looks decomposable"
                )
            skipped.append(u.id)
            continue
        groups.setdefault(tup, []).append(u)
    masses = {k: sum((u.mass for u in v), Fraction(0)) for k, v in groups.items()}
    if groups:
        best = min(groups, key=lambda k: (-masses[k], k))
        minor = MinorSelection(*best)
        hat = groups[best]
        forced = False
    else:
        minor = _fallback_minor(f)
        if minor is None:
            raise HypothesisViolated("function has no pair of Alice inputs with a shared output")
        if not force and tilde:
            raise HypothesisViolated("no frontier node yields a witness tuple")
        hat = list(tilde)
        forced = True
    s_hat = [u for u in hat if u.achild]
    r_hat = [u for u in hat if not u.achild]
    return Segments(minor, hat, s_hat, r_hat, masses, skipped, forced)


def _fallback_minor(f: FunctionTable) -> MinorSelection | None:
    for y0 in range(f.ny):
        for x0 in range(f.nx):
            for x1 in range(x0 + 1, f.nx):
                if f.out[x0][y0] == f.out[x1][y0]:
                    y1 = next((y for y in range(f.ny) if y != y0), y0)
                    return MinorSelection(x0, x1, y0, y1)
    return None


# ---------------------------------------------------------------------------
# the edited oracle


def edited_oracle_answer(q: str, sampled_view: dict, eve_view: dict, actual_view: dict, real_oracle, fresh_oracle):
    """Route one exploration query.  Returns (answer, source)."""
    if q in sampled_view:
        return sampled_view[q], SAMPLED_VIEW
    if q in eve_view:
        return eve_view[q], EVE_VIEW
    if q in actual_view:
        return fresh_oracle(q), FRESH
    return real_oracle(q), REAL


def kind_of(spec: ProtocolSpec, key: tuple) -> str:
    """Node kind from its message sequence alone."""
    if len(key) == 0:
        return "A"
    if len(key) == 1:
        return "B"
    rest = len(key) - 2
    if rest % 2 == 1:
        return "E"
    done = rest // 2
    return "L" if done == spec.rounds else spec.speaker(done + 1)


class _Fork(Exception):
    def __init__(self, query: str, source: str):
        self.query = query
        self.source = source


@dataclass(frozen=True)
class ExploreOutcome:
    prob: Fraction
    visited: tuple
    real_answers: tuple      # (q, a) fixed on the real oracle by this exploration
    sources: tuple           # (q, source) in first-use order


def explore(
    tree: TranscriptTree,
    w_key: tuple,
    bob: tuple,
    eve_pairs: dict,
    actual_queries: frozenset,
    real_known: dict,
    edited: bool = True,
) -> list[ExploreOutcome]:
    """All outcomes of Bob's mental continuation from Alice child ``w_key``.

    ``bob`` is the (input, tape, pairs) of the view driving the continuation.
    With ``edited`` the oracle routing is the curious-Bob one; otherwise every
    query not fixed by the views goes to the real oracle (a faithful run).
    The continuation covers Eve's turn, Bob's message and Eve's next turn, and
    stops before Alice speaks again.
    """
    spec = tree.spec
    if w_key == (DUMMY,):
        return [ExploreOutcome(Fraction(1), ((DUMMY, DUMMY),), (), ())]
    y, tape, pairs = bob
    sampled = dict(pairs)
    ab = spec.answer_bits
    out: list[ExploreOutcome] = []
    # state: prob, key, phase, turn pairs, memo {q: (a, source)}, visited
    stack = [(Fraction(1), w_key, "E", (), {}, ())]
    while stack:
        prob, key, phase, turn, memo, visited = stack.pop()

        def lookup(q: str) -> str:
            if q in memo:
                return memo[q][0]
            if q in sampled:
                return sampled[q]
            if q in eve_pairs:
                return eve_pairs[q]
            if edited and q in actual_queries:
                raise _Fork(q, FRESH)
            if q in real_known:
                return real_known[q]
            raise _Fork(q, REAL)

        try:
            if phase == "E":
                q = tree.decisions.get((key, turn))
                if q is not None:
                    a = lookup(q)
                    stack.append((prob, key, "E", turn + ((q, a),), memo, visited))
                    continue
                nk = key + (eve_message(turn),)
                visited = visited + (nk,)
                if kind_of(spec, nk) in ("A", "L"):
                    real = tuple(sorted((q, a) for q, (a, s) in memo.items() if s == REAL))
                    srcs = tuple((q, s) for q, (_, s) in memo.items())
                    out.append(ExploreOutcome(prob, visited, real, srcs))
                    continue
                stack.append((prob, nk, "B", (), memo, visited))
            else:
                r = (len(key) - 2) // 2 + 1
                msgs = key[2::2]
                bits, _ = evaluate_round(spec, r, y, tape, msgs, lookup)
                nk = key + (bits,)
                stack.append((prob, nk, "E", (), memo, visited + (nk,)))
        except _Fork as fk:
            for v in range(2 ** ab):
                a = format(v, f"0{ab}b") if ab else ""
                m2 = dict(memo)
                m2[fk.query] = (a, fk.source)
                stack.append((prob / 2 ** ab, key, phase, turn, m2, visited))
    return out


# ---------------------------------------------------------------------------
# per-node experiment tables


def _eve_dict(w: Node) -> dict:
    return dict(w.eve_pairs)


def _bob_view_of(world: World) -> tuple:
    return world.bob_key()


@dataclass
class NodeTables:
    """Pr-curious and Pr-compare at one Alice child w for one Alice input x."""

    w: str
    x: int
    curious: dict           # u key -> P[u | w]
    compare: dict
    curious_safe: dict      # u key -> P[u, safe | w]
    compare_safe: dict
    curious_safe_mass: Fraction
    compare_safe_mass: Fraction
    compare_unsafe: Fraction


def node_tables(tree: TranscriptTree, w: Node, x: int, y0: int, y1: int) -> NodeTables:
    """Exact experiment tables at Alice child ``w`` for inputs x, y0 (real) and y1 (hypothetical)."""
    eve = _eve_dict(w)
    known = tree.eve_queries(w)
    cur: dict = {}
    cur_safe: dict = {}
    cur_tot = Fraction(0)
    cur_safe_tot = Fraction(0)
    worlds0 = [wd for wd in w.worlds if (wd.x, wd.y) == (x, y0)]
    if worlds0:
        b1_dist = view_distribution(tree, w, "B", y1)
        cache: dict = {}
        for wd in worlds0:
            cur_tot += wd.mass
            for b1, pb in b1_dist.items():
                q1 = frozenset(q for q, _ in b1[2])
                safe = (wd.qa & (wd.qb | q1)) <= known
                ck = (b1, wd.qb, wd.oracle)
                res = cache.get(ck)
                if res is None:
                    res = explore(tree, w.key, b1, eve, wd.qb, wd.answers(), edited=True)
                    cache[ck] = res
                wt = wd.mass * pb
                if safe:
                    cur_safe_tot += wt
                for oc in res:
                    for k in oc.visited:
                        cur[k] = cur.get(k, Fraction(0)) + wt * oc.prob
                        if safe:
                            cur_safe[k] = cur_safe.get(k, Fraction(0)) + wt * oc.prob
    cmp_: dict = {}
    cmp_safe: dict = {}
    cmp_tot = Fraction(0)
    cmp_safe_tot = Fraction(0)
    worlds1 = [wd for wd in w.worlds if (wd.x, wd.y) == (x, y1)]
    if worlds1:
        b0_dist = view_distribution(tree, w, "B", y0)
        for wd in worlds1:
            cmp_tot += wd.mass
            res = explore(tree, w.key, wd.bob_key(), eve, wd.qb, wd.answers(), edited=False)
            p_safe = Fraction(0)
            for b0, pb in b0_dist.items():
                q0 = frozenset(q for q, _ in b0[2])
                if (wd.qa & (wd.qb | q0)) <= known:
                    p_safe += pb
            cmp_safe_tot += wd.mass * p_safe
            for oc in res:
                for k in oc.visited:
                    cmp_[k] = cmp_.get(k, Fraction(0)) + wd.mass * oc.prob
                    cmp_safe[k] = cmp_safe.get(k, Fraction(0)) + wd.mass * p_safe * oc.prob

    def norm(d, z):
        return {k: (v / z if z else Fraction(0)) for k, v in sorted(d.items())}

    return NodeTables(
        w.id, x,
        norm(cur, cur_tot), norm(cmp_, cmp_tot),
        norm(cur_safe, cur_safe_tot), norm(cmp_safe, cmp_safe_tot),
        cur_safe_tot / cur_tot if cur_tot else Fraction(0),
        cmp_safe_tot / cmp_tot if cmp_tot else Fraction(0),
        1 - cmp_safe_tot / cmp_tot if cmp_tot else Fraction(0),
    )


def exploration_roots(tree: TranscriptTree, fy0: FrontierSet) -> list[Node]:
    """Alice children strictly above F0_Y, where curious Bob explores."""
    return [n for n in tree.nodes.values() if n.achild and fy0.hit_at_or_above(n) is None]


def verify_switch_identity(tree: TranscriptTree, minor: MinorSelection, w: Node, u: Node, x: int | None = None) -> CheckResult:
    """Pr-curious[u | w, safe] == Pr-compare[u | w, safe], as rationals.

    Checked for Alice input ``x`` (default: both inputs of the minor).
    """
    if u.apred is not w:
        raise ValueError("u must have w as its Alice predecessor")
    xs = [x] if x is not None else [minor.x0, minor.x1]
    lhs_all, rhs_all = [], []
    for xx in xs:
        t = node_tables(tree, w, xx, minor.y0, minor.y1)
        if t.curious_safe_mass == 0 or t.compare_safe_mass == 0:
            raise ZeroConditioning(f"safe event has zero mass at {w.id!r} for x={xx}")
        lhs_all.append(t.curious_safe.get(u.key, Fraction(0)))
        rhs_all.append(t.compare_safe.get(u.key, Fraction(0)))
    holds = lhs_all == rhs_all
    diff = max(abs(a - b) for a, b in zip(lhs_all, rhs_all))
    return CheckResult("switch-identity", lhs_all[0], rhs_all[0], holds,
                       {"w": w.id, "u": u.id, "xs": xs, "lhs": lhs_all, "rhs": rhs_all, "max_diff": diff})


@dataclass
class IdentitySweep:
    checked: int
    failures: list
    zero_safe: int
    unsafe_nodes: int       # (w, x) cases with positive unsafe mass (where exactness is not promised)

    @property
    def holds(self) -> bool:
        return not self.failures


def switch_identity_sweep(tree: TranscriptTree, params: FrontierParams, pairs=None, frontiers=None) -> IdentitySweep:
    """Check the identity for every explored w, every u below it and every (x, y0, y1)."""
    fr = frontiers or all_frontiers(tree, params)
    roots = exploration_roots(tree, fr[FY0])
    if pairs is None:
        pairs = [(y0, y1) for y0 in range(tree.ny) for y1 in range(tree.ny) if y0 != y1]
    checked, zero, unsafe = 0, 0, 0
    failures = []
    for w in roots:
        below = [n for n in tree.nodes.values() if n.apred is w and n is not w]
        for x in range(tree.nx):
            for y0, y1 in pairs:
                try:
                    t = node_tables(tree, w, x, y0, y1)
                except ZeroConditioning:
                    zero += 1
                    continue
                if t.curious_safe_mass == 0 or t.compare_safe_mass == 0:
                    zero += 1
                    continue
                if t.curious_safe_mass != 1 or t.compare_safe_mass != 1:
                    unsafe += 1
                for u in below:
                    checked += 1
                    a = t.curious_safe.get(u.key, Fraction(0))
                    b = t.compare_safe.get(u.key, Fraction(0))
                    if a != b:
                        failures.append({"w": w.id, "u": u.id, "x": x, "y0": y0, "y1": y1, "curious": a, "compare": b})
    return IdentitySweep(checked, failures, zero, unsafe)


# ---------------------------------------------------------------------------
# curious Bob, exact mode


@dataclass
class AdvantageReport:
    strategy: str
    advantage: Fraction
    p0: dict                              # x -> P[Bob outputs 0 | x, y0]
    minor: MinorSelection | None = None
    part2: Fraction | None = None
    part3: Fraction | None = None
    safe_violation: dict = field(default_factory=dict)
    tables: list = field(default_factory=list)
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        from .report import jsonable

        return jsonable({
            "strategy": self.strategy, "advantage": self.advantage, "p0": self.p0,
            "minor": self.minor.as_tuple() if self.minor else None,
            "part2": self.part2, "part3": self.part3,
            "safe_violation": self.safe_violation, "tables": self.tables, "detail": self.detail,
        })


def _eve_real_turn(tree: TranscriptTree, key: tuple, world: World):
    """Eve's turn on the real oracle; yields (new key, world) with world mass split on fresh answers."""
    ab = tree.spec.answer_bits
    out = []
    stack = [(world, ())]
    while stack:
        wd, turn = stack.pop()
        q = tree.decisions.get((key, turn))
        if q is None:
            out.append((key + (eve_message(turn),), wd))
            continue
        ans = wd.answers().get(q)
        if ans is not None:
            stack.append((wd, turn + ((q, ans),)))
            continue
        for v in range(2 ** ab):
            a = format(v, f"0{ab}b") if ab else ""
            stack.append((wd.with_answer(q, a, Fraction(1, 2 ** ab)), turn + ((q, a),)))
    return out


def _initial_worlds(spec: ProtocolSpec, x: int, y: int) -> list[World]:
    ra, rb = spec.alice_rand_bits, spec.bob_rand_bits
    m0 = Fraction(1, 2 ** (ra + rb))
    return [
        World(x, y, format(ta, f"0{ra}b") if ra else "", format(tb, f"0{rb}b") if rb else "",
              (), frozenset(), frozenset(), m0)
        for ta in range(2 ** ra) for tb in range(2 ** rb)
    ]


def _explore_at(tree: TranscriptTree, w: Node, wd: World, y1: int, r_keys: set):
    """Exploration from w for the real world ``wd``; yields (prob, hit, extra real answers)."""
    b1_dist = view_distribution(tree, w, "B", y1)
    eve = _eve_dict(w)
    real = wd.answers()
    for b1, pb in b1_dist.items():
        for oc in explore(tree, w.key, b1, eve, wd.qb, real, edited=True):
            hit = any(k in r_keys for k in oc.visited)
            yield pb * oc.prob, hit, oc.real_answers


def _curious_p0(tree: TranscriptTree, x: int, y0: int, y1: int, r_keys: set, fy0: FrontierSet) -> Fraction:
    spec = tree.spec
    hit_mass = Fraction(0)
    # states: (key, world) with world.mass = probability of this state
    stack = [((), wd) for wd in _initial_worlds(spec, x, y0)]
    budget = tree.budget
    base = spec.alice_rand_bits + spec.bob_rand_bits
    while stack:
        key, wd = stack.pop()
        kind = kind_of(spec, key)
        node = tree.nodes.get(key)
        if key == ():
            stack.append(((DUMMY,), wd))
            continue
        if key == (DUMMY,):
            stack.append(((DUMMY, DUMMY), wd))
            continue
        if kind == "L":
            continue
        if kind in ("A", "B"):
            r = (len(key) - 2) // 2 + 1
            for bits, w2 in _party_step(spec, r, wd, key[2::2], budget):
                stack.append((key + (bits,), w2))
            continue
        # Eve-to-move node.  Alice children above F0_Y get an exploration first.
        states = [(wd, False)]
        if node is not None and node.achild and fy0.hit_at_or_above(node) is None:
            states = []
            for p, hit, extra in _explore_at(tree, node, wd, y1, r_keys):
                if hit:
                    hit_mass += wd.mass * p
                    continue
                w2 = World(wd.x, wd.y, wd.tape_a, wd.tape_b, tuple(sorted(wd.oracle + extra)),
                           wd.qa, wd.qb, wd.mass * p)
                if base + spec.answer_bits * len(w2.oracle) > budget:
                    raise BudgetExceeded("exploration pushes the path past the exact budget", "oracle-branching")
                states.append((w2, False))
        for s, _ in states:
            for nk, w3 in _eve_real_turn(tree, key, s):
                stack.append((nk, w3))
    return hit_mass


def run_curious_bob(
    tree: TranscriptTree, seg: Segments, params: FrontierParams, mode: str = "exact",
    n: int = 100_000, seed: int = 0, frontiers: dict | None = None, tables: bool = True,
) -> AdvantageReport:
    """Curious Bob holding y0 explores with y1 and outputs 0 when an exploration meets R-hat."""
    if not seg.s_hat and not seg.r_hat:
        raise EmptySegment("both segments are empty")
    fr = frontiers or all_frontiers(tree, params)
    m = seg.minor
    r_keys = seg.r_keys
    if mode == "exact":
        p0 = {x: _curious_p0(tree, x, m.y0, m.y1, r_keys, fr[FY0]) for x in (m.x0, m.x1)}
        detail = {"mode": "exact"}
    elif mode == "sampled":
        p0, detail = _curious_sampled(tree, m, r_keys, fr[FY0], n, seed)
    else:
        raise ValueError("mode must be 'exact' or 'sampled'")
    adv = abs(p0[m.x0] - p0[m.x1])
    viol: dict = {}
    tabs = []
    if tables:
        for x in (m.x0, m.x1):
            # sum_w P[w | x, y1] * Pr-compare[unsafe | w]
            tot = Fraction(0)
            for w in exploration_roots(tree, fr[FY0]):
                try:
                    t = node_tables(tree, w, x, m.y0, m.y1)
                except ZeroConditioning:
                    continue
                tot += tree.reach(w, x, m.y1) * t.compare_unsafe
                for u in r_keys:
                    if u[: len(w.key)] == w.key and tree.nodes[u].apred is w:
                        tabs.append({"w": w.id, "u": "/".join(u), "x": x,
                                     "curious": t.curious.get(u, Fraction(0)),
                                     "compare": t.compare.get(u, Fraction(0))})
            viol[x] = tot
    return AdvantageReport("curious-bob", adv, p0, m, None, adv, viol, tabs, detail)


def _curious_sampled(tree: TranscriptTree, m: MinorSelection, r_keys: set, fy0: FrontierSet, n: int, seed: int):
    spec = tree.spec
    p0 = {}
    for x in (m.x0, m.x1):
        rng = random.Random(f"curious-bob/{seed}/{x}")
        hits = 0
        for _ in range(n):
            hits += _curious_once(tree, spec, x, m, r_keys, fy0, rng)
        p0[x] = Fraction(hits, n)
    return p0, {"mode": "sampled", "n": n, "seed": seed}


def _curious_once(tree, spec, x, m, r_keys, fy0, rng) -> bool:
    ra, rb = spec.alice_rand_bits, spec.bob_rand_bits
    ta = format(rng.getrandbits(ra), f"0{ra}b") if ra else ""
    tb = format(rng.getrandbits(rb), f"0{rb}b") if rb else ""
    oracle = LazyOracle(spec.answer_bits, rng)
    qb: set = set()
    key: tuple = (DUMMY, DUMMY)
    msgs: list[str] = []
    for r in range(1, spec.rounds + 1):
        side = spec.speaker(r)

        def lookup(q, side=side):
            if side == "B":
                qb.add(q)
            return oracle(q)

        bits, _ = evaluate_round(spec, r, x if side == "A" else m.y0, ta if side == "A" else tb, msgs, lookup)
        msgs.append(bits)
        key = key + (bits,)
        node = tree.nodes.get(key)
        if side == "A" and node is not None and fy0.hit_at_or_above(node) is None:
            b1 = exact_choice(view_distribution(tree, node, "B", m.y1), rng)
            if _explore_sampled(tree, node, b1, frozenset(qb), oracle, rng, r_keys):
                return True
        turn = []
        while True:
            q = tree.decisions.get((key, tuple(turn)))
            if q is None:
                break
            turn.append((q, oracle(q)))
        key = key + (eve_message(turn),)
    return False


def _explore_sampled(tree, w: Node, b1: tuple, actual_q: frozenset, oracle: LazyOracle, rng, r_keys) -> bool:
    spec = tree.spec
    y, tape, pairs = b1
    sampled = dict(pairs)
    eve = _eve_dict(w)
    fresh = LazyOracle(spec.answer_bits, random.Random(rng.getrandbits(64)))
    memo: dict = {}

    def lookup(q):
        if q not in memo:
            memo[q] = edited_oracle_answer(q, sampled, eve, {k: None for k in actual_q}, oracle, fresh)[0]
        return memo[q]

    key = w.key
    for phase in ("E", "B", "E"):
        if phase == "E":
            turn = []
            while True:
                q = tree.decisions.get((key, tuple(turn)))
                if q is None:
                    break
                turn.append((q, lookup(q)))
            key = key + (eve_message(turn),)
            if key in r_keys:
                return True
            if kind_of(spec, key) in ("A", "L"):
                return False
        else:
            r = (len(key) - 2) // 2 + 1
            bits, _ = evaluate_round(spec, r, y, tape, key[2::2], lookup)
            key = key + (bits,)
            if key in r_keys:
                return True
    return False


# ---------------------------------------------------------------------------
# the Alice-message distinguisher


def run_alice_message_distinguisher(
    tree: TranscriptTree, seg: Segments, params: FrontierParams, f: FunctionTable | None = None,
    nu0: Fraction | None = None,
) -> AdvantageReport:
    """Bob outputs 0 when the transcript passes through S-hat.

    Also evaluates the lower bound
    P[S|x0,y0] - P[S|x1,y0] >= c * P[S|x0,y1] - 2N nu0 - (I0 + I1)
    with c = delta'/((1+delta')(1+delta)^N) and I_x the measured independence
    error of Alice's message at the predecessors of S-hat.
    """
    if not seg.s_hat:
        raise EmptySegment("S-hat is empty")
    m = seg.minor
    s = seg.s_hat

    def mass(x, y):
        return sum((tree.reach(u, x, y) for u in s), Fraction(0))

    p00, p10, p01 = mass(m.x0, m.y0), mass(m.x1, m.y0), mass(m.x0, m.y1)
    preds = {u.apred.key: u.apred for u in s}
    indep = Fraction(0)
    for x in (m.x0, m.x1):
        for w in preds.values():
            pw = tree.reach(w, x, m.y0)
            if pw == 0:
                continue
            for u in s:
                if u.apred is w:
                    indep += pw * abs(tree.cond_reach(u, w, x, m.y0) - tree.cond_reach(u, w, x, m.y1))
    if nu0 is None:
        nu0 = measure_semihonest_error(tree, f).nu0 if f is not None else Fraction(0)
    # c rounded up so that a pass is a pass for the true (irrational) constant
    lo, hi = root_bracket(1 + params.delta, max(1, params.nx - 1), 96)
    c_hi = (1 - 1 / hi) / params.mu
    n = params.depth
    rhs = c_hi * p01 - 2 * n * nu0 - indep
    lhs = p00 - p10
    adv = abs(lhs)
    detail = {
        "P[S|x0,y0]": p00, "P[S|x1,y0]": p10, "P[S|x0,y1]": p01,
        "independence_error": indep, "eps0_hat": indep / (2 * n), "nu0": nu0,
        "c_upper": c_hi, "bound_rhs": rhs, "bound_holds": lhs >= rhs,
        # the bound presumes the ratio gap of a genuine witness tuple
        "bound_applicable": not seg.forced,
    }
    return AdvantageReport("alice-message", adv, {m.x0: p00, m.x1: p10}, m, adv, None, {}, [], detail)


# ---------------------------------------------------------------------------
# pipeline


@dataclass
class AttackReport:
    advantage: Fraction
    minor: MinorSelection
    part2: AdvantageReport | None
    part3: AdvantageReport | None
    identity: IdentitySweep | None
    segments: dict
    notes: list

    def to_json(self) -> dict:
        from .report import jsonable

        return jsonable({
            "advantage": self.advantage,
            "minor": {"x0": self.minor.x0, "x1": self.minor.x1, "y0": self.minor.y0, "y1": self.minor.y1},
            "part2": self.part2.to_json() if self.part2 else None,
            "part3": self.part3.to_json() if self.part3 else None,
            "identity": None if self.identity is None else {
                "checked": self.identity.checked, "failures": self.identity.failures,
                "zero_safe": self.identity.zero_safe, "unsafe_nodes": self.identity.unsafe_nodes,
                "holds": self.identity.holds,
            },
            "segments": self.segments,
            "notes": self.notes,
        })


def attack(
    tree: TranscriptTree, f: FunctionTable, params: FrontierParams | None = None,
    force: bool = False, mode: str = "exact", n: int = 100_000, seed: int = 0, sweep: bool = True,
) -> AttackReport:
    """Minor selection, both distinguishers and the switch-identity sweep.

    Raises HypothesisViolated on a decomposable function unless ``force``.
    """
    if not force and not is_undecomposable_top_level(f):
        raise HypothesisViolated("function is decomposable at the top level; use force to run anyway")
    params = params or FrontierParams.for_tree(tree)
    fr = all_frontiers(tree, params)
    seg = select_minor(tree, f, params, fr, force=force)
    notes = []
    if seg.forced:
        notes.append("no witness tuple; fallback minor with the whole tilde segment")
    nu0 = measure_semihonest_error(tree, f).nu0
    part2 = part3 = None
    if seg.s_hat:
        part2 = run_alice_message_distinguisher(tree, seg, params, f, nu0)
    else:
        notes.append("S-hat empty; Alice-message distinguisher skipped")
    if seg.r_hat:
        part3 = run_curious_bob(tree, seg, params, mode, n, seed, fr)
    else:
        notes.append("R-hat empty; curious Bob has nothing to find")
    adv = max([r.advantage for r in (part2, part3) if r is not None], default=Fraction(0))
    ident = None
    if sweep:
        ident = switch_identity_sweep(tree, params, [(seg.minor.y0, seg.minor.y1)], fr)
    segs = {
        "hat": [u.id for u in seg.hat], "s_hat": [u.id for u in seg.s_hat], "r_hat": [u.id for u in seg.r_hat],
        "tuple_mass": {",".join(map(str, k)): v for k, v in sorted(seg.tuple_mass.items())},
        "skipped": seg.skipped,
    }
    return AttackReport(adv, seg.minor, part2, part3, ident, segs, notes)
