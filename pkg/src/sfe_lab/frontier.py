"""Frontiers on exact transcript trees and the numeric claim checks built on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .engine import Node, TranscriptTree, measure_semihonest_error
from .errors import HypothesisViolated
from .exact import root_bracket
from .functions import FunctionTable, is_undecomposable_top_level

FX, FY, FX0, FY0 = "FX", "FY", "FX0", "FY0"
FLAVORS = (FX, FY, FX0, FY0)


@dataclass(frozen=True)
class FrontierParams:
    """Threshold ``theta``, ratio slack ``delta`` and tree depth ``depth`` (N)."""

    theta: Fraction
    delta: Fraction
    depth: int
    nx: int
    ny: int

    def __post_init__(self):
        object.__setattr__(self, "theta", Fraction(self.theta))
        object.__setattr__(self, "delta", Fraction(self.delta))
        if self.theta < 0:
            raise ValueError("theta must be >= 0")
        if self.delta <= 0:
            raise ValueError("delta must be > 0")

    @classmethod
    def for_tree(cls, tree: TranscriptTree, theta=None, delta=None) -> "FrontierParams":
        n = tree.depth
        if delta is None:
            delta = Fraction(1, n)
        if theta is None:
            theta = Fraction(1, 32 * tree.nx * tree.ny)
        return cls(theta, delta, n, tree.nx, tree.ny)

    @property
    def mu(self) -> Fraction:
        return (1 + self.delta) ** self.depth

    def delta_prime(self, bits: int = 96) -> tuple[Fraction, Fraction]:
        """Bracket on (1+delta)^(1/(|X|-1)) - 1."""
        return self._root_minus_one(self.nx, bits)

    def delta_double_prime(self, bits: int = 96) -> tuple[Fraction, Fraction]:
        """Bracket on (1+delta)^(1/(|Y|-1)) - 1."""
        return self._root_minus_one(self.ny, bits)

    def _root_minus_one(self, n: int, bits: int) -> tuple[Fraction, Fraction]:
        k = max(1, n - 1)
        lo, hi = root_bracket(1 + self.delta, k, bits)
        return lo - 1, hi - 1


@dataclass
class FrontierSet:
    flavor: str
    members: list[Node]
    witnesses: dict[tuple, tuple] = field(default_factory=dict)

    def __post_init__(self):
        keys = [m.key for m in self.members]
        for i, a in enumerate(keys):
            for b in keys[i + 1:]:
                if a == b[: len(a)] or b == a[: len(b)]:
                    raise ValueError(f"frontier {self.flavor} is not an antichain")
        self._keys = set(keys)

    def __contains__(self, node) -> bool:
        key = node.key if isinstance(node, Node) else tuple(node)
        return key in self._keys

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @property
    def keys(self) -> set:
        return set(self._keys)

    def hit_at_or_above(self, node: Node) -> Node | None:
        """The member that is an ancestor of (or equal to) ``node``, if any."""
        for k in range(len(node.key) + 1):
            if node.key[:k] in self._keys:
                return next(m for m in self.members if m.key == node.key[:k])
        return None

    def mass(self) -> Fraction:
        return sum((m.mass for m in self.members), Fraction(0))

    def mass_given(self, tree: TranscriptTree, x: int, y: int) -> Fraction:
        return sum((tree.reach(m, x, y) for m in self.members), Fraction(0))

    def to_json(self, tree: TranscriptTree | None = None) -> dict:
        from .report import rat

        out = []
        for m in self.members:
            item = {"node": m.id, "witness": list(self.witnesses.get(m.key, ())), "mass": rat(m.mass)}
            if tree is not None:
                item["reach"] = {f"{x},{y}": rat(p) for (x, y), p in sorted(m.reach.items())}
            out.append(item)
        return {"flavor": self.flavor, "members": out}


def precedes(node: Node, frontier: FrontierSet) -> bool:
    """``node`` is strictly above the frontier: no member lies at or above it."""
    return frontier.hit_at_or_above(node) is None


def _witness(tree: TranscriptTree, v: Node, theta: Fraction, delta: Fraction, side: str):
    pred = v.apred if side == "X" else v.bpred
    if side == "X":
        movers, others = range(tree.nx), range(tree.ny)
    else:
        movers, others = range(tree.ny), range(tree.nx)
    for o in others:
        post = tree.posterior_y(v, o) if side == "X" else tree.posterior_x(v, o)
        if post < theta:
            continue
        vals = []
        for m in movers:
            x, y = (m, o) if side == "X" else (o, m)
            vals.append(tree.cond_reach(v, pred, x, y))
        hi = max(vals)
        lo = min(vals)
        if hi > (1 + delta) * lo:
            return (o, vals.index(hi), vals.index(lo))
    return None


def compute_frontier(tree: TranscriptTree, params: FrontierParams, flavor: str) -> FrontierSet:
    """First nodes on each root-leaf path where one party's input is noticeably revealed.

    For the X flavors a node qualifies when, for some Bob input y with
    P[y | v] >= theta, the probability of reaching v from its Alice predecessor
    varies by more than a factor (1 + delta) across Alice inputs.  The Y flavors
    swap the roles.  The 0 flavors drop the theta requirement.  Dummy nodes
    never qualify.
    """
    if flavor not in FLAVORS:
        raise ValueError(f"unknown frontier flavor {flavor!r}")
    theta = Fraction(0) if flavor in (FX0, FY0) else params.theta
    side = "X" if flavor in (FX, FX0) else "Y"
    members: list[Node] = []
    witnesses: dict[tuple, tuple] = {}
    stack = [tree.root]
    while stack:
        v = stack.pop()
        if not v.dummy:
            wit = _witness(tree, v, theta, params.delta, side)
            if wit is not None:
                members.append(v)
                witnesses[v.key] = wit
                continue
        stack.extend(sorted(v.children.values(), key=lambda n: n.key, reverse=True))
    members.sort(key=lambda n: n.key)
    return FrontierSet(flavor, members, witnesses)


def all_frontiers(tree: TranscriptTree, params: FrontierParams) -> dict[str, FrontierSet]:
    return {fl: compute_frontier(tree, params, fl) for fl in FLAVORS}


# ---------------------------------------------------------------------------
# events


def union(*fs: FrontierSet) -> FrontierSet:
    """Earliest members of a union of frontiers (the event of hitting any of them)."""
    keys = set()
    for f in fs:
        keys |= f.keys
    nodes = {m.key: m for f in fs for m in f.members}
    firsts = [nodes[k] for k in sorted(keys) if not any(k[:i] in keys for i in range(len(k)))]
    return FrontierSet("+".join(f.flavor for f in fs), firsts)


def miss_mass(tree: TranscriptTree, frontier: FrontierSet, xy: tuple[int, int] | None = None) -> Fraction:
    """Probability that the path avoids the frontier (uniform inputs, or given a pair)."""
    tot = Fraction(0)
    for leaf in tree.leaves():
        if frontier.hit_at_or_above(leaf) is None:
            tot += leaf.mass if xy is None else tree.reach(leaf, *xy)
    return tot


def precedence_mass(tree: TranscriptTree, first: FrontierSet, second: FrontierSet, xy=None) -> Fraction:
    """P[path meets ``first`` strictly before meeting ``second``]."""
    tot = Fraction(0)
    for z in first.members:
        if second.hit_at_or_above(z) is None:
            tot += z.mass if xy is None else tree.reach(z, *xy)
    return tot


def segment(frontier: FrontierSet, pred_attr: str, guard: FrontierSet) -> list[Node]:
    """Members u with pred(u) strictly above ``guard``."""
    out = []
    for u in frontier.members:
        p = getattr(u, pred_attr)
        if p is not None and guard.hit_at_or_above(p) is None:
            out.append(u)
    return out


def nodes_mass(nodes, tree: TranscriptTree | None = None, xy=None) -> Fraction:
    if xy is None:
        return sum((n.mass for n in nodes), Fraction(0))
    return sum((tree.reach(n, *xy) for n in nodes), Fraction(0))


# ---------------------------------------------------------------------------
# claim checks


@dataclass
class ClaimCheckReport:
    claim: str
    lhs: Fraction
    rhs: Fraction
    holds: bool
    formula: str
    constants: dict
    per_pair: dict = field(default_factory=dict)
    hypothesis_ok: bool = True
    masses: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        from .report import jsonable

        return jsonable({
            "claim": self.claim, "lhs": self.lhs, "rhs": self.rhs, "holds": self.holds,
            "formula": self.formula, "constants": self.constants, "per_pair": self.per_pair,
            "hypothesis_ok": self.hypothesis_ok, "masses": self.masses,
        })


def check_frontier_fullness(
    tree: TranscriptTree,
    f: FunctionTable,
    params: FrontierParams,
    nu0: Fraction | None = None,
    frontiers: dict | None = None,
    strict: bool = False,
) -> ClaimCheckReport:
    """Missing the theta-frontier is rare: P[miss] <= (5 + mu) nu0 + |X||Y| theta.

    Checked under uniform inputs and for every input pair, for both parties.
    """
    hyp = is_undecomposable_top_level(f)
    if strict and not hyp:
        raise HypothesisViolated("function is decomposable at the top level")
    if nu0 is None:
        nu0 = measure_semihonest_error(tree, f).nu0
    fr = frontiers or all_frontiers(tree, params)
    c0 = 5 + params.mu
    rhs = c0 * nu0 + tree.nx * tree.ny * params.theta
    per_pair = {}
    worst = Fraction(0)
    uni = {}
    for fl in (FX, FY):
        uni[fl] = miss_mass(tree, fr[fl])
        for x, y in tree.inputs():
            m = miss_mass(tree, fr[fl], (x, y))
            per_pair[f"{fl}:{x},{y}"] = m
            worst = max(worst, m)
    lhs = max(uni.values())
    return ClaimCheckReport(
        "frontier-fullness", lhs, rhs, lhs <= rhs and worst <= rhs,
        "P[miss F_theta] <= (5 + (1+delta)^N) * nu0 + |X||Y| * theta",
        {"c0": c0, "mu": params.mu, "nu0": nu0, "theta": params.theta, "delta": params.delta, "N": params.depth},
        per_pair, hyp, {"miss_FX": uni[FX], "miss_FY": uni[FY], "worst_pair": worst},
    )


def check_minvsnomin(tree: TranscriptTree, params: FrontierParams, frontiers: dict | None = None) -> ClaimCheckReport:
    """The unrestricted frontier rarely comes strictly first: <= (1 + mu)|X||Y| theta."""
    fr = frontiers or all_frontiers(tree, params)
    both = union(fr[FX], fr[FY])
    ly = precedence_mass(tree, fr[FY0], both)
    lx = precedence_mass(tree, fr[FX0], both)
    rhs = (1 + params.mu) * tree.nx * tree.ny * params.theta
    lhs = max(lx, ly)
    return ClaimCheckReport(
        "min-vs-nomin", lhs, rhs, lhs <= rhs,
        "P[F0 before (F_theta_X u F_theta_Y)] <= (1 + (1+delta)^N) * |X||Y| * theta",
        {"mu": params.mu, "theta": params.theta, "delta": params.delta, "N": params.depth},
        {}, True, {"FY0_first": ly, "FX0_first": lx},
    )


def check_frontier_ordering(tree: TranscriptTree, params: FrontierParams, frontiers: dict | None = None) -> ClaimCheckReport:
    """Three-event cover for the segment of F_X whose Alice predecessor precedes F_Y.

    P[breve F_X] <= P[miss F0_Y] + P[F0_Y before (F_X u F_Y)] + P[tilde F_X], and
    the symmetric statement for Y.
    """
    fr = frontiers or all_frontiers(tree, params)
    both = union(fr[FX], fr[FY])
    breve_x = segment(fr[FX], "apred", fr[FY])
    tilde_x = segment(fr[FX], "apred", fr[FY0])
    breve_y = segment(fr[FY], "bpred", fr[FX])
    tilde_y = segment(fr[FY], "bpred", fr[FX0])
    masses = {
        "breve_X": nodes_mass(breve_x),
        "tilde_X": nodes_mass(tilde_x),
        "miss_FY0": miss_mass(tree, fr[FY0]),
        "FY0_first": precedence_mass(tree, fr[FY0], both),
        "breve_Y": nodes_mass(breve_y),
        "tilde_Y": nodes_mass(tilde_y),
        "miss_FX0": miss_mass(tree, fr[FX0]),
        "FX0_first": precedence_mass(tree, fr[FX0], both),
    }
    rhs_x = masses["miss_FY0"] + masses["FY0_first"] + masses["tilde_X"]
    rhs_y = masses["miss_FX0"] + masses["FX0_first"] + masses["tilde_Y"]
    holds = masses["breve_X"] <= rhs_x and masses["breve_Y"] <= rhs_y
    return ClaimCheckReport(
        "frontier-ordering", masses["breve_X"], rhs_x, holds,
        "P[breve F_X] <= P[miss F0_Y] + P[F0_Y before F_theta] + P[tilde F_X] (and Y symmetric)",
        {"theta": params.theta, "delta": params.delta},
        {"Y": {"lhs": masses["breve_Y"], "rhs": rhs_y}}, True, masses,
    )
