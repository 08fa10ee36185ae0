"""Two-party function tables, cuts, decomposition and classification."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .errors import AsymmetricInput, ParseError

ALICE = "A"
BOB = "B"


@dataclass(frozen=True)
class FunctionTable:
    """``out[i][j] = (a, b)``: Alice's and Bob's outputs on ``(x_labels[i], y_labels[j])``."""

    x_labels: tuple[str, ...]
    y_labels: tuple[str, ...]
    out: tuple[tuple[tuple[str, str], ...], ...]

    def __post_init__(self):
        if not self.x_labels or not self.y_labels:
            raise ValueError("label lists must be non-empty")
        if len(set(self.x_labels)) != len(self.x_labels) or len(set(self.y_labels)) != len(self.y_labels):
            raise ValueError("labels must be unique")
        if len(self.out) != len(self.x_labels) or any(len(r) != len(self.y_labels) for r in self.out):
            raise ValueError("output matrix dimensions do not match labels")

    @classmethod
    def symmetric(cls, xs: Sequence, ys: Sequence, rows: Sequence[Sequence]) -> "FunctionTable":
        return cls(
            tuple(str(x) for x in xs),
            tuple(str(y) for y in ys),
            tuple(tuple((str(v), str(v)) for v in row) for row in rows),
        )

    @property
    def nx(self) -> int:
        return len(self.x_labels)

    @property
    def ny(self) -> int:
        return len(self.y_labels)

    @property
    def is_symmetric(self) -> bool:
        return all(a == b for row in self.out for a, b in row)

    def value(self, i: int, j: int) -> str:
        """Symmetric output at indices (i, j)."""
        a, b = self.out[i][j]
        if a != b:
            raise AsymmetricInput("value() needs a symmetric cell")
        return a

    def token(self, i: int, j: int) -> str:
        a, b = self.out[i][j]
        return a if a == b else f"{a}|{b}"

    def alice_out(self, i: int, j: int) -> str:
        return self.out[i][j][0]

    def bob_out(self, i: int, j: int) -> str:
        return self.out[i][j][1]

    def restrict(self, xs: Sequence[int], ys: Sequence[int]) -> "FunctionTable":
        return FunctionTable(
            tuple(self.x_labels[i] for i in xs),
            tuple(self.y_labels[j] for j in ys),
            tuple(tuple(self.out[i][j] for j in ys) for i in xs),
        )

    def relabel_outputs(self, mapping: dict[str, str]) -> "FunctionTable":
        return FunctionTable(
            self.x_labels,
            self.y_labels,
            tuple(tuple((mapping.get(a, a), mapping.get(b, b)) for a, b in row) for row in self.out),
        )

    def output_labels(self) -> list[str]:
        """Distinct output tokens in first-appearance order (row-major)."""
        seen: dict[str, None] = {}
        for i in range(self.nx):
            for j in range(self.ny):
                seen.setdefault(self.token(i, j), None)
        return list(seen)

    def to_json(self) -> dict:
        return {
            "x": list(self.x_labels),
            "y": list(self.y_labels),
            "out": [[self.token(i, j) for j in range(self.ny)] for i in range(self.nx)],
        }

    @classmethod
    def from_json(cls, obj) -> "FunctionTable":
        try:
            xs, ys, rows = obj["x"], obj["y"], obj["out"]
            cells = []
            for row in rows:
                r = []
                for tok in row:
                    tok = str(tok)
                    if "|" in tok:
                        a, b = tok.split("|", 1)
                    else:
                        a = b = tok
                    r.append((a, b))
                cells.append(tuple(r))
            return cls(tuple(str(x) for x in xs), tuple(str(y) for y in ys), tuple(cells))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"invalid function table: {exc}") from exc


def load_function(path) -> FunctionTable:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_function(text)


def parse_function(text: str) -> FunctionTable:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", exc.lineno, exc.colno) from exc
    return FunctionTable.from_json(obj)


# ---------------------------------------------------------------------------
# golden tables

def max_table() -> FunctionTable:
    xs, ys = [1, 3, 5], [0, 2, 4]
    return FunctionTable.symmetric(xs, ys, [[max(x, y) for y in ys] for x in xs])


def or_table() -> FunctionTable:
    return FunctionTable.symmetric([0, 1], [0, 1], [[0, 1], [1, 1]])


def spiral_table() -> FunctionTable:
    return FunctionTable.symmetric([0, 1, 2], [0, 1, 2], [[1, 1, 2], [4, 0, 2], [4, 3, 3]])


def weave_table() -> FunctionTable:
    return FunctionTable.symmetric(
        [0, 1, 2, 3], [0, 1, 2, 3],
        [[1, 1, 3, 4], [3, 2, 2, 4], [3, 4, 1, 1], [2, 4, 3, 2]],
    )


# ---------------------------------------------------------------------------
# cuts and decomposition


@dataclass(frozen=True)
class Cut:
    side: str
    blocks: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class Leaf:
    output: str
    xs: tuple[str, ...]
    ys: tuple[str, ...]


@dataclass(frozen=True)
class Internal:
    side: str
    blocks: tuple[tuple[str, ...], ...]
    children: tuple["DecompositionTree", ...]
    xs: tuple[str, ...]
    ys: tuple[str, ...]


DecompositionTree = Union[Leaf, Internal]


@dataclass(frozen=True)
class UndecomposableCertificate:
    """A non-constant sub-rectangle with neither an Alice cut nor a Bob cut."""

    xs: tuple[str, ...]
    ys: tuple[str, ...]


def _require_symmetric(f: FunctionTable) -> None:
    if not f.is_symmetric:
        raise AsymmetricInput("operation needs a symmetric function; use common_information first")


def _components(n: int, edges: Iterable[tuple[int, int]]) -> list[list[int]]:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def _side_components(f: FunctionTable, side: str) -> list[list[int]]:
    if side == ALICE:
        n, m = f.nx, f.ny
        val = lambda u, k: f.out[u][k][0]
    else:
        n, m = f.ny, f.nx
        val = lambda u, k: f.out[k][u][0]
    edges = [
        (u, v)
        for u in range(n)
        for v in range(u + 1, n)
        if any(val(u, k) == val(v, k) for k in range(m))
    ]
    return _components(n, edges)


def find_cut(f: FunctionTable, side: str) -> Cut | None:
    """Connected components of the confusability graph on ``side``, if more than one."""
    _require_symmetric(f)
    comps = _side_components(f, side)
    if len(comps) < 2:
        return None
    labels = f.x_labels if side == ALICE else f.y_labels
    return Cut(side, tuple(tuple(labels[i] for i in c) for c in comps))


def _is_constant(f: FunctionTable) -> bool:
    first = f.out[0][0]
    return all(c == first for row in f.out for c in row)


def decompose(f: FunctionTable) -> DecompositionTree | UndecomposableCertificate:
    _require_symmetric(f)

    def rec(sub: FunctionTable):
        if _is_constant(sub):
            return Leaf(sub.value(0, 0), sub.x_labels, sub.y_labels)
        for side in (ALICE, BOB):
            cut = find_cut(sub, side)
            if cut is None:
                continue
            children = []
            for block in cut.blocks:
                if side == ALICE:
                    part = sub.restrict([sub.x_labels.index(l) for l in block], range(sub.ny))
                else:
                    part = sub.restrict(range(sub.nx), [sub.y_labels.index(l) for l in block])
                child = rec(part)
                if isinstance(child, UndecomposableCertificate):
                    return child
                children.append(child)
            return Internal(side, cut.blocks, tuple(children), sub.x_labels, sub.y_labels)
        return UndecomposableCertificate(sub.x_labels, sub.y_labels)

    return rec(f)


def is_decomposable(f: FunctionTable) -> bool:
    return not isinstance(decompose(f), UndecomposableCertificate)


def is_undecomposable_top_level(f: FunctionTable) -> bool:
    _require_symmetric(f)
    return not _is_constant(f) and find_cut(f, ALICE) is None and find_cut(f, BOB) is None


def find_undecomposable_minor(f: FunctionTable) -> tuple[tuple[str, ...], tuple[str, ...]] | None:
    """Smallest-area sub-rectangle that is undecomposable at the top level."""
    _require_symmetric(f)
    candidates = []
    for kx in range(2, f.nx + 1):
        for xs in itertools.combinations(range(f.nx), kx):
            for ky in range(2, f.ny + 1):
                for ys in itertools.combinations(range(f.ny), ky):
                    candidates.append((kx * ky, xs, ys))
    candidates.sort()
    for _, xs, ys in candidates:
        if is_undecomposable_top_level(f.restrict(xs, ys)):
            return tuple(f.x_labels[i] for i in xs), tuple(f.y_labels[j] for j in ys)
    return None


def tree_to_json(t) -> dict:
    if isinstance(t, UndecomposableCertificate):
        return {"undecomposable": {"x": list(t.xs), "y": list(t.ys)}}
    if isinstance(t, Leaf):
        return {"leaf": t.output, "x": list(t.xs), "y": list(t.ys)}
    return {
        "side": t.side,
        "blocks": [list(b) for b in t.blocks],
        "children": [tree_to_json(c) for c in t.children],
    }


def tree_depth(t: DecompositionTree) -> int:
    if isinstance(t, Leaf):
        return 0
    return 1 + max(tree_depth(c) for c in t.children)


# ---------------------------------------------------------------------------
# common information, redundancy, classification


def common_information(f: FunctionTable) -> FunctionTable:
    """Symmetric function giving the component of the output bipartite graph."""
    a_nodes: dict[tuple[int, str], int] = {}
    b_nodes: dict[tuple[int, str], int] = {}
    for i in range(f.nx):
        for j in range(f.ny):
            a, b = f.out[i][j]
            a_nodes.setdefault((i, a), len(a_nodes))
    for i in range(f.nx):
        for j in range(f.ny):
            a, b = f.out[i][j]
            b_nodes.setdefault((j, b), len(a_nodes) + len(b_nodes))
    names = {v: f"A:{f.x_labels[i]}={a}" for (i, a), v in a_nodes.items()}
    names.update({v: f"B:{f.y_labels[j]}={b}" for (j, b), v in b_nodes.items()})
    edges = [
        (a_nodes[(i, f.out[i][j][0])], b_nodes[(j, f.out[i][j][1])])
        for i in range(f.nx)
        for j in range(f.ny)
    ]
    comps = _components(len(names), edges)
    label_of: dict[int, str] = {}
    for comp in comps:
        lab = "{" + ",".join(sorted(names[v] for v in comp)) + "}"
        for v in comp:
            label_of[v] = lab
    rows = [
        [label_of[a_nodes[(i, f.out[i][j][0])]] for j in range(f.ny)]
        for i in range(f.nx)
    ]
    return FunctionTable.symmetric(f.x_labels, f.y_labels, rows)


def _is_function_of(pairs: Iterable[tuple[object, object]]) -> bool:
    seen: dict = {}
    for key, val in pairs:
        if seen.setdefault(key, val) != val:
            return False
    return True


def isomorphic_to_common_information(f: FunctionTable, fp: FunctionTable | None = None) -> bool:
    """Alice's output is a function of (x, f') and Bob's of (y, f')."""
    fp = fp or common_information(f)
    alice_ok = _is_function_of(
        ((i, fp.value(i, j)), f.alice_out(i, j)) for i in range(f.nx) for j in range(f.ny)
    )
    bob_ok = _is_function_of(
        ((j, fp.value(i, j)), f.bob_out(i, j)) for i in range(f.nx) for j in range(f.ny)
    )
    return alice_ok and bob_ok


def _dominates_alice(f: FunctionTable, x: int, xp: int) -> bool:
    """Substituting ``xp`` for ``x`` is invisible to Bob and Alice can still decode."""
    if any(f.bob_out(x, j) != f.bob_out(xp, j) for j in range(f.ny)):
        return False
    return _is_function_of((f.alice_out(xp, j), f.alice_out(x, j)) for j in range(f.ny))


def _transpose(f: FunctionTable) -> FunctionTable:
    return FunctionTable(
        f.y_labels,
        f.x_labels,
        tuple(tuple((f.out[i][j][1], f.out[i][j][0]) for i in range(f.nx)) for j in range(f.ny)),
    )


@dataclass(frozen=True)
class Removal:
    side: str
    removed: str
    dominator: str


def _find_dominated(f: FunctionTable) -> tuple[int, int] | None:
    n = f.nx
    if n < 2:
        return None
    dom = {(x, xp): _dominates_alice(f, x, xp) for x in range(n) for xp in range(n) if x != xp}
    # strictly dominated inputs first, in label order
    for x in range(n):
        for xp in range(n):
            if x != xp and dom[(x, xp)] and not dom[(xp, x)]:
                return x, xp
    # mutual domination: keep the earliest, drop a later one
    for x in range(n):
        for xp in range(x):
            if dom[(x, xp)]:
                return x, xp
    return None


def remove_redundant_inputs(f: FunctionTable) -> tuple[FunctionTable, list[Removal]]:
    trace: list[Removal] = []
    cur = f
    while True:
        hit = _find_dominated(cur)
        if hit is not None:
            x, xp = hit
            trace.append(Removal(ALICE, cur.x_labels[x], cur.x_labels[xp]))
            cur = cur.restrict([i for i in range(cur.nx) if i != x], range(cur.ny))
            continue
        hit = _find_dominated(_transpose(cur))
        if hit is not None:
            y, yp = hit
            trace.append(Removal(BOB, cur.y_labels[y], cur.y_labels[yp]))
            cur = cur.restrict(range(cur.nx), [j for j in range(cur.ny) if j != y])
            continue
        return cur, trace


PERFECT_PLAIN = "PerfectPlainModel"
COM_HYBRID_ONLY = "ComHybridOnly"
NEITHER = "NeitherKnownModel"


@dataclass(frozen=True)
class Classification:
    verdict: str
    evidence: object
    f_prime: FunctionTable
    redundancy_trace: tuple[Removal, ...] = ()
    isomorphic: bool = False
    detail: dict = field(default_factory=dict)


def _plain_test(f: FunctionTable):
    fp = common_information(f)
    tree = decompose(fp)
    iso = isomorphic_to_common_information(f, fp)
    ok = not isinstance(tree, UndecomposableCertificate) and iso
    return ok, fp, tree, iso


def classify(f: FunctionTable) -> Classification:
    ok, fp, tree, iso = _plain_test(f)
    if ok:
        return Classification(PERFECT_PLAIN, tree, fp, (), True)
    reduced, trace = remove_redundant_inputs(f)
    ok_r, fp_r, tree_r, iso_r = _plain_test(reduced)
    if ok_r:
        return Classification(COM_HYBRID_ONLY, tree_r, fp_r, tuple(trace), True, {"reduced": reduced.to_json()})
    return Classification(
        NEITHER, tree_r, fp_r, tuple(trace), iso_r, {"reduced": reduced.to_json()}
    )


def classification_to_json(c: Classification) -> dict:
    return {
        "verdict": c.verdict,
        "evidence": tree_to_json(c.evidence),
        "isomorphic": c.isomorphic,
        "f_prime": c.f_prime.to_json(),
        "redundancy_trace": [
            {"side": r.side, "removed": r.removed, "dominator": r.dominator} for r in c.redundancy_trace
        ],
        **c.detail,
    }


# ---------------------------------------------------------------------------
# confusability chains (used by the attack)


def confusability_chain(f: FunctionTable, x_start: int, x_end: int) -> list[tuple[int, int]] | None:
    """Shortest chain of Alice inputs from ``x_start`` to ``x_end``.

    Returns ``[(x0, y0), (x1, y1), ..., (xt, None)]`` where f(x_i, y_i) = f(x_{i+1}, y_i);
    y_i is the first column witnessing the step.  BFS visits neighbours in index
    order so ties resolve lexicographically.
    """
    from collections import deque

    prev: dict[int, tuple[int, int] | None] = {x_start: None}
    queue = deque([x_start])
    while queue:
        u = queue.popleft()
        if u == x_end:
            break
        for v in range(f.nx):
            if v in prev:
                continue
            for j in range(f.ny):
                if f.out[u][j] == f.out[v][j]:
                    prev[v] = (u, j)
                    queue.append(v)
                    break
    if x_end not in prev:
        return None
    chain: list[tuple[int, int | None]] = [(x_end, None)]
    cur = x_end
    while prev[cur] is not None:
        u, j = prev[cur]
        chain.append((u, j))
        cur = u
    chain.reverse()
    return chain
