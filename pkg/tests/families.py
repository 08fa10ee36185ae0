"""Generated families of function tables used by the property and acceptance tests."""

from __future__ import annotations

import itertools
import random

from sfe_lab.functions import FunctionTable, is_decomposable


def _canonical(rows: tuple[tuple[int, ...], ...]) -> tuple[tuple[int, ...], ...]:
    """Relabel outputs by first appearance so relabelings collapse to one table."""
    seen: dict[int, int] = {}
    return tuple(tuple(seen.setdefault(v, len(seen)) for v in row) for row in rows)


def _table(rows) -> FunctionTable:
    nx, ny = len(rows), len(rows[0])
    return FunctionTable.symmetric(
        [str(i) for i in range(nx)], [str(j) for j in range(ny)],
        [[str(v) for v in row] for row in rows],
    )


def exhaustive_decomposable(max_side: int = 3, alphabet: int = 3) -> list[FunctionTable]:
    """Every decomposable table up to max_side x max_side over a small output alphabet.

    Tables equal up to output relabeling are listed once; 1-row and 1-column
    tables are skipped.
    """
    seen = set()
    out = []
    for nx in range(2, max_side + 1):
        for ny in range(2, max_side + 1):
            for cells in itertools.product(range(alphabet), repeat=nx * ny):
                rows = _canonical(tuple(tuple(cells[i * ny:(i + 1) * ny]) for i in range(nx)))
                if rows in seen:
                    continue
                seen.add(rows)
                f = _table(rows)
                if is_decomposable(f):
                    out.append(f)
    return out


def random_decomposable(nx: int, ny: int, rng: random.Random) -> FunctionTable:
    """Random table built by recursive cuts, so it is decomposable by construction."""
    counter = itertools.count()
    cells = [[0] * ny for _ in range(nx)]

    def fill(xs, ys, side):
        if (len(xs) == 1 and len(ys) == 1) or rng.random() < 0.2:
            v = next(counter)
            for i in xs:
                for j in ys:
                    cells[i][j] = v
            return
        cur = xs if side == "A" else ys
        if len(cur) == 1:
            return fill(xs, ys, "B" if side == "A" else "A")
        k = rng.randint(1, len(cur) - 1)
        parts = [cur[:k], cur[k:]]
        for part in parts:
            if side == "A":
                fill(part, ys, "B")
            else:
                fill(xs, part, "A")

    fill(list(range(nx)), list(range(ny)), rng.choice("AB"))
    # shuffle rows and columns so blocks are not contiguous
    rp = list(range(nx))
    cp = list(range(ny))
    rng.shuffle(rp)
    rng.shuffle(cp)
    return _table([[cells[rp[i]][cp[j]] for j in range(ny)] for i in range(nx)])


def decomposable_family(seed: int = 0, random_count: int = 120) -> list[FunctionTable]:
    fam = exhaustive_decomposable(3, 3)
    rng = random.Random(seed)
    for _ in range(random_count):
        fam.append(random_decomposable(rng.randint(2, 5), rng.randint(2, 5), rng))
    return fam
