"""Monte Carlo runs of the honest execution, split into fixed seeded chunks.

Chunks are seeded by (seed, chunk index) and merged in order, so results do
not depend on how many worker processes run them.
"""

from __future__ import annotations

import math
import os
import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .dsl import ProtocolSpec
from .engine import EvePolicy, TranscriptTree, run_once

CHUNK = 10_000


def worker_count() -> int:
    env = os.environ.get("SFE_LAB_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(8, os.cpu_count() or 1))


def _chunk(args) -> tuple[Counter, Counter]:
    spec, eve, seed, idx, size = args
    rng = random.Random(f"{seed}/{idx}")
    outs: Counter = Counter()
    leaves: Counter = Counter()
    for _ in range(size):
        x = rng.randrange(spec.alice_inputs)
        y = rng.randrange(spec.bob_inputs)
        res = run_once(spec, x, y, eve, rng=rng)
        outs[res.output] += 1
        leaves[res.transcript] += 1
    return outs, leaves


@dataclass
class SampleCounts:
    n: int
    outputs: Counter
    leaves: Counter


def sample_runs(spec: ProtocolSpec, n: int, seed: int = 0, eve: EvePolicy | None = None, workers: int | None = None) -> SampleCounts:
    """Run ``n`` executions on uniformly random inputs."""
    sizes = [CHUNK] * (n // CHUNK) + ([n % CHUNK] if n % CHUNK else [])
    jobs = [(spec, eve, seed, i, s) for i, s in enumerate(sizes)]
    workers = workers or worker_count()
    if workers == 1 or len(jobs) == 1:
        parts = [_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk, jobs))
    outs: Counter = Counter()
    leaves: Counter = Counter()
    for o, l in parts:
        outs.update(o)
        leaves.update(l)
    return SampleCounts(n, outs, leaves)


def within_sigmas(count: int, n: int, p: Fraction, k: int = 3) -> tuple[bool, float]:
    """Binomial check |count/n - p| <= k * sqrt(p(1-p)/n); exact when p is 0 or 1."""
    p = Fraction(p)
    if p in (0, 1):
        ok = count == n * p
        return ok, 0.0 if ok else math.inf
    sd = math.sqrt(float(p * (1 - p)) / n)
    z = abs(count / n - float(p)) / sd
    return z <= k, z


def exact_output_distribution(tree: TranscriptTree) -> dict:
    out: dict = {}
    for leaf in tree.leaves():
        o = tree.output_of(leaf)
        out[o] = out.get(o, Fraction(0)) + leaf.mass
    return out


def compare_outputs(tree: TranscriptTree, counts: SampleCounts, k: int = 3) -> list[dict]:
    """Per output label: exact probability, sampled frequency and the 3-sigma verdict."""
    exact = exact_output_distribution(tree)
    rows = []
    for label in sorted(set(exact) | set(counts.outputs), key=str):
        p = exact.get(label, Fraction(0))
        c = counts.outputs.get(label, 0)
        ok, z = within_sigmas(c, counts.n, p, k)
        rows.append({"output": label, "exact": p, "count": c, "n": counts.n, "z": z, "ok": ok})
    return rows
