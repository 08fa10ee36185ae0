"""Command-line front end.

Exit codes: 0 success or positive verdict, 2 negative verdict, 3 hypothesis
violated, 1 usage or parse error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import __version__
from .attack import attack
from .dsl import ProtocolSpec, format_protocol, load_protocol
from .engine import EvePolicy, build_tree, measure_semihonest_error, run_once
from .errors import BudgetExceeded, HypothesisViolated, SfeLabError
from .eve import audit_independence, audit_lightness, audit_likely_input_lemmas
from .frontier import (
    FX, FX0, FY, FY0, FrontierParams, all_frontiers, check_frontier_fullness, check_frontier_ordering,
    check_minvsnomin,
)
from .functions import (
    NEITHER, FunctionTable, UndecomposableCertificate, classification_to_json, classify, decompose,
    load_function, tree_to_json,
)
from .report import dumps
from .sampling import compare_outputs, sample_runs
from .synth import synthesize_for

OK, USAGE, NEGATIVE, HYPOTHESIS = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    command: str
    function: Path | None
    protocol: Path | None
    theta: Fraction | None
    delta: Fraction | None
    eve_eps: Fraction | None
    budget: int
    seed: int
    mode: str
    samples: int
    force: bool
    strict: bool
    out: Path | None


def _fraction(text: str) -> Fraction:
    try:
        v = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc
    return v


def _eve_eps(text: str) -> Fraction | None:
    if text.lower() in ("off", "none", "0"):
        return None
    v = _fraction(text)
    if not (0 < v <= 1):
        raise argparse.ArgumentTypeError("--eve-eps must lie in (0, 1] or be 'off'")
    return v


def _config(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(
        ns.command,
        Path(ns.function) if getattr(ns, "function", None) else None,
        Path(ns.protocol) if getattr(ns, "protocol", None) else None,
        getattr(ns, "theta", None),
        getattr(ns, "delta", None),
        getattr(ns, "eve_eps", None),
        getattr(ns, "budget", 24),
        ns.seed,
        getattr(ns, "mode", "exact"),
        getattr(ns, "samples", 0),
        getattr(ns, "force", False),
        getattr(ns, "strict", False),
        Path(ns.out) if ns.out else None,
    )
    if cfg.theta is not None and cfg.theta < 0:
        raise SfeLabError("--theta must be >= 0")
    if cfg.delta is not None and cfg.delta <= 0:
        raise SfeLabError("--delta must be > 0")
    if cfg.budget < 0 or cfg.samples < 0:
        raise SfeLabError("--budget and --samples must be non-negative")
    return cfg


def _emit(cfg: RunConfig, obj) -> None:
    text = dumps(obj)
    if cfg.out is not None:
        cfg.out.write_text(text)
    else:
        sys.stdout.write(text)


def _eve(cfg: RunConfig) -> EvePolicy | None:
    return EvePolicy(cfg.eve_eps) if cfg.eve_eps is not None else None


def _protocol_for(cfg: RunConfig, f: FunctionTable | None) -> ProtocolSpec:
    if cfg.protocol is not None:
        spec = load_protocol(cfg.protocol)
    elif f is not None:
        spec = synthesize_for(f, "synthesized")
    else:
        raise SfeLabError("a protocol file is required")
    if f is not None and (spec.alice_inputs, spec.bob_inputs) != (f.nx, f.ny):
        raise SfeLabError(f"protocol inputs {spec.alice_inputs}x{spec.bob_inputs} do not match function {f.nx}x{f.ny}")
    return spec


def _input_index(labels, text: str) -> int:
    if text in labels:
        return labels.index(text)
    try:
        i = int(text)
    except ValueError:
        raise SfeLabError(f"unknown input {text!r}") from None
    if not 0 <= i < len(labels):
        raise SfeLabError(f"input index {i} out of range")
    return i


# ---------------------------------------------------------------------------
# commands


def cmd_decompose(cfg: RunConfig) -> int:
    f = load_function(cfg.function)
    t = decompose(f)
    _emit(cfg, {"decomposable": not isinstance(t, UndecomposableCertificate), "tree": tree_to_json(t)})
    return NEGATIVE if isinstance(t, UndecomposableCertificate) else OK


def cmd_classify(cfg: RunConfig) -> int:
    c = classify(load_function(cfg.function))
    _emit(cfg, classification_to_json(c))
    return NEGATIVE if c.verdict == NEITHER else OK


def cmd_synthesize(cfg: RunConfig) -> int:
    f = load_function(cfg.function)
    t = decompose(f)
    if isinstance(t, UndecomposableCertificate):
        _emit(cfg, {"decomposable": False, "tree": tree_to_json(t)})
        return NEGATIVE
    text = format_protocol(synthesize_for(f, cfg.function.stem))
    if cfg.out is not None:
        cfg.out.write_text(text)
    else:
        sys.stdout.write(text)
    return OK


def cmd_simulate(cfg: RunConfig, ns) -> int:
    f = load_function(cfg.function) if cfg.function else None
    spec = _protocol_for(cfg, f)
    eve = _eve(cfg)
    if cfg.samples:
        counts = sample_runs(spec, cfg.samples, cfg.seed, eve)
        report = {"samples": cfg.samples, "seed": cfg.seed,
                  "outputs": {str(k): v for k, v in sorted(counts.outputs.items(), key=lambda kv: str(kv[0]))}}
        if cfg.mode == "exact":
            report["comparison"] = compare_outputs(build_tree(spec, eve, cfg.budget), counts)
        _emit(cfg, report)
        return OK
    xs = f.x_labels if f else [str(i) for i in range(spec.alice_inputs)]
    ys = f.y_labels if f else [str(i) for i in range(spec.bob_inputs)]
    x = _input_index(list(xs), ns.x)
    y = _input_index(list(ys), ns.y)
    res = run_once(spec, x, y, eve, seed=cfg.seed)
    _emit(cfg, {
        "x": xs[x], "y": ys[y], "seed": cfg.seed, "transcript": list(res.transcript),
        "output": res.output, "eve_pairs": [list(p) for p in res.eve_pairs],
        "oracle_trace": [list(t) for t in res.oracle_trace],
        "alice_pairs": [list(p) for p in res.alice.pairs], "bob_pairs": [list(p) for p in res.bob.pairs],
        "expected": f.token(x, y) if f else None,
    })
    return OK


def cmd_security(cfg: RunConfig) -> int:
    f = load_function(cfg.function)
    spec = _protocol_for(cfg, f)
    tree = build_tree(spec, _eve(cfg), cfg.budget)
    r = measure_semihonest_error(tree, f)
    _emit(cfg, {**_security_json(r), "protocol": spec.name})
    return OK if r.nu0 == 0 else NEGATIVE


def _security_json(r) -> dict:
    return {
        "error": r.error, "alice_error": r.alice_error, "bob_error": r.bob_error,
        "correctness_error": r.correctness_error, "augmented_error": r.augmented_error,
        "nu0": r.nu0, "worst_alice_pair": r.worst_alice_pair, "worst_bob_pair": r.worst_bob_pair,
    }


def _audits(tree, eps: Fraction, likely: tuple | None) -> dict:
    out = {"independence": audit_independence(tree, eps), "lightness": audit_lightness(tree, eps)}
    if likely is not None:
        out["likely_input"] = audit_likely_input_lemmas(tree, *likely, eps)
    return out


def cmd_eve_audit(cfg: RunConfig, ns) -> int:
    spec = load_protocol(cfg.protocol)
    eps = cfg.eve_eps if cfg.eve_eps is not None else Fraction(1, 8)
    tree = build_tree(spec, None if ns.no_eve else EvePolicy(eps), cfg.budget)
    likely = None
    if ns.likely is not None:
        likely = tuple(int(v) for v in ns.likely.split(","))
        if len(likely) != 3:
            raise SfeLabError("--likely expects x,y,y2")
    audits = _audits(tree, eps, likely)
    _emit(cfg, {"protocol": spec.name, "eve": not ns.no_eve, "epsilon": eps, "audits": audits,
                "tree_nodes": len(tree.nodes)})
    return OK if all(a.passed for a in audits.values()) else NEGATIVE


def _params(cfg: RunConfig, tree) -> FrontierParams:
    return FrontierParams.for_tree(tree, cfg.theta, cfg.delta)


def _frontier_section(cfg: RunConfig, tree, f: FunctionTable, params: FrontierParams) -> tuple[dict, bool]:
    degenerate = params.theta == 0
    fr = all_frontiers(tree, params)
    checks = [
        check_frontier_fullness(tree, f, params, frontiers=fr, strict=cfg.strict),
        check_minvsnomin(tree, params, fr),
        check_frontier_ordering(tree, params, fr),
    ]
    flavors = [FX0, FY0] if degenerate else [FX, FY, FX0, FY0]
    section = {
        "params": {"theta": params.theta, "delta": params.delta, "N": params.depth, "mu": params.mu,
                   "delta_prime": list(params.delta_prime(64)), "delta_double_prime": list(params.delta_double_prime(64))},
        "frontiers": {fl: fr[fl].to_json(tree) for fl in flavors},
        "claims": [c.to_json() for c in checks],
    }
    if degenerate:
        section["note"] = "theta = 0: the theta frontiers coincide with the unrestricted ones"
    # a claim whose hypothesis fails is reported but does not decide the verdict
    return section, all(c.holds or not c.hypothesis_ok for c in checks)


def cmd_frontier(cfg: RunConfig) -> int:
    f = load_function(cfg.function)
    spec = _protocol_for(cfg, f)
    tree = build_tree(spec, _eve(cfg), cfg.budget)
    section, ok = _frontier_section(cfg, tree, f, _params(cfg, tree))
    _emit(cfg, section)
    return OK if ok else NEGATIVE


def cmd_attack(cfg: RunConfig) -> int:
    f = load_function(cfg.function)
    spec = _protocol_for(cfg, f)
    tree = build_tree(spec, _eve(cfg), cfg.budget)
    mode = "sampled" if cfg.mode == "sample" else "exact"
    rep = attack(tree, f, _params(cfg, tree), force=cfg.force, mode=mode,
                 n=cfg.samples or 100_000, seed=cfg.seed)
    _emit(cfg, rep)
    return NEGATIVE if rep.advantage > 0 else OK


def cmd_analyze(cfg: RunConfig) -> int:
    f = load_function(cfg.function)
    spec = _protocol_for(cfg, f)
    if cfg.mode == "sample":
        n = cfg.samples or 100_000
        counts = sample_runs(spec, n, cfg.seed, _eve(cfg))
        _emit(cfg, {"mode": "sample", "protocol": spec.name, "samples": n, "seed": cfg.seed,
                    "outputs": {str(k): v for k, v in sorted(counts.outputs.items(), key=lambda kv: str(kv[0]))},
                    "note": "exact analyses need an exact tree; only output frequencies are sampled"})
        return OK
    eve = _eve(cfg)
    tree = build_tree(spec, eve, cfg.budget)
    sec = measure_semihonest_error(tree, f)
    params = _params(cfg, tree)
    section, ok = _frontier_section(cfg, tree, f, params)
    eps = cfg.eve_eps if cfg.eve_eps is not None else Fraction(1, 8)
    audits = _audits(tree, eps, None)
    report = {
        "protocol": spec.name,
        "function": {"x": f.x_labels, "y": f.y_labels},
        "eve": {"epsilon": cfg.eve_eps, "cap": tree.cap, "cap_bound": tree.cap_bound},
        "tree": {"nodes": len(tree.nodes), "depth": tree.depth, "leaves": len(tree.leaves())},
        "security": _security_json(sec),
        "audits": audits,
        **section,
    }
    _emit(cfg, report)
    return OK if ok else NEGATIVE


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sfe-lab", description="Exact analysis of two-party function evaluation protocols.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, function=True, protocol=False, protocol_required=False):
        if function:
            sp.add_argument("function", help="function table (.fn, JSON)")
        if protocol:
            sp.add_argument("protocol", nargs=None if protocol_required else "?", help="protocol (.sfe)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="write the report here instead of stdout")

    def analysis(sp):
        sp.add_argument("--eve-eps", type=_eve_eps, default=Fraction(1, 8),
                        help="Eve's heaviness threshold, or 'off' (default 1/8)")
        sp.add_argument("--theta", type=_fraction)
        sp.add_argument("--delta", type=_fraction)
        sp.add_argument("--budget", type=int, default=24, help="exact-mode random-bit budget")
        sp.add_argument("--mode", choices=("exact", "sample"), default="exact")
        sp.add_argument("--samples", type=int, default=0)
        sp.add_argument("--strict", action="store_true", help="raise when a claim hypothesis fails")

    common(sub.add_parser("decompose", help="decomposition tree or certificate"))
    common(sub.add_parser("classify", help="realizability class"))
    common(sub.add_parser("synthesize", help="plain protocol from the decomposition"))

    sp = sub.add_parser("simulate", help="one seeded execution, or --samples runs")
    common(sp, protocol=True)
    analysis(sp)
    sp.add_argument("--x", default="0")
    sp.add_argument("--y", default="0")

    sp = sub.add_parser("eve-audit", help="Eve's independence and lightness audits")
    sp.add_argument("protocol")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.add_argument("--eve-eps", type=_eve_eps, default=Fraction(1, 8))
    sp.add_argument("--budget", type=int, default=24)
    sp.add_argument("--no-eve", action="store_true", help="audit the bare protocol")
    sp.add_argument("--likely", help="x,y,y2 input indices for the likely-input checks")

    for name, helptext in (("frontier", "frontiers and claim checks"), ("attack", "distinguishing attacks"),
                           ("security", "exact semi-honest error"), ("analyze", "full report")):
        sp = sub.add_parser(name, help=helptext)
        common(sp, protocol=True)
        analysis(sp)
        if name == "attack":
            sp.add_argument("--force", action="store_true", help="run even without a witness minor")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code not in (0, None) else OK
    try:
        cfg = _config(ns)
        handlers = {
            "decompose": lambda: cmd_decompose(cfg),
            "classify": lambda: cmd_classify(cfg),
            "synthesize": lambda: cmd_synthesize(cfg),
            "simulate": lambda: cmd_simulate(cfg, ns),
            "eve-audit": lambda: cmd_eve_audit(cfg, ns),
            "frontier": lambda: cmd_frontier(cfg),
            "attack": lambda: cmd_attack(cfg),
            "security": lambda: cmd_security(cfg),
            "analyze": lambda: cmd_analyze(cfg),
        }
        return handlers[cfg.command]()
    except HypothesisViolated as exc:
        print(f"sfe-lab: hypothesis violated: {exc}", file=sys.stderr)
        return HYPOTHESIS
    except BudgetExceeded as exc:
        print(f"sfe-lab: {exc} [{exc.dimension}]; try --mode sample or a larger --budget", file=sys.stderr)
        return USAGE
    except (SfeLabError, OSError) as exc:
        print(f"sfe-lab: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
