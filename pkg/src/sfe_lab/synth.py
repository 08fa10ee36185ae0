"""Protocol construction: decomposition protocols and reference leaky protocols."""

from __future__ import annotations

from .dsl import Concat, Eq, If, Input, Lit, Msg, ProtocolSpec, Query, Rand, Xor, check
from .functions import ALICE, FunctionTable, Internal, Leaf, UndecomposableCertificate, decompose


def _bits(v: int, w: int) -> str:
    return format(v, f"0{w}b")


def _width_for(n: int) -> int:
    """Bits needed to write indices 0..n-1."""
    return max(1, (n - 1).bit_length())


def _select(cases: list[tuple[str, int]], subject, default, w: int):
    """Nested ``if`` mapping literal values of ``subject`` to literal outputs."""
    expr = Lit(_bits(default, w))
    for key, val in reversed(cases):
        if val == default:
            continue
        expr = If(Eq(subject, Lit(key)), Lit(_bits(val, w)), expr)
    return expr


def _prefix_expr(r: int):
    return Concat(tuple(Msg(j) for j in range(1, r)))


def synthesize_protocol(tree, f: FunctionTable, name: str = "") -> ProtocolSpec:
    """Plain deterministic protocol following a decomposition tree.

    At each internal node the owner announces the index of the block holding its
    input; a pass round is inserted whenever the owner is not the next speaker.
    The output is a public function of the full transcript.
    """
    if isinstance(tree, UndecomposableCertificate):
        raise ValueError("cannot synthesize a protocol for an undecomposable function")
    labels = f.output_labels()
    out_w = _width_for(len(labels))
    xw, yw = _width_for(f.nx), _width_for(f.ny)

    if isinstance(tree, Leaf):
        idx = labels.index(tree.output)
        spec = ProtocolSpec(
            0, 0, 1, 0, 0, f.nx, f.ny, (Lit(_bits(idx, out_w)),), Msg(1), tuple(labels), name
        )
        check(spec)
        return spec

    decisions: list[tuple[int, tuple, Internal]] = []   # (round, symbolic prefix, node)
    leaves: list[tuple[tuple, str]] = []

    def rec(node, r: int, prefix: tuple):
        if isinstance(node, Leaf):
            leaves.append((prefix, node.output))
            return
        while ProtocolSpec.speaker(r) != node.side:
            prefix = prefix + (None,)
            r += 1
        decisions.append((r, prefix, node))
        for k, child in enumerate(node.children):
            rec(child, r + 1, prefix + (k,))

    rec(tree, 1, ())
    n_rounds = max(len(p) for p, _ in leaves)
    widths = [1] * n_rounds
    for r, _, node in decisions:
        widths[r - 1] = max(widths[r - 1], _width_for(len(node.blocks)))

    def concrete(prefix: tuple) -> str:
        return "".join(_bits(0 if s is None else s, widths[i]) for i, s in enumerate(prefix))

    programs = []
    for r in range(1, n_rounds + 1):
        side = ProtocolSpec.speaker(r)
        in_w = xw if side == ALICE else yw
        labels_side = f.x_labels if side == ALICE else f.y_labels
        body = Lit("0" * widths[r - 1])
        for rr, prefix, node in reversed([d for d in decisions if d[0] == r]):
            cases = []
            for k, block in enumerate(node.blocks):
                for lab in block:
                    cases.append((_bits(labels_side.index(lab), in_w), k))
            announce = _select(cases, Input(), 0, widths[r - 1])
            if r == 1:
                body = announce
            else:
                body = If(Eq(_prefix_expr(r), Lit(concrete(prefix))), announce, body)
        programs.append(body)

    cases = []
    for prefix, out in leaves:
        full = prefix + (None,) * (n_rounds - len(prefix))
        cases.append((concrete(full), labels.index(out)))
    output = _select(cases, _prefix_expr(n_rounds + 1), 0, out_w)
    spec = ProtocolSpec(0, 0, n_rounds, 0, 0, f.nx, f.ny, tuple(programs), output, tuple(labels), name)
    check(spec)
    return spec


def synthesize_for(f: FunctionTable, name: str = "") -> ProtocolSpec:
    return synthesize_protocol(decompose(f), f, name)


def _bob_output_round(f: FunctionTable, x_msg, out_w: int):
    """Bob's program computing the output index from Alice's announced input."""
    labels = f.output_labels()
    xw, yw = _width_for(f.nx), _width_for(f.ny)
    cases = []
    for i in range(f.nx):
        for j in range(f.ny):
            cases.append((_bits(i, xw) + _bits(j, yw), labels.index(f.token(i, j))))
    return _select(cases, Concat((x_msg, Input())), 0, out_w)


def leaky_protocol(f: FunctionTable, name: str = "leaky") -> ProtocolSpec:
    """Alice sends her input in the clear; Bob replies with the output."""
    labels = f.output_labels()
    out_w = _width_for(len(labels))
    programs = (Input(), _bob_output_round(f, Msg(1), out_w))
    spec = ProtocolSpec(0, 0, 2, 0, 0, f.nx, f.ny, programs, Msg(2), tuple(labels), name)
    check(spec)
    return spec


def masked_leaky_protocol(f: FunctionTable, kappa: int = 2, name: str = "masked-leaky") -> ProtocolSpec:
    """Alice masks her input with the oracle answer at a public random nonce.

    Round 1: Alice sends the nonce q.  Round 2: Bob passes.  Round 3: Alice
    queries q and sends x xor O(q).  Round 4: Bob queries q, unmasks x and sends
    the output.  The transcript alone hides x; a listener who queries q does not.
    """
    labels = f.output_labels()
    out_w = _width_for(len(labels))
    xw = _width_for(f.nx)
    nonce = Rand(0, kappa - 1)
    alice3 = Xor(Input(), Query(nonce))
    bob4 = _bob_output_round(f, Xor(Msg(3), Query(Msg(1))), out_w)
    programs = (nonce, Lit("0"), alice3, bob4)
    spec = ProtocolSpec(kappa, xw, 4, kappa, 0, f.nx, f.ny, programs, Msg(4), tuple(labels), name)
    check(spec)
    return spec


def bob_first_protocol(f: FunctionTable, name: str = "bob-first") -> ProtocolSpec:
    """Bob sends his input in the clear; Alice replies with the output."""
    labels = f.output_labels()
    out_w = _width_for(len(labels))
    xw, yw = _width_for(f.nx), _width_for(f.ny)
    cases = []
    for i in range(f.nx):
        for j in range(f.ny):
            cases.append((_bits(j, yw) + _bits(i, xw), labels.index(f.token(i, j))))
    alice3 = _select(cases, Concat((Msg(2), Input())), 0, out_w)
    programs = (Lit("0"), Input(), alice3)
    spec = ProtocolSpec(0, 0, 3, 0, 0, f.nx, f.ny, programs, Msg(3), tuple(labels), name)
    check(spec)
    return spec


def random_bits_protocol(f: FunctionTable, bits: int = 1, name: str = "coin") -> ProtocolSpec:
    """Input-independent: Alice sends fresh random bits; the output is a fixed label."""
    programs = (Rand(0, bits - 1),)
    labels = f.output_labels()
    spec = ProtocolSpec(0, 0, 1, bits, 0, f.nx, f.ny, programs, Lit("0"), (labels[0],), name)
    check(spec)
    return spec
