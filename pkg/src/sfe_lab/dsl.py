"""S-expression language for two-party random-oracle protocols.

Top form::

    (protocol :kappa K :answer-bits A :rounds N
      (alice :rand R :inputs n (round 1 EXPR) (round 3 EXPR) ...)
      (bob   :rand R :inputs n (round 2 EXPR) ...)
      (output EXPR "label0" "label1" ...))

Expressions: ``input``, ``(rand i)``, ``(rand i..j)``, ``(msg j)``,
``(query E)``, ``(concat E ...)``, ``(eq E E)``, ``(if C T E)``,
``(xor E E)``, ``(seq E ... E)`` and bit literals ``#b0101``.  ``(send E)`` is
accepted as a synonym for ``E`` at the top of a round.  The optional output
form maps the public transcript to an output label by index.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

from .errors import (
    ArityError,
    DslSyntaxError,
    ForwardReference,
    OracleUnavailable,
    WidthMismatch,
)

# ---------------------------------------------------------------------------
# expression nodes


@dataclass(frozen=True)
class Input:
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Rand:
    lo: int
    hi: int
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Msg:
    round: int
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Query:
    arg: "Expr"
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Concat:
    parts: tuple
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Eq:
    left: "Expr"
    right: "Expr"
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class If:
    cond: "Expr"
    then: "Expr"
    other: "Expr"
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Xor:
    left: "Expr"
    right: "Expr"
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Seq:
    parts: tuple
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Lit:
    bits: str
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


Expr = Union[Input, Rand, Msg, Query, Concat, Eq, If, Xor, Seq, Lit]


@dataclass(frozen=True)
class ProtocolSpec:
    kappa: int
    answer_bits: int
    rounds: int
    alice_rand_bits: int
    bob_rand_bits: int
    alice_inputs: int
    bob_inputs: int
    programs: tuple[Expr, ...]          # index r-1 holds round r
    output_expr: Expr | None = None
    output_labels: tuple[str, ...] = ()
    name: str = ""

    @staticmethod
    def speaker(r: int) -> str:
        return "A" if r % 2 == 1 else "B"

    def input_width(self, side: str) -> int:
        n = self.alice_inputs if side == "A" else self.bob_inputs
        return max(1, (n - 1).bit_length())

    def rand_bits(self, side: str) -> int:
        return self.alice_rand_bits if side == "A" else self.bob_rand_bits

    def n_inputs(self, side: str) -> int:
        return self.alice_inputs if side == "A" else self.bob_inputs

    @property
    def widths(self) -> tuple[int, ...]:
        return _compiled(self).widths

    def query_count(self, side: str) -> int:
        """Static number of query forms in one party's programs."""
        return sum(_count_queries(p) for r, p in enumerate(self.programs, 1) if self.speaker(r) == side)

    @property
    def m(self) -> int:
        return self.query_count("A") + self.query_count("B")

    def has_queries(self) -> bool:
        return self.m > 0

    def decode_output(self, transcript: Sequence[str]) -> str | None:
        if self.output_expr is None:
            return None
        bits = _compiled(self).output(transcript)
        idx = int(bits, 2) if bits else 0
        return self.output_labels[idx] if idx < len(self.output_labels) else None


def _count_queries(e: Expr) -> int:
    if isinstance(e, Query):
        return 1 + _count_queries(e.arg)
    if isinstance(e, (Concat, Seq)):
        return sum(_count_queries(p) for p in e.parts)
    if isinstance(e, (Eq, Xor)):
        return _count_queries(e.left) + _count_queries(e.right)
    if isinstance(e, If):
        return _count_queries(e.cond) + _count_queries(e.then) + _count_queries(e.other)
    return 0


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN = re.compile(
    r"""(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>;[^\n]*)|(?P<lp>\()|(?P<rp>\))
      |(?P<str>"[^"\n]*")|(?P<bits>\#b[01]*)|(?P<atom>[^\s()";]+)""",
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col, i = 1, 1, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise DslSyntaxError(f"unexpected character {text[i]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind not in ("ws", "comment"):
                toks.append(_Tok(kind, s, line, col))
            col += len(s)
        i = m.end()
    return toks


@dataclass
class _SList:
    items: list
    line: int
    col: int


def _read(toks: list[_Tok]):
    """Build nested lists; atoms stay as tokens."""
    stack: list[_SList] = []
    top: list = []
    for t in toks:
        if t.kind == "lp":
            stack.append(_SList([], t.line, t.col))
        elif t.kind == "rp":
            if not stack:
                raise DslSyntaxError("unbalanced ')'", t.line, t.col)
            done = stack.pop()
            (stack[-1].items if stack else top).append(done)
        else:
            (stack[-1].items if stack else top).append(t)
    if stack:
        opened = stack[-1]
        raise DslSyntaxError("missing ')' for list opened here", opened.line, opened.col)
    return top


# ---------------------------------------------------------------------------
# parser


def _pos(node) -> tuple[int, int]:
    return (node.line, node.col)


def _head(node) -> str | None:
    if isinstance(node, _SList) and node.items and isinstance(node.items[0], _Tok) and node.items[0].kind == "atom":
        return node.items[0].text
    return None


def _int(tok, what: str) -> int:
    if not isinstance(tok, _Tok) or tok.kind != "atom" or not re.fullmatch(r"\d+", tok.text):
        line, col = _pos(tok)
        raise DslSyntaxError(f"expected integer for {what}", line, col)
    return int(tok.text)


def _keywords(items: list, start: int) -> tuple[dict[str, tuple], int]:
    kw: dict[str, tuple] = {}
    i = start
    while i < len(items) and isinstance(items[i], _Tok) and items[i].text.startswith(":"):
        if i + 1 >= len(items):
            raise ArityError(f"keyword {items[i].text} without value", items[i].line, items[i].col)
        kw[items[i].text] = (items[i + 1], items[i])
        i += 2
    return kw, i


def _parse_expr(node) -> Expr:
    if isinstance(node, _Tok):
        if node.kind == "bits":
            return Lit(node.text[2:], _pos(node))
        if node.kind == "atom" and node.text == "input":
            return Input(_pos(node))
        raise DslSyntaxError(f"unexpected atom {node.text!r}", node.line, node.col)
    head = _head(node)
    args = node.items[1:]
    p = _pos(node)

    def need(n: int):
        if len(args) != n:
            raise ArityError(f"{head} takes {n} argument(s), got {len(args)}", *p)

    if head == "rand":
        if len(args) == 1 and isinstance(args[0], _Tok) and ".." in args[0].text:
            lo_s, hi_s = args[0].text.split("..", 1)
            if not (lo_s.isdigit() and hi_s.isdigit()):
                raise DslSyntaxError("bad rand range", args[0].line, args[0].col)
            lo, hi = int(lo_s), int(hi_s)
        elif len(args) == 1:
            lo = hi = _int(args[0], "rand index")
        elif len(args) == 2:
            lo, hi = _int(args[0], "rand index"), _int(args[1], "rand index")
        else:
            raise ArityError("rand takes an index or a range", *p)
        if hi < lo:
            raise DslSyntaxError("empty rand range", *p)
        return Rand(lo, hi, p)
    if head == "msg":
        need(1)
        return Msg(_int(args[0], "message index"), p)
    if head == "query":
        need(1)
        return Query(_parse_expr(args[0]), p)
    if head == "concat":
        return Concat(tuple(_parse_expr(a) for a in args), p)
    if head == "seq":
        if not args:
            raise ArityError("seq needs at least one expression", *p)
        return Seq(tuple(_parse_expr(a) for a in args), p)
    if head == "eq":
        need(2)
        return Eq(_parse_expr(args[0]), _parse_expr(args[1]), p)
    if head == "xor":
        need(2)
        return Xor(_parse_expr(args[0]), _parse_expr(args[1]), p)
    if head == "if":
        need(3)
        return If(_parse_expr(args[0]), _parse_expr(args[1]), _parse_expr(args[2]), p)
    if head == "send":
        need(1)
        return _parse_expr(args[0])
    raise DslSyntaxError(f"unknown form {head!r}", *p)


def _label(tok) -> str:
    if not isinstance(tok, _Tok):
        raise DslSyntaxError("output labels must be atoms or strings", *_pos(tok))
    if tok.kind == "str":
        return tok.text[1:-1]
    if tok.kind == "atom":
        return tok.text
    raise DslSyntaxError("bad output label", tok.line, tok.col)


def parse(text: str) -> ProtocolSpec:
    forms = _read(_tokenize(text))
    if len(forms) != 1 or _head(forms[0]) != "protocol":
        where = _pos(forms[0]) if forms else (1, 1)
        raise DslSyntaxError("expected a single (protocol ...) form", *where)
    top = forms[0]
    kw, i = _keywords(top.items, 1)
    for req in (":kappa", ":answer-bits", ":rounds"):
        if req not in kw:
            raise ArityError(f"protocol needs {req}", top.line, top.col)
    kappa = _int(kw[":kappa"][0], "kappa")
    answer_bits = _int(kw[":answer-bits"][0], "answer-bits")
    n_rounds = _int(kw[":rounds"][0], "rounds")
    name = _label(kw[":name"][0]) if ":name" in kw else ""
    if n_rounds < 1:
        raise DslSyntaxError("rounds must be at least 1", top.line, top.col)
    parties: dict[str, tuple[int, int]] = {}
    programs: dict[int, tuple[Expr, tuple]] = {}
    output_expr, output_labels, output_pos = None, (), None
    for form in top.items[i:]:
        h = _head(form)
        if h in ("alice", "bob"):
            side = "A" if h == "alice" else "B"
            if side in parties:
                raise DslSyntaxError(f"duplicate {h} block", *_pos(form))
            pkw, j = _keywords(form.items, 1)
            rand = _int(pkw[":rand"][0], "rand") if ":rand" in pkw else 0
            n_in = _int(pkw[":inputs"][0], "inputs") if ":inputs" in pkw else 1
            if n_in < 1:
                raise DslSyntaxError("inputs must be at least 1", *_pos(form))
            parties[side] = (rand, n_in)
            for rf in form.items[j:]:
                if _head(rf) != "round":
                    raise DslSyntaxError("expected (round i EXPR)", *_pos(rf))
                if len(rf.items) != 3:
                    raise ArityError("round takes an index and one expression", *_pos(rf))
                r = _int(rf.items[1], "round index")
                if not 1 <= r <= n_rounds:
                    raise DslSyntaxError(f"round {r} outside 1..{n_rounds}", *_pos(rf))
                if ProtocolSpec.speaker(r) != side:
                    raise DslSyntaxError(f"round {r} belongs to the other party", *_pos(rf))
                if r in programs:
                    raise DslSyntaxError(f"duplicate round {r}", *_pos(rf))
                programs[r] = (_parse_expr(rf.items[2]), _pos(rf))
        elif h == "output":
            if len(form.items) < 2:
                raise ArityError("output needs an expression", *_pos(form))
            output_expr = _parse_expr(form.items[1])
            output_labels = tuple(_label(t) for t in form.items[2:])
            output_pos = _pos(form)
        else:
            raise DslSyntaxError(f"unexpected form {h!r}", *_pos(form))
    for r in range(1, n_rounds + 1):
        if r not in programs:
            raise DslSyntaxError(f"no program for round {r}", top.line, top.col)
    a_rand, a_in = parties.get("A", (0, 1))
    b_rand, b_in = parties.get("B", (0, 1))
    spec = ProtocolSpec(
        kappa, answer_bits, n_rounds, a_rand, b_rand, a_in, b_in,
        tuple(programs[r][0] for r in range(1, n_rounds + 1)),
        output_expr, output_labels, name,
    )
    check(spec, output_pos)
    return spec


def load_protocol(path) -> ProtocolSpec:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


# ---------------------------------------------------------------------------
# static checks


def _width(e: Expr, spec: ProtocolSpec, side: str | None, r: int, widths: list[int]) -> int:
    """Bit width of ``e``; side None means the public output expression."""
    p = getattr(e, "pos", (0, 0))
    if isinstance(e, Lit):
        return len(e.bits)
    if isinstance(e, Input):
        if side is None:
            raise DslSyntaxError("output expression may only use public values", *p)
        return spec.input_width(side)
    if isinstance(e, Rand):
        if side is None:
            raise DslSyntaxError("output expression may only use public values", *p)
        if e.hi >= spec.rand_bits(side):
            raise WidthMismatch(f"rand bit {e.hi} beyond tape width {spec.rand_bits(side)}", *p)
        return e.hi - e.lo + 1
    if isinstance(e, Msg):
        if e.round < 1 or e.round >= r:
            raise ForwardReference(f"msg {e.round} is not available in round {r}", *p)
        return widths[e.round - 1]
    if isinstance(e, Query):
        if side is None:
            raise DslSyntaxError("output expression may only use public values", *p)
        w = _width(e.arg, spec, side, r, widths)
        if w != spec.kappa:
            raise WidthMismatch(f"query argument has width {w}, kappa is {spec.kappa}", *p)
        return spec.answer_bits
    if isinstance(e, Concat):
        return sum(_width(x, spec, side, r, widths) for x in e.parts)
    if isinstance(e, Seq):
        ws = [_width(x, spec, side, r, widths) for x in e.parts]
        return ws[-1]
    if isinstance(e, (Eq, Xor)):
        wl = _width(e.left, spec, side, r, widths)
        wr = _width(e.right, spec, side, r, widths)
        if wl != wr:
            raise WidthMismatch(f"operands have widths {wl} and {wr}", *p)
        return 1 if isinstance(e, Eq) else wl
    if isinstance(e, If):
        wc = _width(e.cond, spec, side, r, widths)
        if wc != 1:
            raise WidthMismatch(f"if condition has width {wc}, expected 1", *p)
        wt = _width(e.then, spec, side, r, widths)
        wo = _width(e.other, spec, side, r, widths)
        if wt != wo:
            raise WidthMismatch(f"if branches have widths {wt} and {wo}", *p)
        return wt
    raise TypeError(f"unknown expression {e!r}")


def check(spec: ProtocolSpec, output_pos=None) -> tuple[int, ...]:
    widths: list[int] = []
    for r, prog in enumerate(spec.programs, 1):
        widths.append(_width(prog, spec, spec.speaker(r), r, widths))
    if spec.output_expr is not None:
        _width(spec.output_expr, spec, None, spec.rounds + 1, widths)
    return tuple(widths)


# ---------------------------------------------------------------------------
# evaluation


class NeedQuery(Exception):
    """Raised by an oracle callback to ask the caller to fix an answer first."""

    def __init__(self, query: str):
        self.query = query
        super().__init__(query)


@dataclass
class _Ctx:
    input_bits: str
    tape: str
    msgs: Sequence[str]
    oracle: Callable[[str], str]
    queries: list


def _xor(a: str, b: str) -> str:
    return "".join("1" if p != q else "0" for p, q in zip(a, b))


def _compile(e: Expr) -> Callable[[_Ctx], str]:
    if isinstance(e, Lit):
        bits = e.bits
        return lambda c: bits
    if isinstance(e, Input):
        return lambda c: c.input_bits
    if isinstance(e, Rand):
        lo, hi = e.lo, e.hi + 1
        return lambda c: c.tape[lo:hi]
    if isinstance(e, Msg):
        j = e.round - 1
        return lambda c: c.msgs[j]
    if isinstance(e, Query):
        arg = _compile(e.arg)

        def q(c: _Ctx) -> str:
            key = arg(c)
            ans = c.oracle(key)
            if key not in c.queries:
                c.queries.append(key)
            return ans

        return q
    if isinstance(e, Concat):
        parts = [_compile(x) for x in e.parts]
        return lambda c: "".join(p(c) for p in parts)
    if isinstance(e, Seq):
        parts = [_compile(x) for x in e.parts]

        def s(c: _Ctx) -> str:
            out = ""
            for p in parts:
                out = p(c)
            return out

        return s
    if isinstance(e, Eq):
        l, r = _compile(e.left), _compile(e.right)
        return lambda c: "1" if l(c) == r(c) else "0"
    if isinstance(e, Xor):
        l, r = _compile(e.left), _compile(e.right)
        return lambda c: _xor(l(c), r(c))
    if isinstance(e, If):
        cnd, t, o = _compile(e.cond), _compile(e.then), _compile(e.other)
        return lambda c: t(c) if cnd(c) == "1" else o(c)
    raise TypeError(f"unknown expression {e!r}")


@dataclass
class _Compiled:
    widths: tuple[int, ...]
    rounds: tuple[Callable[[_Ctx], str], ...]
    out_fn: Callable[[_Ctx], str] | None

    def output(self, transcript: Sequence[str]) -> str:
        ctx = _Ctx("", "", transcript, _no_oracle, [])
        return self.out_fn(ctx)


def _no_oracle(q: str) -> str:
    raise OracleUnavailable(q)


_CACHE: dict[int, tuple[ProtocolSpec, _Compiled]] = {}


def _compiled(spec: ProtocolSpec) -> _Compiled:
    hit = _CACHE.get(id(spec))
    if hit is not None and hit[0] is spec:
        return hit[1]
    comp = _Compiled(
        check(spec),
        tuple(_compile(p) for p in spec.programs),
        _compile(spec.output_expr) if spec.output_expr is not None else None,
    )
    _CACHE[id(spec)] = (spec, comp)
    return comp


def input_bits(spec: ProtocolSpec, side: str, index: int) -> str:
    return format(index, f"0{spec.input_width(side)}b")


def evaluate_round(
    spec: ProtocolSpec,
    r: int,
    input_index: int,
    tape: str,
    msgs: Sequence[str],
    oracle: Callable[[str], str],
) -> tuple[str, list[str]]:
    """Message of round ``r`` and the queries made, in first-use order.

    ``oracle`` may raise :class:`NeedQuery` (lazy branching) or
    :class:`OracleUnavailable` (replay without an answer).
    """
    side = spec.speaker(r)
    ctx = _Ctx(input_bits(spec, side, input_index), tape, msgs, oracle, [])
    bits = _compiled(spec).rounds[r - 1](ctx)
    return bits, ctx.queries


@dataclass(frozen=True)
class PartyView:
    """What one party knows: input, tape, the transcript so far and its oracle pairs."""

    owner: str
    input: int
    tape: str
    transcript: tuple[str, ...]
    pairs: tuple[tuple[str, str], ...] = ()

    def queries(self) -> frozenset[str]:
        return frozenset(q for q, _ in self.pairs)


def next_message(
    spec: ProtocolSpec,
    side: str,
    r: int,
    view: PartyView,
    oracle: Mapping[str, str] | Callable[[str], str] | None = None,
) -> tuple[str, list[tuple[str, str]]]:
    """Next message and the query-answer pairs it produced that are new to the view."""
    if spec.speaker(r) != side:
        raise ValueError(f"round {r} is not spoken by {side}")
    known = dict(view.pairs)

    def lookup(q: str) -> str:
        if q in known:
            return known[q]
        if oracle is None:
            raise OracleUnavailable(q)
        ans = oracle(q) if callable(oracle) else oracle.get(q)
        if ans is None:
            raise OracleUnavailable(q)
        known[q] = ans
        return ans

    bits, queries = evaluate_round(spec, r, view.input, view.tape, view.transcript, lookup)
    old = {q for q, _ in view.pairs}
    return bits, [(q, known[q]) for q in queries if q not in old]


# ---------------------------------------------------------------------------
# printer


def format_expr(e: Expr) -> str:
    if isinstance(e, Lit):
        return "#b" + e.bits
    if isinstance(e, Input):
        return "input"
    if isinstance(e, Rand):
        return f"(rand {e.lo})" if e.lo == e.hi else f"(rand {e.lo}..{e.hi})"
    if isinstance(e, Msg):
        return f"(msg {e.round})"
    if isinstance(e, Query):
        return f"(query {format_expr(e.arg)})"
    if isinstance(e, Concat):
        return "(concat" + "".join(" " + format_expr(p) for p in e.parts) + ")"
    if isinstance(e, Seq):
        return "(seq" + "".join(" " + format_expr(p) for p in e.parts) + ")"
    if isinstance(e, Eq):
        return f"(eq {format_expr(e.left)} {format_expr(e.right)})"
    if isinstance(e, Xor):
        return f"(xor {format_expr(e.left)} {format_expr(e.right)})"
    if isinstance(e, If):
        return f"(if {format_expr(e.cond)} {format_expr(e.then)} {format_expr(e.other)})"
    raise TypeError(f"unknown expression {e!r}")


def format_protocol(spec: ProtocolSpec) -> str:
    head = f"(protocol :kappa {spec.kappa} :answer-bits {spec.answer_bits} :rounds {spec.rounds}"
    if spec.name:
        head += f' :name "{spec.name}"'
    lines = [head]
    for side, word in (("A", "alice"), ("B", "bob")):
        lines.append(f"  ({word} :rand {spec.rand_bits(side)} :inputs {spec.n_inputs(side)}")
        for r, prog in enumerate(spec.programs, 1):
            if spec.speaker(r) == side:
                lines.append(f"    (round {r} {format_expr(prog)})")
        lines[-1] += ")"
    if spec.output_expr is not None:
        labels = " ".join(f'"{l}"' for l in spec.output_labels)
        lines.append(f"  (output {format_expr(spec.output_expr)}" + (f" {labels}" if labels else "") + ")")
    lines[-1] += ")"
    return "\n".join(lines) + "\n"
