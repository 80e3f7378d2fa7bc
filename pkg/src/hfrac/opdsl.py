"""A small language for chains of fractional operators.

Grammar (whitespace is ignored)::

    chain := term ("." term)*
    term  := "I[" num "]"            Riemann-Liouville integral
           | "IK[" num "," num "]"   power-weighted integral I^{gamma,mu}
           | "D[" num "]"            Riemann-Liouville derivative
           | "D[" num "," num "]"    Hilfer derivative D^{mu,nu}
           | "H[" ident "]"          registered H-kernel operator
           | "f:" ident              applied test function (last term only)

Chains are written left to right and applied right to left, so
``H[ml] . I[0.5] . f:const1`` means ``H(I^0.5 1)``. Orders are decimal
literals and are kept as :class:`decimal.Decimal` so that rewriting stays exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from decimal import Decimal, InvalidOperation

from hfrac import compose
from hfrac.errors import DomainError, ParseError, RewriteError
from hfrac.fracops import (
    Derivative,
    Hilfer,
    HKernelOp,
    Integral,
    KIntegral,
    Kernel,
    TestFunction,
    apply_chain,
    default_corpus,
)
from hfrac.quadrature import OPERATOR_TOL

Span = tuple[int, int]


# ------------------------------------------------------------------ AST


@dataclass(frozen=True)
class INode:
    mu: Decimal
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class IKNode:
    gamma: Decimal
    mu: Decimal
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class DNode:
    mu: Decimal
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class HilferNode:
    mu: Decimal
    nu: Decimal
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class HNode:
    name: str
    span: Span = field(default=(0, 0), compare=False)


Node = INode | IKNode | DNode | HilferNode | HNode


@dataclass(frozen=True)
class OpChain:
    """Operators in source order plus an optional applied function name."""

    ops: tuple[Node, ...]
    function: str | None = None

    def __post_init__(self) -> None:
        if not self.ops:
            raise DomainError("an operator chain needs at least one operator")

    def __len__(self) -> int:
        return len(self.ops)


@dataclass
class Registry:
    """Named H-kernel operators and test functions referenced by chains."""

    ops: dict[str, HKernelOp] = field(default_factory=dict)
    functions: dict[str, TestFunction] = field(default_factory=default_corpus)

    def derive(self, root: str, op: HKernelOp) -> str:
        """Register ``op`` as ``root#s<k>``, reusing an existing equal entry."""
        base = root.split("#", 1)[0]
        k = 1
        while True:
            name = f"{base}#s{k}"
            existing = self.ops.get(name)
            if existing is None:
                self.ops[name] = op
                return name
            if existing == op:
                return name
            k += 1


# --------------------------------------------------------------- parser

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<kw>IK|I|D|H|f)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_#]*)
  | (?P<punct>[\[\],.:])
    """,
    re.VERBOSE,
)


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", *_position(text, pos))
        kind = m.lastgroup
        value = m.group()
        # keywords only count when followed by their bracket or colon
        if kind == "kw":
            nxt = re.match(r"\s*([\[:])", text[m.end() :])
            if nxt is None or (value == "f") != (nxt.group(1) == ":"):
                ident = re.match(r"[A-Za-z_][A-Za-z0-9_#]*", text[pos:])
                kind, value = "ident", ident.group()
        if kind != "ws":
            out.append((kind, value, pos))
        pos += len(value)
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, registry: Registry | None) -> None:
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.registry = registry

    def error(self, message: str, offset: int | None = None) -> ParseError:
        off = self.toks[self.i][2] if offset is None else offset
        return ParseError(message, *_position(self.text, off))

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def take(self, value: str) -> int:
        kind, v, off = self.peek()
        if v != value or kind == "ident":
            shown = v or "end of input"
            raise self.error(f"expected {value!r}, found {shown!r}")
        self.i += 1
        return off

    def number(self) -> Decimal:
        kind, v, off = self.peek()
        if kind != "num":
            raise self.error(f"expected a number, found {v or 'end of input'!r}")
        self.i += 1
        try:
            return Decimal(v)
        except InvalidOperation:  # pragma: no cover - the regex admits only valid literals
            raise self.error(f"malformed number {v!r}", off) from None

    def ident(self) -> tuple[str, int]:
        kind, v, off = self.peek()
        if kind not in ("ident", "kw"):
            raise self.error(f"expected an identifier, found {v or 'end of input'!r}")
        self.i += 1
        return v, off

    def chain(self) -> OpChain:
        ops: list[Node] = []
        function = None
        while True:
            kind, v, start = self.peek()
            if kind == "kw" and v == "f":
                self.i += 1
                self.take(":")
                name, off = self.ident()
                if self.registry is not None and name not in self.registry.functions:
                    raise self.error(f"unknown test function {name!r}", off)
                function = name
                if not ops:
                    raise self.error("an applied function needs at least one operator", start)
                if self.peek()[0] != "eof":
                    raise self.error("the applied function must be the last term")
                break
            ops.append(self.term())
            if self.peek()[0] == "eof":
                break
            self.take(".")
        return OpChain(tuple(ops), function)

    def term(self) -> Node:
        kind, v, start = self.peek()
        if kind != "kw" or v == "f":
            raise self.error(f"expected an operator, found {v or 'end of input'!r}")
        self.i += 1
        self.take("[")
        if v == "H":
            name, off = self.ident()
            if self.registry is not None and name not in self.registry.ops:
                raise self.error(f"unknown H operator {name!r}", off)
            end = self.take("]") + 1
            return HNode(name, (start, end))
        first = self.number()
        second = None
        if v in ("IK", "D") and self.peek()[1] == ",":
            self.take(",")
            second = self.number()
        elif v == "IK":
            raise self.error("IK takes two numbers")
        end = self.take("]") + 1
        span = (start, end)
        try:
            if v == "I":
                node: Node = INode(first, span)
            elif v == "IK":
                node = IKNode(first, second, span)
            elif second is None:
                node = DNode(first, span)
            else:
                node = HilferNode(first, second, span)
            _check_node(node)
        except DomainError as exc:
            raise self.error(str(exc), start) from None
        return node


def _check_node(node: Node) -> None:
    if isinstance(node, (INode, DNode)) and not node.mu > 0:
        raise DomainError("order must be positive")
    if isinstance(node, IKNode):
        if not node.mu > 0:
            raise DomainError("order must be positive")
        if not node.gamma > -1:
            raise DomainError("gamma must exceed -1")
    if isinstance(node, HilferNode):
        if not 0 < node.mu < 1:
            raise DomainError("Hilfer order must lie in (0, 1)")
        if not 0 <= node.nu <= 1:
            raise DomainError("Hilfer type must lie in [0, 1]")


def parse(text: str, registry: Registry | None = None) -> OpChain:
    """Parse ``text`` into an :class:`OpChain`.

    With a registry, ``H[...]`` and ``f:...`` names must be registered.

    Raises
    ------
    ParseError
        With 1-based line and column of the offending token.
    """
    return _Parser(text, registry).chain()


# -------------------------------------------------------------- printer


def _num(d: Decimal) -> str:
    text = format(d.normalize(), "f")
    return "0" if text in ("-0", "") else text


def _pretty_node(node: Node) -> str:
    if isinstance(node, INode):
        return f"I[{_num(node.mu)}]"
    if isinstance(node, IKNode):
        return f"IK[{_num(node.gamma)}, {_num(node.mu)}]"
    if isinstance(node, DNode):
        return f"D[{_num(node.mu)}]"
    if isinstance(node, HilferNode):
        return f"D[{_num(node.mu)}, {_num(node.nu)}]"
    return f"H[{node.name}]"


def pretty(chain: OpChain) -> str:
    """Canonical text form; ``parse(pretty(c)) == c``."""
    parts = [_pretty_node(n) for n in chain.ops]
    if chain.function is not None:
        parts.append(f"f:{chain.function}")
    return " . ".join(parts)


# -------------------------------------------------------------- rewrite


@dataclass(frozen=True)
class RewriteStep:
    rule: str
    before: OpChain
    after: OpChain


@dataclass
class RewriteTrace:
    steps: list[RewriteStep] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def replay(self, chain: OpChain) -> OpChain:
        """Re-apply the recorded steps; checks that each one starts where the last ended."""
        for step in self.steps:
            if step.before != chain:
                raise RewriteError(step.rule, "trace does not continue from the given chain")
            chain = step.after
        return chain


# rule name -> (shift rule key, human description)
RULES = {
    "H.I": ("H_after_I", "H o I^mu -> H with (n+1, p+1, q+1), beta + mu"),
    "I.H": ("I_after_H", "I^mu o H -> H with (n+1, p+1, q+1), beta + mu"),
    "D.H": ("D_after_H", "D^mu o H -> H with (n+2, p+2, q+2), beta - mu"),
    "H.D": ("H_after_D", "H o D^mu -> H with (n+2, p+2, q+2), beta - mu"),
    "Hilfer.H": ("Hilfer_after_H", "D^{mu,nu} o H -> H with (n+3, p+3, q+3), beta - mu"),
    "I.I": ("", "I^mu o I^nu -> I^{mu+nu}"),
}


def _pair_rule(left: Node, right: Node) -> str | None:
    if isinstance(left, INode) and isinstance(right, INode):
        return "I.I"
    if isinstance(left, HNode) and isinstance(right, INode):
        return "H.I"
    if isinstance(left, INode) and isinstance(right, HNode):
        return "I.H"
    if isinstance(left, DNode) and isinstance(right, HNode):
        return "D.H"
    if isinstance(left, HNode) and isinstance(right, DNode):
        return "H.D"
    if isinstance(left, HilferNode) and isinstance(right, HNode):
        return "Hilfer.H"
    return None


def _apply_rule(rule: str, left: Node, right: Node, registry: Registry) -> Node:
    span = (left.span[0], right.span[1])
    if rule == "I.I":
        return INode(left.mu + right.mu, span)
    h_node = left if isinstance(left, HNode) else right
    other = right if h_node is left else left
    op = registry.ops.get(h_node.name)
    if op is None:
        raise RewriteError(rule, f"unknown H operator {h_node.name!r}")
    shift = compose.SHIFT_RULES[RULES[rule][0]].apply
    try:
        if isinstance(other, HilferNode):
            new = shift(op, float(other.mu), float(other.nu))
        else:
            new = shift(op, float(other.mu))
    except DomainError as exc:
        raise RewriteError(rule, str(exc)) from exc
    return HNode(registry.derive(h_node.name, new), span)


def _find(ops: tuple[Node, ...], wanted) -> tuple[int, str] | None:
    for i in range(len(ops) - 1):
        rule = _pair_rule(ops[i], ops[i + 1])
        if rule is not None and wanted(rule):
            return i, rule
    return None


def simplify(chain: OpChain, registry: Registry) -> tuple[OpChain, RewriteTrace]:
    """Rewrite adjacent operator pairs into single nodes until none applies.

    Semigroup merges ``I . I`` are applied first, then the leftmost pair
    matching a composition rule. Each step shortens the chain by one, so at
    most ``len(chain) - 1`` steps are taken. Derived H operators are added to
    ``registry`` under ``<root>#s<k>`` names.
    """
    trace = RewriteTrace()
    for i in range(len(chain.ops) - 1):
        a, b = chain.ops[i], chain.ops[i + 1]
        if isinstance(a, IKNode) or isinstance(b, IKNode):
            if isinstance(a, HNode) or isinstance(b, HNode):
                trace.notes.append(
                    f"{_pretty_node(a)} . {_pretty_node(b)}: kernel-form only, left as is"
                )
    while True:
        hit = _find(chain.ops, lambda r: r == "I.I") or _find(chain.ops, lambda r: True)
        if hit is None:
            return chain, trace
        i, rule = hit
        node = _apply_rule(rule, chain.ops[i], chain.ops[i + 1], registry)
        after = replace(chain, ops=chain.ops[:i] + (node,) + chain.ops[i + 2 :])
        trace.steps.append(RewriteStep(rule, chain, after))
        chain = after


# ------------------------------------------------------------ evaluation


def to_operators(chain: OpChain, registry: Registry) -> list:
    out = []
    for node in chain.ops:
        if isinstance(node, INode):
            out.append(Integral(float(node.mu)))
        elif isinstance(node, IKNode):
            out.append(KIntegral(float(node.gamma), float(node.mu)))
        elif isinstance(node, DNode):
            out.append(Derivative(float(node.mu)))
        elif isinstance(node, HilferNode):
            out.append(Hilfer(float(node.mu), float(node.nu)))
        else:
            op = registry.ops.get(node.name)
            if op is None:
                raise DomainError(f"unknown H operator {node.name!r}")
            out.append(Kernel(op))
    return out


def evaluate(
    chain: OpChain, x, registry: Registry, a: float | None = None, tol: float = OPERATOR_TOL
):
    """Numerical value of the composition at ``x`` (scalar or array).

    The base point is taken from the chain's H operators, else ``a``
    (default 0).
    """
    if chain.function is None:
        raise DomainError("the chain has no applied function (append 'f:<name>')")
    f = registry.functions.get(chain.function)
    if f is None:
        raise DomainError(f"unknown test function {chain.function!r}")
    ops = to_operators(chain, registry)
    bases = {k.op.a for k in ops if isinstance(k, Kernel)}
    if len(bases) > 1:
        raise DomainError("H operators in one chain must share the base point")
    base = bases.pop() if bases else (0.0 if a is None else a)
    return apply_chain(ops, f, base, x, tol)
