"""Tableau-based model checking against a concrete Kripke structure.

The satisfiability engine runs unchanged except that state prefixes are
pinned to states of the checked model:

- prefix 1 is mapped to the checked point;
- when a diamond introduces a fresh successor prefix under a prefix
  mapped to v, the new prefix is mapped to some state reachable from v
  (one backtracking choice per successor, tried in state order);
- every literal entry must hold in the model at the state its prefix is
  mapped to, else the branch rejects;
- box entries at model prefix 1 speak about the real model, so an extra
  expansion gives every not-yet-covered successor of the current state a
  fresh mapped prefix carrying all prefix-1 box bodies.  It runs eagerly
  right after saturation: its side condition only shrinks, so this
  cannot lose branches.

The fresh-prefix mapping discipline is applied at every model prefix,
with prefix-1 assignments constrained by the model's transitions.  Two
fresh prefixes at the same state may map to the same model state;
nothing forbids it, and the extra-expansion side condition (no already
mapped sibling) constrains only that expansion itself.

This module also builds the classic hardness instance: satisfiability
of a variable-free basic modal formula psi reduces to checking
`Er psi` on a single empty-valuation state with a self-loop, because
every variable-free model refines that structure by mapping all states
to it.  The grammar has no truth constants, so the variable-free test
vectors live in a tiny constant grammar of their own (`top`/`bot`) and
are lowered over a reserved atom when handed to the main pipeline; that
is a harness convention, not part of the formula language.
"""

from .formula import (
    And,
    Atom,
    Box,
    Diamond,
    ExistsR,
    Formula,
    FragmentViolation,
    NegAtom,
    Or,
    in_existential_fragment,
    render,
)
from .kripke import KripkeModel, PointedModel
from .solver import SolverOptions, _Engine

__all__ = [
    "check",
    "reduce_k_sat",
    "InvalidInput",
    "lower_const",
    "parse_const",
    "render_const",
    "enumerate_const_formulas",
]


class InvalidInput(Exception):
    """The reduction only accepts variable-free constant-grammar formulas."""


class _CheckEngine(_Engine):
    def __init__(self, opts, pointed):
        super().__init__(opts)
        self.m = pointed.model
        self.u = pointed.point

    def _initial_ctx(self):
        return {(1,): self.u}

    def _literal_ok(self, entry, ctx):
        _, sigma, f = entry
        val = self.m.valuation[ctx[sigma]]
        return f.name in val if isinstance(f, Atom) else f.name not in val

    def _dia_contexts(self, sigma, sigma_i, ctx):
        return [{**ctx, sigma_i: a} for a in self.m.successors(ctx[sigma])]

    def _post_saturation(self, P, M, mu, sigma, depth, ctx, contrib):
        boxes1 = [e for e in P if e[0] == (1,) and isinstance(e[2], Box)]
        if not boxes1:
            yield from super()._post_saturation(P, M, mu, sigma, depth, ctx, contrib)
            return
        n = len(sigma)
        covered = {ctx[s] for s in ctx if len(s) == n + 1 and s[:n] == sigma}
        targets = [a for a in self.m.successors(ctx[sigma]) if a not in covered]
        yield from self._box1_phase(
            P, M, boxes1, targets, 0, mu, sigma, depth, ctx, contrib
        )

    def _box1_phase(self, P, M, boxes1, targets, j, mu, sigma, depth, ctx, contrib):
        if j == len(targets):
            yield from super()._post_saturation(P, M, mu, sigma, depth, ctx, contrib)
            return
        i = self._fresh()
        sigma_i = sigma + (i,)
        ctx2 = {**ctx, sigma_i: targets[j]}
        entries = []
        for e in boxes1:
            concl = ((1,), sigma_i, e[2].body)
            self._emit("BOX1", e, [concl])
            entries.append(concl)
        childP = self._child_P(entries, ctx2)
        if childP is None:
            return
        got = None
        for _, child_contrib in self._activate(
            childP, frozenset(), (1,), sigma_i, depth + 1, ctx2
        ):
            got = child_contrib
            break
        if got is None:
            return
        yield from self._box1_phase(
            P, M, boxes1, targets, j + 1, mu, sigma, depth, ctx2, contrib + got
        )


def check(a, f, opts=None):
    """True iff f holds at the pointed model a.

    Raises FragmentViolation on universal quantifiers and ResourceLimit
    when the options' budgets run out.
    """
    if not in_existential_fragment(f):
        raise FragmentViolation(f"universal quantifier in {render(f)}")
    engine = _CheckEngine(opts or SolverOptions(), a)
    return engine.solve([((1,), (1,), f)], (1,), (1,), frozenset()) is not None


# --- the hardness instance ----------------------------------------------------

# Variable-free test grammar: ("top",) | ("bot",) | ("and", a, b)
# | ("or", a, b) | ("dia", a) | ("box", a).
_CONST_ARITY = {"top": 0, "bot": 0, "dia": 1, "box": 1, "and": 2, "or": 2}
_LOWER_ATOM = "z"


def _validate_const(t):
    if (
        not isinstance(t, tuple)
        or not t
        or t[0] not in _CONST_ARITY
        or len(t) != _CONST_ARITY[t[0]] + 1
    ):
        raise InvalidInput(f"not a variable-free constant formula: {t!r}")
    for sub in t[1:]:
        _validate_const(sub)


def lower_const(t):
    """Constant-grammar formula to a plain formula over the reserved atom:
    top becomes (z | !z), bot becomes (z & !z)."""
    _validate_const(t)
    tag = t[0]
    if tag == "top":
        return Or(Atom(_LOWER_ATOM), NegAtom(_LOWER_ATOM))
    if tag == "bot":
        return And(Atom(_LOWER_ATOM), NegAtom(_LOWER_ATOM))
    if tag == "dia":
        return Diamond(lower_const(t[1]))
    if tag == "box":
        return Box(lower_const(t[1]))
    if tag == "and":
        return And(lower_const(t[1]), lower_const(t[2]))
    return Or(lower_const(t[1]), lower_const(t[2]))


def reduce_k_sat(psi):
    """Build the model-checking instance equivalent to satisfiability of the
    variable-free formula psi: a single state with a self-loop and no
    atoms, paired with `Er` over the lowered psi.

    psi must come from the constant grammar; formulas with atoms or
    quantifiers are rejected.
    """
    if isinstance(psi, Formula):
        raise InvalidInput(
            f"{render(psi)} is not variable-free; build it from the constant grammar"
        )
    lowered = lower_const(psi)
    m = KripkeModel(["s"], [("s", "s")], {})
    return PointedModel(m, "s"), ExistsR(lowered)


def render_const(t):
    _validate_const(t)
    tag = t[0]
    if tag == "top":
        return "top"
    if tag == "bot":
        return "bot"
    if tag == "dia":
        return "<>" + render_const(t[1])
    if tag == "box":
        return "[]" + render_const(t[1])
    op = "&" if tag == "and" else "|"
    return f"({render_const(t[1])} {op} {render_const(t[2])})"


def parse_const(text):
    """Parse the constant grammar: `top`, `bot`, `&`, `|`, `<>`, `[]`, parens."""
    from .formula import ParseError, _tokenize

    tokens = _tokenize(text)
    pos = [0]

    def peek():
        return tokens[pos[0]]

    def advance():
        tok = tokens[pos[0]]
        pos[0] += 1
        return tok

    def or_():
        f = and_()
        while peek()[0] == "pipe":
            advance()
            f = ("or", f, and_())
        return f

    def and_():
        f = unary()
        while peek()[0] == "amp":
            advance()
            f = ("and", f, unary())
        return f

    def unary():
        kind, value, offset = peek()
        if kind == "dia":
            advance()
            return ("dia", unary())
        if kind == "box":
            advance()
            return ("box", unary())
        if kind == "atom" and value in ("top", "bot"):
            advance()
            return (value,)
        if kind == "lp":
            advance()
            f = or_()
            kind2, _, offset2 = peek()
            if kind2 != "rp":
                raise ParseError("unbalanced parenthesis", offset2, (")",))
            advance()
            return f
        raise ParseError(
            "expected a variable-free formula", offset, ("top", "bot", "<>", "[]", "(")
        )

    f = or_()
    kind, value, offset = peek()
    if kind != "eof":
        raise ParseError(f"unexpected {value!r}", offset, ("&", "|", "end of input"))
    return f


_const_cache = {}


def _const_of_size(n):
    got = _const_cache.get(n)
    if got is not None:
        return got
    if n <= 0:
        out = []
    elif n == 1:
        out = [("top",), ("bot",)]
    else:
        out = []
        for tag in ("dia", "box"):
            for body in _const_of_size(n - 1):
                out.append((tag, body))
        for tag in ("and", "or"):
            for i in range(1, n - 1):
                for left in _const_of_size(i):
                    for right in _const_of_size(n - 1 - i):
                        out.append((tag, left, right))
    _const_cache[n] = out
    return out


def enumerate_const_formulas(max_size):
    """All constant-grammar formulas of size 1..max_size, canonical order."""
    for n in range(1, max_size + 1):
        yield from _const_of_size(n)
