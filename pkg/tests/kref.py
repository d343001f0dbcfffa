"""Reference semantics for the quantifier-free basic modal fragment.

k_eval is the textbook truth recursion.  k_sat_bounded decides
satisfiability within the bounded tree class (depth = modal nesting,
branching = diamond count) by iterating the set of realizable truth
assignments level by level.  Kept free of any solver or oracle code on
purpose: this is the independent side of the regression checks.
"""

from itertools import combinations

from rmlsat.formula import (
    And,
    Atom,
    Box,
    Diamond,
    NegAtom,
    Or,
    atoms,
    count_diamonds,
    metrics,
    render,
    size,
    subformulas,
)


def k_eval(model, state, f):
    if isinstance(f, Atom):
        return f.name in model.valuation[state]
    if isinstance(f, NegAtom):
        return f.name not in model.valuation[state]
    if isinstance(f, And):
        return k_eval(model, state, f.left) and k_eval(model, state, f.right)
    if isinstance(f, Or):
        return k_eval(model, state, f.left) or k_eval(model, state, f.right)
    if isinstance(f, Diamond):
        return any(k_eval(model, t, f.body) for t in model.successors(state))
    if isinstance(f, Box):
        return all(k_eval(model, t, f.body) for t in model.successors(state))
    raise ValueError(f"not a basic modal formula: {render(f)}")


def _truth_set(subs, val, witnessed, violated):
    true = set()
    for g in subs:
        if isinstance(g, Atom):
            ok = g.name in val
        elif isinstance(g, NegAtom):
            ok = g.name not in val
        elif isinstance(g, And):
            ok = g.left in true and g.right in true
        elif isinstance(g, Or):
            ok = g.left in true or g.right in true
        elif isinstance(g, Diamond):
            ok = g.body in witnessed
        elif isinstance(g, Box):
            ok = g.body not in violated
        else:
            raise ValueError(f"not a basic modal formula: {render(g)}")
        if ok:
            true.add(g)
    return frozenset(true)


def k_sat_bounded(f):
    """Satisfiability of quantifier-free f over trees of depth at most its
    modal nesting and branching at most its diamond count."""
    subs = sorted(subformulas(f), key=lambda g: (size(g), render(g)))
    names = atoms(f)
    vals = [frozenset(c) for r in range(len(names) + 1) for c in combinations(names, r)]
    depth = metrics(f).d_diamond
    width = count_diamonds(f)

    level = {_truth_set(subs, v, frozenset(), frozenset()) for v in vals}
    for _ in range(depth):
        pairs = {(frozenset(), frozenset())}
        for _pick in range(width):
            grown = set(pairs)
            for wit, vio in pairs:
                for t in level:
                    grown.add(
                        (
                            wit | {g.body for g in subs if isinstance(g, Diamond) and g.body in t},
                            vio | {g.body for g in subs if isinstance(g, Box) and g.body not in t},
                        )
                    )
            if grown == pairs:
                break
            pairs = grown
        nxt = set(level)
        for v in vals:
            for wit, vio in pairs:
                nxt.add(_truth_set(subs, v, wit, vio))
        if nxt == level:
            break
        level = nxt
    return any(f in t for t in level)
