"""Deterministic formula enumeration and seeded random generation.

Size means node count.  Enumeration is exhaustive and canonically
ordered: ascending size, leaves before negated leaves, unary operators
before binary ones, left split sizes ascending.  The same inputs always
produce the same sequence, which the fuzzing harness and the exhaustive
agreement suites rely on.
"""

from .formula import And, Atom, Box, Diamond, ExistsR, NegAtom, Or

_UNARY = (Diamond, Box, ExistsR)
_UNARY_NO_EXR = (Diamond, Box)
_BINARY = (And, Or)

_cache = {}


def formulas_of_size(n, atom_names, include_exists=True):
    """All formulas with exactly n nodes over the given atoms, as a list."""
    atom_names = tuple(atom_names)
    key = (n, atom_names, include_exists)
    got = _cache.get(key)
    if got is not None:
        return got
    if n <= 0:
        out = []
    elif n == 1:
        out = [Atom(a) for a in atom_names] + [NegAtom(a) for a in atom_names]
    else:
        out = []
        unary = _UNARY if include_exists else _UNARY_NO_EXR
        for op in unary:
            for body in formulas_of_size(n - 1, atom_names, include_exists):
                out.append(op(body))
        for op in _BINARY:
            for i in range(1, n - 1):
                for left in formulas_of_size(i, atom_names, include_exists):
                    for right in formulas_of_size(n - 1 - i, atom_names, include_exists):
                        out.append(op(left, right))
    _cache[key] = out
    return out


def enumerate_formulas(max_size, atom_names, include_exists=True):
    """Yield every formula of size 1..max_size in canonical order."""
    for n in range(1, max_size + 1):
        yield from formulas_of_size(n, atom_names, include_exists)


def count_formulas(max_size, atom_names, include_exists=True):
    return sum(
        len(formulas_of_size(n, atom_names, include_exists)) for n in range(1, max_size + 1)
    )


def random_formula(rng, size, atom_names, include_exists=True):
    """One uniformly-shaped random formula with exactly `size` nodes.

    Deterministic given the rng state; the distribution picks the
    connective kind uniformly among those feasible at each size.
    """
    atom_names = tuple(atom_names)
    if size <= 1:
        name = rng.choice(atom_names)
        return rng.choice((Atom, NegAtom))(name)
    kinds = list(_UNARY if include_exists else _UNARY_NO_EXR)
    if size >= 3:
        kinds += list(_BINARY)
    op = rng.choice(kinds)
    if op in _BINARY:
        i = rng.randint(1, size - 2)
        return op(
            random_formula(rng, i, atom_names, include_exists),
            random_formula(rng, size - 1 - i, atom_names, include_exists),
        )
    return op(random_formula(rng, size - 1, atom_names, include_exists))
