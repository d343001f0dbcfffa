"""Finite Kripke structures, refinement relations, unravelling, restrictions.

A refinement mapping from M to M2 is a nonempty relation over their
states such that related states carry identical valuations (atom
condition) and every transition on the M2 side maps back to a
transition on the M side (back condition).  A bisimulation is a
relation that is a refinement mapping in both directions.  A pointed
model (M2, s2) refines (M, s) when some refinement mapping contains
(s, s2); equivalently M2 is a restriction of a model bisimilar to M,
which is what the unravel/restriction machinery below exploits.

Model file format (JSON): an object with "states" (list of strings),
"transitions" (list of [from, to] pairs), "valuation" (state -> list of
atom names; missing states default to the empty valuation) and an
optional "point".
"""

import json

__all__ = [
    "KripkeModel",
    "PointedModel",
    "RefinementRelation",
    "StateNotFound",
    "NotATree",
    "verify_refinement_mapping",
    "greatest_refinement",
    "is_bisimilar",
    "unravel",
    "enumerate_root_restrictions",
    "model_from_dict",
    "model_to_dict",
    "pointed_from_dict",
    "load_model",
    "to_dot",
]


class StateNotFound(Exception):
    """A state identifier does not belong to the model it was used with."""


class NotATree(Exception):
    """The operation requires a tree rooted at the point."""


class KripkeModel:
    """Immutable finite transition structure with an atom valuation.

    states are opaque strings; transitions is any iterable of (from, to)
    pairs over them; valuation maps states to iterables of atom names
    (missing states get the empty set).
    """

    __slots__ = ("states", "transitions", "valuation", "_succ")

    def __init__(self, states, transitions, valuation=None):
        self.states = tuple(sorted(set(states)))
        stateset = set(self.states)
        trans = set()
        for s, t in transitions:
            if s not in stateset or t not in stateset:
                raise StateNotFound(f"transition ({s!r}, {t!r}) leaves the state set")
            trans.add((s, t))
        self.transitions = frozenset(trans)
        valuation = valuation or {}
        for s in valuation:
            if s not in stateset:
                raise StateNotFound(f"valuation mentions unknown state {s!r}")
        self.valuation = {
            s: frozenset(valuation.get(s, ())) for s in self.states
        }
        succ = {s: [] for s in self.states}
        for s, t in sorted(trans):
            succ[s].append(t)
        self._succ = {s: tuple(ts) for s, ts in succ.items()}

    def successors(self, s):
        try:
            return self._succ[s]
        except KeyError:
            raise StateNotFound(f"unknown state {s!r}") from None

    def __eq__(self, other):
        return (
            isinstance(other, KripkeModel)
            and self.states == other.states
            and self.transitions == other.transitions
            and self.valuation == other.valuation
        )

    def __hash__(self):
        return hash(
            (self.states, self.transitions, tuple(sorted(self.valuation.items())))
        )

    def __repr__(self):
        return f"KripkeModel(states={len(self.states)}, transitions={len(self.transitions)})"


class PointedModel:
    """A model with a designated state."""

    __slots__ = ("model", "point")

    def __init__(self, model, point):
        if point not in model.valuation:
            raise StateNotFound(f"point {point!r} not a state")
        self.model = model
        self.point = point

    def __eq__(self, other):
        return (
            isinstance(other, PointedModel)
            and self.model == other.model
            and self.point == other.point
        )

    def __hash__(self):
        return hash((self.model, self.point))

    def __repr__(self):
        return f"PointedModel(point={self.point!r}, {self.model!r})"


class RefinementRelation:
    """A set of (source state, target state) pairs."""

    __slots__ = ("pairs",)

    def __init__(self, pairs):
        self.pairs = frozenset(tuple(p) for p in pairs)

    def __bool__(self):
        return bool(self.pairs)

    def __eq__(self, other):
        return isinstance(other, RefinementRelation) and self.pairs == other.pairs

    def __hash__(self):
        return hash(self.pairs)

    def __repr__(self):
        return f"RefinementRelation({sorted(self.pairs)!r})"


def verify_refinement_mapping(m, m2, rel):
    """Check that rel is a refinement mapping from m to m2.

    True iff rel is nonempty, related states agree on their full
    valuations, and every m2-transition out of a related state maps back
    to an m-transition into a related state.
    """
    pairs = rel.pairs if isinstance(rel, RefinementRelation) else frozenset(rel)
    if not pairs:
        return False
    for s, s2 in pairs:
        if s not in m.valuation:
            raise StateNotFound(f"unknown source state {s!r}")
        if s2 not in m2.valuation:
            raise StateNotFound(f"unknown target state {s2!r}")
    for s, s2 in pairs:
        if m.valuation[s] != m2.valuation[s2]:
            return False
        for t2 in m2.successors(s2):
            if not any((t, t2) in pairs for t in m.successors(s)):
                return False
    return True


def greatest_refinement(m, m2):
    """The union of all refinement mappings from m to m2 (possibly empty).

    Refinement mappings are closed under union, so the greatest one
    exists; it is computed as a greatest fixpoint: start from all
    valuation-compatible pairs and prune until the back condition holds.
    (m2, t) refines (m, s) exactly when (s, t) is in the result.
    """
    pairs = {
        (s, s2)
        for s in m.states
        for s2 in m2.states
        if m.valuation[s] == m2.valuation[s2]
    }
    changed = True
    while changed:
        changed = False
        for s, s2 in list(pairs):
            ok = all(
                any((t, t2) in pairs for t in m.successors(s))
                for t2 in m2.successors(s2)
            )
            if not ok:
                pairs.discard((s, s2))
                changed = True
    return RefinementRelation(pairs)


def is_bisimilar(a, b):
    """True iff the two pointed models are bisimilar.

    Greatest fixpoint pruning with both the back and the forth
    condition; the points must survive in the final relation.
    """
    m, m2 = a.model, b.model
    pairs = {
        (s, s2)
        for s in m.states
        for s2 in m2.states
        if m.valuation[s] == m2.valuation[s2]
    }
    changed = True
    while changed:
        changed = False
        for s, s2 in list(pairs):
            back = all(
                any((t, t2) in pairs for t in m.successors(s))
                for t2 in m2.successors(s2)
            )
            forth = all(
                any((t, t2) in pairs for t2 in m2.successors(s2))
                for t in m.successors(s)
            )
            if not (back and forth):
                pairs.discard((s, s2))
                changed = True
    return (a.point, b.point) in pairs


def _path_id(indices):
    return ".".join(str(i) for i in indices)


def unravel(a, depth):
    """The tree of transition paths from the point, length at most depth.

    States are dot-joined transition indices ("" is the root, "0" the
    first successor, "0.1" its second successor, ...), each carrying the
    valuation of the path's endpoint.
    """
    m = a.model
    states = []
    transitions = []
    valuation = {}
    frontier = [((), a.point)]
    while frontier:
        path, s = frontier.pop(0)
        pid = _path_id(path)
        states.append(pid)
        valuation[pid] = m.valuation[s]
        if len(path) >= depth:
            continue
        for j, t in enumerate(m.successors(s)):
            child = path + (j,)
            transitions.append((pid, _path_id(child)))
            frontier.append((child, t))
    return PointedModel(KripkeModel(states, transitions, valuation), _path_id(()))


def _tree_children(t):
    """Adjacency map of a tree-shaped pointed model; raises NotATree."""
    m = t.model
    parent = {}
    children = {s: [] for s in m.states}
    for s, u in sorted(m.transitions):
        if u in parent:
            raise NotATree(f"state {u!r} has two parents")
        if u == t.point:
            raise NotATree("the root has an incoming transition")
        parent[u] = s
        children[s].append(u)
    # reachability from the root doubles as the cycle check
    seen = set()
    stack = [t.point]
    while stack:
        s = stack.pop()
        if s in seen:
            raise NotATree("cycle reachable from the root")
        seen.add(s)
        stack.extend(children[s])
    if seen != set(m.states):
        raise NotATree("states unreachable from the root")
    return children


def enumerate_root_restrictions(t):
    """Yield every restriction of the tree t that keeps the root.

    A restriction keeps a set of edges closed under ancestors (dropping
    an edge drops the whole subtree below it); valuations are unchanged.
    A node with subtrees T1..Tk has prod(1 + count(Ti)) restrictions.
    """
    children = _tree_children(t)
    m = t.model

    def edge_sets(u):
        kids = children[u]

        def go(i):
            if i == len(kids):
                yield ()
                return
            for rest in go(i + 1):
                yield rest
                for sub in edge_sets(kids[i]):
                    yield ((u, kids[i]),) + sub + rest

        yield from go(0)

    for edges in edge_sets(t.point):
        kept = {t.point}
        for s, u in edges:
            kept.add(u)
        sub = KripkeModel(kept, edges, {s: m.valuation[s] for s in kept})
        yield PointedModel(sub, t.point)


# --- serialization ----------------------------------------------------------


def model_from_dict(d):
    """Build (model, point or None) from the JSON object layout."""
    try:
        states = d["states"]
        transitions = [tuple(p) for p in d.get("transitions", ())]
        valuation = d.get("valuation", {})
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed model object: {exc}") from exc
    model = KripkeModel(states, transitions, valuation)
    point = d.get("point")
    if point is not None and point not in model.valuation:
        raise StateNotFound(f"point {point!r} not a state")
    return model, point


def pointed_from_dict(d):
    model, point = model_from_dict(d)
    if point is None:
        raise ValueError('model object lacks a "point"')
    return PointedModel(model, point)


def model_to_dict(m, point=None):
    d = {
        "states": list(m.states),
        "transitions": [list(p) for p in sorted(m.transitions)],
        "valuation": {s: sorted(m.valuation[s]) for s in m.states},
    }
    if point is not None:
        d["point"] = point
    return d


def load_model(path):
    """Read a model file; returns (model, point or None)."""
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


def to_dot(m, point=None):
    """DOT rendering: one node per state labeled with its valuation."""
    lines = ["digraph model {"]
    for s in m.states:
        label = s + "\\n{" + ", ".join(sorted(m.valuation[s])) + "}"
        shape = ' peripheries=2' if s == point else ""
        lines.append(f'  "{s}" [label="{label}"{shape}];')
    for s, t in sorted(m.transitions):
        lines.append(f'  "{s}" -> "{t}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
