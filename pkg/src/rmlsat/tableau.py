"""Two-prefix tableau: prefixed formulas, rules, branches, model extraction.

Entries are triples (model prefix, state prefix, formula); prefixes are
tuples of positive integers rendered "1.2.3".  A model prefix mu.m
names a refinement of the model named mu; a state prefix sigma.i names
a successor of the state named sigma.  A branch starts from the entry
(1, 1, root formula).

Rules (premise => conclusion, with side conditions):

    and: (mu,sigma) a & b  =>  (mu,sigma) a  and  (mu,sigma) b
    or:  (mu,sigma) a | b  =>  (mu,sigma) a  or  (mu,sigma) b    (a choice)
    lit: (mu.nu,sigma) l   =>  (mu,sigma) l                      (l a literal)
    dia: (mu,sigma) <>a    =>  (mu,sigma.i) a   with sigma.i fresh
    exr: (mu,sigma) Er a   =>  (mu.m,sigma) a   with mu.m fresh
    box: (mu,sigma) []a    =>  (mu,sigma.i) a   where some (mu.nu, sigma.i)
                                                already occurs (nu may be empty)

The box side condition is what maintains the refinement discipline: if
a descendant model visits a successor state, that successor implicitly
exists in every ancestor model, so box obligations apply to it there.

A branch is complete when no rule instance remains, and accepting when
additionally no (model prefix, state prefix) pair carries both an atom
and its negation.  From a complete accepting branch, one finite model
per model prefix is read off; consecutive models are related by
refinement mappings that send each shared state prefix to itself.

Fresh indices for dia/exr come from a single per-branch counter, so
prefixes are globally unique within a branch.
"""

from dataclasses import dataclass, field

from .formula import And, Atom, Box, Diamond, ExistsR, NegAtom, Or, is_literal, render
from .kripke import KripkeModel, RefinementRelation, model_from_dict, model_to_dict

__all__ = [
    "Branch",
    "RuleInstance",
    "ModelChain",
    "ChainModel",
    "NotComplete",
    "Clash",
    "ChoiceRequired",
    "ChoiceForbidden",
    "render_prefix",
    "parse_prefix",
    "is_prefix_of",
    "render_entry",
    "format_rule_line",
    "extract_models",
]


class NotComplete(Exception):
    """Model extraction requires a complete branch."""


class Clash(Exception):
    """Model extraction requires an accepting (clash-free) branch."""


class ChoiceRequired(Exception):
    """Applying an or-instance needs a 'left'/'right' choice."""


class ChoiceForbidden(Exception):
    """Only or-instances take a choice."""


def render_prefix(p):
    return ".".join(str(i) for i in p)


def parse_prefix(text):
    return tuple(int(part) for part in text.split("."))


def is_prefix_of(a, b):
    return len(a) <= len(b) and b[: len(a)] == a


def render_entry(e):
    mu, sigma, f = e
    return f"({render_prefix(mu)},{render_prefix(sigma)}) {render(f)}"


def format_rule_line(rule, entry, conclusions):
    concl = "; ".join(render_entry(c) for c in conclusions)
    return f"{rule} {render_entry(entry)} => {concl}"


@dataclass(frozen=True)
class RuleInstance:
    """One applicable rule application.

    target carries the extra datum a rule needs: the ancestor model
    prefix for lit, the existing successor state prefix for box, None
    otherwise.
    """

    rule: str
    entry: tuple
    target: tuple = None

    def __str__(self):
        extra = f" target={render_prefix(self.target)}" if self.target else ""
        return f"{self.rule} on {render_entry(self.entry)}{extra}"


class Branch:
    """An ordered, duplicate-free set of prefixed formulas plus the fresh
    index counter.  apply() returns a new Branch; entries are never removed."""

    __slots__ = ("_order", "_set", "next_index")

    def __init__(self, entries, next_index=None):
        self._order = []
        self._set = set()
        for e in entries:
            if e not in self._set:
                self._set.add(e)
                self._order.append(e)
        if next_index is None:
            # Fresh prefixes must not collide with anything present: pick the
            # next counter value past every index in use.  Only the pristine
            # initial branch may start back at 1.
            top = 1
            extended = False
            for e in self._order:
                for p in (e[0], e[1]):
                    top = max(top, max(p))
                    if len(p) > 1:
                        extended = True
            next_index = top + 1 if (extended or top > 1) else 1
        self.next_index = next_index

    @classmethod
    def initial(cls, formula):
        return cls([((1,), (1,), formula)], next_index=1)

    @property
    def entries(self):
        return tuple(self._order)

    def __contains__(self, e):
        return e in self._set

    def __len__(self):
        return len(self._order)

    def _extended(self, new_entries, bump=0):
        b = Branch.__new__(Branch)
        b._order = list(self._order)
        b._set = set(self._set)
        for e in new_entries:
            if e not in b._set:
                b._set.add(e)
                b._order.append(e)
        b.next_index = self.next_index + bump
        return b

    # -- rule machinery ------------------------------------------------------

    def _box_witnesses(self, mu, sigma):
        """Existing successor prefixes sigma.i visible to a box at (mu, sigma):
        those occurring with a model prefix extending mu."""
        out = []
        seen = set()
        want = len(sigma) + 1
        for mu2, sigma2, _ in self._order:
            if (
                len(sigma2) == want
                and sigma2[:-1] == sigma
                and is_prefix_of(mu, mu2)
                and sigma2 not in seen
            ):
                seen.add(sigma2)
                out.append(sigma2)
        return out

    def _has_dia_witness(self, mu, sigma, body):
        want = len(sigma) + 1
        return any(
            mu2 == mu and len(sigma2) == want and sigma2[:-1] == sigma and f == body
            for mu2, sigma2, f in self._order
        )

    def _has_exr_witness(self, mu, sigma, body):
        want = len(mu) + 1
        return any(
            sigma2 == sigma and len(mu2) == want and mu2[:-1] == mu and f == body
            for mu2, sigma2, f in self._order
        )

    def applicable_instances(self):
        """Every rule instance whose side condition holds and whose
        conclusion is not already present, in deterministic order."""
        out = []
        for e in self._order:
            mu, sigma, f = e
            if isinstance(f, And):
                if (mu, sigma, f.left) not in self._set or (mu, sigma, f.right) not in self._set:
                    out.append(RuleInstance("and", e))
            elif isinstance(f, Or):
                if (mu, sigma, f.left) not in self._set and (mu, sigma, f.right) not in self._set:
                    out.append(RuleInstance("or", e))
            elif is_literal(f):
                for k in range(len(mu) - 1, 0, -1):
                    if (mu[:k], sigma, f) not in self._set:
                        out.append(RuleInstance("lit", e, mu[:k]))
            elif isinstance(f, Diamond):
                if not self._has_dia_witness(mu, sigma, f.body):
                    out.append(RuleInstance("dia", e))
            elif isinstance(f, ExistsR):
                if not self._has_exr_witness(mu, sigma, f.body):
                    out.append(RuleInstance("exr", e))
            elif isinstance(f, Box):
                for sigma2 in self._box_witnesses(mu, sigma):
                    if (mu, sigma2, f.body) not in self._set:
                        out.append(RuleInstance("box", e, sigma2))
        return out

    def apply(self, inst, choice=None):
        """Apply one instance, returning the extended branch.

        Or-instances require choice 'left' or 'right'; every other rule
        forbids a choice.  Raises ValueError when the instance does not
        apply to this branch.
        """
        mu, sigma, f = inst.entry
        if inst.entry not in self._set:
            raise ValueError(f"entry not on branch: {render_entry(inst.entry)}")
        if inst.rule == "or":
            if choice not in ("left", "right"):
                raise ChoiceRequired(f"or-instance needs left/right, got {choice!r}")
        elif choice is not None:
            raise ChoiceForbidden(f"{inst.rule} takes no choice")

        if inst.rule == "and":
            if not isinstance(f, And):
                raise ValueError("and-instance on a non-conjunction")
            return self._extended([(mu, sigma, f.left), (mu, sigma, f.right)])
        if inst.rule == "or":
            side = f.left if choice == "left" else f.right
            if not isinstance(f, Or):
                raise ValueError("or-instance on a non-disjunction")
            return self._extended([(mu, sigma, side)])
        if inst.rule == "lit":
            if not is_literal(f) or not is_prefix_of(inst.target, mu) or inst.target == mu:
                raise ValueError("lit-instance needs a proper ancestor model prefix")
            return self._extended([(inst.target, sigma, f)])
        if inst.rule == "dia":
            if not isinstance(f, Diamond):
                raise ValueError("dia-instance on a non-diamond")
            i = self.next_index
            return self._extended([(mu, sigma + (i,), f.body)], bump=1)
        if inst.rule == "exr":
            if not isinstance(f, ExistsR):
                raise ValueError("exr-instance on a non-quantifier")
            i = self.next_index
            return self._extended([(mu + (i,), sigma, f.body)], bump=1)
        if inst.rule == "box":
            if not isinstance(f, Box):
                raise ValueError("box-instance on a non-box")
            if inst.target not in self._box_witnesses(mu, sigma):
                raise ValueError("box-instance without an occurring successor prefix")
            return self._extended([(mu, inst.target, f.body)])
        raise ValueError(f"unknown rule {inst.rule!r}")

    def has_clash(self):
        """A witness (mu, sigma, atom name) labeled with both polarities, or None."""
        pos = set()
        neg = set()
        for mu, sigma, f in self._order:
            if isinstance(f, Atom):
                if (mu, sigma, f.name) in neg:
                    return (mu, sigma, f.name)
                pos.add((mu, sigma, f.name))
            elif isinstance(f, NegAtom):
                if (mu, sigma, f.name) in pos:
                    return (mu, sigma, f.name)
                neg.add((mu, sigma, f.name))
        return None

    def is_complete(self):
        return not self.applicable_instances()


# --- model extraction -------------------------------------------------------


@dataclass
class ChainModel:
    prefix: tuple
    model: KripkeModel
    point: str


@dataclass
class ModelChain:
    """The models read off a branch, sorted by model prefix.  Each entry's
    point is the state where the model was introduced."""

    chain: list = field(default_factory=list)

    def __len__(self):
        return len(self.chain)

    def __iter__(self):
        return iter(self.chain)

    def lookup(self, prefix):
        for cm in self.chain:
            if cm.prefix == prefix:
                return cm
        raise KeyError(render_prefix(prefix))

    def root(self):
        return self.lookup((1,))

    def edges(self):
        """(parent, child, relation) for every refinement step in the chain.

        The relation maps each state of the child model to the parent
        state carrying the same state prefix.
        """
        out = []
        for cm in self.chain:
            if len(cm.prefix) <= 1:
                continue
            parent = self.lookup(cm.prefix[:-1])
            rel = RefinementRelation((s, s) for s in cm.model.states)
            out.append((parent, cm, rel))
        return out

    def to_dict(self, formula_text=None):
        d = {
            "models": [
                {"prefix": render_prefix(cm.prefix), **model_to_dict(cm.model, cm.point)}
                for cm in self.chain
            ]
        }
        if formula_text is not None:
            d["formula"] = formula_text
        return d

    @classmethod
    def from_dict(cls, d):
        chain = []
        for obj in d["models"]:
            model, point = model_from_dict(obj)
            chain.append(ChainModel(parse_prefix(obj["prefix"]), model, point))
        return cls(chain)


def extract_models(branch):
    """Read the model collection off a complete accepting branch.

    For each model prefix mu: the states are the state prefixes that
    occur with a model prefix extending mu; transitions connect each
    state prefix to its occurring immediate extensions; the valuation of
    a state comes from the literals recorded at model prefix 1 (literal
    propagation makes those canonical).  Raises Clash or NotComplete if
    the branch does not qualify.
    """
    clash = branch.has_clash()
    if clash is not None:
        mu, sigma, name = clash
        raise Clash(f"clash on {name} at ({render_prefix(mu)},{render_prefix(sigma)})")
    if not branch.is_complete():
        raise NotComplete("branch has unapplied rule instances")

    entries = branch.entries
    mus = sorted({e[0] for e in entries})
    atoms_at = {}
    for mu, sigma, f in entries:
        if mu == (1,) and isinstance(f, Atom):
            atoms_at.setdefault(sigma, set()).add(f.name)

    chain = []
    for mu in mus:
        sigmas = sorted({sigma for mu2, sigma, _ in entries if is_prefix_of(mu, mu2)})
        sigset = set(sigmas)
        states = [render_prefix(s) for s in sigmas]
        transitions = [
            (render_prefix(s), render_prefix(t))
            for s in sigmas
            for t in sigmas
            if len(t) == len(s) + 1 and t[: len(s)] == s
        ]
        valuation = {render_prefix(s): atoms_at.get(s, set()) for s in sigmas}
        anchor = None
        if mu == (1,):
            anchor = (1,)
        else:
            parent = mu[:-1]
            for mu2, sigma, f in entries:
                if mu2 == parent and isinstance(f, ExistsR) and (mu, sigma, f.body) in branch:
                    anchor = sigma
                    break
            if anchor is None:
                anchor = min(sigset)
        chain.append(
            ChainModel(mu, KripkeModel(states, transitions, valuation), render_prefix(anchor))
        )
    return ModelChain(chain)
