import pytest

from rmlsat import gen
from rmlsat.formula import (
    And,
    Atom,
    Box,
    DepthMetrics,
    Diamond,
    ExistsR,
    ForallR,
    FragmentViolation,
    NegAtom,
    Not,
    Or,
    ParseError,
    atoms,
    in_existential_fragment,
    metrics,
    normalize,
    parse,
    parse_general,
    render,
    size,
    subformulas,
)

P, Q = Atom("p"), Atom("q")


class TestParse:
    def test_conjunction_of_literals(self):
        assert parse("p & !p") == And(P, NegAtom("p"))

    def test_quantifier_over_diamond(self):
        assert parse("Er <> p") == ExistsR(Diamond(P))

    def test_incomplete_input_offset(self):
        with pytest.raises(ParseError) as err:
            parse("p &")
        assert err.value.offset == 3
        assert err.value.expected

    def test_precedence(self):
        assert parse("!p & q | r") == Or(And(NegAtom("p"), Q), Atom("r"))
        assert parse("<>p & q") == And(Diamond(P), Q)
        assert parse("Er p & q") == And(ExistsR(P), Q)
        assert parse("p & q & r") == And(And(P, Q), Atom("r"))
        assert parse("[] <> p") == Box(Diamond(P))

    def test_parentheses_override(self):
        assert parse("<>(p & q)") == Diamond(And(P, Q))
        assert parse("!p") == parse("(((!p)))")

    def test_forall_parses(self):
        f = parse("Ar p")
        assert f == ForallR(P)
        assert not in_existential_fragment(f)

    def test_reserved_words(self):
        # lowercase 'er' is an ordinary atom; capitalized 'Er' never is
        assert parse("er") == Atom("er")
        with pytest.raises(ParseError):
            parse("Erx")

    def test_negation_restricted_to_atoms(self):
        with pytest.raises(ParseError):
            parse("!(p & q)")
        with pytest.raises(ParseError):
            parse("!<>p")

    def test_unbalanced(self):
        with pytest.raises(ParseError):
            parse("(p & q")
        with pytest.raises(ParseError):
            parse("p)")

    def test_whitespace_insignificant(self):
        assert parse(" Er\t<> p ") == parse("Er<>p")


class TestRender:
    def test_examples(self):
        assert render(P) == "p"
        assert render(Box(And(P, NegAtom("q")))) == "[](p & !q)"
        assert render(ExistsR(P)) == "Er p"

    def test_round_trip_exhaustive(self):
        for f in gen.enumerate_formulas(5, ("p", "q")):
            assert parse(render(f)) == f

    def test_round_trip_with_quantifiers(self):
        f = ForallR(ExistsR(Or(Diamond(P), Box(Q))))
        assert parse(render(f)) == f


class TestMetrics:
    def test_examples(self):
        assert metrics(P) == DepthMetrics(0, 0)
        assert metrics(parse("Er <> Er p")) == DepthMetrics(1, 2)
        assert metrics(parse("<>p & [][]q")) == DepthMetrics(2, 0)

    def test_monotone_over_subformulas(self):
        for f in gen.enumerate_formulas(5, ("p",)):
            m = metrics(f)
            for g in subformulas(f):
                mg = metrics(g)
                assert mg.d_diamond <= m.d_diamond
                assert mg.d_exists <= m.d_exists

    def test_bounded_by_size(self):
        for f in gen.enumerate_formulas(4, ("p", "q")):
            m = metrics(f)
            assert m.d_diamond <= size(f)
            assert m.d_exists <= size(f)


class TestNormalize:
    def test_de_morgan(self):
        assert normalize(Not(And(P, Q))) == Or(NegAtom("p"), NegAtom("q"))

    def test_modal_duality(self):
        assert normalize(Not(Diamond(P))) == Box(NegAtom("p"))
        assert normalize(Not(Box(P))) == Diamond(NegAtom("p"))

    def test_quantifier_duality_leaves_fragment(self):
        with pytest.raises(FragmentViolation):
            normalize(Not(ExistsR(P)))
        got = normalize(Not(ExistsR(P)), require_existential=False)
        assert got == ForallR(NegAtom("p"))

    def test_double_negation(self):
        for f in gen.enumerate_formulas(4, ("p", "q")):
            assert normalize(Not(Not(f))) == f

    def test_output_in_grammar(self):
        g = parse_general("!(Er (p | !(q & <>p)))")
        out = normalize(g, require_existential=False)
        assert not any(isinstance(s, Not) for s in subformulas(out))
        # grammar formulas round-trip
        assert parse(render(out)) == out

    def test_general_parse(self):
        assert parse_general("!(p & q)") == Not(And(P, Q))
        assert parse_general("!!p") == Not(Not(P))


class TestFragment:
    def test_examples(self):
        assert in_existential_fragment(parse("Er <> p"))
        assert not in_existential_fragment(parse("Ar p"))
        assert in_existential_fragment(parse("p & !p"))


class TestSubformulas:
    def test_examples(self):
        assert subformulas(P) == {P}
        assert subformulas(Diamond(P)) == {Diamond(P), P}
        assert subformulas(And(P, P)) == {And(P, P), P}

    def test_cardinality_bounded_by_size(self):
        for f in gen.enumerate_formulas(5, ("p", "q")):
            assert len(subformulas(f)) <= size(f)


def test_atoms():
    assert atoms(parse("q & !p")) == ("p", "q")
    assert atoms(parse("Er <> x1")) == ("x1",)
