import random

import pytest
import yaml

from src.core.errors import FormulaSyntaxError, ResourceRefusal
from src.core.hierarchy import (
    BinOp, BoundAssignment, BoundSchedule, Compare, Formula, Num, QuantKind, Quantifier, Var,
    bound_quantifiers, escalate_bounds, eval_bounded, format_formula, parse_formula,
)
from src.core.oracle import VerdictKind

SQUARE = "EXISTS a . a*a = inp"
NO_LARGEST = "EXISTS a . FORALL b . b <= a"


def load_corpus(corpus):
    with open(corpus / "formulas.yaml", 'r', encoding='utf-8') as f:
        return yaml.safe_load(f)


class TestParse:
    def test_structure(self):
        f = parse_formula("EXISTS a . FORALL b . (b <= a + 3) AND (a*a < inp)")
        assert [(q.kind, q.var, q.bound) for q in f.prefix] == [
            (QuantKind.EXISTS, 'a', None), (QuantKind.FORALL, 'b', None)]
        assert f.k == 2

    def test_bounded_quantifier(self):
        f = parse_formula("EXISTS v < 10 . v = inp")
        assert f.prefix[0].bound == 10

    def test_precedence(self):
        f = parse_formula("1 + 2 * 3 = inp")
        assert f.body == Compare("=", BinOp("+", Num(1), BinOp("*", Num(2), Num(3))), Var("inp"))
        assert f.k == 0

    def test_keywords_are_case_insensitive(self):
        assert parse_formula("exists a . a = inp") == parse_formula("EXISTS a . a = inp")

    @pytest.mark.parametrize("text", [
        "EXISTS a . b = a",
        "EXISTS a . EXISTS a . a = 1",
        "EXISTS inp . inp = 1",
        "EXISTS a . a / 2 = 1",
        "EXISTS a a = 1",
        "FORALL . 1 = 1",
        "a +",
    ])
    def test_rejected(self, text):
        with pytest.raises(FormulaSyntaxError):
            parse_formula(text)

    def test_error_position(self):
        with pytest.raises(FormulaSyntaxError) as err:
            parse_formula("EXISTS a .\n a = = 1")
        assert err.value.line == 2

    def test_printing_round_trips(self, corpus):
        for entry in load_corpus(corpus):
            f = parse_formula(entry['formula'])
            assert parse_formula(format_formula(f)) == f
        assert format_formula(parse_formula("EXISTS v < 10 . v*v = inp")) == "EXISTS v < 10 . v * v = inp"


class TestBounding:
    def test_bounds_all_but_the_last(self):
        f = parse_formula(NO_LARGEST)
        bounded = bound_quantifiers(f, BoundAssignment((10,), 5))
        assert bounded.prefix[0] == Quantifier(QuantKind.EXISTS, 'a', 10)
        assert bounded.prefix[1] == Quantifier(QuantKind.FORALL, 'b', None)
        assert bounded.body == f.body
        assert [q.kind for q in bounded.prefix] == [q.kind for q in f.prefix]

    def test_nothing_to_bound(self):
        single = parse_formula(SQUARE)
        assert bound_quantifiers(single, BoundAssignment((), 10)) == single
        closed = parse_formula("2 + 2 = 4")
        assert bound_quantifiers(closed, BoundAssignment((), 1)) == closed

    def test_errors(self):
        f = parse_formula(NO_LARGEST)
        with pytest.raises(ValueError):
            bound_quantifiers(f, BoundAssignment((1, 2), 5))
        with pytest.raises(ValueError):
            bound_quantifiers(bound_quantifiers(f, BoundAssignment((3,), 5)), BoundAssignment((3,), 5))
        with pytest.raises(ValueError):
            BoundAssignment((0,), 5)
        assert BoundAssignment((3,), 5).empirical


class TestEvaluate:
    def test_square(self):
        f = parse_formula(SQUARE)
        assert eval_bounded(f, 49, BoundAssignment((), 10))
        assert not eval_bounded(f, 50, BoundAssignment((), 100))

    def test_successor(self):
        f = parse_formula("FORALL a . EXISTS b . b = a + 1")
        assert eval_bounded(f, 0, BoundAssignment((100,), 102))
        assert not eval_bounded(f, 0, BoundAssignment((100,), 100))

    def test_integer_square_root(self):
        f = parse_formula("FORALL a . EXISTS b . b*b <= a AND NOT ((b + 1)*(b + 1) <= a)")
        assert eval_bounded(f, 0, BoundAssignment((50,), 8))

    def test_monus_and_closed_bodies(self):
        assert eval_bounded(parse_formula("3 - 5 = 0"), 0, BoundAssignment((), 1))
        assert eval_bounded(parse_formula("NOT (1 = 2) OR 1 = 2"), 0, BoundAssignment((), 1))

    def test_budget(self):
        f = parse_formula("EXISTS a . EXISTS b . EXISTS c . a + b + c = inp + 1000")
        with pytest.raises(ResourceRefusal):
            eval_bounded(f, 0, BoundAssignment((1000, 1000), 1000), budget=10 ** 6)

    def test_quantifier_kinds_are_brute_forced(self):
        f = Formula((Quantifier(QuantKind.FORALL, 'a', 7),), Compare("<", Var("a"), Var("inp")))
        assert eval_bounded(f, 7, BoundAssignment((), 1))
        assert not eval_bounded(f, 6, BoundAssignment((), 1))


def _random_body(rng: random.Random, names):
    def term(depth):
        if depth == 0 or rng.random() < 0.3:
            return rng.choice([Num(rng.randint(0, 6)), Var(rng.choice(names))])
        return BinOp(rng.choice("+*-"), term(depth - 1), term(depth - 1))
    return Compare(rng.choice(["=", "<", "<="]), term(2), term(2))


@pytest.mark.parametrize("kind", [QuantKind.EXISTS, QuantKind.FORALL])
def test_single_kind_prefixes_are_monotone(kind):
    rng = random.Random(11 if kind is QuantKind.EXISTS else 12)
    for _ in range(100):
        names = ['a', 'b']
        f = Formula(tuple(Quantifier(kind, n) for n in names), _random_body(rng, names + ['inp']))
        inp = rng.randint(0, 10)
        previous = None
        for size in range(1, 8):
            truth = eval_bounded(f, inp, BoundAssignment((size,), 2 * size))
            if previous is not None:
                if kind is QuantKind.EXISTS:
                    assert truth >= previous
                else:
                    assert truth <= previous
            previous = truth


class TestEscalation:
    def test_square(self):
        f = parse_formula(SQUARE)
        yes = escalate_bounds(f, 49)
        assert yes.kind is VerdictKind.STABILIZED and yes.truth is True
        no = escalate_bounds(f, 50)
        assert no.kind is VerdictKind.STABILIZED and no.truth is False

    def test_default_schedule(self):
        schedule = BoundSchedule.default(2)
        assert [s.bounds for s in schedule.stages] == [(2,), (4,), (8,), (16,), (32,)]
        assert [s.final_cap for s in schedule.stages] == [4, 16, 64, 256, 1024]
        assert schedule.confirmations == 3

    def test_lagging_final_cap_gives_wrong_answers(self):
        f = parse_formula(NO_LARGEST)
        lagging = BoundSchedule(tuple(BoundAssignment((a,), a // 2) for a in (4, 8, 16, 32)), 2)
        verdict = escalate_bounds(f, 0, lagging)
        assert verdict.lagging
        assert all(e.truth for e in verdict.evidence)
        assert verdict.truth is True

    def test_outpacing_final_cap_gives_false(self):
        f = parse_formula(NO_LARGEST)
        ahead = BoundSchedule(tuple(BoundAssignment((a,), a + 1) for a in (4, 8, 16, 32)), 2)
        verdict = escalate_bounds(f, 0, ahead)
        assert not verdict.lagging
        assert verdict.kind is VerdictKind.STABILIZED and verdict.truth is False
        assert escalate_bounds(f, 0).truth is False

    def test_mixed_evidence_is_unstable(self):
        f = parse_formula(NO_LARGEST)
        mixed = BoundSchedule((BoundAssignment((8,), 4), BoundAssignment((8,), 64)), 2)
        assert escalate_bounds(f, 0, mixed).kind is VerdictKind.UNSTABLE

    def test_budget_blowout(self):
        f = parse_formula("FORALL a . FORALL b . FORALL c . a + b + c = c + b + a")
        verdict = escalate_bounds(f, 0, budget=1000)
        assert verdict.kind is VerdictKind.RESOURCE_EXCEEDED

    def test_schedule_validation(self):
        with pytest.raises(ValueError):
            BoundSchedule(())
        with pytest.raises(ValueError):
            BoundSchedule((BoundAssignment((), 2),), confirmations=2)

    def test_corpus_stabilizes_to_known_truth(self, corpus):
        entries = load_corpus(corpus)
        assert len(entries) >= 10
        for entry in entries:
            f = parse_formula(entry['formula'])
            verdict = escalate_bounds(f, entry['input'])
            assert verdict.kind is VerdictKind.STABILIZED, entry['name']
            assert verdict.truth is entry['truth'], entry['name']
