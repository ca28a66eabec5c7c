"""Frontend tests: grammar, semantics, action groups, round-trips."""

from random import Random

import pytest

from clinicbot.pddl import (
    ActionGroup,
    PddlSemanticError,
    PddlSyntaxError,
    parse_domain,
    parse_problem,
    print_domain,
    print_problem,
)

from taskgen import random_typed_domain

DO_ACTIVITY = """
(define (domain mini)
  (:types activity procstep level - object)
  (:predicates
    (done ?a - activity) (procstage ?p - procstep)
    (desiredstrength ?p - procstep ?x - level)
    (okanxiety ?p - procstep) (naustep)
    (distractionstrength ?a - activity ?x - level)
    (procedurestep))
  (:action do-activity
    :parameters (?a - activity ?p - procstep ?x - level)
    :precondition (and
      (not (done ?a)) (procstage ?p) (desiredstrength ?p ?x)
      (okanxiety ?p) (naustep) (distractionstrength ?a ?x))
    :effect (and
      (not (naustep)) (done ?a) (procedurestep)))
)
"""


class TestDomainParsing:
    def test_do_activity_shape(self):
        model = parse_domain(DO_ACTIVITY)
        action = model.actions[0]
        assert action.name == "do-activity"
        assert [(v, t) for v, t in action.params] == [
            ("?a", "activity"),
            ("?p", "procstep"),
            ("?x", "level"),
        ]
        positives = [l for l in action.precondition if not l.negated]
        negatives = [l for l in action.precondition if l.negated]
        assert len(positives) == 5
        assert len(negatives) == 1
        assert len(action.outcomes) == 1
        assert len(action.outcomes[0]) == 3
        assert action.deterministic

    def test_empty_domain(self):
        model = parse_domain("(define (domain d))")
        assert model.name == "d"
        assert model.predicates == ()
        assert model.actions == ()

    def test_oneof_two_outcomes(self):
        text = """
        (define (domain q)
          (:types procstep - object)
          (:predicates (okanxiety ?p - procstep) (procstage ?p - procstep))
          (:action test-anxiety
            :parameters (?p - procstep)
            :precondition (and (procstage ?p))
            :effect (oneof (okanxiety ?p) (not (okanxiety ?p)))))
        """
        model = parse_domain(text)
        action = model.actions[0]
        assert len(action.outcomes) == 2
        assert not action.deterministic
        assert action.outcomes[0][0].negated is False
        assert action.outcomes[1][0].negated is True

    def test_nested_oneof_flattens(self):
        text = """
        (define (domain q)
          (:predicates (a) (b) (c))
          (:action act
            :parameters ()
            :precondition (and)
            :effect (oneof (and (a)) (oneof (and (b)) (and (c))))))
        """
        assert len(parse_domain(text).actions[0].outcomes) == 3

    def test_group_annotation(self):
        text = """
        (define (domain g)
          (:predicates (x))
          ;; @group: explicit-query
          (:action ask :parameters () :precondition (and) :effect (and (x)))
          (:action act :parameters () :precondition (and) :effect (and (x))))
        """
        model = parse_domain(text)
        assert model.actions[0].group is ActionGroup.EXPLICIT_QUERY
        assert model.actions[1].group is ActionGroup.ROBOT_BEHAVIOUR  # default

    def test_case_normalisation(self):
        model = parse_domain(
            "(define (domain UP) (:predicates (Flag)) "
            "(:action GO :parameters () :precondition (and (FLAG)) :effect (and (flag))))"
        )
        assert model.name == "up"
        assert model.actions[0].name == "go"
        assert model.actions[0].precondition[0].atom.pred == "flag"

    @pytest.mark.parametrize(
        "text, fragment",
        [
            ("(define (domain d)", "expected ')'"),
            ("(define (domain d) (:predicates (p)) extra)", "unsupported domain section"),
            ("(define (dommain d))", "expected (define (domain NAME)"),
            ("(define (domain d) (:action a :parameters ()))", "missing :precondition"),
        ],
    )
    def test_syntax_errors(self, text, fragment):
        with pytest.raises(PddlSyntaxError) as err:
            parse_domain(text)
        assert fragment in str(err.value)

    def test_syntax_error_carries_position(self):
        with pytest.raises(PddlSyntaxError) as err:
            parse_domain("(define (domain d)\n  (:predicates (p)")
        assert err.value.line == 2

    @pytest.mark.parametrize(
        "text, fragment",
        [
            (
                "(define (domain d) (:predicates (p ?x - ghost)))",
                "undeclared type",
            ),
            (
                "(define (domain d) (:predicates (p)) "
                "(:action a :parameters () :precondition (and (q)) :effect (and (p))))",
                "undeclared predicate",
            ),
            (
                "(define (domain d) (:predicates (p)) "
                "(:action a :parameters () :precondition (and (p (x))) :effect (and (p))))",
                "expected",
            ),
            (
                "(define (domain d) (:types t - object) (:predicates (p ?x - t)) "
                "(:action a :parameters () :precondition (and) :effect (and (p ?y))))",
                "unbound variable",
            ),
            (
                "(define (domain d) (:predicates (p) (p)))",
                "declared twice",
            ),
        ],
    )
    def test_semantic_errors(self, text, fragment):
        with pytest.raises((PddlSemanticError, PddlSyntaxError)) as err:
            parse_domain(text)
        assert fragment in str(err.value)

    def test_conditional_effects_rejected(self):
        text = (
            "(define (domain d) (:predicates (p) (q)) "
            "(:action a :parameters () :precondition (and) "
            ":effect (when (p) (q))))"
        )
        with pytest.raises(PddlSyntaxError):
            parse_domain(text)


class TestProblemParsing:
    def test_clinic_problem(self, clinic_problem_text):
        model = parse_problem(clinic_problem_text)
        assert model.name == "clinic-p1"
        assert model.domain_name == "clinic"
        assert len(model.objects) == 7
        assert [l.atom.pred for l in model.goal] == ["procdone"]

    def test_empty_init(self):
        model = parse_problem(
            "(define (problem p) (:domain d) (:objects a - object) (:init) (:goal (and)))"
        )
        assert model.init == ()

    def test_init_deduplicates(self):
        model = parse_problem(
            "(define (problem p) (:domain d) (:objects) (:init (x) (x)) (:goal (and)))"
        )
        assert len(model.init) == 1

    def test_missing_domain_clause(self):
        with pytest.raises(PddlSyntaxError):
            parse_problem("(define (problem p) (:init) (:goal (and)))")


class TestRoundTrip:
    def test_clinic_domain_roundtrip(self, clinic_domain_text):
        model = parse_domain(clinic_domain_text)
        printed = print_domain(model)
        assert parse_domain(printed) == model
        assert print_domain(parse_domain(printed)) == printed

    def test_clinic_problem_roundtrip(self, clinic_problem_text):
        model = parse_problem(clinic_problem_text)
        printed = print_problem(model)
        assert parse_problem(printed) == model
        assert print_problem(parse_problem(printed)) == printed

    @pytest.mark.parametrize("seed", range(25))
    def test_generated_roundtrip(self, seed):
        domain_text, problem_text, _ = random_typed_domain(Random(seed))
        domain = parse_domain(domain_text)
        problem = parse_problem(problem_text)
        assert parse_domain(print_domain(domain)) == domain
        assert parse_problem(print_problem(problem)) == problem
