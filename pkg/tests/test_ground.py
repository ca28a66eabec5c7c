"""Grounding: binding enumeration against an independent counting oracle."""

from random import Random

import pytest

from clinicbot.pddl import (
    MismatchedDomainError,
    PddlSemanticError,
    ground,
    parse_domain,
    parse_problem,
)

from taskgen import count_oracle, random_typed_domain

MINI_PROBLEM = """
(define (problem clinic-mini)
  (:domain clinic)
  (:objects breathing highfive - activity
            prep - procstep
            low high - level)
  (:init (procstage prep) (naustep) (finalstep prep) (desiredstrength prep low)
         (distractionstrength breathing low) (distractionstrength highfive high))
  (:goal (and (procdone)))
)
"""


class TestClinicGrounding:
    def test_do_activity_instances_two_by_one_by_two(self, clinic_domain_text):
        domain = parse_domain(clinic_domain_text)
        problem = parse_problem(MINI_PROBLEM)
        task = ground(domain, problem)
        instances = [a for a in task.actions if a.schema_name == "do-activity"]
        assert len(instances) == 2 * 1 * 2

    def test_zero_objects_of_type_yield_zero_instances(self, clinic_domain_text):
        domain = parse_domain(clinic_domain_text)
        problem = parse_problem(
            "(define (problem na) (:domain clinic) "
            "(:objects prep - procstep low - level) (:init) (:goal (and (procdone))))"
        )
        task = ground(domain, problem)
        assert [a for a in task.actions if a.schema_name == "do-activity"] == []

    def test_fluent_universe_formula(self, clinic_task):
        # sum over predicates of the product of per-type object counts
        objects = dict(clinic_task.objects)
        by_type = {}
        for obj, typ in clinic_task.objects:
            by_type.setdefault(typ, []).append(obj)
        counts = {"activity": 2, "procstep": 3, "level": 2}
        assert {t: len(v) for t, v in by_type.items()} == counts
        expected = (
            2  # done
            + 3  # procstage
            + 9  # next
            + 3  # finalstep
            + 6  # desiredstrength
            + 4  # distractionstrength
            + 3  # okanxiety
            + 3  # checkedanxiety
            + 1 + 1 + 1 + 1 + 1  # engaged distressed naustep procedurestep procdone
        )
        assert len(clinic_task.fluents) == expected

    def test_grounding_soundness_every_mask_indexes_universe(self, clinic_task):
        universe = (1 << len(clinic_task.fluents)) - 1
        for action in clinic_task.actions:
            assert action.pre_pos | universe == universe
            assert action.pre_neg | universe == universe
            for add, dele in action.outcomes:
                assert add | universe == universe
                assert dele | universe == universe
                assert add & dele == 0  # internally consistent outcomes

    def test_determinism_flag(self, clinic_domain_text, clinic_task):
        domain = parse_domain(clinic_domain_text)
        by_schema = {s.name: s for s in domain.actions}
        for action in clinic_task.actions:
            assert (len(by_schema[action.schema_name].outcomes) == 1) == (
                action.deterministic
            )

    def test_closed_world_init(self, clinic_domain_text):
        domain = parse_domain(clinic_domain_text)
        problem = parse_problem(
            "(define (problem empty) (:domain clinic) "
            "(:objects prep - procstep) (:init) (:goal (and (procdone))))"
        )
        task = ground(domain, problem)
        assert task.init == 0  # every fluent false

    def test_mismatched_domain(self, clinic_domain_text):
        domain = parse_domain(clinic_domain_text)
        problem = parse_problem(
            "(define (problem x) (:domain other) (:objects) (:init) (:goal (and)))"
        )
        with pytest.raises(MismatchedDomainError):
            ground(domain, problem)

    def test_undeclared_object_type(self, clinic_domain_text):
        domain = parse_domain(clinic_domain_text)
        problem = parse_problem(
            "(define (problem x) (:domain clinic) (:objects foo - gremlin) "
            "(:init) (:goal (and)))"
        )
        with pytest.raises(PddlSemanticError):
            ground(domain, problem)

    def test_init_atom_outside_universe(self, clinic_domain_text):
        domain = parse_domain(clinic_domain_text)
        problem = parse_problem(
            "(define (problem x) (:domain clinic) (:objects prep - procstep) "
            "(:init (done prep)) (:goal (and)))"
        )
        with pytest.raises(PddlSemanticError):
            ground(domain, problem)


class TestCountOracle:
    @pytest.mark.parametrize("seed", range(30))
    def test_counts_match_enumeration(self, seed):
        domain_text, problem_text, info = random_typed_domain(Random(seed))
        task = ground(parse_domain(domain_text), parse_problem(problem_text))
        fluents, actions = count_oracle(info)
        assert len(task.fluents) == fluents
        assert len(task.actions) == actions


class TestStateHelpers:
    def test_bitstring_roundtrip(self, clinic_task):
        bits = clinic_task.bitstring(clinic_task.init)
        assert len(bits) == len(clinic_task.fluents)
        assert clinic_task.state_from_bitstring(bits) == clinic_task.init

    def test_bad_bitstring(self, clinic_task):
        with pytest.raises(ValueError):
            clinic_task.state_from_bitstring("01")
