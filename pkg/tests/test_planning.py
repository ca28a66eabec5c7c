"""Planner tests: determinization, solving vs the brute-force oracle,
independent verification, unfolding, serialization."""

from random import Random

import pytest

from clinicbot.pddl.ground import GroundAction, GroundedTask
from clinicbot.pddl.model import ActionGroup, Atom
from clinicbot.planning import (
    DepthExceeded,
    Policy,
    ResourceLimit,
    SolutionClass,
    Unsolvable,
    determinize,
    dumps_policy,
    loads_policy,
    plan_to_json,
    solve,
    unfold,
    verify_policy,
)

import oracle
from taskgen import random_ground_task


def make_task(fluents, init, goal_pos, actions, goal_neg=0):
    atoms = tuple(Atom(f) for f in fluents)
    index = {f: i for i, f in enumerate(fluents)}

    def mask(names):
        return sum(1 << index[n] for n in names)

    ground_actions = []
    for name, pre_pos, pre_neg, outcomes in actions:
        ground_actions.append(
            GroundAction(
                name=name,
                schema_name=name,
                binding=(),
                pre_pos=mask(pre_pos),
                pre_neg=mask(pre_neg),
                outcomes=tuple((mask(a), mask(d)) for a, d in outcomes),
                group=ActionGroup.ROBOT_BEHAVIOUR,
            )
        )
    return GroundedTask(
        fluents=atoms,
        init=mask(init),
        goal_pos=mask(goal_pos),
        goal_neg=goal_neg,
        actions=tuple(ground_actions),
        domain_name="t",
        problem_name="t",
        objects=(),
    )


@pytest.fixture()
def coin_flip():
    # one repeatable action that may or may not reach the goal
    return make_task(
        ["goal"],
        init=[],
        goal_pos=["goal"],
        actions=[("flip", [], ["goal"], [(["goal"], []), ([], [])])],
    )


class TestDeterminize:
    def test_outcome_counts(self):
        task = make_task(
            ["a", "b", "c"],
            init=[],
            goal_pos=["a"],
            actions=[
                ("one", [], [], [(["a"], [])]),
                ("two", [], [], [(["a"], []), (["b"], [])]),
                ("three", [], [], [(["a"], []), (["b"], []), (["c"], [])]),
            ],
        )
        det = determinize(task)
        assert len(det.task.actions) == 1 + 2 + 3
        # tags invert the mapping
        for v, (orig, k) in enumerate(det.tags):
            assert det.task.actions[v].outcomes[0] == task.actions[orig].outcomes[k]

    def test_deterministic_action_is_identity(self, clinic_task):
        det = determinize(clinic_task)
        orig = {a.name: a for a in clinic_task.actions}
        for variant in det.task.actions:
            if "#" not in variant.name:
                assert variant.outcomes == orig[variant.name].outcomes

    def test_variant_tags(self, coin_flip):
        det = determinize(coin_flip)
        assert det.tags == ((0, 0), (0, 1))
        assert det.task.actions[0].name == "flip #0"


class TestSolve:
    def test_goal_in_init_gives_empty_strong_policy(self):
        task = make_task(["g"], init=["g"], goal_pos=["g"], actions=[])
        for semantics in ("strong", "strong-cyclic"):
            policy = solve(task, semantics)
            assert policy.mapping == {}
            assert policy.solution_class is SolutionClass.STRONG

    def test_coin_flip_strong_cyclic(self, coin_flip):
        policy = solve(coin_flip, "strong-cyclic")
        assert policy.solution_class is SolutionClass.STRONG_CYCLIC
        assert policy.mapping == {0: 0}

    def test_coin_flip_strong_unsolvable(self, coin_flip):
        with pytest.raises(Unsolvable):
            solve(coin_flip, "strong")

    def test_unsolvable(self):
        task = make_task(["g"], init=[], goal_pos=["g"], actions=[])
        for semantics in ("strong", "strong-cyclic"):
            with pytest.raises(Unsolvable):
                solve(task, semantics)

    def test_resource_limit(self, clinic_task):
        with pytest.raises(ResourceLimit) as err:
            solve(clinic_task, "strong-cyclic", node_budget=3)
        assert err.value.budget == 3

    def test_clinic_strong_cyclic_not_strong(self, clinic_task):
        policy = solve(clinic_task, "strong-cyclic")
        assert policy.solution_class is SolutionClass.STRONG_CYCLIC
        with pytest.raises(Unsolvable):
            solve(clinic_task, "strong")

    def test_reproducible_bytes(self, clinic_task):
        a = dumps_policy(solve(clinic_task, "strong-cyclic"))
        b = dumps_policy(solve(clinic_task, "strong-cyclic"))
        assert a == b

    @pytest.mark.parametrize("seed", range(40))
    def test_oracle_agreement(self, seed):
        task = random_ground_task(Random(seed))
        naive = oracle.naive_view(task)
        assert len(oracle.reachable(naive)) <= 512

        for semantics, solvable in (
            ("strong", oracle.strong_solvable(naive)),
            ("strong-cyclic", oracle.strong_cyclic_solvable(naive)),
        ):
            requested = (
                SolutionClass.STRONG
                if semantics == "strong"
                else SolutionClass.STRONG_CYCLIC
            )
            try:
                policy = solve(task, semantics)
            except Unsolvable:
                assert not solvable, f"{semantics}: oracle says solvable"
            else:
                assert solvable, f"{semantics}: oracle says unsolvable"
                assert verify_policy(task, policy).at_least(requested)

    @pytest.mark.parametrize("seed", range(40))
    def test_determinization_adequacy(self, seed):
        # weakly solvable iff the all-outcomes determinization has a plan
        from clinicbot.planning.classical import plan
        from clinicbot.planning.policy import Budget

        task = random_ground_task(Random(seed))
        naive = oracle.naive_view(task)
        det = determinize(task)
        steps = plan(det, task.init, Budget(100_000))
        assert (steps is not None) == oracle.weak_solvable(naive)


class TestVerify:
    def test_empty_policy_goal_init(self):
        task = make_task(["g"], init=["g"], goal_pos=["g"], actions=[])
        assert verify_policy(task, Policy(task)) is SolutionClass.STRONG

    def test_coin_retry_policy_strong_cyclic(self, coin_flip):
        policy = Policy(coin_flip, {0: 0})
        assert verify_policy(coin_flip, policy) is SolutionClass.STRONG_CYCLIC

    def test_precondition_violation_invalid(self):
        task = make_task(
            ["p", "g"],
            init=[],
            goal_pos=["g"],
            actions=[("act", ["p"], [], [(["g"], [])])],
        )
        policy = Policy(task, {0: 0})  # state 0 lacks p
        assert verify_policy(task, policy) is SolutionClass.INVALID

    def test_mapped_goal_state_invalid(self):
        task = make_task(
            ["g"], init=["g"], goal_pos=["g"], actions=[("a", [], [], [([], [])])]
        )
        policy = Policy(task, {1: 0})
        assert verify_policy(task, policy) is SolutionClass.INVALID

    def test_weak_policy(self):
        # one shot: success reaches goal, failure leaves an unmapped state
        task = make_task(
            ["tried", "g"],
            init=[],
            goal_pos=["g"],
            actions=[("try", [], ["tried"], [(["g", "tried"], []), (["tried"], [])])],
        )
        policy = Policy(task, {0: 0})
        assert verify_policy(task, policy) is SolutionClass.WEAK

    def test_open_policy_no_goal_path_invalid(self):
        task = make_task(
            ["a", "g"],
            init=[],
            goal_pos=["g"],
            actions=[("step", [], ["a"], [(["a"], [])])],
        )
        policy = Policy(task, {0: 0})  # reaches state {a}, unmapped, no goal
        assert verify_policy(task, policy) is SolutionClass.INVALID

    def test_strong_chain(self):
        task = make_task(
            ["a", "g"],
            init=[],
            goal_pos=["g"],
            actions=[
                ("first", [], ["a"], [(["a"], [])]),
                ("second", ["a"], [], [(["g"], [])]),
            ],
        )
        policy = Policy(task, {0: 0, 1: 1})
        assert verify_policy(task, policy) is SolutionClass.STRONG

    def test_verifier_is_independent_of_solver(self):
        import ast

        import clinicbot.planning.verify as verify_mod

        tree = ast.parse(open(verify_mod.__file__).read())
        imported = set()
        for node in ast.walk(tree):
            if isinstance(node, ast.Import):
                imported.update(alias.name for alias in node.names)
            elif isinstance(node, ast.ImportFrom):
                imported.add(node.module or "")
        for banned in ("solver", "classical", "determinize", "heapq"):
            assert not any(banned in mod for mod in imported), imported


class TestUnfold:
    def test_empty_policy_single_goal_node(self):
        task = make_task(["g"], init=["g"], goal_pos=["g"], actions=[])
        tree = unfold(task, Policy(task))
        assert len(tree.nodes) == 1
        assert tree.nodes[0].goal

    def test_coin_flip_back_edge(self, coin_flip):
        tree = unfold(coin_flip, Policy(coin_flip, {0: 0}))
        root = tree.node(tree.root)
        assert len(root.children) == 2
        goal_edges = [e for e in root.children if tree.node(e.target).goal]
        back_edges = [e for e in root.children if e.back]
        assert len(goal_edges) == 1
        assert len(back_edges) == 1
        assert back_edges[0].target == tree.root

    def test_clinic_tree_branches(self, clinic_task, clinic_policy):
        tree = unfold(clinic_task, clinic_policy)
        branch_actions = {
            clinic_task.actions[n.action].schema_name for n in tree.branch_nodes()
        }
        assert "test-anxiety" in branch_actions
        # every branch node has one child per outcome of its action
        for node in tree.branch_nodes():
            action = clinic_task.actions[node.action]
            assert len(node.children) == len(action.outcomes)

    def test_depth_exceeded_only_on_acyclic_paths(self):
        task = make_task(
            ["a", "b", "g"],
            init=[],
            goal_pos=["g"],
            actions=[
                ("s1", [], ["a"], [(["a"], [])]),
                ("s2", ["a"], ["b"], [(["b"], [])]),
                ("s3", ["b"], [], [(["g"], [])]),
            ],
        )
        policy = solve(task, "strong")
        with pytest.raises(DepthExceeded):
            unfold(task, policy, depth_limit=2)
        unfold(task, policy, depth_limit=3)  # exactly deep enough

    def test_cyclic_plan_fits_tight_depth(self, coin_flip):
        # the retry loop must not consume depth
        tree = unfold(coin_flip, Policy(coin_flip, {0: 0}), depth_limit=1)
        assert len(tree.nodes) == 2

    def test_serialization_shape(self, clinic_task, clinic_policy):
        doc = plan_to_json(unfold(clinic_task, clinic_policy))
        assert set(doc) == {"root", "nodes"}
        by_id = {n["id"]: n for n in doc["nodes"]}
        for node in doc["nodes"]:
            for edge in node["children"]:
                assert edge["to"] in by_id
                assert isinstance(edge["outcome"], int)
                assert isinstance(edge["label"], str)


class TestPolicyIO:
    def test_roundtrip(self, clinic_task, clinic_policy):
        text = dumps_policy(clinic_policy)
        loaded = loads_policy(text, clinic_task)
        assert loaded.mapping == clinic_policy.mapping
        assert loaded.solution_class is clinic_policy.solution_class

    def test_document_keys(self, clinic_task, clinic_policy):
        import json

        doc = json.loads(dumps_policy(clinic_policy))
        assert set(doc) == {"fluent_order", "entries", "class"}
        assert doc["fluent_order"] == clinic_task.fluent_names
        states = [e["state"] for e in doc["entries"]]
        assert states == sorted(states)

    def test_fluent_order_mismatch_rejected(self, clinic_task, clinic_policy):
        import json

        doc = json.loads(dumps_policy(clinic_policy))
        doc["fluent_order"] = list(reversed(doc["fluent_order"]))
        with pytest.raises(ValueError):
            loads_policy(json.dumps(doc), clinic_task)
