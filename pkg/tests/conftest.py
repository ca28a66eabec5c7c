import pytest

from clinicbot import data as bundled
from clinicbot.executive.config import SessionConfig
from clinicbot.executive.session import Session
from clinicbot.pddl import ground, parse_domain, parse_problem
from clinicbot.planning import solve
from clinicbot.sim.scenario import SimClock


@pytest.fixture(scope="session")
def clinic_domain_text():
    return bundled.clinic_domain()


@pytest.fixture(scope="session")
def clinic_problem_text():
    return bundled.clinic_problem()


@pytest.fixture(scope="session")
def clinic_task(clinic_domain_text, clinic_problem_text):
    return ground(parse_domain(clinic_domain_text), parse_problem(clinic_problem_text))


@pytest.fixture(scope="session")
def clinic_config_text():
    return bundled.clinic_config()


@pytest.fixture()
def clinic_config(clinic_config_text):
    return SessionConfig.from_json(clinic_config_text)


@pytest.fixture(scope="session")
def clinic_policy(clinic_task):
    return solve(clinic_task, "strong-cyclic")


@pytest.fixture()
def clinic_session(clinic_task, clinic_config, clinic_policy):
    """A started clinic session on a hand-advanced clock."""
    clock = SimClock()
    session = Session(
        clinic_task,
        clinic_config,
        session_id="test",
        clock=clock.now,
        policy=_copy_policy(clinic_policy),
    )
    session.start()
    session._clock_handle = clock  # test helper: advance via session._clock_handle
    return session


def _copy_policy(policy):
    from clinicbot.planning import Policy

    fresh = Policy(policy.task, dict(policy.mapping), policy.solution_class)
    return fresh


@pytest.fixture()
def sim_clock():
    return SimClock()
