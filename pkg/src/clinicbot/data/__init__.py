"""Bundled clinic demo inputs (domain, problem, config, scenarios)."""

from importlib import resources


def read_text(name: str) -> str:
    return resources.files(__package__).joinpath(name).read_text(encoding="utf-8")


def clinic_domain() -> str:
    return read_text("clinic-domain.pddl")


def clinic_problem() -> str:
    return read_text("clinic-problem.pddl")


def clinic_config() -> str:
    return read_text("clinic-config.json")


def scenario(name: str) -> str:
    return read_text(f"scenarios/{name}.json")
