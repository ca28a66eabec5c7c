"""Desk-scale stand-in for the patient, the room and the vision pipeline."""

from clinicbot.sim.patient import PatientModel, PatientSim, UnknownAction
from clinicbot.sim.scenario import (
    Fault,
    Scenario,
    ScenarioMismatch,
    SimClock,
    run_scenario,
)
from clinicbot.sim.signals import EXPRESSIONS, SimulatedSignals, signals_for_level

__all__ = [
    "EXPRESSIONS",
    "Fault",
    "PatientModel",
    "PatientSim",
    "Scenario",
    "ScenarioMismatch",
    "SimClock",
    "SimulatedSignals",
    "UnknownAction",
    "run_scenario",
    "signals_for_level",
]
