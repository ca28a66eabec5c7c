"""clinicbot: a planning-driven interaction engine for a bedside social robot.

The package is organised as a pipeline:

- :mod:`clinicbot.pddl` parses a typed-STRIPS dialect with ``oneof`` effects
  and grounds it into a finite non-deterministic task.
- :mod:`clinicbot.planning` solves the grounded task into a policy, verifies
  the solution class independently, and unfolds the policy into a branched
  plan tree.
- :mod:`clinicbot.executive` runs the turn loop: action selection, channel
  resolution (modelled / operator / sensed), outcome selection, timeouts,
  defaults, reconciliation and stop.
- :mod:`clinicbot.sim` stands in for the patient, the room and the vision
  pipeline so the loop can be closed at desk scale.
- :mod:`clinicbot.service` hosts sessions over HTTP for the operator console
  and provides the command line entry points.
"""

__version__ = "0.1.0"
