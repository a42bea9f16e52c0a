"""A robot meets an operator standing in a one-lane corridor.

First the operator walks away after a while and the robot just waits. Then
the operator stays put, the robot gives up on waiting, replans around it,
and eventually reports the task as failed.
"""

from amrmas import run_simulation
from amrmas.generators import corridor_scenario


def show(title, scenario):
    print(f"== {title}")
    trace, report = run_simulation(scenario, "sequential")
    for rec in trace:
        if "event" in rec and rec["agent"] == "R1":
            extra = {k: v for k, v in rec.items() if k not in ("tick", "agent", "event")}
            print(f"  t={rec['tick']:<3} {rec['event']:<15} {extra}")
    print(f"  T1: {report.per_task['T1'].outcome}\n")


show("operator leaves", corridor_scenario(parked=False))
show("operator parked", corridor_scenario(parked=True))
