"""Run the bundled ProductX scenario once and print what happened."""

from pathlib import Path

from amrmas import load_scenario, run_simulation
from amrmas.report import summarize_orders

SCENARIO = Path(__file__).resolve().parents[1] / "scenarios" / "productx.json"

scenario = load_scenario(SCENARIO)
trace, report = run_simulation(scenario, "balanced")

print("plan:")
for robot, queue in report.plan["queues"].items():
    print(f"  {robot}: {', '.join(queue)}")

print("\norders:")
for tick, task, robot in summarize_orders(trace):
    result = report.per_task[task]
    print(f"  t={tick:<4} {task:<14} -> {robot}  {result.outcome} in {result.elapsed_ticks} ticks")

print(f"\nmakespan: {report.makespan_ticks} ticks")
for robot, s in report.per_robot.items():
    print(f"  {robot}: busy {s.busy_ticks}, wait {s.wait_ticks}, idle {s.idle_ticks}")
