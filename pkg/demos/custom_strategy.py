"""Plug a new dispatch strategy into the registry.

``shortest_first`` hands every idle robot the cheapest open task it can do.
Once registered it is selected by name like the built-ins.
"""

from pathlib import Path

from amrmas import load_scenario, run_simulation
from amrmas.dispatch import Dispatch, DispatchStrategy, designations, register_strategy


@register_strategy("shortest_first")
class ShortestFirst(DispatchStrategy):
    uses_estimates = True

    def prepare(self, tasks, roster, estimates):
        self._est = dict(estimates)
        return None

    def _open(self, book):
        return [t for t in book.order if t not in book.terminal and t not in book.in_flight]

    def next_dispatches(self, tasks, book, roster):
        out, taken = [], set()
        for r in sorted(roster, key=lambda e: e.robot_id):
            if not r.idle:
                continue
            options = [t for t in self._open(book) if t not in taken and (t, r.robot_id) in self._est]
            if options:
                best = min(options, key=lambda t: self._est[(t, r.robot_id)])
                taken.add(best)
                out.append(Dispatch(best, r.robot_id))
        return out

    def requeue(self, book, task_id, robot_id):
        pass  # the task is still in book.order and becomes open again

    def has_pending(self, book):
        return bool(self._open(book))


scenario = load_scenario(Path(__file__).resolve().parents[1] / "scenarios" / "productx.json")
print("registered:", ", ".join(designations()))
for name in designations():
    print(f"{name:<15} makespan {run_simulation(scenario, name)[1].makespan_ticks}")
