"""Sequential vs balanced dispatch over a handful of random fleets."""

from amrmas import run_simulation
from amrmas.generators import random_scenario

print(f"{'seed':>4} {'robots':>6} {'tasks':>5} {'sequential':>10} {'balanced':>9}")
wins = 0
for seed in range(10):
    s = random_scenario(seed, n_obstacles=1)
    seq = run_simulation(s, "sequential")[1].makespan_ticks
    bal = run_simulation(s, "balanced")[1].makespan_ticks
    wins += bal <= seq
    print(f"{seed:>4} {len(s.robots):>6} {len(s.tasks):>5} {seq:>10} {bal:>9}")
print(f"\nbalanced no worse on {wins}/10")
