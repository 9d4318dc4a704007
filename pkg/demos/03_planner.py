"""Sample-size planning and the competing sample-count expressions.

Run: python demos/03_planner.py
"""

from ammsketch import competing_bounds, required_samples

eps, n = 0.25, 10_000
print(f"epsilon = {eps}, n = {n}")
print(f"{'sr':>6} {'planner m (c=4)':>16} {'proposed':>12} {'dkm':>12} {'rotation':>12}")
for sr in (1, 2, 4, 16, 64, 256):
    plan = required_samples(sr, sr, eps)
    comp = competing_bounds(sr, sr, eps, n)
    print(f"{sr:>6} {plan.m_required:>16} {comp.proposed:>12.0f} {comp.dkm:>12.0f} {comp.rotation:>12.0f}")

plan = required_samples(16, 4, 0.5)
print(f"\nsr = (16, 4), eps = 0.5: m = {plan.m_required}; at t = {plan.t:.2f} the tail bound gives "
      f"deviation {plan.tail.deviation:.3f} with failure prob {plan.tail.failure_prob:.3f}")
