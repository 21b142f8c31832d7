"""Static characteristics of the default actuator.

Prints a few columns of the torque-deflection family, the stiffness range and
the disturbance torque seen by the stiffness motor. Nothing here integrates
in time; it is all closed form.
"""

from leafvsa import mechanism as m
from leafvsa.scenarios import ScenarioSpec, run

torque = run(ScenarioSpec("static-torque", qd=(0.05, 0.1, 0.2, 0.3), xr=(0.01, 0.02, 0.04, 0.08)))
print("output torque tau_s (N m)")
print("  q_d    " + "".join(f"x_r={x:<9}" for x in (0.01, 0.02, 0.04, 0.08)))
for q in (0.05, 0.1, 0.2, 0.3):
    vals = [r["tau_s"] for r in torque.rows if r["q_d"] == q]
    print(f"  {q:<6} " + "".join(f"{v:<13.2f}" for v in vals))

k_min, k_max = m.stiffness_range()
print(f"\nstiffness at equilibrium spans {k_min:.3f} .. {k_max:.1f} N m/rad "
      f"(x {k_max / k_min:.0f}) over the roller travel")

dist = run(ScenarioSpec("disturbance-map"))
print(f"largest disturbance torque on motor 2: {dist.summary['max_tau_sd_abs']:.3f} N m "
      f"at q_d={dist.summary['argmax_q_d']}, x_r={dist.summary['argmax_x_r']}")
print("at q_d = 0 it is exactly", float(m.screw_reaction(0.0, 0.03)[1]))
