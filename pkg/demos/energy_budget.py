"""What it costs to change stiffness.

Sweeps the roller from the soft to the stiff end in one second, once with the
link at equilibrium and once with the link deflected by 0.15 rad, and holds
the stiff setting afterwards.
"""

from leafvsa.scenarios import ScenarioSpec, run

s = run(ScenarioSpec("stiffness-sweep-energy")).summary
print(f"sweep at equilibrium:   {s['W_m2_abs_equilibrium']:.4f} J "
      f"(viscous bound {s['friction_bound']:.4f} J)")
print(f"sweep at q_d = 0.15:    {s['W_m2_abs_deflected']:.3f} J")
print(f"extra for the deflection {s['excess']:.3f} J, spring energy gained {s['delta_U']:.3f} J")
print(f"holding any setting at rest: peak motor-2 power {s['hold_max_abs_P_m2']} W")
