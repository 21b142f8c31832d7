"""Model of a leaf-spring variable stiffness actuator.

A bank of parallel leaf springs is bent by a roller on a ball-screw carriage.
Motor 1 sets the equilibrium position; motor 2 moves the roller and hence the
joint stiffness. The package provides the closed-form spring mechanics, a
large-deflection beam solver to check them, rigid-body dynamics with an
energy ledger, PID servo loops and scenario runners with a CSV command line.
"""

from .config import Config, config_from_dict, config_to_dict, load_config
from .control import (MOTOR1_GAINS, MOTOR2_GAINS, PidController, PidGains, PidState, constant,
                      pid_step, position_command, ramp, stiffness_command)
from .csvio import read_csv, render_csv, write_csv
from .dynamics import (TRAJECTORY_COLUMNS, ActuatorParams, ActuatorState, DriveInputs,
                       EnergyLedger, Trajectory, VsaModel, rk4_step, simulate, state_derivative)
from .elastica import (ElasticaParams, ElasticaSolution, compare_with_linear,
                       force_from_constraint, linear_force, solve_tip_load)
from .errors import (ConfigError, ConvergenceError, ElasticaDomainError, InvalidParameterError,
                     ModelDomainError)
from .mechanism import (DEFAULT_SCREW, DEFAULT_SPRING, QD_MAX, ScrewParams, SpringBankParams,
                        contact_kinematics, joint_stiffness, motor_from_roller, potential_energy,
                        roller_from_motor, screw_reaction, spring_torque, stiffness_range,
                        stiffness_to_roller)
from .scenarios import ScenarioResult, ScenarioSpec, run

__version__ = "0.1.0"
