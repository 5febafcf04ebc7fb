"""Generalized imaginary units in Schrodinger dynamics, audited numerically.

Two candidate replacements for the imaginary unit are implemented side by
side: the complex phase deformation e^{i theta} i, which fails to square
to -1 and instead describes non-conservative (evanescent or growing)
states, and the quaternionic unit e^{i xi} j, which does square to -1 and
carries a genuinely quaternionic time evolution.  Every identity either
theory relies on is checked against an independent oracle by the audit
registry; the command line front end runs audits, evolutions and
eigen-reductions from TOML scenario files.
"""

from .quaternion import (Quaternion, ONE, I, J, K, generalized_unit,
                         complex_unit_candidate, unit_rotor, rotor_angles)
from .grid import (Grid1D, ComplexField, QuatField, grad, laplace, integrate,
                   box_eigenstates, field_to_csv, PERIODIC, DIRICHLET)
from .schedules import (AngleSchedule, AngleFn, ConstantPhases, ForcedPhases,
                        SingularForcing, SpaceLinear, build_schedule,
                        integrate_forced_phases, stationary_rotor, rotor_at,
                        rotor_rate_residual, rotor_generator, rotor_gradient,
                        rotor_laplacian, rotor_laplace_eigenvalue)
from .reports import ContinuityReport

__version__ = "0.1.0"
