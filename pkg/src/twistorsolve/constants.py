"""Numerical thresholds shared across modules.

These are defaults; every public function that uses one accepts an override.
"""

# default truncation half-order: 2N = 64 samples on the unit circle
DEFAULT_N = 32

# a circle function whose modulus drops below this at a sample is treated as vanishing
INDEX_FLOOR = 1e-10

# largest admissible phase increment between adjacent samples when unwrapping
PHASE_JUMP_MAX = 0.5 * 3.141592653589793

# spectral adequacy: |modes| with |k| >= TAIL_START*N must hold < TAIL_RATIO of the mass
TAIL_START = 0.75
TAIL_RATIO = 1e-10
# tails below this absolute mode mass are roundoff and never count as fat
TAIL_ABS_FLOOR = 1e-16

# Riemann solver
NEWTON_TOL = 1e-12
NEWTON_MAX_ITERS = 50
HOMOTOPY_STEPS = 64

# scaffold geometry
NODE_CLEARANCE = 0.05
INNER_BUDGET = 0.9
F_MINUS_FLOOR = 1e-12

# inverse construction
EPS1 = 0.05
T_MAX = 0.02
CHEB_DEGREE = 12
ODE_RTOL = 1e-12
ODE_ATOL = 1e-14

# non-degeneracy: |partial derivative| below this counts as vanishing
NONDEGENERACY_FLOOR = 1e-12
