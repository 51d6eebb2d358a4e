"""Numerical defaults shared across the package.

Every tolerance, grid size and budget that is not an explicit argument
lives here so the test suite and the CLI agree on one set of numbers.
"""

# fine-structure constant (CODATA 2018)
ALPHA_FS = 1.0 / 137.035999084

# quadrature
QUAD_TOL = 1e-10
QUAD_MAX_PANELS = 4000
QUAD_TAIL_SCALE = 1.0

# quantization root finding
ROOT_XTOL = 1e-15
RESIDUAL_TOL = 1e-10

# finite-difference grids
GRID_POINTS = 4000
HYDROGEN_R_MIN_FRACTION = 1e-4
MORSE_RHO_MIN = 1e-8
BOUNDARY_TRIM = 4

# shooting oracle
SHOOT_RTOL = 1e-11
SHOOT_RESCALE = 1e100
SCAN_POINTS = 2000
SCAN_GRID_POINTS = 3000
ROOT_EPS_TOL = 1e-10

# report / CLI
DEFAULT_SEED = 42
FLOAT_DIGITS = 17
THREADS_ENV = "CURVED_DIRAC_THREADS"
