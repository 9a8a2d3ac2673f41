"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.


Numeric defaults, tolerances and size caps shared by the whole package.
"""

DELTA = 0.05  # Default transition margin, gamma in [delta, 1-delta]
ZETA = 0.05  # Default connectivity margin, pi in [zeta, 1-zeta]

STOCHASTIC_TOL = 1e-12  # Row sums of a transition matrix
SYMMETRY_TOL = 1e-12  # Absolute symmetry of connectivity matrices
IDENTIFIABILITY_TOL = 1e-12  # Two connectivity entries are "different" above this
STATIONARY_TOL = 1e-10  # max |alpha Gamma - alpha|
CONDITION_MAX = 1e12  # Largest accepted condition number of the stationary system
CHAIN_TOL = 1e-8  # Consistency of variational marginals
ASCENT_SLACK = 1e-9  # Allowed decrease of the ELBO between sweeps

MAX_ALIGN_CLASSES = 8  # Exhaustive permutation search over Q! labelings
MAX_SUP_CLASSES = 5  # Vertex enumeration of Q^Q deterministic matrices
MAX_CONFIGURATIONS = 10**7  # Q^(nT) for brute force enumeration
MAX_JOINT_STATES = 10**5  # Q^n for the time transfer recursion
ENUMERATION_CHUNK = 2**16  # Configurations evaluated per vectorized block

E_STEP_TOL = 1e-6  # max |delta tau| between two sweeps
E_STEP_MAX_SWEEPS = 50
VEM_TOL = 1e-8  # |delta J| / (n(n-1)T/2)
VEM_MAX_ITERS = 200
VEM_RESTARTS = 8
DEGENERATE_MASS = 1e-6  # Fraction of nT below which a class is considered empty
MAX_REDRAWS = 5  # Re-initialisations of a degenerate restart
MAX_BACKTRACKS = 30  # Halvings of a Gamma step that lowers J
SMOOTH_ONE_HOT = 0.9  # Mass on the assigned class of a smoothed one-hot
LLOYD_ITERATIONS = 50

MLE_RESTARTS = 16
MLE_MAX_ITER = 500
MLE_POLISH_TOL = 1e-11  # max |delta theta| of the fixed-point polish
MLE_POLISH_MAX_ITER = 5000

SUP_IMPROVEMENT = 1e-12  # Alternating row maximisation stops below this gain
SUP_STARTS = 5

FAILURE_RATE_MAX = 0.5  # Estimator failure rate tolerated per experiment cell
MC_SIGMAS = 3.0  # Monte Carlo standard errors added to every bound

CSV_FLOAT_FORMAT = '%.12g'
RESULT_COLUMNS = [
    'n',
    'T',
    'Q',
    'replicate',
    'seed',
    'estimator',
    'pi_err',
    'gamma_err',
    'elbo_or_loglik',
    'iters',
    'wall_ms',
]
