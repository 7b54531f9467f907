"""
This contains global default values for the library.
"""

import math

# Operators
POWER_ITERATIONS = 100
POWER_SEED = 0

# Simulation
MIN_PHANTOM_SIZE = 16
DEFAULT_NOISE_SCALE = 1e-4
SMAP_WINDOW = 20
SMAP_EPS = 1e-12
SMAP_THRESHOLD = 0.05
COMBINE_SMOOTHING_DIVISOR = 32
COIL_RING_RADIUS = 0.5
COIL_LOBE_WIDTH = 0.45

# Priors
WAVELET = "haar"
WAVELET_LEVELS = 3
TAU_GAIN = math.sqrt(2.0)
EXTERNAL_TIMEOUT = 60.0

# Neighbor2Neighbor
N2N_ETA = 2.0
# sgd step in units of 1 / L, L the curvature of the pooled loss
N2N_LR = 1.0
N2N_ADAM_LR = 1e-3
N2N_DRAWS = 4
N2N_KERNEL_SIZE = 5
N2N_BATCH_SIZE = 1
N2N_DIVERGENCE_FACTOR = 1e3
N2N_ADAM_BETAS = (0.9, 0.999)
N2N_ADAM_EPS = 1e-8

# Solvers
N_ITER = 100
CG_TOL = 1e-6
CG_MAX_ITER = 50
EARLY_STOP_RTOL = 1e-9
F1_ALPHA = 1.0
CHEBYSHEV_C0 = 4.0
CHEBYSHEV_C1 = 10.0 / 3.0
STATIONARITY_TOL = 1e-12
VERIFY_MAX_ITER = 10000
VERIFY_TOL = 1e-8
GRID_HALF_WIDTH = 5.0
GRID_STEP = 1e-4

# Metrics
SSIM_WINDOW_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
PSNR_CSV_CAP = 999.0

# Benchmark
SEED_ENV_VAR = "PNP_SEED"
EXIT_SUCCESS = 0
EXIT_SOLVER_FAILURE = 1
EXIT_CONFIG_ERROR = 2
