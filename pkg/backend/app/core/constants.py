"""
constants.py

Tolerances, budgets and environment-driven settings used throughout the toolkit.
"""

import os
from dotenv import load_dotenv

load_dotenv()

# Cache and output locations
CACHE_DIR = os.environ.get("CACHE_DIR", ".cache")
DEFAULT_OUTPUT_DIR = os.environ.get("OUTPUT_DIR", "results")

# Resource budgets
GRID_NODE_BUDGET = int(os.environ.get("GRID_NODE_BUDGET", "200000"))
DENSE_EIGEN_LIMIT = int(os.environ.get("DENSE_EIGEN_LIMIT", "4000"))
MAX_WORKERS = int(os.environ.get("MAX_WORKERS", "1"))
LOG_LEVEL = os.environ.get("LOG_LEVEL", "INFO")

# Membership and identity tolerances
MEMBERSHIP_TOL = 1e-10
SPHERE_TOL = 1e-12
CAYLEY_POLE_TOL = 1e-8
DENOMINATOR_TOL = 1e-13
IWASAWA_TOL = 1e-8
ACOSH_GUARD = 1e-12

# Spectral tolerances
KERNEL_TOL = 1e-9
ZERO_MODE_TOL = 1e-10
QUADRATURE_MASS_TOL = 1e-6
MASS_ERROR_LIMIT = 1e-2

# Numeric differentiation
JACOBIAN_STEP = 1e-5
FLOW_STEP = 1e-5

# Sampling
HYPERBOLIC_RADIUS_CAP = 6.0
DEFAULT_SEED = 12345

# CSV formatting: 17 significant digits
CSV_FLOAT_FORMAT = "{:.17g}"

SUPPORTED_GROUPS = ("so", "su", "sp")
