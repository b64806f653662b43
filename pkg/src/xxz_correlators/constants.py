CONFIG_FILENAME = 'xxz-run.toml'
ROOT_MARKERS = [
    CONFIG_FILENAME,
    'pyproject.toml',
    'setup.cfg',
    '.git',
]

DEFAULTS_PACKAGE = 'xxz_correlators.data'
DEFAULTS_FILENAME = 'defaults.toml'

THREADS_ENV = 'XXZ_THREADS'

# |sinh(.)| below this is treated as a pole of b, c, d and the kernels.
POLE_TOL = 1e-12

# Zero-over-zero pair factors in the integrands switch to their derivative ratio below this.
REMOVABLE_TOL = 1e-10

# Tail bound for theta series and q-products.
SERIES_TOL = 1e-16

# Anisotropies closer than this to the isotropic point are rejected.
ISOTROPIC_GAP = 1e-6
