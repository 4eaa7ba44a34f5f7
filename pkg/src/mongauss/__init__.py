"""mongauss: monitored Gaussian dynamics of infinite-range bosonic systems.

Deterministic large-N covariance flows under quantum-jump, homodyne and
heterodyne monitoring, with symbolic generation of the equations of motion,
Gaussian-state entanglement tools, and finite-size exact-trajectory
benchmarks.
"""

__version__ = "0.1.0"

from . import exact, flow, gstate, opalg, unravel  # noqa: F401
