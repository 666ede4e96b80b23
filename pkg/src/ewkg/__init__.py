"""Evolution code and verification harness for the 2+1 radially symmetric
Einstein-wave-Klein-Gordon system: a constrained Cauchy scheme, a double-null
characteristic scheme, flat-space solution oracles, and the energy / flux /
weighted-sup diagnostics of the regularity analysis."""

from ._kernels import BACKEND_NAME as kernel_backend
from .core import InitialDataFamily, RadialGrid, SimConfig, build_grid

__all__ = ["InitialDataFamily", "RadialGrid", "SimConfig", "build_grid",
           "kernel_backend"]

__version__ = "0.1.0"
