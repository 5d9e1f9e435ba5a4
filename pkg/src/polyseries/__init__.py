"""Three-choice polygon series: enumeration, ODE guessing, singularity
analysis and asymptotic amplitudes."""

from .ode import LinearODE
from .series import Series

__all__ = ["LinearODE", "Series"]
__version__ = "0.1.0"
