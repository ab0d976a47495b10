"""Rephasing efficiency of phased pulse sequences in inhomogeneous two-level ensembles."""
from . import efficiency, ensemble, pulses, sequences, su2
from .errors import ConfigError, ConvergenceError, DomainError, RephasingError, ValidationError
from .gamma import complex_gamma, complex_loggamma
from .su2 import (apply, bloch_vector, compose, density_from_bloch, density_matrix, extract_angles,
                  gate_from_angles)

__version__ = "0.1.0"
