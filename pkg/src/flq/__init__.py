"""Floquet-Lindblad dynamical maps for periodically driven open quantum systems."""

from flq.bath import BathSet, Flat, OhmicCubedThermal, Tabulated, VacuumCutoff, lamb_shift
from flq.errors import (
    DegeneracyAmbiguityError,
    FlqError,
    InvalidArgumentError,
    ModelRejectionError,
    NoStationaryStateError,
    NumericFailure,
    OutOfRangeError,
    PreconditionError,
)
from flq.evolution import dynamical_map, dynamical_maps, evolve, limit_cycle, stationary_state, two_time_map
from flq.floquet import FloquetDecomposition, decompose
from flq.generator import GeneratorBundle, build_generator
from flq.hamiltonian import PeriodicHamiltonian
from flq.harmonics import HarmonicSet, build_harmonics, frequency_classes
from flq.models import ModelSpec, driven_oscillator, tls_cosine, tls_two_baths
from flq.pipeline import Numerics, System, assemble, solve
from flq.propagator import PropagatorConfig, monodromy, propagate
from flq.verify import verify_all

__version__ = "0.1.0"
