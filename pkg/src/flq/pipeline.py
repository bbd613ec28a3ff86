"""End-to-end construction: model -> Floquet data -> harmonics -> generator."""

from __future__ import annotations

from dataclasses import dataclass, field

from flq import evolution
from flq.bath import Tabulated, lamb_shift
from flq.errors import OutOfRangeError
from flq.floquet import FloquetDecomposition, decompose
from flq.generator import GeneratorBundle, build_generator
from flq.harmonics import HarmonicSet, build_harmonics
from flq.models import ModelSpec
from flq.propagator import PropagatorConfig


@dataclass(frozen=True)
class Numerics:
    propagator: PropagatorConfig = field(default_factory=PropagatorConfig)
    t0: float = 0.0
    q_max: int = 8
    q_cap: int = 64
    tail_tol: float = 1e-8
    freq_tol: float = None
    lamb_method: str = "zero"
    lamb_cutoff: float = None
    pv_tol: float = 1e-9


@dataclass(frozen=True, eq=False)
class System:
    model: ModelSpec
    floquet: FloquetDecomposition
    harmonics: HarmonicSet
    generator: GeneratorBundle
    numerics: Numerics

    def dynamical_map(self, t):
        return evolution.dynamical_map(self.floquet, self.generator, t)

    def evolve(self, rho0, times, observables=None):
        return evolution.evolve(rho0, times, self.floquet, self.generator, observables)

    def stationary_state(self):
        return evolution.stationary_state(self.generator)

    def limit_cycle(self, sigma_tilde, times):
        return evolution.limit_cycle(self.floquet, sigma_tilde, times)


def check_support(model: ModelSpec, harmonics: HarmonicSet):
    """Every tabulated bath must cover the shifted frequencies of its couplings."""
    missing = []
    for labels, bath in model.baths.entries:
        if not isinstance(bath, Tabulated):
            continue
        lo, hi = bath.support()
        xs = {round(h.shifted, 12) for h in harmonics if h.alpha in labels}
        missing += [x for x in sorted(xs) if x < lo or x > hi]
    if missing:
        raise OutOfRangeError(f"tabulated spectral density does not cover shifted frequencies {missing}", missing)


def freq_tol(model: ModelSpec, numerics: Numerics):
    """Explicit numerics setting, else the model's recommendation, else None (library default)."""
    return numerics.freq_tol if numerics.freq_tol is not None else model.freq_tol


def harmonics_for(model: ModelSpec, f: FloquetDecomposition, numerics: Numerics = Numerics()) -> HarmonicSet:
    return build_harmonics(f, model.couplings, numerics.q_max, numerics.q_cap, numerics.tail_tol, freq_tol(model, numerics))


def assemble(model: ModelSpec, f: FloquetDecomposition, numerics: Numerics = Numerics(), harmonics=None) -> System:
    if harmonics is None:
        harmonics = harmonics_for(model, f, numerics)
    check_support(model, harmonics)
    lamb = lamb_shift(
        model.baths,
        harmonics.labels,
        harmonics.shifted_frequencies(),
        numerics.lamb_method,
        numerics.lamb_cutoff,
        numerics.pv_tol,
    )
    gen = build_generator(harmonics, model.baths, model.coupling, lamb, model.dim)
    return System(model, f, harmonics, gen, numerics)


def solve(model: ModelSpec, numerics: Numerics = Numerics()) -> System:
    f = decompose(model.hamiltonian, numerics.t0, numerics.propagator)
    return assemble(model, f, numerics)


def zero_bath(model: ModelSpec) -> ModelSpec:
    """Same model with the bath coupling switched off."""
    return ModelSpec(model.name, model.hamiltonian, model.couplings, model.baths, 0.0, dict(model.metadata))

