"""Ready-made model specifications: driven two-level systems and a driven oscillator."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from flq.bath import BathSet, Flat, OhmicCubedThermal, SpectralDensity, Tabulated, VacuumCutoff
from flq.errors import InvalidArgumentError
from flq.hamiltonian import PeriodicHamiltonian
from flq.linalg import as_operator, is_hermitian

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
SP = np.array([[0, 1], [0, 0]], dtype=complex)  # raises into the +1 eigenstate of SZ
SM = SP.T.copy()

INTERIOR_TAIL_TOL = 1e-8
# Quasifrequency class width for truncated oscillators: levels near the cutoff
# carry quasienergy errors far above roundoff, and a wider class would merge
# their transitions with the exact ladder lattice.
OSCILLATOR_FREQ_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ModelSpec:
    name: str
    hamiltonian: PeriodicHamiltonian
    couplings: tuple
    baths: BathSet
    coupling: float = 1.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        d = self.hamiltonian.dim
        norm = []
        for label, op in self.couplings:
            op = as_operator(op, f"coupling {label}")
            if op.shape[0] != d:
                raise InvalidArgumentError(f"coupling {label} has dimension {op.shape[0]}, Hamiltonian has {d}")
            if not is_hermitian(op):
                raise InvalidArgumentError(f"coupling {label} is not Hermitian")
            norm.append((str(label), op))
        labels = [lab for lab, _ in norm]
        unbound = set(self.baths.labels()) - set(labels)
        if unbound:
            raise InvalidArgumentError(f"baths bound to unknown coupling labels {sorted(unbound)}")
        if self.coupling < 0:
            raise InvalidArgumentError("coupling constant must be non-negative")
        object.__setattr__(self, "couplings", tuple(norm))

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim

    @property
    def labels(self):
        return tuple(lab for lab, _ in self.couplings)

    @property
    def freq_tol(self):
        """Model-recommended quasifrequency class width, or None for the library default."""
        return self.metadata.get("freq_tol")


def tls_cosine(omega0=0.5, Omega=2.0, lam=0.01, A=1.0, beta=2.0, coupling=1.0) -> ModelSpec:
    """Two-level system with a cosinusoidally modulated splitting and a thermal bath on ``sigma_x``.

    ``lam`` is the dimensionless drive strength; ``coupling`` scales the
    bath rates as ``coupling**2``.
    """
    if not (omega0 > 0 and Omega > 0 and A > 0):
        raise InvalidArgumentError("omega0, Omega and A must be positive")
    if lam < 0:
        raise InvalidArgumentError("lam must be non-negative")
    ratio = 2 * omega0 / Omega
    if abs(ratio - round(ratio)) < 1e-9:
        warnings.warn("2*omega0 is a multiple of Omega: shifted quasifrequencies coincide", stacklevel=2)
    h = PeriodicHamiltonian(2 * np.pi / Omega, {0: 0.5 * omega0 * SZ, 1: 0.5 * lam * Omega * SZ})
    meta = {"omega0": omega0, "Omega": Omega, "lam": lam, "A": A, "beta": beta}
    return ModelSpec("tls_cosine", h, (("x", SX),), BathSet.single("x", OhmicCubedThermal(A, beta)), coupling, meta)


def ladder(n: int) -> np.ndarray:
    """Truncated annihilation operator on ``n`` Fock levels."""
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)


def displacement_tails(alpha: float, n_trunc: int, pad: int = 80) -> np.ndarray:
    """Weight of each displaced number state ``D(alpha)|n>`` on levels ``>= n_trunc - 2``."""
    big = n_trunc + pad
    a = ladder(big)
    w = scipy.linalg.expm(alpha * a.conj().T - np.conj(alpha) * a)
    return np.array([np.sum(np.abs(w[n_trunc - 2 :, n]) ** 2) for n in range(n_trunc)])


def driven_oscillator(omega=1.0, Omega=0.9, g=0.05, n_trunc=14, A=1.0, beta=1.0, coupling=1.0) -> ModelSpec:
    """Harmonic oscillator under a monochromatic drive, thermal bath on ``a + a^dag``.

    ``metadata["interior_levels"]`` lists the displaced number states whose
    weight on the top two Fock levels is below 1e-8; only those are trusted.
    ``metadata["freq_tol"]`` is the class width the pipeline uses unless the
    numerics override it.
    """
    n_trunc = int(n_trunc)
    delta = omega - Omega
    if delta == 0:
        raise InvalidArgumentError("resonant drive (omega == Omega): the displaced representation diverges")
    if n_trunc < 8:
        raise InvalidArgumentError(f"n_trunc must be >= 8, got {n_trunc}")
    if Omega <= 0 or A <= 0:
        raise InvalidArgumentError("Omega and A must be positive")
    alpha = -g / delta
    if abs(alpha) > n_trunc / 8:
        raise InvalidArgumentError(f"|alpha| = {abs(alpha):.3g} exceeds n_trunc/8; increase n_trunc")
    a = ladder(n_trunc)
    num = a.conj().T @ a
    h = PeriodicHamiltonian(2 * np.pi / Omega, {0: omega * num, 1: g * a})
    tails = displacement_tails(alpha, n_trunc)
    interior = [n for n in range(n_trunc - 2) if tails[n] <= INTERIOR_TAIL_TOL]
    meta = {
        "omega": omega,
        "Omega": Omega,
        "g": g,
        "A": A,
        "beta": beta,
        "n_trunc": n_trunc,
        "delta": delta,
        "alpha": alpha,
        "edge_levels": [n_trunc - 2, n_trunc - 1],
        "interior_levels": interior,
        "freq_tol": OSCILLATOR_FREQ_TOL * Omega,
    }
    bath = BathSet.single("x", OhmicCubedThermal(A, beta))
    return ModelSpec("driven_oscillator", h, (("x", a + a.conj().T),), bath, coupling, meta)


def tls_two_baths(omega0=1.0, Omega=0.8, g=0.1, A=1.0, beta_e=None, gamma_d=None, beta_d=None, coupling=1.0) -> ModelSpec:
    """Two-level system under a rotating drive, coupled to an electromagnetic bath through
    ``sigma_x`` and to a dephasing bath through ``sigma_z``.

    ``beta_e=None`` selects the zero-temperature cutoff bath. ``gamma_d`` is the
    dephasing spectral density (a tabulated model by default, flat 0.05 on
    [-20, 20]).
    """
    if not (omega0 > 0 and Omega > 0 and A > 0):
        raise InvalidArgumentError("omega0, Omega and A must be positive")
    h = PeriodicHamiltonian(2 * np.pi / Omega, {0: 0.5 * omega0 * SZ, 1: g * SM})
    em: SpectralDensity = VacuumCutoff(A) if beta_e is None else OhmicCubedThermal(A, beta_e)
    if gamma_d is None:
        gamma_d = Tabulated(np.array([-20.0, 20.0]), np.array([0.05, 0.05]))
    if isinstance(gamma_d, (int, float)):
        gamma_d = Flat(float(gamma_d))
    baths = BathSet((("e", em), ("d", gamma_d)))
    meta = {"omega0": omega0, "Omega": Omega, "g": g, "A": A, "beta_e": beta_e, "beta_d": beta_d}
    return ModelSpec("tls_two_baths", h, (("e", SX), ("d", SZ)), baths, coupling, meta)


PRESETS = {
    "tls_cosine": tls_cosine,
    "driven_oscillator": driven_oscillator,
    "tls_two_baths": tls_two_baths,
}
