"""Time-periodic Hamiltonians stored as finite Fourier-mode families."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from flq.errors import InvalidArgumentError
from flq.linalg import as_operator, dagger, fro

MODE_WARN_LIMIT = 32


@dataclass(frozen=True)
class PeriodicHamiltonian:
    """``H(t) = sum_q H_q exp(i q Omega (t - t_ref))`` with ``H_{-q} = H_q^dag``.

    Only one of each conjugate pair needs to be supplied; the partner is
    filled in at construction. Supplying both requires them to agree.
    """

    period: float
    modes: dict = field(default_factory=dict)
    t_ref: float = 0.0

    def __post_init__(self):
        period = float(self.period)
        if not np.isfinite(period) or period <= 0:
            raise InvalidArgumentError(f"period must be positive, got {self.period}")
        object.__setattr__(self, "period", period)
        if not self.modes:
            raise InvalidArgumentError("at least one Fourier mode is required")
        modes = {}
        for q, m in self.modes.items():
            q = int(q)
            modes[q] = as_operator(m, f"mode {q}")
        dims = {m.shape[0] for m in modes.values()}
        if len(dims) != 1:
            raise InvalidArgumentError(f"modes have inconsistent dimensions {sorted(dims)}")
        for q in list(modes):
            partner = dagger(modes[q])
            if -q not in modes:
                modes[-q] = partner
            elif fro(modes[-q] - partner) > 1e-12 * max(1.0, fro(partner)):
                raise InvalidArgumentError(f"modes {q} and {-q} are not Hermitian conjugates")
        for q in modes:
            if q < 0:
                continue
            # enforce exact conjugate symmetry
            modes[-q] = dagger(modes[q])
        if 0 in modes:
            modes[0] = 0.5 * (modes[0] + dagger(modes[0]))
        if max(abs(q) for q in modes) > MODE_WARN_LIMIT:
            warnings.warn(f"Hamiltonian uses harmonics beyond |q| = {MODE_WARN_LIMIT}", stacklevel=2)
        for m in modes.values():
            m.setflags(write=False)
        object.__setattr__(self, "modes", dict(sorted(modes.items())))

    @property
    def dim(self) -> int:
        return next(iter(self.modes.values())).shape[0]

    @property
    def omega(self) -> float:
        return 2 * np.pi / self.period

    @property
    def max_harmonic(self) -> int:
        return max(abs(q) for q in self.modes)

    def evaluate(self, t: float) -> np.ndarray:
        # reduce to one period so evaluate(t + T) == evaluate(t) to rounding
        tau = np.mod(t - self.t_ref, self.period)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for q, m in self.modes.items():
            out += m * np.exp(1j * q * self.omega * tau)
        return 0.5 * (out + dagger(out))

    def evaluate_many(self, times) -> np.ndarray:
        """Stack of ``H(t)`` for an array of times, shape ``(n, d, d)``."""
        times = np.asarray(times, dtype=float)
        tau = np.mod(times - self.t_ref, self.period)
        qs = np.array(list(self.modes))
        stack = np.stack(list(self.modes.values()))
        phases = np.exp(1j * self.omega * np.outer(tau, qs))
        out = np.einsum("nq,qij->nij", phases, stack)
        return 0.5 * (out + dagger(out))

    def static_part(self) -> np.ndarray:
        return np.array(self.modes.get(0, np.zeros((self.dim, self.dim), dtype=complex)))

    def with_period(self, period: float) -> "PeriodicHamiltonian":
        return PeriodicHamiltonian(period, dict(self.modes), self.t_ref)
