"""Floquet representation ``U_{t,t0} = P_{t,t0} exp(-i Hbar (t - t0))``."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from flq.errors import InvalidArgumentError
from flq.hamiltonian import PeriodicHamiltonian
from flq.linalg import dagger, unitary_eig
from flq.propagator import DEFAULT_CONFIG, PropagatorConfig, monodromy, propagate_grid


@dataclass(frozen=True, eq=False)
class FloquetDecomposition:
    """Monodromy, averaged Hamiltonian and its eigensystem.

    ``quasienergies`` are principal values unless the decomposition was
    re-branched; ``unfolded`` holds, for each basis vector, the representative
    nearest to the expectation value of the static part of ``H``.
    """

    hamiltonian: PeriodicHamiltonian
    t0: float
    monodromy: np.ndarray
    quasienergies: np.ndarray
    floquet_basis: np.ndarray
    unfolded: np.ndarray
    config: PropagatorConfig = DEFAULT_CONFIG

    @property
    def period(self) -> float:
        return self.hamiltonian.period

    @property
    def omega(self) -> float:
        return self.hamiltonian.omega

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim

    @property
    def hbar(self) -> np.ndarray:
        z = self.floquet_basis
        h = (z * self.quasienergies) @ dagger(z)
        return 0.5 * (h + dagger(h))

    def evolution_hbar(self, tau) -> np.ndarray:
        """``exp(-i Hbar tau)`` from the stored eigensystem."""
        z = self.floquet_basis
        return (z * np.exp(-1j * self.quasienergies * tau)) @ dagger(z)

    def shifted(self, shifts) -> "FloquetDecomposition":
        """Move quasienergy ``k`` to ``eps_k + shifts[k] * Omega``.

        The monodromy is unchanged; ``Hbar`` and ``P`` change branch.
        """
        shifts = np.asarray(shifts, dtype=int)
        if shifts.shape != self.quasienergies.shape:
            raise InvalidArgumentError("one integer shift per quasienergy is required")
        return replace(self, quasienergies=self.quasienergies + shifts * self.omega)

    def rebranch(self, reference) -> "FloquetDecomposition":
        """Pick for every level the branch nearest to ``<phi_k|reference|phi_k>``."""
        return self.shifted(_nearest_shifts(self, reference))

    def unfolded_decomposition(self) -> "FloquetDecomposition":
        return replace(self, quasienergies=self.unfolded.copy())

    # -- propagators ---------------------------------------------------------

    def propagators(self, times) -> np.ndarray:
        """``U_{t,t0}`` for arbitrary ``times >= t0``, built as ``U_{tau,t0} M^n``."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if np.any(times < self.t0 - 1e-14 * max(1.0, abs(self.t0))):
            raise InvalidArgumentError("propagators are only available for t >= t0")
        rel = np.maximum(times - self.t0, 0.0)
        n = np.floor(rel / self.period + 1e-12).astype(int)
        tau = np.clip(rel - n * self.period, 0.0, None)
        order = np.argsort(tau, kind="stable")
        within = propagate_grid(self.hamiltonian, self.t0, self.t0 + tau[order], self.config)
        out = np.empty((times.size, self.dim, self.dim), dtype=complex)
        for j, i in enumerate(order):
            out[i] = within[j] @ self.evolution_hbar(n[i] * self.period) if n[i] else within[j]
        return out

    def propagator(self, t) -> np.ndarray:
        return self.propagators([t])[0]

    def periodic_part(self, t) -> np.ndarray:
        """``P_{t,t0} = U_{t,t0} exp(+i Hbar (t - t0))``."""
        return periodic_parts(self, [t])[0]


def periodic_parts(f: FloquetDecomposition, times) -> np.ndarray:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    u = f.propagators(times)
    return np.stack([u[i] @ f.evolution_hbar(-(t - f.t0)) for i, t in enumerate(times)])


def periodic_part(f: FloquetDecomposition, t) -> np.ndarray:
    return f.periodic_part(t)


def _nearest_shifts(f: FloquetDecomposition, reference) -> np.ndarray:
    z = f.floquet_basis
    target = np.real(np.einsum("ik,ij,jk->k", z.conj(), np.asarray(reference), z))
    return np.rint((target - f.quasienergies) / f.omega).astype(int)


def decompose(h: PeriodicHamiltonian, t0: float = 0.0, cfg: PropagatorConfig = DEFAULT_CONFIG) -> FloquetDecomposition:
    """Monodromy, ``Hbar = (i/T) log M``, quasienergies and Floquet basis."""
    m = monodromy(h, t0, cfg)
    phases, z = unitary_eig(m)
    # M = exp(-i Hbar T), so eps = -phase / T; the +pi branch edge maps to -pi/T
    eps = -phases / h.period
    order = np.argsort(eps, kind="stable")
    eps, z = eps[order], z[:, order]
    f = FloquetDecomposition(h, float(t0), m, eps, z, eps.copy(), cfg)
    unfolded = eps + _nearest_shifts(f, h.static_part()) * h.omega
    return replace(f, unfolded=unfolded)
