"""Interaction-picture generator, its dual, and the Schrodinger-picture Lindbladian."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from flq.bath import BathSet, LambShiftTable
from flq.errors import ModelRejectionError
from flq.harmonics import IDENTITY_TOL, HarmonicSet
from flq.linalg import commutator_super, dagger, left, right, sandwich

CLIP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class RateEntry:
    """Diagonalized coefficient matrix at one shifted quasifrequency.

    ``members`` lists the ``(class, q)`` labels whose ``omega + q Omega``
    coincide; their harmonics are summed before the jumps are formed.
    """

    members: tuple
    shifted: float
    gamma: np.ndarray  # [gamma_ab(omega + q Omega)] over the coupling labels, before lambda^2
    unitary: np.ndarray
    rates: np.ndarray  # lambda^2 times the eigenvalues of gamma
    jumps: list  # K_j = sum_a conj(W_aj) S_a(omega, q)


@dataclass(frozen=True, eq=False)
class GeneratorBundle:
    L_tilde: np.ndarray
    deltaH: np.ndarray
    L_tilde_dual: np.ndarray
    hamiltonian_part: np.ndarray
    dissipator: np.ndarray
    rate_table: list = field(default_factory=list)
    coupling: float = 1.0
    labels: tuple = ()

    @property
    def dim(self) -> int:
        return self.deltaH.shape[0]

    def jump_terms(self):
        """Flat list of ``(rate, K)`` over all rate entries."""
        return [(r, k) for e in self.rate_table for r, k in zip(e.rates, e.jumps)]


def dissipator_super(d: int, jumps) -> np.ndarray:
    """``sum_j r_j (K rho K^dag - 1/2 {K^dag K, rho})`` as a superoperator."""
    out = np.zeros((d * d, d * d), dtype=complex)
    for r, k in jumps:
        if r == 0:
            continue
        kk = dagger(k) @ k
        out += r * (sandwich(k, dagger(k)) - 0.5 * left(kk) - 0.5 * right(kk))
    return out


def dual_dissipator_super(d: int, jumps) -> np.ndarray:
    """``sum_j r_j (K^dag A K - 1/2 {K^dag K, A})`` as a superoperator."""
    out = np.zeros((d * d, d * d), dtype=complex)
    for r, k in jumps:
        if r == 0:
            continue
        kk = dagger(k) @ k
        out += r * (sandwich(dagger(k), k) - 0.5 * left(kk) - 0.5 * right(kk))
    return out


def _diagonalize(g: np.ndarray, x: float):
    w, v = np.linalg.eigh(0.5 * (g + dagger(g)))
    if w.min() < -CLIP_TOL:
        raise ModelRejectionError(
            f"rate matrix at shifted frequency {x:.12g} is not positive (eigenvalue {w.min():.3e})", x
        )
    return np.where(w < 0, 0.0, w), v


def _shifted_groups(harmonics: HarmonicSet):
    """``(class, q)`` labels clustered by shifted quasifrequency ``omega + q Omega``."""
    xs = {}
    for h in harmonics:
        xs.setdefault((h.cls, h.q), h.shifted)
    if not xs:
        return []
    tol = harmonics.classes.freq_tol
    keys = sorted(xs, key=lambda k: (xs[k], k))
    groups, current = [], [keys[0]]
    for a, b in zip(keys[:-1], keys[1:]):
        if xs[b] - xs[a] <= tol:
            current.append(b)
        else:
            groups.append(current)
            current = [b]
    groups.append(current)
    return [(float(np.mean([xs[k] for k in g])), tuple(g)) for g in groups]


def build_generator(
    harmonics: HarmonicSet,
    baths: BathSet,
    coupling: float = 1.0,
    lamb: LambShiftTable = None,
    dim: int = None,
) -> GeneratorBundle:
    """Assemble ``L~ = -i[dH, .] + D~'`` with rates scaled by ``coupling**2``.

    Harmonics are grouped by shifted quasifrequency ``x = omega + q Omega``:
    labels ``(omega, q)`` and ``(omega + Omega, q - 1)`` describe the same
    non-oscillating term, so the grouping does not depend on the quasienergy
    branch. At every ``x`` the coefficient matrix ``G_ab = gamma_ab(x)`` enters as
    ``sum_ab G_ba (S_a rho S_b^dag - 1/2 {S_b^dag S_a, rho})``; its
    eigendecomposition ``G = W g W^dag`` gives jumps ``K_j = sum_a conj(W_aj) S_a``.
    """
    labels = tuple(harmonics.labels)
    if dim is None:
        if not harmonics.harmonics:
            raise ValueError("dimension is required for an empty harmonic set")
        dim = harmonics.harmonics[0].op.shape[0]
    lam2 = float(coupling) ** 2
    table = harmonics.lookup()
    entries = []
    delta_h = np.zeros((dim, dim), dtype=complex)
    for x, members in _shifted_groups(harmonics):
        g = baths.gamma_matrix(labels, x)
        ops = []
        for i, lab in enumerate(labels):
            parts = [table[(lab, c, q)].op for c, q in members if (lab, c, q) in table]
            op = sum(parts) if parts else np.zeros((dim, dim), dtype=complex)
            cross = np.any(np.abs(np.delete(g[i], i)) > 0)
            nrm = np.linalg.norm(op)
            identity = nrm > 0 and np.linalg.norm(op - np.trace(op) / dim * np.eye(dim)) <= IDENTITY_TOL * nrm
            ops.append(np.zeros((dim, dim), dtype=complex) if identity and not cross else op)
        rates, w = _diagonalize(g, x)
        jumps = [sum(np.conj(w[a, j]) * ops[a] for a in range(len(labels))) for j in range(len(labels))]
        entries.append(RateEntry(members, x, g, w, lam2 * rates, jumps))
        if lamb is not None and not lamb.zero:
            sig = lamb.sigma(x)
            for a in range(len(labels)):
                for b in range(len(labels)):
                    if sig[a, b] != 0:
                        delta_h += lam2 * sig[a, b] * dagger(ops[a]) @ ops[b]
    delta_h = 0.5 * (delta_h + dagger(delta_h))
    jumps = [(r, k) for e in entries for r, k in zip(e.rates, e.jumps)]
    ham = -1j * commutator_super(delta_h)
    diss = dissipator_super(dim, jumps)
    dual = dual_dissipator_super(dim, jumps) + 1j * commutator_super(delta_h)
    return GeneratorBundle(ham + diss, delta_h, dual, ham, diss, entries, float(coupling), labels)


def dual_generator(bundle: GeneratorBundle) -> np.ndarray:
    return bundle.L_tilde_dual


def schrodinger_lindbladian(bundle: GeneratorBundle, f, t, u=None) -> np.ndarray:
    """``L_t = -i[H_S(t), .] + U o L~ o U^-1``.

    The Lamb-shift term rides along inside ``U o L~ o U^-1`` as
    ``-i[U dH U^dag, .]``, which equals ``H_phys = H_S + dH`` at ``t = t0``.
    """
    if u is None:
        u = f.propagator(t)
    conj = sandwich(u, dagger(u))
    back = sandwich(dagger(u), u)
    return -1j * commutator_super(f.hamiltonian.evaluate(t)) + conj @ bundle.L_tilde @ back


def physical_hamiltonian(bundle: GeneratorBundle, f, t, u=None) -> np.ndarray:
    if u is None:
        u = f.propagator(t)
    return f.hamiltonian.evaluate(t) + u @ bundle.deltaH @ dagger(u)
