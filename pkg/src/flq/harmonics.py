"""Harmonic jump operators ``S_alpha(omega, q)`` on the shifted quasifrequency lattice."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from flq.errors import DegeneracyAmbiguityError, InvalidArgumentError, NumericFailure
from flq.floquet import FloquetDecomposition, periodic_parts
from flq.linalg import as_operator, dagger, fro, is_hermitian

Q_MAX_DEFAULT = 8
Q_MAX_CAP = 64
TAIL_TOL = 1e-8
DROP_TOL = 1e-12
IDENTITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class JumpHarmonic:
    alpha: str
    omega: float
    q: int
    op: np.ndarray
    shifted: float
    cls: int = 0
    identity: bool = False

    @property
    def norm(self) -> float:
        return fro(self.op)


@dataclass(frozen=True, eq=False)
class FrequencyClasses:
    """Quasienergy clusters and the Bohr-Floquet quasifrequency classes they span."""

    projectors: list  # one projector per quasienergy cluster
    energies: np.ndarray  # cluster mean quasienergies
    omegas: np.ndarray  # class representatives
    members: list  # per class: list of (c, d) cluster pairs with e_c - e_d in the class
    freq_tol: float
    basis: np.ndarray = None  # Floquet basis the masks refer to
    masks: list = None  # per class: boolean (d, d) mask of eigenbasis entries

    def conjugate(self, k: int) -> int:
        """Index of the class holding ``-omegas[k]``."""
        pair = self.members[k][0]
        flipped = (pair[1], pair[0])
        for j, mem in enumerate(self.members):
            if flipped in mem:
                return j
        raise AssertionError("class set is not closed under negation")


@dataclass(frozen=True, eq=False)
class HarmonicSet:
    harmonics: list
    classes: FrequencyClasses
    drive_omega: float
    q_max: dict = field(default_factory=dict)
    tail: dict = field(default_factory=dict)
    labels: tuple = ()

    def __iter__(self):
        return iter(self.harmonics)

    def __len__(self):
        return len(self.harmonics)

    def for_alpha(self, alpha):
        return [h for h in self.harmonics if h.alpha == alpha]

    def lookup(self) -> dict:
        """``(alpha, class index, q) -> JumpHarmonic``."""
        return {(h.alpha, h.cls, h.q): h for h in self.harmonics}

    def shifted_frequencies(self) -> np.ndarray:
        return np.unique(np.round([h.shifted for h in self.harmonics], 12))

    def table(self):
        """Rows ``(alpha, omega, q, omega + q Omega, ||S||_F)``."""
        return [(h.alpha, h.omega, h.q, h.shifted, h.norm) for h in self.harmonics]


def _couplings(couplings):
    items = couplings.items() if isinstance(couplings, dict) else couplings
    out = []
    for label, op in items:
        op = as_operator(op, f"coupling {label}")
        if not is_hermitian(op):
            raise InvalidArgumentError(f"coupling {label} is not Hermitian")
        out.append((str(label), op))
    if len({lab for lab, _ in out}) != len(out):
        raise InvalidArgumentError("coupling labels must be unique")
    return out


def interaction_coupling(f: FloquetDecomposition, s, t) -> np.ndarray:
    """``U_{t,t0}^dag S U_{t,t0}``."""
    u = f.propagator(t)
    return dagger(u) @ np.asarray(s) @ u


def _default_samples(q_max: int) -> int:
    return int(2 ** np.ceil(np.log2(4 * q_max + 4)))


def sample_rotated(f: FloquetDecomposition, ops, n_samples: int) -> np.ndarray:
    """``P^-1 S P`` at ``n_samples`` uniform times over one period, per operator."""
    times = f.t0 + f.period * np.arange(n_samples) / n_samples
    p = periodic_parts(f, times)
    pd = dagger(p)
    return np.stack([pd @ op @ p for op in ops])


def fourier_modes(f: FloquetDecomposition, s, q_max: int = Q_MAX_DEFAULT, n_samples=None, samples=None):
    """Fourier coefficients ``S(q)`` of ``P^-1 S P`` for ``|q| <= q_max``.

    Returns ``(modes, tail)`` where ``tail`` is the Frobenius mass of the
    resolved coefficients with ``|q| > q_max``.
    """
    if q_max < 0:
        raise InvalidArgumentError(f"q_max must be non-negative, got {q_max}")
    if n_samples is None:
        n_samples = _default_samples(q_max)
    if n_samples < 4 * q_max + 4 or n_samples & (n_samples - 1):
        raise InvalidArgumentError(f"n_samples must be a power of two >= 4*q_max + 4, got {n_samples}")
    if samples is None:
        samples = sample_rotated(f, [np.asarray(s, dtype=complex)], n_samples)[0]
    coeffs = np.fft.fft(samples, axis=0) / n_samples
    qs = np.fft.fftfreq(n_samples, 1.0 / n_samples).astype(int)
    modes = {int(q): coeffs[i] for i, q in enumerate(qs) if abs(q) <= q_max}
    tail = float(np.sqrt(sum(fro(coeffs[i]) ** 2 for i, q in enumerate(qs) if abs(q) > q_max)))
    return dict(sorted(modes.items())), tail


def _single_linkage(values, tol):
    order = np.argsort(values, kind="stable")
    groups, current = [], [order[0]]
    for a, b in zip(order[:-1], order[1:]):
        if values[b] - values[a] <= tol:
            current.append(b)
        else:
            groups.append(current)
            current = [b]
    groups.append(current)
    return groups


def frequency_classes(f: FloquetDecomposition, freq_tol=None, eps_tol=None) -> FrequencyClasses:
    """Cluster quasienergies and their differences.

    A difference cluster wider than ``freq_tol`` means single linkage chained
    distinct frequencies together; that is reported, never merged silently.
    """
    freq_tol = 1e-7 * f.omega if freq_tol is None else float(freq_tol)
    eps_tol = 1e-8 * f.omega if eps_tol is None else float(eps_tol)
    if freq_tol <= 0:
        raise InvalidArgumentError("freq_tol must be positive")
    eps = f.quasienergies
    clusters = _single_linkage(eps, eps_tol)
    z = f.floquet_basis
    projectors = [z[:, idx] @ dagger(z[:, idx]) for idx in clusters]
    energies = np.array([eps[idx].mean() for idx in clusters])
    n = len(clusters)
    pairs = [(c, d) for c in range(n) for d in range(n)]
    diffs = np.array([energies[c] - energies[d] for c, d in pairs])
    groups = _single_linkage(diffs, freq_tol)
    bad = []
    for g in groups:
        span = diffs[g].max() - diffs[g].min()
        if span > freq_tol:
            bad.extend((pairs[i][0], pairs[i][1], float(diffs[i])) for i in g)
    if bad:
        raise DegeneracyAmbiguityError(
            f"quasifrequency clustering at tolerance {freq_tol:.3e} links distinct frequencies", bad
        )
    omegas = np.array([diffs[g].mean() for g in groups])
    # exact antisymmetry of the class representatives
    members = [[pairs[i] for i in g] for g in groups]
    for k, mem in enumerate(members):
        c, d = mem[0]
        for j, other in enumerate(members):
            if (d, c) in other and j >= k:
                mean = 0.5 * (omegas[k] - omegas[j])
                omegas[k], omegas[j] = mean, -mean
    d = f.dim
    label = np.empty(d, dtype=int)
    for c, idx in enumerate(clusters):
        label[idx] = c
    masks = []
    for mem in members:
        allowed = np.zeros((n, n), dtype=bool)
        for c, dd in mem:
            allowed[c, dd] = True
        masks.append(allowed[np.ix_(label, label)])
    return FrequencyClasses(projectors, energies, omegas, members, freq_tol, z, masks)


def frequency_split(classes: FrequencyClasses, modes: dict, alpha="0", drive_omega=0.0, norm_ref=None):
    """Split every Fourier mode into its quasifrequency components.

    The split is done entry-wise in the Floquet basis, so each component is
    accurate relative to its own norm rather than to the norm of ``S(q)``.
    """
    ref = norm_ref if norm_ref is not None else max((fro(m) for m in modes.values()), default=0.0)
    z = classes.basis
    out = []
    for q, sq in modes.items():
        rotated = dagger(z) @ sq @ z
        for k, omega in enumerate(classes.omegas):
            block = np.where(classes.masks[k], rotated, 0)
            nrm = fro(block)
            if nrm == 0.0 or nrm < DROP_TOL * max(ref, 1e-300):
                continue
            op = z @ block @ dagger(z)
            d = op.shape[0]
            iso = fro(op - np.trace(op) / d * np.eye(d)) <= IDENTITY_TOL * nrm
            out.append(JumpHarmonic(str(alpha), float(omega), int(q), op, float(omega + q * drive_omega), k, iso))
    return out


def build_harmonics(
    f: FloquetDecomposition,
    couplings,
    q_max: int = Q_MAX_DEFAULT,
    q_cap: int = Q_MAX_CAP,
    tail_tol: float = TAIL_TOL,
    freq_tol=None,
    classes: FrequencyClasses = None,
) -> HarmonicSet:
    """Harmonic decomposition of every coupling, raising ``q_max`` until the tail is certified."""
    couplings = _couplings(couplings)
    if classes is None:
        classes = frequency_classes(f, freq_tol)
    q = int(q_max)
    if q < 0:
        raise InvalidArgumentError(f"q_max must be non-negative, got {q_max}")
    pending = list(couplings)
    results, qmax_used, tails = {}, {}, {}
    while pending:
        n_samples = _default_samples(q)
        samples = sample_rotated(f, [op for _, op in pending], n_samples)
        still = []
        for (label, op), smp in zip(pending, samples):
            modes, tail = fourier_modes(f, op, q, n_samples, smp)
            if tail < tail_tol * max(fro(op), 1e-300) or q >= q_cap:
                results[label] = frequency_split(classes, modes, label, f.omega, fro(op))
                qmax_used[label], tails[label] = q, tail
            else:
                still.append((label, op))
        pending = still
        if pending:
            q = min(2 * max(q, 1), q_cap)
    for label, tail in tails.items():
        if tail >= tail_tol * max(fro(dict(couplings)[label]), 1e-300):
            raise NumericFailure(
                f"Fourier tail of coupling {label} did not fall below {tail_tol:.1e} by q_max = {q_cap}",
                {"alpha": label, "tail": tail, "q_max": qmax_used[label]},
            )
    harmonics = [h for label, _ in couplings for h in results[label]]
    return HarmonicSet(harmonics, classes, f.omega, qmax_used, tails, tuple(lab for lab, _ in couplings))
