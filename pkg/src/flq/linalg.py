"""Dense complex matrix substrate.

Superoperators act on column-stacked vectorizations: ``vec(X)`` stacks the
columns of ``X``, so the map ``X -> A X B`` has matrix ``kron(B.T, A)``.
Every superoperator in the package follows this convention.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from flq.errors import InvalidArgumentError, PreconditionError

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10

_BRANCH_EDGE_TOL = 1e-12


def as_operator(m, name="operator") -> np.ndarray:
    """Return ``m`` as a finite, square complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgumentError(f"{name} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidArgumentError(f"{name} has non-finite entries")
    return a


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def hermitian_part(a):
    return 0.5 * (a + dagger(a))


def fro(a) -> float:
    return float(np.linalg.norm(a))


def is_hermitian(a, tol=HERMITIAN_TOL) -> bool:
    return fro(a - dagger(a)) <= tol * max(1.0, fro(a))


def is_unitary(u, tol=UNITARY_TOL) -> bool:
    return fro(dagger(u) @ u - np.eye(u.shape[0])) <= tol


def commutator(a, b):
    return a @ b - b @ a


def anticommutator(a, b):
    return a @ b + b @ a


def trace_norm(a) -> float:
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def expm(m) -> np.ndarray:
    """Matrix exponential (scaling and squaring with Pade approximants)."""
    return scipy.linalg.expm(as_operator(m, "expm argument"))


def expm_hermitian(h, scale=-1j) -> np.ndarray:
    """``exp(scale * h)`` for Hermitian ``h`` via its eigendecomposition.

    Works on stacks of matrices; the result is unitary to rounding whenever
    ``scale`` is purely imaginary.
    """
    w, v = np.linalg.eigh(h)
    return (v * np.exp(scale * w)[..., None, :]) @ dagger(v)


def polar_unitary(u) -> np.ndarray:
    """Closest unitary to ``u`` in Frobenius norm."""
    w, _, vh = np.linalg.svd(u)
    return w @ vh


def principal_phases(eigvals) -> np.ndarray:
    """Eigenphases in (-pi, pi]; a phase at -pi is moved to +pi."""
    phases = np.angle(eigvals)
    return np.where(phases <= -np.pi + _BRANCH_EDGE_TOL, phases + 2 * np.pi, phases)


def unitary_eig(u, tol=UNITARY_TOL):
    """Principal eigenphases and orthonormal eigenvectors of a unitary matrix.

    Eigenvectors come from the complex Schur form, which is orthonormal even
    inside degenerate clusters.
    """
    u = as_operator(u, "unitary")
    if not is_unitary(u, tol):
        drift = fro(dagger(u) @ u - np.eye(u.shape[0]))
        raise PreconditionError(f"input is not unitary (||U'U - I||_F = {drift:.3e})")
    t, z = scipy.linalg.schur(u, output="complex")
    return principal_phases(np.diag(t)), z


def logm_unitary(u, tol=UNITARY_TOL) -> np.ndarray:
    """Principal logarithm of a unitary matrix.

    Returns a skew-Hermitian ``B`` with ``expm(B) == u`` and eigenphases in
    (-pi, pi].
    """
    phases, z = unitary_eig(u, tol)
    b = (z * (1j * phases)) @ dagger(z)
    return 0.5 * (b - dagger(b))


# -- vectorization and superoperators ---------------------------------------


def vec(x) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(x).reshape(-1, order="F")


def unvec(v, dim=None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    if dim * dim != v.size:
        raise InvalidArgumentError(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape((dim, dim), order="F")


def sandwich(a, b) -> np.ndarray:
    """Superoperator of ``X -> a @ X @ b``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or b.ndim != 2 or a.shape[0] != a.shape[1] or a.shape != b.shape:
        raise InvalidArgumentError(f"sandwich: dimension mismatch {a.shape} vs {b.shape}")
    return np.kron(b.T, a)


def left(a) -> np.ndarray:
    """Superoperator of ``X -> a @ X``."""
    return np.kron(np.eye(a.shape[0]), a)


def right(b) -> np.ndarray:
    """Superoperator of ``X -> X @ b``."""
    return np.kron(b.T, np.eye(b.shape[0]))


def commutator_super(h) -> np.ndarray:
    """Superoperator of ``X -> [h, X]``."""
    return left(h) - right(h)


def identity_super(dim) -> np.ndarray:
    return np.eye(dim * dim, dtype=complex)


def apply(superop, x) -> np.ndarray:
    x = np.asarray(x)
    return unvec(superop @ vec(x), x.shape[0])


def dual_super(superop) -> np.ndarray:
    """Matrix of the dual map defined by ``tr(A S(X)) = tr(S^dual(A) X)``."""
    d = int(round(np.sqrt(superop.shape[0])))
    # tr(A Y) = vec(A.T) . vec(Y); transposition is a permutation of vec indices
    perm = np.arange(d * d).reshape(d, d).T.reshape(-1)
    return superop.T[np.ix_(perm, perm)]


def choi(superop) -> np.ndarray:
    """Choi matrix ``sum_ij E_ij (x) S(E_ij)``.

    Ordering: the first tensor factor labels the input basis element, so the
    row index is ``i * d + k`` for entry ``(k, l)`` of ``S(E_ij)``.
    """
    superop = np.asarray(superop)
    d = int(round(np.sqrt(superop.shape[0])))
    # superop[(k, l) output in F order, (i, j) input in F order]
    s = superop.reshape(d, d, d, d, order="F")  # s[k, l, i, j]
    return s.transpose(2, 0, 3, 1).reshape(d * d, d * d)


def choi_min_eigenvalue(superop) -> float:
    c = choi(superop)
    return float(np.linalg.eigvalsh(hermitian_part(c)).min())


# -- random probes ----------------------------------------------------------


def random_density(rng: np.random.Generator, dim: int, rank=None) -> np.ndarray:
    """Wishart-type random state ``G G^dag / tr``."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return hermitian_part(g)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def validate_density(rho, herm_tol=HERMITIAN_TOL, trace_tol=1e-12, neg_tol=1e-10):
    """Return a list of violated density-matrix invariants (empty when valid)."""
    problems = []
    herm = fro(rho - dagger(rho))
    if herm > herm_tol * max(1.0, fro(rho)):
        problems.append(f"non-Hermitian (||rho - rho'||_F = {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        problems.append(f"trace {tr.real:.15g}{tr.imag:+.3e}j != 1")
    lam = float(np.linalg.eigvalsh(hermitian_part(rho)).min())
    if lam < -neg_tol:
        problems.append(f"minimum eigenvalue {lam:.3e} < {-neg_tol:.0e}")
    return problems


def trace_distance(a, b) -> float:
    return 0.5 * float(np.abs(np.linalg.eigvalsh(hermitian_part(a - b))).sum())
