"""Dynamical maps, trajectories, stationary states and periodic limit cycles."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from flq.errors import InvalidArgumentError, NoStationaryStateError, NumericFailure
from flq.floquet import FloquetDecomposition
from flq.generator import GeneratorBundle
from flq.linalg import apply, dagger, dual_super, expm, fro, hermitian_part, identity_super, sandwich, trace_norm, unvec, validate_density, vec

KERNEL_RTOL = 1e-10
NEGATIVITY_TOL = 1e-9


def _check_times(f, times):
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < f.t0):
        raise InvalidArgumentError(f"dynamical maps need t >= t0 = {f.t0}")
    return times


def dynamical_maps(f: FloquetDecomposition, bundle: GeneratorBundle, times) -> np.ndarray:
    """``Lambda_{t,t0} = U_{t,t0} o exp((t - t0) L~)`` for every ``t`` in ``times``."""
    times = _check_times(f, times)
    us = f.propagators(times)
    return np.stack([sandwich(u, dagger(u)) @ expm((t - f.t0) * bundle.L_tilde) for u, t in zip(us, times)])


def dynamical_map(f: FloquetDecomposition, bundle: GeneratorBundle, t) -> np.ndarray:
    return dynamical_maps(f, bundle, [t])[0]


def two_time_map(f: FloquetDecomposition, bundle: GeneratorBundle, t, s) -> np.ndarray:
    """``Lambda_{t,s} = U_{t,t0} o exp((t - s) L~) o U_{s,t0}^-1`` for ``t >= s >= t0``.

    This is the map the construction yields when ``s`` is taken as the
    reference time: the interaction picture at ``s`` conjugates every harmonic
    by ``U_{s,t0}`` up to phases that cancel in the dissipator.
    """
    if t < s:
        raise InvalidArgumentError("two_time_map needs t >= s")
    ut, us = f.propagators([t, s])
    return sandwich(ut, dagger(ut)) @ expm((t - s) * bundle.L_tilde) @ sandwich(dagger(us), us)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    observables: dict = field(default_factory=dict)


def evolve(rho0, times, f: FloquetDecomposition, bundle: GeneratorBundle, observables=None, dual_tol=1e-9) -> Trajectory:
    """``rho_t = Lambda_{t,t0}(rho0)`` on a sorted time grid.

    Observables are evaluated as ``tr(A rho_t)`` and, at the first and last
    point, cross-checked against ``tr(Lambda^dag(A) rho0)``.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    problems = validate_density(rho0)
    if problems:
        raise InvalidArgumentError("initial state is not a density matrix: " + "; ".join(problems))
    times = _check_times(f, times)
    if np.any(np.diff(times) < 0):
        raise InvalidArgumentError("times must be sorted")
    maps = dynamical_maps(f, bundle, times)
    states = np.stack([apply(m, rho0) for m in maps])
    for t, rho in zip(times, states):
        problems = validate_density(rho)
        if problems:
            raise NumericFailure(f"state at t = {t} failed validation", {"t": float(t), "problems": problems})
    obs = {}
    for name, a in (observables or {}).items():
        a = np.asarray(a, dtype=complex)
        vals = np.einsum("ij,nji->n", a, states)
        for i in {0, len(times) - 1}:
            dual = np.trace(apply(dual_super(maps[i]), a) @ rho0)
            if abs(dual - vals[i]) > dual_tol * max(1.0, fro(a)):
                raise NumericFailure(
                    f"observable {name} disagrees with the dual route at t = {times[i]}",
                    {"direct": complex(vals[i]), "dual": complex(dual)},
                )
        obs[name] = vals.real
    return Trajectory(times, states, obs)


@dataclass(frozen=True, eq=False)
class StationaryState:
    sigma_tilde: np.ndarray
    kernel_dim: int
    residual: float
    unique: bool = True


def stationary_state(bundle: GeneratorBundle, rtol=KERNEL_RTOL) -> StationaryState:
    """Unit-trace Hermitian element of ``ker L~`` from a singular value decomposition."""
    lt = bundle.L_tilde
    d = bundle.dim
    _, s, vh = np.linalg.svd(lt)
    top = s.max() if s.size else 0.0
    null = s <= rtol * top if top > 0 else np.ones(s.size, bool)
    basis = np.conj(vh[null]).T
    kdim = basis.shape[1]
    if kdim == 0:
        raise NoStationaryStateError("generator has trivial kernel", {"smallest_singular": float(s.min())})
    if kdim == 1:
        x = unvec(basis[:, 0], d)
    else:
        # closest kernel element to the maximally mixed state
        target = vec(np.eye(d) / d)
        x = unvec(basis @ (dagger(basis) @ target), d)
    tr = np.trace(x)
    if abs(tr) < 1e-12:
        raise NoStationaryStateError("kernel element has vanishing trace", {"kernel_dim": kdim})
    sigma = hermitian_part(x / tr)
    sigma = sigma / np.trace(sigma).real
    lam = np.linalg.eigvalsh(sigma).min()
    if lam < -NEGATIVITY_TOL:
        raise NoStationaryStateError(
            f"kernel holds no positive state (min eigenvalue {lam:.3e})", {"kernel_dim": kdim, "min_eig": float(lam)}
        )
    residual = trace_norm(apply(lt, sigma))
    return StationaryState(sigma, kdim, residual, kdim == 1)


def limit_cycle(f: FloquetDecomposition, sigma_tilde, times) -> np.ndarray:
    """``sigma_t = U_{t,t0} sigma~ U_{t,t0}^dag`` at each time."""
    us = f.propagators(_check_times(f, times))
    return us @ np.asarray(sigma_tilde) @ dagger(us)


def composition_residual(f: FloquetDecomposition, bundle: GeneratorBundle, t, s) -> float:
    """``||Lambda_{t,t0} - Lambda_{t,s} o Lambda_{s,t0}||_F``, reported as a diagnostic."""
    full = dynamical_map(f, bundle, t)
    return fro(full - two_time_map(f, bundle, t, s) @ dynamical_map(f, bundle, s))


def semigroup(bundle: GeneratorBundle, tau) -> np.ndarray:
    return expm(tau * bundle.L_tilde) if tau else identity_super(bundle.dim)
