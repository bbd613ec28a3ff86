"""Unitary propagators of periodic Hamiltonians by exponential time stepping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from flq.errors import InvalidArgumentError
from flq.hamiltonian import PeriodicHamiltonian
from flq.linalg import dagger, expm_hermitian, fro, polar_unitary

METHODS = ("magnus4", "midpoint")

# two-point Gauss nodes and the commutator-free fourth-order weights
_GAUSS = np.array([0.5 - np.sqrt(3) / 6, 0.5 + np.sqrt(3) / 6])
_CF4_A = 0.25 + np.sqrt(3) / 6
_CF4_B = 0.25 - np.sqrt(3) / 6

_CHUNK = 256


@dataclass(frozen=True)
class PropagatorConfig:
    method: str = "magnus4"
    n_steps: int = 4096
    reproject: bool = True
    reproject_every: int = 256
    drift_tol: float = 1e-12

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidArgumentError(f"unknown propagation method {self.method!r}; choose from {METHODS}")
        if int(self.n_steps) < 16:
            raise InvalidArgumentError(f"n_steps must be >= 16, got {self.n_steps}")
        if int(self.reproject_every) < 1:
            raise InvalidArgumentError("reproject_every must be positive")


DEFAULT_CONFIG = PropagatorConfig()


def _step_unitaries(h: PeriodicHamiltonian, starts: np.ndarray, dt: float, method: str) -> np.ndarray:
    """One-step propagators for steps beginning at ``starts``."""
    if method == "midpoint":
        hs = h.evaluate_many(starts + 0.5 * dt)
        return expm_hermitian(hs * dt)
    h1 = h.evaluate_many(starts + _GAUSS[0] * dt)
    h2 = h.evaluate_many(starts + _GAUSS[1] * dt)
    first = expm_hermitian((_CF4_A * h1 + _CF4_B * h2) * dt)
    second = expm_hermitian((_CF4_B * h1 + _CF4_A * h2) * dt)
    return second @ first


def _march(h, u, t_start, t_end, cfg: PropagatorConfig, counter):
    """Advance ``u`` from ``t_start`` to ``t_end`` with uniform steps."""
    span = t_end - t_start
    if span <= 0:
        return u
    max_dt = h.period / cfg.n_steps
    n = max(1, int(np.ceil(span / max_dt - 1e-9)))
    dt = span / n
    eye = np.eye(h.dim)
    for c0 in range(0, n, _CHUNK):
        idx = np.arange(c0, min(n, c0 + _CHUNK))
        steps = _step_unitaries(h, t_start + idx * dt, dt, cfg.method)
        for s in steps:
            u = s @ u
            counter[0] += 1
            if cfg.reproject and counter[0] % cfg.reproject_every == 0:
                if fro(dagger(u) @ u - eye) > cfg.drift_tol:
                    u = polar_unitary(u)
    return u


def propagate(h: PeriodicHamiltonian, t0: float, t: float, cfg: PropagatorConfig = DEFAULT_CONFIG) -> np.ndarray:
    """``U_{t,t0}``, the solution of ``dU/dt = -i H(t) U`` with ``U_{t0,t0} = I``."""
    if t < t0:
        raise InvalidArgumentError(f"propagation runs forward only (t={t} < t0={t0}); use the adjoint of U_(t0,t)")
    u = np.eye(h.dim, dtype=complex)
    u = _march(h, u, float(t0), float(t), cfg, [0])
    return _final_projection(u, cfg)


def propagate_grid(h: PeriodicHamiltonian, t0: float, times, cfg: PropagatorConfig = DEFAULT_CONFIG) -> np.ndarray:
    """``U_{t,t0}`` for every ``t`` in the sorted array ``times`` (one sweep)."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1:
        raise InvalidArgumentError("times must be one-dimensional")
    if times.size and (times[0] < t0 or np.any(np.diff(times) < 0)):
        raise InvalidArgumentError("times must be sorted and not earlier than t0")
    out = np.empty((times.size, h.dim, h.dim), dtype=complex)
    u = np.eye(h.dim, dtype=complex)
    current = float(t0)
    counter = [0]
    for i, t in enumerate(times):
        u = _march(h, u, current, float(t), cfg, counter)
        current = float(t)
        out[i] = _final_projection(u, cfg)
    return out


def monodromy(h: PeriodicHamiltonian, t0: float = 0.0, cfg: PropagatorConfig = DEFAULT_CONFIG) -> np.ndarray:
    """The one-period propagator ``U_{t0+T,t0}``."""
    return propagate(h, t0, t0 + h.period, cfg)


def _final_projection(u, cfg):
    if cfg.reproject and fro(dagger(u) @ u - np.eye(u.shape[0])) > cfg.drift_tol:
        return polar_unitary(u)
    return u
