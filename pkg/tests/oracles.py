"""Independent brute-force references used by the tests.

Nothing here goes through the Floquet construction: propagators come from
plain fixed-step RK4 on the Schrodinger equation, and trajectories from RK4 on
the joint system of the master equation and the propagator.
"""

import numpy as np


def rk4_propagator(h, t0, t, n_steps):
    """``U_{t,t0}`` by classical RK4 on ``dU/dt = -i H(t) U``."""
    u = np.eye(h.dim, dtype=complex)
    dt = (t - t0) / n_steps

    def rhs(s, x):
        return -1j * h.evaluate(s) @ x

    s = t0
    for _ in range(n_steps):
        k1 = rhs(s, u)
        k2 = rhs(s + dt / 2, u + dt / 2 * k1)
        k3 = rhs(s + dt / 2, u + dt / 2 * k2)
        k4 = rhs(s + dt, u + dt * k3)
        u = u + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        s = t0 + (_ + 1) * dt
    return u


def rk4_master_equation(h, l_tilde, rhos, t0, t_end, dt, sample_every):
    """Integrate ``d rho/dt = -i[H(t), rho] + U L~(U^dag rho U) U^dag`` with ``dU/dt = -i H U``.

    ``rhos`` is a stack of initial states. The dissipator is the interaction
    picture generator moved to the Schrodinger picture on the fly, so the
    oracle only shares ``L~`` itself with the code under test. Returns the
    sample times and states of shape ``(n_samples, n_states, d, d)``.
    """
    d = h.dim
    rhos = np.array(rhos, dtype=complex)
    u = np.eye(d, dtype=complex)
    n = int(round((t_end - t0) / dt))

    def apply_lt(x):
        flat = x.transpose(0, 2, 1).reshape(x.shape[0], d * d)  # column stacking
        out = flat @ l_tilde.T
        return out.reshape(x.shape[0], d, d).transpose(0, 2, 1)

    def rhs(s, r, v):
        hs = h.evaluate(s)
        vd = v.conj().T
        inter = apply_lt(vd @ r @ v)
        dr = -1j * (hs @ r - r @ hs) + v @ inter @ vd
        return dr, -1j * hs @ v

    times, states = [t0], [rhos.copy()]
    s = t0
    for i in range(n):
        k1r, k1u = rhs(s, rhos, u)
        k2r, k2u = rhs(s + dt / 2, rhos + dt / 2 * k1r, u + dt / 2 * k1u)
        k3r, k3u = rhs(s + dt / 2, rhos + dt / 2 * k2r, u + dt / 2 * k2u)
        k4r, k4u = rhs(s + dt, rhos + dt * k3r, u + dt * k3u)
        rhos = rhos + dt / 6 * (k1r + 2 * k2r + 2 * k3r + k4r)
        u = u + dt / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
        s = t0 + (i + 1) * dt
        if (i + 1) % sample_every == 0:
            times.append(s)
            states.append(rhos.copy())
    return np.array(times), np.array(states)


def trace_distance(a, b):
    w = np.linalg.eigvalsh(0.5 * ((a - b) + (a - b).conj().T))
    return 0.5 * np.abs(w).sum()
