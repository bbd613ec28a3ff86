import numpy as np
import pytest

from flq.errors import InvalidArgumentError
from flq.hamiltonian import PeriodicHamiltonian
from flq.linalg import expm, fro, random_hermitian
from flq.models import SZ, driven_oscillator, tls_cosine
from flq.propagator import PropagatorConfig, monodromy, propagate, propagate_grid
from oracles import rk4_propagator


def test_same_time_is_identity():
    h = tls_cosine().hamiltonian
    assert fro(propagate(h, 0.3, 0.3) - np.eye(2)) == 0


def test_constant_hamiltonian_closed_form():
    w0, tau = 0.5, 2.7
    h = PeriodicHamiltonian(1.0, {0: 0.5 * w0 * SZ})
    expect = np.diag([np.exp(-0.5j * w0 * tau), np.exp(0.5j * w0 * tau)])
    assert fro(propagate(h, 0.0, tau) - expect) < 1e-12


def test_constant_monodromy_matches_rk4(rng):
    h0 = random_hermitian(rng, 3)
    h = PeriodicHamiltonian(1.0, {0: h0})
    m = monodromy(h)
    assert fro(m - expm(-1j * h0)) < 1e-12
    assert fro(m - rk4_propagator(h, 0.0, 1.0, 10**5)) < 1e-9


def test_commuting_drive_monodromy():
    m = tls_cosine(omega0=0.5, Omega=2.0, lam=0.05)
    t = m.hamiltonian.period
    u = monodromy(m.hamiltonian)
    assert fro(u - expm(-0.5j * 0.5 * t * SZ)) < 1e-9
    assert np.allclose(np.angle(np.diag(u)), [-0.25 * t, 0.25 * t], atol=1e-9)  # -+ omega0 T / 2


def test_commuting_drive_at_intermediate_time():
    w0, big, lam = 0.5, 2.0, 0.05
    h = tls_cosine(omega0=w0, Omega=big, lam=lam).hamiltonian
    t = 1.1
    exact = expm(-1j * (0.5 * w0 * t + lam * np.sin(big * t)) * SZ)
    assert fro(propagate(h, 0.0, t) - exact) < 1e-10
    assert fro(rk4_propagator(h, 0.0, t, 20000) - exact) < 1e-10


def test_oscillator_monodromy_eigenphases():
    n = 20
    m = driven_oscillator(n_trunc=n)
    md = m.metadata
    t = m.hamiltonian.period
    u = monodromy(m.hamiltonian)
    phases = np.angle(np.linalg.eigvals(u))
    for level in md["interior_levels"]:
        target = -t * md["delta"] * (level - md["alpha"] ** 2)
        gap = np.angle(np.exp(1j * (phases - target)))
        assert np.min(np.abs(gap)) < 1e-9


def test_backwards_rejected():
    with pytest.raises(InvalidArgumentError):
        propagate(tls_cosine().hamiltonian, 1.0, 0.5)


def test_config_validation():
    with pytest.raises(InvalidArgumentError):
        PropagatorConfig(n_steps=8)
    with pytest.raises(InvalidArgumentError):
        PropagatorConfig(method="euler")


def _driven(rng):
    return PeriodicHamiltonian(1.0, {0: random_hermitian(rng, 3), 1: rng.normal(size=(3, 3)) + 0j})


def test_chapman_kolmogorov(rng):
    h = _driven(rng)
    for _ in range(3):
        t0, s, t = np.sort(rng.uniform(0, 2, size=3))
        lhs = propagate(h, s, t) @ propagate(h, t0, s)
        assert fro(lhs - propagate(h, t0, t)) < 1e-8


def test_floquet_theorem_and_translation(rng):
    h = _driven(rng)
    m = monodromy(h)
    for t in (0.3, 1.7):
        assert fro(propagate(h, 0.0, t + 1.0) - propagate(h, 0.0, t) @ m) < 1e-8
    base = propagate(h, 0.2, 0.9)
    for n in range(1, 5):
        assert fro(propagate(h, 0.2 + n, 0.9 + n) - base) < 1e-8


def test_grid_lands_on_times(rng):
    h = _driven(rng)
    times = [0.0, 0.13, 0.5, 1.71]
    grid = propagate_grid(h, 0.0, times)
    for t, u in zip(times, grid):
        assert fro(u - propagate(h, 0.0, t)) < 1e-10


@pytest.mark.parametrize("method,order", [("magnus4", 4), ("midpoint", 2)])
def test_order_of_accuracy(rng, method, order):
    h = _driven(rng)
    ref = rk4_propagator(h, 0.0, 1.0, 40000)
    errs = [fro(propagate(h, 0.0, 1.0, PropagatorConfig(method=method, n_steps=n, reproject=False)) - ref) for n in (32, 64)]
    observed = np.log2(errs[0] / errs[1])
    assert abs(observed - order) <= 0.3


def test_steps_stay_unitary(rng):
    h = _driven(rng)
    u = propagate(h, 0.0, 25.0, PropagatorConfig(n_steps=64))
    assert fro(u.conj().T @ u - np.eye(3)) < 1e-12
