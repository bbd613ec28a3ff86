import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flq.errors import InvalidArgumentError, PreconditionError
from flq.linalg import (
    apply,
    choi,
    choi_min_eigenvalue,
    dagger,
    dual_super,
    expm,
    expm_hermitian,
    fro,
    identity_super,
    logm_unitary,
    random_density,
    random_hermitian,
    random_unitary,
    sandwich,
    unitary_eig,
    unvec,
    validate_density,
    vec,
)
from flq.models import SZ

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 16)


def test_expm_zero_is_identity():
    assert np.array_equal(expm(np.zeros((3, 3))), np.eye(3))


def test_expm_diagonal_closed_form():
    assert fro(expm(1j * np.pi * SZ / 2) - np.diag([1j, -1j])) < 1e-14


def test_expm_rejects_bad_input():
    with pytest.raises(InvalidArgumentError):
        expm(np.ones((2, 3)))
    with pytest.raises(InvalidArgumentError):
        expm(np.array([[np.nan, 0], [0, 1]]))


def test_expm_hermitian_matches_pade(rng):
    h = random_hermitian(rng, 6)
    assert fro(expm_hermitian(h) - expm(-1j * h)) < 1e-12
    stack = np.stack([h, 2 * h])
    assert fro(expm_hermitian(stack)[1] - expm(-2j * h)) < 1e-12


def test_logm_identity_is_zero():
    assert fro(logm_unitary(np.eye(4))) == 0.0


def test_logm_diagonal_phases():
    th = 0.25 * np.pi
    u = np.diag([np.exp(-1j * th), np.exp(1j * th)])
    b = logm_unitary(u)
    assert fro(b - np.diag([-1j * th, 1j * th])) < 1e-14
    assert fro(expm(b) - u) < 1e-14


def test_logm_branch_edge_takes_plus_pi(rng):
    v = random_unitary(rng, 3)
    u = v @ np.diag([-1.0, np.exp(0.3j), np.exp(-2.0j)]) @ dagger(v)
    phases, _ = unitary_eig(u)
    assert np.isclose(phases.max(), np.pi, atol=1e-12)
    assert fro(expm(logm_unitary(u)) - u) < 1e-12


def test_logm_rejects_non_unitary():
    with pytest.raises(PreconditionError):
        logm_unitary(np.diag([1.0, 2.0]))


def test_unitary_eig_degenerate_cluster_is_orthonormal(rng):
    v = random_unitary(rng, 5)
    u = v @ np.diag(np.exp(1j * np.array([0.7, 0.7, 0.7 + 1e-10, -1.0, 2.0]))) @ dagger(v)
    _, z = unitary_eig(u)
    assert fro(dagger(z) @ z - np.eye(5)) < 1e-13


@settings(max_examples=30, deadline=None)
@given(seeds, dims)
def test_logm_roundtrip(seed, d):
    u = random_unitary(np.random.default_rng(seed), d)
    b = logm_unitary(u)
    assert fro(b + dagger(b)) < 1e-12
    assert fro(expm(b) - u) < 1e-9
    assert np.all(np.abs(np.linalg.eigvals(b).imag) <= np.pi + 1e-9)


@settings(max_examples=30, deadline=None)
@given(seeds, dims)
def test_vec_roundtrip_exact(seed, d):
    x = np.random.default_rng(seed).normal(size=(d, d)) + 0j
    assert np.array_equal(unvec(vec(x)), x)


def test_vec_is_column_stacking():
    x = np.array([[1, 2], [3, 4]])
    assert vec(x).tolist() == [1, 3, 2, 4]


def test_sandwich_identity():
    assert np.array_equal(sandwich(np.eye(3), np.eye(3)), identity_super(3))


def test_sandwich_is_kron_convention(rng):
    a, b = random_hermitian(rng, 3), random_unitary(rng, 3)
    assert np.array_equal(sandwich(a, b), np.kron(b.T, a))


def test_sandwich_applies_products(rng):
    for _ in range(20):
        d = int(rng.integers(1, 7))
        a, b, x = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for _ in range(3))
        assert fro(apply(sandwich(a, b), x) - a @ x @ b) <= 1e-12 * max(1.0, fro(a) * fro(b) * fro(x))


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(1, 6))
def test_sandwich_composition(seed, d):
    rng = np.random.default_rng(seed)
    a1, b1, a2, b2 = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for _ in range(4))
    lhs = sandwich(a1, b1) @ sandwich(a2, b2)
    rhs = sandwich(a1 @ a2, b2 @ b1)
    assert fro(lhs - rhs) <= 1e-12 * max(1.0, fro(lhs))


def test_unitary_conjugation_preserves_trace(rng):
    u = random_unitary(rng, 4)
    rho = random_density(rng, 4)
    out = apply(sandwich(u, dagger(u)), rho)
    assert abs(np.trace(out) - 1) < 1e-12


def test_choi_identity_is_maximally_entangled():
    c = choi(identity_super(3))
    w = np.linalg.eigvalsh(c)
    assert np.isclose(np.trace(c).real, 3)
    assert np.allclose(w[:-1], 0, atol=1e-14) and np.isclose(w[-1], 3)


def test_choi_of_conjugation_is_psd(rng):
    for _ in range(10):
        v = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        assert choi_min_eigenvalue(sandwich(v, dagger(v))) > -1e-12


def test_choi_of_transpose_has_negative_eigenvalue():
    d = 2
    t = np.zeros((4, 4))
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d))
            e[i, j] = 1
            t[:, j * d + i] = vec(e.T)
    assert np.isclose(np.linalg.eigvalsh(choi(t)).min(), -1)


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(1, 5))
def test_choi_hermitian_for_hermiticity_preserving(seed, d):
    rng = np.random.default_rng(seed)
    ks = [rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for _ in range(3)]
    s = sum(w * sandwich(k, dagger(k)) for w, k in zip((1.0, -0.5, 2.0), ks))
    c = choi(s)
    assert fro(c - dagger(c)) <= 1e-12 * max(1.0, fro(c))


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(1, 5))
def test_dual_super_pairing(seed, d):
    rng = np.random.default_rng(seed)
    s = rng.normal(size=(d * d, d * d)) + 1j * rng.normal(size=(d * d, d * d))
    a, x = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for _ in range(2))
    lhs = np.trace(a @ apply(s, x))
    rhs = np.trace(apply(dual_super(s), a) @ x)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_random_probes_are_valid(rng):
    assert validate_density(random_density(rng, 5)) == []
    u = random_unitary(rng, 5)
    assert fro(dagger(u) @ u - np.eye(5)) < 1e-13


def test_validate_density_reports_problems():
    problems = validate_density(np.diag([1.5, -0.5]))
    assert any("eigenvalue" in p for p in problems)
    assert validate_density(np.diag([0.5, 0.6]))[0].startswith("trace")
