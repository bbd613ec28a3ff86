"""Property suite for a constructed system, plus the mutations that break each property."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from flq import evolution
from flq.errors import FlqError, InvalidArgumentError
from flq.floquet import FloquetDecomposition, decompose
from flq.generator import GeneratorBundle, dissipator_super, dual_dissipator_super
from flq.harmonics import HarmonicSet
from flq.linalg import (
    apply,
    choi_min_eigenvalue,
    commutator,
    commutator_super,
    dagger,
    dual_super,
    expm,
    fro,
    identity_super,
    random_density,
    random_hermitian,
    sandwich,
    trace_norm,
)
from flq.propagator import PropagatorConfig, propagate, propagate_grid


@dataclass(frozen=True)
class CheckResult:
    residual: float
    tolerance: float
    passed: bool
    detail: str = ""

    def to_dict(self):
        return {"residual": self.residual, "tolerance": self.tolerance, "pass": self.passed, "detail": self.detail}


@dataclass(frozen=True, eq=False)
class VerificationReport:
    checks: dict
    diagnostics: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failed(self):
        return sorted(k for k, c in self.checks.items() if not c.passed)

    def to_dict(self):
        return {
            "pass": self.passed,
            "checks": {k: c.to_dict() for k, c in sorted(self.checks.items())},
            "diagnostics": dict(sorted(self.diagnostics.items())),
        }


def _result(residual, tol, detail=""):
    residual = float(residual)
    return CheckResult(residual, float(tol), bool(np.isfinite(residual) and residual <= tol), detail)


# -- floquet and propagator checks ------------------------------------------


def _raw(f, t, s):
    return propagate(f.hamiltonian, s, t, f.config)


def check_monodromy_log(f):
    return _result(fro(f.evolution_hbar(f.period) - f.monodromy), 1e-9)


def check_floquet_basis(f):
    """Basis vectors are orthonormal eigenvectors of the monodromy with phases ``exp(-i eps T)``."""
    z = f.floquet_basis
    eig = fro(f.monodromy @ z - z * np.exp(-1j * f.quasienergies * f.period))
    orth = fro(dagger(z) @ z - np.eye(f.dim))
    return _result(max(eig / 1e-10, orth / 1e-12), 1.0, f"eigen residual {eig:.3e}, orthonormality {orth:.3e}")


def check_representation(f, rng, n=32):
    times = np.sort(f.t0 + 2 * f.period * rng.random(n))
    direct = propagate_grid(f.hamiltonian, f.t0, times, f.config)
    tau = np.mod(times - f.t0, f.period)
    order = np.argsort(tau)
    within = propagate_grid(f.hamiltonian, f.t0, f.t0 + tau[order], f.config)
    res = 0.0
    for j, i in enumerate(order):
        p = within[j] @ f.evolution_hbar(-tau[i])
        res = max(res, fro(direct[i] - p @ f.evolution_hbar(times[i] - f.t0)))
    return _result(res, 1e-8)


def check_p_periodicity(f, rng, n=4):
    res = 0.0
    for t in f.t0 + f.period * rng.random(n):
        p1 = _raw(f, t, f.t0) @ f.evolution_hbar(-(t - f.t0))
        p2 = _raw(f, t + f.period, f.t0) @ f.evolution_hbar(-(t + f.period - f.t0))
        res = max(res, fro(p2 - p1))
    return _result(res, 1e-8)


def check_floquet_states(f, rng, n=3):
    res = 0.0
    z = f.floquet_basis
    for t in f.t0 + f.period * rng.random(n):
        u1 = _raw(f, t, f.t0)
        u2 = _raw(f, t + f.period, f.t0)
        psi1, psi2 = u1 @ z, u2 @ z
        res = max(res, fro(psi2 - psi1 * np.exp(-1j * f.quasienergies * f.period)))
        phi1 = psi1 * np.exp(1j * f.quasienergies * (t - f.t0))
        phi2 = psi2 * np.exp(1j * f.quasienergies * (t + f.period - f.t0))
        res = max(res, fro(phi2 - phi1))
    return _result(res, 1e-8)


def check_chapman_kolmogorov(f, rng, n=3):
    res = 0.0
    for _ in range(n):
        a, b, c = np.sort(f.t0 + 2 * f.period * rng.random(3))
        res = max(res, fro(_raw(f, c, b) @ _raw(f, b, a) - _raw(f, c, a)))
    return _result(res, 1e-8)


def check_floquet_shift(f, rng, n=3):
    res = 0.0
    for t in f.t0 + f.period * rng.random(n):
        res = max(res, fro(_raw(f, t + f.period, f.t0) - _raw(f, t, f.t0) @ _raw(f, f.t0 + f.period, f.t0)))
    return _result(res, 1e-8)


def check_translation(f, rng, n_max=4):
    t = f.t0 + f.period * (0.25 + rng.random())
    base = _raw(f, t, f.t0)
    res = max(fro(_raw(f, t + k * f.period, f.t0 + k * f.period) - base) for k in range(1, n_max + 1))
    return _result(res, 1e-8)


# -- harmonic checks ----------------------------------------------------------


def check_commutation(f, hs):
    hb = f.hbar
    res = 0.0
    for h in hs:
        res = max(res, fro(commutator(hb, h.op) - h.omega * h.op) / max(h.norm, 1e-300))
    return _result(res, 1e-7)


def check_adjoint_pairing(hs):
    table = hs.lookup()
    res = 0.0
    for (alpha, k, q), h in table.items():
        partner = table.get((alpha, hs.classes.conjugate(k), -q))
        other = partner.op if partner is not None else np.zeros_like(h.op)
        res = max(res, fro(dagger(h.op) - other))
    return _result(res, 1e-9)


def _couplings_from(hs):
    """Recover each ``S_alpha`` as the sum of its harmonics at ``t = t0``."""
    ops = {}
    for h in hs:
        ops[h.alpha] = ops.get(h.alpha, 0) + h.op
    return ops


def check_reconstruction(f, hs, couplings, n=64):
    times = f.t0 + f.period * 2 * np.arange(n) / n
    us = f.propagators(times)
    res = 0.0
    for alpha, s in couplings.items():
        mine = hs.for_alpha(alpha)
        for t, u in zip(times, us):
            exact = dagger(u) @ s @ u
            series = sum(h.op * np.exp(1j * h.shifted * (t - f.t0)) for h in mine) if mine else 0
            res = max(res, fro(series - exact))
    tail = max(hs.tail.values(), default=0.0)
    return _result(res, 1e-6 + tail, f"tail diagnostic {tail:.3e}")


def check_fourier_integral(f, hs, couplings, rng):
    """Direct projected quadrature of ``(1/T) int S~(t) exp(-i(omega + q Omega)(t - t0)) dt``."""
    if not len(hs):
        return _result(0.0, 1e-7, "no harmonics")
    picks = {int(np.argmax([h.norm for h in hs]))}
    picks |= set(rng.choice(len(hs), size=min(2, len(hs)), replace=False).tolist())
    q_span = max(hs.q_max.values(), default=8)
    n = 4 * q_span + 5
    times = f.t0 + f.period * np.arange(n) / n
    us = f.propagators(times)
    res = 0.0
    cls = hs.classes
    for i in sorted(picks):
        h = hs.harmonics[i]
        s = couplings[h.alpha]
        acc = np.zeros_like(h.op)
        for t, u in zip(times, us):
            acc += dagger(u) @ s @ u * np.exp(-1j * h.shifted * (t - f.t0))
        acc /= n
        proj = sum(cls.projectors[c] @ acc @ cls.projectors[d] for c, d in cls.members[h.cls])
        res = max(res, fro(proj - h.op))
    return _result(res, 1e-7)


# -- generator checks ------------------------------------------------------------


def check_trace_annihilation(bundle, rng, n=20):
    res = 0.0
    for _ in range(n):
        x = random_hermitian(rng, bundle.dim)
        res = max(res, abs(np.trace(apply(bundle.L_tilde, x))) / trace_norm(x))
    return _result(res, 1e-11)


def check_dual_unital(bundle):
    return _result(fro(apply(bundle.L_tilde_dual, np.eye(bundle.dim))), 1e-11)


def check_duality(bundle, rng, n=50):
    res = 0.0
    for _ in range(n):
        a = random_hermitian(rng, bundle.dim)
        rho = random_density(rng, bundle.dim)
        lhs = np.trace(a @ apply(bundle.L_tilde, rho))
        rhs = np.trace(apply(bundle.L_tilde_dual, a) @ rho)
        res = max(res, abs(lhs - rhs))
    return _result(res, 1e-10)


def check_hermiticity(bundle, rng, n=10):
    res = 0.0
    d = bundle.dim
    for _ in range(n):
        x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        res = max(res, fro(apply(bundle.L_tilde, dagger(x)) - dagger(apply(bundle.L_tilde, x))))
    return _result(res, 1e-11)


def check_generator_cp(bundle, taus=(0.1, 1.0)):
    worst = min(choi_min_eigenvalue(expm(tau * bundle.L_tilde)) for tau in taus)
    return _result(-worst, 1e-9, f"min Choi eigenvalue {worst:.3e}")


def check_rates(bundle):
    rates = [r for e in bundle.rate_table for r in e.rates]
    worst = min(rates, default=0.0)
    return _result(max(-worst, 0.0), 1e-12, f"min rate {worst:.3e}")


def _covariance_maps(f):
    m = f.evolution_hbar(f.period)
    return sandwich(m, dagger(m)), sandwich(dagger(m), m)


def check_covariance(f, bundle):
    fm, fi = _covariance_maps(f)
    lt = bundle.L_tilde
    return _result(max(fro(fm @ lt - lt @ fm), fro(fi @ lt - lt @ fi)), 1e-8)


def check_lindbladian_periodicity(f, bundle, rng, n=8):
    from flq.generator import schrodinger_lindbladian

    times = f.t0 + f.period * rng.random(n)
    us = f.propagators(np.concatenate([times, times + f.period]))
    res = 0.0
    for i, t in enumerate(times):
        l1 = schrodinger_lindbladian(bundle, f, t, us[i])
        l2 = schrodinger_lindbladian(bundle, f, t + f.period, us[i + n])
        res = max(res, fro(l2 - l1))
    return _result(res, 1e-8)


def check_cptp_flow(f, bundle, rng, n=8):
    times = np.sort(f.t0 + 5 * f.period * rng.random(n))
    maps = evolution.dynamical_maps(f, bundle, times)
    worst = min(choi_min_eigenvalue(m) for m in maps)
    unital = max(fro(apply(dual_super(m), np.eye(f.dim)) - np.eye(f.dim)) for m in maps)
    return _result(max(-worst / 1e-9, unital / 1e-10), 1.0, f"min Choi eigenvalue {worst:.3e}, dual unitality {unital:.3e}")


def check_map_translation(f, bundle, rng, n_max=3):
    t = f.t0 + f.period * (0.3 + rng.random())
    base = evolution.dynamical_map(f, bundle, t)
    res = max(
        fro(evolution.two_time_map(f, bundle, t + k * f.period, f.t0 + k * f.period) - base) for k in range(1, n_max + 1)
    )
    return _result(res, 1e-8)


def check_stationary(f, bundle, rng, stat):
    if stat is None or stat.kernel_dim != 1:
        return (
            _result(0.0, 1e-8, "kernel not one-dimensional; not applicable"),
            _result(0.0, 1e-8, "kernel not one-dimensional; not applicable"),
        )
    sig = stat.sigma_tilde
    comm = _result(fro(commutator(sig, f.hbar)), 1e-8)
    times = f.t0 + f.period * rng.random(4)
    cyc = evolution.limit_cycle(f, sig, np.concatenate([times, times + f.period]))
    res = max(fro(cyc[i + 4] - cyc[i]) for i in range(4))
    return comm, _result(res, 1e-8)


CHECKS = (
    "monodromy_log",
    "floquet_basis",
    "representation",
    "p_periodicity",
    "floquet_states",
    "chapman_kolmogorov",
    "floquet_shift",
    "translation",
    "commutation",
    "adjoint_pairing",
    "reconstruction",
    "fourier_integral",
    "trace_annihilation",
    "dual_unital",
    "duality",
    "hermiticity",
    "generator_cp",
    "rates_nonnegative",
    "covariance",
    "lindbladian_periodicity",
    "cptp_flow",
    "map_translation",
    "stationary_commutation",
    "limit_cycle",
)


def verify_all(f: FloquetDecomposition, harmonics: HarmonicSet, bundle: GeneratorBundle, seed: int = 0, couplings=None, baths=None):
    """Run every property check; deterministic for a given ``seed``."""
    if bundle.dim != f.dim or any(h.op.shape[0] != f.dim for h in harmonics):
        raise InvalidArgumentError("decomposition, harmonics and generator have different dimensions")
    rng = np.random.default_rng(seed)
    couplings = dict(couplings) if couplings is not None else _couplings_from(harmonics)
    c = {}
    c["monodromy_log"] = check_monodromy_log(f)
    c["floquet_basis"] = check_floquet_basis(f)
    c["representation"] = check_representation(f, rng)
    c["p_periodicity"] = check_p_periodicity(f, rng)
    c["floquet_states"] = check_floquet_states(f, rng)
    c["chapman_kolmogorov"] = check_chapman_kolmogorov(f, rng)
    c["floquet_shift"] = check_floquet_shift(f, rng)
    c["translation"] = check_translation(f, rng)
    c["commutation"] = check_commutation(f, harmonics)
    c["adjoint_pairing"] = check_adjoint_pairing(harmonics)
    c["reconstruction"] = check_reconstruction(f, harmonics, couplings)
    c["fourier_integral"] = check_fourier_integral(f, harmonics, couplings, rng)
    c["trace_annihilation"] = check_trace_annihilation(bundle, rng)
    c["dual_unital"] = check_dual_unital(bundle)
    c["duality"] = check_duality(bundle, rng)
    c["hermiticity"] = check_hermiticity(bundle, rng)
    c["generator_cp"] = check_generator_cp(bundle)
    c["rates_nonnegative"] = check_rates(bundle)
    c["covariance"] = check_covariance(f, bundle)
    c["lindbladian_periodicity"] = check_lindbladian_periodicity(f, bundle, rng)
    c["cptp_flow"] = check_cptp_flow(f, bundle, rng)
    c["map_translation"] = check_map_translation(f, bundle, rng)
    diagnostics = {}
    try:
        stat = evolution.stationary_state(bundle)
        diagnostics["kernel_dim"] = stat.kernel_dim
        diagnostics["stationary_residual"] = stat.residual
    except FlqError as exc:
        stat = None
        diagnostics["stationary_error"] = str(exc)
    c["stationary_commutation"], c["limit_cycle"] = check_stationary(f, bundle, rng, stat)
    s = f.t0 + f.period * rng.random()
    diagnostics["composition_residual"] = evolution.composition_residual(f, bundle, s + f.period, s)
    if baths is not None:
        from flq.bath import OhmicCubedThermal, kms_residual

        for labels, model in baths.entries:
            if isinstance(model, OhmicCubedThermal):
                diagnostics["kms_residual_" + "+".join(labels)] = kms_residual(model, model.beta, np.linspace(0.1, 10, 100))
    return VerificationReport(c, diagnostics)


# -- mutations ------------------------------------------------------------------


def _with_generator(bundle, l_tilde, dual=None):
    dual = dual_super(l_tilde) if dual is None else dual
    return replace(bundle, L_tilde=l_tilde, L_tilde_dual=dual)


def _from_jumps(bundle, jumps):
    d = bundle.dim
    ham = -1j * commutator_super(bundle.deltaH)
    diss = dissipator_super(d, jumps)
    dual = dual_dissipator_super(d, jumps) + 1j * commutator_super(bundle.deltaH)
    return replace(bundle, L_tilde=ham + diss, L_tilde_dual=dual, dissipator=diss)


def _largest(hs):
    return int(np.argmax([h.norm for h in hs]))


def mutate_negated_rate(f, hs, bundle, rng):
    """Flip the sign of the rate carrying the largest weight ``r ||K||^2``."""
    entries = list(bundle.rate_table)
    weights = [(r * fro(k) ** 2, i, j) for i, e in enumerate(entries) for j, (r, k) in enumerate(zip(e.rates, e.jumps))]
    _, k, j = max(weights)
    e = entries[k]
    rates = e.rates.copy()
    rates[j] *= -1
    entries[k] = replace(e, rates=rates)
    b = replace(bundle, rate_table=entries)
    return f, hs, _from_jumps(b, b.jump_terms())


def mutate_trace_breaking(f, hs, bundle, rng):
    scale = max(fro(bundle.L_tilde), 1.0)
    return f, hs, _with_generator(bundle, bundle.L_tilde + 1e-3 * scale * identity_super(bundle.dim))


def mutate_anti_hermitian(f, hs, bundle, rng):
    scale = max(fro(bundle.L_tilde), 1.0)
    extra = 1e-3j * scale * identity_super(bundle.dim)
    return f, hs, _with_generator(bundle, bundle.L_tilde + extra, bundle.L_tilde_dual + dagger(extra))


def mutate_noncovariant_jump(f, hs, bundle, rng):
    """Add a dissipator with a jump that does not respect the quasifrequency grading."""
    d = bundle.dim
    k = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    scale = max(max((r for r, _ in bundle.jump_terms()), default=0.0), 0.1)
    return f, hs, _from_jumps(bundle, bundle.jump_terms() + [(scale, k / fro(k))])


def mutate_corrupted_dual(f, hs, bundle, rng):
    d = bundle.dim
    noise = rng.normal(size=(d * d, d * d)) * 1e-4
    return f, hs, replace(bundle, L_tilde_dual=bundle.L_tilde_dual + noise)


def _replace_harmonic(hs, i, h):
    items = list(hs.harmonics)
    if h is None:
        items.pop(i)
    else:
        items[i] = h
    return replace(hs, harmonics=items)


def mutate_random_harmonic(f, hs, bundle, rng):
    i = _largest(hs)
    h = hs.harmonics[i]
    d = h.op.shape[0]
    op = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return f, _replace_harmonic(hs, i, replace(h, op=op * h.norm / fro(op))), bundle


def mutate_scaled_harmonic(f, hs, bundle, rng):
    """Scale the largest harmonic whose adjoint partner is a different harmonic."""
    cls = hs.classes
    own = [(h.norm, i) for i, h in enumerate(hs.harmonics) if (cls.conjugate(h.cls), -h.q) != (h.cls, h.q)]
    i = max(own)[1] if own else _largest(hs)
    h = hs.harmonics[i]
    return f, _replace_harmonic(hs, i, replace(h, op=1.5 * h.op)), bundle


def mutate_dropped_harmonic(f, hs, bundle, rng):
    return f, _replace_harmonic(hs, _largest(hs), None), bundle


def mutate_perturbed_hbar(f, hs, bundle, rng):
    shift = 1e-3 * f.omega * (1 + np.arange(f.dim)) / f.dim
    return replace(f, quasienergies=f.quasienergies + shift), hs, bundle


def mutate_mismatched_basis(f, hs, bundle, rng):
    from flq.linalg import random_unitary

    v = random_unitary(rng, f.dim)
    return replace(f, floquet_basis=f.floquet_basis @ v), hs, bundle


def mutate_coarse_steps(f, hs, bundle, rng):
    return replace(f, config=PropagatorConfig(method="midpoint", n_steps=16)), hs, bundle


class _DeclaredPeriod:
    """A Hamiltonian declared with a period it does not have."""

    def __init__(self, h, period):
        self._h = h
        self.period = float(period)
        self.modes = h.modes
        self.t_ref = h.t_ref

    dim = property(lambda self: self._h.dim)
    omega = property(lambda self: 2 * np.pi / self.period)
    max_harmonic = property(lambda self: self._h.max_harmonic)

    def evaluate(self, t):
        return self._h.evaluate(t)

    def evaluate_many(self, times):
        return self._h.evaluate_many(times)

    def static_part(self):
        return self._h.static_part()


def mutate_wrong_period(f, hs, bundle, rng):
    wrong = _DeclaredPeriod(f.hamiltonian, 0.93 * f.period)
    return decompose(wrong, f.t0, f.config), hs, bundle


MUTATIONS = {
    "negated_rate": (mutate_negated_rate, ("generator_cp", "rates_nonnegative", "cptp_flow")),
    "trace_breaking": (mutate_trace_breaking, ("trace_annihilation", "dual_unital")),
    "anti_hermitian": (mutate_anti_hermitian, ("hermiticity",)),
    "noncovariant_jump": (
        mutate_noncovariant_jump,
        ("covariance", "lindbladian_periodicity", "map_translation", "stationary_commutation", "limit_cycle"),
    ),
    "corrupted_dual": (mutate_corrupted_dual, ("duality",)),
    "random_harmonic": (mutate_random_harmonic, ("commutation",)),
    "scaled_harmonic": (mutate_scaled_harmonic, ("adjoint_pairing", "fourier_integral")),
    "dropped_harmonic": (mutate_dropped_harmonic, ("reconstruction",)),
    "perturbed_hbar": (mutate_perturbed_hbar, ("monodromy_log", "representation", "p_periodicity")),
    "mismatched_basis": (mutate_mismatched_basis, ("floquet_basis", "floquet_states")),
    "coarse_steps": (mutate_coarse_steps, ("chapman_kolmogorov",)),
    "wrong_period": (mutate_wrong_period, ("translation", "floquet_shift")),
}


def apply_mutation(name, f, hs, bundle, seed=0):
    fn, _ = MUTATIONS[name]
    return fn(f, hs, bundle, np.random.default_rng(seed + 1))
