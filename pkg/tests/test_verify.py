import json

import numpy as np
import pytest

from flq.errors import InvalidArgumentError
from flq.io import dumps
from flq.pipeline import assemble, solve, zero_bath
from flq.verify import CHECKS, MUTATIONS, apply_mutation, verify_all
from flq.models import driven_oscillator


def _report(s, seed=0):
    return verify_all(s.floquet, s.harmonics, s.generator, seed, dict(s.model.couplings), s.model.baths)


@pytest.fixture(scope="module")
def reports(ex1, tls2):
    return {"ex1": _report(ex1), "tls2": _report(tls2)}


def test_all_checks_pass(reports):
    for name, rep in reports.items():
        assert set(rep.checks) == set(CHECKS)
        assert rep.passed, (name, rep.failed())


def test_report_is_deterministic(ex1, reports):
    again = _report(ex1)
    assert dumps(again.to_dict()) == dumps(reports["ex1"].to_dict())
    assert json.loads(dumps(again.to_dict()))["pass"] is True


def test_diagnostics_present(reports):
    d = reports["ex1"].diagnostics
    assert d["kernel_dim"] == 1
    assert d["kms_residual_x"] < 1e-12
    assert "composition_residual" in d


def test_closed_system_passes(ex1):
    s = assemble(zero_bath(ex1.model), ex1.floquet)
    rep = _report(s)
    assert rep.passed, rep.failed()
    assert "not applicable" in rep.checks["limit_cycle"].detail


def test_dimension_mismatch_rejected(ex1, tls2):
    with pytest.raises(InvalidArgumentError):
        verify_all(ex1.floquet, ex1.harmonics, solve(driven_oscillator(n_trunc=8)).generator)


@pytest.mark.parametrize("name", sorted(MUTATIONS))
@pytest.mark.parametrize("system", ["ex1", "tls2"])
def test_mutation_flips_its_checks(name, system, request, reports):
    s = request.getfixturevalue(system)
    f, hs, b = apply_mutation(name, s.floquet, s.harmonics, s.generator)
    rep = verify_all(f, hs, b, 0, dict(s.model.couplings))
    expected = MUTATIONS[name][1]
    assert all(reports[system].checks[c].passed for c in expected)
    flipped = [c for c in expected if not rep.checks[c].passed]
    assert flipped == list(expected), (name, rep.failed())


def test_mutation_is_seeded(ex1):
    a = apply_mutation("random_harmonic", ex1.floquet, ex1.harmonics, ex1.generator, seed=3)[1]
    b = apply_mutation("random_harmonic", ex1.floquet, ex1.harmonics, ex1.generator, seed=3)[1]
    assert all(np.array_equal(x.op, y.op) for x, y in zip(a, b))
