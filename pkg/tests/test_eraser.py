import numpy as np
import pytest

from qdual import eraser
from qdual.random_states import random_mixed_dm
from qdual.qstate import DensityMatrix


def test_marginal_visibility_vanishes():
    assert eraser.eraser_probabilities().visibility_a == pytest.approx(0, abs=1e-12)


def test_conditional_visibilities():
    table = eraser.eraser_probabilities()
    assert table.conditional_visibility(3) == pytest.approx(1, abs=1e-12)
    assert table.conditional_visibility(4) == pytest.approx(-1, abs=1e-12)
    assert np.allclose(table.conditional(1), [0.5, 0.5])
    assert np.allclose(table.conditional(2), [0.5, 0.5])


@pytest.mark.parametrize("branch_p", [0.0, 0.2, 0.5, 1.0])
def test_no_signalling(rng, branch_p):
    rho = DensityMatrix(random_mixed_dm(rng, 4), (2, 2))
    table = eraser.eraser_probabilities(rho, branch_p)
    assert table.joint.sum() == pytest.approx(1)
    # A's marginal does not depend on the branch probability chosen at B
    other = eraser.eraser_probabilities(rho, 1 - branch_p)
    assert np.allclose(table.p_a, other.p_a, atol=1e-12)


def test_empty_branch_gives_nan():
    table = eraser.eraser_probabilities(branch_p=1.0)
    assert np.isnan(table.conditional_visibility(3))


def test_conditional_states_and_duality():
    p, rho_a = eraser.conditional_a_state(j=3)
    assert p == pytest.approx(0.5)
    assert np.allclose(rho_a.entries, np.full((2, 2), 0.5))
    out = eraser.conditional_duality()
    assert out["B3"]["V"] == pytest.approx(1) and out["B3"]["D"] == pytest.approx(0)
    assert out["B1"]["D"] == pytest.approx(1) and out["B1"]["V"] == pytest.approx(0)


def test_monte_carlo_concentrates():
    table = eraser.eraser_probabilities()
    counts = eraser.sample_clicks(table, 10**6, seed=11)
    emp = eraser.empirical_visibilities(counts)
    assert emp["V_A|B3"] == pytest.approx(1, abs=0.01)
    assert emp["V_A|B4"] == pytest.approx(-1, abs=0.01)
    assert emp["V_A"] == pytest.approx(0, abs=0.01)


def test_single_shot_and_seed():
    table = eraser.eraser_probabilities()
    one = eraser.sample_clicks(table, 1, seed=3)
    assert one.sum() == 1 and one.max() == 1
    a = eraser.sample_clicks(table, 500, seed=5)
    b = eraser.sample_clicks(table, 500, seed=5)
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        eraser.sample_clicks(table, 0)
