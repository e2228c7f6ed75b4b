import math
from dataclasses import replace

import numpy as np
import pytest

from qdual import duality
from qdual.errors import GridMismatch, UndefinedObservable
from qdual.fock import Mixture, TwoModeState, moment, parse_ket, parse_state
from qdual.random_states import random_two_mode_ket, random_two_mode_product


def test_distinguishability_examples():
    assert duality.distinguishability(parse_ket("|0,1>"), 1) == pytest.approx(1)
    assert duality.distinguishability(parse_ket("|2,0>"), 2) == pytest.approx(1)
    assert duality.distinguishability(parse_ket("|1,1>"), 1) == pytest.approx(0)


def test_visibility_examples():
    assert duality.visibility(parse_ket("|1,0> + |0,1>"), 1) == pytest.approx(1)
    assert duality.visibility(parse_ket("|2,0> + |0,2>"), 2) == pytest.approx(1)
    assert duality.visibility(parse_ket("|4,2> + |2,4>"), 2) == pytest.approx(6 / 7, abs=1e-12)


def test_coincidence_examples():
    assert duality.coincidence(parse_ket("|1,1>"), 1) == pytest.approx(0.25)
    assert duality.coincidence(parse_ket("|1,0>"), 1) == 0
    # the ket as printed, without normalisation, gives 1/16; normalised it is 1/4
    raw = parse_ket("|0,0> + |1,0> + |0,1> + |1,1>", normalize=False)
    assert duality.coincidence(raw, 1) == pytest.approx(1 / 16)
    assert duality.coincidence(raw.normalized(), 1) == pytest.approx(1 / 4)


def test_pair_coherence_examples():
    assert duality.pair_coherence(parse_ket("(sqrt(3))|0,0> + |1,1>"), 1) == pytest.approx(math.sqrt(3))
    assert duality.pair_coherence(parse_ket("|1,1>"), 1) == 0
    assert duality.pair_coherence(parse_ket("|0,0> + |1,1>"), 1) == pytest.approx(1)


def test_scale_invariance(rng):
    psi = random_two_mode_ket(rng, 3)
    big = TwoModeState(3.7 * psi.amplitudes)
    for f in (duality.distinguishability, duality.visibility, duality.pair_coherence):
        assert f(big, 1) == pytest.approx(f(psi, 1))
    assert duality.coincidence(big, 1) == pytest.approx(duality.coincidence(psi, 1) / 3.7**2)


def test_undefined_observables_are_flagged():
    vac = parse_ket("|0,0>")
    with pytest.raises(UndefinedObservable):
        duality.visibility(vac, 1)
    report = duality.duality_check(parse_ket("|1,1>"), 2)
    assert not report.defined and report.V is None and report.duality_slack is None


@pytest.mark.parametrize("alpha", [math.pi / 8, 0.3, 1.1])
def test_psi4_saturates_duality(alpha):
    psi = TwoModeState.from_terms({(1, 0): math.cos(alpha), (0, 1): math.sin(alpha)}, cutoff=1)
    r = duality.duality_check(psi, 1)
    assert r.D == pytest.approx(abs(math.cos(2 * alpha)))
    assert r.V == pytest.approx(abs(math.sin(2 * alpha)))
    assert r.duality_slack == pytest.approx(0, abs=1e-12)


def test_p_mixture_and_two_photon_product():
    mix = parse_state("3/4: |0,1> ; 1/4: |1,0>")
    r = duality.duality_check(mix, 1)
    assert (r.D, r.V) == (pytest.approx(0.5), pytest.approx(0))
    r = duality.duality_check(parse_ket("|1,1>"), 1)
    assert r.duality_slack == pytest.approx(1)


def test_first_order_slack_formula(rng):
    for _ in range(50):
        psi = random_two_mode_ket(rng, 3)
        r = duality.duality_check(psi, 1)
        assert duality.first_order_slack(psi) == pytest.approx(r.duality_slack, abs=1e-12)


def test_duality_inequality_random_states(rng):
    count = 0
    for _ in range(250):
        psi = random_two_mode_ket(rng, 4)
        for k in (1, 2, 3):
            r = duality.duality_check(psi, k)
            if r.defined:
                assert r.D**2 + r.V**2 <= 1 + 1e-9
                count += 1
    assert count >= 600


def test_scan_grid_shapes():
    first, second = duality.scan_phases(3, 0.2)
    assert np.allclose(np.diff(first), 2 * math.pi / 3)
    assert second[0] == pytest.approx(0.2 - math.pi / 6)
    first, _ = duality.scan_phases(2, 0.0)
    assert np.allclose(first, [0, math.pi / 2])


def test_reconstruction_two_photon_noon():
    psi = parse_ket("|2,0> + |0,2>")
    value = duality.reconstruct_visibility(duality.measure_phase_scan(psi, 2))
    assert value == pytest.approx(2 * abs(moment(psi, 2, 0, 0, 2)))
    assert value == pytest.approx(2)


def test_reconstruction_single_photon():
    psi = parse_ket("|1,0> + |0,1>")
    value = duality.reconstruct_visibility(duality.measure_phase_scan(psi, 1, 0.4))
    assert value == pytest.approx(1)
    assert value / 1 == pytest.approx(duality.visibility(psi, 1))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_reconstruction_random_states(rng, k):
    for _ in range(15):
        psi = random_two_mode_ket(rng, 4)
        phase = rng.uniform(0, 2 * math.pi)
        got = duality.reconstruct_visibility(duality.measure_phase_scan(psi, k, phase))
        assert got == pytest.approx(2 * abs(moment(psi, k, 0, 0, k)), abs=1e-9)


def test_reconstruction_of_mixture(rng):
    mix = Mixture((0.3, 0.7), (random_two_mode_ket(rng, 3), random_two_mode_ket(rng, 3)))
    got = duality.reconstruct_visibility(duality.measure_phase_scan(mix, 2, 0.1))
    assert got == pytest.approx(2 * abs(moment(mix, 2, 0, 0, 2)), abs=1e-9)


def test_reconstruction_zero_coherence():
    scan = duality.measure_phase_scan(parse_ket("|1,1>"), 1)
    assert duality.reconstruct_visibility(scan) == pytest.approx(0, abs=1e-12)


def test_grid_mismatch():
    scan = duality.measure_phase_scan(parse_ket("|2,0> + |0,2>"), 2)
    with pytest.raises(GridMismatch):
        duality.reconstruct_visibility(scan, 3)
    shifted = replace(scan, real_grid=tuple((p + 0.1, r) for p, r in scan.real_grid))
    with pytest.raises(GridMismatch):
        duality.reconstruct_visibility(shifted)
    with pytest.raises(GridMismatch):
        duality.reconstruct_visibility(replace(scan, sign="-"))


def test_visibility_criterion_examples():
    assert duality.entanglement_by_visibility(parse_ket("|1,0> + |0,1>")).violated
    assert not duality.entanglement_by_visibility(parse_ket("|1,1>")).violated
    mix = parse_state("1/4: |0,1> ; 1/4: |1,0> ; 1/2: |1,0> + |0,1>")
    assert duality.entanglement_by_visibility(mix).violated


def test_distinguishability_criterion_examples():
    v = duality.entanglement_by_distinguishability(parse_ket("(sqrt(3))|0,0> + |1,1>"))
    assert v.violated and v.lhs == pytest.approx(3)
    assert not duality.entanglement_by_distinguishability(parse_ket("|1,0>")).violated
    for alpha in np.linspace(0.1, 1.4, 6):
        psi = TwoModeState.from_terms({(1, 0): math.cos(alpha), (0, 1): math.sin(alpha)}, cutoff=1)
        assert not duality.entanglement_by_distinguishability(psi).violated


def test_product_states_never_flagged(rng):
    for _ in range(200):
        psi = random_two_mode_product(rng, 3)
        for k in (1, 2):
            if duality.duality_check(psi, k).defined:
                assert not duality.entanglement_by_visibility(psi, k).violated
                assert not duality.entanglement_by_distinguishability(psi, k).violated
