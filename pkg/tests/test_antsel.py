import numpy as np
import pytest

from conftest import P_RF, make_cfg, random_beams, random_channel
from greenbeam.antsel import antenna_weights, exhaustive_select, select_antennas
from greenbeam.model import BeamformerSet, Channel, is_feasible
from greenbeam.sca import ProblemInfeasible, evaluate_scheme, sca_solve


def test_antenna_weights():
    assert not np.any(antenna_weights(BeamformerSet.zeros(2, 3)))
    w = np.zeros((2, 3), dtype=complex)
    w[0, 0] = 1 + 1j
    np.testing.assert_array_equal(antenna_weights(BeamformerSet(w)), [2.0, 0.0, 0.0])


def test_antenna_weights_direct_sum(rng):
    w = random_beams(rng, 3, 5)
    ref = [sum(abs(w.vectors[k, n]) ** 2 for k in range(3)) for n in range(5)]
    np.testing.assert_allclose(antenna_weights(w), ref, rtol=1e-14)
    assert np.array_equal(antenna_weights(w), w.antenna_powers())


def test_zero_gain_antenna_is_dropped():
    cfg = make_cfg(n=2, k=1, gamma=1.0)
    sel = select_antennas(Channel([[1.0, 0.0]]), cfg)
    assert sel.active_set == (0,)
    assert sel.breakdown.rf == pytest.approx(P_RF)
    assert np.all(np.abs(sel.w.vectors[:, 1]) == 0)


def test_selection_never_worse_than_full_array(rng):
    for _ in range(5):
        h = random_channel(rng, 2, 4)
        cfg = make_cfg(n=4, k=2)
        sel = select_antennas(h, cfg)
        full = evaluate_scheme(sca_solve(h, cfg), cfg)
        assert sel.breakdown.total <= full.total + 1e-6
        assert sel.candidates[0].antennas == (0, 1, 2, 3)


def test_cap_forces_two_antennas():
    # one user, equal unit gains: one antenna needs Gamma*sigma2 = 2 W > cap 1.5 W,
    # two antennas need 1 W each
    cfg = make_cfg(n=3, k=1, gamma=2.0, sigma2=1.0, p_static=0.0)
    h = Channel([[1.0, 1.0, 1.0]])
    sel = select_antennas(h, cfg)
    assert len(sel.chosen_subset) >= 2
    assert is_feasible(h, sel.w, cfg)
    assert not sel.candidates[-1].feasible and len(sel.candidates[-1].antennas) == 1


def test_nested_chain_in_ascending_weight(rng):
    h = random_channel(rng, 2, 5)
    cfg = make_cfg(n=5, k=2)
    sel = select_antennas(h, cfg)
    order = list(np.argsort(sel.weights, kind="stable"))
    for j, cand in enumerate(sel.candidates):
        assert cand.antennas == tuple(sorted(order[j:]))
    feasible = [c.feasible for c in sel.candidates]
    assert feasible == sorted(feasible, reverse=True)
    assert feasible.count(False) <= 1


def test_chosen_is_min_over_feasible(rng):
    h = random_channel(rng, 2, 5)
    cfg = make_cfg(n=5, k=2)
    sel = select_antennas(h, cfg)
    totals = [c.breakdown.total for c in sel.candidates if c.feasible]
    assert sel.breakdown.total == min(totals)
    outside = [n for n in range(5) if n not in sel.chosen_subset]
    assert np.all(sel.w.vectors[:, outside] == 0)
    assert is_feasible(h, sel.w, cfg)


def test_tie_prefers_fewer_antennas(monkeypatch):
    from greenbeam import antsel
    from greenbeam.model import PowerBreakdown

    cands = [antsel.Candidate((0, 1), True, PowerBreakdown(1.0, 0.7, 20.0), None),
             antsel.Candidate((1,), True, PowerBreakdown(1.35, 0.35, 20.0), None)]
    assert antsel._pick(cands) == 1


def test_full_array_infeasible_raises():
    cfg = make_cfg(n=2, k=1, gamma=1e3)
    with pytest.raises(ProblemInfeasible):
        select_antennas(Channel([[0.1, 0.1]]), cfg)


def test_exhaustive_single_antenna():
    cfg = make_cfg(n=1, k=1)
    h = Channel([[0.9]])
    a, b = select_antennas(h, cfg), exhaustive_select(h, cfg)
    assert a.breakdown.total == b.breakdown.total
    assert a.chosen_subset == b.chosen_subset == (0,)


def test_exhaustive_never_uses_zero_column(rng):
    for _ in range(3):
        H = random_channel(rng, 1, 3).entries.copy()
        H[:, 1] = 0
        sel = exhaustive_select(Channel(H), make_cfg(n=3, k=1))
        assert 1 not in sel.active_set


def test_exhaustive_lower_bounds_heuristic():
    for seed in range(20):
        rng = np.random.default_rng(seed)
        h = random_channel(rng, 2, 4)
        cfg = make_cfg(n=4, k=2)
        assert exhaustive_select(h, cfg).breakdown.total <= select_antennas(h, cfg).breakdown.total + 1e-6


def test_exhaustive_size_limit():
    with pytest.raises(ValueError):
        exhaustive_select(Channel(np.ones((1, 13))), make_cfg(n=13, k=1))
