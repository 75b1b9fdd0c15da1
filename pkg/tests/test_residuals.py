import math

import numpy as np
import pytest

from conftest import random_fcs
from planesym.residuals import (
    ResidualSet, amp_residual, compute_residuals, extinction_ratio, normalize_amplitudes,
    phase_residual, ssr_fc, ssr_laue,
)
from planesym.spectrum import FCSet
from planesym.symmetry import build_group_model, symmetrize


def test_amp_residual_hand_example():
    assert amp_residual([1.0, 2.0, 3.0], [1.5, 2.0, 2.0]) == pytest.approx(100 * 1.5 / 6)
    with pytest.raises(ValueError):
        amp_residual([0.0, 0.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        amp_residual([1.0], [1.0, 2.0])


def test_phase_residual_hand_example():
    obs = ([1.0, 3.0], [170.0, 10.0])
    sym = ([1.0, 3.0], [-170.0, 0.0])
    # |170 - (-170)| wraps to 20 degrees
    assert phase_residual(obs, sym) == pytest.approx((1 * 20 + 3 * 10) / 4)


def test_ssr_hand_examples():
    obs = FCSet([(1, 0), (0, 1)], [1.0, 0.5], [0.0, 90.0])
    sym = FCSet([(1, 0), (0, 1)], [1.0, 0.5], [180.0, 90.0])
    assert ssr_fc(obs, sym) == pytest.approx(4.0)
    assert ssr_laue(obs, sym) == 0.0
    sym2 = sym.copy(amplitude=np.array([0.5, 0.5]))
    assert ssr_laue(obs, sym2) == pytest.approx(0.25)
    assert ssr_fc(obs, sym2) == pytest.approx(1.5 ** 2)


def test_normalization_by_largest_observed_amplitude():
    obs = FCSet([(1, 0), (0, 1)], [4.0, 2.0], [0.0, 0.0])
    sym = FCSet([(1, 0), (0, 1)], [3.0, 3.0], [0.0, 0.0])
    o, s = normalize_amplitudes(obs, sym)
    assert o.amplitude.tolist() == [1.0, 0.5]
    assert s.amplitude.tolist() == [0.75, 0.75]
    with pytest.raises(ValueError):
        normalize_amplitudes(FCSet([(1, 0)], [0.0], [0.0]))


def test_extinction_ratio():
    fcs = FCSet([(1, 0), (2, 0), (0, 1), (0, 2), (1, 1)], [0.1, 1.0, 0.3, 1.0, 5.0], [0] * 5)
    assert extinction_ratio(fcs, "p2mm") is None
    # forbidden in p2gg: (1,0), (0,1); allowed of the same classes: (2,0), (0,2)
    assert extinction_ratio(fcs, "p2gg") == pytest.approx(0.2 / 1.0)
    assert extinction_ratio(FCSet([(1, 1)], [1.0], [0.0]), "p2gg") == 0.0
    assert math.isinf(extinction_ratio(FCSet([(1, 0)], [1.0], [0.0]), "p2gg"))


def test_compute_residuals_on_perfect_data(rng):
    clean = symmetrize(random_fcs(rng), "p4mm")
    live = clean.amplitude > 0
    clean = FCSet(clean.hk[live], clean.amplitude[live], clean.phase[live])
    res = compute_residuals(build_group_model(clean, "p4mm", refine=False))
    assert res.J_FC == pytest.approx(0, abs=1e-20)
    assert res.F_res == pytest.approx(0, abs=1e-9)
    assert res.phi_res == pytest.approx(0, abs=1e-9)
    assert res.N == len(clean) // 2
    assert set(res.as_dict()) == {"F_res", "phi_res", "Ao_over_Ae", "J_FC", "J_L", "N"}


def test_compute_residuals_forbidden_entries(rng):
    fcs = random_fcs(rng)
    model = build_group_model(fcs, "p2gg", refine=False)
    res = compute_residuals(model)
    assert isinstance(res, ResidualSet)
    mask = model.mask
    o, s = normalize_amplitudes(FCSet(fcs.hk[mask], fcs.amplitude[mask], fcs.phase[mask]),
                                FCSet(model.fcs_sym.hk[mask], model.fcs_sym.amplitude[mask],
                                      model.fcs_sym.phase[mask]))
    # forbidden entries contribute their full observed intensity to J_FC
    assert res.J_FC == pytest.approx(ssr_fc(o, s))
    assert res.Ao_over_Ae is not None and res.Ao_over_Ae > 0


def test_laue_residual_is_zero_for_p2(rng):
    # Friedel closure already makes amplitude maps centrosymmetric
    res = compute_residuals(build_group_model(random_fcs(rng), "p2", refine=False))
    assert res.J_L == pytest.approx(0, abs=1e-24)
    assert res.J_FC > 0
