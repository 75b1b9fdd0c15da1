import numpy as np
import pytest

from conftest import SMALL, random_fcs, small_render
from planesym.noisegen import render_lattice
from planesym.pipeline import (
    classify_fcs, classify_image, extract, model_groups, residuals_from_pair, thread_count,
)
from planesym.residuals import compute_residuals
from planesym.spectrum import FCSet, InsufficientPeriodicityError
from planesym.symmetry import build_group_model, symmetrize

@pytest.mark.parametrize("group", sorted(SMALL))
def test_small_renders_classify_to_design_group(group):
    analysis = classify_image(small_render(group))
    report = analysis.report
    assert report.kl_best == group
    w = report.weights()
    assert max(w, key=w.get) == group
    assert analysis.extraction.fcs.is_friedel_closed()
    assert set(analysis.residuals) == set(analysis.models)


def test_extraction_finds_the_lattice():
    ext = extract(small_render("p31m"))
    # the renderer snaps the basis to integer frequencies
    realized = render_lattice(*SMALL["p31m"], 256)
    assert ext.lattice.gamma_star == pytest.approx(realized.gamma_star, abs=0.5)
    assert abs(np.linalg.det(ext.lattice.matrix)) == pytest.approx(abs(np.linalg.det(realized.matrix)), rel=0.02)
    assert len(ext.peaks) >= 5


def test_flat_image_is_not_periodic():
    with pytest.raises(InsufficientPeriodicityError):
        classify_image(np.full((256, 256), 0.3))


def test_default_selection_size_fits_image():
    img = np.pad(small_render("p4"), ((0, 40), (0, 10)), mode="wrap")
    assert classify_image(img).extraction.spectrum.size == 256


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("PLANESYM_THREADS", "1")
    assert thread_count() == 1
    monkeypatch.setenv("PLANESYM_THREADS", "lots")
    assert thread_count() >= 1


def test_model_groups_serial_and_parallel_agree(monkeypatch, rng):
    fcs = random_fcs(rng)
    monkeypatch.setenv("PLANESYM_THREADS", "1")
    serial = model_groups(fcs, ["p2", "p4", "p6"], refine=False)
    monkeypatch.setenv("PLANESYM_THREADS", "3")
    parallel = model_groups(fcs, ["p2", "p4", "p6"], refine=False)
    for g in serial:
        assert np.array_equal(serial[g].fcs_sym.phase, parallel[g].fcs_sym.phase)


def test_classify_fcs_on_symmetric_coefficients(rng):
    clean = symmetrize(random_fcs(rng), "p4mm")
    live = clean.amplitude > 0
    clean = FCSet(clean.hk[live], clean.amplitude[live], clean.phase[live])
    noisy = FCSet.from_complex(clean.hk, clean.complex())
    report = classify_fcs(noisy, ["p2", "p2mm", "p4", "p4mm"], subset=None).report
    assert report.kl_best == "p4mm"
    assert report.weights(subset=True) == {}


def test_residuals_from_pair_matches_internal_model(rng):
    obs = random_fcs(rng)
    model = build_group_model(obs, "p4")
    expected = compute_residuals(model)
    external = residuals_from_pair(model.fcs_obs, model.fcs_sym, "p4")
    assert external.J_FC == pytest.approx(expected.J_FC)
    assert external.phi_res == pytest.approx(expected.phi_res)
    assert external.N == expected.N
    internal = residuals_from_pair(obs, None, "p4")
    assert internal.J_FC == pytest.approx(expected.J_FC)
    shuffled = FCSet(model.fcs_sym.hk[::-1], model.fcs_sym.amplitude, model.fcs_sym.phase)
    with pytest.raises(ValueError):
        residuals_from_pair(model.fcs_obs, shuffled, "p4")
