import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nhskin import spectral
from nhskin.errors import BasePointError, ConvergenceError
from nhskin.model import ChainParams, build_real_space
from nhskin.spectral import (
    Localization,
    auto_base_point,
    bulk_hausdorff,
    cluster_distances,
    diagonalize,
    localization_summary,
    min_overlap_angle,
    obc_spectrum,
    pbc_locus,
    polygon_area,
    rank_deficiency,
    sweep_delta,
    winding_number,
)

from conftest import match_distance, random_general


def fig2(r, n=10):
    return ChainParams.from_ratios(n, r, -1.0, 1.0)


def test_defective_two_by_two():
    res = diagonalize(np.array([[1, -1j], [-1j, -1]]))
    assert np.allclose(res.eigenvalues, 0, atol=1e-7)
    v = res.right_eigenvectors
    # the two computed eigenvectors are (nearly) parallel
    overlap = abs(np.vdot(v[:, 0], v[:, 1])) / np.prod(np.linalg.norm(v, axis=0))
    assert overlap > 1 - 1e-6


def test_hermitian_input(rng):
    a = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
    res = diagonalize(a + a.conj().T)
    assert np.abs(res.eigenvalues.imag).max() <= 1e-10
    v = res.right_eigenvectors
    assert np.abs(v.conj().T @ v - np.eye(12)).max() <= 1e-8


def test_profiles_sum_to_one():
    res = obc_spectrum(fig2(0.3))
    assert np.abs(res.profiles.sum(axis=1) - 1).max() <= 1e-12


def test_residual_gate_raises(monkeypatch):
    monkeypatch.setattr(spectral, "RESIDUAL_GATE", 0.0)
    with pytest.raises(ConvergenceError):
        diagonalize(build_real_space(fig2(0.3)))


def test_sorted_lexicographically():
    e = obc_spectrum(fig2(0.4)).eigenvalues
    keys = list(zip(e.real, e.imag))
    assert keys == sorted(keys)


def test_fig2a_clusters():
    res = obc_spectrum(fig2(1.0))
    assert cluster_distances(res.eigenvalues, (-2, 0, 2)).max() <= 0.2
    h = build_real_space(fig2(1.0))
    for e in (-2, 0, 2):
        assert rank_deficiency(h, e) >= 1
    assert rank_deficiency(h, 1.0) == 0


def test_locus_two_closed_loops():
    locus = pbc_locus(fig2(1.0), 512)
    for band in locus.bands.T:
        assert abs(band[0] - band[-1]) <= 1e-9
        assert abs(polygon_area(band[:-1])) > 0.1


def test_locus_hermitian_is_real():
    locus = pbc_locus(ChainParams.reducible(4, 1.0, 0.0, 1.0), 256)
    assert np.abs(locus.points().imag).max() <= 1e-12


def test_locus_tracking_is_continuous():
    locus = pbc_locus(fig2(0.6), 1024)
    jumps = np.abs(np.diff(locus.bands, axis=0)).max()
    assert jumps < 0.05


def test_zero_detuning_spectra_coincide():
    assert bulk_hausdorff(fig2(0.0, n=40), 512) <= 0.05


def test_skin_regime_has_no_bulk():
    assert np.isnan(bulk_hausdorff(fig2(1.0), 256))


@pytest.mark.parametrize("r, expected", [(1.0, 1), (-1.0, -1), (0.0, 0)])
def test_winding_values(r, expected):
    res = winding_number(fig2(r), k_samples=1024)
    assert res.winding == expected
    assert abs(res.raw_phase - expected) <= 1e-4


@pytest.mark.parametrize("r", [1.0, -1.0, 0.5, -0.3])
def test_winding_transformed_agrees(r):
    p = fig2(r)
    eb = auto_base_point(p)
    a = winding_number(p, eb, 1024)
    b = winding_number(p, eb, 1024, transformed=True)
    assert a.winding == b.winding
    assert a.raw_phase == pytest.approx(b.raw_phase, abs=1e-9)


@pytest.mark.parametrize("r", [1.0, -1.0, 0.0, 0.5])
def test_winding_grid_converged(r):
    p = fig2(r)
    eb = auto_base_point(p)
    base = winding_number(p, eb, 256)
    for k in (512, 1024, 2048):
        assert winding_number(p, eb, k).winding == base.winding


def test_base_point_inside_loop():
    p = fig2(1.0)
    eb = auto_base_point(p)
    band = pbc_locus(p).bands[:-1, 0]
    assert spectral.point_in_polygon(eb, band) or spectral.point_in_polygon(eb, pbc_locus(p).bands[:-1, 1])


def test_base_point_on_locus_rejected():
    with pytest.raises(BasePointError):
        winding_number(ChainParams.reducible(10, 0.0, -1.0, 1.0), np.sqrt(3), 1024)


def test_winding_needs_samples():
    with pytest.raises(ValueError):
        winding_number(fig2(1.0), 0.0, 32)


def test_winding_general_couplings():
    # arbitrary complex hops still give an integer winding
    p = random_general(np.random.default_rng(3), n=6)
    res = winding_number(p, 10.0 + 10j, 512)
    assert res.winding == 0


@pytest.mark.parametrize(
    "r, verdict",
    [(1.0, Localization.LEFT), (-1.0, Localization.RIGHT), (0.0, Localization.EXTENDED)],
)
def test_localization_verdicts(r, verdict):
    assert localization_summary(obc_spectrum(fig2(r))).verdict is verdict


def test_verdict_invariant_under_phase_and_scale(rng):
    res = obc_spectrum(fig2(0.7))
    scale = rng.uniform(0.1, 10, res.right_eigenvectors.shape[1]) * np.exp(
        1j * rng.uniform(0, 2 * np.pi, res.right_eigenvectors.shape[1])
    )
    prof = spectral.unit_profiles(res.right_eigenvectors * scale)
    assert np.allclose(prof, res.profiles, atol=1e-12)


@pytest.mark.parametrize("r", [1.5, -1.5, 1.2, 2.0])
def test_real_spectrum_outside_ep(r):
    assert np.abs(sweep_delta(fig2(0.0), [r]).imag).max() <= 1e-6


def test_complex_spectrum_inside_ep():
    assert np.abs(sweep_delta(fig2(0.0), [0.5, -0.5]).imag).max() > 0.1


def test_overlap_angle_collapses_at_ep():
    near = min_overlap_angle(obc_spectrum(fig2(1.0)))
    away = min_overlap_angle(obc_spectrum(fig2(0.5)))
    assert near < 1e-3 < away


def test_chiral_symmetry_at_zero_detuning():
    e = obc_spectrum(fig2(0.0)).eigenvalues
    assert match_distance(e, -e) <= 1e-9


def test_imaginary_bound_over_sweep():
    table = sweep_delta(fig2(0.0), np.linspace(-2, 2, 41))
    assert table.imag.max() <= 1 + 1e-6


def test_sweep_threads_identical():
    grid = np.linspace(-2, 2, 9)
    assert np.array_equal(sweep_delta(fig2(0.0), grid), sweep_delta(fig2(0.0), grid, threads=4))


@given(
    c_re=st.floats(-5, 5), c_im=st.floats(-5, 5),
    seed=st.integers(0, 10_000), n=st.integers(2, 8),
)
def test_shift_identity(c_re, c_im, seed, n):
    # generic couplings keep the spectrum non-defective
    h = build_real_space(random_general(np.random.default_rng(seed), n=n))
    c = complex(c_re, c_im)
    a = diagonalize(h).eigenvalues
    b = diagonalize(h + c * np.eye(2 * n)).eigenvalues
    assert match_distance(a + c, b) <= 1e-9


@given(seed=st.integers(0, 10_000), n=st.integers(1, 12))
def test_residual_gate_random(seed, n):
    p = random_general(np.random.default_rng(seed), n=n)
    h = build_real_space(p)
    res = diagonalize(h)
    assert res.residuals.max() <= 1e-8 * np.linalg.norm(h, 2)
