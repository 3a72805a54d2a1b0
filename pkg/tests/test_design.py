import warnings

import numpy as np
import pytest

import hodgefir as hf
from hodgefir.design import distinct_groups, fir_data_matrix
from hodgefir.spectral import Label


def grad_spec(spec):
    return hf.DesignSpec.preserving(spec, "gradient")


def test_identity_target(toy_spec):
    for length in (1, 3, 6):
        filt, rep = hf.design_fir(toy_spec, hf.DesignSpec(np.ones(10)), length)
        np.testing.assert_allclose(filt.h, np.eye(length)[0], atol=1e-10)
        assert rep.residual <= 1e-10


def test_exact_interpolation_at_distinct_count(toy_spec):
    n_distinct = len(distinct_groups(toy_spec.eigenvalues))
    assert n_distinct == 10
    _, rep = hf.design_fir(toy_spec, grad_spec(toy_spec), n_distinct)
    assert rep.residual <= 1e-8


def test_short_filter_leaks_harmonic(toy_lap, toy_spec):
    filt, rep = hf.design_fir(toy_spec, grad_spec(toy_spec), 4)
    assert rep.residual > 0.1
    h = toy_spec.eigenvectors[:, toy_spec.q_h[0]]
    out = hf.apply_fir(filt, toy_lap, h)
    # harmonic input is scaled by the response at zero, i.e. h[0]
    np.testing.assert_allclose(out, filt.h[0] * h, atol=1e-12)
    assert np.linalg.norm(out) == pytest.approx(abs(np.polynomial.polynomial.polyval(0.0, filt.h)))


def test_sv_exact_gradient_block(toy_spec):
    n_grad = len(distinct_groups(toy_spec.eigenvalues[toy_spec.q_g]))
    filt, rep = hf.design_sv(toy_spec, grad_spec(toy_spec), n_grad, 0)
    assert rep.residual <= 1e-8
    assert abs(filt.h0) <= 1e-10
    r = hf.response_sv(filt, toy_spec).values
    np.testing.assert_allclose(r[toy_spec.q_g], 1.0, atol=1e-8)
    np.testing.assert_allclose(r[toy_spec.q_c], 0.0, atol=1e-10)


def test_sv_constant_only_is_mean(toy_spec, rng):
    targets = rng.standard_normal(10)
    filt, _ = hf.design_sv(toy_spec, hf.DesignSpec(targets), 0, 0)
    assert filt.h0 == pytest.approx(targets.mean())


@pytest.mark.parametrize("component", ["gradient", "curl"])
def test_sv_beats_fir_at_equal_length(toy_spec, component):
    spec = hf.DesignSpec.preserving(toy_spec, component)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", hf.SingularDesign)
        for total in range(1, 11):
            fir = hf.design_fir(toy_spec, spec, total)[1].residual
            sv = min(hf.design_sv(toy_spec, spec, a, total - 1 - a)[1].residual for a in range(total))
            assert sv <= fir + 1e-12


def test_realized_response_matches_design(toy_lap, toy_spec, rng):
    spec = hf.DesignSpec(rng.standard_normal(10))
    for length in (2, 5, 10):
        filt, _ = hf.design_fir(toy_spec, spec, length)
        phi = np.vander(toy_spec.eigenvalues, length, increasing=True)
        np.testing.assert_allclose(hf.response_fir(filt, toy_spec).values, phi @ filt.h, atol=1e-9)
        u = toy_spec.eigenvectors
        f = rng.standard_normal(10)
        np.testing.assert_allclose(u.T @ hf.apply_fir(filt, toy_lap, f), (phi @ filt.h) * (u.T @ f), atol=1e-8)


@pytest.mark.filterwarnings("ignore::hodgefir.SingularDesign")
@pytest.mark.filterwarnings("ignore::hodgefir.ConflictWarning")
def test_residual_monotone_in_length(sioux_spec, toy_spec, rng):
    for spectrum in (toy_spec, sioux_spec):
        spec = hf.DesignSpec(rng.standard_normal(spectrum.n))
        res = [hf.design_fir(spectrum, spec, k)[1].residual for k in range(1, 9)]
        assert all(b <= a + 1e-10 for a, b in zip(res, res[1:]))
        sv = {(a, b): hf.design_sv(spectrum, spec, a, b)[1].residual for a in range(4) for b in range(4)}
        for (a, b), r in sv.items():
            if (a + 1, b) in sv:
                assert sv[(a + 1, b)] <= r + 1e-10
            if (a, b + 1) in sv:
                assert sv[(a, b + 1)] <= r + 1e-10


def test_conflicting_targets_on_shared_eigenvalue():
    # filled triangle: gradient and curl share eigenvalue 3
    cx = hf.build_complex("abc", ["ab", "bc", "ac"], ["abc"])
    spec = hf.eigendecompose(hf.laplacians(hf.incidence(cx)))
    target = hf.DesignSpec.preserving(spec, "gradient")
    with pytest.warns(hf.ConflictWarning):
        filt, rep = hf.design_fir(spec, target, 2)
    # FIR sees a single frequency with averaged target 2/3
    assert hf.response_fir(filt, spec).values == pytest.approx([2 / 3] * 3)
    with warnings.catch_warnings():
        warnings.simplefilter("error", hf.ConflictWarning)
        warnings.simplefilter("ignore", hf.SingularDesign)
        sv, rep = hf.design_sv(spec, target, 1, 1)
    assert rep.residual <= 1e-10
    r = hf.response_sv(sv, spec).values
    np.testing.assert_allclose(r[spec.q_g], 1.0, atol=1e-10)
    np.testing.assert_allclose(r[spec.q_c], 0.0, atol=1e-10)


def test_weight_by_multiplicity_is_literal_system(sioux_spec, rng):
    # Sioux Falls has repeated eigenvalues (harmonic and curl), so weighting matters
    assert len(distinct_groups(sioux_spec.eigenvalues)) < sioux_spec.n
    target = hf.DesignSpec.from_labels(sioux_spec, gradient=1.0, curl=0.5, harmonic=0.0)
    filt, _ = hf.design_fir(sioux_spec, target, 4, weight_by_multiplicity=True)
    phi = np.vander(sioux_spec.eigenvalues, 4, increasing=True)
    expected = np.linalg.lstsq(phi, target.targets, rcond=None)[0]
    np.testing.assert_allclose(filt.h, expected, rtol=1e-8, atol=1e-10)
    plain, _ = hf.design_fir(sioux_spec, target, 4)
    assert not np.allclose(plain.h, filt.h)


def test_singular_design_warns(toy_spec):
    with pytest.warns(hf.SingularDesign):
        hf.design_sv(toy_spec, grad_spec(toy_spec), 8, 0)


def test_spec_from_mapping(toy_spec):
    s = hf.DesignSpec.from_mapping(toy_spec, {"gradient": 1, "curl": 0, "harmonic": 0, "0": 5})
    assert s.targets[0] == 5 and s.targets[toy_spec.q_g].tolist() == [1.0] * 6
    with pytest.raises(ValueError):
        hf.DesignSpec.from_mapping(toy_spec, {"gradient": 1})
    with pytest.raises(IndexError):
        hf.DesignSpec.from_mapping(toy_spec, {"gradient": 1, "curl": 0, "harmonic": 0, "10": 1})


# ----------------------------------------------------------------------------
# fitting from data


def test_fit_fir_round_trip(toy_lap, rng):
    true = hf.FirFilter(rng.standard_normal(4))
    pairs = [(f, hf.apply_fir(true, toy_lap, f)) for f in rng.standard_normal((5, 10))]
    filt, rep = hf.fit_fir_from_data(toy_lap, pairs, 4)
    np.testing.assert_allclose(filt.h, true.h, atol=1e-6)
    assert rep.residual <= 1e-8 and rep.rank == 4


def test_fit_sv_round_trip(toy_lap, rng):
    true = hf.SvFilter(rng.standard_normal(), rng.standard_normal(3), rng.standard_normal(2))
    pairs = [(f, hf.apply_sv(true, toy_lap, f)) for f in rng.standard_normal((5, 10))]
    filt, rep = hf.fit_sv_from_data(toy_lap, pairs, 3, 2)
    np.testing.assert_allclose(filt.h0, true.h0, atol=1e-6)
    np.testing.assert_allclose(filt.alpha, true.alpha, atol=1e-6)
    np.testing.assert_allclose(filt.beta, true.beta, atol=1e-6)
    assert rep.residual <= 1e-8


def test_fit_identity_pair(toy_lap, rng):
    f = rng.standard_normal(10)
    filt, rep = hf.fit_fir_from_data(toy_lap, [(f, f)], 3)
    assert rep.residual <= 1e-10
    np.testing.assert_allclose(filt.h, [1, 0, 0], atol=1e-8)


def test_fit_scalar_sv(toy_lap, rng):
    x, y = rng.standard_normal((2, 10))
    filt, _ = hf.fit_sv_from_data(toy_lap, [(x, y)], 0, 0)
    assert filt.h0 == pytest.approx(x @ y / (x @ x))


def test_rank_deficient_data(toy_lap, toy_spec):
    h = toy_spec.eigenvectors[:, toy_spec.q_h[0]]
    with pytest.warns(hf.RankDeficientData):
        filt, rep = hf.fit_fir_from_data(toy_lap, [(h, 2 * h)], 3)
    assert rep.rank == 1
    # minimum-norm solution puts everything on the identity column
    np.testing.assert_allclose(filt.h, [2, 0, 0], atol=1e-10)


def test_data_matrix_columns(toy_lap, rng):
    f = rng.standard_normal(10)
    m = fir_data_matrix(toy_lap, f, 3)
    np.testing.assert_allclose(m[:, 2], toy_lap.l1 @ (toy_lap.l1 @ f))
    with pytest.raises(ValueError):
        hf.fit_fir_from_data(toy_lap, [], 2)
    with pytest.raises(ValueError):
        hf.fit_fir_from_data(toy_lap, [(f, f[:5])], 2)
