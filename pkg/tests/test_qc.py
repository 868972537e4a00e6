import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcharmlab import (DiskAutomorphism, HarmonicMap, certify_diffeomorphism, check_qc_inequality,
                       dilatation_profile, errors, moebius_normalize, poisson_extend)
from qcharmlab.harmonic import BoundaryCorrespondence
from qcharmlab.qc import boundary_arc_position, disk_grid


def coeff_norm(a, b):
    n = range(-max(a.degree, b.degree), max(a.degree, b.degree) + 1)
    return np.sqrt(sum(abs(a.coeff(k) - b.coeff(k)) ** 2 for k in n))


def test_profile_examples(identity, affine):
    p = dilatation_profile(identity)
    assert abs(p.K_global - 1) < 1e-9 and p.certified
    p = dilatation_profile(affine)
    assert abs(p.k_global - 1 / 3) < 1e-12
    assert abs(p.K_global - 2) < 1e-9
    assert abs(p.min_boundary_jacobian - 8 / 9) < 1e-12
    with pytest.raises(errors.OrientationFailure) as info:
        dilatation_profile(HarmonicMap.affine(2.0))
    assert info.value.witness is not None


def test_profile_non_strict_reports_infinite_K():
    p = dilatation_profile(HarmonicMap.affine(2.0), strict=False)
    assert p.K_global == np.inf and not p.certified and abs(p.min_boundary_jacobian + 3) < 1e-12


def test_profile_grid_minimum(identity):
    with pytest.raises(ValueError):
        dilatation_profile(identity, grid=(16, 256))


def test_grid_is_nested_and_clustered():
    a, b = disk_grid(32, 256), disk_grid(64, 512)
    assert np.allclose(a, b[1::2, ::2])
    r = np.abs(a[:, 0])
    assert r[-1] == 1.0 and np.all(np.diff(np.diff(r)) < 0)


def test_qc_inequality_examples(identity, affine):
    c = check_qc_inequality(identity, 1.0)
    assert c.passed and abs(c.worst_ratio - 1) < 1e-12
    c = check_qc_inequality(affine, 2.0)
    assert c.passed and abs(c.worst_ratio - 2) < 1e-12
    c = check_qc_inequality(affine, 1.5)
    assert not c.passed and abs(c.worst_ratio - 2) < 1e-12


def test_certify_examples(identity, affine):
    c = certify_diffeomorphism(affine)
    assert c.certified and abs(c.min_jacobian - 8 / 9) < 1e-12
    c = certify_diffeomorphism(HarmonicMap.affine(2.0))
    assert not c.certified and abs(c.min_jacobian + 3) < 1e-12
    c = certify_diffeomorphism(identity)
    assert c.certified and abs(c.min_jacobian - 1) < 1e-12


def test_certify_rejects_non_monotone_phase(ellipse):
    corr = BoundaryCorrespondence.perturbed_uniform(ellipse, 0.6, 3)
    w = poisson_extend(corr, 256)
    with pytest.raises(errors.NotHomeomorphism):
        certify_diffeomorphism(w)


def test_normalize_identity_is_noop(identity):
    out = moebius_normalize(identity)
    assert coeff_norm(out, identity) < 1e-10


def test_normalize_undoes_rotation(circle, identity):
    rotated = poisson_extend(BoundaryCorrespondence.uniform(circle, offset=np.pi / 7), 1024)
    assert abs(rotated.coeff(1) - np.exp(1j * np.pi / 7)) < 1e-12
    out = moebius_normalize(rotated)
    assert coeff_norm(out, identity) < 1e-8


def test_normalize_keeps_affine_dilatation(affine):
    out = moebius_normalize(affine)
    assert abs(dilatation_profile(out).K_global - 2) < 1e-9
    th = 2 * np.pi * np.arange(3) / 3
    s = boundary_arc_position(out, th)
    L = affine.curve.length
    gaps = np.mod(np.diff(np.concatenate([s, s[:1] + L])), L)
    assert np.allclose(gaps, L / 3, atol=1e-9)


def test_normalize_anchor_image_of_one(ellipse):
    w = poisson_extend(BoundaryCorrespondence.perturbed_uniform(ellipse, 0.1, 2, offset=0.5), 1024)
    out = moebius_normalize(w, anchor="image_of_one")
    s = boundary_arc_position(out, 2 * np.pi * np.arange(3) / 3)
    s0 = boundary_arc_position(w, 0.0)[0]
    assert abs(np.mod(s[0] - s0 + 1, ellipse.length) - 1) < 1e-9
    assert abs(np.mod(s[1] - s[0], ellipse.length) - ellipse.length / 3) < 1e-9


def test_normalize_rejects_reversed_map():
    with pytest.raises(errors.OrientationFailure):
        w = HarmonicMap.affine(2.0)
        from qcharmlab import build_curve
        w.curve = build_curve(w.boundary_values(2 * np.pi * np.arange(64) / 64))
        moebius_normalize(w)


def test_automorphism_three_points():
    rng = np.random.default_rng(0)
    x = np.exp(1j * np.sort(rng.uniform(0, 2 * np.pi, 3)))
    y = np.exp(1j * np.sort(rng.uniform(0, 2 * np.pi, 3)))
    phi = DiskAutomorphism.from_three_points(x, y)
    assert abs(phi.a) < 1
    assert np.allclose(phi(x), y, atol=1e-12)
    th = np.linspace(0, 2 * np.pi, 50)
    assert np.allclose(np.exp(1j * phi.boundary_angle(th)), phi(np.exp(1j * th)), atol=1e-12)
    assert np.all(np.diff(phi.boundary_angle(th)) > 0)


# -- invariants ---------------------------------------------------------------

def test_pointwise_jacobian_identity(ellipse):
    w = poisson_extend(BoundaryCorrespondence.perturbed_uniform(ellipse, 0.15, 3), 1024)
    g = w.gradient(np.concatenate([[0j], disk_grid(32, 256).ravel()]))
    prod = (np.abs(g.wz) + np.abs(g.wzbar)) * (np.abs(g.wz) - np.abs(g.wzbar))
    assert np.max(np.abs(prod - g.jacobian) / np.abs(g.jacobian)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(k=st.floats(0, 0.95), rot=st.floats(0, 2 * np.pi))
def test_affine_closed_forms(k, rot):
    w = HarmonicMap.affine(k, rotation=rot)
    p = dilatation_profile(w, grid=(32, 256))
    K = (1 + k) / (1 - k)
    assert abs(p.K_global - K) < 1e-9 * K
    assert abs(p.K_global - (1 + p.k_global) / (1 - p.k_global)) < 1e-9 * K
    assert abs(p.min_boundary_jacobian - (1 - k * k)) < 1e-12
    assert p.K_global >= 1 and p.certified
    assert check_qc_inequality(w, p.K_global, grid=(32, 256)).passed


@settings(max_examples=8, deadline=None)
@given(k=st.floats(0, 0.8), ar=st.floats(0, 0.5), aa=st.floats(0, 2 * np.pi), alpha=st.floats(0, 2 * np.pi))
def test_dilatation_invariant_under_automorphisms(k, ar, aa, alpha):
    w = HarmonicMap.affine(k)
    phi = DiskAutomorphism(alpha, ar * np.exp(1j * aa))
    composed = poisson_extend(lambda th: w.boundary_values(phi.boundary_angle(th)), 1024)
    K0 = dilatation_profile(w, grid=(32, 256)).K_global
    K1 = dilatation_profile(composed, grid=(32, 256)).K_global
    assert abs(K0 - K1) < 1e-6


def test_profile_serializes(affine):
    d = dilatation_profile(affine, grid=(32, 256)).to_dict()
    assert d["grid"] == [32, 256] or d["grid"] == [64, 512]
    assert len(d["witness"]) == 2 and d["refinements"][0][:2] == [32, 256]
