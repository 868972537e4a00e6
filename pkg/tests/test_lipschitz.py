from dataclasses import replace

import numpy as np
import pytest

from qcharmlab import (BarrierSpec, HarmonicMap, audit_subharmonicity, boundary_colip, compute_rho,
                       empirical_bilipschitz, errors, hopf_bound, interior_extension,
                       lipschitz_report)
from qcharmlab.lipschitz import ray_roots

HOPF_IDENTITY = 2 * (np.exp(-1) - 1) / 2 / (0.25 * (1 - np.exp(3)))


@pytest.fixture(scope="module")
def identity_chain(identity, circle_field, identity_spec):
    audit = audit_subharmonicity(identity, circle_field, identity_spec, grid=(32, 512))
    return audit, hopf_bound(identity, circle_field, identity_spec, audit)


@pytest.fixture(scope="module")
def affine_chain(affine, ellipse_field, affine_spec):
    audit = audit_subharmonicity(affine, ellipse_field, affine_spec, grid=(32, 512))
    return audit, hopf_bound(affine, ellipse_field, affine_spec, audit)


def test_rho_identity_and_rotation(identity, circle_field, identity_spec):
    assert abs(compute_rho(identity, circle_field, identity_spec) - 0.5) < 1e-6
    rot = HarmonicMap.from_terms({1: np.exp(0.7j)})
    assert abs(compute_rho(rot, circle_field, identity_spec) - 0.5) < 1e-6


def test_rho_affine_refinement(affine, ellipse_field, affine_spec):
    coarse = compute_rho(affine, ellipse_field, affine_spec)
    fine = compute_rho(affine, ellipse_field, affine_spec, n_angles=10240)
    assert 0 < coarse < 1 and abs(coarse - fine) < 1e-4
    theta, roots = ray_roots(affine, ellipse_field, affine_spec.collar_bound)
    d = ellipse_field.distance(affine.eval(roots * np.exp(1j * theta)))
    assert np.max(np.abs(d - 1 / 6)) < 1e-9


def test_collar_escape(circle_field, identity_spec):
    # the image of w = z/10 never gets near the boundary
    with pytest.raises(errors.CollarEscape):
        compute_rho(HarmonicMap.from_terms({1: 0.1}), circle_field, identity_spec)


def test_hopf_identity(identity_chain):
    _, cert = identity_chain
    assert abs(cert.rho - 0.5) < 1e-6
    assert abs(cert.M_rho - (np.exp(-1) - 1) / 2) < 1e-6
    assert abs(cert.hopf_constant - HOPF_IDENTITY) < 1e-9
    assert abs(cert.hopf_constant - 0.132482) < 1e-5
    assert abs(cert.min_boundary_dphi_dr - 1) < 1e-9 and cert.hopf_verified
    assert cert.M_rho < 0 < cert.hopf_constant and 0 < cert.rho < 1


def test_hopf_requires_passing_audit(identity, circle_field, identity_spec, identity_chain):
    audit, _ = identity_chain
    with pytest.raises(errors.NotSubharmonic):
        hopf_bound(identity, circle_field, identity_spec, replace(audit, passed=False))


def test_hopf_sign_error(circle_field, identity_spec):
    w = HarmonicMap.from_terms({1: 1.2})
    audit = audit_subharmonicity(w, circle_field, identity_spec, grid=(32, 256))
    with pytest.raises(errors.SignError):
        hopf_bound(w, circle_field, identity_spec, audit, rho=0.9)


def test_boundary_colip_identity(identity, circle_field, identity_spec, identity_chain):
    _, cert = identity_chain
    bb = boundary_colip(identity, circle_field, identity_spec, cert)
    assert abs(bb.value - np.exp(-1) * HOPF_IDENTITY) < 1e-9
    assert abs(bb.value - 0.048733) < 1e-5
    assert abs(bb.min_radial - 1) < 1e-12


def test_boundary_colip_affine(affine, ellipse_field, affine_spec, affine_chain):
    _, cert = affine_chain
    bb = boundary_colip(affine, ellipse_field, affine_spec, cert)
    assert abs(bb.min_radial - 2 / 3) < 1e-12
    assert 0 < bb.value <= 2 / 3
    assert abs(bb.value - np.exp(-4) * cert.hopf_constant) < 1e-15


def test_boundary_colip_failure(identity, circle_field, identity_spec, identity_chain):
    _, cert = identity_chain
    with pytest.raises(errors.VerificationFailure) as info:
        boundary_colip(identity, circle_field, identity_spec, replace(cert, hopf_constant=5.0))
    assert info.value.witness is not None


def test_interior_affine_arithmetic(affine):
    K, k = 2.0, 1 / 3
    C = 0.9 * K * (1 - k)
    ib = interior_extension(affine, C, K, grid=(32, 256))
    assert abs(ib.ab_check - (k + C / K)) < 1e-12
    assert abs(ib.theoretical_colip - C / K) < 1e-15
    assert abs(ib.min_l_norm - (1 - k)) < 1e-12
    with pytest.raises(errors.MaxPrincipleFailure):
        interior_extension(affine, 1.1 * K * (1 - k), K, grid=(32, 256))


def test_interior_identity(identity):
    ib = interior_extension(identity, 0.3, 1.0, grid=(32, 256))
    assert abs(ib.ab_check - 0.3) < 1e-12
    with pytest.raises(errors.MaxPrincipleFailure):
        interior_extension(identity, 1.2, 1.0, grid=(32, 256))


def test_lewy_violation():
    with pytest.raises(errors.LewyViolation):
        interior_extension(HarmonicMap.from_terms({2: 1.0}), 0.01, 1.0, grid=(32, 256))


def test_empirical_examples(identity, affine):
    lip, colip = empirical_bilipschitz(identity)
    assert abs(lip - 1) < 1e-12 and abs(colip - 1) < 1e-12
    lip, colip = empirical_bilipschitz(affine)
    assert abs(lip - 4 / 3) < 2e-3 and abs(colip - 2 / 3) < 2e-3
    assert colip <= lip
    lip, colip = empirical_bilipschitz(HarmonicMap.from_terms({1: np.exp(2j)}))
    assert abs(lip - 1) < 1e-12 and abs(colip - 1) < 1e-12


def test_empirical_seed_and_minimum(affine):
    assert empirical_bilipschitz(affine, 20000, seed=4) == empirical_bilipschitz(affine, 20000, seed=4)
    with pytest.raises(ValueError):
        empirical_bilipschitz(affine, 100)


def test_report_theorem_instance(affine, ellipse_field, affine_spec, affine_chain):
    _, cert = affine_chain
    bb = boundary_colip(affine, ellipse_field, affine_spec, cert)
    ib = interior_extension(affine, bb.value, affine_spec.K)
    rep = lipschitz_report(affine, ib, 20000, 0)
    assert rep.theorem_holds and ib.ab_check <= 1 + 1e-8
    assert rep.theoretical_colip <= rep.empirical_colip <= rep.empirical_lip
    d = rep.to_dict()
    assert d["theorem_holds"] and d["seed"] == 0
