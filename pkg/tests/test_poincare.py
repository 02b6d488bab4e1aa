import math

import numpy as np
import pytest
import scipy.linalg
from scipy.special import jnp_zeros

from conetorsion import (ConstantRadius, boundary_partition, h_field,
                         make_sector_domain, normal_span, rectangle_mesh,
                         triangulate)
from conetorsion.poincare import (_boundary_segments, _p1_matrices,
                                  _smallest_eigs, admissible_exponents,
                                  eta_ablation_eigenvalue, eta_estimate,
                                  lambda_constant, mixed_gradient_poincare_check,
                                  mu_estimate, theorem_constant)

# first positive root of the derivative of the first-order Bessel function
BESSEL_J1_PRIME_ROOT = 1.8411837813406595


def test_bessel_oracle_value():
    assert jnp_zeros(1, 1)[0] == pytest.approx(BESSEL_J1_PRIME_ROOT, abs=1e-12)


def test_mu_disk_matches_bessel_root(disk_spec):
    mesh = triangulate(disk_spec, 0.025)
    est = mu_estimate(mesh, 0.0)
    assert est.value == pytest.approx(BESSEL_J1_PRIME_ROOT, rel=0.01)
    assert est.value > 0


def test_mu_square_matches_pi():
    est = mu_estimate(rectangle_mesh(40, 40), 0.0)
    assert est.value == pytest.approx(math.pi, rel=0.01)


def test_sparse_matches_dense_eigensolve(disk_spec):
    # same mesh, same matrices: ARPACK vs a dense generalized eigensolve
    mesh = triangulate(disk_spec, 0.12)
    seg_a, seg_b = _boundary_segments(mesh)
    A, M = _p1_matrices(mesh, 0.0, seg_a, seg_b)
    sparse_vals = _smallest_eigs(A, M, k=4)
    dense_vals = np.sort(scipy.linalg.eigh(A.toarray(), M.toarray(),
                                           eigvals_only=True))
    np.testing.assert_allclose(sparse_vals, dense_vals[:4], atol=1e-8)


def test_constant_mode_excluded(disk_spec):
    mesh = triangulate(disk_spec, 0.1)
    est = mu_estimate(mesh, 0.0)
    assert est.value > 0.5   # strictly positive, not the constant's zero


def test_mu_scaling_law(disk_spec):
    base = mu_estimate(triangulate(disk_spec, 0.05), 0.0).value
    for s in (0.5, 2.0):
        spec = make_sector_domain(2 * math.pi, ConstantRadius(s), 512)
        val = mu_estimate(triangulate(spec, 0.05 * s), 0.0).value
        assert val == pytest.approx(base / s, rel=0.02)


def test_mu_history_decreases(disk_spec):
    mesh = triangulate(disk_spec, 0.15)
    est = mu_estimate(mesh, 0.0, levels=3)
    hist = est.history
    assert len(hist) == 3 and est.level == 2
    assert all(hist[i + 1] <= hist[i] * 1.02 for i in range(2))
    assert est.converged == (abs(hist[-1] - hist[-2]) <= 0.02 * hist[-1])


def test_mu_weighted_variants_positive(disk_spec):
    mesh = triangulate(disk_spec, 0.05)
    for alpha in (0.5, 1.0):
        assert mu_estimate(mesh, alpha).value > 0


def test_mu_rejects_bad_alpha(disk_spec):
    with pytest.raises(ValueError):
        mu_estimate(triangulate(disk_spec, 0.2), 0.25)


def test_degree_two_eigen_option(disk_spec, quarter_spec):
    # optional degree-2 fields agree with (and improve on) the P1 default
    mesh = triangulate(disk_spec, 0.06)
    m1 = mu_estimate(mesh, 0.0, degree=1).value
    m2 = mu_estimate(mesh, 0.0, degree=2).value
    assert m2 == pytest.approx(m1, rel=0.01)
    assert abs(m2 - BESSEL_J1_PRIME_ROOT) <= abs(m1 - BESSEL_J1_PRIME_ROOT)
    part = boundary_partition(quarter_spec)
    span = normal_span(part)
    qmesh = triangulate(quarter_spec, 0.06)
    e2 = eta_estimate(qmesh, part, span, 0.0, degree=2).value
    assert e2 == pytest.approx(BESSEL_J1_PRIME_ROOT, rel=0.005)


# ---------------------------------------------------------------------------
# eta
# ---------------------------------------------------------------------------

def test_eta_quarter_disk_separation_oracle(quarter_spec):
    # components decouple into mixed one-leg-Dirichlet problems whose lowest
    # eigenvalue is the squared first positive root of J1'
    part = boundary_partition(quarter_spec)
    span = normal_span(part)
    mesh = triangulate(quarter_spec, 0.025)
    est = eta_estimate(mesh, part, span, 0.0)
    assert est.value == pytest.approx(BESSEL_J1_PRIME_ROOT, rel=0.01)


def test_eta_half_disk_k1(half_spec):
    part = boundary_partition(half_spec)
    span = normal_span(part)
    assert span.k == 1
    mesh = triangulate(half_spec, 0.025)
    est = eta_estimate(mesh, part, span, 0.0)
    assert est.value == pytest.approx(BESSEL_J1_PRIME_ROOT, rel=0.01)


def test_eta_rejects_empty_gamma1(disk_spec):
    part = boundary_partition(disk_spec)
    span = normal_span(part)
    mesh = triangulate(disk_spec, 0.2)
    with pytest.raises(ValueError):
        eta_estimate(mesh, part, span, 0.0)


def test_eta_constraint_makes_constant_inadmissible(quarter_spec):
    part = boundary_partition(quarter_spec)
    span = normal_span(part)
    mesh = triangulate(quarter_spec, 0.1)
    est = eta_estimate(mesh, part, span, 0.0)
    assert est.value > 0.5


def test_eta_ablation_admits_constants(quarter_spec):
    part = boundary_partition(quarter_spec)
    span = normal_span(part)
    mesh = triangulate(quarter_spec, 0.1)
    assert eta_ablation_eigenvalue(mesh, part, span, 0.0) <= 1e-8


# ---------------------------------------------------------------------------
# constants assembly
# ---------------------------------------------------------------------------

def test_lambda_constant_cases():
    assert lambda_constant(0, mu=2.0) == pytest.approx(0.5)
    assert lambda_constant(2, eta=1.5) == pytest.approx(2 / 3)
    assert lambda_constant(1, mu=2.0, eta=4.0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        lambda_constant(0)
    with pytest.raises(ValueError):
        lambda_constant(2, mu=2.0)
    with pytest.raises(ValueError):
        lambda_constant(1, mu=2.0)


def test_theorem_constant_values():
    assert theorem_constant(1.0, 1.0, 2) == pytest.approx(3.5)
    assert theorem_constant(0.5, 2.0, 2) == pytest.approx(19.0)
    with pytest.raises(ValueError):
        theorem_constant(0.0, 1.0)


def test_admissible_exponents():
    assert admissible_exponents(2, 2, 1.0)          # r = p, alpha = 1
    assert admissible_exponents(4, 2, 0.5)          # r = Np/(N-p(1-alpha)) = 4
    assert not admissible_exponents(5, 2, 0.5)      # beyond the critical index
    assert not admissible_exponents(2, 2, 0.0)      # p(1-alpha) = N
    assert not admissible_exponents(1, 2, 1.0)      # r < p


# ---------------------------------------------------------------------------
# the mixed gradient inequality
# ---------------------------------------------------------------------------

def _check(bundle, alpha):
    part, span, mesh = bundle.partition, bundle.span, bundle.mesh
    seg = part.all_segments()
    mu = mu_estimate(mesh, alpha, boundary=(seg[0], seg[1]))
    eta = eta_estimate(mesh, part, span, alpha) if span.k >= 1 else None
    h = h_field(bundle.field, bundle.center)
    return mixed_gradient_poincare_check(h, span, mu, eta, alpha, part)


def test_mixed_check_rigidity(quarter_solve):
    chk = _check(quarter_solve, 1.0)
    assert chk.margin >= -1e-6


@pytest.mark.parametrize("alpha", [1.0, 0.5])
def test_mixed_check_perturbed_disk(pert_disk_solve, alpha):
    chk = _check(pert_disk_solve, alpha)
    assert chk.margin >= -1e-3 * chk.rhs
    assert chk.lhs > 0 and chk.rhs > 0


@pytest.mark.parametrize("alpha", [1.0, 0.5])
def test_mixed_check_perturbed_quarter(pert_quarter_solve, alpha):
    chk = _check(pert_quarter_solve, alpha)
    assert chk.margin >= -1e-3 * chk.rhs
