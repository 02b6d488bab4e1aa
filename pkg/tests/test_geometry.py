import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst
from scipy.integrate import quad

from conetorsion import (ConstantRadius, DomainError, FourierRadius,
                         TableRadius, boundary_partition, domain_area,
                         gamma0_length, geometry_report, interior_sphere_radius,
                         make_sector_domain, normal_span, parse_radius_spec,
                         polar_curvature, rho_extremes, serrin_radius)

# frozen quadrature oracle values for r(t) = 1 + 0.05 cos 3t
PERT_DISK_AREA = 3.14551964440678
PERT_DISK_LEN = 6.31840225228186
PERT_DISK_R = 0.9956693223419864
PERT_DISK_RI = 0.735   # 1 / max kappa = (1+eps)^2 / (1 + 10 eps), eps = 0.05


def test_make_sector_domain_accepts_standard_cases():
    q = make_sector_domain(math.pi / 2, ConstantRadius(1.0), 256)
    assert q.cone.is_convex and not q.cone.is_full_plane
    d = make_sector_domain(2 * math.pi, FourierRadius(1.0, [(3, 0.05)]), 512)
    assert d.cone.is_full_plane
    assert len(boundary_partition(d).gamma1_segments) == 0


@pytest.mark.parametrize("beta", [0.0, -1.0, 2 * math.pi + 0.1])
def test_make_sector_domain_rejects_bad_angle(beta):
    with pytest.raises(DomainError):
        make_sector_domain(beta, ConstantRadius(1.0))


def test_make_sector_domain_rejects_nonpositive_radius():
    with pytest.raises(DomainError):
        make_sector_domain(math.pi, FourierRadius(0.5, [(1, 1.0)]))


def test_full_plane_graph_must_close():
    # r(0) != r(2 pi) leaves the radial graph open (a loop mismatch)
    with pytest.raises(DomainError):
        make_sector_domain(2 * math.pi, lambda t: 1.0 + 0.1 * t)


def test_table_radius_rejects_loops():
    with pytest.raises(DomainError):
        TableRadius([0.0, 0.5, 0.4, 1.0], [1.0, 1.1, 1.05, 1.0])


def test_parse_radius_spec_forms():
    c = parse_radius_spec("constant 2.5")
    assert c(0.3) == pytest.approx(2.5)
    f = parse_radius_spec("fourier 1.0 3,0.05 5,0.01")
    assert f(0.0) == pytest.approx(1.06)
    ts = np.linspace(0, math.pi / 2, 9)
    tab = parse_radius_spec("table", points=[(t, 1 + 0.1 * t) for t in ts])
    assert tab(0.3) == pytest.approx(1.03, abs=1e-6)
    with pytest.raises(DomainError):
        parse_radius_spec("spline 1.0")
    with pytest.raises(DomainError):
        parse_radius_spec("table")   # missing points


# ---------------------------------------------------------------------------
# boundary partition
# ---------------------------------------------------------------------------

def test_quarter_partition_legs_and_normals(quarter_spec):
    part = boundary_partition(quarter_spec)
    assert len(part.gamma1_segments) == 2
    np.testing.assert_allclose(part.gamma1_normals[0], [0, -1], atol=1e-14)
    np.testing.assert_allclose(part.gamma1_normals[1], [-1, 0], atol=1e-14)
    # legs run origin <-> graph endpoints
    np.testing.assert_allclose(part.gamma1_segments[0][1], [1, 0], atol=1e-14)
    np.testing.assert_allclose(part.gamma1_segments[1][0], [0, 1], atol=1e-14)


def test_half_disk_partition(half_spec):
    part = boundary_partition(half_spec)
    assert len(part.gamma1_segments) == 2
    for nu in part.gamma1_normals:
        np.testing.assert_allclose(nu, [0, -1], atol=1e-12)


def test_gamma1_passes_through_origin(pert_quarter_spec):
    part = boundary_partition(pert_quarter_spec)
    for seg, nu in zip(part.gamma1_segments, part.gamma1_normals):
        for s in np.linspace(0, 1, 7):
            x = (1 - s) * seg[0] + s * seg[1]
            assert abs(x @ nu) <= 1e-10 * max(np.linalg.norm(x), 1e-30)


def test_partition_normals_unit_and_chord_error(pert_disk_spec):
    part = boundary_partition(pert_disk_spec)
    norms = np.linalg.norm(part.gamma0.normals, axis=1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-12)
    # chord sagitta stays below (max r) (beta / samples)^2
    a, b = part.gamma0.segments()
    mid = 0.5 * (a + b)
    proj = pert_disk_spec.project_to_gamma0(mid)
    gap = np.linalg.norm(proj - mid, axis=1).max()
    bound = 1.05 * (2 * math.pi / pert_disk_spec.sample_count) ** 2
    assert gap <= bound


# ---------------------------------------------------------------------------
# normal span
# ---------------------------------------------------------------------------

def test_normal_span_ranks(quarter_spec, half_spec, disk_spec):
    kq = normal_span(boundary_partition(quarter_spec))
    assert kq.k == 2
    assert np.allclose(kq.rotation @ kq.rotation.T, np.eye(2), atol=1e-12)
    kh = normal_span(boundary_partition(half_spec))
    assert kh.k == 1
    assert abs(abs(kh.basis[0] @ np.array([0, 1])) - 1) < 1e-12
    kd = normal_span(boundary_partition(disk_spec))
    assert kd.k == 0 and np.allclose(kd.rotation, np.eye(2))


@settings(max_examples=20, deadline=None)
@given(phi=hst.floats(-math.pi, math.pi, allow_nan=False))
def test_normal_span_rank_rotation_invariant(phi):
    spec = make_sector_domain(math.pi / 2, ConstantRadius(1.0), 64)
    part = boundary_partition(spec)
    assert normal_span(part.rotated(phi)).k == normal_span(part).k


# ---------------------------------------------------------------------------
# the candidate radius
# ---------------------------------------------------------------------------

def test_serrin_radius_ball_sectors():
    assert serrin_radius(math.pi / 4, math.pi / 2, 2) == pytest.approx(1.0)
    assert serrin_radius(math.pi, 2 * math.pi, 2) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        serrin_radius(1.0, 0.0)


def test_serrin_radius_perturbed_disk_quadrature_oracle(pert_disk_spec):
    # independent oracle: adaptive quadrature of the polar area/length elements
    r = lambda t: 1 + 0.05 * np.cos(3 * t)
    dr = lambda t: -0.15 * np.sin(3 * t)
    area_o, _ = quad(lambda t: 0.5 * r(t) ** 2, 0, 2 * math.pi, limit=200)
    len_o, _ = quad(lambda t: np.hypot(r(t), dr(t)), 0, 2 * math.pi, limit=200)
    assert area_o == pytest.approx(PERT_DISK_AREA, rel=1e-12)
    assert len_o == pytest.approx(PERT_DISK_LEN, rel=1e-12)
    assert domain_area(pert_disk_spec) == pytest.approx(PERT_DISK_AREA, rel=1e-9)
    assert gamma0_length(pert_disk_spec) == pytest.approx(PERT_DISK_LEN, rel=1e-9)
    R = serrin_radius(domain_area(pert_disk_spec), gamma0_length(pert_disk_spec))
    assert R == pytest.approx(PERT_DISK_R, rel=1e-9)


@settings(max_examples=25, deadline=None)
@given(scale=hst.floats(0.1, 10.0), area=hst.floats(0.1, 5.0),
       length=hst.floats(0.1, 5.0))
def test_serrin_radius_homogeneous(scale, area, length):
    base = serrin_radius(area, length, 2)
    scaled = serrin_radius(area * scale**2, length * scale, 2)
    assert scaled == pytest.approx(scale * base, rel=1e-12)


# ---------------------------------------------------------------------------
# rho extremes
# ---------------------------------------------------------------------------

def test_rho_extremes_sector_and_perturbed(quarter_spec, pert_disk_spec,
                                           shifted_half_spec):
    rho_e, rho_i = rho_extremes(boundary_partition(quarter_spec), (0, 0))
    assert rho_e == pytest.approx(1.0, abs=1e-12)
    assert rho_i == pytest.approx(1.0, abs=1e-4)   # chord sagitta only
    # chord sagitta ~ (2 pi / samples)^2 / 8 limits the polyline minimum
    rho_e, rho_i = rho_extremes(boundary_partition(pert_disk_spec), (0, 0))
    assert rho_e == pytest.approx(1.05, abs=1e-6)
    assert rho_i == pytest.approx(0.95, abs=2e-5)
    rho_e, rho_i = rho_extremes(boundary_partition(shifted_half_spec), (0.3, 0))
    assert rho_e == pytest.approx(1.0, abs=1e-9)
    assert rho_i == pytest.approx(1.0, abs=1e-4)


def test_rho_gap_vanishes_for_dense_sector_sampling():
    spec = make_sector_domain(math.pi / 2, ConstantRadius(1.0), 8192)
    rho_e, rho_i = rho_extremes(boundary_partition(spec), (0, 0))
    assert rho_e - rho_i <= 1e-8


# ---------------------------------------------------------------------------
# interior / exterior sphere radii
# ---------------------------------------------------------------------------

def test_interior_sphere_quarter_disk(quarter_spec):
    res = interior_sphere_radius(quarter_spec)
    assert res.ok
    assert res.value == pytest.approx(1.0, abs=5e-3)


def test_interior_sphere_unit_disk(disk_spec):
    res = interior_sphere_radius(disk_spec)
    assert res.ok
    assert res.value == pytest.approx(1.0, abs=5e-3)


def test_interior_sphere_perturbed_disk_curvature_oracle(pert_disk_spec):
    # oracle: concave-side curvature radius bound 1/max kappa for polar graphs
    ts = np.linspace(0, 2 * math.pi, 20001)
    kap = polar_curvature(pert_disk_spec, ts)
    assert 1.0 / kap.max() == pytest.approx(PERT_DISK_RI, rel=1e-6)
    res = interior_sphere_radius(pert_disk_spec)
    assert res.ok
    assert res.value == pytest.approx(PERT_DISK_RI, rel=0.01)


def test_interior_sphere_flags_needle_domains():
    # a deep needle leaves no room for tangent balls at its tip
    ts = np.linspace(0, math.pi / 2, 41)
    rs = 1.0 - 0.98 * np.exp(-((ts - math.pi / 4) ** 2) / (2 * 0.02**2))
    spec = make_sector_domain(math.pi / 2, TableRadius(ts, rs), 512)
    res = interior_sphere_radius(spec, samples=128)
    assert not res.ok
    assert res.value == 0.0


def test_polar_curvature_matches_finite_differences(pert_disk_spec):
    ts = np.linspace(0.1, 1.0, 7)
    r = pert_disk_spec.radius_fn
    h = 1e-5
    dr = (r(ts + h) - r(ts - h)) / (2 * h)
    d2r = (r(ts + h) - 2 * r(ts) + r(ts - h)) / h**2
    kap_fd = (r(ts) ** 2 + 2 * dr**2 - r(ts) * d2r) / (r(ts) ** 2 + dr**2) ** 1.5
    np.testing.assert_allclose(polar_curvature(pert_disk_spec, ts), kap_fd,
                               rtol=1e-5)


# ---------------------------------------------------------------------------
# geometry report
# ---------------------------------------------------------------------------

def test_geometry_report_quarter(quarter_spec):
    rep = geometry_report(quarter_spec)
    assert rep.area == pytest.approx(math.pi / 4, rel=1e-9)
    assert rep.gamma0_length == pytest.approx(math.pi / 2, rel=1e-9)
    assert rep.diameter == pytest.approx(math.sqrt(2), rel=1e-4)
    assert 0 < rep.rho_i <= rep.rho_e
    assert 0 < rep.r_i_estimate <= rep.rho_e + 1e-9
    assert 0 < rep.theta <= math.pi / 2 and rep.a_tilde > 0
