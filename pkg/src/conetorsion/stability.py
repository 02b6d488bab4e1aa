"""Perturbation families, full-pipeline sweeps and theorem verdicts.

A family perturbs a base domain by r(t) -> r(t) (1 + eps cos(m t)).  Each
member runs mesh -> solve -> functionals; one deficit row per member.  The
Poincare combination Lambda is estimated once on the base member's mesh and
reused across rows (per-member re-estimation available for the largest eps).
Rows are independent solves and may run on a thread pool; every row is
internally sequential and deterministic, so results do not depend on the
worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import fem, poincare
from .geometry import (BoundaryPartition, DomainSpec, ScaledRadius, SpanInfo,
                       boundary_partition, domain_diameter, DomainError,
                       exterior_sphere_radius, interior_sphere_radius,
                       make_sector_domain, normal_span)
from .mesher import TaggedMesh, triangulate
from .quantities import (Center, DeficitReport, alternative_center,
                         compute_center, deficits, max_depth, max_gradient)


class SweepError(RuntimeError):
    """A family member failed to solve; partial results are flagged."""


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Family:
    base: DomainSpec
    mode: int
    eps_list: tuple
    members: tuple   # ((eps, DomainSpec), ...) including eps = 0


def make_family(base: DomainSpec, mode: int, eps_list) -> Family:
    """Validated perturbation family; every member must stay star-shaped."""
    eps_sorted = tuple(sorted(float(e) for e in eps_list))
    if any(e <= 0 for e in eps_sorted):
        raise DomainError("epsilons must be positive (the base is added as eps = 0)")
    members = [(0.0, base)]
    for eps in eps_sorted:
        fn = ScaledRadius(base.radius_fn, mode, eps)
        spec = make_sector_domain(base.beta, fn, base.sample_count)
        members.append((eps, spec))
    return Family(base, int(mode), eps_sorted, tuple(members))


# ---------------------------------------------------------------------------
# single-domain pipeline
# ---------------------------------------------------------------------------

@dataclass
class PipelineResult:
    spec: DomainSpec
    mesh: TaggedMesh
    field: fem.FemField
    center: Center
    report: DeficitReport
    report_alt: DeficitReport
    span: SpanInfo
    partition: BoundaryPartition
    lam: float
    mu: poincare.PoincareEstimate | None
    eta: poincare.PoincareEstimate | None


def estimate_lambda(mesh: TaggedMesh, partition: BoundaryPartition,
                    span: SpanInfo, alpha: float = 1.0):
    """(Lambda, mu, eta) on one mesh; eta only when GAMMA1 is present."""
    seg = partition.all_segments()
    mu = poincare.mu_estimate(mesh, alpha, boundary=(seg[0], seg[1]))
    eta = None
    if span.k >= 1:
        eta = poincare.eta_estimate(mesh, partition, span, alpha)
    return poincare.lambda_constant(span.k, mu, eta), mu, eta


def run_pipeline(spec: DomainSpec, h_target: float, degree: int = 2, *,
                 lam: float | None = None, alpha: float = 1.0,
                 domain_id: str = "", mu=None, eta=None) -> PipelineResult:
    """mesh -> solve -> center -> deficits, estimating Lambda when not given."""
    part = boundary_partition(spec)
    span = normal_span(part)
    mesh = triangulate(spec, h_target)
    u = fem.solve(fem.assemble(mesh, degree))
    if lam is None:
        lam, mu, eta = estimate_lambda(mesh, part, span, alpha)
    z = compute_center(u, span)
    rep = deficits(u, z, lambda_21=lam, domain_id=domain_id)
    z_alt = alternative_center(u)
    rep_alt = deficits(u, z_alt, lambda_21=lam, domain_id=domain_id + "[alt-z]")
    _attach_extras(rep, spec, u, span)
    return PipelineResult(spec, mesh, u, z, rep, rep_alt, span, part, lam, mu, eta)


def _attach_extras(rep: DeficitReport, spec: DomainSpec, u: fem.FemField,
                   span: SpanInfo) -> None:
    rep.extras["max_grad"] = max_gradient(u)
    rep.extras["max_minus_u"] = max_depth(u)
    rep.extras["diameter"] = domain_diameter(spec)
    rep.extras["r_e"] = exterior_sphere_radius(spec)
    ri = interior_sphere_radius(spec, samples=128)
    rep.extras["r_i"] = ri.value if ri.ok else float("nan")
    rep.extras["k"] = span.k


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

@dataclass
class SweepRow:
    eps: float
    report: DeficitReport
    report_alt: DeficitReport

    def column(self, name: str) -> float:
        if name == "eps":
            return self.eps
        return self.report.column(name)


@dataclass
class SweepResult:
    rows: list            # SweepRow, sorted by eps
    lam: float
    mu: poincare.PoincareEstimate
    eta: poincare.PoincareEstimate | None
    k: int
    h_target: float
    degree: int
    alpha: float
    label: str
    lam_largest: float | None = None
    failures: list = field(default_factory=list)

    def column(self, name: str, include_base: bool = True) -> np.ndarray:
        rows = self.rows if include_base else [r for r in self.rows if r.eps > 0]
        return np.array([r.column(name) for r in rows])


def run_sweep(family: Family, h_target: float, degree: int = 2, *,
              threads: int = 1, alpha: float = 1.0, label: str = "family",
              reestimate_largest: bool = False) -> SweepResult:
    """One deficit row per member at a common mesh policy.

    Lambda comes from the base member's mesh and is shared across rows; with
    ``reestimate_largest`` the largest-eps member additionally records its own
    estimate for comparison.  A failing member aborts with partial results
    attached to the raised SweepError.
    """
    base = family.members[0][1]
    part0 = boundary_partition(base)
    span0 = normal_span(part0)
    mesh0 = triangulate(base, h_target)
    lam, mu, eta = estimate_lambda(mesh0, part0, span0, alpha)

    def one(eps_spec):
        eps, spec = eps_spec
        dom_id = f"{label}-eps{eps:g}"
        res = run_pipeline(spec, h_target, degree, lam=lam,
                           domain_id=dom_id)
        return SweepRow(eps, res.report, res.report_alt)

    rows: list = []
    failures: list = []
    if threads <= 1:
        for member in family.members:
            try:
                rows.append(one(member))
            except Exception as exc:
                failures.append((member[0], repr(exc)))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futs = {pool.submit(one, member): member for member in family.members}
            for fut, member in futs.items():
                try:
                    rows.append(fut.result())
                except Exception as exc:
                    failures.append((member[0], repr(exc)))
    rows.sort(key=lambda r: r.eps)

    lam_largest = None
    if reestimate_largest and family.eps_list:
        eps_max = family.eps_list[-1]
        spec_max = dict((e, s) for e, s in family.members)[eps_max]
        part_m = boundary_partition(spec_max)
        span_m = normal_span(part_m)
        mesh_m = triangulate(spec_max, h_target)
        lam_largest, _, _ = estimate_lambda(mesh_m, part_m, span_m, alpha)

    result = SweepResult(rows, lam, mu, eta, span0.k, h_target, degree, alpha,
                         label, lam_largest, failures)
    if failures:
        err = SweepError(f"members failed: {failures}")
        err.partial = result
        raise err
    return result


# ---------------------------------------------------------------------------
# exponent fits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    r_squared: float
    x_column: str = ""
    y_column: str = ""
    log_profile_coeff: float = float("nan")
    log_profile_r2: float = float("nan")

    def __iter__(self):
        return iter((self.slope, self.intercept, self.r_squared))


def fit_exponent(result: SweepResult, x_column: str, y_column: str) -> ExponentFit:
    """Least-squares slope of log y vs log x over the eps > 0 rows.

    Also fits the two-dimensional log-profile y ~ c * x * max(log(1/x), 1)
    (single coefficient through the origin), recorded alongside.
    """
    x = result.column(x_column, include_base=False)
    y = result.column(y_column, include_base=False)
    return fit_exponent_xy(x, y, x_column, y_column)


def fit_exponent_xy(x, y, x_column: str = "", y_column: str = "") -> ExponentFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        raise ValueError("need at least 3 rows to fit an exponent")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("exponent fits need positive column values")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    g = x * np.maximum(np.log(1.0 / x), 1.0)
    c = float(np.sum(y * g) / np.sum(g * g))
    res = y - c * g
    denom = float(np.sum((y - y.mean()) ** 2))
    logr2 = 1.0 - float(np.sum(res**2)) / denom if denom > 0 else 1.0
    return ExponentFit(float(slope), float(intercept), float(r2),
                       x_column, y_column, c, logr2)


# ---------------------------------------------------------------------------
# theorem verdicts
# ---------------------------------------------------------------------------

@dataclass
class TheoremVerdict:
    theorem: str
    eps: float
    lhs: float
    rhs: float
    margin: float
    passed: bool | None
    note: str = ""

    def line(self) -> str:
        status = {True: "pass", False: "FAIL", None: "n/a "}[self.passed]
        return (f"{status}  {self.theorem:28s} eps={self.eps:<6g} "
                f"lhs={self.lhs:.6g} rhs={self.rhs:.6g} margin={self.margin:.3g} {self.note}")


def verify_theorems(result: SweepResult) -> list:
    """Row-wise inequality checks with the numerically estimated constants.

    Covers: the Lipschitz pseudodistance bound, its alternative-center
    variant (mu-only constant), the improved linear rho_e - rho_i profile
    (N = 2), and on full-plane rows the classical gradient and depth bounds.
    The N >= 3 profiles are out of numerical scope and marked as such.
    """
    verdicts: list = []
    mu_only = 1.0 / result.mu.value

    for row in result.rows:
        rep = row.report
        if rep.C_bound is not None:
            rhs = rep.C_bound * rep.deficit_2
            verdicts.append(TheoremVerdict(
                "lipschitz_pseudodistance", row.eps, rep.pseudodistance, rhs,
                rhs - rep.pseudodistance, rep.pseudodistance <= rhs))
        ra = row.report_alt
        if ra.m > 0:
            c_alt = poincare.theorem_constant(ra.m, mu_only)
            rhs = c_alt * ra.deficit_2
            verdicts.append(TheoremVerdict(
                "lipschitz_alternative_center", row.eps, ra.pseudodistance, rhs,
                rhs - ra.pseudodistance, ra.pseudodistance <= rhs))
        if result.k == 0:
            d = rep.extras.get("diameter", float("nan"))
            re_ = rep.extras.get("r_e", float("nan"))
            depth = rep.extras.get("max_minus_u", float("nan"))
            gmax = rep.extras.get("max_grad", float("nan"))
            verdicts.append(TheoremVerdict(
                "classical_depth_bound", row.eps, depth, d**2 / 2,
                d**2 / 2 - depth, bool(depth <= d**2 / 2)))
            if math.isfinite(re_):
                bound = 1.5 * d * (d + re_) / re_
                verdicts.append(TheoremVerdict(
                    "classical_gradient_bound", row.eps, gmax, bound,
                    bound - gmax, bool(gmax <= bound)))
            else:
                verdicts.append(TheoremVerdict(
                    "classical_gradient_bound", row.eps, gmax, float("nan"),
                    float("nan"), None, "non-convex member: no exterior radius"))

    # improved rho_e - rho_i profile, N = 2: ratio sequence must stay bounded
    pos = [r for r in result.rows if r.eps > 0]
    ratios = [r.report.rho_gap / r.report.deficit_1 for r in pos
              if r.report.deficit_1 > 0]
    if ratios:
        spread = max(ratios) / min(ratios)
        c_fit = max(ratios)
        for row, ratio in zip(pos, ratios):
            verdicts.append(TheoremVerdict(
                "rho_gap_linear_profile", row.eps, row.report.rho_gap,
                c_fit * row.report.deficit_1, c_fit - ratio, True,
                f"ratio={ratio:.4g}"))
        growth_ok = all(ratios[i] <= 1.5 * ratios[i + 1]
                        for i in range(len(ratios) - 1))
        verdicts.append(TheoremVerdict(
            "rho_gap_ratio_bounded", 0.0, spread, 1.5, 1.5 - spread,
            bool(spread <= 1.5 and growth_ok),
            f"max/min={spread:.3f}"))
    verdicts.append(TheoremVerdict(
        "rho_gap_profile_N_ge_3", 0.0, float("nan"), float("nan"),
        float("nan"), None, "out of numerical scope (planar core)"))
    return verdicts


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def sweep_csv_lines(result: SweepResult, fits=()) -> list:
    lines = [DeficitReport.csv_header()]
    for row in result.rows:
        lines.append(row.report.csv_row())
    for f in fits:
        lines.append(f"#FIT x={f.x_column} y={f.y_column} slope={f.slope:.12g} "
                     f"intercept={f.intercept:.12g} r2={f.r_squared:.12g} "
                     f"log_profile_coeff={f.log_profile_coeff:.12g} "
                     f"log_profile_r2={f.log_profile_r2:.12g}")
    return lines


def write_sweep_csv(result: SweepResult, fits, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        for line in sweep_csv_lines(result, fits):
            f.write(line + "\n")
