"""Batch front-end: config-driven runs emitting CSV/SVG reports.

Commands: solve, identity, poincare, sweep, rigidity (solve on a
constant-radius spec with a pass/fail summary).  Configs are flat INI-style
files; unknown sections or keys are rejected.  Exit codes: 0 success,
1 validation error, 2 numerical failure, 3 theorem/assertion failure under
--strict.
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
from dataclasses import dataclass, field

from . import fem, poincare, quantities, stability, svgplot
from .geometry import (ConstantRadius, DomainError, DomainSpec,
                       boundary_partition, make_sector_domain, normal_span,
                       parse_radius_spec)
from .mesher import MeshError, refine, triangulate, write_mesh
from .quantities import DeficitReport

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_ASSERTION = 3

_KNOWN_KEYS = {
    "domain": {"angle", "radius", "radius_points", "samples"},
    "mesh": {"h_target", "degree", "refinements"},
    "sweep": {"mode", "epsilons"},
    "poincare": {"alphas", "kinds", "levels"},
    "output": {"prefix", "export_mesh", "export_solution"},
}


class ConfigError(ValueError):
    pass


def parse_angle(text: str) -> float:
    """Angles as plain radians or simple pi expressions: pi/2, 2pi, 0.75pi."""
    t = text.strip().lower().replace(" ", "")
    if "pi" not in t:
        return float(t)
    head, _, tail = t.partition("pi")
    factor = 1.0
    if head:
        factor *= float(head)
    if tail:
        if not tail.startswith("/"):
            raise ConfigError(f"cannot parse angle {text!r}")
        factor /= float(tail[1:])
    return factor * math.pi


@dataclass
class RunConfig:
    spec: DomainSpec
    h_target: float
    degree: int
    refinements: int
    sweep_mode: int | None
    sweep_eps: tuple
    alphas: tuple
    kinds: tuple
    poincare_levels: int
    prefix: str
    export_mesh: bool
    export_solution: bool
    radius_text: str = ""


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("yes", "true", "on", "1"):
        return True
    if t in ("no", "false", "off", "0"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def load_config(path: str) -> RunConfig:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"unknown config section [{section}]")
        for key in parser[section]:
            if key not in _KNOWN_KEYS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
    if "domain" not in parser:
        raise ConfigError("config needs a [domain] section")
    dom = parser["domain"]
    if "angle" not in dom or "radius" not in dom:
        raise ConfigError("[domain] needs 'angle' and 'radius'")
    angle = parse_angle(dom["angle"])
    points = None
    if dom.get("radius", "").strip().lower().startswith("table"):
        if "radius_points" not in dom:
            raise ConfigError("table radius needs 'radius_points'")
        points = []
        for w in dom["radius_points"].split():
            t_s, r_s = w.split(",")
            points.append((float(t_s), float(r_s)))
    radius = parse_radius_spec(dom["radius"], points)
    samples = int(dom.get("samples", "256"))
    spec = make_sector_domain(angle, radius, samples)

    mesh_sec = parser["mesh"] if "mesh" in parser else {}
    h_target = float(mesh_sec.get("h_target", "0.05"))
    degree = int(mesh_sec.get("degree", "2"))
    if degree not in (1, 2):
        raise ConfigError("degree must be 1 or 2")
    refinements = int(mesh_sec.get("refinements", "3"))

    sweep_mode, sweep_eps = None, ()
    if "sweep" in parser:
        sw = parser["sweep"]
        if "mode" in sw:
            sweep_mode = int(sw["mode"])
        eps_text = sw.get("epsilons", "").split()
        sweep_eps = tuple(float(e) for e in eps_text)

    alphas, kinds, plevels = (0.0,), ("mu",), 2
    if "poincare" in parser:
        po = parser["poincare"]
        if "alphas" in po:
            alphas = tuple(float(a) for a in po["alphas"].split())
        if "kinds" in po:
            kinds = tuple(po["kinds"].split())
            for kind in kinds:
                if kind not in ("mu", "eta"):
                    raise ConfigError(f"unknown poincare kind {kind!r}")
        if "levels" in po:
            plevels = int(po["levels"])

    out = parser["output"] if "output" in parser else {}
    prefix = out.get("prefix", "run")
    export_mesh = _bool(out.get("export_mesh", "no"))
    export_solution = _bool(out.get("export_solution", "no"))
    return RunConfig(spec, h_target, degree, refinements, sweep_mode, sweep_eps,
                     alphas, kinds, plevels, prefix, export_mesh,
                     export_solution, dom["radius"].strip())


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _write_lines(path, lines) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        for line in lines:
            f.write(line + "\n")


def cmd_solve(cfg: RunConfig, out_dir: str, require_constant: bool = False) -> int:
    if require_constant and not isinstance(cfg.spec.radius_fn, ConstantRadius):
        raise ConfigError("rigidity run needs a constant radius "
                          "(the cone is only rigid for ball sectors)")
    if require_constant and not cfg.spec.cone.is_convex:
        raise ConfigError("the rigidity statement needs the cone to be convex")
    res = stability.run_pipeline(cfg.spec, cfg.h_target, cfg.degree,
                                 domain_id=cfg.prefix)
    rep = res.report
    _write_lines(os.path.join(out_dir, f"{cfg.prefix}_report.csv"),
                 [DeficitReport.csv_header(), rep.csv_row()])
    if cfg.export_mesh:
        write_mesh(res.mesh, os.path.join(out_dir, f"{cfg.prefix}_mesh.txt"))
    if cfg.export_solution:
        fem.write_solution(res.field,
                           os.path.join(out_dir, f"{cfg.prefix}_solution.txt"))
    print(f"solve: h_max={rep.h_max:.6g} R={rep.R:.6g} m={rep.m:.6g} "
          f"k={rep.k} residual={rep.identity_residual:.3g} "
          f"dofs={res.field.diagnostics.get('n_dofs')}")
    if require_constant:
        tol = max(5e-3, 2.0 * rep.h_max**2)
        checks = {
            "deficit_2": rep.deficit_2,
            "pseudodistance": rep.pseudodistance,
            "rho_gap": rep.rho_gap,
        }
        ok = all(v <= tol for v in checks.values())
        for name, v in checks.items():
            print(f"  rigidity {name} = {v:.3e} (tol {tol:.1e}) "
                  f"{'pass' if v <= tol else 'FAIL'}")
        print(f"rigidity summary: {'PASS' if ok else 'FAIL'}")
        if not ok:
            return EXIT_ASSERTION
    return EXIT_OK


def cmd_identity(cfg: RunConfig, out_dir: str, strict: bool) -> int:
    """Identity residual across refinements plus the regularity surrogate."""
    part = boundary_partition(cfg.spec)
    span = normal_span(part)
    mesh = triangulate(cfg.spec, cfg.h_target)
    rows = ["level,h_max,identity_lhs,identity_rhs,gamma1_term,"
            "identity_residual,max_grad,hessian_l2,blowup_flag"]
    residuals, prev = [], None
    for level in range(cfg.refinements):
        u = fem.solve(fem.assemble(mesh, cfg.degree))
        z = quantities.compute_center(u, span)
        ident = quantities.identity_residual(u, z)
        gmax = quantities.max_gradient(u)
        hl2 = poincare.weighted_hessian_l2(u, 0.0, part)
        flag = prev is not None and (gmax > 2 * prev[0] or hl2 > 2 * prev[1])
        rows.append(f"{level},{mesh.h_max:.12g},{ident.lhs:.12g},"
                    f"{ident.rhs:.12g},{ident.gamma1_term:.12g},"
                    f"{ident.residual:.12g},{gmax:.12g},{hl2:.12g},"
                    f"{str(bool(flag)).lower()}")
        residuals.append(ident.residual)
        prev = (gmax, hl2)
        if level + 1 < cfg.refinements:
            mesh = refine(mesh)
    _write_lines(os.path.join(out_dir, f"{cfg.prefix}_identity.csv"), rows)
    decreasing = all(residuals[i + 1] <= residuals[i] * 1.2
                     for i in range(len(residuals) - 1))
    print("identity residuals:", " ".join(f"{r:.3e}" for r in residuals),
          "(decreasing)" if decreasing else "(NOT decreasing)")
    if not decreasing and strict:
        return EXIT_ASSERTION
    return EXIT_OK


def cmd_poincare(cfg: RunConfig, out_dir: str) -> int:
    part = boundary_partition(cfg.spec)
    span = normal_span(part)
    mesh = triangulate(cfg.spec, cfg.h_target)
    seg = part.all_segments()
    rows = ["kind,alpha,level,value,converged_flag"]
    for kind in cfg.kinds:
        for alpha in cfg.alphas:
            if kind == "mu":
                est = poincare.mu_estimate(mesh, alpha, levels=cfg.poincare_levels,
                                           boundary=(seg[0], seg[1]))
            else:
                if span.k == 0:
                    raise ConfigError("eta needs a domain with GAMMA1 (k >= 1)")
                est = poincare.eta_estimate(mesh, part, span, alpha,
                                            levels=cfg.poincare_levels)
            for level in range(len(est.history)):
                rows.append(est.csv_row(level))
            print(f"{kind} alpha={alpha:g}: {est.value:.6g} "
                  f"(converged={est.converged})")
    _write_lines(os.path.join(out_dir, f"{cfg.prefix}_poincare.csv"), rows)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, out_dir: str, threads: int, svg: bool,
              strict: bool) -> int:
    if cfg.sweep_mode is None or not cfg.sweep_eps:
        raise ConfigError("sweep needs [sweep] mode and a nonempty epsilons list")
    family = stability.make_family(cfg.spec, cfg.sweep_mode, cfg.sweep_eps)
    result = stability.run_sweep(family, cfg.h_target, cfg.degree,
                                 threads=threads, label=cfg.prefix)
    fits = []
    if len(cfg.sweep_eps) >= 3:
        fits = [stability.fit_exponent(result, "deficit_2", "pseudodistance"),
                stability.fit_exponent(result, "deficit_1", "rho_gap")]
    stability.write_sweep_csv(result, fits,
                              os.path.join(out_dir, f"{cfg.prefix}_sweep.csv"))
    if svg:
        x = result.column("deficit_2", include_base=False)
        y = result.column("pseudodistance", include_base=False)
        svgplot.write_scatter_svg(
            os.path.join(out_dir, f"{cfg.prefix}_sweep.svg"), x, y,
            fit=(fits[0].slope, fits[0].intercept) if fits else None,
            x_label="deficit_2", y_label="pseudodistance",
            title=f"slope={fits[0].slope:.3f} r2={fits[0].r_squared:.4f}"
                  if fits else cfg.prefix)
    verdicts = stability.verify_theorems(result)
    failed = [v for v in verdicts if v.passed is False]
    for v in verdicts:
        print(v.line())
    slope_note = (f"fit slope {fits[0].slope:.4f} (r2 {fits[0].r_squared:.5f}), "
                  if fits else "too few rows for a fit, ")
    print(f"sweep: {len(result.rows)} rows, {slope_note}"
          f"{len(failed)} failed verdicts")
    if failed and strict:
        return EXIT_ASSERTION
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="conetorsion",
        description="Torsion-problem verification runs on convex-cone sectors")
    p.add_argument("command",
                   choices=["solve", "identity", "poincare", "sweep", "rigidity"])
    p.add_argument("--config", required=True, help="INI-style run config")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--threads", type=int, default=1, help="sweep worker threads")
    p.add_argument("--svg", choices=["on", "off"], default="on")
    p.add_argument("--strict", action="store_true",
                   help="exit 3 when a theorem verdict fails")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        import threadpoolctl
        limits = threadpoolctl.threadpool_limits(limits=1)
    except ImportError:             # pragma: no cover
        limits = None
    try:
        cfg = load_config(args.config)
        os.makedirs(args.out, exist_ok=True)
        if args.command in ("solve", "rigidity"):
            return cmd_solve(cfg, args.out, require_constant=args.command == "rigidity")
        if args.command == "identity":
            return cmd_identity(cfg, args.out, args.strict)
        if args.command == "poincare":
            return cmd_poincare(cfg, args.out)
        return cmd_sweep(cfg, args.out, args.threads, args.svg == "on",
                         args.strict)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (MeshError, fem.FemError, poincare.EigenError, stability.SweepError,
            quantities.CenterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    finally:
        if limits is not None:
            limits.unregister()


if __name__ == "__main__":          # pragma: no cover
    sys.exit(main())
