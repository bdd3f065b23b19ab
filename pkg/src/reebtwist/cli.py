"""Command line pipeline: configuration in, CSV/JSON artifacts out.

Subcommands mirror the analysis stages (validate, orbits, index, plane,
lincr, energy, profiles) plus ``all``, which runs the whole pipeline
and writes a summary.  Runs are deterministic in (config, seed); every
float is printed with 17 significant digits so outputs round-trip, and
files are written atomically (temp + rename).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import energy as energy_mod
from . import geometry, lincr, orbits, plane
from . import index as index_mod
from . import profiles
from .config import ConfigError, RunConfig, default_config_text, parse_config

__all__ = ["main", "run"]

SCHEMA_TEXT = """\
CSV artifacts (comma-separated, LF, UTF-8, one header row; floats use
17 significant digits):

  twist_profile.csv    x, g, g_prime, h_k, h_tilde_k
  binding_profile.csv  r, h1, h1_prime, h2, h2_prime, detH
  orbits.csv           p_level, g_value, m, i, period, action, degree, is_principal
  degree_table.csv     p_level, i, morse_index, mu, degree
  plane.csv            rho, r, t
  lincr_modes.csv      block, direction, rho, log10_norm

JSON artifacts (stable key order):

  validate.json        profile/geometry identity residuals and flags
  plane_energy.json    stokes, quadrature, action_gamma0
  kernel.json          per-mode kernel counts, delta, a-norm, inequality report
  energy.json          E1, E2, total, bound, pass
  summary.json         degree_of_gamma0, plane_energy, action_gamma0,
                       kernel_total, pass_flags
"""


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _atomic_write(path: Path, data: str):
    tmp = path.with_name(path.name + f".tmp-{os.getpid()}")
    tmp.write_text(data, encoding="utf-8")
    os.replace(tmp, path)


def write_csv(path: Path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    _atomic_write(path, buf.getvalue())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def write_json(path: Path, payload: dict):
    _atomic_write(path, json.dumps(_jsonable(payload), sort_keys=True,
                                   indent=2) + "\n")


# ----------------------------------------------------------------------
# shared model construction
# ----------------------------------------------------------------------

class Model:
    """Profiles and lazily computed downstream objects for one config."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.tp = profiles.build_twist_profile(
            cfg.k, cfg.eps, cfg.p_plateau, cfg.twist_shape, cfg.s_max)
        shape = {"name": cfg.binding_shape, "twist": self.tp,
                 "kappa": cfg.kappa, "tail_width": cfg.tail_width}
        self.bp = profiles.build_binding_profile(cfg.r0, cfg.r_max, shape)
        self.bp_matched = None
        if cfg.matched_enabled and cfg.k < 0:
            self.bp_matched = profiles.matched_binding_profile(
                self.tp, r_max=cfg.matched_r_max, p_cap=cfg.matched_p_cap)
        self._sol = None
        self._we = None

    @property
    def sol(self):
        if self._sol is None:
            r1 = self.cfg.r_at_1 or self.bp.core_end / 2.0
            self._sol = plane.solve_plane(self.bp, r_at_1=r1,
                                          tol_asym=self.cfg.tol_asym)
        return self._sol

    @property
    def we(self):
        if self._we is None:
            self._we = lincr.assemble_W_equation(self.bp, self.sol)
        return self._we


# ----------------------------------------------------------------------
# stages
# ----------------------------------------------------------------------

def stage_profiles(model: Model, out: Path):
    h, rows = profiles.twist_table(model.tp)
    write_csv(out / "twist_profile.csv", h, rows)
    h, rows = profiles.binding_table(model.bp)
    write_csv(out / "binding_profile.csv", h, rows)


def stage_validate(model: Model, out: Path, seed: int) -> dict:
    cfg = model.cfg
    tp, bp = model.tp, model.bp
    t_start = time.time()
    rng = np.random.default_rng(seed)
    rep = {
        "g_at_0_minus_k_pi": abs(tp.g(0.0) - cfg.k * math.pi),
        "p0": tp.p0,
        "p0_residual": abs(tp.g(tp.p0)) if tp.p0 is not None else None,
        "fd_consistency_g": tp.g.check_derivative_consistency(rng=rng),
        "fd_consistency_hk": tp.hk.check_derivative_consistency(rng=rng),
        "fd_consistency_h1": bp.h1.check_derivative_consistency(rng=rng),
        "fd_consistency_h2": bp.h2.check_derivative_consistency(rng=rng),
    }
    # quadrature oracle for the twist primitives
    worst_hk = worst_ht = 0.0
    for s in np.linspace(0.05, tp.s_max, 16):
        worst_hk = max(worst_hk, abs(tp.hk(s) - tp.hk_by_quadrature(s)))
        worst_ht = max(worst_ht, abs(tp.htilde(s) - tp.htilde_by_quadrature(s)))
    rep["hk_quadrature_gap"] = worst_hk
    rep["htilde_quadrature_gap"] = worst_ht
    mn, at = bp.min_detH_over_r(10_000)
    rep["min_detH_over_r"] = mn
    rep["min_detH_over_r_at"] = at
    rep["contact_bound_ok"] = bool(mn >= 0.5)
    if tp.p0 is not None:
        rep["action_tie_residual"] = abs(
            2.0 * math.pi * bp.h2(bp.r0) - tp.hk(tp.p0))
    # alpha(Reeb) at 10^4 random points
    worst = 0.0
    for _ in range(10_000):
        x = geometry.random_binding_point(cfg.n, bp, rng)
        R = geometry.reeb_field_binding(bp, x)
        worst = max(worst, abs(geometry.alpha_binding(bp, x, R) - 1.0))
    rep["alpha_reeb_max_residual"] = worst
    rep["alpha_reeb_ok"] = bool(worst <= 1e-10)
    rep["identity_suite"] = geometry.identity_suite(tp, bp, n=cfg.n,
                                                    n_points=200, seed=seed)
    if model.bp_matched is not None:
        bpm = model.bp_matched
        pull = profiles.pullback_consistency_check(tp, bpm, bpm.collar)
        rep["pullback"] = {
            "collar": pull.collar,
            "phi_period_scale": pull.phi_period_scale,
            "max_mismatch": pull.max_mismatch,
            "worst_radius": pull.worst_radius,
            "passed": pull.passed,
        }
        rep["matched_min_detH_over_r"] = bpm.min_detH_over_r(10_000)[0]
        suite_m = geometry.identity_suite(tp, bpm, n=cfg.n, n_points=50,
                                          seed=seed + 1)
        rep["matched_reeb_push_mismatch"] = suite_m.get(
            "reeb_push_collar_mismatch")
    write_json(out / "validate.json", rep)
    # wall-clock time stays out of the artifact (outputs are
    # byte-deterministic in config and seed)
    rep["runtime_seconds"] = time.time() - t_start
    return rep


def stage_orbits(model: Model, out: Path) -> dict:
    tp, bp, cfg = model.tp, model.bp, model.cfg
    rows = []
    principal = None
    if cfg.k < 0:
        principal = orbits.find_principal_level(tp)
        bound = cfg.action_bound_factor * principal.action
    else:
        bound = cfg.action_bound_factor * tp.hk(tp.s_max)
    levels = orbits.enumerate_orbit_levels(tp, bound, cfg.denom_cap)
    for L in levels:
        deg = ""
        if L.is_principal:
            deg = index_mod.sft_degree(L, cfg.n, 0, tp=tp, i=L.i)
        rows.append([L.p_level, L.g_value, L.m, L.i, L.period, L.action,
                     deg, L.is_principal])
    write_csv(out / "orbits.csv",
              ["p_level", "g_value", "m", "i", "period", "action", "degree",
               "is_principal"], rows)
    report = {"n_levels": len(levels), "action_bound": bound}
    if principal is not None:
        closure = orbits.verify_closure_by_flow(bp, principal, tol=1e-8)
        report.update({
            "principal_level": principal.p_level,
            "principal_action": principal.action,
            "closure_distance": closure.distance,
            "closure_phi_advance": closure.phi_advance,
            "closure_ok": closure.passed,
        })
    return report


def stage_index(model: Model, out: Path) -> dict:
    tp, cfg = model.tp, model.cfg
    level = orbits.find_principal_level(tp)
    rows = index_mod.degree_table(tp, level, cfg.n, turn_counts=(1, 2, 3),
                                  morse_indices=(0, 2 * cfg.n - 3))
    write_csv(out / "degree_table.csv",
              ["p_level", "i", "morse_index", "mu", "degree"],
              [[r["p_level"], r["i"], r["morse_index"], str(r["mu"]),
                r["degree"]] for r in rows])
    deg0 = next(r["degree"] for r in rows
                if r["i"] == 1 and r["morse_index"] == 0)
    return {"degree_of_gamma0": deg0, "rows": len(rows)}


def stage_plane(model: Model, out: Path) -> dict:
    sol = model.sol
    write_csv(out / "plane.csv", ["rho", "r", "t"],
              list(zip(sol.rho_grid, sol.r_vals, sol.t_vals)))
    rep = plane.plane_energy(model.bp, sol)
    payload = {"stokes": rep.stokes, "quadrature": rep.quadrature,
               "action_gamma0": rep.action_gamma0,
               "relative_gap": rep.relative_gap,
               "rho_span": list(rep.rho_span)}
    write_json(out / "plane_energy.json", payload)
    return payload


def stage_lincr(model: Model, out: Path, seed: int) -> dict:
    cfg = model.cfg
    we = model.we
    report = lincr.kernel_dimension(we, delta=cfg.delta, k_max=cfg.k_max,
                                    n=cfg.n, angle_tol=10 * cfg.tol_rank)
    rng = np.random.default_rng(seed + 17)
    fields = [lincr.random_truncated_field(
        rng, rng.integers(2, 11, size=3).tolist()) for _ in range(100)]
    sz = lincr.sz_inequality_check(fields, delta=report.delta)
    header, rows = lincr.mode_shooting_table(we, k_max=cfg.k_max)
    write_csv(out / "lincr_modes.csv", header, rows)
    payload = {
        "per_mode": {str(k): v for k, v in sorted(report.per_mode.items())},
        "total": report.total,
        "non_decaying_bounded": report.non_decaying_bounded,
        "delta": report.delta,
        "spectral_gap": report.spectral_gap,
        "angle_conditioning": {str(k): v for k, v in
                               report.conditioning.items()},
        "a_norm": lincr.a_norm_report(we),
        "sz_inequality": sz,
    }
    write_json(out / "kernel.json", payload)
    return payload


def stage_energy(model: Model, out: Path) -> dict:
    bp = model.bp
    r_lo = 0.1 * bp.r0
    circles, wts, span = energy_mod.gauss_legendre_family(
        bp, r_lo, bp.r0 * 0.999, 512)
    e1, e2 = energy_mod.annulus_energies(bp, circles, weights=wts, span=span)
    full = [energy_mod.plane_level_circle(bp, float(r))
            for r in np.linspace(0.02, bp.r0, 512)]
    audit = energy_mod.energy_bound_audit(bp, full)
    payload = {"E1": e1, "E2": e2,
               "total": audit["total"], "bound": audit["bound"],
               "pass": audit["passed"],
               "winding_gamma0": energy_mod.winding_number(
                   bp, energy_mod.orbit_circle(bp)),
               "action_gamma0": energy_mod.action(energy_mod.orbit_circle(bp))}
    write_json(out / "energy.json", payload)
    return payload


def stage_geometry(model: Model, out: Path, seed: int, quiet: bool) -> dict:
    cfg = model.cfg
    suite = geometry.identity_suite(model.tp, model.bp, n=cfg.n,
                                    n_points=1000, seed=seed)
    if model.bp_matched is not None:
        suite_m = geometry.identity_suite(model.tp, model.bp_matched,
                                          n=cfg.n, n_points=100, seed=seed)
        suite["reeb_push_collar_mismatch"] = suite_m[
            "reeb_push_collar_mismatch"]
    thresholds = {
        "alpha_of_reeb_minus_1": 1e-10,
        "dalpha_reeb_contraction": 1e-9,
        "J_squared_plus_id": 1e-9,
        "J_dt_minus_reeb": 1e-10,
        "J_dr_minus_geofield": 1e-10,
        "dalpha_exact_vs_fd": 1e-9,
        "frame_gram_vs_standard": 1e-9,
        "reeb_push_collar_mismatch": 1e-8,
    }
    table = {}
    for key, val in suite.items():
        if key == "min_compatibility_quotient":
            ok = val > 0.0
        else:
            ok = val <= thresholds.get(key, 1e-8)
        table[key] = {"value": val, "pass": bool(ok)}
        if not quiet:
            print(f"  {key:32s} {val: .3e}  {'PASS' if ok else 'FAIL'}")
    write_json(out / "geometry_check.json", table)
    return table


STAGES = ("validate", "geometry", "orbits", "index", "plane", "lincr",
          "energy", "profiles", "all")


def run(subcommand: str, cfg: RunConfig, out_dir: str, seed: int | None = None,
        quiet: bool = False) -> dict:
    if subcommand not in STAGES:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if seed is None:
        seed = cfg.seed
    model = Model(cfg)
    results = {}

    def note(msg):
        if not quiet:
            print(msg)

    if subcommand in ("profiles", "all", "validate"):
        stage_profiles(model, out)
        note("wrote twist_profile.csv, binding_profile.csv")
    if subcommand in ("validate", "all"):
        results["validate"] = stage_validate(model, out, seed)
        note("validate: alpha residual %.2e, min detH/r %.3f" % (
            results["validate"]["alpha_reeb_max_residual"],
            results["validate"]["min_detH_over_r"]))
    if subcommand == "geometry":
        note("geometry identity suite:")
        results["geometry"] = stage_geometry(model, out, seed, quiet)
    if subcommand in ("orbits", "all"):
        results["orbits"] = stage_orbits(model, out)
        note("orbits: %d levels" % results["orbits"]["n_levels"])
    if subcommand in ("index", "all"):
        results["index"] = stage_index(model, out)
        note("index: degree of the lowest generator = %d"
             % results["index"]["degree_of_gamma0"])
    if subcommand in ("plane", "all"):
        results["plane"] = stage_plane(model, out)
        note("plane: energy %.12g" % results["plane"]["stokes"])
    if subcommand in ("lincr", "all"):
        results["lincr"] = stage_lincr(model, out, seed)
        note("lincr: kernel total %d" % results["lincr"]["total"])
    if subcommand in ("energy", "all"):
        results["energy"] = stage_energy(model, out)
        note("energy: E1 %.2e, bound met %s" % (
            results["energy"]["E1"], results["energy"]["pass"]))

    if subcommand == "all":
        flags = {
            "contact_bound": results["validate"]["contact_bound_ok"],
            "alpha_reeb": results["validate"]["alpha_reeb_ok"],
            "degree_is_1": results["index"]["degree_of_gamma0"] == 1,
            "energy_identity": abs(results["plane"]["stokes"]
                                   - results["plane"]["action_gamma0"])
            <= 1e-6 * results["plane"]["action_gamma0"],
            "kernel_total_5": results["lincr"]["total"] == 5,
            "energy_bound": results["energy"]["pass"],
        }
        summary = {
            "degree_of_gamma0": results["index"]["degree_of_gamma0"],
            "plane_energy": results["plane"]["stokes"],
            "action_gamma0": results["plane"]["action_gamma0"],
            "kernel_total": results["lincr"]["total"],
            "pass_flags": flags,
            "seed": seed,
        }
        write_json(out / "summary.json", summary)
        results["summary"] = summary
        note("summary: " + ", ".join(f"{k}={v}" for k, v in flags.items()))
    return results


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="reebtwist",
        description="Numerical checks for the twisted open-book model")
    parser.add_argument("subcommand", choices=STAGES, nargs="?",
                        help="pipeline stage to run")
    parser.add_argument("--config", help="path to a config file")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--schema", action="store_true",
                        help="print the artifact schemas and exit")
    parser.add_argument("--print-config", action="store_true",
                        help="print the default config file and exit")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    if args.schema:
        print(SCHEMA_TEXT, end="")
        return 0
    if args.print_config:
        print(default_config_text(), end="")
        return 0
    if args.subcommand is None:
        parser.error("a subcommand is required (or --schema/--print-config)")

    try:
        if args.config:
            cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
        else:
            cfg = parse_config(default_config_text())
        run(args.subcommand, cfg, args.out, seed=args.seed, quiet=args.quiet)
    except (ConfigError, profiles.ProfileError, orbits.OrbitError,
            plane.PlaneError, lincr.LinCRError, energy_mod.EnergyError,
            geometry.GeometryError, index_mod.IndexError_) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
