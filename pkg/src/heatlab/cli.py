"""Command line interface: ``heatlab space|run|check|dump``.

Exit codes: 0 success, 2 invalid configuration, 3 numerical
non-convergence, 4 failed assertion.
"""

from __future__ import annotations

import argparse
import datetime
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import acceptance, convlab, harish, heatkern, solvlab, spherical
from .spacegeom import SpaceError, build_space

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ASSERT = 0, 2, 3, 4

EXPERIMENTS = ("kernel-eval", "concentration", "thm12", "rates", "counterexample", "busemann",
               "boundary", "distinguished-mass", "distinguished-concentration",
               "distinguished-sup", "distinguished-deviation")


class ConfigError(ValueError):
    pass


def parse_times(text: str):
    """'1', '1,2,5', 'a:b:dyadic' (doubling) or 'a:b:n' (n linear points)."""
    try:
        if ":" in text:
            a, b, kind = text.split(":")
            a, b = float(a), float(b)
            if kind == "dyadic":
                out, t = [], a
                while t <= b * (1 + 1e-12):
                    out.append(t)
                    t *= 2
            else:
                out = list(np.linspace(a, b, int(kind)))
        else:
            out = [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"cannot parse time grid {text!r}") from exc
    out = [float(x) for x in out]
    if not out or any(not math.isfinite(x) or x <= 0 for x in out):
        raise ConfigError("times must be positive")
    if any(b <= a for a, b in zip(out[:-1], out[1:])):
        raise ConfigError("time grid must be strictly increasing")
    return out


@dataclass
class ExperimentConfig:
    experiment: str
    space: str
    t_grid: list
    eps_exponent: float = 0.25
    datum: dict = field(default_factory=lambda: {"kind": "bump", "xi": 1.0, "center": 0.0})
    p: float = 3.0
    r: Optional[list] = None
    H: Optional[list] = None
    out: Optional[str] = None
    summary: Optional[str] = None

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        try:
            build_space(self.space)
        except SpaceError as exc:
            raise ConfigError(str(exc)) from exc
        if any(b <= a for a, b in zip(self.t_grid[:-1], self.t_grid[1:])):
            raise ConfigError("time grid must be strictly increasing")
        if self.datum.get("kind") != "bump" or self.datum.get("xi", 0) <= 0:
            raise ConfigError("datum must be a bump with positive xi")
        if self.experiment in ("thm12", "rates") and self.datum.get("center", 0) != 0:
            raise ConfigError(f"{self.experiment} needs a radial datum (center 0)")
        if not self.p > 1:
            raise ConfigError("p must exceed 1")
        if not 0 < self.eps_exponent < 0.5:
            raise ConfigError("eps exponent must lie in (0, 1/2)")

    def public(self):
        d = asdict(self)
        d.pop("out")
        d.pop("summary")
        return d


def _fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


class Table:
    def __init__(self, columns):
        self.columns = list(columns)
        self.rows = []

    def add(self, *vals):
        self.rows.append(vals)

    def render(self, header: dict) -> str:
        buf = io.StringIO()
        buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue()


# ---------------------------------------------------------------------------
# experiments: each returns (table, assertions)

def _datum(cfg):
    return convlab.InitialDatum.bump(float(cfg.datum["xi"]), center=float(cfg.datum.get("center", 0.0)))


def _points(cfg, sp):
    if sp.rank == 1:
        r = cfg.r if cfg.r is not None else [0.0, 1.0, 2.0]
        return np.array(r, float)[:, None]
    if cfg.H is None:
        raise ConfigError("rank two spaces need --H x,y")
    return np.array(cfg.H, float).reshape(-1, 2)


def exp_kernel_eval(cfg, e):
    sp = e.space
    H = _points(cfg, sp)
    cols = ["t"] + [f"H{i + 1}" for i in range(sp.rank)] + ["h_t", "envelope_ratio", "asym_ratio"]
    if sp.name == "Hr:3":
        cols.append("closed_form_rel_err")
    tab = Table(cols)
    asserts = {}
    worst = 0.0
    for t in cfg.t_grid:
        lh = np.atleast_1d(e.log_kernel(t, H))
        env = np.atleast_1d(heatkern.log_heat_envelope(e, t, H))
        for i, Hi in enumerate(H):
            row = [t, *Hi, math.exp(lh[i]), math.exp(lh[i] - env[i])]
            try:
                row.append(math.exp(lh[i] - float(np.ravel(heatkern.log_critical_asymptote(e, t, Hi[None]))[0])))
            except heatkern.DomainError:
                row.append(float("nan"))
            if sp.name == "Hr:3":
                r = float(Hi[0])
                exact = (4 * math.pi * t) ** -1.5 * math.exp(-t - r * r / (4 * t)) * (r / math.sinh(r) if r > 0 else 1.0)
                rel = abs(math.exp(lh[i]) / exact - 1)
                worst = max(worst, rel)
                row.append(rel)
            tab.add(*row)
    if sp.name == "Hr:3":
        asserts["closed_form_match_1e-6"] = worst <= 1e-6
    asserts["positive"] = all(r[len(Hi) + 1] > 0 for r in tab.rows)
    return tab, asserts


def exp_concentration(cfg, e):
    spec = heatkern.ConcentrationSpec(cfg.eps_exponent)
    out = convlab.ordered_map(lambda t: heatkern.mass_outside(e, spec, t), cfg.t_grid)
    tab = Table(["t", "eps", "radius", "mass_outside"])
    for t, m in zip(cfg.t_grid, out):
        tab.add(t, spec.eps(t), spec.radius(t), m)
    return tab, {"decreasing": bool(np.all(np.diff(out) < 0))}


def _report_table(rep, p):
    tab = Table(["t", "l1_dev", "linf_dev", "linf_norm", f"lp_dev_p{p:g}"])
    for row in rep.rows():
        tab.add(*row)
    return tab


def exp_convergence(cfg, e):
    rep = convlab.convergence_report(e, _datum(cfg), cfg.t_grid, p=cfg.p)
    tab = _report_table(rep, cfg.p)
    tab.add("slope", rep.fitted_slope, rep.slope_halfwidth, float("nan"), float("nan"))
    asserts = {"l1_decreasing": bool(np.all(np.diff(rep.l1_dev) < 0))}
    if math.isfinite(rep.fitted_slope):
        asserts["slope_in_band"] = -0.65 <= rep.fitted_slope <= -0.35
    return tab, asserts


def exp_rates(cfg, e):
    rep = convlab.convergence_report(e, _datum(cfg), cfg.t_grid, p=cfg.p)
    tab = _report_table(rep, cfg.p)
    asserts = {"linf_norm_spread_lt_10": float(rep.linf_norm.max() / rep.linf_norm.min()) < 10,
               "holder_rows": convlab.lp_interpolation_check(rep, cfg.p)}
    return tab, asserts


def exp_counterexample(cfg, e):
    s = float(cfg.datum.get("center") or 1.0)
    lim = convlab.k_integral_limit(e.space, s)
    tab = Table(["t", "s", "dirac_l1_gap", "k_integral_limit"])
    gaps = convlab.ordered_map(lambda t: convlab.dirac_l1_gap(e, s, t), cfg.t_grid)
    for t, g in zip(cfg.t_grid, gaps):
        tab.add(t, s, g, lim)
    return tab, {"last_within_5pct": abs(gaps[-1] / lim - 1) <= 0.05}


def exp_busemann(cfg, e):
    s = float(cfg.datum.get("center") or 1.0)
    th = np.linspace(0.0, math.pi, 13)
    rs = cfg.r if cfg.r is not None else [5.0, 10.0, 20.0]
    tab = Table(["r", "theta", "busemann", "limit", "gap"])
    worst = 0.0
    for r in rs:
        b = convlab.busemann(th, s, r)
        lim = convlab.busemann_limit(th, s)
        for a, bb, ll in zip(th, b, lim):
            tab.add(r, a, bb, ll, bb - ll)
        worst = float(np.max(np.abs(b - lim)))
    return tab, {"gap_lt_1e-3_at_largest_r": worst < 1e-3}


def exp_boundary(cfg, e):
    d = _datum(cfg)
    a = convlab.boundary_limit(e, d, "direct")
    b = convlab.boundary_limit(e, d, "translated")
    tab = Table(["center", "direct", "translated"])
    tab.add(d.center, a, b)
    if d.center == 0:
        return tab, {"radial_limit_zero": a <= 1e-9}
    return tab, {"positive": a > 1e-3, "routes_agree_5pct": abs(a / b - 1) <= 0.05}


def exp_dist_mass(cfg, e):
    tab = Table(["t", "htilde_mass"])
    for t in cfg.t_grid:
        tab.add(t, solvlab.htilde_total_mass(e, t))
    return tab, {"unit_mass": all(abs(r[1] - 1) <= 1e-6 for r in tab.rows)}


def exp_dist_concentration(cfg, e):
    spec = heatkern.ConcentrationSpec(cfg.eps_exponent)
    out = convlab.ordered_map(lambda t: solvlab.mass_outside_tilde(e, spec, t), cfg.t_grid)
    tab = Table(["t", "mass_outside_tilde"])
    for t, m in zip(cfg.t_grid, out):
        tab.add(t, m)
    return tab, {"decreasing": bool(np.all(np.diff(out) < 0))}


def exp_dist_sup(cfg, e):
    vals = [solvlab.sup_norm_htilde(e, t)[0] for t in cfg.t_grid]
    tab = Table(["t", "sup_norm_normalised"])
    for t, v in zip(cfg.t_grid, vals):
        tab.add(t, v)
    return tab, {"band_lt_5": max(vals) / min(vals) < 5}


def exp_dist_deviation(cfg, e):
    rep = solvlab.tilde_deviation_report(e, _datum(cfg), cfg.t_grid)
    spec = heatkern.ConcentrationSpec(cfg.eps_exponent)
    tab = Table(["t", "l1_dev_S", "linf_dev_S", "linf_norm_S", "mass_outside_tilde", "sup_norm_band"])
    for i, t in enumerate(rep.times):
        tab.add(t, rep.l1[i], rep.linf[i], rep.linf_norm[i], solvlab.mass_outside_tilde(e, spec, t),
                solvlab.sup_norm_htilde(e, t)[0])
    f1, finf = rep.final_fraction()
    return tab, {"l1_decreasing": bool(np.all(np.diff(rep.l1) < 0)),
                 "linf_norm_decreasing": bool(np.all(np.diff(rep.linf_norm) < 0)),
                 "l1_final_lt_10pct": f1 < 0.1, "linf_final_lt_10pct": finf < 0.1}


RUNNERS = {"kernel-eval": exp_kernel_eval, "concentration": exp_concentration, "thm12": exp_convergence,
           "rates": exp_rates, "counterexample": exp_counterexample, "busemann": exp_busemann,
           "boundary": exp_boundary, "distinguished-mass": exp_dist_mass,
           "distinguished-concentration": exp_dist_concentration, "distinguished-sup": exp_dist_sup,
           "distinguished-deviation": exp_dist_deviation}

NUMERIC_ERRORS = (heatkern.QuadratureError, convlab.CoverageError, ArithmeticError)


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def run(cfg: ExperimentConfig, stamp=False) -> int:
    cfg.validate()
    e = heatkern.HeatEngine(build_space(cfg.space))
    table, asserts = RUNNERS[cfg.experiment](cfg, e)
    header = {"config": cfg.public(), "engine": e.settings()}
    if stamp:
        header["stamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    _write(cfg.out, table.render(header))
    summary = {"experiment": cfg.experiment, "space": cfg.space,
               "assertions": {k: bool(v) for k, v in asserts.items()},
               "passed": all(asserts.values())}
    text = json.dumps(summary, sort_keys=True, indent=1) + "\n"
    if cfg.summary:
        _write(cfg.summary, text)
    else:
        sys.stderr.write(text)
    return EXIT_OK if summary["passed"] else EXIT_ASSERT


# ---------------------------------------------------------------------------

def cmd_space(args) -> int:
    sp = build_space(args.tag)
    e = heatkern.HeatEngine(sp)
    info = {"name": sp.name, "rank": sp.rank, "dimension": sp.n, "pseudo_dimension": sp.nu,
            "rho": sp.rho.tolist(), "rho_norm2": sp.rho_norm2, "weyl_order": sp.weyl_order,
            "roots": sp.datum.roots.tolist(), "multiplicities": sp.datum.mult.tolist(),
            "b_at_zero": harish.b_at_zero(sp), "c_meas": e.c_meas, "c0": e.c0}
    print(json.dumps(info, indent=1, sort_keys=True))
    return EXIT_OK


def cmd_run(args) -> int:
    datum = {"kind": "bump", "xi": args.xi, "center": args.center}
    cfg = ExperimentConfig(
        experiment=args.experiment, space=args.space, t_grid=parse_times(args.t),
        eps_exponent=args.eps_exponent, datum=datum, p=args.p,
        r=[float(x) for x in args.r.split(",")] if args.r else None,
        H=[float(x) for x in args.H.split(",")] if args.H else None,
        out=args.out, summary=args.summary)
    return run(cfg, stamp=args.stamp)


def cmd_check(args) -> int:
    results = acceptance.run_suite(args.suite, fast=args.fast)
    verdict = {"suite": args.suite, "fast": args.fast, "passed": all(c.passed for c in results),
               "criteria": [c.summary() for c in results]}
    text = json.dumps(verdict, indent=1, sort_keys=True) + "\n"
    if args.json:
        _write(args.json, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if verdict["passed"] else EXIT_ASSERT


def cmd_dump(args) -> int:
    sp = build_space(args.space)
    buf = io.StringIO()
    if args.table == "c":
        lams = np.linspace(args.lam_min, args.lam_max, args.n)
        harish.dump_table(sp, lams, buf)
    elif args.table == "phi":
        if sp.rank != 1:
            raise ConfigError("phi tables are rank one")
        jac = sp.jacobi()
        r = np.linspace(0.0, args.r_max, args.n)
        real_hyp = sp.datum.mult[0, 1] == 0
        buf.write("lam,r,phi,engine_tag,est_error\n")
        for lam in np.linspace(args.lam_min, args.lam_max, 5):
            vals = spherical.phi_rank1(jac, lam, r).real
            for ri, v in zip(r, vals):
                # difference to an independent evaluator
                if real_hyp:
                    ref = spherical.phi_integral_rank1(sp, lam, ri).real
                else:
                    ref = float(np.real(spherical.phi_hypergeometric(jac, lam, ri))) if ri <= 2 \
                        else float(spherical.phi_ode_rank1(jac, lam, ri))
                tag = "taylor" if ri < spherical.TAYLOR_R else ("hypergeometric" if ri <= 2 else "ode")
                buf.write(",".join([_fmt(lam), _fmt(ri), _fmt(v), tag, _fmt(abs(v - ref))]) + "\n")
    else:
        e = heatkern.HeatEngine(sp)
        t = parse_times(args.t)
        buf.write("t," + ",".join(f"H{i + 1}" for i in range(sp.rank)) + ",h_t,envelope_ratio\n")
        for ti in t:
            if sp.rank == 1:
                H = np.linspace(0.0, 2 * ti * float(sp.rho[0]) + 8 * math.sqrt(ti) + 2, args.n)[:, None]
            else:
                H = solvlab._chamber_grid(sp, ti, args.n, 7)
            lh = np.atleast_1d(e.log_kernel(ti, H))
            env = np.atleast_1d(heatkern.log_heat_envelope(e, ti, H))
            for Hi, a, b in zip(H, lh, env):
                buf.write(",".join(_fmt(x) for x in (ti, *Hi, math.exp(a), math.exp(a - b))) + "\n")
    _write(args.out, buf.getvalue())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="heatlab", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("space", help="describe a catalog space")
    s.add_argument("tag", help="Hr:n, Hc:n, Hq:n or A2c")
    s.set_defaults(func=cmd_space)

    r = sub.add_parser("run", help="run one experiment and write CSV")
    r.add_argument("experiment", choices=EXPERIMENTS)
    r.add_argument("--space", required=True)
    r.add_argument("--t", default="10:160:dyadic", help="'1', '1,2,5', 'a:b:dyadic' or 'a:b:n'")
    r.add_argument("--r", help="comma separated radii (rank one)")
    r.add_argument("--H", help="comma separated chamber coordinates, pairs for rank two")
    r.add_argument("--xi", type=float, default=1.0, help="bump radius")
    r.add_argument("--center", type=float, default=0.0, help="distance of the bump centre from the origin")
    r.add_argument("--p", type=float, default=3.0, help="exponent for the Lp deviation")
    r.add_argument("--eps-exponent", type=float, default=0.25, help="eps(t) = t^-a")
    r.add_argument("--out", help="CSV path (default stdout)")
    r.add_argument("--summary", help="summary JSON path (default stderr)")
    r.add_argument("--stamp", action="store_true", help="add a timestamp to the CSV header")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("check", help="run acceptance criteria")
    c.add_argument("suite", choices=sorted(acceptance.SUITES))
    c.add_argument("--fast", action="store_true", help="determinism on a subset of criteria")
    c.add_argument("--json", help="verdict JSON path (default stdout)")
    c.set_defaults(func=cmd_check)

    d = sub.add_parser("dump", help="write c-function, phi or kernel tables")
    d.add_argument("table", choices=("c", "phi", "kernel"))
    d.add_argument("--space", required=True)
    d.add_argument("--lam-min", type=float, default=0.1)
    d.add_argument("--lam-max", type=float, default=10.0)
    d.add_argument("--r-max", type=float, default=10.0)
    d.add_argument("--t", default="1")
    d.add_argument("--n", type=int, default=50)
    d.add_argument("--out")
    d.set_defaults(func=cmd_dump)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NUMERIC_ERRORS as exc:
        print(f"heatlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"heatlab: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
