"""Experiment configuration, suite drivers and the ``confscat`` command line.

Usage::

    confscat <suite> --config <path> [--out <dir>] [--seed <u64>]

Exit status is 0 when every audit of the suite passes, 1 when any audit
fails and 2 for configuration errors (including unknown suites).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .characteristic import (
    GlueError,
    LambdaSchedule,
    PatchPiece,
    convergence_report,
    glue,
    lattice_evolve,
    picard_data,
    solve_hoermander,
    solve_picard,
    write_report_csv,
)
from .energy import (
    cone_vs_slice_equivalence,
    energy_continuity_probe,
    groenwall_audit,
    slice_energy_curve,
    write_energy_audit,
)
from .evolution import (
    ConfigError,
    EvolutionConfig,
    SolutionHistory,
    conformal_identity_residual,
    evolve,
    frame_diagnostics,
    relative_drift,
)
from .fields import CauchyData, Grid1D, ScalarFieldGrid, write_snapshot
from .geometry import (
    LEMMA_INEQUALITIES,
    cylinder_foliation,
    einstein_cylinder_metric,
    lemma_audit,
    minkowski_compactification,
    minkowski_metric,
    schwarzschild_rescaled_pair,
    scri_plus,
    smallest_admissible_u0,
)
from .oracles import cylinder_grid, cylinder_mode
from .scattering import (
    bump_profile,
    fit_loglog_slope,
    lipschitz_sample,
    round_trip_error,
    scattering_map,
    scattering_operator,
    write_scattering_report,
)

SUITES = ("cauchy", "hoermander", "picard", "glue", "scatter", "energy-audit", "lemma-audit", "convergence")
MODELS = ("cylinder", "schwarzschild_patch")
MIN_N = 64
SECTIONS = {
    "run": {"model": str, "n": int, "cfl": float, "amplitude": float, "seed": int},
    "schedule": {"length": int},
    "picard": {"m": float, "eps": float, "amplitude": float, "n_u": int, "n_r": int, "n_max": int, "tol_abs": float},
    "lemma": {"m": float, "eps": float, "samples": int, "u_max": float},
    "scatter": {"amplitudes": "floats", "lip_pairs": int, "lip_radius": float},
    "tolerances": None,  # every key is a positive float
}


# -- configuration ------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "cylinder"
    n: int = 400
    cfl: float = 0.25
    amplitude: float = 0.1
    seed: int = 0
    schedule_length: int = 7
    picard: dict = field(default_factory=dict)
    lemma: dict = field(default_factory=dict)
    scatter: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    out: str = "confscat_out"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}")
        if self.n < MIN_N:
            raise ConfigError(f"resolution n={self.n} below {MIN_N}")
        if not 0 < self.cfl < 1:
            raise ConfigError("cfl must lie in (0, 1)")
        if self.amplitude < 0:
            raise ConfigError("amplitude must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.schedule_length < 1:
            raise ConfigError("schedule length must be at least 1")
        bad = [k for k, v in self.tolerances.items() if not v > 0]
        if bad:
            raise ConfigError(f"tolerances must be positive: {', '.join(bad)}")

    @property
    def h(self):
        return np.pi / self.n

    def tol(self, key):
        try:
            return self.tolerances[key]
        except KeyError:
            raise ConfigError(f"missing tolerance '{key}'") from None

    def schedule(self):
        return LambdaSchedule.geometric(self.schedule_length - 1)


def _parse(section, key, raw):
    kind = SECTIONS[section]
    if kind is None:
        conv = float
    elif key not in kind:
        raise ConfigError(f"unknown key '{key}' in [{section}]")
    else:
        conv = kind[key]
    try:
        if conv == "floats":
            return tuple(float(x) for x in raw.split(",") if x.strip())
        if conv is int:
            return int(float(raw)) if "e" in raw.lower() else int(raw)
        return conv(raw)
    except ValueError:
        raise ConfigError(f"bad value for {section}.{key}: {raw!r}") from None


def default_config_text() -> str:
    return resources.files("confscat").joinpath("defaults.ini").read_text()


def load_config(path=None, out=None, seed=None) -> ExperimentConfig:
    """Defaults file first, then ``path`` on top; CLI overrides last."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.read_string(default_config_text())
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {p} not found")
        try:
            cp.read_string(p.read_text(), source=str(p))
        except configparser.Error as e:
            raise ConfigError(f"cannot parse {p}: {e}") from None
    vals = {}
    for sec in cp.sections():
        if sec not in SECTIONS:
            raise ConfigError(f"unknown section [{sec}]")
        vals[sec] = {k: _parse(sec, k, v) for k, v in cp.items(sec)}
    run = vals["run"]
    kw = dict(
        model=run["model"],
        n=run["n"],
        cfl=run["cfl"],
        amplitude=run["amplitude"],
        seed=run["seed"] if seed is None else seed,
        schedule_length=vals["schedule"]["length"],
        picard=vals["picard"],
        lemma=vals["lemma"],
        scatter=vals["scatter"],
        tolerances=vals["tolerances"],
    )
    if out is not None:
        kw["out"] = str(out)
    return ExperimentConfig(**kw)


# -- run bookkeeping ----------------------------------------------------------------

@dataclass
class Audit:
    name: str
    passed: bool
    value: float
    bound: str
    detail: str = ""

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: value={self.value:.6g} bound={self.bound}" + (f" ({self.detail})" if self.detail else "")


class RunWriter:
    """The single writer of a run directory."""

    def __init__(self, out):
        self.root = Path(out)
        self.root.mkdir(parents=True, exist_ok=True)
        self.files = []

    def path(self, name):
        p = self.root / name
        self.files.append(name)
        return p

    def rows(self, name, header, rows):
        with open(self.path(name), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in rows:
                w.writerow([x if isinstance(x, (str, int)) else repr(float(x)) for x in r])

    def snapshot(self, name, f: ScalarFieldGrid):
        write_snapshot(self.path(name), f)

    def summary(self, suite, cfg, audits):
        ok = all(a.passed for a in audits)
        lines = [f"suite {suite} model={cfg.model} n={cfg.n} seed={cfg.seed}"]
        lines += [a.line() for a in audits]
        lines.append(f"RESULT {'PASS' if ok else 'FAIL'}")
        (self.root / "summary.txt").write_text("\n".join(lines) + "\n")


def _cyl(T_range=(-np.pi, np.pi)):
    return einstein_cylinder_metric(T_range=T_range)


def sigma0_bump(grid: Grid1D, amplitude, center=1.2, width=0.9) -> CauchyData:
    """Time-symmetric reduced data with a polynomial bump profile."""
    chi = grid.nodes
    z = (chi - center) / width
    psi = np.where(np.abs(z) < 1, amplitude * (1 - z**2) ** 6, 0.0) * np.sin(chi)
    psi[0] = psi[-1] = 0.0
    return CauchyData.from_arrays(grid, psi, np.zeros_like(chi), 0.0)


# -- suites -------------------------------------------------------------------------

def mode_error(n_mode, n_cells, cfl=0.25, T=np.pi / 2, sup=False):
    """Error of a linear cylinder mode at ``T``; with ``sup`` the max over ``[0, T]``."""
    g = _cyl((0.0, np.pi))
    o = cylinder_mode(n_mode)
    hist = evolve(g, o.cauchy_data(0.0, n_cells), EvolutionConfig(t_end=T, cfl=cfl, nonlinearity="linear"))
    chi = hist.grid.nodes
    if sup:
        exact = o.psi(hist.stamps[:, None], chi[None, :])
        return float(np.max(np.abs(hist.positions - exact)))
    return float(np.max(np.abs(hist.positions[-1] - o.psi(T, chi))))


def suite_cauchy(cfg: ExperimentConfig, w: RunWriter):
    audits = []
    h2 = cfg.h**2
    for k in range(4):
        err = mode_error(k, cfg.n, cfg.cfl)
        audits.append(Audit(f"mode_{k}_error", err <= cfg.tol("mode_err") * h2, err, f"{cfg.tol('mode_err')}*h^2"))
    g = _cyl((0.0, np.pi))
    d = sigma0_bump(cylinder_grid(cfg.n), cfg.amplitude)
    hist = evolve(g, d, EvolutionConfig(t_end=np.pi, cfl=cfg.cfl))
    diag = frame_diagnostics(hist)
    drift = relative_drift(diag["E_full"])
    audits.append(Audit("energy_drift", drift <= cfg.tol("drift"), drift, repr(cfg.tol("drift"))))
    keys = ("stamp", "E_lin", "E_full", "L2", "H1", "max_abs")
    w.rows("cauchy_diagnostics.csv", keys, zip(*(diag[k] for k in keys)))
    w.snapshot("cauchy_final.field", hist.final.position)
    return audits


def trace_constant(run, lam_max):
    h = run.h
    return run.trace_check / (h + (1 - lam_max))


def suite_hoermander(cfg: ExperimentConfig, w: RunWriter):
    sched = cfg.schedule()
    g = _cyl()
    ecfg = EvolutionConfig(t_end=0.0, cfl=cfg.cfl)
    runs = []
    for n in (cfg.n, 2 * cfg.n):
        theta = bump_profile(cfg.amplitude, n).characteristic()
        runs.append(solve_hoermander(g, scri_plus(), theta, sched, ecfg, tol_rel=cfg.tol("tol_rel")))
    run = runs[0]
    d = np.asarray(run.differences)
    strict = bool(np.all(d == 0) or np.all(np.diff(d) < 0))
    audits = [Audit("differences_strictly_decrease", strict, float(d[-1]) if d.size else 0.0, "monotone")]
    c = [trace_constant(r, sched.values[-1]) for r in runs]
    growth = c[1] / c[0] if c[0] > 0 else (0.0 if c[1] == 0 else np.inf)
    audits.append(
        Audit("trace_constant_stable", growth <= cfg.tol("trace_c_growth"), growth,
              f"<= {cfg.tol('trace_c_growth')}", f"C_h={c[0]:.4g}, C_h/2={c[1]:.4g}")
    )
    run.write_csv(w.path("hoermander.csv"))
    write_report_csv(convergence_report(run), w.path("convergence_report.csv"))
    w.snapshot("hoermander_sigma0.field", run.extrapolated.position)
    return audits


def picard_setup(m, eps, amplitude, lemma_eps=0.1, n_u=400, n_r=80, samples=200):
    u0 = smallest_admissible_u0(m, lemma_eps, n=samples)
    if u0 is None:
        raise ConfigError("no admissible u0 for the Picard patch")
    pair = schwarzschild_rescaled_pair(m, u0)
    ts, tS = picard_data(m, u0, eps, amplitude, n_u, n_r)
    return pair, ts, tS, u0


def suite_picard(cfg: ExperimentConfig, w: RunWriter):
    p = cfg.picard
    pair, ts, tS, u0 = picard_setup(p["m"], p["eps"], p["amplitude"], cfg.lemma["eps"], p["n_u"], p["n_r"])
    run = solve_picard(pair, ts, tS, p["eps"], n_max=p["n_max"], tol_abs=p["tol_abs"])
    audits = [
        Audit("no_divergence", run.diverged_at is None, float(run.diverged_at or 0), "none", run.report),
        Audit("converged", run.converged, float(run.diff_energies[-1]) if run.diff_energies else 0.0,
              repr(p["tol_abs"])),
    ]
    if run.diverged_at is None:
        rat = run.log_ratios()
        tail = rat[1:] if rat.size > 1 else rat
        ok = tail.size > 0 and bool(np.min(tail) >= cfg.tol("super_geometric"))
        audits.append(Audit("super_geometric", ok, float(np.min(tail)) if tail.size else float("nan"),
                            f">= {cfg.tol('super_geometric')}", "log ratios " + ", ".join(f"{r:.3f}" for r in rat)))
    run.write_csv(w.path("picard.csv"))
    write_report_csv(convergence_report(run), w.path("picard_report.csv"))
    return audits


def glue_experiment(n, amplitude=0.1, t0=1.0, span=0.5, band=(2.0, 2.4), tol_glue=1e-4, cfl=0.25):
    """Monolithic leapfrog versus timelike piece + lattice piece glued at an interface.

    Returns the final-frame L-infinity difference and the interface gap.
    """
    g = _cyl()
    grid = cylinder_grid(n)
    h = grid.spacing
    chi = grid.nodes
    ti = t0 - round(span / h) * h
    a = amplitude / 0.1
    psi = 0.3 * a * np.sin(chi) * np.exp(-3 * (chi - 1.5) ** 2)
    vel = 0.2 * a * np.sin(2 * chi) * np.exp(-2 * (chi - 1.2) ** 2)
    d = CauchyData.from_arrays(grid, psi, vel, t0)
    mono = evolve(g, d, EvolutionConfig(t_end=0.0, t0=t0, cfl=cfl))
    timelike = evolve(g, d, EvolutionConfig(t_end=ti, t0=t0, cfl=cfl))
    patch = lattice_evolve(g, d, ti)
    out = glue(PatchPiece(timelike.final, 0.0, band[1], "timelike"), PatchPiece(patch.final, band[0], np.pi),
               ti, target=0.0, g=g, cfg=EvolutionConfig(t_end=0.0, t0=ti, cfl=cfl), tol_glue=tol_glue, band=band)
    err = float(np.max(np.abs(out.final.position.values - mono.final.position.values)))
    gap = float(np.max(np.abs(timelike.final.position.values - patch.final.position.values)))
    return err, gap, out


def suite_glue(cfg: ExperimentConfig, w: RunWriter):
    try:
        err, gap, out = glue_experiment(cfg.n, cfg.amplitude, tol_glue=cfg.tol("tol_glue"), cfl=cfg.cfl)
    except GlueError as e:
        w.rows("glue.csv", ("n", "final_linf_diff", "interface_gap"), [(cfg.n, float("nan"), e.discrepancy)])
        return [Audit("interface_match", False, e.discrepancy, f"<= tol_glue={cfg.tol('tol_glue')}", str(e))]
    bound = cfg.tol("glue_err") * cfg.h**2
    w.rows("glue.csv", ("n", "final_linf_diff", "interface_gap"), [(cfg.n, err, gap)])
    w.snapshot("glue_final.field", out.final.position)
    return [Audit("glue_vs_monolithic", err <= bound, err, f"{cfg.tol('glue_err')}*h^2={bound:.3g}")]


def suite_scatter(cfg: ExperimentConfig, w: RunWriter):
    sched = cfg.schedule()
    s = cfg.scatter
    amps = s["amplitudes"]
    rows, devs, audits = [], [], []
    ref_out = None
    for a in amps:
        rep = scattering_map(bump_profile(a, cfg.n, "scri_minus"), True, sched, with_linear=False)
        rt = round_trip_error(bump_profile(a, cfg.n, "scri_plus"), True, sched)
        devs.append(rep.linear_reference_deviation)
        bound = cfg.tol("lin_dev") + cfg.tol("c_scatter") * a * a
        audits.append(Audit(f"linear_limit_a={a:g}", rep.linear_reference_deviation <= bound,
                            rep.linear_reference_deviation, f"{bound:.4g}"))
        rows.append({"case": "bump", "amplitude": a, "h": cfg.h, "lambda_max": sched.values[-1],
                     "rt_error": rt, "lin_dev": rep.linear_reference_deviation, "lip_min": "", "lip_max": ""})
        if ref_out is None or a == cfg.amplitude:
            ref_out = rep.output
    rt_ref = round_trip_error(bump_profile(cfg.amplitude, cfg.n, "scri_plus"), True, sched)
    audits.append(Audit("round_trip", rt_ref <= cfg.tol("rt"), rt_ref, repr(cfg.tol("rt"))))
    if len(amps) >= 2 and all(d > 0 for d in devs):
        slope = fit_loglog_slope(amps, devs)
        audits.append(Audit("deviation_slope", abs(slope - 2) <= cfg.tol("slope"), slope, f"2 +- {cfg.tol('slope')}"))
    center = bump_profile(0.0, cfg.n, "scri_minus")
    stats = lipschitz_sample(lambda th: scattering_operator(th, True, sched), center, s["lip_radius"],
                             s["lip_pairs"], cfg.seed)
    audits.append(Audit("lipschitz_min", stats["min"] >= cfg.tol("lip_min"), stats["min"], f">= {cfg.tol('lip_min')}"))
    audits.append(Audit("lipschitz_max", stats["max"] <= cfg.tol("lip_max"), stats["max"], f"<= {cfg.tol('lip_max')}"))
    rows.append({"case": "lipschitz", "amplitude": s["lip_radius"], "h": cfg.h, "lambda_max": sched.values[-1],
                 "rt_error": "", "lin_dev": "", "lip_min": stats["min"], "lip_max": stats["max"]})
    write_scattering_report(rows, w.path("scattering_report.csv"))
    w.snapshot("scatter_output.field", ScalarFieldGrid(ref_out.grid, ref_out.values, 0.0))
    return audits


def equivalence_constants(n, amplitude, cfl=0.25):
    g = _cyl((0.0, np.pi))
    hist = evolve(g, sigma0_bump(cylinder_grid(n), amplitude), EvolutionConfig(t_end=np.pi, cfl=cfl))
    lo, hi = cone_vs_slice_equivalence(hist, scri_plus(), cylinder_foliation(g))
    return lo, hi, hist


def suite_energy(cfg: ExperimentConfig, w: RunWriter):
    rows, consts = [], []
    if cfg.amplitude == 0:
        return [Audit("equivalence_refinement", True, 0.0, "n/a", "zero solution: ratios undefined")]
    for n in (cfg.n // 2, cfg.n):
        lo, hi, hist = equivalence_constants(n, cfg.amplitude, cfg.cfl)
        consts.append((lo, hi))
        curve = slice_energy_curve(hist)
        cg = groenwall_audit(curve)
        probe = energy_continuity_probe(hist)
        rows += [
            ("equivalence_low", "amplitude", cfg.amplitude, lo, n),
            ("equivalence_high", "amplitude", cfg.amplitude, hi, n),
            ("groenwall", "amplitude", cfg.amplitude, cg, n),
            ("continuity", "amplitude", cfg.amplitude, probe["fitted_C"], n),
        ]
    write_energy_audit(rows, w.path("energy_audit.csv"))
    (lo0, hi0), (lo1, hi1) = consts
    var = max(abs(lo1 - lo0) / lo1, abs(hi1 - hi0) / hi1)
    return [
        Audit("equivalence_positive", lo1 > 0 and np.isfinite(hi1), lo1, "> 0, finite", f"c_high={hi1:.4g}"),
        Audit("equivalence_refinement", var <= cfg.tol("equivalence"), var, f"<= {cfg.tol('equivalence')}"),
    ]


def suite_lemma(cfg: ExperimentConfig, w: RunWriter):
    L = cfg.lemma
    u0 = smallest_admissible_u0(L["m"], L["eps"], n=L["samples"], u_max=L["u_max"])
    if u0 is None:
        w.rows("lemma.csv", ("check", "margin"), [])
        return [Audit("admissible_u0_exists", False, float("nan"), f"|u0| <= {L['u_max']:g}")]
    rep = lemma_audit(L["m"], u0, L["eps"], n=L["samples"], bisect=False)
    rows = [(k, rep.margins[k]) for k in LEMMA_INEQUALITIES] + [("morawetz_timelike", rep.morawetz_margin), ("u0", u0)]
    w.rows("lemma.csv", ("check", "margin"), rows)
    audits = [Audit("admissible_u0_exists", abs(u0) <= L["u_max"], u0, f"|u0| <= {L['u_max']:g}")]
    audits += [Audit(f"inequality {k}", rep.margins[k] > 0, rep.margins[k], "> 0") for k in LEMMA_INEQUALITIES]
    audits.append(Audit("morawetz_timelike", rep.morawetz_margin > 0, rep.morawetz_margin, "> 0"))
    return audits


def conformal_residuals(n_values, r_max=10.0, amplitude=0.5, t_end=2.0, perturb=1.1, cfl=0.25):
    """Conformal-identity residuals of a physical cubic solution and of a scaled non-solution."""
    pair = minkowski_compactification(r_max=r_max)
    g = minkowski_metric(r_max=r_max, t_range=(0.0, t_end + 1.0))
    good, bad = [], []
    for n in n_values:
        grid = Grid1D.uniform("r", 0.0, r_max, n, ("dirichlet_zero", "dirichlet_zero"))
        z = (grid.nodes - 1.2) / 0.8
        xi = np.where(np.abs(z) < 1, amplitude * (1 - z**2) ** 8, 0.0)
        hist = evolve(g, CauchyData.from_arrays(grid, xi, np.zeros_like(xi)), EvolutionConfig(t_end=t_end, cfl=cfl))
        fake = SolutionHistory(hist.grid, hist.metric, hist.config, hist.stamps, perturb * hist.positions,
                               hist.velocities, hist.dt)
        good.append(conformal_identity_residual(pair, hist))
        bad.append(conformal_identity_residual(pair, fake))
    return good, bad


def suite_convergence(cfg: ExperimentConfig, w: RunWriter):
    ns = (cfg.n // 4, cfg.n // 2, cfg.n)
    rows, audits = [], []
    for k in range(4):
        # phase error vanishes to first order where sin(kT) = 0, so the
        # order is read off the error over the whole interval
        errs = [mode_error(k, n, cfg.cfl, sup=True) for n in ns]
        order = float(np.log2(errs[-2] / errs[-1]))
        rows += [(f"mode_{k}_sup_error", n, e) for n, e in zip(ns, errs)] + [(f"mode_{k}_order", ns[-1], order)]
        audits.append(Audit(f"mode_{k}_order", abs(order - 2) <= cfg.tol("mode_order"), order,
                            f"2 +- {cfg.tol('mode_order')}"))
    pn = (cfg.n, 2 * cfg.n, 4 * cfg.n)
    good, bad = conformal_residuals(pn, cfl=cfg.cfl)
    order = float(np.log2(good[-2] / good[-1]))
    bad_order = float(np.log2(bad[-2] / bad[-1]))
    rows += [("conformal_residual", n, r) for n, r in zip(pn, good)]
    rows += [("control_residual", n, r) for n, r in zip(pn, bad)]
    audits.append(Audit("conformal_order", abs(order - 2) <= cfg.tol("conformal_order"), order,
                        f"2 +- {cfg.tol('conformal_order')}"))
    audits.append(Audit("control_not_converging", bad_order < 1.0, bad_order, "< 1",
                        f"finest control residual {bad[-1]:.3g}"))
    w.rows("convergence.csv", ("quantity", "resolution", "value"), rows)
    return audits


DRIVERS = {
    "cauchy": suite_cauchy,
    "hoermander": suite_hoermander,
    "picard": suite_picard,
    "glue": suite_glue,
    "scatter": suite_scatter,
    "energy-audit": suite_energy,
    "lemma-audit": suite_lemma,
    "convergence": suite_convergence,
}


def run_experiment(cfg: ExperimentConfig, suite: str, out: Optional[str] = None):
    """Run one suite; returns ``(exit_status, audits)``."""
    if suite not in DRIVERS:
        return 2, []
    w = RunWriter(out or cfg.out)
    try:
        audits = DRIVERS[suite](cfg, w)
    except ConfigError as e:
        (w.root / "summary.txt").write_text(f"suite {suite}\nCONFIG ERROR {e}\n")
        return 2, []
    w.summary(suite, cfg, audits)
    return (0 if all(a.passed for a in audits) else 1), audits


def _seed(raw):
    v = int(raw)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="confscat", description="Run one verification suite.")
    ap.add_argument("suite", help="one of: " + ", ".join(SUITES))
    ap.add_argument("--config", required=True, help="INI file layered over the built-in defaults")
    ap.add_argument("--out", default=None, help="output directory")
    ap.add_argument("--seed", type=_seed, default=None, help="RNG seed (u64)")
    args = ap.parse_args(argv)
    if args.suite not in DRIVERS:
        print(f"unknown suite '{args.suite}'", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config, args.out, args.seed)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    code, audits = run_experiment(cfg, args.suite)
    for a in audits:
        print(a.line())
    print(f"{args.suite}: {'PASS' if code == 0 else 'FAIL' if code == 1 else 'CONFIG ERROR'}")
    return code


if __name__ == "__main__":
    sys.exit(main())
