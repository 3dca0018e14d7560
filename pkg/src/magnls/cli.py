"""Command-line experiment runner.

Every subcommand reads one INI config, materializes the operator, runs its
pipeline, and writes artifacts plus a ``manifest.json`` into the output
directory.  Exit status: 0 when all property gates pass, 1 when a gate
fails, 2 when the numerics or the configuration break.  All randomness is
drawn from output.seed, and CSV files are written with '\\n' line endings
and 17-significant-digit floats so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import platform
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .analysis import (NormConfig, norm_equivalence_check,
                       resolvent_bound_scan, strichartz_ratio)
from .bound_states import BoundStateFamily, decay_fit
from .config import ExperimentConfig, parse_config
from .errors import (ConfigError, InsufficientDecayWindow, MagnlsError,
                     NoBoundStateError)
from .evolution import EvolveConfig, evolve
from .grid import (ComplexField, GridSpec, make_field, norm_l2, read_field,
                   write_field)
from .hamiltonian import (HamiltonianSpec, build_hamiltonian,
                          project_continuous)
from .modulation import gauge_adjusted_variation, track
from .norms import norm_h1
from .potentials import (PotentialPair, build_gauge_field,
                         build_gaussian_well, build_localized_loop_field,
                         gaussian_bump, make_potential_pair, validate)
from .spectrum import EigenPair, ground_state

SUBCOMMANDS = (
    "validate-potentials", "ground-state", "bound-state", "bound-family",
    "evolve", "linear-evolve", "stability-run", "resolvent-scan",
    "norm-equivalence", "strichartz-ratio",
)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


class RunContext:
    """Collects outputs, gates, stages, and warnings for one run."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.outputs: list[str] = []
        self.stages: list[dict] = []
        self.gates: dict[str, dict] = {}
        self.warnings: list[str] = []

    def csv(self, name: str, header: list[str], rows: list[list]) -> None:
        lines = [",".join(header)]
        for row in rows:
            if len(row) != len(header):
                raise MagnlsError(f"{name}: row width {len(row)} != header "
                                  f"width {len(header)}")
            lines.append(",".join(_fmt(x) for x in row))
        path = self.out_dir / name
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        self.outputs.append(name)

    def field(self, name: str, f: ComplexField) -> None:
        write_field(self.out_dir / name, f)
        self.outputs.append(name)

    def json(self, name: str, obj) -> None:
        path = self.out_dir / name
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")
        self.outputs.append(name)

    def gate(self, name: str, value: float, threshold: str,
             passed: bool) -> None:
        self.gates[name] = {"value": float(value), "threshold": threshold,
                            "passed": bool(passed)}

    def stage(self, name: str, status: str, detail: str = "") -> None:
        self.stages.append({"name": name, "status": status, "detail": detail})

    def warn(self, text: str) -> None:
        self.warnings.append(text)

    @property
    def all_gates_pass(self) -> bool:
        return all(g["passed"] for g in self.gates.values())


# ---------------------------------------------------------------------------
# materialization

def _grid_from(cfg: ExperimentConfig) -> GridSpec:
    return GridSpec(cfg.grid.dim, cfg.grid.sizes, cfg.grid.lengths)


def _potentials_from(cfg: ExperimentConfig, g: GridSpec) -> PotentialPair:
    p = cfg.potential
    if p.kind == "gaussian_well":
        return build_gaussian_well(g, p.depth, p.width,
                                   decay_eps=p.decay_eps,
                                   lq_exponent=p.lq_exponent)
    if p.kind == "gauge":
        chi = gaussian_bump(g, p.chi_amplitude, p.chi_width)
        well = build_gaussian_well(g, p.depth, p.width,
                                   decay_eps=p.decay_eps,
                                   lq_exponent=p.lq_exponent)
        return make_potential_pair(build_gauge_field(chi), well.v,
                                   decay_eps=p.decay_eps,
                                   lq_exponent=p.lq_exponent)
    if p.kind == "loop":
        a = build_localized_loop_field(g, p.loop_amplitude, p.loop_radius,
                                       p.loop_width)
        well = build_gaussian_well(g, p.depth, p.width,
                                   decay_eps=p.decay_eps,
                                   lq_exponent=p.lq_exponent)
        return make_potential_pair(a, well.v, decay_eps=p.decay_eps,
                                   lq_exponent=p.lq_exponent)
    # kind == "file"
    v = read_field(p.v_file)
    if v.grid != g:
        raise ConfigError(
            f"potential.v_file grid {v.grid.sizes} does not match config "
            f"grid {g.sizes}")
    if p.a_files:
        if len(p.a_files) != g.dim:
            raise ConfigError(
                f"potential.a_files needs {g.dim} entries, got {len(p.a_files)}")
        comps = []
        for name in p.a_files:
            c = read_field(name)
            if c.grid != g:
                raise ConfigError(f"potential.a_files entry {name} is on a "
                                  "different grid")
            comps.append(c)
        from .grid import VectorField
        a = VectorField(tuple(comps))
    else:
        from .grid import zero_vector_field
        a = zero_vector_field(g)
    return make_potential_pair(a, v, decay_eps=p.decay_eps,
                               lq_exponent=p.lq_exponent)


def _spec_from(cfg: ExperimentConfig) -> HamiltonianSpec:
    return build_hamiltonian(_potentials_from(cfg, _grid_from(cfg)))


def _eigenpair(cfg: ExperimentConfig, spec: HamiltonianSpec) -> EigenPair:
    return ground_state(spec, max_iter=cfg.solver.max_iter)


def _initial_state(cfg: ExperimentConfig, spec: HamiltonianSpec,
                   eig: EigenPair, family: BoundStateFamily) -> ComplexField:
    e = cfg.evolution
    g = spec.grid
    z = cfg.nonlinearity.z
    if e.initial == "bound_state":
        return family.solve(z).field
    if e.initial == "ground_state":
        return make_field(g, z * eig.phi0.values)
    if e.initial == "gaussian":
        return gaussian_bump(g, e.init_amplitude, e.init_width)
    f = read_field(e.init_file)
    if f.grid != g:
        raise ConfigError("evolution.init_file is on a different grid")
    return f


# ---------------------------------------------------------------------------
# subcommands

def _run_validate_potentials(cfg: ExperimentConfig, ctx: RunContext) -> None:
    g = _grid_from(cfg)
    pot = _potentials_from(cfg, g)
    report = validate(pot)
    ctx.json("validation.json", {
        "statuses": report.statuses,
        "alpha_a": report.alpha_a, "alpha_v": report.alpha_v,
        "radii": list(report.radii),
        "tail_a": list(report.tail_a),
        "tail_v_minus": list(report.tail_v_minus),
        "notes": list(report.notes),
    })
    for note in report.notes:
        ctx.warn(note)
    failed = [k for k, s in report.statuses.items() if s == "fail"]
    ctx.gate("potential_checks", float(len(failed)), "no failed checks",
             report.ok)
    ctx.stage("validate", "ok" if report.ok else "gate-failed",
              ",".join(failed))


def _run_ground_state(cfg: ExperimentConfig, ctx: RunContext) -> None:
    spec = _spec_from(cfg)
    eig = _eigenpair(cfg, spec)
    ctx.field("phi0.fld", eig.phi0)
    ctx.json("ground_state.json", {
        "e0": eig.e0, "residual": eig.residual, "gap": eig.gap,
        "k_shift": spec.k_shift,
    })
    ctx.gate("eigen_residual", eig.residual, "<= 1e-9", eig.residual <= 1e-9)
    ctx.gate("bound_below", eig.e0, "< 0", eig.e0 < 0.0)
    ctx.stage("ground-state", "ok", f"e0={eig.e0:.12g}")


def _run_bound_state(cfg: ExperimentConfig, ctx: RunContext) -> None:
    spec = _spec_from(cfg)
    eig = _eigenpair(cfg, spec)
    family = BoundStateFamily(spec, eig, cfg.nonlinearity.sign,
                              max_iter=cfg.solver.max_iter)
    state = family.solve(cfg.nonlinearity.z)
    ctx.field("bound_state.fld", state.field)
    ctx.json("bound_state.json", {
        "z_re": state.z.real, "z_im": state.z.imag,
        "e_prime": state.e_prime, "energy": state.energy,
        "residual": state.residual, "iterations": state.iterations,
        "sign": state.sign,
    })
    ctx.gate("eigen_problem_residual", state.residual, "<= 1e-9",
             state.residual <= 1e-9)
    ctx.stage("bound-state", "ok",
              f"|z|={abs(state.z):.6g} E={state.energy:.12g}")


def _run_bound_family(cfg: ExperimentConfig, ctx: RunContext) -> None:
    spec = _spec_from(cfg)
    eig = _eigenpair(cfg, spec)
    family = BoundStateFamily(spec, eig, cfg.nonlinearity.sign,
                              max_iter=cfg.solver.max_iter)
    rows = []
    h2s, eps_, betas = [], [], []
    worst_resid = 0.0
    from .norms import norm_h2
    for zv in cfg.nonlinearity.z_sweep:
        state = family.solve(zv)
        worst_resid = max(worst_resid, state.residual)
        q_h2 = norm_h2(state.correction)
        try:
            fit = decay_fit(state.field)
            beta, r2 = fit.beta, fit.r_squared
        except InsufficientDecayWindow as exc:
            beta, r2 = float("nan"), float("nan")
            ctx.warn(f"decay fit skipped at z={zv}: {exc}")
        rows.append([zv, 0.0, state.energy, state.e_prime, q_h2,
                     state.residual, state.iterations, beta, r2])
        h2s.append(q_h2)
        eps_.append(abs(state.e_prime))
        if math.isfinite(beta):
            betas.append((beta, r2))
    ctx.csv("family.csv",
            ["z_re", "z_im", "energy", "e_prime", "q_h2", "residual",
             "iterations", "decay_beta", "decay_r2"], rows)
    xs = np.log(np.asarray(cfg.nonlinearity.z_sweep))
    slope_q = float(np.polyfit(xs, np.log(np.maximum(h2s, 1e-300)), 1)[0])
    slope_e = float(np.polyfit(xs, np.log(np.maximum(eps_, 1e-300)), 1)[0])
    ctx.json("family.json", {
        "slope_q_h2": slope_q, "slope_e_prime": slope_e,
        "max_residual": worst_resid,
        "decay": [{"beta": b, "r_squared": r} for b, r in betas],
    })
    ctx.gate("slope_q_h2", slope_q, "3 +- 0.3", abs(slope_q - 3.0) <= 0.3)
    ctx.gate("slope_e_prime", slope_e, "2 +- 0.3", abs(slope_e - 2.0) <= 0.3)
    ctx.gate("family_residuals", worst_resid, "<= 1e-9", worst_resid <= 1e-9)
    if betas:
        worst_beta = min(b for b, _ in betas)
        worst_r2 = min(r for _, r in betas)
        ctx.gate("decay_beta_positive", worst_beta, "> 0", worst_beta > 0.0)
        ctx.gate("decay_fit_quality", worst_r2, ">= 0.98", worst_r2 >= 0.98)
    ctx.stage("bound-family", "ok",
              f"slopes q={slope_q:.3f} e'={slope_e:.3f}")


def _evolve_common(cfg: ExperimentConfig, ctx: RunContext, sign: int,
                   label: str) -> None:
    spec = _spec_from(cfg)
    eig = _eigenpair(cfg, spec)
    family = BoundStateFamily(spec, eig, cfg.nonlinearity.sign,
                              max_iter=cfg.solver.max_iter)
    psi0 = _initial_state(cfg, spec, eig, family)
    e = cfg.evolution
    traj = evolve(spec, psi0, EvolveConfig(
        dt=e.dt, t_final=e.t_final, snapshot_stride=e.snapshot_stride,
        conserve_tol=e.conserve_tol), sign, max_iter=cfg.solver.max_iter)
    rows = []
    for j, t in enumerate(traj.times):
        rows.append([t, traj.mass[j], traj.energy[j], traj.h1[j]])
        ctx.field(f"snap_{j:06d}.fld", traj.snapshots[j])
    ctx.csv("series.csv", ["t", "mass", "energy", "h1"], rows)
    for w in traj.warnings:
        ctx.warn(w)
    mass_drift = float(np.max(np.abs(traj.mass - traj.mass[0]))
                       / max(traj.mass[0], 1e-300))
    energy_drift = float(np.max(np.abs(traj.energy - traj.energy[0])))
    energy_scale = max(abs(traj.energy[0]), 1e-300)
    ctx.gate("mass_drift", mass_drift, f"<= {e.conserve_tol:g}",
             mass_drift <= e.conserve_tol)
    ctx.gate("energy_drift", energy_drift / energy_scale,
             f"<= {10 * e.conserve_tol:g} (relative)",
             energy_drift / energy_scale <= 10 * e.conserve_tol)
    ctx.stage(label, "ok", f"{len(traj.times)} frames to t={traj.times[-1]:g}")


def _run_evolve(cfg: ExperimentConfig, ctx: RunContext) -> None:
    _evolve_common(cfg, ctx, cfg.nonlinearity.sign, "evolve")


def _run_linear_evolve(cfg: ExperimentConfig, ctx: RunContext) -> None:
    _evolve_common(cfg, ctx, 0, "linear-evolve")


def _run_stability(cfg: ExperimentConfig, ctx: RunContext) -> None:
    spec = _spec_from(cfg)
    eig = _eigenpair(cfg, spec)
    family = BoundStateFamily(spec, eig, cfg.nonlinearity.sign,
                              max_iter=cfg.solver.max_iter)
    g = spec.grid
    z0 = cfg.nonlinearity.z
    base = family.solve(z0).field
    bump = project_continuous(eig.phi0,
                              gaussian_bump(g, 1.0, cfg.modulation.perturb_width))
    bump = make_field(g, bump.values / norm_h1(bump))
    e = cfg.evolution

    summary = []
    sizes, l1s = [], []
    worst_ortho_rel = 0.0
    worst_tv_ratio = 0.0
    worst_gap_ratio = 0.0
    all_tv_ok = True
    all_gap_ok = True
    wrap_violated = False
    for idx, amp in enumerate(cfg.modulation.amplitudes):
        psi0 = make_field(g, base.values + amp * bump.values)
        traj = evolve(spec, psi0, EvolveConfig(
            dt=e.dt, t_final=e.t_final, snapshot_stride=e.snapshot_stride,
            conserve_tol=e.conserve_tol), cfg.nonlinearity.sign,
            max_iter=cfg.solver.max_iter)
        rep = track(spec, eig, traj, family, sign=cfg.nonlinearity.sign,
                    sigma=cfg.modulation.sigma)
        for w in rep.warnings:
            ctx.warn(f"amplitude {amp:g}: {w}")
        rows = []
        for j, t in enumerate(rep.times):
            rows.append([t, rep.z_series[j].real, rep.z_series[j].imag,
                         rep.energy_series[j], rep.gauge_adjusted[j].real,
                         rep.gauge_adjusted[j].imag, rep.eta_h1[j],
                         rep.eta_weighted_h1[j], rep.ortho_resid[j],
                         rep.eta_q_pairing[j], int(rep.newton_iters[j])])
        ctx.csv(f"track_{idx}.csv",
                ["t", "z_re", "z_im", "energy", "w_re", "w_im", "eta_h1",
                 "eta_weighted_h1", "ortho_resid", "eta_q_pairing",
                 "newton_iters"], rows)
        if rep.eta_plus_estimate is not None:
            ctx.field(f"eta_plus_{idx}.fld", rep.eta_plus_estimate)

        tv1, tv2 = gauge_adjusted_variation(rep)
        tv_ratio = tv2 / max(tv1, 1e-300)
        gaps = [d for _, _, d in rep.scattering_gaps]
        gap_ratio = gaps[-1] / max(gaps[0], 1e-300) if len(gaps) >= 2 else 0.0
        while len(gaps) < 3:
            gaps.append(float("nan"))
        gaps = gaps[:3]
        in_window = rep.times[-1] <= rep.wrap_around
        wrap_violated |= not in_window
        rel = float(np.max(rep.ortho_resid
                           / np.maximum(rep.eta_h1, 1e-300)))
        worst_ortho_rel = max(worst_ortho_rel, rel)
        all_tv_ok &= tv_ratio <= 0.25
        all_gap_ok &= gap_ratio <= 0.5
        worst_tv_ratio = max(worst_tv_ratio, tv_ratio)
        worst_gap_ratio = max(worst_gap_ratio, gap_ratio)
        summary.append([amp, amp, rep.l1_mod_resid, tv1, tv2, tv_ratio]
                       + gaps + [gap_ratio, rep.x_norm_eta[0],
                                 rep.x_norm_eta[1], rep.x_norm_eta[2],
                                 rep.wrap_around])
        sizes.append(amp)
        l1s.append(rep.l1_mod_resid)
    ctx.csv("stability.csv",
            ["amplitude", "pert_h1", "l1_mod_resid", "tv_first", "tv_second",
             "tv_ratio", "gap_01", "gap_12", "gap_23", "gap_ratio",
             "xnorm_weighted_l2h1", "xnorm_l3w1p", "xnorm_sup_h1",
             "wrap_around"], summary)

    slope = float(np.polyfit(np.log(sizes), np.log(np.maximum(l1s, 1e-300)),
                             1)[0]) if len(sizes) >= 2 else float("nan")
    ctx.json("stability.json", {
        "mod_resid_slope": slope,
        "worst_ortho_rel": worst_ortho_rel,
        "wrap_violated": wrap_violated,
    })
    if len(sizes) >= 2:
        ctx.gate("mod_resid_slope", slope, "2 +- 0.4", abs(slope - 2.0) <= 0.4)
    ctx.gate("adjusted_tv_halving", worst_tv_ratio, "worst ratio <= 0.25",
             all_tv_ok)
    if wrap_violated and not all_gap_ok:
        ctx.warn("scattering gap growth inside a wrap-compromised window; "
                 "downgraded to a warning")
        ctx.gate("scattering_cauchy", worst_gap_ratio,
                 "<= 0.5 (wrap-violated, waived)", True)
    else:
        ctx.gate("scattering_cauchy", worst_gap_ratio,
                 "worst gap ratio <= 0.5", all_gap_ok)
    ctx.gate("orthogonality_rel", worst_ortho_rel, "<= 1e-10",
             worst_ortho_rel <= 1e-10)
    ctx.stage("stability-run", "ok", f"slope={slope:.3f}")


def _run_resolvent_scan(cfg: ExperimentConfig, ctx: RunContext) -> None:
    spec = _spec_from(cfg)
    try:
        eig = _eigenpair(cfg, spec)
    except NoBoundStateError:
        eig = None
        ctx.warn("no bound state; scanning without spectral projection")
    eps = cfg.solver.resolvent_eps
    norm_cfg = NormConfig(sigma=cfg.modulation.sigma)
    seed = cfg.output.seed
    rows = []
    scans = {}
    for eps_k in (eps, eps / 10.0):
        scan = resolvent_bound_scan(spec, eig, sigma=norm_cfg.sigma,
                                    eps=eps_k, tol_rel=cfg.solver.tol_rel,
                                    seed=seed)
        scans[eps_k] = scan
        for p in scan.points:
            rows.append([eps_k, p.lam, p.opnorm, p.scaled, p.power_iters,
                         p.converged])
    ctx.csv("resolvent.csv",
            ["eps", "lambda", "opnorm", "scaled", "power_iters", "converged"],
            rows)
    main = scans[eps]
    fine = scans[eps / 10.0]
    drift = abs(fine.max_scaled - main.max_scaled) / max(main.max_scaled,
                                                         1e-300)
    ctx.json("resolvent.json", {
        "sigma": norm_cfg.sigma,
        "max_scaled": main.max_scaled, "median_scaled": main.median_scaled,
        "max_scaled_fine_eps": fine.max_scaled, "eps_drift": drift,
    })
    ctx.gate("resolvent_flatness", main.max_scaled / max(main.median_scaled,
                                                         1e-300),
             "max/median <= 10", main.uniform_ok)
    ctx.gate("resolvent_eps_stability", drift, "<= 0.25", drift <= 0.25)
    ctx.stage("resolvent-scan", "ok",
              f"max={main.max_scaled:.4g} median={main.median_scaled:.4g}")


def _run_norm_equivalence(cfg: ExperimentConfig, ctx: RunContext) -> None:
    spec = _spec_from(cfg)
    report = norm_equivalence_check(spec, seed=cfg.output.seed)
    rows = [[r.p, r.r_min, r.r_max, r.spread, r.passed] for r in report.rows]
    ctx.csv("norm_equivalence.csv",
            ["p", "r_min", "r_max", "spread", "passed"], rows)
    worst_spread = max(r.spread for r in report.rows)
    worst_floor = min(r.r_min for r in report.rows)
    ctx.gate("ratio_spread", worst_spread, "<= 100", worst_spread <= 100.0)
    ctx.gate("ratio_floor", worst_floor, ">= 1e-3", worst_floor >= 1e-3)
    ctx.stage("norm-equivalence", "ok", f"trials={report.trials}")


def _run_strichartz(cfg: ExperimentConfig, ctx: RunContext) -> None:
    spec = _spec_from(cfg)
    eig = _eigenpair(cfg, spec)
    report = strichartz_ratio(spec, eig, sigma=cfg.modulation.sigma,
                              seed=cfg.output.seed)
    rows = [[r.mode, r.source, r.q, r.p, r.value, r.reference, r.ratio]
            for r in report.rows]
    ctx.csv("strichartz.csv",
            ["mode", "source", "q", "p", "value", "reference", "ratio"], rows)
    ctx.json("strichartz.json", {"max_ratio": report.max_ratio,
                                 "median_ratio": report.median_ratio})
    ctx.gate("strichartz_spread", report.max_ratio
             / max(report.median_ratio, 1e-300), "max <= 10 * median",
             report.ok)
    ctx.stage("strichartz-ratio", "ok",
              f"max={report.max_ratio:.4g} median={report.median_ratio:.4g}")


_DISPATCH = {
    "validate-potentials": _run_validate_potentials,
    "ground-state": _run_ground_state,
    "bound-state": _run_bound_state,
    "bound-family": _run_bound_family,
    "evolve": _run_evolve,
    "linear-evolve": _run_linear_evolve,
    "stability-run": _run_stability,
    "resolvent-scan": _run_resolvent_scan,
    "norm-equivalence": _run_norm_equivalence,
    "strichartz-ratio": _run_strichartz,
}


def _write_manifest(ctx: RunContext, cfg: ExperimentConfig, subcommand: str,
                    status: str, wall: float, error: str = "") -> None:
    manifest = {
        "artifact_version": __version__,
        "subcommand": subcommand,
        "status": status,
        "error": error,
        "config": cfg.echo(),
        "seed": cfg.output.seed,
        "platform": {
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "system": platform.platform(),
        },
        "wall_clock_s": wall,
        "stages": ctx.stages,
        "gates": ctx.gates,
        "warnings": ctx.warnings,
        "outputs": sorted(ctx.outputs + ["manifest.json"]),
    }
    fd, tmp = tempfile.mkstemp(dir=ctx.out_dir, prefix=".manifest-",
                               suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, ctx.out_dir / "manifest.json")
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(subcommand: str, cfg: ExperimentConfig) -> int:
    """Execute one subcommand; returns the process exit status."""
    if subcommand not in _DISPATCH:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    out_dir = Path(cfg.output.directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    ctx = RunContext(out_dir)
    start = time.monotonic()
    try:
        _DISPATCH[subcommand](cfg, ctx)
    except MagnlsError as exc:
        ctx.stage(subcommand, "error", str(exc))
        _write_manifest(ctx, cfg, subcommand, "error",
                        time.monotonic() - start, error=str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return 2
    ok = ctx.all_gates_pass
    _write_manifest(ctx, cfg, subcommand, "pass" if ok else "gate-failed",
                    time.monotonic() - start)
    for name, gate in ctx.gates.items():
        verdict = "pass" if gate["passed"] else "FAIL"
        print(f"[{verdict}] {name}: {gate['value']:.6g} ({gate['threshold']})")
    return 0 if ok else 1


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="magnls",
        description="numerical laboratory for the cubic magnetic "
                    "Schrodinger equation")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--output", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--override", action="append", default=[],
                       metavar="section.key=value")
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config, tuple(args.override))
        if args.output is not None:
            cfg = dataclasses.replace(
                cfg, output=dataclasses.replace(cfg.output,
                                                directory=args.output))
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError(f"--seed must fit in 64 bits, got {args.seed}")
            cfg = dataclasses.replace(
                cfg, output=dataclasses.replace(cfg.output, seed=args.seed))
        return run(args.subcommand, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
