"""boltzgap <subcommand> --config <path> [--out <dir>] [--seed <u64>]

Exit codes: 0 success, 1 a verified property failed, 2 configuration error,
3 numerical error.
"""
import argparse
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import config as config_mod
from . import io
from .discretize import assemble, assemble_hilbert, build_grid
from .errors import BoltzgapError, ConfigError
from .evolve import (certified_initial, discrete_maxwellian, envelope_check, evolve, fit_decay)
from .model import ModelSpec, WeightSpec
from .spectral import RateFunctions, domain_sigma_range, spectrum
from .verify import overall, resolvent_bound, run_suite

SUBCOMMANDS = ("assemble", "spectrum", "evolve", "resolvent", "verify", "report")


def _stamp():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _grid(cfg):
    g = cfg["grid"]
    spec = config_mod.model_spec(cfg)
    return build_grid(g["n_radial"], n_angle=g["n_angle"], r_max=float(g["r_max"]), d=spec.d,
                      order=g["order"], refine_origin=g["refine_origin"]), spec


def _normalization(cfg, command):
    norm = cfg["assemble"]["normalization"]
    if norm:
        return norm
    return "raw" if command == "spectrum" else "column-stochastic"


def _generator(cfg, matrix_key):
    sec, key = matrix_key.split(".")
    path = cfg[sec][key]
    if path:
        try:
            return io.load_generator(path)
        except FileNotFoundError as exc:
            raise ConfigError(str(exc), key=matrix_key) from exc
    grid, spec = _grid(cfg)
    return assemble(grid, spec, _normalization(cfg, sec))


def _claim(text, measured, passed=None, status=None):
    c = {"claim": text, "measured": measured, "passed": passed}
    if status:
        c["status"] = status
    return c


def _header(name, cfg, seed):
    return {"command": name, "timestamp": _stamp(), "seed": seed,
            "model": config_mod.model_spec(cfg).to_dict(), "grid": cfg["grid"]}


def cmd_assemble(cfg, out, seed):
    grid, spec = _grid(cfg)
    gen = assemble(grid, spec, _normalization(cfg, "assemble"))
    io.save_generator(out / "generator.txt", gen)
    meta = {k: v for k, v in gen.meta.items()}
    factors = meta.pop("column_factors")
    ident = meta.get("column_identity_max_rel_error")
    summary = {**_header("assemble", cfg, seed), "normalization": gen.normalization, **meta,
               "rescaling_factors": factors,
               "claims": [
                   _claim("columns of the gain integrate to the truncated collision frequency (< 1e-4)",
                          ident, ident is not None and ident < 1e-4),
                   _claim("equilibrium residual |L_h M_h| / |M_h|", meta["equilibrium_residual"],
                          meta["equilibrium_residual"] < 1e-4),
               ]}
    io.write_json(out / "assemble.json", summary)
    return 0


def cmd_spectrum(cfg, out, seed):
    sc = cfg["spectrum"]
    gen = _generator(cfg, "spectrum.matrix")
    sym = None
    if sc["hilbert"]:
        sym, _ = assemble_hilbert(gen.grid, gen.spec)
    rep = spectrum(gen, hilbert=sym, zero_tol=sc["zero_tol"])
    no_gap = bool(rep.lambda_star < sc["no_gap_threshold"])
    extra = {**_header("spectrum", cfg, seed), "normalization": gen.normalization,
             "no_gap": no_gap, "no_gap_threshold": sc["no_gap_threshold"],
             "lambda_over_eta": rep.lambda_star / rep.eta}
    claims = [_claim("exactly one eigenvalue near zero", rep.n_zero, rep.n_zero == 1)]
    if gen.spec.hard:
        claims.append(_claim("hard potentials: 0 < lambda* < eta", [rep.lambda_star, rep.eta],
                             bool(0 < rep.lambda_star < rep.eta)))
        if sym is not None:
            claims.append(_claim("L1 gap equals the L2(M^-1) gap within 1%", [rep.lambda_star, rep.mu2],
                                 bool(abs(rep.lambda_star / rep.mu2 - 1) < 0.01)))
    else:
        claims.append(_claim(f"soft potentials: no gap (lambda* < {sc['no_gap_threshold']:g})",
                             rep.lambda_star, no_gap))
    extra["claims"] = claims
    io.write_spectrum(out, rep, extra)
    return 0


def _initial(cfg, gen):
    e = cfg["evolve"]
    r = gen.grid.nodes
    M = discrete_maxwellian(gen.grid)
    if e["initial"] == "bump":
        b = np.exp(-(r - 2.0) ** 2)
        return e["rho0"] * b / gen.grid.mass(b), None
    g = r * r * M if e["g"] == "r2-maxwellian" else r ** 4 * M
    return certified_initial(gen, g, rho0=e["rho0"])


def cmd_evolve(cfg, out, seed):
    e = cfg["evolve"]
    gen = _generator(cfg, "evolve.matrix")
    ref = None
    if e["spectrum"]:
        try:
            ref = io.read_json(e["spectrum"])
        except FileNotFoundError as exc:
            raise ConfigError(f"spectrum file not found: {e['spectrum']}", key="evolve.spectrum") from exc
    f0, eps = _initial(cfg, gen)
    traj = evolve(gen, f0, float(e["t_end"]), dt=float(e["dt"]) or None, method=e["method"],
                  record_every=e["record_every"])
    io.write_trajectory(out / "trajectory.csv", traj)
    window = tuple(float(x) for x in e["window"])
    summary = {**_header("evolve", cfg, seed), "initial": e["initial"], "certified_scale": eps,
               "method": e["method"], "window": list(window),
               "mass_drift": float(np.max(np.abs(traj.mass - traj.mass[0]))),
               "min_component": float(traj.min_component.min())}
    claims = [_claim("mass conserved to 1e-8", summary["mass_drift"], summary["mass_drift"] <= 1e-8)]
    status = 0
    fit = fit_decay(traj, window)
    summary["fit"] = {"rate": fit.rate, "prefactor": fit.prefactor, "residual": fit.residual}
    if ref is not None:
        lam = float(ref["lambda_star"])
        rel = fit.rate / lam - 1.0
        ok = bool(abs(rel) <= 0.05)
        summary["lambda_star_reference"] = lam
        summary["fit_rel_error"] = rel
        claims.append(_claim("fitted decay rate matches lambda* within 5%", [fit.rate, lam], ok))
        status = status or (0 if ok else 1)
    if gen.spec.soft:
        _, smax = domain_sigma_range(gen)
        env = envelope_check(traj, RateFunctions(smax), c=float(e["envelope_c"]), window=window)
        io.write_csv(out / "envelope.csv", ["t", "ratio"], np.column_stack([env.times, env.ratios]).tolist())
        summary["envelope"] = {"c": env.c, "max_ratio": env.max_ratio, "first_quarter_max": env.first_quarter_max,
                               "last_quarter_max": env.last_quarter_max, "bounded": env.bounded}
        claims.append(_claim("soft potentials: norm / theta_log^-1(c t) stays bounded",
                             env.last_quarter_max / env.first_quarter_max, env.bounded))
        claims.append(_claim("soft potentials: exponential fit is poor (residual > 0.05)", fit.residual,
                             fit.residual > 0.05))
        status = status or (0 if env.bounded else 1)
    summary["claims"] = claims
    io.write_json(out / "evolve.json", summary)
    return status


def cmd_resolvent(cfg, out, seed):
    rc = cfg["resolvent"]
    gen = _generator(cfg, "resolvent.matrix")
    rep = resolvent_bound(gen, alphas=tuple(float(a) for a in rc["alphas"]), tol=float(rc["tol"]),
                          alpha_large=float(rc["alpha_large"]))
    io.write_csv(out / "resolvent.csv", rep.columns, rep.samples)
    summary = {**_header("resolvent", cfg, seed), "sup_ratio": rep.sup_ratio, "passed": rep.passed, **rep.meta,
               "claims": [_claim("|(i a - L)^-1| <= theta(|a|)", rep.sup_ratio, rep.passed)]}
    io.write_json(out / "resolvent.json", summary)
    return 0 if rep.passed else 1


def cmd_verify(cfg, out, seed):
    vc = cfg["verify"]
    spec = config_mod.model_spec(cfg)
    gen = None
    if vc["resolvent"]:
        soft = ModelSpec(d=spec.d, gamma=-1.0, ell_b=spec.ell_b, weight=WeightSpec.unit())
        grid = build_grid(vc["resolvent_n_radial"], n_angle=cfg["grid"]["n_angle"], r_max=float(vc["r_max"]),
                          d=spec.d, order=cfg["grid"]["order"], refine_origin=3)
        gen = assemble(grid, soft, "column-stochastic", check_identity=False)
    reports = run_suite(spec, seed=seed, r_max=float(vc["r_max"]), resolvent_gen=gen,
                        slope_tol=float(vc["slope_tol"]))
    vdir = out / "verify"
    rows = []
    for rep in reports:
        io.write_bound_report(vdir, rep, seed=seed)
        status = "pass" if rep.passed else ("expected-fail" if rep.meta.get("expected_fail") else "FAIL")
        rows.append({"quantity": rep.quantity, "sup_ratio": rep.sup_ratio, "status": status,
                     "tag": rep.meta.get("tag", "")})
    ok = overall(reports)
    summary = {**_header("verify", cfg, seed), "passed": ok, "reports": rows,
               "claims": [_claim(f"bound check {r['quantity']}", r["sup_ratio"], r["status"] != "FAIL",
                                 r["status"]) for r in rows]}
    io.write_json(out / "verify.json", summary)
    return 0 if ok else 1


def _fmt_measured(x):
    if isinstance(x, float):
        return "%.6g" % x
    if isinstance(x, list):
        return ", ".join(_fmt_measured(v) for v in x)
    return str(x)


def cmd_report(cfg, out, seed):
    paths = [Path(p) for p in cfg["report"]["inputs"]]
    if not paths:
        paths = sorted(p for p in out.rglob("*.json") if p.name in
                       ("assemble.json", "spectrum.json", "evolve.json", "resolvent.json", "verify.json"))
    lines = ["| source | claim | measured | status |", "|---|---|---|---|"]
    for p in paths:
        try:
            data = io.read_json(p)
        except FileNotFoundError as exc:
            raise ConfigError(f"report input not found: {p}", key="report.inputs") from exc
        for c in data.get("claims", []):
            st = c.get("status") or {True: "pass", False: "fail", None: "n/a"}[c.get("passed")]
            cells = [f"{p.parent.name}/{p.name}", c["claim"], _fmt_measured(c["measured"]), st]
            lines.append("| " + " | ".join(x.replace("|", "\\|") for x in cells) + " |")
    io.atomic_write(out / "report.md", "\n".join(lines) + "\n")
    return 0


COMMANDS = {"assemble": cmd_assemble, "spectrum": cmd_spectrum, "evolve": cmd_evolve,
            "resolvent": cmd_resolvent, "verify": cmd_verify, "report": cmd_report}


def _u64(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="boltzgap", description="Spectral-gap lab for the linear Boltzmann operator.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True)
        s.add_argument("--out", default=None)
        s.add_argument("--seed", type=_u64, default=0)
    return p


def _report_error(exc, out):
    text = io.dumps({"exit_code": exc.exit_code, **exc.to_dict()})
    print(text, file=sys.stderr)
    if out is not None:
        try:
            io.atomic_write(Path(out) / "error.json", text + "\n")
        except OSError:
            pass


def main(argv=None):
    args = build_parser().parse_args(argv)
    out = Path(args.out) if args.out else None
    try:
        cfg = config_mod.load(args.config)
        out = out or Path(cfg["output"]["dir"])
        return COMMANDS[args.command](cfg, out, args.seed)
    except BoltzgapError as exc:
        _report_error(exc, out)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        err = BoltzgapError(f"linear algebra failure: {exc}")
        _report_error(err, out)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
