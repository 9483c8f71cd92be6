"""Command-line interface.

Subcommands:

* ``sweep``     fidelity records over a gamma (and optionally beta*B) grid
* ``crossover`` bisect for the gamma where the two codes tie
* ``contour``   trace F = level threshold lines for thermal models
* ``singlet``   collective-noise experiment for the singlet code
* ``verify``    run the parity and analytic-oracle health suite

Gammas are given in units of 1/tau.  ``--config`` reads a JSON file
mirroring the sweep configuration; explicit flags override file values.
Exit status is 0 on success and nonzero on any fatal error or failed
verification.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .chain import pst_spec, verify_parity_matching
from .encodings import EncodingId, decode, encode, get_scheme
from .fidelity import average_fidelity, noise_in_tau_units
from .harness import (
    DEFAULT_GAMMA_GRID,
    GridSpec,
    SweepConfig,
    default_beta_values,
    find_crossover,
    singlet_decay_experiment,
    singlet_static_defect,
    sweep,
    trace_threshold_contour,
    write_records_csv,
    write_records_jsonl,
)
from .lindblad import IntegratorConfig, _evolve_batch
from .noise import NoiseKind
from .fidelity import _chain_data


def _beta(text):
    return float("inf") if text in ("inf", "Inf", "INF") else float(text)


def _add_integrator_flags(p):
    p.add_argument("--steps", type=int, default=600,
                   help="integration steps per half period (default 600)")
    p.add_argument("--method", choices=["rk4", "split"], default="rk4")


def _integrator(args) -> IntegratorConfig:
    return IntegratorConfig(method=args.method, steps_per_half_period=args.steps)


def _add_common(p, noise_required=True):
    p.add_argument("--n", type=int, default=6, help="chain length")
    p.add_argument("--noise", choices=[k.value for k in NoiseKind],
                   required=noise_required)
    p.add_argument("--beta-b", type=_beta, default=None,
                   help="beta*B for thermal models ('inf' allowed)")
    _add_integrator_flags(p)


def _add_gamma_grid(p):
    p.add_argument("--gamma-min", type=float, default=DEFAULT_GAMMA_GRID.min)
    p.add_argument("--gamma-max", type=float, default=DEFAULT_GAMMA_GRID.max)
    p.add_argument("--gamma-points", type=int, default=DEFAULT_GAMMA_GRID.points)
    p.add_argument("--gamma-scale", choices=["linear", "log"],
                   default=DEFAULT_GAMMA_GRID.scale)


def _add_output(p):
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")


def _emit_records(records, args):
    if args.out:
        if args.format == "csv":
            write_records_csv(records, args.out)
        else:
            write_records_jsonl(records, args.out)
        return
    if args.format == "csv":
        from .fidelity import CSV_COLUMNS
        print(",".join(CSV_COLUMNS))
        for r in records:
            print(",".join(r.to_row()))
    else:
        for r in records:
            print(r.to_json())


def _cmd_sweep(args) -> int:
    if args.config:
        with open(args.config) as fh:
            cfg = SweepConfig.from_dict(json.load(fh))
        overrides = {}
        if args.noise:
            overrides["model"] = args.noise
        if args.encoding:
            overrides["encodings"] = tuple(args.encoding.split(","))
        if overrides or args.beta_b is not None:
            from dataclasses import replace
            if args.beta_b is not None:
                overrides["beta_b"] = args.beta_b
            cfg = replace(cfg, **overrides)
    else:
        if not args.noise:
            print("error: --noise is required without --config", file=sys.stderr)
            return 2
        cfg = SweepConfig(
            model=args.noise,
            encodings=tuple((args.encoding or "a,b").split(",")),
            n=args.n,
            gamma_grid=GridSpec(args.gamma_min, args.gamma_max,
                                args.gamma_points, args.gamma_scale),
            beta_b=args.beta_b,
            integrator=_integrator(args),
            seed=args.seed,
        )
    records = sweep(cfg, workers=args.workers)
    _emit_records(records, args)
    return 0


def _cmd_crossover(args) -> int:
    res = find_crossover(args.noise, args.n, (args.gamma_min, args.gamma_max),
                         _integrator(args), beta_b=args.beta_b)
    print(f"gamma* = {res.gamma:.6f} (units 1/tau)")
    print(f"F_a = {res.f_a:.6f}  F_b = {res.f_b:.6f}  F = {res.f:.6f}")
    print(f"quantum at crossover: {res.f > 2/3}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"gamma": res.gamma, "f_a": res.f_a, "f_b": res.f_b}, fh)
    return 0


def _cmd_contour(args) -> int:
    if args.beta_b is not None:
        betas = [args.beta_b]
    else:
        betas = list(GridSpec(args.beta_b_min, args.beta_b_max,
                              args.beta_b_points, "linear").values())
        if args.include_inf:
            betas.append(float("inf"))
    res = trace_threshold_contour(
        args.noise, args.encoding or "b", args.n, level=args.level,
        beta_b_values=betas, gamma_bracket=(args.gamma_min, args.gamma_max),
        cfg=_integrator(args))
    lines = ["gamma,beta_b"] + [f"{g!r},{b!r}" for g, b in res.points]
    text = "\n".join(lines)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _cmd_singlet(args) -> int:
    gammas = [float(g) for g in args.gammas.split(",")]
    beta = args.beta_b if args.beta_b is not None else float("inf")
    records = singlet_decay_experiment(args.n, gammas, beta, _integrator(args))
    _emit_records(records, args)
    static = singlet_static_defect(args.n, max(gammas) or 2.0, beta, _integrator(args))
    print(f"# static (H=0) singlet drift: {static:.3e}", file=sys.stderr)
    return 0


def _cmd_verify(args) -> int:
    cfg = IntegratorConfig(steps_per_half_period=args.steps)
    failures = 0

    def check(name, ok, detail=""):
        nonlocal failures
        print(f"{'ok  ' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
        failures += 0 if ok else 1

    for n in range(2, 9):
        rep = verify_parity_matching(pst_spec(n, 0.0))
        check(f"parity matching, n={n}", rep.parity_ok,
              f"spacing err {rep.max_spacing_error:.2e}")

    for n in range(2, 9):
        spec = pst_spec(n, 0.0)
        worst = 0.0
        for enc in (EncodingId.A, EncodingId.B):
            noise = noise_in_tau_units(NoiseKind.NONE, 0.0, None, spec)
            rec = average_fidelity(get_scheme(enc, n), spec, noise, cfg)
            worst = max(worst, abs(rec.f - 1.0))
        check(f"perfect transfer at gamma=0, n={n}", worst < 1e-6, f"|F-1| {worst:.1e}")

    spec = pst_spec(6, 0.0)
    for gt in (0.5, 1.0, 2.0):
        noise = noise_in_tau_units(NoiseKind.LOCAL_THERMAL, gt, float("inf"), spec)
        rec_b = average_fidelity(get_scheme("b", 6), spec, noise, cfg)
        rec_a = average_fidelity(get_scheme("a", 6), spec, noise, cfg)
        fb = 0.5 * (1 + np.exp(-gt / 2))
        fa = (3 + np.exp(-gt / 2) + 2 * np.exp(-gt / 4)) / 6
        check(f"thermal T=0 oracle, code b, gamma*tau={gt}", abs(rec_b.f - fb) < 2e-3,
              f"|dF| {abs(rec_b.f - fb):.1e}")
        check(f"thermal T=0 oracle, code a, gamma*tau={gt}", abs(rec_a.f - fa) < 2e-3,
              f"|dF| {abs(rec_a.f - fa):.1e}")

    noise = noise_in_tau_units(NoiseKind.GLOBAL_DEPHASE, 1.0, None, spec)
    rec = average_fidelity(get_scheme("b", 6), spec, noise, cfg)
    check("collective dephasing leaves code b untouched", abs(rec.f - 1.0) < 1e-6,
          f"|F-1| {abs(rec.f - 1.0):.1e}")

    res = trace_threshold_contour(NoiseKind.LOCAL_THERMAL, "b", 6,
                                  beta_b_values=[float("inf")], cfg=cfg)
    g_star = res.points[0][0]
    target = 2 * np.log(3.0)
    check("threshold endpoint gamma*tau = 2 ln 3", abs(g_star - target) / target < 0.01,
          f"got {g_star:.4f}, want {target:.4f}")

    h, tau, u_half = _chain_data(spec)
    rng = np.random.default_rng(7)
    worst = 0.0
    for enc in (EncodingId.A, EncodingId.B):
        scheme = get_scheme(enc, 6)
        for _ in range(10):
            v = rng.normal(size=3)
            r = v / np.linalg.norm(v)
            rho = encode(scheme, r)
            final = u_half @ rho @ u_half.conj().T
            logical = decode(scheme, final, spec)
            expect = 0.5 * np.array([[1 + r[2], r[0] - 1j * r[1]],
                                     [r[0] + 1j * r[1], 1 - r[2]]])
            worst = max(worst, float(np.max(np.abs(logical - expect))))
    check("round trip encode/mirror/decode", worst < 1e-8, f"max dev {worst:.1e}")

    print(f"{failures} failure(s)" if failures else "all checks passed")
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spintransfer", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="fidelity records over a gamma grid")
    _add_common(p, noise_required=False)
    p.add_argument("--encoding", default=None,
                   help="comma list from {a,b,singlet} (default a,b)")
    _add_gamma_grid(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None, help="JSON sweep config file")
    p.add_argument("--workers", type=int, default=None)
    _add_output(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("crossover", help="gamma where the codes tie")
    _add_common(p)
    p.add_argument("--gamma-min", type=float, default=0.1)
    p.add_argument("--gamma-max", type=float, default=10.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_crossover)

    p = sub.add_parser("contour", help="threshold contour in (gamma, beta*B)")
    _add_common(p)
    p.add_argument("--encoding", default="b", choices=["a", "b"])
    p.add_argument("--level", type=float, default=2.0 / 3.0)
    p.add_argument("--gamma-min", type=float, default=1e-3)
    p.add_argument("--gamma-max", type=float, default=60.0)
    p.add_argument("--beta-b-min", type=float, default=0.0)
    p.add_argument("--beta-b-max", type=float, default=6.0)
    p.add_argument("--beta-b-points", type=int, default=12)
    p.add_argument("--include-inf", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_contour)

    p = sub.add_parser("singlet", help="singlet code under collective noise")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--gammas", default="0.0,0.5,1.0,2.0", help="comma list of gamma*tau")
    p.add_argument("--beta-b", type=_beta, default=float("inf"))
    _add_integrator_flags(p)
    _add_output(p)
    p.set_defaults(func=_cmd_singlet)

    p = sub.add_parser("verify", help="parity and analytic-oracle health suite")
    p.add_argument("--steps", type=int, default=600)
    p.set_defaults(func=_cmd_verify)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
