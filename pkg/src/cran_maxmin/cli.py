"""Command-line surface: gen-channels, solve, sweep, oracle.

Exit codes: 0 success, 1 usage/validation error, 2 solver indeterminate.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from cran_maxmin.beamforming import SolverIndeterminate
from cran_maxmin.channels import generate_channels, generate_topology, trial_seed
from cran_maxmin.harness import (
    ConfigError,
    ExperimentConfig,
    resolve_workers,
    run_scheme,
    run_sweep,
    write_csv,
)
from cran_maxmin.model import load_channel_state, save_channel_state
from cran_maxmin.oracle import exhaustive_best


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cran-maxmin",
        description="Max-min SINR beamforming and user association "
                    "under per-RRH fronthaul caps")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-channels", help="draw a topology and channels")
    gen.add_argument("--config", required=True)
    gen.add_argument("--seed", required=True, type=int)
    gen.add_argument("--out", required=True)

    solve = sub.add_parser("solve", help="run one scheme on one instance")
    solve.add_argument("--scheme", required=True,
                       choices=["alg1", "bench1", "bench2", "bench3"])
    solve.add_argument("--channels", required=True)
    solve.add_argument("--config", required=True)
    solve.add_argument("--fronthaul-bps", type=float, default=None)
    solve.add_argument("--trace-out", default=None)

    sweep = sub.add_parser("sweep", help="Monte-Carlo sweep over fronthaul capacities")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--threads", type=int, default=None)
    sweep.add_argument("--timing", action="store_true",
                       help="write measured runtimes (breaks byte determinism)")

    oracle = sub.add_parser("oracle", help="exhaustive association search (tiny instances)")
    oracle.add_argument("--channels", required=True)
    oracle.add_argument("--config", required=True)
    oracle.add_argument("--fronthaul-bps", type=float, default=None)
    return parser


def _load_config(path) -> ExperimentConfig:
    return ExperimentConfig.from_json(path)


def _cmd_gen_channels(args) -> int:
    cfg = _load_config(args.config)
    # distinct sub-streams for placement and fading, as in the sweep driver
    topo = generate_topology(cfg.gen_config(), cfg.n_rrh, cfg.n_users,
                             trial_seed(args.seed, 0))
    ch = generate_channels(topo, cfg.gen_config(), cfg.n_antennas,
                           trial_seed(args.seed, 1),
                           noise_power_w=cfg.noise_power_w())
    save_channel_state(ch, args.out)
    print(f"wrote {args.out}: K={ch.n_users} N={ch.n_rrh} M={ch.n_antennas}")
    return 0


def _fronthaul(cfg: ExperimentConfig, args):
    if getattr(args, "fronthaul_bps", None) is not None:
        return args.fronthaul_bps
    return cfg.single_fronthaul()


def _cmd_solve(args) -> int:
    cfg = _load_config(args.config)
    ch = load_channel_state(args.channels)
    netcfg = cfg.network_config(_fronthaul(cfg, args))
    if (ch.n_users, ch.n_rrh, ch.n_antennas) != (cfg.n_users, cfg.n_rrh, cfg.n_antennas):
        raise ConfigError(
            f"channel file is K={ch.n_users} N={ch.n_rrh} M={ch.n_antennas}, "
            f"config says K={cfg.n_users} N={cfg.n_rrh} M={cfg.n_antennas}")
    report = run_scheme(args.scheme, ch, netcfg, cfg.tolerances())
    for rec in report.iterations:
        removed = "-" if rec.removed_user is None \
            else f"({rec.removed_user},{rec.removed_rrh})"
        print(f"t={rec.t} gamma1={rec.gamma1:.6g} gamma2={rec.gamma2:.6g} "
              f"gamma={rec.gamma:.6g} removed={removed} "
              f"omega_sizes={list(rec.omega_sizes)}")
    db = 10 * math.log10(report.final_gamma) if report.final_gamma > 0 else -math.inf
    print(f"final gamma={report.final_gamma:.6g} ({db:.3f} dB) "
          f"omega={[sorted(s) for s in report.final_association.omega]}")
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8") as f:
            json.dump(report.to_dict(), f, indent=2)
            f.write("\n")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    rows, aggregates = run_sweep(cfg, resolve_workers(args.threads))
    write_csv(args.out, rows, aggregates, timing=args.timing)
    print(f"wrote {args.out}: {len(rows)} rows, {len(aggregates)} aggregates")
    return 0


def _cmd_oracle(args) -> int:
    cfg = _load_config(args.config)
    ch = load_channel_state(args.channels)
    netcfg = cfg.network_config(_fronthaul(cfg, args))
    gamma, assoc = exhaustive_best(ch, netcfg, cfg.tolerances())
    db = 10 * math.log10(gamma) if gamma > 0 else -math.inf
    print(f"gamma_opt={gamma:.6g} ({db:.3f} dB)")
    print(f"assoc_opt={[sorted(s) for s in assoc.omega]}")
    return 0


_COMMANDS = {
    "gen-channels": _cmd_gen_channels,
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "oracle": _cmd_oracle,
}


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SolverIndeterminate as exc:
        print(f"solver indeterminate: {exc}", file=sys.stderr)
        return 2


def console_main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    console_main()
