"""Batch command-line front end.

Subcommands: ``simulate`` (full run to CSV + ledger), ``iv-curve`` (array
characteristic dump), ``mppt-compare`` (paired controller bench) and
``modes-check`` (switch-table self check). Exit codes are a stable contract:
0 success, 1 config/flag error, 2 I/O error, 3 invariant violation.
"""

import argparse
import os
import sys

from pvbatsim import engine, pv
from pvbatsim.config import build_sim_config, default_config, load_config_file
from pvbatsim.errors import ConfigError, InvariantViolation, PvbatsimError
from pvbatsim.profiles import sample
from pvbatsim.supervisor import SWITCH_TABLE, SupervisorMode

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_INVARIANT = 3

#: Environment variable consulted when --config is not given.
CONFIG_ENV_VAR = "PVBATSIM_CONFIG"


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; the CLI contract says 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _load_config(path, mppt_override=None):
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    data = load_config_file(path) if path else default_config()
    return build_sim_config(data, mppt_override=mppt_override)


def _cmd_simulate(args):
    config = _load_config(args.config, mppt_override=args.mppt)
    records, ledger = engine.run(config)
    try:
        engine.write_records_csv(records, config.mppt_kind, args.out)
        engine.write_ledger(ledger, args.out + ".ledger")
    except OSError as exc:
        print(f"simulate: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    closed = ledger.closes()
    print(
        f"simulate: {len(records)} steps, controller={config.mppt_kind}, "
        f"e_pv={ledger.e_pv:.2f} Wh, e_load_served={ledger.e_load_served:.2f} Wh, "
        f"ledger closure={ledger.relative_residual():.3e} "
        f"({'ok' if closed else 'FAILED'})"
    )
    if not closed:
        print(
            f"simulate: ledger closure {ledger.relative_residual():.3e} exceeds "
            f"{engine.BALANCE_TOL:.1e}",
            file=sys.stderr,
        )
        return EXIT_INVARIANT
    return EXIT_OK


def _cmd_iv_curve(args):
    if args.g < 0:
        print("iv-curve: --g must be >= 0", file=sys.stderr)
        return EXIT_CONFIG
    if args.points < 2:
        print("iv-curve: --points must be >= 2", file=sys.stderr)
        return EXIT_CONFIG
    config = _load_config(args.config)
    t_j = args.t + 273.15
    points = pv.iv_sweep(args.g, t_j, args.points, config.panel)
    v_mpp, p_mpp = pv.mpp_oracle(args.g, t_j, config.panel)
    try:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("v,i,p\n")
            for pt in points:
                fh.write(f"{pt.v_pv!r},{pt.i_pv!r},{pt.p_pv!r}\n")
            fh.write(f"mpp,{v_mpp!r},{p_mpp!r}\n")
    except OSError as exc:
        print(f"iv-curve: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"iv-curve: {args.points} points, v_mpp={v_mpp:.4f} V, p_mpp={p_mpp:.4f} W")
    return EXIT_OK


def _segments(samples):
    """Maximal runs of identical (g, t) pairs: list of (start, end) indexes."""
    spans = []
    start = 0
    for k in range(1, len(samples) + 1):
        if k == len(samples) or samples[k] != samples[start]:
            spans.append((start, k))
            start = k
    return spans


def _cmd_mppt_compare(args):
    config = _load_config(args.config)
    n_steps = max(2, int(config.t_end / config.t_mppt))
    times = [k * config.t_mppt for k in range(n_steps)]
    conditions = [
        (sample(config.irradiance, t), sample(config.temperature, t)) for t in times
    ]
    v_bus = config.v_bus_nominal
    runs = {}
    for kind in ("po", "flc"):
        runs[kind] = engine.run_tracking(
            kind,
            config.panel,
            [g for g, _ in conditions],
            [t_c for _, t_c in conditions],
            n_steps,
            v_bus,
            d0=config.d0,
            delta_d=config.delta_d,
            fuzzy=config.fuzzy,
            d_max=config.d_max,
            eta=config.eta,
        )

    try:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("t_s,g_wm2,t_c,d_po,v_po,p_po,d_flc,v_flc,p_flc\n")
            for k, t in enumerate(times):
                g, t_c = conditions[k]
                d_po, v_po, p_po = runs["po"][k]
                d_f, v_f, p_f = runs["flc"][k]
                fh.write(
                    f"{t!r},{g!r},{t_c!r},{d_po!r},{v_po!r},{p_po!r},"
                    f"{d_f!r},{v_f!r},{p_f!r}\n"
                )
    except OSError as exc:
        print(f"mppt-compare: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO

    last_ripple = {}
    for start, end in _segments(conditions):
        g, t_c = conditions[start]
        _, p_mpp = pv.mpp_oracle(g, t_c + 273.15, config.panel)
        p_mpp *= config.eta
        line = f"segment t=[{times[start]:.1f},{times[end - 1]:.1f}]s g={g:g} W/m2:"
        for kind in ("po", "flc"):
            mean, ripple = engine.steady_stats(runs[kind][start:end])
            if p_mpp > 0.0:
                line += f"  {kind}: eff={mean / p_mpp:.4f} ripple={ripple:.4f} W"
            else:
                line += f"  {kind}: eff=n/a ripple=n/a"
            last_ripple[kind] = ripple if p_mpp > 0.0 else None
        print(line)

    if last_ripple["po"] is None:
        print("mppt-compare: no PV power in final segment, comparison n/a")
        return EXIT_OK
    if last_ripple["flc"] < last_ripple["po"]:
        print(
            f"mppt-compare: flc ripple {last_ripple['flc']:.4f} W < "
            f"po ripple {last_ripple['po']:.4f} W"
        )
        return EXIT_OK
    print(
        f"mppt-compare: flc ripple {last_ripple['flc']:.4f} W is not below "
        f"po ripple {last_ripple['po']:.4f} W",
        file=sys.stderr,
    )
    return EXIT_INVARIANT


_MODE_TABLE_LINES = [
    "Mode1 On On Off",
    "Mode2 Off On On",
    "Mode3 Off Off On",
    "Mode4 Off On Off",
    "Mode5 Off Off Off",
]


def _cmd_modes_check(_args):
    def word(flag):
        return "On" if flag else "Off"

    lines = []
    for mode in SupervisorMode:
        sw = SWITCH_TABLE[mode]
        lines.append(f"Mode{int(mode)} {word(sw.k1)} {word(sw.k2)} {word(sw.k3)}")
    for line in lines:
        print(line)
    if lines != _MODE_TABLE_LINES:
        print("modes-check: switch table does not match the expected table", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="pvbatsim", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    p_sim = subs.add_parser("simulate", help="run a simulation to CSV + ledger")
    p_sim.add_argument("--config", help=f"YAML config path (default: ${CONFIG_ENV_VAR} or built-in)")
    p_sim.add_argument("--out", required=True, help="output records CSV path")
    p_sim.add_argument("--mppt", choices=("po", "flc"), help="override the configured controller")
    p_sim.add_argument(
        "--seedless",
        action="store_true",
        help="assert the run uses no randomness (always true; kept for CI contracts)",
    )
    p_sim.set_defaults(func=_cmd_simulate)

    p_iv = subs.add_parser("iv-curve", help="dump an I-V/P-V sweep with the MPP trailer")
    p_iv.add_argument("--g", type=float, default=1000.0, help="irradiance W/m2")
    p_iv.add_argument("--t", type=float, default=25.0, help="cell temperature degC")
    p_iv.add_argument("--points", type=int, default=200)
    p_iv.add_argument("--out", required=True)
    p_iv.add_argument("--config", help="optional config for panel parameters")
    p_iv.set_defaults(func=_cmd_iv_curve)

    p_cmp = subs.add_parser("mppt-compare", help="run both controllers on identical conditions")
    p_cmp.add_argument("--config", help="YAML config path")
    p_cmp.add_argument("--out", required=True)
    p_cmp.set_defaults(func=_cmd_mppt_compare)

    p_modes = subs.add_parser("modes-check", help="print and verify the mode/switch table")
    p_modes.set_defaults(func=_cmd_modes_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except PvbatsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
