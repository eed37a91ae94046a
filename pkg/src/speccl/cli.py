"""Command-line entry point.

Subcommands:
    run        integrate one scenario (built-in name or config file) and
               write its CSV / event / plot artifacts
    reproduce  run all built-in scenarios and evaluate the acceptance criteria
    list       show the built-in scenarios and configuration keys
    check      validate a configuration file without running it

Exit codes: 0 success, 2 configuration error, 3 divergence, 4 criterion failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .acceptance import reproduce_all
from .config import (
    ConfigError,
    SCENARIO_NAMES,
    apply_overrides,
    build_config,
    builtin_scenario_text,
    raw_values,
)
from .reporting import emit_csv, plot_log
from .simulate import run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_ACCEPTANCE = 4


def _load_config(source, overrides):
    if source in SCENARIO_NAMES:
        text = builtin_scenario_text(source)
        name = source
    else:
        path = Path(source)
        if not path.exists():
            raise ConfigError(f"no built-in scenario or file named '{source}'")
        text = path.read_text()
        name = path.stem
    values = raw_values(text)
    if overrides:
        values = apply_overrides(values, overrides)
    return build_config(values, name)


def _cmd_run(args):
    try:
        cfg = _load_config(args.scenario, args.set or [])
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log = run_scenario(cfg)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = emit_csv(log, outdir / f"{cfg.name}.csv")
    print(f"wrote {csv_path} ({len(log)} rows, status {log.status})")
    if args.plots == "on":
        for path in plot_log(log, outdir, cfg.name):
            print(f"wrote {path}")
    if log.status != "ok":
        print(f"scenario '{cfg.name}' diverged; partial log written", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def _cmd_reproduce(args):
    _, code = reproduce_all(args.out, plots=(args.plots == "on"))
    return code


def _cmd_list(args):
    print("built-in scenarios:")
    for name in SCENARIO_NAMES:
        first_comment = builtin_scenario_text(name).splitlines()[0].lstrip("# ")
        print(f"  {name:16s} {first_comment}")
    return EXIT_OK


def _cmd_check(args):
    path = Path(args.config)
    try:
        text = path.read_text()
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = build_config(raw_values(text), path.stem)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"ok: scenario '{cfg.name}' ({cfg.plant}, {cfg.law}, "
          f"T={cfg.horizon}, dt={cfg.dt})")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="speccl",
        description="Excitation collection and composite-learning control simulations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("--scenario", required=True,
                     help="built-in scenario name or path to a config file")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--set", action="append", metavar="KEY=VALUE",
                     help="override a config key (repeatable)")
    run.add_argument("--plots", choices=("on", "off"), default="on")
    run.set_defaults(fn=_cmd_run)

    rep = sub.add_parser("reproduce", help="run all scenarios and the acceptance table")
    rep.add_argument("--out", required=True, help="output directory")
    rep.add_argument("--plots", choices=("on", "off"), default="on")
    rep.set_defaults(fn=_cmd_reproduce)

    lst = sub.add_parser("list", help="list built-in scenarios")
    lst.set_defaults(fn=_cmd_list)

    chk = sub.add_parser("check", help="validate a config file")
    chk.add_argument("--config", required=True, help="path to config file")
    chk.set_defaults(fn=_cmd_check)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    code = args.fn(args)
    if argv is None:
        sys.exit(code)
    return code
