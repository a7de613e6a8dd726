# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/rpmono

"""
Command-line front-end: `rpmono {quantum,rpm,infrared,check,selftest}`.

Flags override keys from `--config`; both feed one RunConfig. Exit codes: 0 pass,
1 inequality failure, 2 usage or configuration error, 3 capacity exceeded.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from rpmono import __version__
from rpmono.exceptions import CapacityExceededError, ConvergenceError, NonErgodicPresetError
from rpmono.runner import (
    EXIT_CAPACITY,
    EXIT_INEQUALITY,
    EXIT_OK,
    EXIT_USAGE,
    run_check,
    run_infrared,
    run_quantum,
    run_rpm,
)
from rpmono.selftest import run_selftest
from rpmono.settings import RunConfig, resolve_config
from rpmono.utils.logger import logger, set_console_level

# (flag, config key, help); values are parsed by the RunConfig sections
QUANTUM_FLAGS: List[Tuple[str, str, str]] = [
    ("--d", "quantum.d", "dimension"),
    ("--L", "quantum.L", "even side length"),
    ("--S", "quantum.S", "spin, a positive half-integer"),
    ("--u", "quantum.u", "anisotropy in [-1, 1]"),
    ("--beta", "quantum.beta", "inverse temperature"),
    ("--engine", "quantum.engine", "dense or stochastic"),
    ("--R", "quantum.R", "random vectors (stochastic)"),
    ("--degree", "quantum.degree", "Chebyshev degree (stochastic)"),
    ("--convention", "quantum.convention", "L = 2 wiring: doubled or simple"),
    ("--dense-cap", "quantum.dense_cap", "Hilbert dimension cap of the dense engine"),
    ("--stochastic-cap", "quantum.stochastic_cap", "Hilbert dimension cap of the stochastic engine"),
]

RPM_FLAGS: List[Tuple[str, str, str]] = [
    ("--d", "rpm.d", "dimension"),
    ("--L", "rpm.L", "even side length"),
    ("--N", "rpm.N", "number of colours"),
    ("--beta", "rpm.beta", "link fugacity"),
    ("--preset", "rpm.preset", "weight preset: loop_on or crossing_on"),
    ("--kind", "rpm.kind", "observable: spin_source or crossing"),
    ("--m-max", "rpm.m_max", "link cap per edge"),
    ("--engine", "rpm.engine", "enumerate or worm"),
    ("--sweeps", "rpm.sweeps", "worm sweeps per chain, burn-in included"),
    ("--burn-in", "rpm.burn_in", "worm sweeps discarded per chain"),
    ("--batches", "rpm.batches", "batches per chain for error bars"),
    ("--chains", "rpm.chains", "independent worm chains"),
    ("--convention", "rpm.convention", "L = 2 wiring: doubled or simple"),
]

INFRARED_FLAGS: List[Tuple[str, str, str]] = [
    ("--d", "infrared.d", "dimension"),
    ("--L", "infrared.L", "side length; omit for the extrapolated limit"),
    ("--tol", "infrared.tol", "extrapolation tolerance"),
    ("--S", "infrared.S", "spin"),
    ("--u", "infrared.u", "anisotropy in [-1, 0]"),
    ("--eps", "infrared.eps", "shell fraction for the threshold"),
    ("--convention", "infrared.convention", "threshold convention: vertex_sq or edge_sq"),
]

CHECK_FLAGS: List[Tuple[str, str, str]] = [
    ("--sigma-k", "check.sigma_k", "statistical slack multiplier"),
    ("--abs-tol", "check.abs_tol", "deterministic slack"),
    ("--M", "check.M", "uniform bound; defaults to S(S+1)/3 for quantum tables"),
    ("--eps", "check.eps", "shell fraction for the positivity report"),
    ("--random-q", "check.random_q", "number of random partition-lemma sets"),
]


def _add_flags(parser: argparse.ArgumentParser, flags: Sequence[Tuple[str, str, str]]) -> None:
    for flag, key, text in flags:
        parser.add_argument(flag, dest=key, default=None, help=text)


def _add_switch(parser: argparse.ArgumentParser, flag: str, key: str, text: str) -> None:
    parser.add_argument(flag, dest=key, action="store_const", const=True, default=None, help=text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="flat key = value config file")
    common.add_argument("--out-dir", dest="out_dir", default=None, help="output directory")
    common.add_argument("--seed", dest="seed", default=None, help="base seed")
    common.add_argument("--threads", dest="threads", default=None, help="worker threads")
    common.add_argument("--log-level", dest="log_level", default=None, help="console log level")

    parser = argparse.ArgumentParser(
        prog="rpmono", description="Reflection-positive models and their two-point functions"
    )
    parser.add_argument("--version", action="version", version=f"rpmono {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    quantum = sub.add_parser("quantum", parents=[common], help="quantum spin two-point table")
    _add_flags(quantum, QUANTUM_FLAGS)

    rpm = sub.add_parser("rpm", parents=[common], help="random path model two-point table")
    _add_flags(rpm, RPM_FLAGS)

    infrared = sub.add_parser("infrared", parents=[common], help="infrared-bound constants")
    _add_flags(infrared, INFRARED_FLAGS)
    _add_switch(infrared, "--extrapolate", "infrared.extrapolate", "add the L -> infinity row")
    _add_switch(infrared, "--min-spin", "infrared.min_spin", "scan for the minimal spin")

    check = sub.add_parser("check", parents=[common], help="check a two-point table")
    check.add_argument("table", type=Path, help="table CSV written by quantum or rpm")
    _add_flags(check, CHECK_FLAGS)
    _add_switch(check, "--vertex-rp", "check.vertex_rp", "reflections through vertices are available")

    selftest = sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    selftest.add_argument("--quick", action="store_true", help="skip the slow criteria")
    return parser


def overrides_from(args: argparse.Namespace) -> Dict[str, Any]:
    """Every flag that was given, keyed by its dotted config key."""
    skip = {"command", "config", "table", "quick", "log_level"}
    return {k: v for k, v in vars(args).items() if k not in skip and v is not None}


def _dispatch(args: argparse.Namespace, cfg: RunConfig) -> int:
    if args.command == "quantum":
        result = run_quantum(cfg)
    elif args.command == "rpm":
        result = run_rpm(cfg)
    elif args.command == "infrared":
        result = run_infrared(cfg)
    elif args.command == "check":
        result = run_check(args.table, cfg)
    else:
        report = run_selftest(quick=args.quick, seed=cfg.seed)
        print(json.dumps(report.model_dump(mode="json"), indent=2))
        return EXIT_OK if report.passed else EXIT_INEQUALITY
    print(result.path)
    return result.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE
    if args.log_level is not None:
        set_console_level(args.log_level)
    try:
        cfg = resolve_config(args.config, overrides_from(args))
        return _dispatch(args, cfg)
    except (CapacityExceededError, ConvergenceError) as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_CAPACITY
    except (ValueError, NonErgodicPresetError) as e:
        logger.error(f"{args.command}: {e}")
        sys.stderr.write(parser.format_usage())
        return EXIT_USAGE
