"""Command-line front end.

Every command prints one JSON document (or CSV for ``scan-alpha``) holding
the effective configuration next to the result. Exit codes: 1 usage,
2 validation, 3 authentication failed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .core import FrameAngle, StateValidationError, generalized_ghz, load_state, named_state
from .protocol import DEFAULT_THRESHOLD, PartyBehavior, hex_to_bits, run_qka, run_qpc
from .search import (
    SearchConfig,
    alpha_grid,
    alpha_scan,
    appendix_b_check,
    classify_collective,
    maximize_violation,
)
from .steering import IDS, evaluate_inequality, get_spec, lhs_soundness_check

EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_AUTH = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _resolve_seed(seed):
    if seed is not None:
        return seed
    env = os.environ.get("STEERKIT_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"STEERKIT_SEED must be an integer, got {env!r}") from None
    return 0


def _state_from_args(args):
    if args.state_file and args.state:
        raise UsageError("use either --state or --state-file, not both")
    if args.state_file:
        path = Path(args.state_file)
        if not path.is_file():
            raise StateValidationError(f"state file {str(path)!r} does not exist")
        return load_state(path), {"state_file": str(path)}
    if args.state is None and args.alpha is not None:
        return generalized_ghz(args.alpha), {"state": "generalized_ghz", "alpha": args.alpha}
    name, _, params = (args.state or "ghz").partition(":")
    try:
        values = [float(p) for p in params.split(",")] if params else []
    except ValueError:
        raise UsageError(f"state parameters must be numbers: {params!r}") from None
    if name.replace("-", "_") == "generalized_ghz" and not values:
        if args.alpha is None:
            raise UsageError("generalized_ghz needs --alpha")
        values = [args.alpha]
    state = named_state(name, *values)
    sel = {"state": name}
    if values:
        sel["params"] = values
    return state, sel


def _search_config(args) -> SearchConfig:
    return SearchConfig(
        grid=args.grid,
        refine_iters=args.refine_iters,
        independent_frames=args.independent_frames,
    )


def _frame(args) -> FrameAngle:
    return FrameAngle(args.theta, args.phi)


# commands


def cmd_evaluate(args):
    state, sel = _state_from_args(args)
    spec = get_spec(args.inequality)
    rep = evaluate_inequality(state, spec, _frame(args))
    config = {**sel, "inequality": spec.id, "theta": round(args.theta, 6), "phi": round(args.phi, 6)}
    return {"command": "evaluate", "config": config, "result": rep.to_dict()}, 0


def cmd_scan_alpha(args):
    spec = get_spec(args.inequality)
    cfg = _search_config(args)
    alphas = alpha_grid(args.steps, args.spacing)
    if args.optimize_frame:
        curve = alpha_scan(spec, "optimized", alphas, config=cfg)
    else:
        curve = alpha_scan(spec, "fixed", alphas, frame=_frame(args))
    config = {
        "inequality": spec.id,
        "steps": args.steps,
        "spacing": args.spacing,
        "policy": curve.policy,
        "search": cfg.to_dict() if args.optimize_frame else None,
    }
    if args.format == "csv":
        return curve.to_csv(), 0
    interval = curve.violation_interval()
    result = {
        "samples": [{"alpha": a, "lhs": l, "bound": b} for a, l, b in curve.samples],
        "violation_interval": list(interval) if interval else None,
    }
    return {"command": "scan-alpha", "config": config, "result": result}, 0


def cmd_maximize(args):
    state, sel = _state_from_args(args)
    cfg = _search_config(args)
    ids = [get_spec(args.inequality).id] if args.inequality else list(IDS)
    results = [maximize_violation(state, i, cfg).to_dict() for i in ids]
    config = {**sel, "inequalities": ids, "search": cfg.to_dict()}
    return {"command": "maximize", "config": config, "result": results}, 0


def cmd_classify(args):
    state, sel = _state_from_args(args)
    cfg = _search_config(args)
    res = classify_collective(state, cfg)
    return {"command": "classify", "config": {**sel, "search": cfg.to_dict()}, "result": res.to_dict()}, 0


def cmd_appendix_b(args):
    return {"command": "appendix-b", "config": {}, "result": appendix_b_check()}, 0


def cmd_lhs_check(args):
    seed = _resolve_seed(args.seed)
    res = lhs_soundness_check(args.trials, seed)
    config = {"trials": args.trials, "seed": seed, "frames_per_trial": res["frames_per_trial"]}
    return {"command": "lhs-check", "config": config, "result": res}, 0


def cmd_qka(args):
    seed = _resolve_seed(args.seed)
    state = None
    sel = {"state": "ghz"}
    if args.state or args.state_file or args.alpha is not None:
        state, sel = _state_from_args(args)
    res = run_qka(
        args.rounds,
        state=state,
        bob=PartyBehavior.parse(args.bob),
        charlie=PartyBehavior.parse(args.charlie),
        mode=args.mode,
        seed=seed,
        threshold=args.threshold,
        frame=_frame(args),
        key_role=args.key_role,
    )
    if args.transcript:
        Path(args.transcript).write_text(res.transcript.to_jsonl())
    doc = res.to_dict()
    doc["config"] = {**doc["config"], **sel}
    return {"command": "qka", **doc}, 0 if res.authenticated else EXIT_AUTH


def cmd_qpc(args):
    seed = _resolve_seed(args.seed)
    if args.secret_b is None or args.secret_c is None:
        raise UsageError("qpc needs --secret-b and --secret-c")
    sb, sc = hex_to_bits(args.secret_b), hex_to_bits(args.secret_c)
    total = args.total if args.total is not None else 4 * len(sb)
    res = run_qpc(
        sb,
        sc,
        total,
        args.check,
        bob=PartyBehavior.parse(args.bob),
        charlie=PartyBehavior.parse(args.charlie),
        seed=seed,
        mode=args.mode,
        threshold=args.threshold,
    )
    doc = res.to_dict()
    return {"command": "qpc", **doc}, 0 if res.authenticated else EXIT_AUTH


COMMANDS = {
    "evaluate": cmd_evaluate,
    "scan-alpha": cmd_scan_alpha,
    "maximize": cmd_maximize,
    "classify": cmd_classify,
    "appendix-b": cmd_appendix_b,
    "lhs-check": cmd_lhs_check,
    "qka": cmd_qka,
    "qpc": cmd_qpc,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--output", help="write the result here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=None, help="defaults to $STEERKIT_SEED, then 0")

    state = _Parser(add_help=False)
    state.add_argument("--state", help="named state, optionally name:p1,p2,...")
    state.add_argument("--state-file", help="JSON state document")
    state.add_argument("--alpha", type=float, help="generalized GHZ amplitude")

    search = _Parser(add_help=False)
    search.add_argument("--grid", type=int, default=SearchConfig.grid)
    search.add_argument("--refine-iters", type=int, default=SearchConfig.refine_iters)
    search.add_argument("--independent-frames", action="store_true")

    def frame(p, theta=0.0, phi=0.0):
        p.add_argument("--theta", type=float, default=theta, help="radians")
        p.add_argument("--phi", type=float, default=phi, help="radians")

    parser = _Parser(prog="steerkit", description="Collective steering toolkit.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("evaluate", parents=[common, state], help="lhs of one inequality at a frame")
    p.add_argument("--inequality", default="s1-diag")
    frame(p)

    p = sub.add_parser("scan-alpha", parents=[common, search], help="lhs along the generalized GHZ family")
    p.add_argument("--inequality", default="s1-diag")
    p.add_argument("--steps", type=int, default=201)
    p.add_argument("--optimize-frame", action="store_true")
    p.add_argument("--spacing", choices=("angle", "uniform"), default="angle", help="alpha = sin(t) or linspace")
    frame(p, math.pi / 2, 0.0)

    p = sub.add_parser("maximize", parents=[common, state, search], help="optimize frames")
    p.add_argument("--inequality", default=None, help="omit for all ten")

    sub.add_parser("classify", parents=[common, state, search], help="collective-steering label")
    sub.add_parser("appendix-b", parents=[common], help="fixed-frame maxima table")

    p = sub.add_parser("lhs-check", parents=[common], help="hidden-state soundness search")
    p.add_argument("--trials", type=int, default=1000)

    protocol = _Parser(add_help=False)
    protocol.add_argument("--bob", default="honest")
    protocol.add_argument("--charlie", default="honest")
    protocol.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    protocol.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)

    p = sub.add_parser("qka", parents=[common, state, protocol], help="key authentication run")
    p.add_argument("--rounds", type=int, default=30000)
    p.add_argument("--key-role", choices=("escrow", "collective"), default="escrow")
    p.add_argument("--transcript", help="write per-round JSON lines here")
    frame(p, math.pi / 2, 0.0)

    p = sub.add_parser("qpc", parents=[common, protocol], help="private comparison run")
    p.add_argument("--secret-b", help="hexadecimal, most significant bit first")
    p.add_argument("--secret-c", help="hexadecimal, most significant bit first")
    p.add_argument("--total", type=int, default=None, help="GHZ count L (default 4 x secret bits)")
    p.add_argument("--check", type=int, default=None, help="check count l (default from 3:1 bias)")
    return parser


def _emit(payload, args) -> None:
    if isinstance(payload, str):
        text = payload
    else:
        text = json.dumps(payload, indent=2, allow_nan=False) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.format == "csv" and args.command != "scan-alpha":
            raise UsageError("csv output is only available for scan-alpha")
        payload, code = COMMANDS[args.command](args)
        _emit(payload, args)
    except UsageError as exc:
        print(f"steerkit {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StateValidationError, ValueError) as exc:
        print(f"steerkit {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if code == EXIT_AUTH:
        print(f"steerkit {args.command}: authentication failed", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
