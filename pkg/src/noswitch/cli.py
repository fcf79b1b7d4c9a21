"""Command-line front end.  Every subcommand writes CSV.

Exit codes: 0 success, 1 usage error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import bb84, verify
from .attacks import DEFAULT_SQUEEZING, AttackConfig, AttackKind, epr_resource, evaluate_attack, optimize_attack
from .keyrate import Variant, secret_key_rate
from .protocol import ChannelParams, SourceParams

KEYRATE_COLUMNS = ["eta", "v_n", "v_a", "delta_i_noswitch", "delta_i_switch", "v_ab", "v_eb_bound"]
ATTACK_COLUMNS = [
    "eta", "v_n", "attack_kind", "epsilon_star", "v_added",
    "delta_i_attack", "delta_i_bound", "gap", "feasible",
]
VERIFY_COLUMNS = ["seed", "check", "analytic", "estimate", "std_error", "se_multiple", "status"]
BB84_COLUMNS = ["variant", "trials", "sift_fraction", "error_rate", "bits_per_signal"]

EXIT_USAGE = 1
EXIT_VERIFY_FAILED = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        if value == 0:
            return "0"
        return f"{value:.9g}"
    return str(value)


def render_csv(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _parse_cell(text: str):
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_csv(source: str | Path) -> list[dict]:
    """Parse CSV written by this tool (a path, or the text itself)."""
    text = Path(source).read_text() if isinstance(source, Path) or "\n" not in str(source) else str(source)
    return [{k: _parse_cell(v) for k, v in row.items()} for row in csv.DictReader(io.StringIO(text))]


def _emit(text: str, output: str | None) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {output}: {exc.strerror}") from None


def _grid(single, lo, hi, steps, name) -> list[float]:
    if single is not None:
        if any(v is not None for v in (lo, hi, steps)):
            raise UsageError(f"give either --{name} or a --{name}-min/max/steps range, not both")
        return [single]
    if lo is None or hi is None:
        raise UsageError(f"--{name} or --{name}-min and --{name}-max are required")
    steps = 2 if steps is None else steps
    if steps < 1:
        raise UsageError(f"--{name}-steps must be >= 1")
    if hi < lo:
        raise UsageError(f"--{name}-max < --{name}-min")
    if steps == 1:
        if lo != hi:
            raise UsageError(f"--{name}-steps 1 needs --{name}-min == --{name}-max")
        return [lo]
    return [float(v) for v in np.linspace(lo, hi, steps)]


def _channel_grids(args, open_eta: bool) -> tuple[list[float], list[float]]:
    etas = _grid(args.eta, args.eta_min, args.eta_max, args.eta_steps, "eta")
    v_ns = _grid(args.vn, args.vn_min, args.vn_max, args.vn_steps, "vn")
    for eta in etas:
        if open_eta and not 0.0 < eta < 1.0:
            raise UsageError(f"eta = {eta} must lie in (0, 1) for attacks")
        if not 0.0 <= eta <= 1.0:
            raise UsageError(f"eta = {eta} must lie in [0, 1]")
    for v in v_ns:
        if not v >= 1.0:
            raise UsageError(f"V_N = {v} must be >= 1")
    if not args.va >= 1.0:
        raise UsageError("--va must be >= 1")
    return etas, v_ns


def cmd_keyrate(args) -> int:
    etas, v_ns = _channel_grids(args, open_eta=False)
    src = SourceParams.coherent(args.va)
    rows = []
    for eta in etas:
        for v_n in v_ns:
            ch = ChannelParams(eta, v_n)
            ns = secret_key_rate(src, ch, Variant.NO_SWITCHING)
            sw = secret_key_rate(src, ch, Variant.SWITCHING)
            rows.append([eta, v_n, args.va, ns.delta_i, sw.delta_i, ns.v_ab.plus, ns.v_eb.plus])
    _emit(render_csv(KEYRATE_COLUMNS, rows), args.output)
    return 0


def _squeezing_grid(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"--vsqz must be a comma-separated list of numbers, got {text!r}") from None
    if not vals or any(not v > 0 for v in vals):
        raise UsageError("--vsqz values must be positive")
    return vals


def cmd_attack(args) -> int:
    etas, v_ns = _channel_grids(args, open_eta=True)
    kinds = [AttackKind.COHERENT_FF, AttackKind.ENTANGLEMENT_FF] if args.kind == "both" else [AttackKind(args.kind)]
    grid = _squeezing_grid(args.vsqz)
    if args.epsilon is not None and not 0.0 < args.epsilon < 1.0:
        raise UsageError("--epsilon must lie in (0, 1)")
    src = SourceParams.coherent(args.va)
    rows = []
    for eta in etas:
        for v_n in v_ns:
            ch = ChannelParams(eta, v_n)
            for kind in kinds:
                if args.epsilon is None:
                    out = optimize_attack(src, ch, kind, grid)
                else:
                    r = 1.0 if kind is AttackKind.COHERENT_FF else grid[0]
                    s1, s2 = epr_resource(r)
                    out = evaluate_attack(src, ch, AttackConfig(args.epsilon, s1, s2), kind, r)
                rows.append([
                    eta, v_n, kind.value, out.epsilon_star, out.v_added.plus,
                    out.delta_i_attack, out.delta_i_bound, out.gap, out.feasible,
                ])
    _emit(render_csv(ATTACK_COLUMNS, rows), args.output)
    return 0


def cmd_verify(args) -> int:
    if args.n < 10_000:
        raise UsageError("--n must be >= 10000")
    seeds = args.seed
    seen = set()
    for s in seeds:
        if s in seen:
            print(f"warning: seed {s} given more than once; its checks repeat identically", file=sys.stderr)
        seen.add(s)
    rows = []
    all_passed = True
    for s in seeds:
        for r in verify.run_oracle_suite(args.n, s, corrupt=args.corrupt):
            all_passed &= r.passed
            rows.append([s, r.name, r.analytic, r.estimate.value, r.estimate.se, r.se_multiple, "pass" if r.passed else "FAIL"])
    _emit(render_csv(VERIFY_COLUMNS, rows), args.output)
    return 0 if all_passed else EXIT_VERIFY_FAILED


def cmd_bb84(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if not 0.0 <= args.channel_error <= 1.0:
        raise UsageError("--channel-error must lie in [0, 1]")
    report = bb84.compare_protocols(args.trials, args.seed, args.channel_error)
    rows = [[r.variant, r.trials, r.sift_fraction, r.error_rate, r.bits_per_signal] for r in report.rows()]
    _emit(render_csv(BB84_COLUMNS, rows), args.output)
    return 0


def _add_channel_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eta", type=float, help="channel transmission")
    p.add_argument("--eta-min", type=float)
    p.add_argument("--eta-max", type=float)
    p.add_argument("--eta-steps", type=int)
    p.add_argument("--vn", type=float, help="channel noise variance (vacuum = 1)")
    p.add_argument("--vn-min", type=float)
    p.add_argument("--vn-max", type=float)
    p.add_argument("--vn-steps", type=int)
    p.add_argument("--va", type=float, default=100.0, help="Alice's total variance (default 100)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="noswitch", description="No-switching coherent-state QKD: rates, attacks, checks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("keyrate", help="no-switching and switching key rates over an (eta, V_N) grid")
    _add_channel_flags(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_keyrate)

    p = sub.add_parser("attack", help="optimised feed-forward attacks")
    _add_channel_flags(p)
    p.add_argument("--kind", choices=["coherent", "entanglement", "both"], default="both")
    p.add_argument("--vsqz", default=",".join(f"{v:g}" for v in DEFAULT_SQUEEZING),
                   help="Eve's EPR squeezing levels, comma-separated")
    p.add_argument("--epsilon", type=float, help="fix Eve's tap transmittance instead of optimising")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("verify", help="Monte Carlo oracle checks")
    p.add_argument("--n", type=int, default=verify.DEFAULT_N)
    p.add_argument("--seed", type=int, nargs="+", default=[verify.DEFAULT_SEED])
    p.add_argument("--corrupt", help=argparse.SUPPRESS)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bb84", help="BB84 with and without basis switching")
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=bb84.DEFAULT_SEED)
    p.add_argument("--channel-error", type=float, default=0.0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bb84)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, KeyError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(f"noswitch {args.command}: error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
