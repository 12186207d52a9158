"""Command-line entry point: ``tcjam {simulate,bound,dmin,validate}``.

Errors are printed to stderr as one JSON line and mapped to exit codes
0 (success), 2 (configuration error) and 3 (runtime error).
"""

import argparse
import json
import sys
from pathlib import Path

from . import bounds
from .interleavers import InterleaverDef
from .sim import ConfigError, SweepSpec, run_sweep, to_csv, with_seed
from .turbo import DEFAULT_INTERLEAVERS, TurboSpec, estimate_dmin

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": " ".join(str(message).split())}), file=sys.stderr)
    return code


def _global_flags(p, suppress: bool):
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int, default=default, help="override the config seed")
    p.add_argument("--workers", type=int, default=argparse.SUPPRESS if suppress else 1,
                   help="worker processes (results do not depend on this)")
    p.add_argument("--out", default=default, help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tcjam", description="Coded BPSK over jamming channels: Monte Carlo sweeps and bounds.")
    _global_flags(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run a sweep described by a JSON config")
    p.add_argument("config")
    p.add_argument("--quiet", action="store_true", help="no progress lines on stderr")
    _global_flags(p, suppress=True)

    p = sub.add_parser("bound", help="evaluate SP59, or ESPLB when --ebj0/--rho are given")
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ebn0", type=float, required=True, help="Eb/N0 in dB")
    p.add_argument("--ebj0", type=float, help="Eb/J0 in dB")
    p.add_argument("--rho", type=float, help="jammer duty cycle")
    p.add_argument("--method", choices=["adaptive", "fixed"], default="adaptive")
    _global_flags(p, suppress=True)

    p = sub.add_parser("dmin", help="distance estimate for a turbo config")
    p.add_argument("config")
    _global_flags(p, suppress=True)

    p = sub.add_parser("validate", help="check a sweep config without running it")
    p.add_argument("config")
    _global_flags(p, suppress=True)
    return ap


def _emit(text: str, out):
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_simulate(args) -> int:
    spec = SweepSpec.from_file(args.config)
    if args.seed is not None:
        spec = with_seed(spec, args.seed)
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")

    def progress(r):
        if not args.quiet:
            print(f"{r.sweep_var}={r.value_db:g} frames={r.frames} cer={r.cer:.3e} fer={r.fer:.3e} "
                  f"({r.wall_time:.1f}s)", file=sys.stderr)

    results = run_sweep(spec, args.workers, progress=progress)
    _emit(to_csv(results, spec.bounds), args.out)
    return EXIT_OK


def _cmd_bound(args) -> int:
    if (args.ebj0 is None) != (args.rho is None):
        raise ConfigError("--ebj0 and --rho must be given together")
    try:
        if args.ebj0 is None:
            v = bounds.sp59(args.rate, args.n, args.ebn0, args.method)
        else:
            v = bounds.esplb(args.rate, args.n, args.ebn0, args.ebj0, args.rho, args.method)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _emit(f"{v!r}\n", args.out)
    return EXIT_OK


def load_turbo_config(path) -> tuple:
    """Read ``{"k", "interleaver", "puncture", "max_input_weight", "post_puncture"}``."""
    try:
        d = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise ConfigError("turbo config must be a JSON object")
    extra = set(d) - {"k", "interleaver", "puncture", "max_input_weight", "post_puncture"}
    if extra:
        raise ConfigError(f"unknown key(s) in turbo config: {', '.join(sorted(extra))}")
    try:
        k = int(d.get("k", 64))
        il = d.get("interleaver") or DEFAULT_INTERLEAVERS.get(k)
        if il is None:
            raise ConfigError(f"no default interleaver for k={k}")
        spec = TurboSpec(k, InterleaverDef.from_dict({"k": k, **il}),
                         puncture=None if d.get("puncture") is None else tuple(d["puncture"]))
    except (ValueError, TypeError, KeyError, OSError) as exc:
        raise ConfigError(f"invalid turbo config: {exc}") from exc
    return spec, int(d.get("max_input_weight", 3)), bool(d.get("post_puncture", True))


def _cmd_dmin(args) -> int:
    spec, w, post = load_turbo_config(args.config)
    try:
        rep = estimate_dmin(spec, w, post)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = {"k": spec.k, "n_pre": spec.n_pre, "n_post": spec.n_post, "d_min_upper": rep.d_min_upper,
           "A_min": rep.A_min, "w_min": rep.w_min, "max_input_weight": rep.search_input_weight_cap,
           "post_puncture": rep.post_puncture, "is_upper_bound": rep.is_upper_bound, "witness": list(rep.witness)}
    _emit(json.dumps(out) + "\n", args.out)
    return EXIT_OK


def _cmd_validate(args) -> int:
    spec = SweepSpec.from_file(args.config)
    _emit(f"ok {len(spec.grid)} point(s)\n", args.out)
    return EXIT_OK


COMMANDS = {"simulate": _cmd_simulate, "bound": _cmd_bound, "dmin": _cmd_dmin, "validate": _cmd_validate}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        return _fail("usage", exc, EXIT_CONFIG)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        return _fail("config", exc, EXIT_CONFIG)
    except bounds.BoundError as exc:
        return _fail("runtime", exc, EXIT_RUNTIME)
    except (OSError, RuntimeError, ValueError, ArithmeticError) as exc:
        return _fail("runtime", exc, EXIT_RUNTIME)


if __name__ == "__main__":
    sys.exit(main())
