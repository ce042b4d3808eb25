"""Command line entry point: ``zrl <command> --config PATH [--out DIR] ...``.

Exit status is 0 when every non-informational check passes, 1 when one
fails (or a pipeline aborts), and 2 for configuration errors.  ZRL_THREADS
caps the thread pools of the numerical libraries; it must be set before
they load, so the heavy imports happen inside :func:`main`.
"""

from __future__ import annotations

import argparse
import os
import sys

COMMANDS = ("sieve", "verify-lemmas", "resonance-1line", "gcd-construct", "gcd-bruteforce", "strip-search",
            "constants")
_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMBA_NUM_THREADS")


def _apply_thread_cap() -> str | None:
    raw = os.environ.get("ZRL_THREADS")
    if raw is None:
        return None
    if not raw.isdigit() or int(raw) < 1:
        return f"ZRL_THREADS must be a positive integer, got {raw!r}"
    for var in _THREAD_VARS:
        os.environ[var] = raw
    return None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zrl", description="Numerical lab for large values of zeta and GCD sums.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", metavar="PATH", help="JSON run configuration (defaults apply when omitted)")
    ap.add_argument("--out", metavar="DIR", help="directory for the report JSON and CSV files")
    ap.add_argument("--prime-cache", metavar="PATH", help="binary sieve cache, created when missing")
    ap.add_argument("--max-enumerate", metavar="N", type=int, default=100_000,
                    help="largest construction expanded into explicit elements")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    err = _apply_thread_cap()
    if err:
        print(f"zrl: configuration error: {err}", file=sys.stderr)
        return 2

    from .errors import ConfigurationError, ZrlError
    from .runner import load_config, run

    try:
        if args.max_enumerate < 0:
            raise ConfigurationError("--max-enumerate must be >= 0")
        text = None
        if args.config:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigurationError(f"cannot read config: {exc}") from None
        cfg, params = load_config(args.command, text)
        rep = run(cfg, params, args.prime_cache, args.max_enumerate, args.out)
    except ConfigurationError as exc:
        print(f"zrl: configuration error: {exc}", file=sys.stderr)
        return 2
    except ZrlError as exc:
        print(f"zrl: {args.command} failed: {exc}", file=sys.stderr)
        return 1

    for c in rep.checks:
        tag = "info" if c.relation == "informational" else ("PASS" if c.passed else "FAIL")
        print(f"[{tag}] {c.name}")
    print(f"determinism hash: {rep.determinism_hash()}")
    return 0 if rep.all_pass else 1


if __name__ == "__main__":
    sys.exit(main())
