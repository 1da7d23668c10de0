"""``sidonbound`` command line.

Exit codes: 0 success, 1 invalid input, 2 verification failure,
3 internal inconsistency.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .cells import BoundParams, InvalidParams, LocateError, locate_cell, nonempty_cells
from .certfile import recheck, write_certificate
from .certify import DEFAULT_PLACES, InternalInconsistency, certify, two_window_certify
from .numerics import DecimalParseError, format_decimal, format_fraction, rational_from_decimal
from .search import SearchSchedule, local_search
from .segments import ceil_tau_k32, check_segments
from .sidon import (NotThinError, cutoff_vector, etsse_residual, generate_sidon,
                    pair_window_identity, read_set_file, s_g_statistic, v_statistic,
                    window_mean, write_set_file)
from .thin import thin_params, thin_report

EXIT_OK, EXIT_INPUT, EXIT_VERIFY, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("sidonbound")


class InputError(ValueError):
    pass


def read_keyvalue(path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InputError(f"{path}:{lineno}: expected 'key = value'")
        out[key.strip()] = value.strip()
    return out


def _decimals(text: str) -> list[str]:
    items = text.replace(",", " ").split()
    for item in items:
        rational_from_decimal(item)
    return items


def params_from_config(cfg: dict) -> BoundParams:
    missing = {"tau", "alphas"} - set(cfg)
    if missing:
        raise InputError(f"config is missing {sorted(missing)}")
    return BoundParams.from_decimals(
        _decimals(cfg["tau"])[0], _decimals(cfg["alphas"]),
        _decimals(cfg.get("cs", "")), int(cfg.get("g", "1")))


def config_text(params: BoundParams, extra: dict | None = None) -> str:
    """Inverse of :func:`params_from_config` for parameters read from decimals."""
    src: dict = {"tau": [], "alpha": [], "c": []}
    for kind, text in params.sources:
        src[kind].append(text)
    lines = [f"tau = {src['tau'][0]}", "alphas = " + " ".join(src["alpha"]),
             "cs = " + " ".join(src["c"]), f"g = {params.g}"]
    lines += [f"{k} = {v}" for k, v in (extra or {}).items()]
    return "\n".join(lines) + "\n"


def _summary(cert) -> list[str]:
    w = ", ".join(format_decimal(cert.witness[j], 5, "nearest") for j in sorted(cert.witness))
    return [
        "cells: " + " ".join(map(str, cert.cell_counts)),
        f"feasible_combinations: {cert.feasible_combinations}",
        f"feasible_cases: {cert.feasible_cases}",
        f"certified_bound: {cert.printed_bound}",
        f"witness: ({w})",
    ]


def _progress(done, total):
    log.info("combinations solved: %d/%d", done, total)


def cmd_certify(args) -> int:
    cfg = read_keyvalue(args.config)
    params = params_from_config(cfg)
    workers = args.workers if args.workers is not None else (
        int(cfg["workers"]) if "workers" in cfg else None)
    verbose = args.verbose or int(cfg.get("verbosity", "0")) > 0
    places = int(cfg.get("places", DEFAULT_PLACES))
    cert = certify(params, workers=workers, places=places, keep_cases=verbose,
                   keep_certificates=verbose, progress=_progress)
    output = args.output or cfg.get("output")
    text = write_certificate(cert, verbose=verbose)
    if output:
        Path(output).write_text(text)
        print("\n".join(_summary(cert)))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_two_window(args) -> int:
    cert = two_window_certify(args.tau, args.alpha1, args.alpha2, args.c, workers=args.workers,
                              places=args.places, keep_cases=args.verbose,
                              keep_certificates=args.verbose)
    text = write_certificate(cert, verbose=args.verbose)
    if args.output:
        Path(args.output).write_text(text)
        print("\n".join(_summary(cert)))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _g_range(text: str) -> range:
    lo, sep, hi = text.partition("..")
    try:
        return range(int(lo), int(hi if sep else lo) + 1)
    except ValueError:
        raise InputError(f"bad g range {text!r}; use n or n..m") from None


def cmd_thin_report(args) -> int:
    ok = True
    for g in _g_range(args.g):
        rep = thin_report(g)
        line = rep.row()
        if args.engine:
            bound = certify(thin_params(g), workers=1).certified_bound
            target = (2 - rep.eps_g) / g
            line += (f" engine_bound={format_decimal(bound, 8, 'up')}"
                     f" engine_le_target={bound <= target}")
        print(line)
        ok &= rep.identity_holds and rep.gap_positive and rep.c_in_range
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_analyze(args) -> int:
    s = read_set_file(args.set)
    T, g = args.T, args.g
    if T < 1:
        raise InputError("--T must be positive")
    residual = etsse_residual(s, T, g)
    lhs, rhs = pair_window_identity(s, T, g)
    print(f"k: {s.k}")
    print(f"diameter: {s.diameter}")
    print(f"T: {T}")
    print(f"mean: {format_fraction(window_mean(s, T))}")
    print(f"V: {format_fraction(v_statistic(s, T))}")
    print(f"S_g: {s_g_statistic(s, T, g)}")
    print(f"residual: {format_fraction(residual)}")
    print(f"pair_identity: {lhs} {rhs}")
    return EXIT_OK if residual == 0 and lhs == rhs else EXIT_VERIFY


def cmd_cutoffs(args) -> int:
    s = read_set_file(args.set)
    alphas = _decimals(args.alphas)
    T = args.T
    if T is None:
        if args.tau is None:
            raise InputError("give --T or --tau")
        T = ceil_tau_k32(rational_from_decimal(args.tau), s.k)
    w = cutoff_vector(s, T, alphas)
    print(f"T: {T}")
    print(f"cutoffs: {w}")
    if not args.c:
        return EXIT_OK
    params = BoundParams.from_decimals(args.tau or "1", alphas, _decimals(args.c))
    status = EXIT_OK
    for c in params.cs:
        cells = nonempty_cells(params, c)
        cell = locate_cell(cells, w)
        print(f"cell: {cell.describe()}")
        if args.check_segments:
            if args.tau is None:
                raise InputError("--check-segments needs --tau")
            rep = check_segments(s, params, c, cells)
            print(f"segments: c={format_fraction(c)} T={rep.T} T_short={rep.T_short} "
                  f"checked={rep.offsets_checked} violations={len(rep.violations)}")
            for v in rep.violations:
                print(v.to_text())
            if rep.violations:
                status = EXIT_VERIFY
    return status


def read_schedule(path) -> tuple[SearchSchedule, dict]:
    cfg = read_keyvalue(path)
    sched = SearchSchedule(
        initial_step=rational_from_decimal(cfg["initial_step"]),
        shrink_factor=rational_from_decimal(cfg.get("shrink_factor", "0.1")),
        min_step=rational_from_decimal(cfg.get("min_step", cfg["initial_step"])),
        max_rounds=int(cfg.get("max_rounds", "1")),
        mode=cfg.get("mode", "exact"),
        restarts=int(cfg.get("restarts", "0")),
        seed=int(cfg.get("seed", "0")),
    )
    return sched, cfg


def cmd_search(args) -> int:
    cfg = read_keyvalue(args.config)
    params = params_from_config(cfg)
    sched, scfg = read_schedule(args.schedule)
    workers = args.workers if args.workers is not None else (
        int(cfg["workers"]) if "workers" in cfg else None)
    res = local_search(params, sched, workers=workers)
    trace = args.trace or scfg.get("trace")
    if trace:
        res.write_trace(trace)
    p = res.params
    print(f"tau: {format_fraction(p.tau)}")
    print("alphas: " + " ".join(format_fraction(a) for a in p.alphas))
    print("cs: " + " ".join(format_fraction(c) for c in p.cs))
    print(f"probes: {len(res.trace)}")
    print(f"accepted: {sum(t.accepted for t in res.trace)}")
    print(f"certified_bound: {res.certificate.printed_bound}")
    if args.output:
        write_certificate(res.certificate, args.output)
    return EXIT_OK


def cmd_recheck(args) -> int:
    rep = recheck(Path(args.certificate).read_text())
    print("\n".join(rep.lines()))
    print("recheck: " + ("ok" if rep.ok else "FAILED"))
    return EXIT_OK if rep.ok else EXIT_VERIFY


def cmd_generate(args) -> int:
    s = generate_sidon(args.k, args.method, args.g)
    if args.output:
        write_set_file(args.output, s, f"{args.method} k={args.k} g={args.g}")
    else:
        print("\n".join(map(str, s.elements)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sidonbound", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--log", action="count", default=0, help="progress logging to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="certify a parameter set from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--output")
    p.add_argument("--workers", type=int)
    p.add_argument("--verbose", action="store_true", help="include the per-case table")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("two-window", help="two levels and one short window")
    for name in ("--tau", "--alpha1", "--alpha2", "--c"):
        p.add_argument(name, required=True)
    p.add_argument("--places", type=int, default=DEFAULT_PLACES)
    p.add_argument("--output")
    p.add_argument("--workers", type=int)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_two_window)

    p = sub.add_parser("thin-report", help="exact g-thin algebra for g in n..m")
    p.add_argument("--g", required=True)
    p.add_argument("--engine", action="store_true", help="also certify the g-thin parameters")
    p.set_defaults(func=cmd_thin_report)

    p = sub.add_parser("analyze", help="window statistics and the diameter identity")
    p.add_argument("--set", required=True)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--g", type=int, default=1)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("cutoffs", help="cutoff vector, its cell, segment checks")
    p.add_argument("--set", required=True)
    p.add_argument("--alphas", required=True)
    p.add_argument("--T", type=int)
    p.add_argument("--tau")
    p.add_argument("--c", help="window ratios whose cells are located")
    p.add_argument("--check-segments", action="store_true")
    p.set_defaults(func=cmd_cutoffs)

    p = sub.add_parser("search", help="coordinate descent from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--schedule", required=True)
    p.add_argument("--trace")
    p.add_argument("--output")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("recheck", help="re-verify a certificate without solving")
    p.add_argument("--certificate", required=True)
    p.set_defaults(func=cmd_recheck)

    p = sub.add_parser("generate", help="generate a Sidon or g-thin set")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--method", choices=("greedy", "exhaustive"), default="greedy")
    p.add_argument("--g", type=int, default=1)
    p.add_argument("--output")
    p.set_defaults(func=cmd_generate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.log else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (InternalInconsistency, LocateError) as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (InputError, InvalidParams, DecimalParseError, NotThinError, KeyError,
            ValueError, OSError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
