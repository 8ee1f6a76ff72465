"""Command-line front end: ``cmibounds sweep | verify | bound``.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from contextlib import contextmanager
from dataclasses import replace

from . import gaussian_mc as gm
from . import sweep as sw
from . import verify as vf

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _name_list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="base seed for Monte Carlo (default 0)")
    parser.add_argument("--out", help="output path (default: standard output)")
    parser.add_argument("--mc-outer", type=int, default=gm.McConfig.outer_samples,
                        help="outer Monte Carlo draws")
    parser.add_argument("--mc-inner", type=int, default=gm.McConfig.inner_samples,
                        help="inner Monte Carlo draws")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cmibounds", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log skipped grid points and progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="evaluate bounds over a grid and write CSV")
    p_sweep.add_argument("--figure", choices=sorted(sw.PRESETS) + ["custom"], default="custom")
    p_sweep.add_argument("--family", choices=sw.FAMILIES, help="problem family (custom sweeps)")
    p_sweep.add_argument("--bounds", type=_name_list, help="comma-separated bound names")
    p_sweep.add_argument("--n-grid", type=_int_list)
    p_sweep.add_argument("--m-grid", type=_int_list)
    p_sweep.add_argument("--p", type=float)
    p_sweep.add_argument("--mu", type=float)
    p_sweep.add_argument("--sigma", type=float)
    p_sweep.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    _common(p_sweep)

    p_verify = sub.add_parser("verify", help="run the self-checks")
    p_verify.add_argument("--level", choices=("fast", "full"), default="fast")
    _common(p_verify)

    p_bound = sub.add_parser("bound", help="evaluate a single bound")
    p_bound.add_argument("--family", choices=sw.FAMILIES, required=True)
    p_bound.add_argument("--kind", required=True)
    p_bound.add_argument("--n", type=int, required=True)
    p_bound.add_argument("--m", type=int, default=1)
    p_bound.add_argument("--p", type=float, default=0.5)
    p_bound.add_argument("--mu", type=float, default=0.0)
    p_bound.add_argument("--sigma", type=float, default=1.0)
    _common(p_bound)
    return parser


@contextmanager
def _output(path: str | None):
    if path is None:
        yield sys.stdout
        return
    with open(path, "w", newline="") as fh:
        yield fh


def _mc(args) -> gm.McConfig:
    return gm.McConfig(outer_samples=args.mc_outer, inner_samples=args.mc_inner, seed=args.seed)


def _sweep_spec(args) -> sw.SweepSpec:
    overrides = dict(n_grid=args.n_grid, m_grid=args.m_grid, p=args.p, mu=args.mu, sigma=args.sigma,
                     bounds=args.bounds, workers=args.workers, mc=_mc(args))
    if args.figure == "custom":
        if args.family is None or args.n_grid is None or args.bounds is None:
            raise ValueError("custom sweeps need --family, --n-grid and --bounds")
        return sw.SweepSpec(args.family, **{k: v for k, v in overrides.items() if v is not None})
    if args.family is not None and args.family != sw.PRESETS[args.figure].family:
        raise ValueError(f"{args.figure} uses the {sw.PRESETS[args.figure].family} family")
    spec = sw.preset(args.figure, **overrides)
    if args.m_grid is not None and spec.m_ratio is not None:
        spec = replace(spec, m_ratio=None)
    return spec


def _run_sweep(args) -> int:
    rows = sw.run_sweep(_sweep_spec(args))
    with _output(args.out) as fh:
        sw.write_csv(rows, fh)
    return EXIT_OK


def _run_verify(args) -> int:
    checks = vf.run_checks(args.level, _mc(args))
    text = vf.report(checks)
    with _output(args.out) as fh:
        fh.write(text + "\n")
    if args.out:
        print(text.splitlines()[-1])
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAILED


def _run_bound(args) -> int:
    if args.kind not in sw.FAMILY_BOUNDS[args.family]:
        raise ValueError(f"{args.kind} is not available for {args.family}; "
                         f"choose from {', '.join(sw.FAMILY_BOUNDS[args.family])}")
    spec = sw.SweepSpec(args.family, (args.n,), (args.m,), (args.kind,), args.p, args.mu, args.sigma, mc=_mc(args))
    row = sw.evaluate(spec, args.kind, args.n, args.m)
    if row is None:
        raise ValueError(f"{args.kind} is not defined at n={args.n}, m={args.m}")
    with _output(args.out) as fh:
        sw.write_csv([row], fh)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    handlers = {"sweep": _run_sweep, "verify": _run_verify, "bound": _run_bound}
    try:
        return handlers[args.command](args)
    except ValueError as exc:
        print(f"cmibounds {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"cmibounds {args.command}: cannot write {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
