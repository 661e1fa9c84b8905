"""Command-line interface: ingest, fit, thermo, compare, plot-data.

Exit status is 0 when the computation completed (a non-converged fit still
counts), 2 for usage and validation errors, 1 for runtime failures.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .corpus import (ALPHABETS, DistributionFormatError, TokenPolicy, distill, distribution_to_json,
                     get_alphabet, load_distribution, save_distribution, tokenize)
from .fitting import FitConfig, FitError, SingularSystemError, fit_ma, fit_smma
from .model import SmmaParams
from .reporting import (comparison_to_dict, dump_fit_report, dump_thermo, emit_plot_data,
                        format_comparison_tsv, load_fit_report, load_thermo, render_comparison,
                        render_table1, to_json)
from .thermo import DivergentSeriesError, ThermoError, compare, thermo_report

log = logging.getLogger("menzerath")


class UsageError(Exception):
    """Bad invocation or invalid input; exit status 2."""


def _say(args, text=""):
    if not args.quiet:
        print(text)


def _stem(path) -> str:
    name = Path(path).name
    for suffix in (".thermo.json", ".smma.json", ".ma.json", ".json", ".tsv"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return Path(path).stem


def _load_dist(path):
    try:
        return load_distribution(path)
    except FileNotFoundError:
        raise UsageError(f"cannot read distribution file {path}")
    except DistributionFormatError as exc:
        raise UsageError(str(exc))


def _load_json_input(loader, path, what):
    try:
        return loader(path)
    except OSError:
        raise UsageError(f"cannot read {what} {path}")
    except (ValueError, KeyError) as exc:
        raise UsageError(f"invalid {what} {path}: {exc}")


def _resolve_omega(d, args) -> int | None:
    omega = getattr(args, "omega", None)
    if omega is not None:
        if d.omega is not None and d.omega != omega and not args.quiet:
            log.warning("--omega %d overrides omega=%d from %s", omega, d.omega, d.source_label or "file")
        return omega
    return d.omega


def _fit_config(args) -> FitConfig:
    return FitConfig(
        max_iterations=args.max_iterations,
        jacobian_mode="finite_difference" if args.jacobian == "fd" else "analytic",
        damping_mode=args.damping,
        weighting=args.weighting,
    )


# -- subcommands ------------------------------------------------------------------

def cmd_ingest(args):
    try:
        alphabet = get_alphabet(args.alphabet, letters=args.letters, omega=args.omega)
    except KeyError:
        raise UsageError(f"unknown alphabet {args.alphabet!r} (known: {', '.join(sorted(ALPHABETS))})")
    except ValueError as exc:
        raise UsageError(str(exc))
    if not alphabet.letters:
        raise UsageError("ingest needs a letter set: use --alphabet or --letters")
    policy = TokenPolicy(case_fold=not args.no_fold, non_letter=args.policy)
    words = []
    for path in args.files:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise UsageError(f"cannot read {path}: {exc}")
        words.extend(tokenize(text, alphabet, policy))
    label = args.label if args.label is not None else ",".join(Path(p).stem for p in args.files)
    d = distill(words, alphabet, label)
    if not d.states:
        log.warning("no words found; the distribution has zero states")
    out = args.output or "distribution." + args.format
    if args.format == "json":
        Path(out).write_text(distribution_to_json(d), encoding="utf-8", newline="\n")
    else:
        save_distribution(d, out)
    mean = f"{d.L / d.N:.4f}" if d.N else "n/a"
    _say(args, f"N={d.N}  L={d.L}  mean_length={mean}")
    _say(args, f"wrote {out}")
    return 0


def cmd_fit(args):
    if args.format != "json":
        raise UsageError("fit reports are written as JSON only")
    d = _load_dist(args.distribution)
    omega = _resolve_omega(d, args)
    if args.model in ("smma", "both") and omega is None:
        raise UsageError("SMMA fit needs omega: the file has no alphabet metadata; pass --omega")
    cfg = _fit_config(args)
    outdir = Path(args.output or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    stem = _stem(args.distribution)
    label = d.source_label or stem
    reports = {}
    if args.model in ("ma", "both"):
        reports["ma"] = fit_ma(d, cfg)
    if args.model in ("smma", "both"):
        reports["smma"] = fit_smma(d, cfg, omega=omega)
    for key, rep in reports.items():
        if not rep.converged:
            log.warning("%s fit did not converge after %d iterations", rep.model_kind, rep.iterations)
        path = dump_fit_report(rep, outdir / f"{stem}.{key}.json")
        _say(args, rep.summary(label))
        log.info("wrote %s", path)
    if args.table and len(reports) == 2:
        _say(args)
        _say(args, render_table1(d, reports["ma"], reports["smma"]).rstrip("\n"))
    return 0


def _smma_params_for(d, args) -> SmmaParams:
    omega = _resolve_omega(d, args)
    if args.params is not None:
        if omega is None:
            raise UsageError("--params needs omega: the file has no alphabet metadata; pass --omega")
        phi, alpha, theta = args.params
        return SmmaParams(phi, alpha, theta, omega)
    if args.smma_report:
        rep = _load_json_input(load_fit_report, args.smma_report, "fit report")
        if rep.model_kind != "SMMA":
            raise UsageError(f"{args.smma_report} is a {rep.model_kind} report, need SMMA")
        return rep.params
    if omega is None:
        raise UsageError("SMMA fit needs omega: the file has no alphabet metadata; pass --omega")
    rep = fit_smma(d, _fit_config(args), omega=omega)
    if not rep.converged:
        log.warning("SMMA fit did not converge after %d iterations", rep.iterations)
    return rep.params


def cmd_thermo(args):
    if args.format != "json":
        raise UsageError("thermo reports are written as JSON only")
    d = _load_dist(args.distribution)
    if not d.states:
        raise UsageError("distribution has no states")
    p = _smma_params_for(d, args)
    l_max = args.lmax
    if l_max not in (None, "auto"):
        try:
            l_max = int(l_max)
        except ValueError:
            raise UsageError(f"--lmax must be an integer or 'auto', got {l_max!r}")
    if l_max == "auto" and not p.normalizable:
        log.warning("theta=%.4f <= ln(omega): partition sum diverges; using observed max length %d",
                    p.theta, d.max_length)
        l_max = None
    basis = "predicted_counts" if args.entropy_basis == "predicted" else "observed_counts"
    try:
        rep = thermo_report(d, p, l_max, basis)
    except DivergentSeriesError as exc:
        raise UsageError(str(exc))
    out = args.output or f"{_stem(args.distribution)}.thermo.json"
    dump_thermo(rep, out)
    _say(args, f"T={rep.temperature:.4f}  mu={rep.chemical_potential:.4f}  S={rep.entropy:.4f}  "
               f"F={rep.free_energy:.4f}  mean_length={rep.mean_length:.4f}  (l_max={rep.l_max_used})")
    return 0


def cmd_compare(args):
    if len(args.reports) < 2:
        raise UsageError("compare needs at least two thermo reports")
    labels = args.labels or [_stem(p) for p in args.reports]
    if len(labels) != len(args.reports):
        raise UsageError("--labels must name every report")
    reports = [(label, _load_json_input(load_thermo, path, "thermo report"))
               for label, path in zip(labels, args.reports)]
    table = compare(reports)
    if args.output:
        text = to_json(comparison_to_dict(table)) if args.format == "json" else format_comparison_tsv(table)
        Path(args.output).write_text(text, encoding="utf-8", newline="\n")
    _say(args, render_comparison(table).rstrip("\n"))
    return 0


def cmd_plot_data(args):
    d = _load_dist(args.distribution)
    if not d.states:
        raise UsageError("distribution has no states; nothing to plot")
    if args.ma_report:
        ma = _load_json_input(load_fit_report, args.ma_report, "fit report")
    else:
        ma = fit_ma(d, _fit_config(args))
    if args.smma_report:
        smma = _load_json_input(load_fit_report, args.smma_report, "fit report")
    else:
        omega = _resolve_omega(d, args)
        if omega is None:
            raise UsageError("SMMA fit needs omega: pass --omega or --smma-report")
        smma = fit_smma(d, _fit_config(args), omega=omega)
    if (ma.model_kind, smma.model_kind) != ("MA", "SMMA"):
        raise UsageError("--ma-report must hold an MA fit and --smma-report an SMMA fit")
    if not args.grid_step > 0:
        raise UsageError("--grid-step must be positive")
    out = args.output or f"{_stem(args.distribution)}.plot.tsv"
    try:
        emit_plot_data(d, ma, smma, out, args.grid_step, args.timestamp)
    except ValueError as exc:
        raise UsageError(str(exc))
    _say(args, f"wrote {out}")
    return 0


# -- parser -------------------------------------------------------------------------

def _fit_options(p):
    g = p.add_argument_group("fit options")
    g.add_argument("--omega", type=int, help="structural degeneracy (alphabet size)")
    g.add_argument("--max-iterations", type=int, default=1000)
    g.add_argument("--jacobian", choices=("analytic", "fd"), default="analytic")
    g.add_argument("--damping", choices=("marquardt", "identity"), default="marquardt")
    g.add_argument("--weighting", choices=("unweighted", "poisson"), default="unweighted")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", help="output file (directory for `fit`)")
    common.add_argument("--format", choices=("tsv", "json"), default=None)
    common.add_argument("-q", "--quiet", action="store_true")

    parser = argparse.ArgumentParser(prog="menzerath",
                                     description="Fit MA/SMMA models to distinct-word length distributions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="build a distribution from text files")
    p.add_argument("files", nargs="+")
    p.add_argument("--alphabet", help=f"preset: {', '.join(sorted(ALPHABETS))}")
    p.add_argument("--letters", help="explicit letter set")
    p.add_argument("--omega", type=int)
    p.add_argument("--policy", choices=("split", "drop"), default="split",
                   help="out-of-alphabet symbols split tokens or drop whole words")
    p.add_argument("--no-fold", action="store_true", help="disable case folding")
    p.add_argument("--label", help="source label stored in the file")
    p.set_defaults(func=cmd_ingest, default_format="tsv")

    p = sub.add_parser("fit", parents=[common], help="fit MA and/or SMMA")
    p.add_argument("distribution")
    p.add_argument("--model", choices=("ma", "smma", "both"), default="both")
    p.add_argument("--table", action="store_true", help="print observed vs predicted per length")
    _fit_options(p)
    p.set_defaults(func=cmd_fit, default_format="json")

    p = sub.add_parser("thermo", parents=[common], help="thermodynamic quantities from an SMMA fit")
    p.add_argument("distribution")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--smma-report", help="SMMA fit report JSON (default: fit now)")
    src.add_argument("--params", type=float, nargs=3, metavar=("PHI", "ALPHA", "THETA"),
                     help="use these SMMA parameters")
    p.add_argument("--lmax", help="summation limit for Z: integer or 'auto' (default: longest observed)")
    p.add_argument("--entropy-basis", choices=("observed", "predicted"), default="observed")
    _fit_options(p)
    p.set_defaults(func=cmd_thermo, default_format="json")

    p = sub.add_parser("compare", parents=[common], help="compare thermo reports")
    p.add_argument("reports", nargs="*")
    p.add_argument("--labels", nargs="+")
    p.set_defaults(func=cmd_compare, default_format="tsv")

    p = sub.add_parser("plot-data", parents=[common], help="write observed/MA/SMMA overlay TSV")
    p.add_argument("distribution")
    p.add_argument("--ma-report")
    p.add_argument("--smma-report")
    p.add_argument("--grid-step", type=float, default=0.25)
    p.add_argument("--timestamp", action="store_true", help="add a generation time comment")
    _fit_options(p)
    p.set_defaults(func=cmd_plot_data, default_format="tsv")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = args.default_format
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr, force=True)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"menzerath {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (SingularSystemError, FitError, ThermoError) as exc:
        print(f"menzerath {args.command}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"menzerath {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
