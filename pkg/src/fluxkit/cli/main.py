"""``fluxkit`` command-line entry point.

Exit codes: 0 success, 1 a reproduction check failed, 2 usage or configuration
error, 3 numerical failure, 4 a fit did not converge.
"""
from __future__ import annotations

import argparse
import contextlib
import dataclasses
import io
import json
import os
import sys
import warnings

import numpy as np

from .. import analysis
from ..errors import ConfigError, FluxkitError, InvalidParameterError, UnidentifiableError
from ..gatesim import BACKENDS, error_vs_duration
from ..spectra import fmt17, flux_sweep
from .config import load_config
from .derived import device_budget, fluxonium_system, sweet_spot, transmon_system
from .reproduce import DEFAULT_SEED, TARGETS

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_NUMERICAL, EXIT_NOT_CONVERGED = 0, 1, 2, 3, 4


class UsageError(FluxkitError):
    pass


def fmt4(x) -> str:
    if isinstance(x, str):
        return x
    if x is None:
        return "-"
    return format(float(x), ".4g")


def print_table(header, rows, out=None) -> None:
    out = out or sys.stdout
    cells = [list(map(str, header))] + [[fmt4(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    for r in cells:
        out.write("  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip() + "\n")


def _float_list(text: str) -> list:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _int_list(text: str) -> list:
    vals = _float_list(text)
    if any(v != int(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}")
    return [int(v) for v in vals]


def _transitions(text: str) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if len(tok) != 2 or not tok.isdigit() or tok[0] == tok[1]:
            raise argparse.ArgumentTypeError(f"transition {tok!r} must be two distinct level digits, e.g. 01")
        out.append((int(tok[0]), int(tok[1])))
    return out


@contextlib.contextmanager
def _sink(path):
    """Open ``path`` for writing; ``-`` means standard output."""
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _write_json(path, doc) -> None:
    with _sink(path) as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(type(x).__name__)


def _num(x):
    x = float(x)
    return x if np.isfinite(x) else None


# --- commands -----------------------------------------------------------------


def cmd_spectrum(args) -> int:
    cfg = load_config(args.config)
    (fl,) = cfg.need("fluxonium")
    if args.points < 1:
        raise UsageError("--points must be >= 1")
    start = fl.flux if args.flux_start is None else args.flux_start
    stop = start if args.flux_stop is None else args.flux_stop
    if args.points == 1:
        if stop != start:
            raise UsageError("a single point needs --flux-stop equal to --flux-start")
        grid = np.array([start])
    else:
        if not stop > start:
            raise UsageError("--flux-stop must exceed --flux-start")
        grid = np.linspace(start, stop, args.points)
    if args.chi:
        cfg.need("resonator", "coupling")
    sweep = flux_sweep(
        fl, cfg.basis, grid, args.transitions, with_chi=args.chi,
        res=cfg.resonator, cpl=cfg.coupling, n_sum=args.n_sum, workers=args.workers,
    )
    if args.out:
        with _sink(args.out) as fh:
            sweep.write_csv(fh)
    if args.out != "-":
        header = ["flux"] + [f"f{i}{j}_ghz" for i, j in sweep.transitions] + (["chi01_mhz"] if args.chi else [])
        rows = []
        for n, f in enumerate(sweep.flux_grid):
            row = [f] + [sweep.freqs[t][n] for t in sweep.transitions]
            if args.chi:
                row.append(sweep.chi01_mhz[n] if not sweep.flags[n] else sweep.flags[n])
            rows.append(row)
        print_table(header, rows)
    return EXIT_OK


def cmd_chi(args) -> int:
    cfg = load_config(args.config)
    fl, _, _ = cfg.need("fluxonium", "resonator", "coupling")
    if args.flux is not None:
        cfg = dataclasses.replace(cfg, fluxonium=fl.at_flux(args.flux))
    ss = sweet_spot(cfg, args.n_sum)
    doc = {
        "schema_version": analysis.SCHEMA_VERSION,
        "device": cfg.name,
        "flux": cfg.fluxonium.flux,
        "n_sum": args.n_sum,
        "g_mhz": ss["g_mhz"],
        "f01_ghz": ss["f01"],
        "n01": ss["n01"],
        "chi01_mhz": ss["chi01_mhz"],
    }
    if args.out:
        _write_json(args.out, doc)
    if args.out != "-":
        print_table(["quantity", "value", "unit"], [
            ["flux", doc["flux"], "Phi0"],
            ["f01", doc["f01_ghz"], "GHz"],
            ["n01", doc["n01"], "Cooper pairs"],
            ["g", doc["g_mhz"], "MHz"],
            ["chi01", doc["chi01_mhz"], "MHz"],
        ])
    return EXIT_OK


def cmd_budget(args) -> int:
    cfg = load_config(args.config)
    rows, budget = device_budget(cfg)
    if args.out:
        doc = {
            "schema_version": analysis.SCHEMA_VERSION,
            "device": cfg.name,
            "quantities": {r.name: {"value": _num(r.value), "unit": r.unit} for r in rows},
            "budget": budget.as_dict(),
        }
        _write_json(args.out, doc)
    if args.out != "-":
        print_table(["quantity", "value", "unit"], [list(r) for r in rows])
    return EXIT_OK


def cmd_gate_sim(args) -> int:
    cfg = load_config(args.config)
    if args.backend is not None and args.backend not in BACKENDS:
        raise UsageError(f"backend {args.backend!r} unavailable; have {sorted(BACKENDS)}")
    system = fluxonium_system(cfg) if args.system == "fluxonium" else transmon_system(cfg)
    curve = error_vs_duration(system, args.tg_grid, backend=args.backend)
    if args.out:
        with _sink(args.out) as fh:
            curve.write_csv(fh)
    if args.out != "-":
        print_table(["t_g_ns", "eps_star", "leakage", "p1"], curve.rows)
    return EXIT_OK


def _report_fit(result, out_path) -> int:
    if out_path:
        with _sink(out_path) as fh:
            analysis.write_fit_json(fh, result)
    if out_path != "-":
        rows = [[k, v, result.stderr.get(k)] for k, v in result.params.items()]
        print_table(["param", "value", "stderr"], rows)
        print(f"converged: {'yes' if result.converged else 'no'} ({result.message}); iterations {result.n_iter}; rms {fmt4(result.residual_rms)}")
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def _open_input(path):
    try:
        return open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def cmd_fit(args) -> int:
    with _open_input(args.input) as fh:
        trace = analysis.read_trace(fh)
    return _report_fit(analysis.fit_trace(trace, args.kind), args.out)


def cmd_rb_synth(args) -> int:
    data = analysis.synth_rb(args.p, args.a, args.b, args.m, args.sigma, args.n_rand, args.seed)
    with _sink(args.out) as fh:
        analysis.write_rb(fh, data, fmt17)
    return EXIT_OK


def cmd_rb_fit(args) -> int:
    with _open_input(args.input) as fh:
        data = analysis.read_rb(fh, args.n_rand)
    return _report_fit(analysis.fit_rb(data), args.out)


def cmd_reproduce(args) -> int:
    outcome = TARGETS[args.target](args.seed)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
    for table in outcome.tables:
        if args.out_dir:
            path = os.path.join(args.out_dir, f"{table.name}.csv")
            with open(path, "w", encoding="utf-8", newline="") as fh:
                _write_table_csv(fh, table)
        else:
            sys.stdout.write(f"# {table.name}.csv\n")
            _write_table_csv(sys.stdout, table)
    for check in outcome.checks:
        print(check.line())
    failed = [c for c in outcome.checks if not c.passed]
    print(f"{args.target}: {len(outcome.checks) - len(failed)}/{len(outcome.checks)} checks passed")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def _write_table_csv(fh, table) -> None:
    fh.write(",".join(table.header) + "\n")
    for row in table.rows:
        fh.write(",".join(v if isinstance(v, str) else fmt17(v) for v in row) + "\n")


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fluxkit", description="Fluxonium device modelling and analysis toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", help="transition frequencies (and chi01) versus flux")
    s.add_argument("config")
    s.add_argument("--flux-start", type=float)
    s.add_argument("--flux-stop", type=float)
    s.add_argument("--points", type=int, default=1)
    s.add_argument("--transitions", type=_transitions, default=[(0, 1), (1, 2), (0, 2)])
    s.add_argument("--chi", action="store_true", help="also compute chi01 (needs resonator and coupling)")
    s.add_argument("--n-sum", type=int, default=20)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", help="CSV output path, '-' for stdout")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("chi", help="dispersive shift chi01")
    s.add_argument("config")
    s.add_argument("--flux", type=float)
    s.add_argument("--n-sum", type=int, default=20)
    s.add_argument("--out", help="JSON output path, '-' for stdout")
    s.set_defaults(func=cmd_chi)

    s = sub.add_parser("budget", help="coherence budget and inferred loss/thermal parameters")
    s.add_argument("config")
    s.add_argument("--out", help="JSON output path, '-' for stdout")
    s.set_defaults(func=cmd_budget)

    s = sub.add_parser("gate-sim", help="leakage of calibrated cosine pulses versus duration")
    s.add_argument("config")
    s.add_argument("--system", choices=("fluxonium", "transmon"), default="fluxonium")
    s.add_argument("--tg-grid", type=_float_list, default=[4.0, 6.0, 10.0, 20.0])
    s.add_argument("--backend", default=None)
    s.add_argument("--out", help="CSV output path, '-' for stdout")
    s.set_defaults(func=cmd_gate_sim)

    s = sub.add_parser("fit", help="fit a decay trace (CSV columns t_us,y[,sigma])")
    s.add_argument("kind", choices=("exp", "gauss", "cos"))
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", help="JSON output path, '-' for stdout")
    s.set_defaults(func=cmd_fit)

    rb = sub.add_parser("rb", help="randomized benchmarking data").add_subparsers(dest="rb_command", required=True)
    s = rb.add_parser("synth", help="seeded synthetic A + B p^m data")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--a", type=float, default=0.5)
    s.add_argument("--b", type=float, default=0.45)
    s.add_argument("--m", type=_int_list, required=True, help="comma-separated sequence lengths")
    s.add_argument("--sigma", type=float, default=0.0)
    s.add_argument("--n-rand", type=int, default=32)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", default="-", help="CSV output path (default stdout)")
    s.set_defaults(func=cmd_rb_synth)
    s = rb.add_parser("fit", help="fit CSV columns m,fidelity")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--n-rand", type=int, default=1)
    s.add_argument("--out", help="JSON output path, '-' for stdout")
    s.set_defaults(func=cmd_rb_fit)

    s = sub.add_parser("reproduce", help="regenerate a published figure/table and check it")
    s.add_argument("target", choices=sorted(TARGETS))
    s.add_argument("--out-dir", help="write CSV files here instead of stdout")
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    noted = io.StringIO()
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            code = args.func(args)
        for w in caught:
            noted.write(f"note: {w.message}\n")
    except (ConfigError, UsageError, InvalidParameterError, UnidentifiableError) as exc:
        print(f"fluxkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FluxkitError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"fluxkit: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if noted.getvalue() and not _stdout_is_data(args):
        sys.stdout.write(noted.getvalue())
    return code


def _stdout_is_data(args) -> bool:
    return getattr(args, "out", None) == "-"


if __name__ == "__main__":
    sys.exit(main())
