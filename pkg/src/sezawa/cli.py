"""Command-line entry point: ``sezawa fit|kpi|sweep|design|tcf|power``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

import numpy as np

from . import _io
from .dispersion import NoGuidedModesError, StackTemplate, design_frequency, sweep_design
from .kpi import BandTooNarrowError, ResonatorKpis, bode_q, power_sweep_compare, q_3db, qbode_csv, tcf_fit
from .materials import MaterialError, default_materials, interpolate_scaln, load_materials
from .mbvd import FitConfig, NoResonanceError, derived_kpis, fit_mbvd, initial_guess
from .touchstone import (
    SingularConversionError,
    TouchstoneError,
    admittance_trace,
    conjugate_match,
    read_touchstone,
    y_to_s,
)

log = logging.getLogger("sezawa")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_NOT_CONVERGED = 4
EXIT_NO_MODES = 5
EXIT_IO = 6
EXIT_INPUT = 7


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


# -- argument helpers ----------------------------------------------------------


def parse_grid(text):
    """``start:stop:step`` (inclusive stop) or a comma list."""
    text = str(text).strip()
    if ":" in text:
        try:
            start, stop, step = (float(p) for p in text.split(":"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad grid {text!r}, expected start:stop:step")
        if step <= 0 or stop < start:
            raise argparse.ArgumentTypeError(f"bad grid {text!r}")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(n)]
    try:
        vals = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty grid")
    return vals


def odd_window(text):
    n = int(text)
    if n < 1 or n % 2 == 0:
        raise argparse.ArgumentTypeError("window must be a positive odd integer")
    return n


def positive_float(text):
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


def positive_int(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def float_list(text):
    return parse_grid(text) if ":" in str(text) else [float(p) for p in str(text).split(",") if p.strip()]


def _emit(args, text):
    if args.output in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {args.output}: {exc}", EXIT_IO)


def _load_network(path):
    try:
        net = read_touchstone(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO)
    except TouchstoneError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE)
    return net


def _fit_network(path, net, tolerance=None, max_iterations=None):
    cfg = FitConfig()
    if tolerance is not None:
        cfg = replace(cfg, xtol=tolerance)
    if max_iterations is not None:
        cfg = replace(cfg, max_iterations=max_iterations)
    try:
        y = admittance_trace(net)
        guess = initial_guess(net.freqs, y)
        report = fit_mbvd(net.freqs, y, guess, cfg)
        fs_trace, bw, q3 = q_3db(net.freqs, y)
    except SingularConversionError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INPUT)
    except (NoResonanceError, BandTooNarrowError, ValueError) as exc:
        raise CliError(f"{path}: {exc}", EXIT_INPUT)
    kpis = derived_kpis(report.params).merged(ResonatorKpis(BW3dB=bw, Q3dB=q3))
    return y, report, kpis, fs_trace


def _key_value_or_json(args, payload):
    return _io.key_value_csv(payload) if args.format == "csv" else _io.dumps(payload)


# -- commands --------------------------------------------------------------------


def cmd_fit(args):
    path = args.input[0]
    net = _load_network(path)
    _, report, kpis, fs_trace = _fit_network(path, net, args.tolerance, args.max_iterations)
    payload = {"input": path, "fit": report, "kpis": kpis, "fs_peak": fs_trace}
    _emit(args, _key_value_or_json(args, payload))
    if not report.converged:
        log.error("%s: fit did not converge (%s)", path, report.message)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_kpi(args):
    path = args.input[0]
    net = _load_network(path)
    _, report, kpis, _ = _fit_network(path, net, args.tolerance, args.max_iterations)
    s_net = net if net.kind == "S" else y_to_s(net)
    f0 = kpis.fs
    if not s_net.freqs[0] <= f0 <= s_net.freqs[-1]:
        raise CliError(f"{path}: fitted fs {f0:.9g} Hz outside the measured span", EXIT_INPUT)
    try:
        matched, section = conjugate_match(s_net, f0, return_section=True)
        bq = bode_q(matched.freqs, matched.s11, args.window, kpis.fs, kpis.BW3dB)
    except ValueError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INPUT)
    kpis = kpis.merged(ResonatorKpis(QBode=bq.peak))
    payload = {
        "input": path,
        "fit": report,
        "kpis": kpis,
        "qbode_peak_frequency": bq.f_peak,
        "match": {
            "topology": section.topology,
            "f0": section.f0,
            "series_reactance": section.x0,
            "shunt_susceptance": section.b0,
            "elements": section.elements,
        },
    }
    _emit(args, _key_value_or_json(args, payload))
    if args.trace:
        try:
            with open(args.trace, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(qbode_csv(bq))
        except OSError as exc:
            raise CliError(f"cannot write {args.trace}: {exc}", EXIT_IO)
    if not report.converged:
        return EXIT_NOT_CONVERGED
    return EXIT_OK


_SWEEP_DEFAULTS = {
    "grid_h": "0.3:1.0:0.025",
    "grid_tm": "0.025:0.325:0.025",
    "wavelength": 400e-9,
    "sc": 0.3,
    "coverage": 0.5,
    "electrode": "AlSiCu",
    "substrate": "6H-SiC",
    "materials": None,
    "samples": 2000,
    "workers": 1,
}


def _sweep_settings(args):
    settings = dict(_SWEEP_DEFAULTS)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                conf = json.load(fh)
        except OSError as exc:
            raise CliError(f"cannot read {args.config}: {exc}", EXIT_IO)
        except json.JSONDecodeError as exc:
            raise CliError(f"{args.config}: invalid JSON ({exc})", EXIT_PARSE)
        unknown = set(conf) - set(settings)
        if unknown:
            raise CliError(f"{args.config}: unknown keys {sorted(unknown)}", EXIT_INPUT)
        settings.update(conf)
    for key in settings:
        val = getattr(args, key, None)
        if val is not None:
            settings[key] = val
    for key in ("grid_h", "grid_tm"):
        if not isinstance(settings[key], list):
            try:
                settings[key] = parse_grid(settings[key])
            except argparse.ArgumentTypeError as exc:
                raise CliError(str(exc), EXIT_INPUT)
    return settings


def _template(settings):
    try:
        db = load_materials(settings["materials"]) if settings["materials"] else default_materials()
    except OSError as exc:
        raise CliError(f"cannot read materials: {exc}", EXIT_IO)
    except MaterialError as exc:
        raise CliError(f"materials: {exc}", EXIT_PARSE)
    try:
        piezo = interpolate_scaln(db, settings["sc"])
        return StackTemplate(
            piezo=piezo,
            substrate=db[settings["substrate"]],
            wavelength=float(settings["wavelength"]),
            electrode=db[settings["electrode"]],
            coverage=float(settings["coverage"]),
        )
    except (KeyError, ValueError) as exc:
        raise CliError(f"materials: {exc}", EXIT_INPUT)


def _run_sweep(args):
    settings = _sweep_settings(args)
    template = _template(settings)
    try:
        result = sweep_design(
            template,
            settings["grid_h"],
            settings["grid_tm"],
            n_samples=int(settings["samples"]),
            workers=int(settings["workers"]),
        )
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INPUT)
    if result.best is None:
        raise CliError("no guided modes (check slow-on-fast ordering)", EXIT_NO_MODES)
    return settings, result


_SWEEP_COLUMNS = ("h_over_lambda", "tm_over_lambda", "vp", "kt2", "fs_for_lambda")


def cmd_sweep(args):
    settings, result = _run_sweep(args)
    if args.format == "csv":
        text = _io.table_csv(_SWEEP_COLUMNS, result.points())
    else:
        grid = [dict(zip(_SWEEP_COLUMNS, p)) for p in result.points()]
        config = {k: settings[k] for k in ("wavelength", "sc", "coverage", "electrode", "substrate", "samples")}
        text = _io.dumps({"config": config, "grid": grid, "best": result.best})
    _emit(args, text)
    return EXIT_OK


def cmd_design(args):
    settings, result = _run_sweep(args)
    best = result.best
    fs = design_frequency(best, float(settings["wavelength"]))
    if args.format == "csv":
        text = _io.table_csv(_SWEEP_COLUMNS + ("interior",), [
            (best.h_over_lambda, best.tm_over_lambda, best.vp, best.kt2, fs, result.is_interior())
        ])
    else:
        text = _io.dumps({"design_point": best, "fs": fs, "interior": result.is_interior()})
    _emit(args, text)
    return EXIT_OK


def cmd_tcf(args):
    temps = args.temperatures
    if temps is None or len(temps) != len(args.input):
        raise CliError("give one --temperatures value per input file", EXIT_INPUT)
    rows = []
    for path, t in zip(args.input, temps):
        net = _load_network(path)
        _, report, kpis, _ = _fit_network(path, net, args.tolerance, args.max_iterations)
        if not report.converged:
            raise CliError(f"{path}: fit did not converge", EXIT_NOT_CONVERGED)
        rows.append({"input": path, "temperature": t, "fs": kpis.fs})
    try:
        tcf = tcf_fit([r["temperature"] for r in rows], [r["fs"] for r in rows])
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INPUT)
    payload = {"points": rows, "TCF1": tcf}
    if args.format == "csv":
        text = _io.table_csv(("input", "temperature", "fs"), [(r["input"], r["temperature"], r["fs"]) for r in rows])
        text += f"TCF1,{_io.fmt(tcf)},\n"
    else:
        text = _io.dumps(payload)
    _emit(args, text)
    return EXIT_OK


def cmd_power(args):
    levels = args.levels
    if levels is None or len(levels) != len(args.input):
        raise CliError("give one --levels value per input file", EXIT_INPUT)
    traces = []
    for path in args.input:
        net = _load_network(path)
        traces.append((net.freqs, admittance_trace(net)))
    tol = 0.02 if args.tolerance is None else args.tolerance
    try:
        report = power_sweep_compare(levels, traces, args.baseline, tol)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INPUT)
    if args.format == "csv":
        rows = zip(report.levels, report.peak_admittance_drift, report.q3db_drift)
        text = _io.table_csv(("level_dbm", "peak_admittance_drift_pct", "q3db_drift_pct"), rows)
        text += f"returned_to_baseline,{_io.fmt(report.returned_to_baseline)},\n"
    else:
        text = _io.dumps(report)
    _emit(args, text)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="sezawa", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, inputs=True, many=False, fitting=True):
        if inputs:
            p.add_argument("--input", "-i", nargs="+" if many else 1, required=True, help="Touchstone .s2p file(s)")
        p.add_argument("--output", "-o", default="-", help="output path (default stdout)")
        p.add_argument("--format", "-f", choices=("json", "csv"), default="json")
        p.add_argument("--tolerance", type=positive_float, default=None,
                       help="fit: relative step tolerance; power: return-to-baseline fraction")
        if inputs and fitting:
            p.add_argument("--max-iterations", dest="max_iterations", type=positive_int, default=None)

    p = sub.add_parser("fit", help="fit the MBVD circuit to -Y12 and report KPIs")
    common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("kpi", help="fit plus Bode Q after conjugate matching at fs")
    common(p)
    p.add_argument("--window", type=odd_window, default=11, help="Bode-Q smoothing window (odd)")
    p.add_argument("--trace", default=None, help="write the Q_Bode(f) trace as CSV")
    p.set_defaults(func=cmd_kpi)

    for name, func, text in (
        ("sweep", cmd_sweep, "Sezawa kt2 over an h/lambda x tm/lambda grid"),
        ("design", cmd_design, "best (h/lambda, tm/lambda) design point"),
    ):
        p = sub.add_parser(name, help=text)
        common(p, inputs=False)
        p.add_argument("--materials", default=None, help="material database JSON (default: $SEZAWA_MATERIALS or built-in)")
        p.add_argument("--grid-h", dest="grid_h", type=parse_grid, default=None)
        p.add_argument("--grid-tm", dest="grid_tm", type=parse_grid, default=None)
        p.add_argument("--lambda", dest="wavelength", type=float, default=None, help="acoustic wavelength in m")
        p.add_argument("--sc", type=float, default=None, help="Sc fraction of the film, e.g. 0.3")
        p.add_argument("--coverage", type=float, default=None)
        p.add_argument("--electrode", default=None)
        p.add_argument("--substrate", default=None)
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--config", default=None, help="JSON run-config with the same keys")
        p.set_defaults(func=func)

    p = sub.add_parser("tcf", help="first-order TCF from files at several temperatures")
    common(p, many=True)
    p.add_argument("--temperatures", type=float_list, default=None, help="comma list in K, one per file")
    p.set_defaults(func=cmd_tcf)

    p = sub.add_parser("power", help="drift of peak |Y| and Q3dB over input power levels")
    common(p, many=True, fitting=False)
    p.add_argument("--levels", type=float_list, default=None, help="comma list in dBm, one per file")
    p.add_argument("--baseline", type=int, default=0)
    p.set_defaults(func=cmd_power)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"sezawa {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except NoGuidedModesError as exc:
        print(f"sezawa {args.command}: {exc}", file=sys.stderr)
        return EXIT_NO_MODES


if __name__ == "__main__":
    sys.exit(main())
