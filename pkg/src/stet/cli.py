"""``stet`` command line: synthesise, analyse, measure and reconstruct signals.

Every subcommand writes into ``--out`` and finishes with a ``manifest.json``
listing the files, their sha256 and the fully resolved parameters. Errors go
to stderr as one line ``stet: error <CODE>: <message>`` with exit status 2
(config), 3 (input) or 4 (numeric).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .metrics import concentration_report, extract_ridge, snr_sweep
from .pipeline import METHODS, analyze
from .reconstruction import interior_snr_db, reconstruct
from .signal import Signal, add_noise, mix, synth_harmonic, synth_impulse, synth_lfm, to_analytic
from .transforms import ExtractionConfig
from .window import DEFAULT_TAIL, GaussianWindowSpec

EXIT_OK, EXIT_CONFIG, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3, 4
_CODES = {EXIT_CONFIG: "E_CONFIG", EXIT_INPUT: "E_INPUT", EXIT_NUMERIC: "E_NUMERIC"}
WINDOW_RECORD_FRACTION = 0.05


class CliError(Exception):
    def __init__(self, status, message):
        super().__init__(message)
        self.status = status


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_CONFIG, message)


# ---------------------------------------------------------------- recipes

_RECIPE_KEYS = {
    "tone": ({"w"}, {"A": 1.0, "phase": 0.0}),
    "impulse": ({"t0"}, {"A": 1.0}),
    "lfm": ({"b", "c"}, {"A": 1.0, "a": 0.0}),
}


def parse_recipe(kind, text) -> dict:
    """Parse ``"A=1,b=62.8,c=628"`` into floats, filling defaults for ``kind``."""
    required, defaults = _RECIPE_KEYS[kind]
    out = dict(defaults)
    for item in filter(None, (p.strip() for p in text.split(","))):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in required | set(defaults):
            raise CliError(EXIT_CONFIG, f"bad --{kind} field {item!r}")
        try:
            out[key] = float(value)
        except ValueError:
            raise CliError(EXIT_CONFIG, f"--{kind} field {key} is not a number: {value!r}") from None
        if not np.isfinite(out[key]):
            raise CliError(EXIT_CONFIG, f"--{kind} field {key} must be finite")
    missing = required - out.keys()
    if missing:
        raise CliError(EXIT_CONFIG, f"--{kind} needs {','.join(sorted(missing))}")
    return out


def synthesise(args):
    if not (args.tone or args.impulse or args.lfm):
        raise CliError(EXIT_CONFIG, "synth needs at least one --tone, --impulse or --lfm")
    fs, dur = args.fs, args.dur
    parts, recipes = [], []
    try:
        for text in args.tone or []:
            r = parse_recipe("tone", text)
            parts.append(synth_harmonic(r["A"], r["w"], dur, fs, r["phase"]))
            recipes.append({"tone": r})
        for text in args.impulse or []:
            r = parse_recipe("impulse", text)
            parts.append(synth_impulse(r["A"], r["t0"], dur, fs))
            recipes.append({"impulse": r})
        for text in args.lfm or []:
            r = parse_recipe("lfm", text)
            parts.append(synth_lfm(r["A"], r["a"], r["b"], r["c"], dur, fs))
            recipes.append({"lfm": r})
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, str(exc)) from None
    return mix(parts), recipes


# ---------------------------------------------------------------- config

def default_beta(n_samples, fs, tail=DEFAULT_TAIL):
    """Gaussian ``beta`` whose truncated window spans about 5% of the record."""
    half = max(1.0, WINDOW_RECORD_FRACTION * n_samples / 2.0)
    return (half / fs) ** 2 / (2.0 * np.log(1.0 / tail))


def default_nfft(window: GaussianWindowSpec) -> int:
    return 1 << int(np.ceil(np.log2(4 * window.length)))


def load_input(path, two_sided=None) -> tuple[Signal, Signal, bool]:
    """Return ``(analysed signal, signal as read, was_real)``.

    Real input is made analytic unless a two-sided grid was asked for: that
    grid shows both spectral halves anyway, and the analytic form of a real
    impulse is a half-band kernel with slow tails rather than an impulse.
    """
    if not Path(path).is_file():
        raise CliError(EXIT_INPUT, f"{path}: no such file")
    try:
        raw = io.read_signal(path)
    except ValueError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None
    if raw.is_real:
        return (raw if two_sided else to_analytic(raw)), raw, True
    return raw, raw, False


def resolve_window(args, signal: Signal) -> GaussianWindowSpec:
    fs = signal.sample_rate_hz
    try:
        if args.beta is not None:
            w = GaussianWindowSpec.from_beta(args.beta, fs)
        elif args.sigma_ms is not None:
            w = GaussianWindowSpec.from_sigma_ms(args.sigma_ms, fs)
        else:
            w = GaussianWindowSpec.from_beta(default_beta(len(signal), fs), fs)
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, str(exc)) from None
    if w.length > len(signal):
        raise CliError(EXIT_CONFIG, f"window of {w.length} samples is longer than the "
                                    f"{len(signal)}-sample record")
    return w


def resolve_analysis(args, signal: Signal, was_real: bool):
    w = resolve_window(args, signal)
    n_fft = args.nfft if args.nfft is not None else default_nfft(w)
    if n_fft < w.length:
        raise CliError(EXIT_CONFIG, f"--nfft {n_fft} is shorter than the window ({w.length} samples)")
    two_sided = (not was_real) if args.two_sided is None else args.two_sided
    cfg = ExtractionConfig(boundary=args.boundary, gamma=args.gamma)
    if not args.gamma > 0:
        raise CliError(EXIT_CONFIG, "--gamma must be positive")
    try:
        an = analyze(signal, w, n_fft, cfg, two_sided=two_sided)
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, str(exc)) from None
    return an, resolved_parameters(an, signal, was_real)


def resolved_parameters(an, signal: Signal, was_real: bool) -> dict:
    w, cfg = an.stft.window, an.config
    return {
        "fs": signal.sample_rate_hz,
        "n_samples": len(signal),
        "input_real": was_real,
        "beta": w.beta,
        "sigma_ms": w.sigma_ms,
        "window_half_len_samples": w.half_len_samples,
        "n_fft": an.stft.n_fft,
        "two_sided": an.stft.two_sided,
        "gamma": cfg.gamma,
        "boundary": cfg.boundary,
        "boundary_default": w.boundary,
        "freq_tolerance": cfg.freq_tolerance,
        "time_tolerance": cfg.time_tolerance,
    }


def _transform(an, method):
    try:
        G = an.transform(method)
    except (ValueError, FloatingPointError) as exc:
        raise CliError(EXIT_NUMERIC, str(exc)) from None
    if not np.all(np.isfinite(G.values)):
        raise CliError(EXIT_NUMERIC, f"{method} grid contains non-finite values")
    return G


# ---------------------------------------------------------------- commands

def cmd_synth(args):
    clean, recipes = synthesise(args)
    out = io.ensure_dir(args.out)
    params = {"fs": args.fs, "duration_s": args.dur, "components": recipes}
    signal = clean
    if args.snr is not None:
        signal = add_noise(clean, args.snr, args.seed)
        io.write_signal_csv(clean, out / "clean.csv")
        params.update(snr_db=args.snr, seed=args.seed)
    io.write_signal_csv(signal, out / "signal.csv")
    io.write_manifest(out, {"command": "synth", **params})


def cmd_analyze(args):
    signal, _, was_real = load_input(args.input, args.two_sided)
    an, params = resolve_analysis(args, signal, was_real)
    G = _transform(an, args.method)
    out = io.ensure_dir(args.out)
    params.update(command="analyze", method=args.method, input=str(args.input), format=args.format)
    io.write_grid(G, out, args.method, args.format, config=params)
    if G.branch_map is not None:
        io.write_branch_map(G.branch_map, out / "branch_map.csv")
    if args.fields:
        io.write_fields(an.fields, an.stft, out)
    io.write_manifest(out, params)


def cmd_metrics(args):
    signal, _, was_real = load_input(args.input, args.two_sided)
    an, params = resolve_analysis(args, signal, was_real)
    G = _transform(an, args.method)
    out = io.ensure_dir(args.out)
    params.update(command="metrics", method=args.method, input=str(args.input))
    try:
        ridges = []
        if args.ridge:
            ridges.append(extract_ridge(G, args.ridge, args.penalty))
        report = concentration_report(G, ridges=ridges)
        result = {"report": report.to_dict(), "config": params}
        if args.snr_sweep:
            snrs = _float_list(args.snr_sweep, "--snr-sweep")
            w, n_fft, two = an.stft.window, an.stft.n_fft, an.stft.two_sided

            def pipeline(noisy):
                return analyze(noisy, w, n_fft, an.config, two_sided=two).transform(args.method)

            sweep = snr_sweep(signal, snrs, pipeline, args.seed)
            result["snr_sweep"] = {"seed": args.seed, "points": [list(p) for p in sweep]}
            params.update(snr_sweep=snrs, seed=args.seed)
    except ValueError as exc:
        raise CliError(EXIT_NUMERIC, str(exc)) from None

    io.write_json(result, out / "report.json")
    with open(out / "energy_curve.csv", "w") as fh:
        fh.write("coefficients,energy_fraction\n")
        for m, f in report.normalized_energy:
            fh.write(f"{m},{f!r}\n")
    if args.snr_sweep:
        with open(out / "snr_sweep.csv", "w") as fh:
            fh.write("snr_db,renyi_bits\n")
            for snr, h in sweep:
                fh.write(f"{snr!r},{h!r}\n")
    if ridges:
        with open(out / "ridge.csv", "w") as fh:
            fh.write("time_s,omega_rad_s,magnitude\n")
            for t, w_, m in ridges[0].points:
                fh.write(f"{t!r},{w_!r},{m!r}\n")
    io.write_manifest(out, params)


def cmd_reconstruct(args):
    if (args.input is None) == (args.analysis is None):
        raise CliError(EXIT_CONFIG, "reconstruct needs exactly one of --input or --analysis")
    if args.analysis is not None:
        G, params = _load_analysis(Path(args.analysis))
        reference = None
    else:
        signal, _, was_real = load_input(args.input, args.two_sided)
        an, params = resolve_analysis(args, signal, was_real)
        G = _transform(an, "stet2")
        params.update(method="stet2", input=str(args.input))
        reference = signal
    if args.reference is not None:
        reference, _, _ = load_input(args.reference, params.get("two_sided"))
    params["command"] = "reconstruct"

    try:
        res = reconstruct(G)
    except ValueError as exc:
        raise CliError(EXIT_NUMERIC, str(exc)) from None
    for s in (res.s1, res.s2):
        if not np.all(np.isfinite(s.samples)):
            raise CliError(EXIT_NUMERIC, "reconstruction produced non-finite samples")

    out = io.ensure_dir(args.out)
    for name, s in (("s1", res.s1), ("s2", res.s2), ("total", res.total)):
        io.write_signal_csv(s, out / f"{name}.csv", include_imag=True)
    m = res.interior_mask
    report = {
        "interior_samples": int(m.sum()),
        "energy_s1": float(np.sum(np.abs(res.s1.samples[m]) ** 2)),
        "energy_s2": float(np.sum(np.abs(res.s2.samples[m]) ** 2)),
        "config": params,
    }
    if reference is not None:
        if len(reference) != len(res.total) or reference.sample_rate_hz != res.total.sample_rate_hz:
            raise CliError(EXIT_INPUT, "reference does not match the analysed record")
        report["interior_snr_db"] = interior_snr_db(reference, res.total, m)
        report["reference"] = str(args.reference or args.input)
    io.write_json(report, out / "report.json")
    io.write_manifest(out, params)


def _load_analysis(directory: Path):
    bin_path = directory / "stet2.bin"
    bm_path = directory / "branch_map.csv"
    if not bin_path.is_file() or not bm_path.is_file():
        raise CliError(EXIT_INPUT, f"{directory}: needs stet2.bin and branch_map.csv "
                                   "(run analyze --method stet2 --format bin)")
    try:
        branches = io.read_branch_map(bm_path)
        G = io.read_grid_bin(bin_path)
    except ValueError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None
    if branches.shape != G.shape:
        raise CliError(EXIT_INPUT, f"branch map shape {branches.shape} does not match grid {G.shape}")
    meta = json.loads(bin_path.with_suffix(".json").read_text())
    G = G.with_values(G.values, branch_map=branches)
    params = dict(meta.get("config", {}))
    params["analysis"] = str(directory)
    return G, params


def _float_list(text, flag):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise CliError(EXIT_CONFIG, f"{flag} expects comma-separated numbers") from None


# ---------------------------------------------------------------- parser

def _add_analysis_flags(p, with_method=True):
    if with_method:
        p.add_argument("--method", choices=METHODS, default="stet2")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--beta", type=float, help="Gaussian window variance in s^2")
    g.add_argument("--sigma-ms", type=float, help="Gaussian window standard deviation in ms")
    p.add_argument("--nfft", type=int, help="FFT length (default: next power of two >= 4x window)")
    p.add_argument("--gamma", type=float, default=1e-3, help="validity threshold relative to max|V|")
    p.add_argument("--boundary", type=float, help="chirp-rate routing boundary in rad/s^2")
    sides = p.add_mutually_exclusive_group()
    sides.add_argument("--two-sided", dest="two_sided", action="store_true", default=None,
                       help="keep negative frequencies (default for complex input)")
    sides.add_argument("--one-sided", dest="two_sided", action="store_false",
                       help="positive frequencies only (default for real input)")


def build_parser():
    parser = _Parser(prog="stet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write a synthetic test signal")
    p.add_argument("--tone", action="append", metavar="A=..,w=..[,phase=..]")
    p.add_argument("--impulse", action="append", metavar="A=..,t0=..")
    p.add_argument("--lfm", action="append", metavar="A=..,a=..,b=..,c=..")
    p.add_argument("--fs", type=float, required=True)
    p.add_argument("--dur", type=float, required=True)
    p.add_argument("--snr", type=float, help="add complex white noise at this SNR (dB)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("analyze", help="export a time-frequency grid")
    p.add_argument("--input", required=True)
    _add_analysis_flags(p)
    p.add_argument("--format", choices=("csv", "bin"), default="csv")
    p.add_argument("--fields", action="store_true", help="also export estimator fields")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("metrics", help="concentration report for one method")
    p.add_argument("--input", required=True)
    _add_analysis_flags(p)
    p.add_argument("--snr-sweep", metavar="DB,DB,...", help="entropy over these input SNRs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ridge", choices=("time", "frequency"))
    p.add_argument("--penalty", type=float, default=0.0, help="ridge smoothness penalty")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("reconstruct", help="recover harmonic and impulsive parts")
    p.add_argument("--input")
    p.add_argument("--analysis", help="directory written by analyze --method stet2 --format bin")
    p.add_argument("--reference", help="clean signal to score the reconstruction against")
    _add_analysis_flags(p, with_method=False)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reconstruct)
    return parser


def _join_list_flags(argv):
    # argparse reads "-5,0,5" as an option; bind it to its flag instead
    out, it = [], iter(argv)
    for a in it:
        if a == "--snr-sweep":
            a = f"{a}={next(it, '')}"
        out.append(a)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(_join_list_flags(argv))
        args.func(args)
    except CliError as exc:
        msg = " ".join(str(exc).split())
        print(f"stet: error {_CODES[exc.status]}: {msg}", file=sys.stderr)
        return exc.status
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
