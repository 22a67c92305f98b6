"""Command-line entry point: spectra, populations, figure reproduction, scans.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, analysis, analytic, dressed, numeric
from .model import (FIGURES, AtomConfig, ConfigError, DegenerateEigenvaluesError, ModeGrid,
                    NumericalError, dumps_config, load_config_file, preset, validate)

log = logging.getLogger("fluorctl")

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
SPECTRUM_COLUMNS = ("delta_k", "s_total", "s_ch1", "s_ch2", "s_cross")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def parse_angle(text: str) -> float:
    """Accept plain radians or multiples of pi: '1.57', 'pi', '0.5pi', 'pi/4', '3pi/4'."""
    t = text.strip().replace(" ", "").replace("*", "")
    m = re.fullmatch(r"([-+]?\d*\.?\d*)pi(?:/(\d+\.?\d*))?", t)
    if m:
        coef = m.group(1)
        coef = -1.0 if coef == "-" else 1.0 if coef in ("", "+") else float(coef)
        div = float(m.group(2)) if m.group(2) else 1.0
        return coef * math.pi / div
    try:
        return float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None


def write_csv(path: Path, header_comments: list[str], columns, rows) -> None:
    lines = [f"# {c}" for c in header_comments]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(r if isinstance(r, str) else fmt(r) for r in row))
    path.write_text("\n".join(lines) + "\n")


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class RunRecorder:
    """Collects outputs of one invocation and writes the manifest last."""

    def __init__(self, outdir: Path, command: str, quality: numeric.Quality):
        self.outdir = outdir
        self.command = command
        self.quality = quality
        self.outputs: dict[str, dict] = {}
        self.runs: list[dict] = []
        self.start = time.perf_counter()
        outdir.mkdir(parents=True, exist_ok=True)

    def add_run(self, label: str, config: AtomConfig, grid: ModeGrid | None, method: str):
        self.runs.append({"label": label, "config": config.to_dict(),
                          "grid": grid.to_dict() if grid else None, "method": method})

    def add_output(self, path: Path) -> None:
        self.outputs[path.name] = {"sha256": sha256(path)}

    def finish(self) -> Path:
        manifest = {
            "tool": "fluorctl", "version": __version__, "command": self.command,
            "quality": self.quality.to_dict(), "runs": self.runs,
            "outputs": self.outputs,
            "wall_time_s": time.perf_counter() - self.start,
        }
        path = self.outdir / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return path


# --- shared option handling --------------------------------------------------

def _add_config_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scenario")
    g.add_argument("--preset", help="figure panel preset, e.g. fig3a")
    g.add_argument("--config", help="JSON config file (AtomConfig and grid keys)")
    g.add_argument("--gamma1", type=float)
    g.add_argument("--gamma2", type=float)
    g.add_argument("--omega", type=float)
    g.add_argument("--delta", type=float)
    g.add_argument("--omega21", type=float)
    g.add_argument("--p", type=float)
    g.add_argument("--theta", type=parse_angle)
    g.add_argument("--dphi", type=parse_angle)
    g.add_argument("--grid-min", type=float)
    g.add_argument("--grid-max", type=float)
    g.add_argument("--grid-points", type=int)


def _add_quality_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("numerics")
    g.add_argument("--tol", type=float, default=numeric.DEFAULT_QUALITY.tol)
    g.add_argument("--stop-threshold", type=float, default=numeric.DEFAULT_QUALITY.stop_threshold)
    g.add_argument("--modes", type=int, default=numeric.DEFAULT_QUALITY.oracle_modes,
                   help="modes per bath for the mode-comb method")


def _quality(args) -> numeric.Quality:
    return numeric.Quality(tol=args.tol, stop_threshold=args.stop_threshold,
                           oracle_modes=args.modes)


def resolve_scenario(args) -> tuple[AtomConfig, ModeGrid, str]:
    label = "custom"
    config, grid = AtomConfig(), ModeGrid(-4.0, 4.0, 2001)
    if args.preset:
        pr = preset(args.preset)
        config, grid, label = pr.config, pr.grid, pr.name
    if args.config:
        config, file_grid = load_config_file(args.config)
        grid = file_grid or grid
    overrides = {k: getattr(args, k) for k in
                 ("gamma1", "gamma2", "omega", "delta", "omega21", "p", "theta", "dphi")
                 if getattr(args, k) is not None}
    config = validate(config.replace(**overrides))
    if args.grid_min is not None or args.grid_max is not None or args.grid_points is not None:
        grid = ModeGrid(args.grid_min if args.grid_min is not None else grid.delta_min,
                        args.grid_max if args.grid_max is not None else grid.delta_max,
                        args.grid_points if args.grid_points is not None else grid.n_points)
    return config, grid, label


def compute(config: AtomConfig, grid: ModeGrid, method: str, quality: numeric.Quality):
    """Spectrum rows for the requested method; returns (columns-as-arrays, method tag)."""
    if method == "analytic":
        spec = analytic.spectrum_p0(config, grid)
    elif method == "fourier":
        spec = numeric.spectrum(config, grid, quality)
    elif method == "modes":
        res = numeric.mode_oracle(config, grid, quality=quality)
        x = res.grid.points
        keep = (x >= grid.delta_min - 1e-12) & (x <= grid.delta_max + 1e-12)
        dens = res.density[keep]
        nan = np.full(dens.shape, np.nan)
        return (x[keep], dens, nan, nan, nan), "modes"
    else:
        raise ConfigError(f"unknown method {method!r}")
    return (spec.delta, spec.s_total, spec.s_ch1, spec.s_ch2, spec.s_cross), spec.method


def write_spectrum(path: Path, config: AtomConfig, grid: ModeGrid, method: str, cols) -> None:
    write_csv(path, [f"config: {dumps_config(config, grid)}", f"method: {method}"],
              SPECTRUM_COLUMNS, zip(*cols))


# --- subcommands -------------------------------------------------------------

def cmd_spectrum(args) -> int:
    config, grid, label = resolve_scenario(args)
    if args.method == "analytic" and config.p != 0:
        raise ConfigError("analytic requires p = 0")
    quality = _quality(args)
    rec = RunRecorder(Path(args.out), "spectrum", quality)
    cols, tag = compute(config, grid, args.method, quality)
    path = rec.outdir / "spectrum.csv"
    write_spectrum(path, config, grid, tag, cols)
    rec.add_run(label, config, grid, tag)
    rec.add_output(path)
    if tag != "modes":
        feats = analysis.extract_features((cols[0], cols[1]), args.prominence)
        fpath = rec.outdir / "features.json"
        fpath.write_text(feats.to_json() + "\n")
        rec.add_output(fpath)
    rec.finish()
    return EXIT_OK


def cmd_populations(args) -> int:
    config, _, label = resolve_scenario(args)
    quality = _quality(args)
    rec = RunRecorder(Path(args.out), "populations", quality)
    traj = numeric.propagate(config, dt_out=args.dt, quality=quality)
    t, b1, b2 = traj.times, traj.b1, traj.b2
    if args.horizon is not None:
        keep = t <= args.horizon + 1e-12
        t, b1, b2 = t[keep], b1[keep], b2[keep]
    p1, p2 = np.abs(b1) ** 2, np.abs(b2) ** 2
    columns = ["t", "p1", "p2", "p_total"]
    data = [t, p1, p2, p1 + p2]
    if config.gamma2 == 0 and config.omega > 0:
        amps = dressed.to_dressed(b1, b2, config)
        pp, pm = amps.populations
        columns += ["p_plus", "p_minus"]
        data += [pp, pm]
    path = rec.outdir / "populations.csv"
    write_csv(path, [f"config: {dumps_config(config)}", "method: markov"], columns, zip(*data))
    rec.add_run(label, config, None, "markov")
    rec.add_output(path)
    rec.finish()
    return EXIT_OK


def _panel_method(p: float) -> str:
    return "analytic" if p == 0 else "fourier"


def reproduce(figure: str, outdir: Path, quality: numeric.Quality = numeric.DEFAULT_QUALITY,
              prominence: float = analysis.DEFAULT_PROMINENCE) -> Path:
    """Write one CSV per panel and alignment value, a features report and the manifest."""
    if figure not in FIGURES:
        raise ConfigError(f"unknown figure {figure!r}; choose from {sorted(FIGURES)}")
    rec = RunRecorder(outdir, f"reproduce {figure}", quality)
    report = {}
    for name in FIGURES[figure]:
        pr = preset(name)
        for p in pr.p_variants:
            config = pr.config.replace(p=p)
            method = _panel_method(p)
            cols, tag = compute(config, pr.grid, method, quality)
            path = outdir / f"{name}_p{p:g}.csv"
            write_spectrum(path, config, pr.grid, tag, cols)
            rec.add_run(path.stem, config, pr.grid, tag)
            rec.add_output(path)
            feats = analysis.extract_features((cols[0], cols[1]), prominence)
            entry = feats.to_dict()
            entry["method"] = tag
            if config.gamma2 == 0:
                entry["fano_zero"] = analytic.fano_zero(config)
            report[path.stem] = entry
    rpath = outdir / "features.json"
    rpath.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    rec.add_output(rpath)
    return rec.finish()


def cmd_reproduce(args) -> int:
    reproduce(args.figure, Path(args.outdir), _quality(args), args.prominence)
    return EXIT_OK


SCAN_VARIABLES = ("dphi", "p", "gamma2", "omega")


def cmd_scan(args) -> int:
    config, grid, label = resolve_scenario(args)
    if args.variable not in SCAN_VARIABLES:
        raise ConfigError(f"scan variable must be one of {SCAN_VARIABLES}")
    if args.steps < 1:
        raise ConfigError("scan needs at least one step")
    if args.steps > 1 and not args.stop > args.start:
        raise ConfigError("scan needs stop > start")
    values = np.linspace(args.start, args.stop, args.steps) if args.steps > 1 else np.array([args.start])
    quality = _quality(args)
    rec = RunRecorder(Path(args.out), f"scan {args.variable}", quality)
    rows = []
    for v in values:
        cfg = validate(config.replace(**{args.variable: float(v)}))
        method = args.method if args.method != "auto" else _panel_method(cfg.p)
        spec = analysis.compute_spectrum(cfg, grid, method, quality)
        feats = analysis.extract_features(spec, args.prominence)
        deepest = min(feats.minima, key=lambda m: m.ratio, default=None)
        rows.append((float(v), spec.method, float(feats.peak_count), feats.integral,
                     ";".join(fmt(pk.position) for pk in feats.peaks),
                     ";".join(fmt(m.position) for m in feats.minima),
                     ";".join(fmt(m.ratio) for m in feats.minima),
                     deepest.position if deepest else float("nan"),
                     deepest.ratio if deepest else float("nan")))
        rec.add_run(f"{args.variable}={fmt(v)}", cfg, grid, spec.method)
    path = rec.outdir / "scan.csv"
    write_csv(path, [f"config: {dumps_config(config, grid)}", f"scan: {args.variable}"],
              ("value", "method", "peak_count", "integral", "peak_positions",
               "minimum_positions", "minimum_ratios", "deepest_position", "deepest_ratio"),
              ([r[0], r[1], *r[2:]] for r in rows))
    rec.add_output(path)
    rec.finish()
    return EXIT_OK


def cmd_dressed(args) -> int:
    config, _, label = resolve_scenario(args)
    frame = dressed.dressed_frame(config)
    init = dressed.dressed_initial(config)
    pp, pm = init.populations
    report = {"config": config.to_dict(), "frame": frame.__dict__,
              "initial_populations": {"plus": float(pp), "minus": float(pm)}}
    out = Path(args.out)
    rec = RunRecorder(out, "dressed", numeric.DEFAULT_QUALITY)
    rpath = out / "dressed.json"
    rpath.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    rec.add_output(rpath)
    rec.add_run(label, config, None, "dressed")
    if args.trajectory:
        traj = dressed.propagate_dressed(config, args.horizon, args.samples)
        b1, b2 = traj.to_bare()
        tpath = out / "dressed_trajectory.csv"
        write_csv(tpath, [f"config: {dumps_config(config)}", "method: dressed"],
                  ("t", "p_plus", "p_minus", "p1", "p2"),
                  zip(traj.times, np.abs(traj.b_plus) ** 2, np.abs(traj.b_minus) ** 2,
                      np.abs(b1) ** 2, np.abs(b2) ** 2))
        rec.add_output(tpath)
    rec.finish()
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fluorctl", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="emission spectrum for one scenario")
    _add_config_options(p)
    _add_quality_options(p)
    p.add_argument("--method", choices=("analytic", "fourier", "modes"), default="analytic")
    p.add_argument("--prominence", type=float, default=analysis.DEFAULT_PROMINENCE)
    p.add_argument("--out", "--outdir", dest="out", default=".")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("populations", help="excited-state populations versus time")
    _add_config_options(p)
    _add_quality_options(p)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--horizon", type=float, help="truncate output at this time")
    p.add_argument("--out", "--outdir", dest="out", default=".")
    p.set_defaults(func=cmd_populations)

    p = sub.add_parser("reproduce", help="regenerate the data behind a figure")
    p.add_argument("figure", help="fig3, fig4 or fig5")
    _add_quality_options(p)
    p.add_argument("--prominence", type=float, default=analysis.DEFAULT_PROMINENCE)
    p.add_argument("--outdir", "--out", dest="outdir", default=".")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("scan", help="spectral features versus one parameter")
    _add_config_options(p)
    _add_quality_options(p)
    p.add_argument("--variable", required=True, help="dphi, p, gamma2 or omega")
    p.add_argument("--start", type=parse_angle, required=True)
    p.add_argument("--stop", type=parse_angle, required=True)
    p.add_argument("--steps", type=int, required=True, help="number of scanned values")
    p.add_argument("--method", choices=("auto", "analytic", "fourier"), default="auto")
    p.add_argument("--prominence", type=float, default=analysis.DEFAULT_PROMINENCE)
    p.add_argument("--out", "--outdir", dest="out", default=".")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("dressed", help="dressed-state frame report")
    _add_config_options(p)
    p.add_argument("--trajectory", action="store_true", help="also write a dressed trajectory")
    p.add_argument("--horizon", type=float, default=20.0)
    p.add_argument("--samples", type=int, default=2001)
    p.add_argument("--out", "--outdir", dest="out", default=".")
    p.set_defaults(func=cmd_dressed)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalError, DegenerateEigenvaluesError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
