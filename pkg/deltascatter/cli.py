"""
Command-line front end

    delta-scatter spectrum|resonances|match|verify|sweep --config <path> [--out <dir>] [--plots]
                  [--strength-bound-factor <f>] [--seed <n>] [--global] [--workers <n>] [--verbose]

Exit codes: 0 success (including runs that did not converge), 1 usage, parse or
configuration error, 2 no resonance in the requested range.
"""
import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from deltascatter import __version__
from deltascatter.analysis.isospectral import verify_pair
from deltascatter.exceptions import DomainError, NoResonancesError
from deltascatter.experiments.resonance_matching import MatchReport, ResonanceMatching, ResonanceSweep, RunConfig
from deltascatter.reporting import (
    plot_spectrum,
    plot_sweep_summary,
    plot_window_overlay,
    read_json,
    write_frame,
    write_json,
    write_spectrum_csv,
)
from deltascatter.utils import to_float_list, uniform_k_grid

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_RESONANCES = 2

COMMANDS = ("spectrum", "resonances", "match", "verify", "sweep")


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser exiting with EXIT_USAGE, exit code 2 is reserved for empty resonance ranges"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    common = ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON configuration file")
    common.add_argument("--out", default=None, help="Output directory, overrides output.out_dir")
    common.add_argument("--plots", action="store_true", help="Also write SVG plots")
    common.add_argument("--strength-bound-factor", type=float, default=None, help="Strength ceiling as a multiple of |alpha1|")
    common.add_argument("--seed", type=int, default=None, help="Seed of the optimizer, overrides de.seed")
    common.add_argument("--global", dest="use_global_window", action="store_true", help="Fit one window over the whole range")
    common.add_argument("--workers", type=int, default=None, help="Windows fitted in parallel")
    common.add_argument("--verbose", action="store_true", help="Show progress bars")

    parser = ArgumentParser(prog="delta-scatter", description="Transfer-matrix scattering off delta spikes and windowed spectral matching")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser("spectrum", parents=[common], help="Write T(k) of the configured system to spectrum.csv")
    subparsers.add_parser("resonances", parents=[common], help="Write predicted resonances and windows to resonances.json")
    subparsers.add_parser("match", parents=[common], help="Fit a three-spike system on every window, write match_report.json")
    subparsers.add_parser("verify", parents=[common], help="Test a (two-spike, three-spike) pair for exact isospectrality")
    subparsers.add_parser("sweep", parents=[common], help="Fit targets with 1 to 5 resonances for alpha1 in {2, 3, 4}")
    return parser


def load_config(args):
    """RunConfig from the file named by --config with the command-line overrides applied"""
    config = RunConfig.from_dict(read_json(args.config))
    config = config.with_overrides(
        out_dir=args.out,
        plots=True if args.plots else None,
        strength_bound_factor=args.strength_bound_factor,
        seed=args.seed,
        use_global_window=True if args.use_global_window else None,
        workers=args.workers,
    )
    return config.validate()


def cmd_spectrum(config: RunConfig, verbose: bool = False):
    """Write spectrum.csv (header k,T) and, with plots on, spectrum.svg"""
    spectrum = ResonanceMatching(config, verbose=verbose).spectrum()
    out_dir = Path(config.out_dir)
    path = write_spectrum_csv(spectrum, out_dir / "spectrum.csv")
    if config.plots:
        plot_spectrum(spectrum, save_path=out_dir / "spectrum.svg")
    return path


def cmd_resonances(config: RunConfig, verbose: bool = False):
    """Write resonances.json with one entry {n, k_n, window_lo, window_hi, half_width} per resonance"""
    experiment = ResonanceMatching(config, verbose=verbose)
    target = config.target()
    payload = {
        "target": {"alpha1": target.alpha1, "alpha2": target.alpha2, "dx": target.dx},
        "k_range": {"k_min": float(config.k_min), "k_max": float(config.k_max)},
        "resonances": [window.to_dict() for window in experiment.resonances()],
        "detected_peaks": to_float_list(experiment.detected_peaks()),
    }
    write_json(payload, Path(config.out_dir) / "resonances.json")
    return payload


def cmd_match(config: RunConfig, verbose: bool = False):
    """Write match_report.json and, with plots on, one window_<n>.svg overlay per window"""
    report = ResonanceMatching(config, verbose=verbose).run()
    out_dir = Path(config.out_dir)
    write_json(report.to_dict(), out_dir / "match_report.json")
    if config.plots:
        target = config.target()
        for result in report.results:
            plot_window_overlay(target, result, save_path=out_dir / f"window_{result.window.index}.svg")
    return report


def _k_scan(data: Optional[dict], config: RunConfig):
    if data is None:
        return config.verify_grid()
    return uniform_k_grid(
        data.get("k_min", config.verify_k_min),
        data.get("k_max", config.verify_k_max),
        data.get("n_points", config.verify_n_points),
    )


def cmd_verify(data: dict, base_dir=".", out_dir=None):
    """Exact conditions and high-k scan for a supplied pair, or for every window of a match report

    Parameters
    ----------
    data: dict
        Either {"target": {"alpha1", "alpha2" (default -alpha1), "dx"},
        "candidate": {"strengths": [b1, b2, b3], "spacings": [dx12, dx23]},
        "k_scan": {"k_min", "k_max", "n_points"}, "tolerance": optional}
        or {"report": "<path to match_report.json>"}
    base_dir: str or Path
        Directory relative report paths are resolved against
    out_dir: str or Path
        verify.json is written here, "results" when None

    Returns
    -------
    payload: dict
    """
    if not isinstance(data, dict):
        raise DomainError("The verify input must be a JSON object")
    defaults = RunConfig()
    pairs = []
    if "report" in data:
        report_path = Path(base_dir) / data["report"]
        report = MatchReport.from_dict(read_json(report_path))
        target = report.config.target()
        k_scan = _k_scan(data.get("k_scan"), report.config)
        for result in report.results:
            verdict = verify_pair((target.alpha1, target.alpha2), target.dx, result.strengths, result.spacings, k_scan)
            verdict.update({"label": f"W{result.window.index}", "best_vector": to_float_list(result.best_vector)})
            pairs.append(verdict)
        source = str(report_path)
    else:
        missing = {"target", "candidate"} - set(data)
        if missing:
            raise DomainError(f"The verify input needs {sorted(missing)} or a report path")
        target, candidate = data["target"], data["candidate"]
        alpha1 = float(target["alpha1"])
        alphas = (alpha1, float(target.get("alpha2", -alpha1)))
        betas = np.asarray(candidate["strengths"], dtype=np.float64)
        spacings = np.asarray(candidate["spacings"], dtype=np.float64)
        if betas.shape != (3,) or spacings.shape != (2,):
            raise DomainError("The candidate needs three strengths and two spacings")
        verdict = verify_pair(
            alphas, float(target["dx"]), betas, spacings, _k_scan(data.get("k_scan"), defaults), data.get("tolerance")
        )
        verdict.update({"label": "candidate", "best_vector": to_float_list(np.concatenate([betas, spacings]))})
        pairs.append(verdict)
        source = "pair"
    payload = {"source": source, "pairs": pairs}
    write_json(payload, Path(defaults.out_dir if out_dir is None else out_dir) / "verify.json")
    return payload


def cmd_sweep(config: RunConfig, alphas=(2.0, 3.0, 4.0), resonance_counts=(1, 2, 3, 4, 5), verbose: bool = False):
    """Write sweep_windows.csv, sweep_summary.csv and sweep_by_position.csv, returns the summary frame"""
    frames = ResonanceSweep(config, alphas=alphas, resonance_counts=resonance_counts, verbose=verbose).run()
    out_dir = Path(config.out_dir)
    write_frame(frames["windows"], out_dir / "sweep_windows.csv")
    write_frame(frames["summary"], out_dir / "sweep_summary.csv")
    write_frame(frames["by_position"], out_dir / "sweep_by_position.csv")
    if config.plots:
        plot_sweep_summary(frames["summary"], save_path=out_dir / "sweep_summary.svg")
    return frames["summary"]


def run_command(args):
    if args.command == "verify":
        data = read_json(args.config)
        payload = cmd_verify(data, base_dir=Path(args.config).parent, out_dir=args.out)
        for pair in payload["pairs"]:
            print(f"{pair['label']}: exact conditions {'pass' if pair['conditions']['passed'] else 'fail'}, "
                  f"mismatch supremum {pair['mismatch_supremum']:.6g}")
        return EXIT_OK

    config = load_config(args)
    if args.command == "spectrum":
        path = cmd_spectrum(config, verbose=args.verbose)
        print(f"wrote {path}")
    elif args.command == "resonances":
        payload = cmd_resonances(config, verbose=args.verbose)
        print(f"{len(payload['resonances'])} resonances in [{config.k_min:g}, {config.k_max:g}]")
    elif args.command == "match":
        report = cmd_match(config, verbose=args.verbose)
        summary = report.summary()
        print(f"{summary['n_windows']} windows, mean MSE {summary['mean_mse']:.3e}, all converged: {summary['all_converged']}")
    elif args.command == "sweep":
        summary = cmd_sweep(config, verbose=args.verbose)
        print(f"{len(summary)} systems, worst average MSE {summary['average_mse'].max():.3e}")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None):
    """Entry point of the delta-scatter console script, returns the exit code"""
    args = build_parser().parse_args(argv)
    try:
        return run_command(args)
    except NoResonancesError as error:
        print(f"delta-scatter: {error}", file=sys.stderr)
        return EXIT_NO_RESONANCES
    except (ValueError, KeyError, TypeError, OSError) as error:
        print(f"delta-scatter: error: {error}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
