"""Command-line front end.

    spikes run --preset fig6 --out fig6.csv [--seed N] [--workers K] [--timing]
    spikes run --config experiment.json --out out.csv
    spikes sweep-alpha --out sweep.csv [--alphas 0.4 0.5 0.6] [--gammas ...]
    spikes verify --suite fast|full
    spikes sample-limit --kind thermal --jump01 0.77 --jump10 0.23 ...
    spikes trajectory --preset fig8 --out traj.csv

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 statistics error, 4 numerical error.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigurationError, NumericalError, StatisticsError

EXIT_VERIFY = 1
EXIT_CONFIG = 2
EXIT_STATS = 3
EXIT_NUMERIC = 4


def _add_run(sub):
    p = sub.add_parser("run", help="execute an experiment and write CSV")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--config", help="path to a JSON experiment description")
    g.add_argument("--preset", help="canned configuration name (fig5..fig9, figA, ...)")
    p.add_argument("--seed", type=int, default=None, help="override the master seed")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="results.csv")
    p.add_argument("--timing", action="store_true",
                   help="fill wall_time_s (breaks byte-for-byte reproducibility)")


def _add_sweep(sub):
    p = sub.add_parser("sweep-alpha", help="drive-scaling sweep of the angular model")
    p.add_argument("--alphas", type=float, nargs="+", default=None)
    p.add_argument("--gammas", type=float, nargs="+", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="sweep_alpha.csv")
    p.add_argument("--timing", action="store_true")


def _add_verify(sub):
    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--suite", choices=("fast", "full"), default="fast")
    p.add_argument("--workers", type=int, default=1)


def _add_sample_limit(sub):
    p = sub.add_parser("sample-limit", help="sample the limiting jump/spike process")
    p.add_argument("--kind", choices=("unitary", "thermal", "measurement", "conjecture"),
                   default="thermal")
    p.add_argument("--coefficient", type=float, default=0.77,
                   help="intensity coefficient (W-+, gamma2(1-eta2), |F(0)|, omega)")
    p.add_argument("--coefficient1", type=float, default=0.0,
                   help="from-one intensity coefficient (0 disables that side)")
    p.add_argument("--jump01", type=float, required=True)
    p.add_argument("--jump10", type=float, required=True)
    p.add_argument("--t-end", type=float, default=10.0)
    p.add_argument("--a-min", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=20240501)
    p.add_argument("--out", default="limit_sample.csv")


def _add_trajectory(sub):
    p = sub.add_parser("trajectory", help="dump one trajectory time series")
    p.add_argument("--preset", required=True, help="trajectory preset (fig8)")
    p.add_argument("--seed", type=int, default=20240501)
    p.add_argument("--out", default="trajectory.csv")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="spikes", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)
    _add_run(sub)
    _add_sweep(sub)
    _add_verify(sub)
    _add_sample_limit(sub)
    _add_trajectory(sub)
    args = ap.parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StatisticsError as exc:
        print(f"statistics error: {exc}", file=sys.stderr)
        return EXIT_STATS
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def _dispatch(args) -> int:
    from . import harness, presets

    if args.command == "run":
        if args.preset:
            configs = presets.get_preset(args.preset)
        else:
            with open(args.config, "r", encoding="utf-8") as fh:
                configs = [harness.ExperimentConfig.from_json(fh.read())]
        rows = []
        for cfg in configs:
            if args.seed is not None:
                cfg.master_seed = args.seed
            rows.extend(harness.run(cfg, workers=args.workers, timing=args.timing))
        harness.write_csv(rows, args.out)
        print(f"wrote {len(rows)} rows to {args.out}")
        return 0

    if args.command == "sweep-alpha":
        from .presets import SWEEP_ALPHA_DEFAULTS as d
        rows = harness.sweep_alpha(
            args.alphas or d["alphas"], args.gammas or d["gammas"],
            t_end=d["t_end"], boxes=d["boxes"],
            master_seed=args.seed if args.seed is not None else 20240501,
            workers=args.workers, timing=args.timing)
        harness.write_csv(rows, args.out)
        print(f"wrote {len(rows)} rows to {args.out}")
        return 0

    if args.command == "verify":
        from .verify import run_suite
        results = run_suite(args.suite, workers=args.workers)
        failed = [r for r in results if not r.passed]
        print(f"{len(results) - len(failed)}/{len(results)} checks passed")
        return EXIT_VERIFY if failed else 0

    if args.command == "sample-limit":
        return _sample_limit(args)

    if args.command == "trajectory":
        return _trajectory(args)

    raise ConfigurationError(f"unknown command {args.command!r}")


def _sample_limit(args) -> int:
    import csv

    from .oracle import IntensitySpec, intensity_density
    from .pdmp import RngStream
    from .stats import sample_limit_spike_process

    spec0 = IntensitySpec(args.kind, args.coefficient)
    intensity0 = lambda x: intensity_density(spec0, x)
    intensity1 = None
    if args.coefficient1 > 0:
        spec1 = IntensitySpec("conjecture", args.coefficient1, side="from_one")
        intensity1 = lambda x: intensity_density(spec1, x)
    sample = sample_limit_spike_process(
        args.jump01, args.jump10, intensity0, intensity1,
        t_end=args.t_end, stream=RngStream(args.seed), a_min=args.a_min)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time", "height", "side"])
        for t, h, s in zip(sample.spike_times, sample.spike_heights, sample.spike_sides):
            w.writerow([repr(float(t)), repr(float(h)), int(s)])
    print(f"wrote {sample.spike_times.size} spikes "
          f"({sample.jump_times.size} chain switches) to {args.out}")
    return 0


def _trajectory(args) -> int:
    import csv

    from .models import UnitaryParams
    from .presets import TRAJECTORY_PRESETS
    from .renewal import bloch_euler_trajectory

    spec = TRAJECTORY_PRESETS.get(args.preset)
    if spec is None:
        raise ConfigurationError(
            f"unknown trajectory preset {args.preset!r}; "
            f"available: {sorted(TRAJECTORY_PRESETS)}")
    p = UnitaryParams(omega=spec["params"]["omega"], gamma=spec["gamma"],
                      eta=spec["params"]["eta"])
    times, qs = bloch_euler_trajectory(p, spec["dt"], spec["t_end"],
                                       master_seed=args.seed, stride=spec["stride"])
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time", "state"])
        for t, q in zip(times, qs):
            w.writerow([repr(float(t)), repr(float(q))])
    print(f"wrote {times.size} samples to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
