"""Command-line front end: ``pslset {design, correlate, radar}``.

Exit codes: 0 success (any termination status of the solver), 2 usage or
input errors, 3 numeric failures.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .correlation import LagConstraintSet, correlate_all_fft
from .errors import NumericError
from .mda import MdaConfig
from .radar import (ArrayGeometry, RadarScene, compress, estimate_capon, estimate_ls,
                    image_mse, noise_variance_from_snr, random_scene, simulate_received)
from .solver import SolverConfig, design
from .surrogate import D_MODES, CURVATURES, build_surrogate

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
OUT_ENV = "PSLSET_OUT"


class UsageError(Exception):
    pass


def _default_out() -> str:
    return os.environ.get(OUT_ENV, "out")


def _outdir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise UsageError(f"output directory {out} is not writable")
    return out


def _fmt(v: float) -> str:
    return f"{v:.10g}"


# design

def _design_one(args, seed: int, out: Path) -> dict:
    cfg = SolverConfig(
        L=args.L, M=args.M, max_outer_iters=args.iters, eps=args.eps, seed=seed,
        init="from_file" if args.init_file else "random_phase", init_file=args.init_file,
        mda=MdaConfig(max_inner_iters=args.inner_iters, gamma0=args.gamma0),
        eigen_mode=args.eigen_mode, curvature=args.curvature,
        record_inner=args.inner_trace,
    )
    start = time.perf_counter()
    trace = design(cfg)
    elapsed = time.perf_counter() - start

    K = LagConstraintSet(args.L, args.M)
    table = correlate_all_fft(trace.final)
    io.save_sequences(trace.final, out / "sequences.json")
    io.write_trace_csv(trace, out / "trace.csv", timing=args.timing)
    io.write_correlation_csv(table, out / "correlations.csv")
    if args.inner_trace:
        io.write_inner_trace_csv(trace.inner_history, out / "inner_trace.csv")
    if args.surrogate_debug:
        io.write_surrogate_debug_csv(build_surrogate(trace.final, K, table, args.eigen_mode,
                                                     args.curvature), out / "surrogate.csv")
    summary = {"L": args.L, "M": args.M, "seed": seed, "status": trace.status,
               "iterations": len(trace.records) - 1, "initial_psl": trace.initial_psl,
               **io.metrics_summary(table, K)}
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    summary["seconds"] = elapsed
    return summary


def _design_worker(payload):
    args, seed, out = payload
    return _design_one(args, seed, Path(out))


def cmd_design(args) -> int:
    if args.L < 1 or args.M < 2:
        raise UsageError(f"need --L >= 1 and --M >= 2, got L={args.L}, M={args.M}")
    if args.iters < 1 or not args.eps > 0 or args.inner_iters < 1 or not args.gamma0 > 0:
        raise UsageError("--iters, --eps, --inner-iters and --gamma0 must be positive")
    if args.init_file and not Path(args.init_file).is_file():
        raise UsageError(f"init file {args.init_file} not found")
    out = _outdir(args.out)
    seeds = args.seeds if args.seeds else [args.seed]
    if len(seeds) == 1:
        results = [_design_one(args, seeds[0], out)]
    else:
        payloads = [(args, s, str(_outdir(out / f"seed_{s}"))) for s in seeds]
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(_design_worker, payloads))
        else:
            results = [_design_worker(p) for p in payloads]
    for r in results:
        print(f"seed={r['seed']} status={r['status']} iterations={r['iterations']} "
              f"psl={_fmt(r['psl'])} isl={_fmt(r['isl'])} seconds={r['seconds']:.1f}")
    return EXIT_OK


# correlate

def cmd_correlate(args) -> int:
    set_ = io.load_sequences(args.input)
    out = _outdir(args.out)
    table = correlate_all_fft(set_)
    K = LagConstraintSet(set_.L, set_.M)
    io.write_correlation_csv(table, out / "correlations.csv")
    summary = io.metrics_summary(table, K)
    (out / "metrics.json").write_text(json.dumps(summary, indent=2) + "\n")
    a = summary["argmax"]
    print(f"psl={_fmt(summary['psl'])} isl={_fmt(summary['isl'])} "
          f"argmax=({a['i']},{a['j']},{a['k']})")
    return EXIT_OK


# radar

def cmd_radar(args) -> int:
    set_ = io.load_sequences(args.input)
    geom = ArrayGeometry(num_tx=args.num_tx, num_rx=args.num_rx,
                         tx_spacing=args.tx_spacing, rx_spacing=args.rx_spacing)
    if set_.L != geom.num_tx:
        raise UsageError(f"sequence file has L={set_.L} but the array has {geom.num_tx} "
                         "transmitters (set --num-tx)")
    if args.scene:
        scene = io.load_scene(args.scene, seed=args.seed)
        if args.snr_db is not None:
            scene = RadarScene(scene.theta_deg, scene.beta, noise_variance_from_snr(args.snr_db))
    else:
        snr = 30.0 if args.snr_db is None else args.snr_db
        scene = random_scene(args.Q, args.P, density=args.density, seed=args.seed,
                             noise_variance=noise_variance_from_snr(snr))

    out = _outdir(args.out)
    rx = simulate_received(scene, geom, set_, seed=args.seed)
    comp = compress(rx, set_)
    header = [f"{t:g}" for t in scene.theta_deg]
    io.write_matrix_csv(np.abs(scene.beta), out / "true_abs.csv", header)
    names = ["ls", "capon"] if args.estimator == "both" else [args.estimator]
    summary = {"seed": args.seed, "snr_db": scene.snr_db, "Q": scene.Q, "P": scene.P}
    for name in names:
        est = estimate_ls if name == "ls" else estimate_capon
        beta_hat = est(comp, geom, scene.theta_deg)
        io.write_matrix_csv(np.abs(beta_hat), out / f"image_{name}.csv", header)
        mse = image_mse(beta_hat, scene.beta)
        summary[f"mse_{name}"] = mse
        print(f"estimator={name} mse={mse:.6e} seed={args.seed}")
    (out / "radar_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pslset", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", help="minimize the PSL of a unimodular sequence set")
    d.add_argument("--L", type=int, required=True, help="number of sequences")
    d.add_argument("--M", type=int, required=True, help="sequence length")
    d.add_argument("--iters", type=int, default=500, help="max outer iterations")
    d.add_argument("--eps", type=float, default=1e-6, help="relative PSL change stop")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--seeds", type=int, nargs="+", help="sweep several seeds (one subdir each)")
    d.add_argument("--jobs", type=int, default=1, help="worker processes for --seeds")
    d.add_argument("--init-file", help="start from this sequence JSON")
    d.add_argument("--gamma0", type=float, default=1.0, help="mirror descent step scale")
    d.add_argument("--inner-iters", type=int, default=200)
    d.add_argument("--eigen-mode", choices=D_MODES, default="spectral_bound_D")
    d.add_argument("--curvature", choices=CURVATURES, default="direct")
    d.add_argument("--timing", action="store_true",
                   help="record wall-clock seconds in trace.csv (breaks byte-determinism)")
    d.add_argument("--inner-trace", action="store_true", help="write inner_trace.csv")
    d.add_argument("--surrogate-debug", action="store_true",
                   help="write the surrogate at the final iterate to surrogate.csv")
    d.add_argument("--out", default=_default_out())
    d.set_defaults(func=cmd_design)

    c = sub.add_parser("correlate", help="dump correlations and PSL/ISL of a sequence file")
    c.add_argument("--in", dest="input", required=True)
    c.add_argument("--out", default=_default_out())
    c.set_defaults(func=cmd_correlate)

    r = sub.add_parser("radar", help="simulate MIMO imaging with a sequence set")
    r.add_argument("--in", dest="input", required=True)
    scene = r.add_mutually_exclusive_group(required=True)
    scene.add_argument("--scene", help="scene JSON (beta or ASCII mask)")
    scene.add_argument("--random-scene", action="store_true")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--estimator", choices=("ls", "capon", "both"), default="both")
    r.add_argument("--snr-db", type=float, default=None)
    r.add_argument("--Q", type=int, default=20, help="range bins of a random scene")
    r.add_argument("--P", type=int, default=21, help="scan angles of a random scene")
    r.add_argument("--density", type=float, default=0.1)
    r.add_argument("--num-tx", type=int, default=4)
    r.add_argument("--num-rx", type=int, default=4)
    r.add_argument("--tx-spacing", type=float, default=2.0)
    r.add_argument("--rx-spacing", type=float, default=0.5)
    r.add_argument("--out", default=_default_out())
    r.set_defaults(func=cmd_radar)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"pslset {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"pslset {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
