"""Command-line entry point: ``mvdual {synth,factorize,eval,bench}``.

Exit codes: 0 ok, 2 usage, 3 generation failure, 4 rank deficiency,
5 solver failure.
"""

import argparse
import csv
import itertools
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import baselines, files, metrics, preprocess, solver, synthgen

EXIT_OK, EXIT_USAGE, EXIT_GENERATION, EXIT_RANK, EXIT_SOLVER = 0, 2, 3, 4, 5

# default lambda per SNR (dB) for noisy data, noiseless default is 100
LAMBDA_BY_SNR = {60: 10.0, 40: 1.0, 30: 0.5}
NOISELESS_LAMBDA = 100.0

BENCH_FIELDS = [
    "trial", "r", "m", "n1", "n2", "purity", "snr", "lambda", "seed",
    "status", "err", "mrsa", "rel_error", "snpa_err", "outer_iters", "seconds", "message",
]


class UsageError(Exception):
    pass


def lambda_for_snr(snr):
    """Default penalty weight for data at ``snr`` dB; the nearest tabulated level wins."""
    if snr is None:
        return NOISELESS_LAMBDA
    nearest = min(LAMBDA_BY_SNR, key=lambda s: abs(s - snr))
    return LAMBDA_BY_SNR[nearest]


def _manifest(args, argv, outputs, started, **extra):
    return {
        "command": args.command,
        "argv": list(argv),
        "config": {k: v for k, v in vars(args).items() if k != "func"},
        "version": files.package_version(),
        "seconds": time.perf_counter() - started,
        "outputs": [str(p) for p in outputs],
        **extra,
    }


def _outdir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_synth(args, argv):
    started = time.perf_counter()
    try:
        spec = synthgen.SyntheticSpec(
            r=args.r, m=args.m, n1=args.n1, n2=args.n2, purity=args.purity,
            snr=args.snr, seed=args.seed, include_vertices=args.include_vertices,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    try:
        inst = synthgen.generate(spec)
    except synthgen.InfeasiblePurityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    out = _outdir(args.out)
    written = {"X": inst.X_clean, "W_t": inst.W_t, "H_t": inst.H_t}
    if inst.X_noisy is not None:
        written["X_noisy"] = inst.X_noisy
    paths = []
    for name, A in written.items():
        path = out / f"{name}.csv"
        files.write_matrix(path, A, comment=f"{name} from synth seed {spec.seed}")
        paths.append(path)
    files.write_json(
        out / "manifest.json",
        _manifest(args, argv, paths, started, achieved_purity=inst.achieved_purity),
        "manifest",
    )
    print(f"wrote {', '.join(p.name for p in paths)} to {out}")
    return EXIT_OK


def _load(path):
    try:
        return files.read_matrix(path)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def cmd_factorize(args, argv):
    started = time.perf_counter()
    X = _load(args.input)
    lam = args.lam if args.lam is not None else lambda_for_snr(args.snr_hint)
    try:
        config = solver.SolverConfig(
            lam=lam, n_init=args.n_init, init_mode=args.init, base_seed=args.seed,
            n_jobs=solver.default_threads(),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not 2 <= args.rank <= X.shape[1]:
        raise UsageError(f"rank must lie in [2, {X.shape[1]}]")
    try:
        res = solver.factorize(X, args.rank, config)
    except preprocess.RankDeficiencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RANK
    except solver.SolverFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    out = _outdir(args.out)
    w_path, h_path = out / "W.csv", out / "H.csv"
    files.write_matrix(w_path, res.W, comment="estimated vertices, one per column")
    files.write_matrix(h_path, res.H, comment="abundances, columns in the unit simplex")
    result = {
        "config": config.to_dict(),
        "outer_iters": res.outer_iters,
        "winning_candidate": res.winning_candidate,
        "candidate_volumes": res.candidate_volumes,
        "volume_trace": res.volume_trace,
        "v_trace": res.v_trace,
        "inner_sweeps": res.inner_sweeps,
        "monotone": res.monotone(),
        "rel_error": metrics.rel_error(X, res.W, res.H),
        "warnings": res.warnings,
        "seconds": time.perf_counter() - started,
    }
    files.write_json(out / "result.json", result, "result")
    paths = [w_path, h_path, out / "result.json"]
    files.write_json(out / "manifest.json", _manifest(args, argv, paths, started), "manifest")
    print(f"outer iterations {res.outer_iters}, RE {result['rel_error']:.3e}, wrote {out}")
    return EXIT_OK


def cmd_eval(args, argv):
    started = time.perf_counter()
    W = _load(args.W)
    W_t = _load(args.W_true)
    X = _load(args.X) if args.X else None
    H = _load(args.H) if args.H else None
    if (X is None) != (H is None):
        raise UsageError("--X and --H must be given together")
    try:
        report = metrics.evaluate(W_t, W, X, H)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(f"ERR {report.err:.6e}")
    print(f"MRSA {report.mrsa:.6f}")
    print(f"RE {report.rel_error:.6e}")
    print(f"permutation {' '.join(map(str, report.best_permutation))}")
    if args.output:
        files.write_json(args.output, report.to_dict(), "eval")
        files.write_json(
            Path(args.output).with_suffix(".manifest.json"),
            _manifest(args, argv, [args.output], started),
            "manifest",
        )
    return EXIT_OK


def _as_list(value, default):
    if value is None:
        return list(default)
    return list(value) if isinstance(value, list) else [value]


def expand_sweep(cfg):
    """Trial parameter dicts from a sweep config, in a fixed order."""
    if not isinstance(cfg, dict) or not cfg:
        raise UsageError("sweep config is empty")
    seeds = cfg.get("seeds", 1)
    seed_list = list(range(seeds)) if isinstance(seeds, int) else list(seeds)
    base_seed = int(cfg.get("base_seed", 0))
    grid = itertools.product(
        _as_list(cfg.get("r"), [3]),
        _as_list(cfg.get("purity"), [1.0]),
        _as_list(cfg.get("snr"), [None]),
        _as_list(cfg.get("lambda"), [None]),
        seed_list,
    )
    trials = []
    for r, purity, snr, lam, seed in grid:
        r = int(r)
        trials.append({
            "trial": len(trials),
            "r": r,
            "m": int(cfg.get("m", r)),
            "n1": int(cfg.get("n1_per_facet", 30)) * r,
            "n2": int(cfg.get("n2", 10)),
            "purity": float(purity),
            "snr": None if snr is None else float(snr),
            "lambda": float(lam) if lam is not None else lambda_for_snr(snr),
            "seed": base_seed + int(seed),
            "n_init": int(cfg.get("n_init", 5)),
            "init": cfg.get("init", "mean"),
            "include_vertices": bool(cfg.get("include_vertices", False)),
        })
    if not trials:
        raise UsageError("sweep config expands to no trials")
    return trials


def run_trial(t):
    """One bench row; failures are recorded rather than raised."""
    row = {k: t.get(k) for k in BENCH_FIELDS}
    row.update(status="ok", message="")
    started = time.perf_counter()
    try:
        spec = synthgen.SyntheticSpec(
            r=t["r"], m=t["m"], n1=t["n1"], n2=t["n2"], purity=t["purity"],
            snr=t["snr"], seed=t["seed"], include_vertices=t["include_vertices"],
        )
        inst = synthgen.generate(spec)
        config = solver.SolverConfig(
            lam=t["lambda"], n_init=t["n_init"], init_mode=t["init"], base_seed=t["seed"]
        )
        res = solver.factorize(inst.X, t["r"], config)
        report = metrics.evaluate(inst.W_t, res.W, inst.X, res.H)
        K = list(baselines.snpa(inst.X, t["r"]))
        row.update(
            err=report.err, mrsa=report.mrsa, rel_error=report.rel_error,
            snpa_err=metrics.err(inst.W_t, inst.X[:, K])[0], outer_iters=res.outer_iters,
        )
    except Exception as exc:  # noqa: BLE001 - bench rows record any failure
        row.update(status="failed", message=f"{type(exc).__name__}: {exc}")
    row["seconds"] = time.perf_counter() - started
    return row


def cmd_bench(args, argv):
    started = time.perf_counter()
    try:
        cfg = files.read_json(args.config)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read sweep config {args.config}: {exc}") from exc
    trials = expand_sweep(cfg)
    workers = solver.default_threads()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_trial, trials))
    else:
        rows = [run_trial(t) for t in trials]
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCH_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: "" if row.get(k) is None else row[k] for k in BENCH_FIELDS})
    files.write_json(
        out.with_suffix(".manifest.json"),
        _manifest(args, argv, [out], started, sweep=cfg, trials=len(trials)),
        "manifest",
    )
    failed = sum(row["status"] != "ok" for row in rows)
    print(f"{len(rows)} trials, {failed} failed, wrote {out}")
    return EXIT_SOLVER if failed == len(rows) else EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="mvdual", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a synthetic instance")
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--m", type=int)
    s.add_argument("--n1", type=int)
    s.add_argument("--n2", type=int, default=10)
    s.add_argument("--purity", type=float, default=1.0)
    s.add_argument("--snr", type=float)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--include-vertices", action="store_true")
    s.add_argument("--out", default=".")
    s.set_defaults(func=cmd_synth)

    f = sub.add_parser("factorize", help="run MV-Dual on a CSV matrix")
    f.add_argument("--input", required=True)
    f.add_argument("--rank", type=int, required=True)
    f.add_argument("--lambda", dest="lam", type=float)
    f.add_argument("--snr-hint", type=float, help="pick lambda from the SNR (dB) table")
    f.add_argument("--n-init", type=int, default=5)
    f.add_argument("--init", choices=["mean", "snpa"], default="mean")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", default=".")
    f.set_defaults(func=cmd_factorize)

    e = sub.add_parser("eval", help="compare an estimate with the ground truth")
    e.add_argument("--W", required=True)
    e.add_argument("--W-true", required=True)
    e.add_argument("--X")
    e.add_argument("--H")
    e.add_argument("--output")
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bench", help="run a parameter sweep to a long-format CSV")
    b.add_argument("--config", required=True, help="JSON sweep config")
    b.add_argument("--output", required=True)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if args.command == "synth":
        if args.m is None:
            args.m = args.r
        if args.n1 is None:
            args.n1 = 30 * args.r
    try:
        return args.func(args, argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
