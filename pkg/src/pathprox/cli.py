"""Command-line entry point: ``pathprox <command> [options]``.

Exit codes: 0 success, 1 a verification check failed, 2 bad usage or I/O.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .activations import ActivationKind
from .attack import AttackConfig, robust_error
from .bench import run_bench
from .checks import run_all
from .data import blob_datasets, load_csv, make_blobs, split_dataset, write_csv
from .model import error_rate
from .numerics import InputValidationError, make_rng
from .optimizer import REGULARIZERS, TrainConfig, run_stochastic
from .weights import WeightFileError, load_weights, save_weights

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _eps_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad epsilon list {text!r}") from None
    if not vals or any(not np.isfinite(v) or v < 0 for v in vals):
        raise argparse.ArgumentTypeError("epsilons must be finite and non-negative")
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pathprox",
        description="Exact proximal training with the 1-path-norm of shallow networks.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="write the seeded two-class blob dataset as CSV")
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--samples", type=int, default=2000)
    g.add_argument("--features", type=int, default=20)
    g.add_argument("--separation", type=float, default=4.0)

    t = sub.add_parser("train", help="train a shallow network, write per-epoch JSONL metrics")
    t.add_argument("--data", help="label-first CSV; omit to use the built-in blob dataset")
    t.add_argument("--test-data", help="CSV scaled with the training file's ranges")
    t.add_argument("--test-fraction", type=float, default=0.2,
                   help="held-out share of --data when --test-data is absent")
    t.add_argument("--reg", choices=REGULARIZERS, default="path")
    t.add_argument("--lambda", dest="lam", type=float, default=1e-3)
    t.add_argument("--lr", type=float, default=5e-2)
    t.add_argument("--epochs", type=int, default=20)
    t.add_argument("--batch", type=int, default=100)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--hidden", type=int, default=200)
    t.add_argument("--method", choices=("prox", "subgradient"), default="prox")
    t.add_argument("--act", choices=("elu", "softplus"), default="elu")
    t.add_argument("--eps-list", type=_eps_list,
                   help="report robust test error at the first epsilon after every epoch")
    t.add_argument("--weights-out", help="write final weights in PPRX1 format")
    t.add_argument("--out", required=True, help="JSONL metrics file")

    c = sub.add_parser("prox-check", help="randomized oracle and property suites")
    c.add_argument("--trials", type=int, default=10_000)
    c.add_argument("--max-m", type=int, default=8)
    c.add_argument("--max-p", type=int, default=6)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--inject-tie-fault", action="store_true",
                   help="test hook: run the fast operators with the flipped tie rule")

    b = sub.add_parser("bench-prox", help="time the prox operators, write a CSV table")
    b.add_argument("--max-m", type=int, default=1_000_000)
    b.add_argument("--max-p", type=int, default=8)
    b.add_argument("--trials", type=int, default=5, help="repeats per size (best is kept)")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True)

    a = sub.add_parser("attack-eval", help="clean and PGD robust error over an epsilon grid")
    a.add_argument("--weights", required=True, help="PPRX1 weight file")
    a.add_argument("--data", required=True, help="label-first CSV of test points")
    a.add_argument("--eps-list", type=_eps_list, default=[0.0, 0.05, 0.1, 0.2, 0.3])
    a.add_argument("--lambda", dest="lam", type=float, default=float("nan"),
                   help="regularization strength of the model, echoed in the output")
    a.add_argument("--act", choices=("elu", "softplus"), default="elu")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--out", required=True)
    return ap


def cmd_gen_data(args) -> int:
    if args.samples < 2 or args.features < 1:
        raise UsageError("need --samples >= 2 and --features >= 1")
    labels, raw = make_blobs(args.samples, args.features, args.seed, args.separation)
    write_csv(args.out, labels, raw)
    print(f"wrote {args.samples} rows to {args.out}")
    return EXIT_OK


def _train_data(args):
    if args.data is None:
        return blob_datasets(seed=0)
    if args.test_data:
        train = load_csv(args.data)
        return train, load_csv(args.test_data, scale=train.scale, split="test")
    if not 0 <= args.test_fraction < 1:
        raise UsageError("--test-fraction must be in [0, 1)")
    # the split depends on the file only, so runs with different seeds share it
    return split_dataset(load_csv(args.data), args.test_fraction, seed=0)


def cmd_train(args) -> int:
    try:
        cfg = TrainConfig(reg=args.reg, lam=args.lam, step=args.lr, epochs=args.epochs,
                          batch=args.batch, seed=args.seed, act=args.act,
                          method=args.method)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.hidden < 1:
        raise UsageError("--hidden must be >= 1")
    train, test = _train_data(args)
    eps = args.eps_list[0] if args.eps_list else None
    params, history = run_stochastic(train, test, cfg, args.hidden, attack_eps=eps)
    echo = cfg.echo()
    echo["hidden"] = args.hidden
    echo["data"] = args.data or "blobs"
    with open(args.out, "w") as fh:
        for rec in history[1:]:
            row = rec.to_dict()
            row["config"] = echo
            row["seed"] = cfg.seed
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    if args.weights_out:
        save_weights(args.weights_out, params)
    last = history[-1]
    print(f"epoch {last.epoch}: objective {last.objective:.6g} "
          f"nnz {last.nnz_fraction:.4f} test error {last.clean_error}")
    return EXIT_OK


def cmd_prox_check(args) -> int:
    if args.trials < 1 or args.max_m < 1 or args.max_p < 1:
        raise UsageError("--trials, --max-m and --max-p must be >= 1")
    tie = "dense" if args.inject_tie_fault else "sparse"
    results = run_all(args.trials, args.max_m, args.max_p, args.seed, tie_break=tie)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def cmd_bench_prox(args) -> int:
    if args.max_m < 1000 or args.max_p < 1 or args.trials < 1:
        raise UsageError("need --max-m >= 1000, --max-p >= 1, --trials >= 1")
    rows = run_bench(args.max_m, args.max_p, make_rng(args.seed), repeats=args.trials)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["op", "p", "m", "seconds", "evaluations"])
        for op, p, m, sec, ev in rows:
            w.writerow([op, p, m, f"{sec:.6e}", ev])
            print(f"{op:12s} p={p:<3d} m={m:<8d} {sec:.4e} s")
    return EXIT_OK


def cmd_attack_eval(args) -> int:
    params = load_weights(args.weights)
    data = load_csv(args.data, split="test")
    if data.features.shape[1] != params.inputs:
        raise UsageError(f"data has {data.features.shape[1]} features, "
                         f"weights expect {params.inputs}")
    if data.labels.max() >= params.outputs:
        raise UsageError(f"labels reach {data.labels.max()}, model has {params.outputs} classes")
    act = ActivationKind.parse(args.act)
    clean = error_rate(params, act, data.features, data.labels)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "epsilon", "clean_error", "robust_error"])
        for eps in args.eps_list:
            # each epsilon gets the same attack stream
            rob = robust_error(params, act, data.features, data.labels,
                               AttackConfig(eps), make_rng(args.seed))
            w.writerow([args.lam, eps, clean, rob])
            print(f"eps={eps:g} clean={clean:.4f} robust={rob:.4f}")
    return EXIT_OK


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "prox-check": cmd_prox_check,
    "bench-prox": cmd_bench_prox,
    "attack-eval": cmd_attack_eval,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on usage errors
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"pathprox {args.command}: error: {exc}", file=sys.stderr)
    except (OSError, InputValidationError, WeightFileError) as exc:
        print(f"pathprox {args.command}: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
