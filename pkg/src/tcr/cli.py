"""Command line harness: gen-data, train, sweep, eval.

Every command is deterministic given its flags; all randomness flows from
the three named seeds (init, shuffle, noise). CSV outputs are byte-stable
across reruns (floats written with repr).
"""

import argparse
import itertools
import json
import os
import sys

import numpy as np

from . import data, noise
from .errors import ConfigError, ParseError, TcrError
from .model import load_checkpoint, save_checkpoint
from .trainer import TrainConfig, evaluate, run_training

METRICS_HEADER = ("epoch,lr,train_loss,train_acc_noisy,"
                  "train_acc_clean_subset,train_acc_corrupt_subset,test_acc")
SWEEP_HEADER = "method,params,seed,final_test_acc,final_train_acc,status"


def _fmt(v):
    return repr(float(v))


def parse_noise(text, seed, pairing=None):
    """Parse a KIND:ETA flag like uniform:0.4 into a NoiseSpec (or None)."""
    if text in (None, "", "none"):
        return None
    try:
        kind, eta = text.split(":")
        eta = float(eta)
    except ValueError:
        raise ConfigError(f"noise spec must look like uniform:0.4, got {text!r}")
    kind = {"openset": "open-set"}.get(kind, kind)
    if pairing is not None:
        pairing = {int(j): int(k) for j, k in pairing.items()}
    return noise.NoiseSpec(kind=kind, eta=eta, seed=seed, pairing=pairing)


def make_ood_like(dataset, count, seed):
    """A disjoint synthetic pool standing in for out-of-distribution data.

    Same dimensionality as the dataset, shifted far outside its bounding
    box so the content genuinely belongs to no known class.
    """
    per_class = -(-count // dataset.num_classes)
    ood = data.gaussian_blobs(dataset.num_classes, per_class, dataset.dim,
                              spread=1.0, seed=seed)
    span = dataset.features.max() - dataset.features.min()
    ood.features += dataset.features.max() + span
    return ood


def apply_noise_cmdline(train_ds, spec):
    if spec is None:
        return train_ds
    if spec.kind == "open-set":
        ood = make_ood_like(train_ds, len(train_ds), spec.seed + 1)
        return noise.corrupt(train_ds, spec, oodset=ood)
    return noise.corrupt(train_ds, spec)


def write_metrics_csv(path, history):
    with open(path, "w") as fh:
        fh.write(METRICS_HEADER + "\n")
        for m in history:
            fh.write(",".join([
                str(m.epoch), _fmt(m.lr), _fmt(m.train_loss),
                _fmt(m.train_acc_noisy), _fmt(m.train_acc_clean_subset),
                _fmt(m.train_acc_corrupt_subset), _fmt(m.test_acc),
            ]) + "\n")


def write_trace_csv(path, trace, c):
    with open(path, "w") as fh:
        fh.write("epoch,sample_id," +
                 ",".join(f"p{k}" for k in range(c)) + "\n")
        for epoch, sid, p in trace:
            fh.write(f"{epoch},{sid}," + ",".join(_fmt(v) for v in p) + "\n")


def _parse_milestones(text):
    if not text:
        return []
    try:
        return [(int(e), float(d)) for e, d in
                (part.split(":") for part in text.split(","))]
    except ValueError:
        raise ConfigError(f"milestones must look like 30:10,45:10, got {text!r}")


def _parse_int_list(text):
    return [int(v) for v in text.split(",")] if text else []


def build_train_config(args, train_ds):
    method = args.method
    forward_T = None
    if method == "forward":
        spec = parse_noise(args.noise, args.seed_noise, args.pairing)
        if spec is None or spec.kind == "open-set":
            raise ConfigError(
                "forward method needs a closed-set --noise spec for its "
                "ground-truth transition matrix")
        if spec.kind == "uniform":
            forward_T = noise.uniform_transition(spec.eta, train_ds.num_classes)
        else:
            pairing = spec.pairing or noise.cyclic_pairing(train_ds.num_classes)
            forward_T = noise.asymmetric_transition(
                spec.eta, pairing, train_ds.num_classes)
    beta = 1.0 if method == "ce" else args.beta
    return TrainConfig(
        method=method, beta=beta, gamma=args.gamma, delta=args.delta,
        alpha=args.alpha, t_squeeze=args.ts, epochs=args.epochs,
        batch_size=args.batch_size, lr=args.lr,
        milestones=_parse_milestones(args.milestones),
        momentum=args.momentum, weight_decay=args.weight_decay,
        hidden_dims=_parse_int_list(args.hidden), q=args.q,
        forward_T=forward_T, seed_init=args.seed_init,
        seed_shuffle=args.seed_shuffle)


def cmd_gen_data(args):
    full = data.gaussian_blobs(args.classes, args.per_class, args.dim,
                               args.spread, args.seed, radius=args.radius)
    train_ds, test_ds = data.split(full, args.test_fraction, args.seed)
    os.makedirs(args.out, exist_ok=True)
    train_path = os.path.join(args.out, "train.csv")
    test_path = os.path.join(args.out, "test.csv")
    data.save(train_path, train_ds)
    data.save(test_path, test_ds)
    print(train_path)
    print(test_path)
    return 0


def cmd_train(args):
    train_ds = data.load(args.train)
    test_ds = data.load(args.test)
    spec = parse_noise(args.noise, args.seed_noise, args.pairing)
    train_ds = apply_noise_cmdline(train_ds, spec)
    config = build_train_config(args, train_ds)
    trace_ids = _parse_int_list(args.trace_ids)

    params, history, trace = run_training(train_ds, test_ds, config,
                                          trace_ids=trace_ids or None)
    os.makedirs(args.out, exist_ok=True)
    write_metrics_csv(os.path.join(args.out, "metrics.csv"), history)
    save_checkpoint(os.path.join(args.out, "checkpoint.bin"), params)
    if trace_ids:
        write_trace_csv(os.path.join(args.out, "trace.csv"), trace,
                        train_ds.num_classes)
    if args.noisy_out:
        data.save(args.noisy_out, train_ds)
    return 0


def _sub_seeds(seed):
    """Three derived seeds (init, shuffle, noise) from one sweep seed."""
    state = np.random.SeedSequence(seed).generate_state(3)
    return int(state[0]), int(state[1]), int(state[2])


def _grid_cells(entry):
    grid = entry.get("grid", {})
    keys = sorted(grid)
    for values in itertools.product(*(grid[k] for k in keys)):
        yield dict(zip(keys, values))


def cmd_sweep(args):
    with open(args.config) as fh:
        cfg = json.load(fh)
    out_dir = args.out or cfg.get("out")
    if not out_dir:
        raise ConfigError("sweep needs an output directory (--out or 'out')")
    os.makedirs(out_dir, exist_ok=True)

    ds_cfg = cfg.get("dataset", {})
    base = cfg.get("base", {})
    noise_cfg = cfg.get("noise")
    seeds = cfg.get("seeds", [0])
    methods = cfg.get("methods")
    if not methods:
        raise ConfigError("sweep config needs a non-empty 'methods' list")

    rows = []
    failed = False
    for seed in seeds:
        seed_init, seed_shuffle, seed_noise = _sub_seeds(seed)
        if "train_path" in ds_cfg:
            train_clean = data.load(ds_cfg["train_path"])
            test_ds = data.load(ds_cfg["test_path"])
        else:
            full = data.gaussian_blobs(
                ds_cfg.get("classes", 3), ds_cfg.get("per_class", 500),
                ds_cfg.get("dim", 2), ds_cfg.get("spread", 0.25),
                ds_cfg.get("seed", 7), radius=ds_cfg.get("radius", 1.0))
            train_clean, test_ds = data.split(
                full, ds_cfg.get("test_fraction", 0.25), ds_cfg.get("seed", 7))
        spec = None
        if noise_cfg:
            spec = noise.NoiseSpec(
                kind=noise_cfg["kind"], eta=noise_cfg["eta"], seed=seed_noise,
                pairing={int(j): int(k) for j, k in
                         noise_cfg["pairing"].items()}
                if noise_cfg.get("pairing") else None)
        # one noisy realization per seed, shared by every method
        train_ds = apply_noise_cmdline(train_clean, spec)

        for entry in methods:
            method = entry["method"]
            for cell in _grid_cells(entry):
                fields = dict(base)
                fields.update({k: v for k, v in entry.items()
                               if k not in ("method", "grid")})
                fields.update(cell)
                label = ";".join(f"{k}={cell[k]}" for k in sorted(cell))
                try:
                    forward_T = None
                    if method == "forward":
                        if spec is None or spec.kind == "open-set":
                            raise ConfigError(
                                "forward method needs closed-set noise")
                        if spec.kind == "uniform":
                            forward_T = noise.uniform_transition(
                                spec.eta, train_ds.num_classes)
                        else:
                            forward_T = noise.asymmetric_transition(
                                spec.eta,
                                spec.pairing or noise.cyclic_pairing(
                                    train_ds.num_classes),
                                train_ds.num_classes)
                    config = TrainConfig(
                        method=method,
                        beta=1.0 if method == "ce" else fields.get("beta", 0.1),
                        gamma=fields.get("gamma", 1.1),
                        delta=fields.get("delta", 1),
                        alpha=fields.get("alpha", 0.0),
                        t_squeeze=fields.get("t_squeeze"),
                        epochs=fields.get("epochs", 60),
                        batch_size=fields.get("batch_size", 32),
                        lr=fields.get("lr", 0.1),
                        milestones=[tuple(m) for m in fields.get(
                            "milestones", [(30, 10.0), (45, 10.0)])],
                        momentum=fields.get("momentum", 0.9),
                        weight_decay=fields.get("weight_decay", 1e-4),
                        hidden_dims=fields.get("hidden_dims", [64, 64]),
                        q=fields.get("q", 0.7),
                        forward_T=forward_T,
                        seed_init=seed_init, seed_shuffle=seed_shuffle)
                    _, history, _ = run_training(train_ds, test_ds, config)
                    final = history[-1]
                    rows.append((method, label, seed,
                                 _fmt(final.test_acc),
                                 _fmt(final.train_acc_noisy), "ok"))
                except TcrError as exc:
                    failed = True
                    rows.append((method, label, seed, "", "",
                                 f"error: {exc}"))

    with open(os.path.join(out_dir, "sweep.csv"), "w") as fh:
        fh.write(SWEEP_HEADER + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")
    return 1 if failed else 0


def cmd_eval(args):
    if not os.path.exists(args.checkpoint) or not os.path.exists(args.data):
        raise ConfigError("checkpoint or dataset file missing")
    params = load_checkpoint(args.checkpoint)
    dataset = data.load(args.data)
    acc = evaluate(params, dataset)
    print(f"test_acc={_fmt(acc)}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tcr", description="Noisy-label robust training harness")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="generate a synthetic blob dataset")
    g.add_argument("--classes", type=int, default=3)
    g.add_argument("--per-class", type=int, default=500)
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--spread", type=float, default=0.25)
    g.add_argument("--radius", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=7)
    g.add_argument("--test-fraction", type=float, default=0.25)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_data)

    t = sub.add_parser("train", help="train one model and emit metrics")
    t.add_argument("--train", required=True, help="training dataset file")
    t.add_argument("--test", required=True, help="test dataset file")
    t.add_argument("--method", default="tcr",
                   choices=["ce", "tcr", "vanilla", "bootstrap-soft",
                            "bootstrap-hard", "gce", "forward"])
    t.add_argument("--beta", type=float, default=0.1)
    t.add_argument("--gamma", type=float, default=1.1)
    t.add_argument("--delta", type=int, default=1)
    t.add_argument("--alpha", type=float, default=0.0)
    t.add_argument("--ts", type=int, default=None,
                   help="squeeze start epoch (default: first decay + 1)")
    t.add_argument("--epochs", type=int, default=60)
    t.add_argument("--batch-size", type=int, default=32)
    t.add_argument("--lr", type=float, default=0.1)
    t.add_argument("--milestones", default="30:10,45:10")
    t.add_argument("--momentum", type=float, default=0.9)
    t.add_argument("--weight-decay", type=float, default=1e-4)
    t.add_argument("--hidden", default="64,64")
    t.add_argument("--q", type=float, default=0.7)
    t.add_argument("--noise", default="none",
                   help="KIND:ETA applied to the train set, e.g. uniform:0.4")
    t.add_argument("--pairing", type=json.loads, default=None,
                   help='asymmetric pairing as JSON, e.g. {"0": 1}')
    t.add_argument("--seed-init", type=int, default=0)
    t.add_argument("--seed-shuffle", type=int, default=1)
    t.add_argument("--seed-noise", type=int, default=2)
    t.add_argument("--trace-ids", default="",
                   help="comma-separated sample ids to trace per epoch")
    t.add_argument("--noisy-out", default="",
                   help="optionally save the noisy train set (with mask)")
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train)

    s = sub.add_parser("sweep", help="run a methods x grid x seeds sweep")
    s.add_argument("--config", required=True, help="sweep JSON config")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_sweep)

    e = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--data", required=True)
    e.set_defaults(func=cmd_eval)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except TcrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
