"""Command-line interface: train / sample / recall / sweep / match / inspect.

One executable, subcommand style.  Settings may come from a ``--config``
file of ``key = value`` lines, with command-line flags taking precedence;
unknown config keys are rejected.  All randomness derives from one root
``--seed`` through named substreams, so every subcommand is reproducible;
``--threads`` parallelizes independent sweep cells only (per-cell results
are seeded independently and do not change with the thread count).

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical
abort.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .assoc import (
    build_pair_dataset,
    evaluate_recall,
    format_sweep_rows,
    run_hidden_sweep,
    run_q_sweep,
    train_recall_model,
)
from .data_io import load_checkpoint, read_vectors, save_checkpoint, write_vectors
from .errors import CapacityError, ConfigError, DataFormatError, NumericalAbort
from .exact import (
    DEFAULT_CODE_CAP,
    enumerate_codes,
    exact_summary,
)
from .matching import (
    capacity_matched_report,
    format_match_report,
    match_report_kv,
    parameter_matched_report,
)
from .model import energy
from .rng import substream
from .sampler import ChainState, SamplerConfig, gibbs_sweep, noise_gibbs_samples
from .trainer import EarlyStopRule, TrainConfig, fit, format_log_lines, init_params


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; route through ConfigError
    # so main() can map usage problems to exit code 1.
    def error(self, message):
        raise ConfigError(message)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"expected a list of integers, got {text!r}") from None


_CONVERTERS = {
    "seed": int, "threads": int, "out": str,
    "data": str, "pairs": str, "model": str,
    "n": int, "m": int, "q": int, "d": int,
    "learning_rate": float, "batch_size": int, "cd_k": int, "burn_in": int,
    "max_epochs": int, "checkpoint_every": int,
    "sampler": str, "langevin_eps": float, "langevin_steps": int, "persistent": _bool,
    "target_accuracy": float, "window": int, "std_threshold": float, "patience": int,
    "recall_steps": int, "steps": int, "n_samples": int, "readout": str,
    "kind": str, "mode": str, "nw": int, "nv": int,
    "q_list": _int_list, "hidden_list": _int_list, "sizes": _int_list,
    "n_seeds": int, "structure": str, "max_codes": int,
}


def _load_config(path) -> dict:
    cfg = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    with fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}: line {lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _CONVERTERS:
                raise ConfigError(f"{path}: line {lineno}: unknown config key '{key}'")
            cfg[key] = value
    return cfg


def _get(args, cfg, key, default=None, required=False):
    """Flag value if given, else config value, else default."""
    val = getattr(args, key, None)
    if val is None and key in cfg:
        val = _CONVERTERS[key](cfg[key])
    if val is None:
        val = default
    if required and val is None:
        raise ConfigError(f"missing required setting '{key}'")
    return val


def _train_config(args, cfg) -> TrainConfig:
    sampler = SamplerConfig(
        kind=_get(args, cfg, "sampler", "gibbs"),
        langevin_eps=_get(args, cfg, "langevin_eps"),
        langevin_steps=_get(args, cfg, "langevin_steps", 1),
        persistent=_get(args, cfg, "persistent", False),
    )
    return TrainConfig(
        learning_rate=_get(args, cfg, "learning_rate", 1e-4),
        batch_size=_get(args, cfg, "batch_size", 64),
        cd_k=_get(args, cfg, "cd_k", 1),
        sampler=sampler,
        burn_in=_get(args, cfg, "burn_in", 2),
        max_epochs=_get(args, cfg, "max_epochs", 1000),
        seed=_get(args, cfg, "seed", 0),
        checkpoint_every=_get(args, cfg, "checkpoint_every", 1),
    )


def _early_stop(args, cfg) -> EarlyStopRule:
    return EarlyStopRule(
        target_accuracy=_get(args, cfg, "target_accuracy", 0.98),
        window=_get(args, cfg, "window", 20),
        std_threshold=_get(args, cfg, "std_threshold", 0.01),
        patience=_get(args, cfg, "patience", 10),
    )


def _split_pairs(rows: np.ndarray):
    if rows.shape[1] % 2:
        raise DataFormatError(
            f"pair rows must have even width, got {rows.shape[1]}"
        )
    d = rows.shape[1] // 2
    return [(rows[i, :d], rows[i, d:]) for i in range(rows.shape[0])]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_train(args, cfg) -> int:
    data_path = _get(args, cfg, "data")
    pairs_path = _get(args, cfg, "pairs")
    if (data_path is None) == (pairs_path is None):
        raise ConfigError("train needs exactly one of --data or --pairs")
    out = _get(args, cfg, "out", required=True)
    m = _get(args, cfg, "m", required=True)
    q = _get(args, cfg, "q", required=True)
    config = _train_config(args, cfg)
    rule = _early_stop(args, cfg)

    # read and validate all inputs before creating any output
    if pairs_path is not None:
        dataset = build_pair_dataset(_split_pairs(read_vectors(pairs_path).rows))
        os.makedirs(out, exist_ok=True)
        params, records = train_recall_model(
            dataset, m, q, config, rule, _get(args, cfg, "recall_steps", 10)
        )
    else:
        vf = read_vectors(data_path)
        os.makedirs(out, exist_ok=True)
        params = init_params(vf.dim, m, q, vf.rows, config.seed)
        params, records = fit(params, vf.rows, config, rule)

    ckpt = os.path.join(out, "model.ckpt")
    save_checkpoint(params, ckpt)
    with open(os.path.join(out, "train.log"), "w") as fh:
        fh.write("\n".join(format_log_lines(records)) + "\n")
    last = records[-1]
    print(f"trained {last.epoch} epochs, stop {last.stop}, val {last.val:.4f}")
    print(f"checkpoint {ckpt}")
    return 0


def cmd_sample(args, cfg) -> int:
    params = load_checkpoint(_get(args, cfg, "model", required=True))
    out = _get(args, cfg, "out", required=True)
    count = _get(args, cfg, "n_samples", required=True)
    steps = _get(args, cfg, "steps", 1000)
    seed = _get(args, cfg, "seed", 0)
    V = noise_gibbs_samples(params, count, steps, substream(seed, "sample"))
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "samples.vec")
    write_vectors(path, V)
    print(f"wrote {count} samples ({steps} sweeps each) to {path}")
    return 0


def cmd_recall(args, cfg) -> int:
    params = load_checkpoint(_get(args, cfg, "model", required=True))
    dataset = build_pair_dataset(
        _split_pairs(read_vectors(_get(args, cfg, "pairs", required=True)).rows)
    )
    if params.n != dataset.visible_dim:
        raise ConfigError(
            f"model has {params.n} visibles, pairs need {dataset.visible_dim}"
        )
    result = evaluate_recall(
        params,
        dataset,
        _get(args, cfg, "steps", 10),
        _get(args, cfg, "seed", 0),
        readout=_get(args, cfg, "readout", "mean"),
    )
    print(f"accuracy {result.accuracy:.6f}")
    print("pair retrieved correct")
    for i, got, ok in result.per_pair:
        print(f"{i} {got} {int(ok)}")
    return 0


def cmd_sweep(args, cfg) -> int:
    kind = _get(args, cfg, "kind", required=True)
    out = _get(args, cfg, "out", required=True)
    config = _train_config(args, cfg)
    rule = _early_stop(args, cfg)
    sizes = _get(args, cfg, "sizes", required=True)
    seeds = tuple(range(_get(args, cfg, "n_seeds", 3)))
    threads = _get(args, cfg, "threads", 1)
    recall_steps = _get(args, cfg, "recall_steps", 10)
    structure = _get(args, cfg, "structure", "clustered")

    if kind == "q":
        cells = run_q_sweep(
            _get(args, cfg, "nw", required=True),
            _get(args, cfg, "nv", required=True),
            _get(args, cfg, "q_list", required=True),
            sizes, config, seeds, structure, rule, recall_steps, threads,
        )
    elif kind == "hidden":
        cells = run_hidden_sweep(
            _get(args, cfg, "q", required=True),
            _get(args, cfg, "hidden_list", required=True),
            sizes, config, _get(args, cfg, "d", 50),
            seeds, structure, rule, recall_steps, threads,
        )
    else:
        raise ConfigError("sweep kind must be 'q' or 'hidden'")

    lines = format_sweep_rows(cells)
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "sweep.csv")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print("\n".join(lines))
    print(f"wrote {path}")
    return 0


def cmd_match(args, cfg) -> int:
    mode = _get(args, cfg, "mode", required=True)
    q = _get(args, cfg, "q", required=True)
    if mode in ("param", "parameter"):
        report = parameter_matched_report(
            _get(args, cfg, "nw", required=True),
            _get(args, cfg, "nv", required=True),
            q,
        )
    elif mode == "capacity":
        report = capacity_matched_report(
            _get(args, cfg, "n", required=True),
            _get(args, cfg, "m", required=True),
            q,
        )
    else:
        raise ConfigError("match mode must be 'param' or 'capacity'")
    print(format_match_report(report))
    print(match_report_kv(report))
    return 0


def _energy_autocorr(params, seed, sweeps=256, lags=(1, 2, 5)):
    rng = substream(seed, "inspect")
    state = ChainState(params.b.copy(), np.ones(params.m, dtype=np.int64), rng)
    energies = []
    for _ in range(sweeps):
        state = gibbs_sweep(params, state)
        energies.append(energy(params, state.v, state.h))
    e = np.array(energies)
    e = e - e.mean()
    denom = float(e @ e)
    out = []
    for lag in lags:
        if denom <= 0 or lag >= len(e):
            out.append((lag, 0.0))
        else:
            out.append((lag, float(e[:-lag] @ e[lag:]) / denom))
    return out


def cmd_inspect(args, cfg) -> int:
    params = load_checkpoint(_get(args, cfg, "model", required=True))
    seed = _get(args, cfg, "seed", 0)
    print(f"n {params.n} m {params.m} q {params.q} "
          f"sigma2 {'present' if params.sigma2 is not None else 'absent'}")
    print(f"norm_b {np.linalg.norm(params.b):.6g} "
          f"norm_c {np.linalg.norm(params.c):.6g} "
          f"norm_W {np.linalg.norm(params.W):.6g}")
    for lag, rho in _energy_autocorr(params, seed):
        print(f"energy_autocorr_lag{lag} {rho:.4f}")
    if getattr(args, "exact", False):
        cap = _get(args, cfg, "max_codes", DEFAULT_CODE_CAP)
        summary = exact_summary(params, cap)          # may raise CapacityError
        codes = enumerate_codes(params.m, params.q, cap)
        print(f"log_partition {summary.log_partition:.12g}")
        top = np.argsort(summary.hidden_marginal)[::-1][:10]
        print("top codes by marginal:")
        for idx in top:
            states = " ".join(str(s) for s in codes[idx])
            print(f"  [{states}] {summary.hidden_marginal[idx]:.6g}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=str, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--out", type=str, default=None)

    parser = _Parser(prog="gmrbm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, helptext):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.set_defaults(func=func)
        return p

    p = add("train", cmd_train, "train a model on a vector or pair file")
    p.add_argument("--data", type=str, default=None)
    p.add_argument("--pairs", type=str, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--q", type=int, default=None)
    for flag, typ in (
        ("--learning-rate", float), ("--batch-size", int), ("--cd-k", int),
        ("--burn-in", int), ("--max-epochs", int), ("--checkpoint-every", int),
        ("--langevin-eps", float), ("--langevin-steps", int),
        ("--target-accuracy", float), ("--window", int),
        ("--std-threshold", float), ("--patience", int), ("--recall-steps", int),
    ):
        p.add_argument(flag, type=typ, default=None)
    p.add_argument("--sampler", choices=("gibbs", "gibbs-langevin"), default=None)
    p.add_argument("--persistent", action=argparse.BooleanOptionalAction, default=None)

    p = add("sample", cmd_sample, "sample visibles from noise-started chains")
    p.add_argument("--model", type=str, default=None)
    p.add_argument("--n-samples", type=int, default=None)
    p.add_argument("--steps", type=int, default=None)

    p = add("recall", cmd_recall, "evaluate recall of a trained model on pairs")
    p.add_argument("--model", type=str, default=None)
    p.add_argument("--pairs", type=str, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--readout", choices=("mean", "sample"), default=None)

    p = add("sweep", cmd_sweep, "run a q sweep or hidden-unit sweep")
    p.add_argument("--kind", choices=("q", "hidden"), default=None)
    p.add_argument("--nw", type=int, default=None)
    p.add_argument("--nv", type=int, default=None)
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--q-list", type=_int_list, default=None)
    p.add_argument("--hidden-list", type=_int_list, default=None)
    p.add_argument("--sizes", type=_int_list, default=None)
    p.add_argument("--n-seeds", type=int, default=None)
    p.add_argument("--structure", choices=("random", "clustered"), default=None)
    for flag, typ in (
        ("--learning-rate", float), ("--batch-size", int), ("--cd-k", int),
        ("--burn-in", int), ("--max-epochs", int), ("--checkpoint-every", int),
        ("--target-accuracy", float), ("--window", int),
        ("--std-threshold", float), ("--patience", int), ("--recall-steps", int),
    ):
        p.add_argument(flag, type=typ, default=None)

    p = add("match", cmd_match, "print model sizing under a matching protocol")
    p.add_argument("--mode", choices=("param", "parameter", "capacity"), default=None)
    p.add_argument("--nw", type=int, default=None)
    p.add_argument("--nv", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--q", type=int, default=None)

    p = add("inspect", cmd_inspect, "print model diagnostics")
    p.add_argument("--model", type=str, default=None)
    p.add_argument("--exact", action="store_true", default=False)
    p.add_argument("--max-codes", type=int, default=None)

    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        cfg = _load_config(args.config) if args.config else {}
        return args.func(args, cfg)
    except DataFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, CapacityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalAbort as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
