"""Hetero-associative recall benchmark.

Stimulus/response vector pairs are concatenated into one visible vector,
z-scored per dimension over the training pairs, and a model is trained on
the result.  Recall clamps the (normalized) stimulus half, completes the
response half by clamped Gibbs sampling, denormalizes it, and retrieves the
nearest-neighbor response from the closed candidate set (the training
responses).  Accuracy is the fraction of pairs whose own response is
retrieved.

Two experiment drivers sweep the model size: ``run_q_sweep`` holds a weight
budget fixed while varying the number of slot states, ``run_hidden_sweep``
holds the state count fixed while varying the slot count.  Every cell
trains an independent model under an independent seed; cell failures are
recorded and do not abort the sweep.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import ceil, isqrt

import numpy as np

from .matching import budget_hidden_units
from .model import ModelParams
from .rng import substream
from .sampler import SamplerConfig, clamped_completion, clamped_completion_batch
from .trainer import EarlyStopRule, TrainConfig, fit, init_params

__all__ = [
    "PairDataset",
    "RecallResult",
    "SweepCell",
    "build_pair_dataset",
    "synth_pairs",
    "recall_one",
    "recall_accuracy_batch",
    "evaluate_recall",
    "train_recall_model",
    "run_q_sweep",
    "run_hidden_sweep",
    "format_sweep_rows",
]

DEFAULT_RECALL_STEPS = 10

CLUSTER_NOISE = 0.3


@dataclass
class PairDataset:
    """Stimulus/response pairs with per-dimension z-scoring statistics.

    ``mean``/``std`` are taken over the N concatenated training vectors, so
    the visible dimension of a matching model is 2*d.  ``vocab`` is the
    closed retrieval set: the N response vectors in original units.
    """

    stimulus: np.ndarray     # (N, d)
    response: np.ndarray     # (N, d)
    vocab: np.ndarray        # (N, d)
    mean: np.ndarray         # (2d,)
    std: np.ndarray          # (2d,)

    @property
    def count(self) -> int:
        return self.stimulus.shape[0]

    @property
    def d(self) -> int:
        return self.stimulus.shape[1]

    @property
    def visible_dim(self) -> int:
        return 2 * self.d

    def concatenated(self) -> np.ndarray:
        return np.hstack([self.stimulus, self.response])

    def normalized(self) -> np.ndarray:
        return self.normalize(self.concatenated())

    def normalize(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.std

    def denormalize(self, X: np.ndarray) -> np.ndarray:
        return X * self.std + self.mean


def build_pair_dataset(raw_pairs) -> PairDataset:
    """Assemble a dataset from (stimulus, response) vector pairs and fit the
    per-dimension normalization; errors on any zero-variance dimension."""
    if len(raw_pairs) < 2:
        raise ValueError("need at least 2 pairs")
    stim = np.array([np.asarray(s, dtype=np.float64).reshape(-1) for s, _ in raw_pairs])
    resp = np.array([np.asarray(r, dtype=np.float64).reshape(-1) for _, r in raw_pairs])
    if stim.shape[1] != resp.shape[1]:
        raise ValueError("stimulus and response dimensions must match")
    concat = np.hstack([stim, resp])
    mean = concat.mean(axis=0)
    std = concat.std(axis=0)
    dead = np.where(std <= 1e-12 * (1.0 + np.abs(mean)))[0]
    if dead.size:
        raise ValueError(f"zero-variance dimension {dead[0]} cannot be normalized")
    return PairDataset(stim, resp, resp.copy(), mean, std)


def synth_pairs(N: int, d: int, seed: int, structure: str = "random"):
    """Synthetic stimulus/response pairs.

    "random": both sides i.i.d. standard normal.  "clustered": responses
    sit near one of ceil(sqrt(N)) shared centroids (noise scale 0.3), which
    makes the retrieval set confusable the way semantically grouped data is.
    """
    if N < 2 or d < 2:
        raise ValueError("need N >= 2 and d >= 2")
    rng = substream(seed, "synth")
    stim = rng.standard_normal((N, d))
    if structure == "random":
        resp = rng.standard_normal((N, d))
    elif structure == "clustered":
        k = isqrt(N) + (0 if isqrt(N) ** 2 == N else 1)
        centroids = rng.standard_normal((k, d))
        assign = rng.integers(0, k, size=N)
        resp = centroids[assign] + CLUSTER_NOISE * rng.standard_normal((N, d))
    else:
        raise ValueError("structure must be 'random' or 'clustered'")
    return [(stim[i], resp[i]) for i in range(N)]


@dataclass
class RecallResult:
    accuracy: float
    per_pair: list      # (pair index, retrieved index, correct flag)


def _nearest_response(dataset: PairDataset, completed: np.ndarray) -> int:
    dists = np.linalg.norm(dataset.vocab - completed, axis=1)
    return int(np.argmin(dists))        # argmin resolves ties to the lowest index


def _clamp_mask(dataset: PairDataset) -> np.ndarray:
    mask = np.zeros(dataset.visible_dim, dtype=bool)
    mask[: dataset.d] = True
    return mask


def recall_one(
    params: ModelParams,
    dataset: PairDataset,
    pair_index: int,
    steps: int,
    rng: np.random.Generator,
    config: SamplerConfig | None = None,
    readout: str = "mean",
) -> int:
    """Retrieve a response index for one stimulus by clamped completion."""
    if params.n != dataset.visible_dim:
        raise ValueError(
            f"model has {params.n} visibles but dataset vectors have {dataset.visible_dim}"
        )
    d = dataset.d
    v0 = np.zeros(dataset.visible_dim)
    row = dataset.normalize(np.hstack([dataset.stimulus[pair_index], np.zeros(d)]))
    v0[:d] = row[:d]                    # free half starts at the normalized mean
    v = clamped_completion(params, v0, _clamp_mask(dataset), steps, rng, config, readout)
    completed = dataset.denormalize(np.hstack([row[:d], v[d:]]))[d:]
    return _nearest_response(dataset, completed)


def recall_accuracy_batch(
    params: ModelParams,
    dataset: PairDataset,
    steps: int,
    rng: np.random.Generator,
    config: SamplerConfig | None = None,
    readout: str = "mean",
) -> float:
    """Recall accuracy with all pairs completed as one batch under a single
    stream; statistically equivalent to ``evaluate_recall`` and much faster,
    used as the training-time validation metric."""
    d = dataset.d
    V0 = dataset.normalized()
    V0[:, d:] = 0.0
    V = clamped_completion_batch(params, V0, _clamp_mask(dataset), steps, rng, config, readout)
    completed = dataset.denormalize(np.hstack([V0[:, :d], V[:, d:]]))[:, d:]
    dists = np.linalg.norm(completed[:, None, :] - dataset.vocab[None, :, :], axis=2)
    retrieved = dists.argmin(axis=1)
    return float(np.mean(retrieved == np.arange(dataset.count)))


def evaluate_recall(
    params: ModelParams,
    dataset: PairDataset,
    steps: int,
    seed: int,
    config: SamplerConfig | None = None,
    readout: str = "mean",
) -> RecallResult:
    """Run recall over every pair; each pair uses its own named substream,
    so results are deterministic under the seed."""
    per_pair = []
    hits = 0
    for i in range(dataset.count):
        rng = substream(seed, "recall", i)
        got = recall_one(params, dataset, i, steps, rng, config, readout)
        ok = got == i
        hits += ok
        per_pair.append((i, got, bool(ok)))
    return RecallResult(hits / dataset.count, per_pair)


# ---------------------------------------------------------------------------
# Experiment sweeps
# ---------------------------------------------------------------------------

@dataclass
class SweepCell:
    q: int
    m: int
    N: int
    seed: int
    accuracy: float
    stop_reason: str
    epochs: int
    error: str | None = None


def train_recall_model(
    dataset: PairDataset,
    m: int,
    q: int,
    config: TrainConfig,
    early_stop: EarlyStopRule | None = None,
    recall_steps: int = DEFAULT_RECALL_STEPS,
):
    """Train a fresh model on the normalized pairs with recall accuracy as
    the validation metric; returns (params, records)."""
    data = dataset.normalized()
    params = init_params(dataset.visible_dim, m, q, data, config.seed)

    def hook(p, epoch):
        return recall_accuracy_batch(
            p, dataset, recall_steps, substream(config.seed, "recall", epoch)
        )

    return fit(params, data, config, early_stop, hook)


def _sweep_cell(dataset, m, q, N, seed, base_config, early_stop, recall_steps) -> SweepCell:
    config = replace(base_config, seed=seed)
    try:
        params, records = train_recall_model(dataset, m, q, config, early_stop, recall_steps)
        result = evaluate_recall(params, dataset, recall_steps, seed)
        last = records[-1]
        return SweepCell(q, m, N, seed, result.accuracy, last.stop, last.epoch)
    except Exception as exc:  # record and continue; sweeps must not abort
        return SweepCell(q, m, N, seed, float("nan"), "error", 0, error=str(exc))


def _run_sweep(cells, threads: int = 1):
    if threads <= 1:
        return [fn() for fn in cells]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda fn: fn(), cells))


def _sweep_datasets(dataset_sizes, d, structure, seeds):
    # one dataset per (N, seed), shared across model variants for fairness
    return {
        (N, s): build_pair_dataset(synth_pairs(N, d, seed=s * 7919 + N, structure=structure))
        for N in dataset_sizes
        for s in seeds
    }


def run_q_sweep(
    n_w: int,
    n_v: int,
    q_list,
    dataset_sizes,
    base_config: TrainConfig,
    seeds=(0, 1, 2),
    structure: str = "clustered",
    early_stop: EarlyStopRule | None = None,
    recall_steps: int = DEFAULT_RECALL_STEPS,
    threads: int = 1,
) -> list[SweepCell]:
    """Parameter-matched sweep over slot-state counts: every q gets
    m = budget_hidden_units(n_w, n_v, q) slots."""
    if n_v % 2:
        raise ValueError("n_v must be even (stimulus/response halves)")
    d = n_v // 2
    datasets = _sweep_datasets(dataset_sizes, d, structure, seeds)
    jobs = []
    for q in q_list:
        m = budget_hidden_units(n_w, n_v, q)
        for N in dataset_sizes:
            for s in seeds:
                ds = datasets[(N, s)]
                jobs.append(
                    lambda ds=ds, m=m, q=q, N=N, s=s: _sweep_cell(
                        ds, m, q, N, s, base_config, early_stop, recall_steps
                    )
                )
    return _run_sweep(jobs, threads)


def run_hidden_sweep(
    q: int,
    hidden_list,
    dataset_sizes,
    base_config: TrainConfig,
    d: int = 50,
    seeds=(0, 1, 2),
    structure: str = "clustered",
    early_stop: EarlyStopRule | None = None,
    recall_steps: int = DEFAULT_RECALL_STEPS,
    threads: int = 1,
) -> list[SweepCell]:
    """Sweep the slot count at fixed q."""
    datasets = _sweep_datasets(dataset_sizes, d, structure, seeds)
    jobs = []
    for m in hidden_list:
        for N in dataset_sizes:
            for s in seeds:
                ds = datasets[(N, s)]
                jobs.append(
                    lambda ds=ds, m=m, N=N, s=s: _sweep_cell(
                        ds, m, q, N, s, base_config, early_stop, recall_steps
                    )
                )
    return _run_sweep(jobs, threads)


def format_sweep_rows(cells) -> list[str]:
    lines = ["q,m,N,seed,accuracy,stop_reason,epochs"]
    for c in cells:
        acc = "nan" if np.isnan(c.accuracy) else f"{c.accuracy:.6f}"
        lines.append(f"{c.q},{c.m},{c.N},{c.seed},{acc},{c.stop_reason},{c.epochs}")
    return lines
