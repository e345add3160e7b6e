"""Contrastive-divergence training with Adam.

The positive phase is Rao-Blackwellized: it uses the exact per-slot
posterior rather than sampled hidden codes, which has strictly lower
variance at the same cost.  The negative phase advances a chain pool
(data-started for CD-k, carried across updates for persistent CD) and
accumulates the same statistics at the final visible samples.

Gradient blocks follow the sign convention of ascent on log-likelihood:

    db[i]       = < (v_i - b_i)/sigma2_i >_data  - < ... >_model
    dc[j, k]    = < p(h_j = k | v) >_data        - < ... >_model
    dW[k, j, i] = < p(h_j = k | v) v_i/sigma2_i >_data - < ... >_model

Training is bitwise reproducible for a fixed seed when run single-threaded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalAbort
from .model import (
    ModelParams,
    hidden_posterior_batch,
    posterior_mean_visible,
)
from .rng import substream
from .sampler import SamplerConfig, gibbs_sweep_batch, sample_hidden_batch

__all__ = [
    "TrainConfig",
    "EarlyStopRule",
    "GradientRecord",
    "AdamState",
    "ChainPool",
    "EpochRecord",
    "init_params",
    "positive_statistics",
    "negative_statistics",
    "adam_step",
    "cd_update",
    "reconstruction_error",
    "fit",
    "format_log_lines",
]


@dataclass
class TrainConfig:
    """Optimizer, CD, sampler, and checkpointing settings."""

    learning_rate: float = 1e-4
    batch_size: int = 64
    cd_k: int = 1
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    burn_in: int = 2
    max_epochs: int = 1000
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    seed: int = 0
    checkpoint_every: int = 1

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.cd_k < 0:
            raise ValueError("cd_k must be >= 0")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.max_epochs < 1 or self.checkpoint_every < 1:
            raise ValueError("max_epochs and checkpoint_every must be >= 1")


@dataclass
class EarlyStopRule:
    """Stop when the validation metric reaches ``target_accuracy``, when its
    standard deviation over the last ``window`` checkpoints falls below
    ``std_threshold``, or after ``patience`` checkpoints without improvement
    (absolute tolerance 1e-6 against the best so far)."""

    target_accuracy: float = 0.98
    window: int = 20
    std_threshold: float = 0.01
    patience: int = 10

    def __post_init__(self):
        if not 0 <= self.target_accuracy <= 1:
            raise ValueError("target_accuracy must lie in [0, 1]")
        if self.window < 1 or self.patience < 1:
            raise ValueError("window and patience must be >= 1")


IMPROVEMENT_TOL = 1e-6


@dataclass
class GradientRecord:
    """One gradient (or phase contribution) per parameter block."""

    db: np.ndarray
    dc: np.ndarray
    dW: np.ndarray

    def __sub__(self, other: "GradientRecord") -> "GradientRecord":
        return GradientRecord(self.db - other.db, self.dc - other.dc, self.dW - other.dW)

    def blocks(self):
        return (("b", self.db), ("c", self.dc), ("W", self.dW))


@dataclass
class AdamState:
    t: int
    m_b: np.ndarray
    v_b: np.ndarray
    m_c: np.ndarray
    v_c: np.ndarray
    m_W: np.ndarray
    v_W: np.ndarray

    @classmethod
    def zeros(cls, params: ModelParams) -> "AdamState":
        return cls(
            0,
            np.zeros_like(params.b), np.zeros_like(params.b),
            np.zeros_like(params.c), np.zeros_like(params.c),
            np.zeros_like(params.W), np.zeros_like(params.W),
        )


@dataclass
class ChainPool:
    """A pool of negative-phase chains sharing one stream."""

    V: np.ndarray
    H: np.ndarray
    rng: np.random.Generator

    @classmethod
    def from_batch(cls, params: ModelParams, batch: np.ndarray, rng: np.random.Generator) -> "ChainPool":
        # data-started chains: v = data, h drawn once from the posterior
        V = np.asarray(batch, dtype=np.float64).copy()
        return cls(V, sample_hidden_batch(params, V, rng), rng)


def init_params(n: int, m: int, q: int, data_sample=None, seed: int = 0) -> ModelParams:
    """Fresh parameters: b at the data mean (zeros without data), c zero,
    W i.i.d. Gaussian with standard deviation 0.01."""
    if min(n, m, q) < 1:
        raise ValueError("n, m, q must all be >= 1")
    if data_sample is not None:
        b = np.asarray(data_sample, dtype=np.float64).reshape(-1, n).mean(axis=0)
    else:
        b = np.zeros(n)
    rng = substream(seed, "init")
    W = 0.01 * rng.standard_normal((q, m, n))
    return ModelParams(n, m, q, b, np.zeros((m, q)), W)


def positive_statistics(params: ModelParams, batch: np.ndarray) -> GradientRecord:
    """Data-phase expectations under the exact per-slot posterior."""
    V = np.asarray(batch, dtype=np.float64).reshape(-1, params.n)
    if V.shape[0] == 0:
        raise ValueError("batch must be nonempty")
    P = hidden_posterior_batch(params, V)
    Vs = params.scaled(V)
    db = Vs.mean(axis=0) - params.scaled(params.b)
    dc = P.mean(axis=0)
    dW = np.einsum("bjk,bi->kji", P, Vs) / V.shape[0]
    return GradientRecord(db, dc, dW)


def negative_statistics(params: ModelParams, chains: ChainPool, config: TrainConfig) -> GradientRecord:
    """Model-phase expectations estimated from the chain pool.

    Advances every chain ``burn_in + cd_k`` sweeps in place, then evaluates
    the same statistics as the positive phase at the final visible samples
    (hidden statistics posterior-averaged, not sampled)."""
    for _ in range(config.burn_in + config.cd_k):
        chains.V, chains.H = gibbs_sweep_batch(
            params, chains.V, chains.H, config.sampler, chains.rng
        )
    return positive_statistics(params, chains.V)


def adam_step(
    params: ModelParams,
    grad: GradientRecord,
    state: AdamState,
    config: TrainConfig,
) -> ModelParams:
    """One Adam ascent step in place; returns ``params`` for chaining."""
    b1, b2, eps = config.adam_beta1, config.adam_beta2, config.adam_epsilon
    state.t += 1
    corr1 = 1.0 - b1**state.t
    corr2 = 1.0 - b2**state.t
    for g, m, v, theta in (
        (grad.db, state.m_b, state.v_b, params.b),
        (grad.dc, state.m_c, state.v_c, params.c),
        (grad.dW, state.m_W, state.v_W, params.W),
    ):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        theta += config.learning_rate * (m / corr1) / (np.sqrt(v / corr2) + eps)
    return params


def cd_update(
    params: ModelParams,
    batch: np.ndarray,
    chains: ChainPool,
    config: TrainConfig,
    adam_state: AdamState,
) -> ModelParams:
    """One contrastive-divergence parameter update (positive - negative)."""
    grad = positive_statistics(params, batch) - negative_statistics(params, chains, config)
    for name, block in grad.blocks():
        if not np.isfinite(block).all():
            raise NumericalAbort(f"non-finite gradient in parameter block {name}")
    adam_step(params, grad, adam_state, config)
    for name, block in (("b", params.b), ("c", params.c), ("W", params.W)):
        if not np.isfinite(block).all():
            raise NumericalAbort(f"non-finite values in parameter block {name} after update")
    return params


def reconstruction_error(params: ModelParams, batch: np.ndarray) -> float:
    """Mean squared error per element between the batch and its
    posterior-mean reconstruction."""
    V = np.asarray(batch, dtype=np.float64).reshape(-1, params.n)
    P = hidden_posterior_batch(params, V)
    return float(np.mean((V - posterior_mean_visible(params, P)) ** 2))


@dataclass
class EpochRecord:
    epoch: int
    recon: float
    val: float
    stop: str           # "-" until a rule fires


def format_log_lines(records) -> list[str]:
    return [
        f"epoch {r.epoch} recon {r.recon:.17g} val {r.val:.17g} stop {r.stop}"
        for r in records
    ]


def fit(
    params: ModelParams,
    dataset: np.ndarray,
    config: TrainConfig,
    early_stop: EarlyStopRule | None = None,
    validation_hook=None,
):
    """Train in place over shuffled mini-batches until an early-stopping
    rule fires or ``max_epochs`` is reached.

    ``validation_hook(params, epoch)`` is called at every checkpoint and
    must return a scalar where higher is better; without a hook, the
    negated reconstruction error is used.  Returns ``(params, records)``
    with one ``EpochRecord`` per checkpoint; the last record carries the
    stop reason.
    """
    data = np.asarray(dataset, dtype=np.float64).reshape(-1, params.n)
    if data.shape[0] == 0:
        raise ValueError("dataset must be nonempty")
    early_stop = early_stop or EarlyStopRule()
    rng_train = substream(config.seed, "train")
    rng_chains = substream(config.seed, "chains")

    adam = AdamState.zeros(params)
    pool = None
    if config.sampler.persistent:
        pool = ChainPool.from_batch(params, data[: config.batch_size], rng_chains)

    records: list[EpochRecord] = []
    recent: list[float] = []
    best = -np.inf
    since_best = 0
    stop = None

    for epoch in range(1, config.max_epochs + 1):
        perm = rng_train.permutation(data.shape[0])
        recon_sum, n_batches = 0.0, 0
        for start in range(0, data.shape[0], config.batch_size):
            batch = data[perm[start : start + config.batch_size]]
            chains = pool if pool is not None else ChainPool.from_batch(params, batch, rng_chains)
            params = cd_update(params, batch, chains, config, adam)
            recon_sum += reconstruction_error(params, batch)
            n_batches += 1

        if epoch % config.checkpoint_every != 0 and epoch != config.max_epochs:
            continue
        recon = recon_sum / n_batches
        if validation_hook is not None:
            val = float(validation_hook(params, epoch))
        else:
            val = -recon

        recent.append(val)
        if len(recent) > early_stop.window:
            recent.pop(0)
        if val > best + IMPROVEMENT_TOL:
            best = val
            since_best = 0
        else:
            since_best += 1

        if val >= early_stop.target_accuracy:
            stop = "target"
        elif len(recent) == early_stop.window and float(np.std(recent)) < early_stop.std_threshold:
            stop = "plateau-std"
        elif since_best >= early_stop.patience:
            stop = "no-improve"
        elif epoch == config.max_epochs:
            stop = "max-epochs"

        records.append(EpochRecord(epoch, recon, val, stop or "-"))
        if stop:
            break

    return params, records
