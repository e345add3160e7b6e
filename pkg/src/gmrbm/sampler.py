"""Stochastic transition kernels: per-slot categorical hidden draws, exact
Gaussian visible draws, the unadjusted visible Langevin variant, block
Gibbs sweeps, and clamped completion for recall.

Kernels are pure given (params, state, stream): all randomness flows
through an explicit numpy Generator, so a fixed stream reproduces a chain
bitwise and distinct streams give independent chains.  Batched variants
advance many chains against one shared read-only parameter set with a
single pool-level stream.

Sweep order is fixed: hidden draw first, then the visible update.
Categorical draws use inverse-CDF on the normalized posterior row — one
uniform per slot.  The Langevin step is deliberately unadjusted (no
Metropolis correction); its step-size bias is part of the contract and is
what the long-run moment tests measure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import (
    ModelParams,
    check_hidden,
    conditional_mean,
    conditional_mean_batch,
    hidden_posterior_batch,
)

__all__ = [
    "SamplerConfig",
    "ChainState",
    "sample_hidden",
    "sample_hidden_batch",
    "sample_visible",
    "sample_visible_batch",
    "langevin_visible_step",
    "langevin_step_batch",
    "gibbs_sweep",
    "gibbs_sweep_batch",
    "clamped_completion",
    "clamped_completion_batch",
    "noise_gibbs_samples",
]

SAMPLER_KINDS = ("gibbs", "gibbs-langevin")


@dataclass
class SamplerConfig:
    """Choice of negative-phase/visible kernel.

    kind: "gibbs" for the exact Gaussian visible draw, "gibbs-langevin"
    to replace it with ``langevin_steps`` unadjusted Langevin updates of
    step size ``langevin_eps``.
    """

    kind: str = "gibbs"
    langevin_eps: float | None = None
    langevin_steps: int = 1
    persistent: bool = False

    def __post_init__(self):
        if self.kind not in SAMPLER_KINDS:
            raise ValueError(f"sampler kind must be one of {SAMPLER_KINDS}")
        if self.kind == "gibbs-langevin":
            if self.langevin_eps is None or not self.langevin_eps > 0:
                raise ValueError("gibbs-langevin requires langevin_eps > 0")
            if int(self.langevin_steps) < 1:
                raise ValueError("langevin_steps must be >= 1")
            self.langevin_steps = int(self.langevin_steps)


@dataclass
class ChainState:
    """One Markov chain: current (v, h) plus its private RNG stream."""

    v: np.ndarray
    h: np.ndarray
    rng: np.random.Generator


def sample_hidden_batch(params: ModelParams, V: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw hidden codes for a batch of visibles, shape (B, n) -> (B, m)."""
    P = hidden_posterior_batch(params, V)
    cum = np.cumsum(P, axis=2)
    u = rng.random((V.shape[0], params.m, 1))
    h = (cum < u).sum(axis=2) + 1
    return np.minimum(h, params.q)      # guard the u ~ 1 rounding edge


def sample_hidden(params: ModelParams, v, rng: np.random.Generator) -> np.ndarray:
    """Draw one hidden code from p(h | v), slot by slot."""
    v = np.asarray(v, dtype=np.float64).reshape(params.n)
    return sample_hidden_batch(params, v[None, :], rng)[0]


def sample_visible_batch(params: ModelParams, H: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Exact draw from p(v | h) for a batch of codes, shape (B, m) -> (B, n)."""
    mu = conditional_mean_batch(params, H)
    noise = rng.standard_normal(mu.shape)
    if params.sigma2 is not None:
        noise *= np.sqrt(params.sigma2)
    return mu + noise


def sample_visible(params: ModelParams, h, rng: np.random.Generator) -> np.ndarray:
    h = check_hidden(params, h)
    return sample_visible_batch(params, h[None, :], rng)[0]


def langevin_step_batch(
    params: ModelParams,
    H: np.ndarray,
    V: np.ndarray,
    eps: float,
    rng: np.random.Generator,
    noise_scale: float = 1.0,
) -> np.ndarray:
    """One unadjusted Langevin update of every chain's visible vector."""
    if not eps > 0:
        raise ValueError("eps must be > 0")
    mu = conditional_mean_batch(params, H)
    drift = params.scaled(mu - V)
    step = V + (0.5 * eps * eps) * drift
    if noise_scale != 0.0:
        step = step + (eps * noise_scale) * rng.standard_normal(V.shape)
    return step


def langevin_visible_step(
    params: ModelParams,
    h,
    v,
    eps: float,
    rng: np.random.Generator,
    noise_scale: float = 1.0,
) -> np.ndarray:
    """v + (eps^2/2) * (mu(h) - v) / sigma2 + eps * xi, no accept/reject.

    ``noise_scale`` is a test hook: 0 suppresses the injected noise so the
    deterministic drift can be checked in isolation.
    """
    h = check_hidden(params, h)
    v = np.asarray(v, dtype=np.float64).reshape(params.n)
    return langevin_step_batch(params, h[None, :], v[None, :], eps, rng, noise_scale)[0]


def _visible_update_batch(params, H, V, config, rng):
    if config.kind == "gibbs":
        return sample_visible_batch(params, H, rng)
    for _ in range(config.langevin_steps):
        V = langevin_step_batch(params, H, V, config.langevin_eps, rng)
    return V


def gibbs_sweep_batch(
    params: ModelParams,
    V: np.ndarray,
    H: np.ndarray,
    config: SamplerConfig,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """One block sweep of a chain pool: hidden draw, then visible update."""
    H = sample_hidden_batch(params, V, rng)
    V = _visible_update_batch(params, H, V, config, rng)
    return V, H


def gibbs_sweep(
    params: ModelParams,
    state: ChainState,
    config: SamplerConfig | None = None,
    rng: np.random.Generator | None = None,
) -> ChainState:
    """Advance one chain by a single sweep; uses the chain's own stream
    unless ``rng`` overrides it."""
    config = config or SamplerConfig()
    rng = rng if rng is not None else state.rng
    v = np.asarray(state.v, dtype=np.float64).reshape(params.n)
    h = check_hidden(params, state.h)
    V, H = gibbs_sweep_batch(params, v[None, :], h[None, :], config, rng)
    return ChainState(V[0], H[0], state.rng)


def clamped_completion_batch(
    params: ModelParams,
    V0: np.ndarray,
    clamped: np.ndarray,
    steps: int,
    rng: np.random.Generator,
    config: SamplerConfig | None = None,
    readout: str = "mean",
) -> np.ndarray:
    """Complete the free coordinates of a batch of partially clamped visibles.

    ``clamped`` is a boolean mask over coordinates; True entries are held
    bit-identical to ``V0`` throughout.  ``readout`` is "mean" (free
    coordinates set to mu(h) after the final hidden draw) or "sample".
    """
    config = config or SamplerConfig()
    clamped = np.asarray(clamped, dtype=bool).reshape(params.n)
    free = ~clamped
    if not free.any():
        raise ValueError("clamped completion needs at least one free coordinate")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if readout not in ("mean", "sample"):
        raise ValueError("readout must be 'mean' or 'sample'")
    V = np.asarray(V0, dtype=np.float64).copy().reshape(-1, params.n)
    for t in range(steps):
        H = sample_hidden_batch(params, V, rng)
        if t == steps - 1 and readout == "mean":
            Vnew = conditional_mean_batch(params, H)
        else:
            Vnew = _visible_update_batch(params, H, V, config, rng)
        V[:, free] = Vnew[:, free]
    return V


def clamped_completion(
    params: ModelParams,
    v0,
    clamped,
    steps: int,
    rng: np.random.Generator,
    config: SamplerConfig | None = None,
    readout: str = "mean",
) -> np.ndarray:
    """Single-vector clamped completion; see ``clamped_completion_batch``."""
    v0 = np.asarray(v0, dtype=np.float64).reshape(params.n)
    return clamped_completion_batch(
        params, v0[None, :], clamped, steps, rng, config, readout
    )[0]


def noise_gibbs_samples(
    params: ModelParams,
    count: int,
    steps: int,
    rng: np.random.Generator,
    config: SamplerConfig | None = None,
) -> np.ndarray:
    """Visible samples from ``count`` independent chains started at N(0, I)
    and advanced ``steps`` sweeps (steps=0 returns the noise itself)."""
    config = config or SamplerConfig()
    V = rng.standard_normal((count, params.n))
    H = np.ones((count, params.m), dtype=np.int64)
    for _ in range(steps):
        V, H = gibbs_sweep_batch(params, V, H, config, rng)
    return V
