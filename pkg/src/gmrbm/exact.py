"""Brute-force exact inference for desk-scale models.

Enumerates all q^m hidden codes (slot 1 varying fastest) and integrates the
Gaussian visible factor analytically, giving the exact partition function,
hidden marginal, posterior table, likelihood, and likelihood gradient.
These are the ground truth the samplers and the contrastive-divergence
estimator are verified against.  Refuses models beyond a configurable code
cap (default 10^6).

All results are deterministic for a fixed model: enumeration order and
summation order are fixed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError
from .model import ModelParams, hidden_posterior_batch, _check_visible, _f64
from .trainer import GradientRecord

__all__ = [
    "DEFAULT_CODE_CAP",
    "ExactSummary",
    "enumerate_codes",
    "code_means",
    "code_offsets",
    "exact_summary",
    "exact_log_likelihood",
    "exact_posterior",
    "exact_slot_marginals",
    "exact_gradient",
]

DEFAULT_CODE_CAP = 10**6

LOG_2PI = float(np.log(2.0 * np.pi))


def logsumexp(a: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    amax = a.max()
    return float(np.log(np.exp(a - amax).sum()) + amax)


def enumerate_codes(m: int, q: int, max_codes: int = DEFAULT_CODE_CAP) -> np.ndarray:
    """All q^m hidden codes as a (q^m, m) array, slot 1 varying fastest."""
    count = q**m
    if count > max_codes:
        raise CapacityError(
            f"enumeration of q^m = {q}^{m} = {count} codes exceeds cap {max_codes}"
        )
    idx = np.arange(count)
    codes = np.empty((count, m), dtype=np.int64)
    for j in range(m):
        codes[:, j] = (idx // q**j) % q + 1
    return codes


def code_means(params: ModelParams, codes: np.ndarray) -> np.ndarray:
    """Conditional means mu(h) for every code row, shape (C, n)."""
    M = np.tile(params.b, (codes.shape[0], 1))
    for j in range(params.m):
        M += params.W[codes[:, j] - 1, j, :]
    return M


def code_offsets(params: ModelParams, codes: np.ndarray) -> np.ndarray:
    """K(h) for every code row."""
    M = code_means(params, codes)
    bias = np.zeros(codes.shape[0])
    for j in range(params.m):
        bias += params.c[j, codes[:, j] - 1]
    bb = float(params.b @ params.scaled(params.b))
    return 0.5 * (bb - np.einsum("ci,ci->c", M, params.scaled(M))) - bias


def _log_gaussian_volume(params: ModelParams) -> float:
    # integral of exp(-||v - mu||^2_{sigma} / 2) over R^n, in log
    vol = 0.5 * params.n * LOG_2PI
    if params.sigma2 is not None:
        vol += 0.5 * float(np.log(params.sigma2).sum())
    return vol


@dataclass
class ExactSummary:
    """Exact log partition function and hidden marginal over all q^m codes.

    ``hidden_marginal[i]`` is p(h) for the i-th code in enumeration order
    (slot 1 fastest); it is proportional to exp(-K(h)).
    """

    log_partition: float
    hidden_marginal: np.ndarray


def exact_summary(params: ModelParams, max_codes: int = DEFAULT_CODE_CAP) -> ExactSummary:
    codes = enumerate_codes(params.m, params.q, max_codes)
    neg_k = -code_offsets(params, codes)
    lse = logsumexp(neg_k)
    marginal = np.exp(neg_k - lse)
    marginal /= marginal.sum()
    return ExactSummary(_log_gaussian_volume(params) + lse, marginal)


def _code_energies(params: ModelParams, v: np.ndarray, codes: np.ndarray) -> np.ndarray:
    M = code_means(params, codes)
    dv = v[None, :] - M
    return 0.5 * np.einsum("ci,ci->c", dv, params.scaled(dv)) + code_offsets(params, codes)


def exact_log_likelihood(
    params: ModelParams, v, max_codes: int = DEFAULT_CODE_CAP
) -> float:
    """log p(v) = logsumexp_h(-E(v, h)) - log Z."""
    v = _check_visible(params, v)
    codes = enumerate_codes(params.m, params.q, max_codes)
    summary_lse = logsumexp(-code_offsets(params, codes))
    return logsumexp(-_code_energies(params, v, codes)) - (
        _log_gaussian_volume(params) + summary_lse
    )


def exact_posterior(
    params: ModelParams, v, max_codes: int = DEFAULT_CODE_CAP
) -> np.ndarray:
    """p(h | v) over all q^m codes in enumeration order."""
    v = _check_visible(params, v)
    codes = enumerate_codes(params.m, params.q, max_codes)
    neg_e = -_code_energies(params, v, codes)
    p = np.exp(neg_e - logsumexp(neg_e))
    return p / p.sum()


def exact_slot_marginals(probs: np.ndarray, codes: np.ndarray, m: int, q: int) -> np.ndarray:
    """Collapse a code-table distribution to per-slot state marginals (m, q)."""
    marg = np.zeros((m, q))
    for j in range(m):
        np.add.at(marg[j], codes[:, j] - 1, probs)
    return marg


def exact_gradient(
    params: ModelParams, data, max_codes: int = DEFAULT_CODE_CAP
) -> GradientRecord:
    """Exact gradient of the mean log-likelihood over ``data`` rows.

    Positive phase uses the closed-form per-slot posterior at each data
    vector; negative phase uses the enumerated hidden marginal together
    with the Gaussian conditional moments (E[v | h] = mu(h)).
    """
    V = _f64(data).reshape(-1, params.n)
    if V.shape[0] == 0:
        raise ValueError("data must contain at least one visible vector")
    codes = enumerate_codes(params.m, params.q, max_codes)

    # positive phase, averaged over data
    P = hidden_posterior_batch(params, V)            # (D, m, q)
    Vs = params.scaled(V)
    db_pos = Vs.mean(axis=0) - params.scaled(params.b)
    dc_pos = P.mean(axis=0)
    dw_pos = np.einsum("bjk,bi->kji", P, Vs) / V.shape[0]

    # negative phase from the exact model distribution
    summary = exact_summary(params, max_codes)
    p_h = summary.hidden_marginal
    M = code_means(params, codes)
    Ms = params.scaled(M)
    db_neg = p_h @ Ms - params.scaled(params.b)
    dc_neg = exact_slot_marginals(p_h, codes, params.m, params.q)
    dw_neg = np.zeros_like(params.W)
    weighted = p_h[:, None] * Ms
    for j in range(params.m):
        np.add.at(dw_neg[:, j, :], codes[:, j] - 1, weighted)

    return GradientRecord(db_pos - db_neg, dc_pos - dc_neg, dw_pos - dw_neg)
