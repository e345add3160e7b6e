"""Gaussian-visible RBM with q-state categorical (Potts) hidden slots, and
the binary-hidden Gaussian baseline it reduces to at q=2.

Conventions used throughout the package:

* A hidden code is an integer vector of length m with entries in {1..q}
  (1-based states).  Storage indexing is 0-based only at the array
  boundary, i.e. ``W[k - 1, j]``.
* The weight tensor has layout (state, slot, visible) = (k, j, i) in
  C-order, so ``W[k - 1, j]`` — the template a slot-state contributes to
  the visible mean — is one contiguous stripe.
* ``sigma2`` is an optional per-visible variance.  Absent means unit
  variance.  When present, the quadratic and coupling energy terms are
  scaled elementwise by 1/sigma2, and posterior logits use v/sigma2.

Energy of a configuration (unit variance):

    E(v, h) = 1/2 * sum_i (v_i - b_i)^2
              - sum_j c[j, h_j]
              - sum_ij W[h_j, j, i] * v_i

which equals 1/2 * ||v - mu(h)||^2 + K(h) after completing the square,
with mu(h) = b + sum_j W[h_j, j] and K(h) = (||b||^2 - ||mu(h)||^2)/2
- sum_j c[j, h_j].  All operations here are pure; parameters may be shared
read-only across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModelParams",
    "GbParams",
    "conditional_mean",
    "conditional_mean_batch",
    "energy",
    "offset_constant",
    "hidden_posterior",
    "hidden_posterior_batch",
    "posterior_mean_visible",
    "visible_conditional",
    "gb_energy",
    "gb_hidden_probabilities",
    "gb_visible_conditional",
    "reduce_q2",
]


def _f64(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


@dataclass
class ModelParams:
    """All parameters of the categorical-slot model.

    b: visible bias, shape (n,).
    c: slot-state biases, shape (m, q); ``c[j, k-1]`` belongs to state k
       of slot j.
    W: state templates, shape (q, m, n); ``W[k-1, j]`` is the template
       state k of slot j adds to the visible mean.
    sigma2: optional per-visible variance, shape (n,), strictly positive.
    """

    n: int
    m: int
    q: int
    b: np.ndarray
    c: np.ndarray
    W: np.ndarray
    sigma2: np.ndarray | None = None

    def __post_init__(self):
        self.n, self.m, self.q = int(self.n), int(self.m), int(self.q)
        if min(self.n, self.m, self.q) < 1:
            raise ValueError("n, m, q must all be >= 1")
        self.b = _f64(self.b).reshape(self.n)
        self.c = _f64(self.c).reshape(self.m, self.q)
        self.W = np.ascontiguousarray(_f64(self.W).reshape(self.q, self.m, self.n))
        for name, arr in (("b", self.b), ("c", self.c), ("W", self.W)):
            if not np.isfinite(arr).all():
                raise ValueError(f"non-finite entries in {name}")
        if self.sigma2 is not None:
            self.sigma2 = _f64(self.sigma2).reshape(self.n)
            if not np.isfinite(self.sigma2).all() or (self.sigma2 <= 0).any():
                raise ValueError("sigma2 must be finite and strictly positive")

    @property
    def inv_sigma2(self) -> np.ndarray | float:
        """Elementwise 1/sigma2, or the scalar 1.0 for unit variance."""
        return 1.0 if self.sigma2 is None else 1.0 / self.sigma2

    def scaled(self, v: np.ndarray) -> np.ndarray:
        """v / sigma2 (identity for unit variance)."""
        return v if self.sigma2 is None else v / self.sigma2

    def copy(self) -> "ModelParams":
        return ModelParams(
            self.n, self.m, self.q, self.b.copy(), self.c.copy(), self.W.copy(),
            None if self.sigma2 is None else self.sigma2.copy(),
        )


def check_hidden(params: ModelParams, h) -> np.ndarray:
    """Validate a 1-based hidden code against the model dimensions."""
    h = np.asarray(h)
    if h.shape != (params.m,):
        raise ValueError(f"hidden code has shape {h.shape}, expected ({params.m},)")
    if not np.issubdtype(h.dtype, np.integer):
        hi = h.astype(np.int64)
        if not np.array_equal(hi, h):
            raise ValueError("hidden code entries must be integers")
        h = hi
    if (h < 1).any() or (h > params.q).any():
        raise ValueError(f"hidden states must lie in 1..{params.q}")
    return h.astype(np.int64, copy=False)


def _check_visible(params: ModelParams, v) -> np.ndarray:
    v = _f64(v)
    if v.shape != (params.n,):
        raise ValueError(f"visible vector has shape {v.shape}, expected ({params.n},)")
    if not np.isfinite(v).all():
        raise ValueError("visible vector contains non-finite entries")
    return v


def conditional_mean(params: ModelParams, h) -> np.ndarray:
    """Visible mean for one hidden code: bias plus each slot's chosen template."""
    h = check_hidden(params, h)
    return params.b + params.W[h - 1, np.arange(params.m), :].sum(axis=0)


def conditional_mean_batch(params: ModelParams, H: np.ndarray) -> np.ndarray:
    """Visible means for a batch of hidden codes, shape (B, m) -> (B, n)."""
    H = np.asarray(H, dtype=np.int64)
    cols = np.arange(params.m)
    return params.b + params.W[H - 1, cols, :].sum(axis=1)


def energy(params: ModelParams, v, h) -> float:
    """Joint energy E(v, h); lower is more probable."""
    v = _check_visible(params, v)
    h = check_hidden(params, h)
    dv = v - params.b
    quad = 0.5 * float(dv @ params.scaled(dv))
    bias = float(params.c[np.arange(params.m), h - 1].sum())
    templates = conditional_mean(params, h) - params.b
    coupling = float(templates @ params.scaled(v))
    return quad - bias - coupling


def offset_constant(params: ModelParams, h) -> float:
    """Per-code constant K(h) left after completing the square in v.

    exp(-K(h)) is proportional to the exact hidden marginal p(h).
    """
    h = check_hidden(params, h)
    mu = conditional_mean(params, h)
    bias = float(params.c[np.arange(params.m), h - 1].sum())
    return 0.5 * float(params.b @ params.scaled(params.b) - mu @ params.scaled(mu)) - bias


def hidden_posterior(params: ModelParams, v) -> np.ndarray:
    """Per-slot posterior p(h_j = k | v) as an (m, q) row-stochastic matrix."""
    v = _check_visible(params, v)
    return hidden_posterior_batch(params, v[None, :])[0]


def hidden_posterior_batch(params: ModelParams, V: np.ndarray) -> np.ndarray:
    """Posterior rows for a batch of visibles, shape (B, n) -> (B, m, q)."""
    V = _f64(V)
    B = V.shape[0]
    Vs = params.scaled(V)
    # logits[b, j, k] = c[j, k] + W[k, j] . (v_b / sigma2)
    flat = Vs @ params.W.reshape(params.q * params.m, params.n).T
    logits = flat.reshape(B, params.q, params.m).transpose(0, 2, 1) + params.c
    # max-subtraction: logits scale with ||v|| and overflow otherwise
    logits -= logits.max(axis=2, keepdims=True)
    p = np.exp(logits)
    p /= p.sum(axis=2, keepdims=True)
    return p


def posterior_mean_visible(params: ModelParams, P: np.ndarray) -> np.ndarray:
    """Visible mean with templates weighted by posterior rows (B, m, q) -> (B, n)."""
    B = P.shape[0]
    # rows of W ordered (j, k) to match P reshaped the same way
    Wjk = params.W.transpose(1, 0, 2).reshape(params.m * params.q, params.n)
    return params.b + P.reshape(B, params.m * params.q) @ Wjk


def visible_conditional(params: ModelParams, h) -> tuple[np.ndarray, np.ndarray]:
    """Mean and per-coordinate variance of p(v | h)."""
    mean = conditional_mean(params, h)
    var = np.ones(params.n) if params.sigma2 is None else params.sigma2.copy()
    return mean, var


# ---------------------------------------------------------------------------
# Binary-hidden Gaussian baseline
# ---------------------------------------------------------------------------

@dataclass
class GbParams:
    """Gaussian-visible, binary-hidden baseline model.

    Energy (with hbits in {0,1}^mprime):

        E(v, h) = sum_i (v_i - mu_i)^2 / (2 sigma2_i)
                  - sum_i b_i v_i / sigma2_i
                  - sum_ij (v_i / sigma2_i) W[i, j] h_j
                  - sum_j bhid_j h_j

    ``b`` is an extra linear visible bias kept for interface completeness;
    it defaults to zeros (where the energy matches the usual form) and is
    otherwise absorbed into the visible conditional mean.
    """

    n: int
    mprime: int
    mu: np.ndarray
    bhid: np.ndarray
    W: np.ndarray
    b: np.ndarray | None = None
    sigma2: np.ndarray | None = None

    def __post_init__(self):
        self.n, self.mprime = int(self.n), int(self.mprime)
        if self.n < 1 or self.mprime < 0:
            raise ValueError("n must be >= 1 and mprime >= 0")
        self.mu = _f64(self.mu).reshape(self.n)
        self.bhid = _f64(self.bhid).reshape(self.mprime)
        self.W = _f64(self.W).reshape(self.n, self.mprime)
        self.b = np.zeros(self.n) if self.b is None else _f64(self.b).reshape(self.n)
        self.sigma2 = (
            np.ones(self.n) if self.sigma2 is None else _f64(self.sigma2).reshape(self.n)
        )
        for name, arr in (("mu", self.mu), ("bhid", self.bhid), ("W", self.W),
                          ("b", self.b), ("sigma2", self.sigma2)):
            if not np.isfinite(arr).all():
                raise ValueError(f"non-finite entries in {name}")
        if (self.sigma2 <= 0).any():
            raise ValueError("sigma2 must be strictly positive")


def _check_bits(gb: GbParams, hbits) -> np.ndarray:
    h = np.asarray(hbits)
    if h.shape != (gb.mprime,):
        raise ValueError(f"hidden bits have shape {h.shape}, expected ({gb.mprime},)")
    hf = h.astype(np.float64)
    if not np.isin(hf, (0.0, 1.0)).all():
        raise ValueError("hidden bits must be 0 or 1")
    return hf


def gb_energy(gb: GbParams, v, hbits) -> float:
    v = _f64(v).reshape(gb.n)
    h = _check_bits(gb, hbits)
    vs = v / gb.sigma2
    dv = v - gb.mu
    quad = 0.5 * float(dv @ (dv / gb.sigma2))
    return quad - float(gb.b @ vs) - float(vs @ gb.W @ h) - float(gb.bhid @ h)


def gb_hidden_probabilities(gb: GbParams, v) -> np.ndarray:
    """p(h_j = 1 | v) for every hidden unit."""
    v = _f64(v).reshape(gb.n)
    x = gb.W.T @ (v / gb.sigma2) + gb.bhid
    # logistic via tanh keeps both tails stable
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def gb_visible_conditional(gb: GbParams, hbits) -> tuple[np.ndarray, np.ndarray]:
    h = _check_bits(gb, hbits)
    return gb.mu + gb.b + gb.W @ h, gb.sigma2.copy()


def reduce_q2(params: ModelParams) -> GbParams:
    """Rewrite a q=2 model in the binary-hidden parameterization.

    Bit 1 of unit j corresponds to slot j being in state 1.  The map is

        W_gb[:, j] = W[1, j] - W[2, j]
        mu_gb      = b + sum_j W[2, j]
        bhid_gb[j] = c[j, 1] - c[j, 2]

    which leaves E_gm(v, h) - E_gb(v, bits(h)) constant in (v, h) and the
    hidden posteriors identical; no further bias correction is needed
    because the state-2 coupling is absorbed entirely by recentering mu.
    """
    if params.q != 2:
        raise ValueError(f"reduction requires q=2, got q={params.q}")
    w1, w2 = params.W[0], params.W[1]          # each (m, n)
    return GbParams(
        n=params.n,
        mprime=params.m,
        mu=params.b + w2.sum(axis=0),
        bhid=params.c[:, 0] - params.c[:, 1],
        W=(w1 - w2).T,
        sigma2=None if params.sigma2 is None else params.sigma2.copy(),
    )
