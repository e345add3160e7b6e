"""Text formats and data utilities: vector files, model checkpoints, and a
diagonal-GMM generator for synthetic training data.

Both persistent formats are plain whitespace-separated text with floats
printed at 17 significant digits, which round-trips IEEE doubles exactly.

Vector file:       first line ``<count> <dim>``, then one row per line.
Checkpoint file:   header ``GMRBM1 n m q has_sigma2``, then all parameter
                   values in order b, c (slot-major), W ((state, slot,
                   visible) layout), then sigma2 if flagged.

Loaders validate eagerly and never return a partially populated object.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError
from .model import ModelParams
from .rng import substream

__all__ = [
    "CHECKPOINT_MAGIC",
    "VectorFile",
    "GmmSpec",
    "read_vectors",
    "write_vectors",
    "sample_gmm",
    "save_checkpoint",
    "load_checkpoint",
]

CHECKPOINT_MAGIC = "GMRBM1"

_FMT = "{:.17g}"


def _fmt_row(row) -> str:
    return " ".join(_FMT.format(float(x)) for x in row)


@dataclass
class VectorFile:
    count: int
    dim: int
    rows: np.ndarray


def write_vectors(path, rows) -> None:
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2:
        raise ValueError("rows must be a 2-D array")
    with open(path, "w") as fh:
        fh.write(f"{rows.shape[0]} {rows.shape[1]}\n")
        for row in rows:
            fh.write(_fmt_row(row) + "\n")


def read_vectors(path) -> VectorFile:
    with open(path) as fh:
        lines = fh.read().split("\n")
    if not lines or not lines[0].strip():
        raise DataFormatError("missing header line '<count> <dim>'", path, 1)
    head = lines[0].split()
    if len(head) != 2:
        raise DataFormatError(f"header must be '<count> <dim>', got {lines[0]!r}", path, 1)
    try:
        count, dim = int(head[0]), int(head[1])
    except ValueError:
        raise DataFormatError(f"non-integer header fields in {lines[0]!r}", path, 1) from None
    if count < 0 or dim < 1:
        raise DataFormatError(f"invalid header counts {count} x {dim}", path, 1)

    rows = np.empty((count, dim))
    lineno = 1
    filled = 0
    for raw in lines[1:]:
        lineno += 1
        tokens = raw.split()
        if not tokens:
            continue
        if filled >= count:
            raise DataFormatError(
                f"header promised {count} rows but more data follows", path, lineno
            )
        if len(tokens) != dim:
            raise DataFormatError(
                f"expected {dim} values per row, got {len(tokens)}", path, lineno
            )
        try:
            rows[filled] = [float(t) for t in tokens]
        except ValueError:
            raise DataFormatError("non-numeric token in row", path, lineno) from None
        filled += 1
    if filled < count:
        raise DataFormatError(
            f"header promised {count} rows but file ends after {filled}", path, lineno + 1
        )
    if not np.isfinite(rows).all():
        raise DataFormatError("non-finite value in rows", path)
    return VectorFile(count, dim, rows)


@dataclass
class GmmSpec:
    """Diagonal-covariance Gaussian mixture: (weight, mean, variance) triples."""

    components: list

    def __post_init__(self):
        if not self.components:
            raise ValueError("mixture needs at least one component")
        comps = []
        dim = None
        for w, mean, cov in self.components:
            mean = np.asarray(mean, dtype=np.float64).reshape(-1)
            cov = np.asarray(cov, dtype=np.float64).reshape(-1)
            if dim is None:
                dim = mean.size
            if mean.size != dim or cov.size != dim:
                raise ValueError("all components must share one dimension")
            if not w > 0:
                raise ValueError("component weights must be positive")
            if (cov <= 0).any():
                raise ValueError("covariances must be strictly positive")
            comps.append((float(w), mean, cov))
        total = sum(w for w, _, _ in comps)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"component weights sum to {total}, expected 1")
        self.components = comps
        self.dim = dim


def sample_gmm(spec: GmmSpec, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` rows: pick a component by weight, then a diagonal
    Gaussian draw around its mean."""
    rng = substream(seed, "gmm")
    weights = np.array([w for w, _, _ in spec.components])
    means = np.stack([m for _, m, _ in spec.components])
    covs = np.stack([c for _, _, c in spec.components])
    which = rng.choice(len(spec.components), size=count, p=weights)
    noise = rng.standard_normal((count, spec.dim))
    return means[which] + np.sqrt(covs[which]) * noise


def save_checkpoint(params: ModelParams, path) -> None:
    has_s2 = 1 if params.sigma2 is not None else 0
    with open(path, "w") as fh:
        fh.write(f"{CHECKPOINT_MAGIC} {params.n} {params.m} {params.q} {has_s2}\n")
        fh.write(_fmt_row(params.b) + "\n")
        for j in range(params.m):
            fh.write(_fmt_row(params.c[j]) + "\n")
        for k in range(params.q):
            for j in range(params.m):
                fh.write(_fmt_row(params.W[k, j]) + "\n")
        if has_s2:
            fh.write(_fmt_row(params.sigma2) + "\n")


def load_checkpoint(path) -> ModelParams:
    with open(path) as fh:
        text = fh.read()
    lines = text.split("\n")
    if not lines or not lines[0].strip():
        raise DataFormatError(f"missing checkpoint header; expected magic {CHECKPOINT_MAGIC}", path, 1)
    head = lines[0].split()
    if head[0] != CHECKPOINT_MAGIC:
        raise DataFormatError(f"bad magic {head[0]!r}; expected {CHECKPOINT_MAGIC}", path, 1)
    if len(head) != 5:
        raise DataFormatError("header must be 'GMRBM1 n m q has_sigma2'", path, 1)
    try:
        n, m, q, has_s2 = (int(x) for x in head[1:])
    except ValueError:
        raise DataFormatError("non-integer header dimensions", path, 1) from None
    if min(n, m, q) < 1 or has_s2 not in (0, 1):
        raise DataFormatError(f"invalid header dimensions {head[1:]}", path, 1)

    tokens = "\n".join(lines[1:]).split()
    expected = n + m * q + q * m * n + (n if has_s2 else 0)
    if len(tokens) != expected:
        kind = "truncated" if len(tokens) < expected else "trailing data in"
        raise DataFormatError(
            f"{kind} checkpoint: expected {expected} values, found {len(tokens)}", path
        )
    try:
        values = np.array([float(t) for t in tokens])
    except ValueError:
        raise DataFormatError("non-numeric token in parameter data", path) from None

    pos = 0

    def take(size, shape):
        nonlocal pos
        out = values[pos : pos + size].reshape(shape)
        pos += size
        return out

    b = take(n, (n,))
    c = take(m * q, (m, q))
    W = take(q * m * n, (q, m, n))
    sigma2 = take(n, (n,)) if has_s2 else None
    try:
        return ModelParams(n, m, q, b, c, W, sigma2)
    except ValueError as exc:
        raise DataFormatError(f"invalid parameter values: {exc}", path) from None
