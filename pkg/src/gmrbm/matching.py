"""Fair-comparison sizing between the categorical-slot model and the
binary-hidden baseline: parameter counts, capacity matching, and the
fixed-weight-budget rule for choosing hidden-unit counts.

Two protocols:

* capacity-matched: the baseline gets m' = ceil(m * log2 q) binary units so
  both latent spaces index the same number of assignments (q^m vs 2^m').
* parameter-matched: both models are sized from one weight budget n_w via
  ``budget_hidden_units``, so total parameter counts are comparable.

``budget_hidden_units`` divides the weight budget by (visibles * states).
Its default rounding mode "table" uses floor, which reproduces the
published sizing row (1000/500/333/250/200 for q = 2/4/6/8/10 at
n_w = 800000, n_v = 400); "ceil" is available, differing only where the
quotient is fractional (q = 6 -> 334).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "MatchReport",
    "gm_param_count",
    "gb_param_count",
    "capacity_matched_mprime",
    "budget_hidden_units",
    "parameter_matched_report",
    "capacity_matched_report",
    "format_match_report",
    "match_report_kv",
]


def gm_param_count(n: int, m: int, q: int) -> int:
    """n (visible bias) + m*q (state biases) + n*m*q (templates)."""
    if min(n, m, q) < 1:
        raise ValueError("n, m, q must all be >= 1")
    return n + m * q * (1 + n)


def gb_param_count(n: int, mprime: int) -> int:
    """n + m' + n*m' for a binary-hidden baseline with m' units."""
    if n < 1 or mprime < 0:
        raise ValueError("n must be >= 1 and mprime >= 0")
    return n + mprime + n * mprime


def capacity_matched_mprime(m: int, q: int) -> int:
    """Binary units needed to index q^m assignments: ceil(m * log2 q)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if q < 2:
        raise ValueError("capacity matching needs q >= 2 (q=1 has a one-point latent space)")
    return math.ceil(m * math.log2(q))


def budget_hidden_units(n_w: int, n_v: int, q: int, rounding: str = "table") -> int:
    """Hidden units affordable under a weight budget: n_w / (n_v * q),
    rounded per ``rounding`` ("table" = floor, or "ceil")."""
    if min(n_w, n_v, q) < 1:
        raise ValueError("n_w, n_v, q must all be >= 1")
    if rounding == "table":
        return n_w // (n_v * q)
    if rounding == "ceil":
        return -(-n_w // (n_v * q))
    raise ValueError("rounding must be 'table' or 'ceil'")


@dataclass
class MatchReport:
    """Side-by-side sizing of the two models under one protocol."""

    mode: str                  # "parameter" or "capacity"
    gm_n: int
    gm_m: int
    gm_q: int
    gm_params: int
    gm_log2_codebook: float    # m * log2 q
    gb_n: int
    gb_mprime: int
    gb_params: int
    gb_log2_codebook: float    # m'


def parameter_matched_report(n_w: int, n_v: int, q: int, rounding: str = "table") -> MatchReport:
    m = budget_hidden_units(n_w, n_v, q, rounding)
    mprime = budget_hidden_units(n_w, n_v, 2, rounding)
    return MatchReport(
        mode="parameter",
        gm_n=n_v, gm_m=m, gm_q=q,
        gm_params=gm_param_count(n_v, m, q),
        gm_log2_codebook=m * math.log2(q),
        gb_n=n_v, gb_mprime=mprime,
        gb_params=gb_param_count(n_v, mprime),
        gb_log2_codebook=float(mprime),
    )


def capacity_matched_report(n: int, m: int, q: int) -> MatchReport:
    mprime = capacity_matched_mprime(m, q)
    return MatchReport(
        mode="capacity",
        gm_n=n, gm_m=m, gm_q=q,
        gm_params=gm_param_count(n, m, q),
        gm_log2_codebook=m * math.log2(q),
        gb_n=n, gb_mprime=mprime,
        gb_params=gb_param_count(n, mprime),
        gb_log2_codebook=float(mprime),
    )


def format_match_report(r: MatchReport) -> str:
    rows = [
        ("", "gm", "gb"),
        ("visibles", str(r.gm_n), str(r.gb_n)),
        ("hidden units", str(r.gm_m), str(r.gb_mprime)),
        ("states", str(r.gm_q), "2"),
        ("parameters", str(r.gm_params), str(r.gb_params)),
        ("log2 codebook", f"{r.gm_log2_codebook:.2f}", f"{r.gb_log2_codebook:.2f}"),
    ]
    w0 = max(len(a) for a, _, _ in rows)
    w1 = max(len(b) for _, b, _ in rows)
    lines = [f"mode: {r.mode}"]
    lines += [f"{a:<{w0}}  {b:>{w1}}  {c}" for a, b, c in rows]
    return "\n".join(lines)


def match_report_kv(r: MatchReport) -> str:
    pairs = [
        ("mode", r.mode),
        ("gm_n", r.gm_n), ("gm_m", r.gm_m), ("gm_q", r.gm_q),
        ("gm_params", r.gm_params), ("gm_log2_codebook", r.gm_log2_codebook),
        ("gb_n", r.gb_n), ("gb_mprime", r.gb_mprime),
        ("gb_params", r.gb_params), ("gb_log2_codebook", r.gb_log2_codebook),
    ]
    return "\n".join(f"{k}={v}" for k, v in pairs)
