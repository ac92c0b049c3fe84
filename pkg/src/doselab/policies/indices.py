"""Optimism indices for the efficacy estimates."""

from __future__ import annotations

import math

from ..dose_model import DomainError

_EPS = 1e-15


def ucb1_index(q_hat: float, n: int, t: int, c: float) -> float:
    """``q_hat + sqrt(c * log(t) / n)``; an unsampled dose gets +inf to force exploration."""
    if t < 1:
        raise DomainError("ucb1_index requires t >= 1")
    if n == 0:
        return math.inf
    return q_hat + math.sqrt(c * math.log(t) / n)


def kl_bernoulli(p: float, q: float) -> float:
    """KL divergence between Bernoulli(p) and Bernoulli(q), with 0*log(0) = 0."""
    p = min(max(p, 0.0), 1.0)
    q = min(max(q, _EPS), 1.0 - _EPS)
    out = 0.0
    if p > 0.0:
        out += p * math.log(p / q)
    if p < 1.0:
        out += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return out


def klucb_index(q_hat: float, n: int, t: int, tol: float = 1e-9) -> float:
    """``max{q in [q_hat, 1] : n * kl(q_hat, q) <= log(t)}`` by bisection.

    The divergence is increasing in ``q`` on ``[q_hat, 1]``, so bisection to
    ``tol`` brackets the boundary.  ``t = 1`` leaves no exploration budget and
    returns ``q_hat``; ``q_hat = 1`` saturates at the upper boundary.
    """
    if n < 1:
        raise DomainError("klucb_index requires n >= 1")
    if t < 1:
        raise DomainError("klucb_index requires t >= 1")
    if q_hat >= 1.0:
        return 1.0
    budget = math.log(t) / n
    if budget <= 0.0:
        return q_hat
    lo, hi = q_hat, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2.0
        if kl_bernoulli(q_hat, mid) <= budget:
            lo = mid
        else:
            hi = mid
    return lo
