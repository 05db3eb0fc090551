"""Synthetic data and analytic oracles.

* ``sample_dyadic_independent``: every cell an independent Bernoulli draw
  with a per-column probability.
* ``sample_leader_model``: a leader column A and noisy copies B, C that are
  conditionally independent given A.  B and C are strongly correlated
  marginally but carry no direct association.
* ``feasible_envelope``: the range of phi attainable at each value of p11
  (or of Jaccard similarity), by enumerating valid 2x2 tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .engine import BinaryMatrix
from .errors import ConfigError, InvalidProbability

ENVELOPE_STEPS = 512
SEED_MAX = 2**64 - 1


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def sample_dyadic_independent(
    k: int,
    marginals: Sequence[float],
    n: int,
    seed: int,
    labels: Sequence[str] | None = None,
) -> BinaryMatrix:
    probs = np.asarray(marginals, dtype=np.float64)
    if probs.shape != (k,):
        raise InvalidProbability(f"expected {k} marginals, got {probs.size}")
    if not np.all((probs >= 0.0) & (probs <= 1.0)):
        raise InvalidProbability("marginal probabilities must lie in [0, 1]")
    if k < 1 or n < 1:
        raise ConfigError("need at least one row and one column")
    rng = np.random.default_rng(check_seed(seed))
    dense = rng.random((n, k)) < probs
    return BinaryMatrix.from_dense(dense, labels)


LEADER_DEFAULTS = {"p_leader": 0.5, "flip": 0.2}


def sample_leader_model(
    n: int,
    seed: int,
    p_leader: float = LEADER_DEFAULTS["p_leader"],
    flip: float = LEADER_DEFAULTS["flip"],
) -> BinaryMatrix:
    """Columns A, B, C: A ~ Bernoulli(p_leader); B and C copy A, each bit
    flipped independently with probability ``flip``."""
    for name, q in (("p_leader", p_leader), ("flip", flip)):
        if not 0.0 <= q <= 1.0:
            raise InvalidProbability(f"{name} must lie in [0, 1], got {q}")
    if n < 1:
        raise ConfigError("need at least one row")
    rng = np.random.default_rng(check_seed(seed))
    a = rng.random(n) < p_leader
    b = a ^ (rng.random(n) < flip)
    c = a ^ (rng.random(n) < flip)
    return BinaryMatrix.from_dense(np.column_stack([a, b, c]), ["A", "B", "C"])


# -- feasibility envelopes ---------------------------------------------------------

@dataclass(frozen=True)
class FeasibleEnvelope:
    kind: str                 # "p11" or "jaccard"
    grid: np.ndarray
    min_corr: np.ndarray
    max_corr: np.ndarray

    def bounds(self, x) -> tuple[np.ndarray, np.ndarray]:
        """(min, max) phi at abscissa ``x``.

        Off-grid points take the wider of the two bracketing grid bounds.
        Both bounds jump at the ends of the range (max phi at p11 = 0, min
        phi at J = 1), where linear interpolation would cut into the
        feasible set.
        """
        x = np.asarray(x, dtype=np.float64)
        hi_idx = np.clip(np.searchsorted(self.grid, x, side="left"), 0, self.grid.size - 1)
        lo_idx = np.where(self.grid[hi_idx] == x, hi_idx, np.maximum(hi_idx - 1, 0))
        lo = np.minimum(self.min_corr[lo_idx], self.min_corr[hi_idx])
        hi = np.maximum(self.max_corr[lo_idx], self.max_corr[hi_idx])
        return lo, hi

    def contains(self, x, phi, tol: float = 0.01) -> np.ndarray:
        lo, hi = self.bounds(x)
        phi = np.asarray(phi)
        return (phi >= lo - tol) & (phi <= hi + tol)


def _phi_cross(p00, p01, p10, p11):
    """phi via the cross-product form (p00 p11 - p01 p10) / sd product;
    returns NaN for constant margins."""
    mx = p10 + p11
    my = p01 + p11
    var = mx * (1.0 - mx) * my * (1.0 - my)
    ok = (mx > 1e-12) & (mx < 1 - 1e-12) & (my > 1e-12) & (my < 1 - 1e-12)
    out = np.full(np.shape(var), np.nan)
    out[ok] = (p00[ok] * p11[ok] - p01[ok] * p10[ok]) / np.sqrt(var[ok])
    return out


def _simplex_pairs(steps: int) -> tuple[np.ndarray, np.ndarray]:
    i, j = np.meshgrid(np.arange(steps + 1), np.arange(steps + 1), indexing="ij")
    keep = i + j <= steps
    return i[keep], j[keep]


def _p11_tables(a: float, steps: int):
    i, j = _simplex_pairs(steps)
    rest = 1.0 - a
    p01 = rest * i / steps
    p10 = rest * j / steps
    p00 = np.clip(rest * (steps - i - j) / steps, 0.0, None)
    return p00, p01, p10, np.full(p01.shape, a)


def _jaccard_tables(jac: float, steps: int):
    if jac == 0.0:
        return _p11_tables(0.0, steps)
    s, t = np.meshgrid(np.arange(1, steps + 1), np.arange(steps + 1), indexing="ij")
    s, t = s.ravel(), t.ravel()
    p11 = jac * s / steps
    off = p11 * (1.0 - jac) / jac          # p01 + p10
    p01 = off * t / steps
    p10 = off * (steps - t) / steps
    p00 = np.clip(1.0 - s / steps, 0.0, None)
    return p00, p01, p10, p11


def feasible_envelope(kind: str, grid_size: int, steps: int = ENVELOPE_STEPS) -> FeasibleEnvelope:
    """Enumerated (min, max) of phi over all tables at each grid abscissa.

    Tables with a constant margin are excluded.  Free cell parameters move
    in steps of at most ``1 / steps``.  At p11 = 1 the only table is
    degenerate; the bounds there are the limits (0, 1) approached as
    p11 -> 1.
    """
    if grid_size < 2:
        raise ConfigError("grid_size must be >= 2")
    if kind not in ("p11", "jaccard"):
        raise ConfigError(f"envelope abscissa must be 'p11' or 'jaccard', got {kind!r}")
    grid = np.linspace(0.0, 1.0, grid_size)
    tables = _p11_tables if kind == "p11" else _jaccard_tables
    lo = np.empty(grid_size)
    hi = np.empty(grid_size)
    for g, x in enumerate(grid):
        phi = _phi_cross(*tables(float(x), steps))
        phi = phi[np.isfinite(phi)]
        if phi.size:
            lo[g], hi[g] = np.clip(phi.min(), -1, 1), np.clip(phi.max(), -1, 1)
        else:
            lo[g], hi[g] = 0.0, 1.0
    return FeasibleEnvelope(kind, grid, lo, hi)
