"""Exact algebra of small binary-input discrete memoryless channels.

Channels are dense 2 x M transition tables in float64. Everything here is
meant to be a numerical ground truth for the rest of the library, so the
operations favour exactness over scale: the combining operators refuse to
build output alphabets larger than ``MAX_OUTPUTS`` instead of merging
symbols silently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Hard cap on alphabet growth in the combining operators.
MAX_OUTPUTS = 4096

_ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Dmc:
    """A binary-input DMC: ``probs[x, y] = W(y | x)`` with x in {0, 1}.

    ``labels`` optionally tags each output symbol (used to keep track of
    composite outputs such as ``(y1, y2, x)`` produced by the combining
    operators). Labels are opaque to all computations.
    """

    probs: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 2 or p.shape[0] != 2 or p.shape[1] < 1:
            raise ValueError(f"transition table must be 2 x M, got {p.shape}")
        if np.any(p < -_ROW_SUM_TOL) or np.any(p > 1.0 + 1e-9):
            raise ValueError("transition probabilities must lie in [0, 1]")
        rows = p.sum(axis=1)
        if np.any(np.abs(rows - 1.0) > 1e-9):
            raise ValueError(f"rows must sum to 1, got {rows}")
        p = np.clip(p, 0.0, None)
        object.__setattr__(self, "probs", p)
        if self.labels is not None and len(self.labels) != p.shape[1]:
            raise ValueError("labels length must match number of outputs")

    @property
    def num_outputs(self) -> int:
        return self.probs.shape[1]

    def __repr__(self):
        return f"Dmc(M={self.num_outputs})"


@dataclass(frozen=True)
class ChannelStats:
    """Quality summary of a channel: Bhattacharyya value and capacity in bits."""

    z: float
    capacity: float


def make_bec(epsilon: float) -> Dmc:
    """Binary erasure channel with outputs (0, e, 1)."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"erasure rate must be in [0, 1], got {epsilon}")
    table = np.array(
        [
            [1.0 - epsilon, epsilon, 0.0],
            [0.0, epsilon, 1.0 - epsilon],
        ]
    )
    return Dmc(table, labels=("0", "e", "1"))


def make_bsc(p: float) -> Dmc:
    """Binary symmetric channel with crossover probability p <= 1/2."""
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"crossover must be in [0, 1/2], got {p}")
    table = np.array([[1.0 - p, p], [p, 1.0 - p]])
    return Dmc(table, labels=("0", "1"))


def bhattacharyya(w: Dmc) -> float:
    """Sum over outputs of sqrt(W(y|0) W(y|1)); always in [0, 1]."""
    return float(np.sqrt(w.probs[0] * w.probs[1]).sum())


def symmetric_capacity(w: Dmc) -> float:
    """Mutual information in bits/use under a uniform input, 0 log 0 := 0."""
    p = w.probs
    q = 0.5 * (p[0] + p[1])
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, p * np.log2(np.where(p > 0.0, p, 1.0) / q), 0.0)
    return float(0.5 * terms.sum())


def channel_stats(w: Dmc) -> ChannelStats:
    return ChannelStats(z=bhattacharyya(w), capacity=symmetric_capacity(w))


def is_symmetric(w: Dmc, tol: float = 1e-9) -> bool:
    """True iff some involutive output permutation swaps the two rows.

    Each output y is a point (W(y|0), W(y|1)); a valid involution must map a
    point (a, b) to a point (b, a). Outputs with a == b may be fixed points.
    Matching greedily works because columns with equal coordinates are
    interchangeable.
    """
    a = w.probs[0].copy()
    b = w.probs[1].copy()
    unmatched = list(range(w.num_outputs))
    while unmatched:
        i = unmatched.pop()
        if abs(a[i] - b[i]) <= tol:
            continue
        partner = None
        for j in unmatched:
            if abs(a[j] - b[i]) <= tol and abs(b[j] - a[i]) <= tol:
                partner = j
                break
        if partner is None:
            return False
        unmatched.remove(partner)
    return True


def _combined_labels(w1: Dmc, w2: Dmc):
    l1 = w1.labels if w1.labels is not None else tuple(range(w1.num_outputs))
    l2 = w2.labels if w2.labels is not None else tuple(range(w2.num_outputs))
    return l1, l2


def box_star(w1: Dmc, w2: Dmc) -> Dmc:
    """Combine two channels into the one seen by the first input of the
    2-bit building block when the second input is unknown.

    The block sends u1 xor u2 through w1 and u2 through w2; marginalising the
    uniform u2 gives outputs over Y1 x Y2:

        (w1 . w2)(y1, y2 | u) = 1/2 * sum_x w1(y1 | u xor x) w2(y2 | x)
    """
    m1, m2 = w1.num_outputs, w2.num_outputs
    if m1 * m2 > MAX_OUTPUTS:
        raise ValueError(f"combined alphabet {m1 * m2} exceeds cap {MAX_OUTPUTS}")
    p1, p2 = w1.probs, w2.probs
    rows = np.empty((2, m1 * m2))
    for u in (0, 1):
        rows[u] = 0.5 * (
            np.outer(p1[u], p2[0]) + np.outer(p1[u ^ 1], p2[1])
        ).ravel()
    l1, l2 = _combined_labels(w1, w2)
    labels = tuple((x, y) for x in l1 for y in l2)
    return Dmc(rows, labels=labels)


def circle_star(w1: Dmc, w2: Dmc) -> Dmc:
    """Combine two channels into the one seen by the second input of the
    2-bit building block when the first input is available at the decoder.

    Outputs live over Y1 x Y2 x {0, 1}, the extra coordinate being the known
    companion bit:

        (w1 . w2)(y1, y2, x | u) = 1/2 * w1(y1 | u xor x) w2(y2 | u)
    """
    m1, m2 = w1.num_outputs, w2.num_outputs
    if 2 * m1 * m2 > MAX_OUTPUTS:
        raise ValueError(f"combined alphabet {2 * m1 * m2} exceeds cap {MAX_OUTPUTS}")
    p1, p2 = w1.probs, w2.probs
    rows = np.empty((2, m1 * m2 * 2))
    for u in (0, 1):
        # output index = (y1 * m2 + y2) * 2 + x
        per_x = np.stack(
            [0.5 * np.outer(p1[u ^ x], p2[u]).ravel() for x in (0, 1)], axis=1
        )
        rows[u] = per_x.ravel()
    l1, l2 = _combined_labels(w1, w2)
    labels = tuple((y1, y2, x) for y1 in l1 for y2 in l2 for x in (0, 1))
    return Dmc(rows, labels=labels)


def random_symmetric_dmc(rng: np.random.Generator, max_pairs: int = 3) -> Dmc:
    """Random channel that is symmetric by construction (for property tests).

    Built from swapped column pairs (a, b) / (b, a) plus optionally one
    self-symmetric column (a, a), then normalised.
    """
    n_pairs = int(rng.integers(1, max_pairs + 1))
    with_fixed = bool(rng.integers(0, 2))
    cols = []
    for _ in range(n_pairs):
        a, b = rng.random(2)
        cols.append((a, b))
        cols.append((b, a))
    if with_fixed:
        c = rng.random()
        cols.append((c, c))
    table = np.array(cols).T
    table /= table.sum(axis=1, keepdims=True)
    return Dmc(table)


def dmc_to_text(w: Dmc) -> str:
    """Plain-text table form: a line with M, then one line per input row."""
    lines = [str(w.num_outputs)]
    for row in w.probs:
        lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def dmc_from_text(text: str) -> Dmc:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != 3:
        raise ValueError("channel file must have exactly 3 non-empty lines")
    m = int(lines[0])
    rows = [np.array([float(t) for t in ln.split()]) for ln in lines[1:]]
    if any(r.size != m for r in rows):
        raise ValueError(f"expected {m} probabilities per row")
    return Dmc(np.vstack(rows))
