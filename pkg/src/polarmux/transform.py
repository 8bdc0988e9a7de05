"""GF(2) linear machinery: Kronecker powers, bit reversal, the polar
butterfly, and the multi-channel compound transform.

Conventions pinned here and relied on everywhere else:

* ``polar_encode(u, n)`` computes ``u . R_N . G^(x n)`` where ``R_N`` is the
  bit-reversal permutation and ``G = [[1, 0], [1, 1]]``. The butterfly runs
  in natural order after permuting the input.
* The compound transform over l sub-channels splits ``u`` into l lanes of
  ``2^n`` consecutive bits, polar-encodes each lane, and pushes the lane
  outputs through one l x l base block per butterfly output index. Block b
  occupies coded positions ``[b*l, (b+1)*l)`` and its output c is routed to
  sub-channel c. When l is a power of two and the base matrix is the matching
  Kronecker power of G, lane j feeds base input bitrev(j), which makes the
  whole transform bit-identical to ``polar_encode`` at depth ``n + log2(l)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ARIKAN_KERNEL = np.array([[1, 0], [1, 1]], dtype=np.uint8)


def is_power_of_two(x: int) -> bool:
    return x >= 1 and (x & (x - 1)) == 0


def kronecker_power(g: np.ndarray, n: int) -> np.ndarray:
    """n-fold Kronecker power of a square binary matrix; n = 0 gives [[1]]."""
    g = np.asarray(g, dtype=np.uint8)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError("kernel must be square")
    if n < 0:
        raise ValueError("power must be nonnegative")
    out = np.eye(1, dtype=np.uint8)
    for _ in range(n):
        out = np.kron(out, g)
    return out


def bit_reversal_perm(n_points: int) -> np.ndarray:
    """Permutation sending index i to the index with reversed binary digits."""
    if not is_power_of_two(n_points):
        raise ValueError(f"{n_points} is not a power of two")
    bits = n_points.bit_length() - 1
    idx = np.arange(n_points)
    out = np.zeros(n_points, dtype=np.int64)
    for _ in range(bits):
        out = (out << 1) | (idx & 1)
        idx >>= 1
    return out


def _butterfly(x: np.ndarray) -> np.ndarray:
    """In-place xor butterfly over the last axis (length must be 2^d)."""
    n = x.shape[-1]
    span = n // 2
    while span >= 1:
        v = x.reshape(x.shape[:-1] + (-1, 2, span))
        v[..., 0, :] ^= v[..., 1, :]
        span //= 2
    return x


def polar_encode(u: np.ndarray, n: int | None = None) -> np.ndarray:
    """Encode one block: bit-reverse the input, then run the xor butterfly.

    The result equals multiplication by the bit-reversed Kronecker-power
    matrix; the butterfly keeps it at O(N log N).
    """
    u = np.asarray(u, dtype=np.uint8)
    size = u.shape[-1]
    if n is not None and size != 1 << n:
        raise ValueError(f"length {size} does not match depth {n}")
    if not is_power_of_two(size):
        raise ValueError(f"block length {size} is not a power of two")
    x = u[..., bit_reversal_perm(size)].copy()
    return _butterfly(x)


def arikan_matrix(n: int) -> np.ndarray:
    """Explicit N x N transform matrix (bit reversal times Kronecker power).

    Only for oracle tests; the encoder never materialises it.
    """
    size = 1 << n
    perm = bit_reversal_perm(size)
    rev = np.zeros((size, size), dtype=np.uint8)
    rev[np.arange(size), perm] = 1
    return (rev @ kronecker_power(ARIKAN_KERNEL, n)) % 2


def gf2_invertible(m: np.ndarray) -> bool:
    """Gaussian elimination rank test over GF(2)."""
    a = np.array(m, dtype=np.uint8) % 2
    rows, cols = a.shape
    if rows != cols:
        return False
    r = 0
    for c in range(cols):
        pivots = np.nonzero(a[r:, c])[0]
        if pivots.size == 0:
            return False
        p = r + pivots[0]
        a[[r, p]] = a[[p, r]]
        mask = a[:, c].astype(bool)
        mask[r] = False
        a[mask] ^= a[r]
        r += 1
    return True


def validate_g0(g0: np.ndarray) -> bool:
    """A base block polarises iff it is invertible and not upper triangular.

    A 1 x 1 identity is accepted as the degenerate single-channel case.
    """
    g0 = np.asarray(g0, dtype=np.uint8)
    if g0.ndim != 2 or g0.shape[0] != g0.shape[1]:
        raise ValueError("base matrix must be square")
    l = g0.shape[0]
    if l == 1:
        return bool(g0[0, 0] == 1)
    if not gf2_invertible(g0):
        return False
    below = np.tril(np.ones((l, l), dtype=bool), k=-1)
    return bool(g0[below].any())


def default_assignment(block_length: int, l: int) -> np.ndarray:
    """Stream index per coded position: position p goes to sub-channel
    p mod l, slot p // l. Each of the l base-block outputs lands on its own
    sub-channel, in order."""
    if block_length % l != 0:
        raise ValueError(f"{l} does not divide block length {block_length}")
    per = block_length // l
    p = np.arange(block_length)
    return (p % l) * per + p // l


def lane_input_order(l: int) -> np.ndarray:
    """Which base-block input each lane feeds.

    Bit-reversed for power-of-two l so that the compound transform with the
    standard kernel coincides with the full-depth polar transform; identity
    otherwise.
    """
    if is_power_of_two(l):
        return bit_reversal_perm(l)
    return np.arange(l)


@dataclass(frozen=True)
class CompoundSpec:
    """Code geometry: l sub-channels, base block g0, butterfly depth n,
    frozen input positions, and the coded-position-to-stream assignment."""

    l: int
    g0: np.ndarray
    n: int
    frozen: np.ndarray
    assignment: np.ndarray

    def __post_init__(self):
        g0 = np.asarray(self.g0, dtype=np.uint8)
        frozen = np.asarray(self.frozen, dtype=np.int64)
        assignment = np.asarray(self.assignment, dtype=np.int64)
        if self.l < 1 or self.n < 0:
            raise ValueError("need l >= 1 and n >= 0")
        if g0.shape != (self.l, self.l):
            raise ValueError(f"base matrix must be {self.l} x {self.l}")
        if not validate_g0(g0):
            raise ValueError("base matrix is not a valid polarising block")
        size = self.block_length
        if assignment.shape != (size,) or not np.array_equal(
            np.sort(assignment), np.arange(size)
        ):
            raise ValueError("assignment must be a bijection on coded positions")
        if frozen.size:
            frozen = np.unique(frozen)
            if frozen[0] < 0 or frozen[-1] >= size:
                raise ValueError("frozen indices out of range")
        object.__setattr__(self, "g0", g0)
        object.__setattr__(self, "frozen", frozen)
        object.__setattr__(self, "assignment", assignment)

    @classmethod
    def make(cls, l: int, n: int, frozen=(), g0=None, assignment=None):
        if g0 is None:
            if not is_power_of_two(l):
                raise ValueError("g0 required when l is not a power of two")
            g0 = kronecker_power(ARIKAN_KERNEL, l.bit_length() - 1)
        if assignment is None:
            assignment = default_assignment(l * (1 << n), l)
        return cls(l=l, g0=np.asarray(g0), n=n,
                   frozen=np.asarray(list(frozen), dtype=np.int64),
                   assignment=np.asarray(assignment))

    @property
    def block_length(self) -> int:
        return self.l * (1 << self.n)

    @property
    def uses_standard_kernel(self) -> bool:
        if not is_power_of_two(self.l):
            return False
        m = self.l.bit_length() - 1
        return np.array_equal(self.g0, kronecker_power(ARIKAN_KERNEL, m))

    @property
    def frozen_mask(self) -> np.ndarray:
        mask = np.zeros(self.block_length, dtype=bool)
        mask[self.frozen] = True
        return mask

    @property
    def info_set(self) -> np.ndarray:
        return np.setdiff1d(np.arange(self.block_length), self.frozen)

    def channel_of(self, positions) -> np.ndarray:
        """Sub-channel index carrying each coded position."""
        per = self.block_length // self.l
        return self.assignment[positions] // per

    def with_frozen(self, frozen) -> "CompoundSpec":
        return CompoundSpec(
            l=self.l, g0=self.g0, n=self.n,
            frozen=np.asarray(list(frozen), dtype=np.int64),
            assignment=self.assignment,
        )


def compound_transform(u: np.ndarray, spec: CompoundSpec) -> np.ndarray:
    """Full coded word (before routing), for a single block or a batch.

    Power-of-two base blocks with the standard kernel collapse into one
    deeper butterfly; an arbitrary base block is applied per l-tuple after
    the per-lane butterflies.
    """
    u = np.asarray(u, dtype=np.uint8)
    size = spec.block_length
    if u.shape[-1] != size:
        raise ValueError(f"input length {u.shape[-1]} != block length {size}")
    if spec.uses_standard_kernel:
        depth = spec.n + (spec.l.bit_length() - 1)
        return polar_encode(u, depth)
    return _lane_transform(u, spec)


def _lane_transform(u: np.ndarray, spec: CompoundSpec) -> np.ndarray:
    """Generic route: per-lane butterflies, then one base block per output
    index. Coincides with the collapsed butterfly for the standard kernel."""
    copies = 1 << spec.n
    lanes = u.reshape(u.shape[:-1] + (spec.l, copies))
    w = polar_encode(lanes)  # per-lane butterfly over the last axis
    order = lane_input_order(spec.l)
    blocks = np.empty_like(w)
    blocks[..., order, :] = w
    x = (np.swapaxes(blocks, -1, -2) @ spec.g0) % 2
    return x.reshape(u.shape[:-1] + (spec.block_length,)).astype(np.uint8)


def flat_to_streams(x: np.ndarray, spec: CompoundSpec) -> list[np.ndarray]:
    """Route a coded word into per-sub-channel streams via the assignment."""
    per = spec.block_length // spec.l
    serial = np.empty_like(x)
    serial[..., spec.assignment] = x
    return [serial[..., c * per:(c + 1) * per] for c in range(spec.l)]


def streams_to_flat(streams, spec: CompoundSpec) -> np.ndarray:
    serial = np.concatenate(streams, axis=-1)
    return serial[..., spec.assignment]


def compound_encode(u: np.ndarray, spec: CompoundSpec) -> list[np.ndarray]:
    """Encode and split into l per-sub-channel streams of length N/l."""
    return flat_to_streams(compound_transform(u, spec), spec)


def spec_to_text(spec: CompoundSpec) -> str:
    lines = [f"l {spec.l}", f"n {spec.n}"]
    for row in spec.g0:
        lines.append("g0 " + "".join(str(int(b)) for b in row))
    lines.append("frozen " + " ".join(str(int(i)) for i in spec.frozen))
    lines.append("assignment " + " ".join(str(int(i)) for i in spec.assignment))
    return "\n".join(lines) + "\n"


def spec_from_text(text: str) -> CompoundSpec:
    l = n = None
    g0_rows: list[list[int]] = []
    frozen: list[int] = []
    assignment = None
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        key, rest = parts[0], parts[1:]
        if key == "l":
            l = int(rest[0])
        elif key == "n":
            n = int(rest[0])
        elif key == "g0":
            g0_rows.append([int(c) for c in rest[0]])
        elif key == "frozen":
            frozen = [int(v) for v in rest]
        elif key == "assignment":
            assignment = np.array([int(v) for v in rest], dtype=np.int64)
        else:
            raise ValueError(f"unknown key {key!r} in spec file")
    if l is None or n is None or not g0_rows:
        raise ValueError("spec file missing l, n, or g0")
    return CompoundSpec(
        l=l, g0=np.array(g0_rows, dtype=np.uint8), n=n,
        frozen=np.array(frozen, dtype=np.int64),
        assignment=assignment if assignment is not None
        else default_assignment(l * (1 << n), l),
    )
