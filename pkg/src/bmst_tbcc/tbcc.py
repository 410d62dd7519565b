"""Rate-1/2 feedforward tail-biting convolutional codes.

Generator strings list tap coefficients from D^0 (leftmost) upwards, so
``"10111"`` is 1 + D^2 + D^3 + D^4.  Each time step emits the generator-1 bit
then the generator-2 bit.

Trellis states pack the register contents with the most recent input in
bit 0: at time t the state is sum_j u[t-j] << (j-1) for j = 1..m.  A
tail-biting codeword starts (and ends) in the state formed by the last m
information bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gf2 import as_bits

DEFAULT_GENERATORS = ("10111", "11001")
MAX_ENUMERATION_K = 20


class EnumerationTooLarge(ValueError):
    pass


def parse_generators(spec: str | Sequence) -> tuple[tuple[int, ...], ...]:
    """Accept ``"10111,11001"`` or a sequence of strings / bit lists."""
    if isinstance(spec, str):
        spec = [s for s in spec.replace(" ", "").split(",") if s]
    gens = []
    for g in spec:
        if isinstance(g, str):
            if not g or set(g) - {"0", "1"}:
                raise ValueError(f"bad generator {g!r}")
            g = [int(c) for c in g]
        gens.append(tuple(int(b) for b in g))
    if len(gens) != 2:
        raise ValueError(f"need exactly two generators, got {len(gens)}")
    return tuple(gens)


@dataclass(frozen=True)
class TbccCode:
    generators: tuple[tuple[int, ...], ...]
    k: int
    memory: int | None = None

    def __post_init__(self):
        gens = parse_generators(self.generators)
        object.__setattr__(self, "generators", gens)
        lengths = {len(g) for g in gens}
        if len(lengths) != 1:
            raise ValueError(f"generator degree mismatch: lengths {sorted(lengths)}")
        m = lengths.pop() - 1
        if self.memory is not None and self.memory != m:
            raise ValueError(f"generators have degree {m}, memory={self.memory} given")
        if m < 1:
            raise ValueError("memory must be at least 1")
        if not all(any(g) for g in gens):
            raise ValueError("all-zero generator")
        object.__setattr__(self, "memory", m)
        if self.k < m:
            raise ValueError(f"k={self.k} < m={m}: tail-biting start state undefined")

    @property
    def m(self) -> int:
        return self.memory

    @property
    def n(self) -> int:
        return 2 * self.k

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def num_states(self) -> int:
        return 1 << self.memory


@dataclass(frozen=True, eq=False)
class Trellis:
    """Time-invariant trellis section, repeated ``num_stages`` times."""

    code: TbccCode
    next_state: np.ndarray  # (S, 2)
    out_bits: np.ndarray  # (S, 2, 2): state, input -> (g1 bit, g2 bit)
    out_label: np.ndarray = field(init=False)  # (S, 2) in 0..3 = 2*g1bit + g2bit

    def __post_init__(self):
        lab = (2 * self.out_bits[..., 0] + self.out_bits[..., 1]).astype(np.int64)
        object.__setattr__(self, "out_label", lab)
        for a in (self.next_state, self.out_bits, self.out_label):
            a.setflags(write=False)

    @property
    def num_states(self) -> int:
        return self.next_state.shape[0]

    @property
    def num_stages(self) -> int:
        return self.code.k

    @property
    def edges_per_stage(self) -> int:
        return 2 * self.num_states

    def predecessors(self, state: int) -> tuple[int, int]:
        hi = 1 << (self.code.m - 1)
        p = state >> 1
        return p, p | hi


def build_trellis(code: TbccCode) -> Trellis:
    m, S = code.m, code.num_states
    g = np.array(code.generators, dtype=np.int64)  # (2, m+1)
    nxt = np.zeros((S, 2), dtype=np.int64)
    out = np.zeros((S, 2, 2), dtype=np.uint8)
    for s in range(S):
        hist = [(s >> (j - 1)) & 1 for j in range(1, m + 1)]
        for b in (0, 1):
            reg = np.array([b] + hist, dtype=np.int64)
            out[s, b] = (g @ reg) & 1
            nxt[s, b] = ((s << 1) | b) & (S - 1)
    return Trellis(code, nxt, out)


def initial_state(code: TbccCode, u) -> int:
    """Tail-biting start state: the last m information bits."""
    u = as_bits(u, code.k)
    return sum(int(u[code.k - j]) << (j - 1) for j in range(1, code.m + 1))


def encode_path(code: TbccCode, u, trellis: Trellis | None = None):
    """Encode and also return the visited state sequence (length k+1)."""
    trellis = trellis or build_trellis(code)
    u = as_bits(u, code.k)
    state = initial_state(code, u)
    states = [state]
    v = np.empty(code.n, dtype=np.uint8)
    for t, b in enumerate(u):
        v[2 * t : 2 * t + 2] = trellis.out_bits[state, b]
        state = int(trellis.next_state[state, b])
        states.append(state)
    return v, states


def encode(code: TbccCode, u, trellis: Trellis | None = None) -> np.ndarray:
    return encode_path(code, u, trellis)[0]


def generator_matrix(code: TbccCode) -> np.ndarray:
    """k x n binary matrix whose row i is the codeword of the i-th unit vector."""
    tr = build_trellis(code)
    eye = np.eye(code.k, dtype=np.uint8)
    return np.stack([encode(code, e, tr) for e in eye])


def _check_enumerable(code: TbccCode):
    if code.k > MAX_ENUMERATION_K:
        raise EnumerationTooLarge(
            f"enumeration too large: k={code.k} > {MAX_ENUMERATION_K}"
        )


def all_info_words(k: int) -> np.ndarray:
    """All 2^k words in lexicographic order (row i is i written MSB first)."""
    idx = np.arange(1 << k, dtype=np.int64)
    shifts = np.arange(k - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8)


def codebook(code: TbccCode) -> tuple[np.ndarray, np.ndarray]:
    """(info words, codewords), both with 2^k rows in lexicographic info order."""
    _check_enumerable(code)
    U = all_info_words(code.k)
    G = generator_matrix(code).astype(np.int64)
    return U, ((U.astype(np.int64) @ G) & 1).astype(np.uint8)


def weight_enumerator(code: TbccCode) -> np.ndarray:
    """A_d for d = 0..n counting non-zero codewords; A_0 = 0."""
    _, C = codebook(code)
    w = C.sum(axis=1, dtype=np.int64)
    A = np.bincount(w, minlength=code.n + 1).astype(np.int64)
    A[0] -= 1  # the all-zero codeword
    return A


def minimum_distance(code: TbccCode) -> int:
    _, C = codebook(code)
    w = C.sum(axis=1)
    return int(w[1:].min())

