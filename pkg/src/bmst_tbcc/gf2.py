"""GF(2) vectors and the seeded random square transform used by BMST.

Binary vectors are plain ``numpy.uint8`` arrays holding 0/1.  The transform
``R`` is never shipped: both ends rebuild it from ``(n, seed)``.

Generator identity (part of the wire format): the entries of ``R`` are the
bits of the raw 64-bit output stream of numpy's Philox-4x64 counter-based
generator keyed with ``seed``.  Word ``w`` supplies entries
``64*w .. 64*w+63`` in row-major order, least significant bit first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PRNG_NAME = "philox4x64-raw"


def as_bits(v, length: int | None = None) -> np.ndarray:
    """Coerce ``v`` to a 1-D uint8 0/1 array, optionally checking its length."""
    a = np.asarray(v)
    if a.ndim != 1:
        raise ValueError(f"expected a 1-D bit vector, got shape {a.shape}")
    if a.size and not np.all((a == 0) | (a == 1)):
        raise ValueError("bit vector entries must be 0 or 1")
    a = a.astype(np.uint8, copy=False)
    if length is not None and a.size != length:
        raise ValueError(f"expected {length} bits, got {a.size}")
    return a


def bits_to_str(v) -> str:
    """Serialize a bit vector as '0'/'1' characters, index 0 leftmost."""
    return "".join("1" if b else "0" for b in as_bits(v))


def str_to_bits(s: str) -> np.ndarray:
    s = s.strip()
    if not s or set(s) - {"0", "1"}:
        raise ValueError(f"not a binary string: {s!r}")
    return np.frombuffer(s.encode("ascii"), dtype=np.uint8) - ord("0")


@dataclass(frozen=True, eq=False)
class BinaryMatrix:
    """Square GF(2) matrix tagged with the seed it was generated from."""

    entries: np.ndarray
    seed: int | None = None
    # int64 copy for fast products; uint8 matmul would overflow its accumulator
    _wide: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.uint8)
        if e.ndim != 2 or e.shape[0] != e.shape[1] or e.shape[0] == 0:
            raise ValueError(f"expected a non-empty square matrix, got {e.shape}")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "_wide", e.astype(np.int64))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __eq__(self, other):
        return isinstance(other, BinaryMatrix) and np.array_equal(self.entries, other.entries)

    __hash__ = None

    @classmethod
    def identity(cls, n: int) -> "BinaryMatrix":
        return cls(np.eye(n, dtype=np.uint8))


def random_matrix(n: int, seed: int) -> BinaryMatrix:
    """n x n matrix of i.i.d. fair bits, reproducible from ``seed``."""
    if n < 1:
        raise ValueError(f"invalid dimension n={n}")
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    nwords = -(-n * n // 64)
    words = np.random.Philox(key=seed).random_raw(nwords).astype("<u8")
    bits = np.unpackbits(words.view(np.uint8), bitorder="little")
    return BinaryMatrix(bits[: n * n].reshape(n, n), seed=seed)


def vec_mat_mul(v, m: BinaryMatrix) -> np.ndarray:
    """Row vector times matrix over GF(2)."""
    v = as_bits(v)
    if v.size != m.n:
        raise ValueError(f"dimension mismatch: vector {v.size}, matrix {m.n}")
    return ((v.astype(np.int64) @ m._wide) & 1).astype(np.uint8)


def vec_add(a, b) -> np.ndarray:
    a, b = as_bits(a), as_bits(b)
    if a.size != b.size:
        raise ValueError(f"dimension mismatch: {a.size} vs {b.size}")
    return a ^ b
