"""Weyl chamber, simple roots and parabolic subsets for sl(d) / gl(d).

Everything here is type-A combinatorics: the Cartan subalgebra is the space
of diagonal matrices, identified with R^d, the Weyl group is the symmetric
group acting by permuting coordinates, and a subset of simple roots is the
same thing as a partition of {0, ..., d-1} into consecutive blocks.

Root and weight indices are 1-based (alpha_1 .. alpha_{d-1}) to match the
usual labelling; vector entries are 0-based like any numpy array.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, InvalidArgument

MAX_WEYL_DIM = 8


def _fmt(x: float, digits: int = 12) -> str:
    return f"{x:.{digits}g}"


@dataclass(frozen=True)
class ChamberVector:
    """A point of the closed positive chamber: entries sorted non-increasing."""

    entries: tuple
    variant: str = "gl"

    def __post_init__(self):
        e = tuple(float(v) for v in self.entries)
        object.__setattr__(self, "entries", e)
        if self.variant not in ("sl", "gl"):
            raise InvalidArgument(f"unknown variant {self.variant!r}")
        if not all(math.isfinite(v) for v in e):
            raise InvalidArgument("chamber vector must be finite")
        if any(e[i] < e[i + 1] for i in range(len(e) - 1)):
            raise InvalidArgument(f"entries not sorted non-increasing: {e}")
        if self.variant == "sl":
            scale = max(1.0, max((abs(v) for v in e), default=0.0))
            if abs(sum(e)) > 1e-12 * scale * len(e):
                raise InvalidArgument(f"sl chamber vector has trace {sum(e)!r}")

    @property
    def d(self) -> int:
        return len(self.entries)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __str__(self):
        return "[" + ", ".join(_fmt(v) for v in self.entries) + "]"


@dataclass(frozen=True)
class WeylElement:
    """A permutation of coordinates.

    ``w.act(v)`` moves entry ``i`` of ``v`` to position ``perm[i]``, so that
    ``w.inverse_act(v) == v[perm]``.  With that convention an exponent vector
    ``lam`` with ``lam[i] == H[perm[i]]`` is exactly ``w^{-1} H``.
    """

    perm: tuple

    def __post_init__(self):
        p = tuple(int(i) for i in self.perm)
        if sorted(p) != list(range(len(p))):
            raise InvalidArgument(f"not a permutation: {p}")
        object.__setattr__(self, "perm", p)

    @classmethod
    def identity(cls, d: int) -> "WeylElement":
        return cls(tuple(range(d)))

    @classmethod
    def longest(cls, d: int) -> "WeylElement":
        return cls(tuple(range(d - 1, -1, -1)))

    @property
    def d(self) -> int:
        return len(self.perm)

    def __mul__(self, other: "WeylElement") -> "WeylElement":
        return WeylElement(tuple(self.perm[j] for j in other.perm))

    def inverse(self) -> "WeylElement":
        inv = [0] * self.d
        for i, j in enumerate(self.perm):
            inv[j] = i
        return WeylElement(tuple(inv))

    def act(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        out = np.empty_like(v)
        out[list(self.perm)] = v
        return out

    def inverse_act(self, v) -> np.ndarray:
        return np.asarray(v, dtype=float)[list(self.perm)]

    def is_identity(self) -> bool:
        return self.perm == tuple(range(self.d))

    def __str__(self):
        return "(" + " ".join(str(i + 1) for i in self.perm) + ")"


@dataclass(frozen=True)
class ThetaSet:
    """Subset of simple roots; ``included[i]`` is True iff alpha_{i+1} is in the set."""

    included: tuple

    def __post_init__(self):
        object.__setattr__(self, "included", tuple(bool(b) for b in self.included))

    @classmethod
    def from_blocks(cls, sizes: Sequence[int]) -> "ThetaSet":
        sizes = [int(s) for s in sizes]
        if not sizes or any(s < 1 for s in sizes):
            raise InvalidArgument(f"block sizes must be positive: {sizes}")
        inc = []
        for k, s in enumerate(sizes):
            inc.extend([True] * (s - 1))
            if k < len(sizes) - 1:
                inc.append(False)
        return cls(tuple(inc))

    @classmethod
    def from_dims(cls, dims: Sequence[int], d: int) -> "ThetaSet":
        """Flag type whose subspace dimensions are ``dims`` (strictly increasing, < d)."""
        dims = [int(x) for x in dims]
        if any(b <= a for a, b in zip(dims, dims[1:])) or (dims and (dims[0] < 1 or dims[-1] >= d)):
            raise InvalidArgument(f"invalid dimension tuple {dims} for d={d}")
        edges = [0, *dims, d]
        return cls.from_blocks([b - a for a, b in zip(edges, edges[1:])])

    @classmethod
    def empty(cls, d: int) -> "ThetaSet":
        return cls((False,) * (d - 1))

    @classmethod
    def full(cls, d: int) -> "ThetaSet":
        return cls((True,) * (d - 1))

    @property
    def d(self) -> int:
        return len(self.included) + 1

    @property
    def blocks(self) -> tuple:
        sizes, run = [], 1
        for inc in self.included:
            if inc:
                run += 1
            else:
                sizes.append(run)
                run = 1
        sizes.append(run)
        return tuple(sizes)

    @property
    def intervals(self) -> tuple:
        """Blocks as half-open index ranges ``(start, stop)``."""
        out, start = [], 0
        for s in self.blocks:
            out.append((start, start + s))
            start += s
        return tuple(out)

    @property
    def dims(self) -> tuple:
        """Dimensions of the subspaces of a flag of this type."""
        return tuple(int(x) for x in np.cumsum(self.blocks)[:-1])

    def block_index(self) -> np.ndarray:
        """Block label of every coordinate."""
        lab = np.empty(self.d, dtype=int)
        for k, (a, b) in enumerate(self.intervals):
            lab[a:b] = k
        return lab

    def is_empty(self) -> bool:
        return not any(self.included)

    def is_full(self) -> bool:
        return all(self.included)

    def roots(self) -> tuple:
        """1-based indices of the simple roots in the set."""
        return tuple(i + 1 for i, b in enumerate(self.included) if b)

    def __str__(self):
        return "blocks=[" + ",".join(str(s) for s in self.blocks) + "]"


def chamber_project(v, variant: str = "gl") -> ChamberVector:
    v = np.asarray(v, dtype=float).ravel()
    if not np.all(np.isfinite(v)):
        raise InvalidArgument("chamber_project: non-finite input")
    return ChamberVector(tuple(np.sort(v)[::-1]), variant)


def simple_root_eval(i: int, H) -> float:
    H = np.asarray(H, dtype=float)
    if not 1 <= i <= len(H) - 1:
        raise InvalidArgument(f"simple root index {i} out of range for d={len(H)}")
    return float(H[i - 1] - H[i])


def fundamental_weight_eval(j: int, H) -> float:
    """delta_j(H) = H_1 + ... + H_j; j = d is allowed and returns the trace."""
    H = np.asarray(H, dtype=float)
    if not 1 <= j <= len(H):
        raise InvalidArgument(f"fundamental weight index {j} out of range for d={len(H)}")
    return float(np.sum(H[:j]))


def theta_of(H, tol: float) -> ThetaSet:
    if not tol > 0:
        raise InvalidArgument("theta_of: tol must be positive")
    H = np.asarray(H, dtype=float)
    return ThetaSet(tuple(H[i] - H[i + 1] <= tol for i in range(len(H) - 1)))


def dual_theta(theta: ThetaSet) -> ThetaSet:
    return ThetaSet(theta.included[::-1])


def refines(theta1: ThetaSet, theta2: ThetaSet) -> bool:
    """True iff theta1 is contained in theta2 (every block of theta1 sits inside a block of theta2)."""
    if theta1.d != theta2.d:
        raise InvalidArgument(f"dimension mismatch: {theta1.d} vs {theta2.d}")
    return all(b for a, b in zip(theta1.included, theta2.included) if a)


def weyl_subgroup(theta: ThetaSet) -> list:
    if theta.d > MAX_WEYL_DIM:
        raise CapacityError(f"weyl_subgroup: d={theta.d} exceeds {MAX_WEYL_DIM}")
    per_block = [list(itertools.permutations(range(a, b))) for a, b in theta.intervals]
    out = []
    for choice in itertools.product(*per_block):
        perm = [i for part in choice for i in part]
        out.append(WeylElement(tuple(perm)))
    return out


def weyl_group(d: int) -> list:
    return weyl_subgroup(ThetaSet.full(d))


def coset_representatives(H, theta: ThetaSet) -> list:
    """Distinct vectors ``w^{-1} H`` with one representative ``w`` each.

    ``H`` is constant on the blocks of ``theta``, so W/W_theta is enumerated by
    distinct rearrangements of the block labels.
    """
    H = np.asarray(H, dtype=float)
    if theta.d > MAX_WEYL_DIM:
        raise CapacityError(f"coset enumeration: d={theta.d} exceeds {MAX_WEYL_DIM}")
    labels = theta.block_index()
    seen, out = set(), []
    for w in weyl_group(theta.d):
        key = tuple(labels[list(w.perm)])
        if key in seen:
            continue
        seen.add(key)
        out.append((w, w.inverse_act(H)))
    return out


def trace_free(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v - v.mean(axis=-1, keepdims=True)


def format_vector(v: Iterable[float], digits: int = 12) -> str:
    return "[" + ", ".join(_fmt(float(x), digits) for x in v) + "]"
