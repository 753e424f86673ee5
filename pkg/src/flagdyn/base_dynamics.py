"""Base dynamical systems: periodic orbits, shifts, subshifts of finite type, circle rotations.

Points of the two-sided shift are never stored as sequences.  A
:class:`ShiftPoint` names a random stream (or a periodic word) plus an
offset, and symbols are generated on demand in blocks keyed by
``(system seed, stream key, block index)``.  Reading a window therefore gives
the same symbols however the window was extended, and backward iteration is
just a negative offset.
"""
from __future__ import annotations

import functools
import threading
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import CapacityError, InvalidArgument

BLOCK = 1024
MAX_ENUMERATION = 10**6


# --------------------------------------------------------------------------- systems


@dataclass(frozen=True)
class PeriodicOrbit:
    period: int
    seed: int = 0

    def __post_init__(self):
        if int(self.period) < 1:
            raise InvalidArgument("period must be >= 1")


@dataclass(frozen=True)
class FullShift:
    weights: tuple
    seed: int = 0

    def __post_init__(self):
        w = tuple(float(p) for p in self.weights)
        if not w or any(p <= 0 for p in w):
            raise InvalidArgument("shift weights must be strictly positive")
        if abs(sum(w) - 1) > 1e-12:
            raise InvalidArgument(f"shift weights sum to {sum(w)!r}, not 1")
        object.__setattr__(self, "weights", w)

    @property
    def m(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class SubshiftFinite:
    """Markov shift on the admissible sequences of a 0/1 transition matrix.

    The measure is the stationary Markov chain that moves uniformly to the
    allowed successors.
    """

    transition: tuple
    seed: int = 0

    def __post_init__(self):
        t = np.asarray(self.transition, dtype=int)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise InvalidArgument("transition matrix must be square")
        if not np.isin(t, (0, 1)).all():
            raise InvalidArgument("transition matrix must be 0/1")
        if (t.sum(axis=1) == 0).any() or (t.sum(axis=0) == 0).any():
            raise InvalidArgument("transition matrix has dead states")
        object.__setattr__(self, "transition", tuple(tuple(int(v) for v in row) for row in t))

    @property
    def m(self) -> int:
        return len(self.transition)

    @functools.cached_property
    def chain(self):
        t = np.asarray(self.transition, dtype=float)
        p = t / t.sum(axis=1, keepdims=True)
        vals, vecs = np.linalg.eig(p.T)
        pi = np.real(vecs[:, np.argmin(np.abs(vals - 1))])
        pi = pi / pi.sum()
        rev = (p * pi[:, None]).T / pi[:, None]
        return p, pi, rev


@dataclass(frozen=True)
class IrrationalRotation:
    angle: float
    seed: int = 0


BaseSystem = Union[PeriodicOrbit, FullShift, SubshiftFinite, IrrationalRotation]


def is_symbolic(s) -> bool:
    return isinstance(s, (FullShift, SubshiftFinite))


def alphabet_size(s) -> int:
    if isinstance(s, PeriodicOrbit):
        return s.period
    if is_symbolic(s):
        return s.m
    raise InvalidArgument("rotation bases have no alphabet")


# --------------------------------------------------------------------------- points


@dataclass(frozen=True)
class ShiftPoint:
    """A point of the two-sided shift.

    ``word`` set: the periodic sequence ``word[k mod len(word)]``.  Otherwise
    the symbols come from random stream ``key``.  ``patch = (start, symbols)``
    overwrites absolute positions ``start .. start+len-1``.  The point's
    coordinate 0 is absolute position ``offset``.
    """

    key: int = 0
    offset: int = 0
    word: tuple = None
    patch: tuple = ()

    def shifted(self, k: int) -> "ShiftPoint":
        return ShiftPoint(self.key, self.offset + k, self.word, self.patch)


BasePoint = Union[int, float, ShiftPoint]


def periodic_point(word) -> ShiftPoint:
    return ShiftPoint(word=tuple(int(a) for a in word))


def point_near_periodic(word, radius: int, key: int) -> ShiftPoint:
    """Random point agreeing with the periodic sequence of ``word`` on ``[-radius, radius]``."""
    word = tuple(int(a) for a in word)
    pos = np.arange(-radius, radius + 1)
    syms = tuple(word[k % len(word)] for k in pos)
    return ShiftPoint(key=key, patch=(-radius, syms))


# --------------------------------------------------------------------------- symbol streams


def _zigzag(b: int) -> int:
    return 2 * b if b >= 0 else -2 * b - 1


@functools.lru_cache(maxsize=4096)
def _iid_block(seed: int, key: int, b: int, weights: tuple) -> np.ndarray:
    rng = np.random.default_rng([seed, key, _zigzag(b)])
    out = rng.choice(len(weights), size=BLOCK, p=np.asarray(weights))
    out.setflags(write=False)
    return out


class _MarkovStreams:
    """Sequentially generated Markov blocks, cached per stream."""

    def __init__(self):
        self._cache = {}
        self._lock = threading.Lock()

    def block(self, s: SubshiftFinite, key: int, b: int) -> np.ndarray:
        ck = (s, key)
        with self._lock:
            blocks = self._cache.setdefault(ck, {})
            if b in blocks:
                return blocks[b]
            p, pi, rev = s.chain
            if 0 not in blocks:
                rng = np.random.default_rng([s.seed, key, _zigzag(0), 1])
                blocks[0] = self._run(rng, int(rng.choice(s.m, p=pi)), p, include_start=True)
            step = 1 if b > 0 else -1
            k = 0
            while k != b:
                nxt = k + step
                if nxt not in blocks:
                    rng = np.random.default_rng([s.seed, key, _zigzag(nxt), 1])
                    if step > 0:
                        blocks[nxt] = self._run(rng, int(blocks[k][-1]), p)
                    else:
                        blocks[nxt] = self._run(rng, int(blocks[k][0]), rev)[::-1].copy()
                k = nxt
            return blocks[b]

    @staticmethod
    def _run(rng, start, p, include_start=False):
        cum = np.cumsum(p, axis=1)
        u = rng.random(BLOCK)
        out = np.empty(BLOCK, dtype=int)
        cur = start
        for i in range(BLOCK):
            if include_start and i == 0:
                out[0] = cur
                continue
            cur = int(np.searchsorted(cum[cur], u[i], side="right"))
            cur = min(cur, len(p) - 1)
            out[i] = cur
        out.setflags(write=False)
        return out


_MARKOV = _MarkovStreams()


def symbols(s, x: ShiftPoint, start: int, n: int) -> np.ndarray:
    """Symbols of ``x`` at coordinates ``start .. start+n-1``."""
    lo = x.offset + start
    if x.word is not None:
        w = np.asarray(x.word)
        out = w[np.arange(lo, lo + n) % len(w)]
    else:
        b0, b1 = lo // BLOCK, (lo + n - 1) // BLOCK
        if isinstance(s, FullShift):
            parts = [_iid_block(s.seed, x.key, b, s.weights) for b in range(b0, b1 + 1)]
        elif isinstance(s, SubshiftFinite):
            parts = [_MARKOV.block(s, x.key, b) for b in range(b0, b1 + 1)]
        else:
            raise InvalidArgument(f"{type(s).__name__} has no symbols")
        cat = np.concatenate(parts) if len(parts) > 1 else parts[0]
        out = cat[lo - b0 * BLOCK : lo - b0 * BLOCK + n]
    if x.patch:
        p0, syms = x.patch
        idx = np.arange(lo, lo + n)
        inside = (idx >= p0) & (idx < p0 + len(syms))
        if inside.any():
            out = np.array(out)
            out[inside] = np.asarray(syms)[idx[inside] - p0]
    return np.asarray(out, dtype=int)


def states(s, x, start: int, n: int) -> np.ndarray:
    """Discrete state labels along the orbit: symbols at 0 for shifts, indices for periodic orbits."""
    if isinstance(s, PeriodicOrbit):
        return (int(x) + start + np.arange(n)) % s.period
    return symbols(s, x, start, n)


def circle_orbit(s: IrrationalRotation, x: float, start: int, n: int) -> np.ndarray:
    k = start + np.arange(n)
    return np.mod(x + k * s.angle, 1.0)


# --------------------------------------------------------------------------- dynamics


def step(s, x, k: int = 1):
    if isinstance(s, PeriodicOrbit):
        return (int(x) + k) % s.period
    if isinstance(s, IrrationalRotation):
        return float(np.mod(x + k * s.angle, 1.0))
    if is_symbolic(s):
        return x.shifted(k)
    raise InvalidArgument(f"unknown base system {s!r}")


def step_inv(s, x, k: int = 1):
    return step(s, x, -k)


# --------------------------------------------------------------------------- measures


@dataclass(frozen=True)
class PeriodicOrbitMeasure:
    word: tuple

    def __post_init__(self):
        if not self.word:
            raise InvalidArgument("periodic word must be nonempty")
        object.__setattr__(self, "word", tuple(int(a) for a in self.word))

    @property
    def period(self) -> int:
        return len(self.word)


@dataclass(frozen=True)
class ProductMeasure:
    pass


@dataclass(frozen=True)
class MarkovMeasure:
    pass


@dataclass(frozen=True)
class LebesgueCircle:
    pass


ErgodicMeasureDescriptor = Union[PeriodicOrbitMeasure, ProductMeasure, MarkovMeasure, LebesgueCircle]


def natural_measure(s):
    """The reference measure with full support."""
    if isinstance(s, PeriodicOrbit):
        return PeriodicOrbitMeasure(tuple(range(s.period)))
    if isinstance(s, FullShift):
        return ProductMeasure()
    if isinstance(s, SubshiftFinite):
        return MarkovMeasure()
    return LebesgueCircle()


def admissible_cycle(s, word) -> bool:
    word = tuple(word)
    if not word or not all(0 <= a < alphabet_size(s) for a in word):
        return False
    if isinstance(s, SubshiftFinite):
        t = s.transition
        return all(t[a][b] for a, b in zip(word, word[1:] + word[:1]))
    return True


def _lyndon_words(m: int, n: int):
    """Duval's generation of Lyndon words of length <= n over range(m)."""
    w = [-1]
    while w:
        w[-1] += 1
        yield tuple(w)
        k = len(w)
        while len(w) < n:
            w.append(w[len(w) - k])
        while w and w[-1] == m - 1:
            w.pop()


def enumerate_periodic_orbits(s, max_period: int) -> list:
    if max_period < 1:
        raise InvalidArgument("max_period must be >= 1")
    if isinstance(s, IrrationalRotation):
        return []
    if isinstance(s, PeriodicOrbit):
        return [PeriodicOrbitMeasure(tuple(range(s.period)))]
    if s.m**max_period > MAX_ENUMERATION:
        raise CapacityError(f"{s.m}^{max_period} words exceeds the enumeration guard")
    out = [PeriodicOrbitMeasure(w) for w in _lyndon_words(s.m, max_period) if admissible_cycle(s, w)]
    out.sort(key=lambda mu: (mu.period, mu.word))
    return out


def sample_keys(seed: int, n: int) -> np.ndarray:
    return np.random.SeedSequence([seed, 0x5A]).generate_state(n, dtype=np.uint32).astype(np.int64)


def sample(s, mu, n: int, seed: int | None = None) -> list:
    """``n`` i.i.d. draws from ``mu``, deterministic given the seed."""
    if n < 1:
        raise InvalidArgument("sample size must be >= 1")
    seed = s.seed if seed is None else seed
    rng = np.random.default_rng([seed, 0xB5])
    if isinstance(mu, PeriodicOrbitMeasure):
        if isinstance(s, PeriodicOrbit):
            return [int(v) for v in rng.integers(s.period, size=n)]
        if is_symbolic(s):
            if not admissible_cycle(s, mu.word):
                raise InvalidArgument(f"word {mu.word} is not an admissible cycle")
            base = periodic_point(mu.word)
            return [base.shifted(int(k)) for k in rng.integers(mu.period, size=n)]
        raise InvalidArgument("rotation bases carry no periodic measures")
    if isinstance(mu, LebesgueCircle):
        if not isinstance(s, IrrationalRotation):
            raise InvalidArgument("Lebesgue measure requires a rotation base")
        return [float(v) for v in rng.random(n)]
    if isinstance(mu, (ProductMeasure, MarkovMeasure)):
        if not is_symbolic(s):
            raise InvalidArgument("product/Markov measures require a shift base")
        return [ShiftPoint(key=int(k)) for k in sample_keys(seed, n)]
    raise InvalidArgument(f"unknown measure {mu!r}")
