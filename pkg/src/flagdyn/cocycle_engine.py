"""Linear cocycles over base systems and their additive and polar cocycles.

A :class:`CocycleSystem` pairs a base with a *matrix field*: an object whose
``along(base, x, start, n)`` returns the stack of generator matrices at
coordinates ``start .. start+n-1`` of the orbit of ``x``.  Everything else
(products, QR sweeps, flag pushes) works on such stacks, so sampling many
base points turns into batched linear algebra.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import base_dynamics as bd
from ._linalg import qr_positive
from .errors import InvalidArgument
from .flags import Flag, act
from .lie_structure import ChamberVector, chamber_project, trace_free
from .matrix_decomp import as_group_element

RENORM_HI = 1e100
RENORM_LO = 1e-100
SWEEP_TOL = 1e-13
MAX_SWEEPS = 64


# --------------------------------------------------------------------------- matrix fields


@dataclass(frozen=True, eq=False)
class SymbolTable:
    """One matrix per symbol (shifts) or per state (periodic orbits), read at coordinate 0."""

    matrices: np.ndarray

    def __post_init__(self):
        m = np.array([as_group_element(a) for a in self.matrices])
        m.setflags(write=False)
        object.__setattr__(self, "matrices", m)

    @property
    def d(self) -> int:
        return self.matrices.shape[1]

    def along(self, base, x, start, n):
        return self.matrices[bd.states(base, x, start, n)]


@dataclass(frozen=True, eq=False)
class ConstantField:
    matrix: np.ndarray

    def __post_init__(self):
        m = as_group_element(self.matrix).copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    def along(self, base, x, start, n):
        return np.broadcast_to(self.matrix, (n, self.d, self.d))


@dataclass(frozen=True, eq=False)
class CircleMap:
    """Generator given by a function of the circle coordinate."""

    fn: Callable
    d: int
    lipschitz: float = float("nan")

    def along(self, base, x, start, n):
        pts = bd.circle_orbit(base, x, start, n)
        return np.array([np.asarray(self.fn(float(t)), dtype=float) for t in pts]).reshape(n, self.d, self.d)


@dataclass(frozen=True, eq=False)
class WindowMap:
    """Generator depending on the symbols at coordinates ``lo .. hi`` (inclusive)."""

    fn: Callable
    lo: int
    hi: int
    d: int

    def along(self, base, x, start, n):
        w = self.hi - self.lo + 1
        syms = bd.symbols(base, x, start + self.lo, n + w - 1)
        cache, out = {}, np.empty((n, self.d, self.d))
        for k in range(n):
            key = tuple(syms[k : k + w])
            if key not in cache:
                cache[key] = np.asarray(self.fn(key), dtype=float)
            out[k] = cache[key]
        return out


@dataclass(frozen=True, eq=False)
class Gauged:
    """A_sigma(x) = sigma(step x) A(x)."""

    inner: object
    sigma: object

    @property
    def d(self) -> int:
        return self.inner.d

    def along(self, base, x, start, n):
        return self.sigma.along(base, x, start + 1, n) @ self.inner.along(base, x, start, n)


@dataclass(frozen=True, eq=False)
class ReversedField:
    """Generator of the time-reversed cocycle: B(x) = A(step_inv x)^{-1}."""

    inner: object

    @property
    def d(self) -> int:
        return self.inner.d

    def along(self, base, x, start, n):
        mats = self.inner.along(base, x, -start - n, n)
        return np.linalg.inv(mats[::-1])


# --------------------------------------------------------------------------- systems


@dataclass(frozen=True, eq=False)
class CocycleSystem:
    base: object
    field: object
    variant: str = "gl"
    direction: int = 1
    name: str = ""

    def __post_init__(self):
        if self.variant not in ("gl", "sl"):
            raise InvalidArgument(f"unknown variant {self.variant!r}")
        if self.direction not in (1, -1):
            raise InvalidArgument("direction must be +1 or -1")
        if self.variant == "sl" and isinstance(self.field, (SymbolTable, ConstantField)):
            mats = self.field.matrices if isinstance(self.field, SymbolTable) else [self.field.matrix]
            dets = np.abs(np.linalg.det(np.asarray(mats)))
            if np.any(np.abs(np.log(dets)) > 1e-9):
                raise InvalidArgument("sl variant requires |det| = 1 generators")

    @property
    def d(self) -> int:
        return self.field.d

    def advance(self, x, k: int = 1):
        return bd.step(self.base, x, k * self.direction)

    def matrices(self, x, start: int, n: int) -> np.ndarray:
        if n < 0:
            raise InvalidArgument("matrix window length must be >= 0")
        if n == 0:
            return np.zeros((0, self.d, self.d))
        return np.asarray(self.field.along(self.base, x, start, n), dtype=float)

    def generator(self, x) -> np.ndarray:
        return self.matrices(x, 0, 1)[0]


def time_reversed(c: CocycleSystem) -> CocycleSystem:
    field_ = c.field.inner if isinstance(c.field, ReversedField) else ReversedField(c.field)
    return CocycleSystem(c.base, field_, c.variant, -c.direction, c.name)


def gauge_perturb(c: CocycleSystem, sigma) -> CocycleSystem:
    """Compose with a gauge field ``sigma`` (a matrix field over the same base)."""
    return CocycleSystem(c.base, Gauged(c.field, sigma), c.variant, c.direction, c.name)


@dataclass(frozen=True, eq=False)
class FlagBundlePoint:
    x: object
    b: Flag


# --------------------------------------------------------------------------- products


def _chain(mats: np.ndarray):
    """Ordered product mats[-1] ... mats[0] with scalar renormalization."""
    d = mats.shape[-1]
    p, log_scale = np.eye(d), 0.0
    for a in mats:
        p = a @ p
        big = np.max(np.abs(p))
        if big > RENORM_HI or big < RENORM_LO:
            p = p / big
            log_scale += float(np.log(big))
    return p, log_scale


def cocycle_product(c: CocycleSystem, n: int, x) -> tuple:
    """The cocycle over ``n`` steps as ``(matrix, log_scale)``; the value is ``exp(log_scale) * matrix``."""
    if n >= 0:
        return _chain(c.matrices(x, 0, n))
    inv = np.linalg.inv(c.matrices(x, n, -n))
    return _chain(inv[::-1])


def product_value(c: CocycleSystem, n: int, x) -> np.ndarray:
    p, s = cocycle_product(c, n, x)
    return p * np.exp(s)


def qr_run(mats: np.ndarray, q0: np.ndarray):
    """Discrete QR along ``mats`` (shape ``(..., n, d, d)``) from frames ``q0``.

    Returns the summed log-diagonals, final frames and the per-step
    log-diagonals.
    """
    q = np.array(q0, dtype=float)
    n = mats.shape[-3]
    logs = np.empty(mats.shape[:-3] + (n, mats.shape[-1]))
    for i in range(n):
        q, r = qr_positive(mats[..., i, :, :] @ q)
        logs[..., i, :] = np.log(np.diagonal(r, axis1=-2, axis2=-1))
    return logs.sum(axis=-2), q, logs


def _sweeps(mats: np.ndarray):
    """Singular data of the product of ``mats`` (application order) by alternating QR sweeps.

    Returns ``(left, logsv, converged)`` with ``left`` the left singular
    frames and ``logsv`` the log singular values in decreasing order.  Each
    product stops sweeping once its own values settle.
    """
    batch = mats.shape[:-3]
    n, d = mats.shape[-3], mats.shape[-1]
    seq = mats.reshape((-1, n, d, d))
    total = seq.shape[0]
    left = np.broadcast_to(np.eye(d), (total, d, d)).copy()
    logd = np.zeros((total, d))
    prev = np.full((total, d), np.nan)
    active = np.arange(total)
    for sweep in range(1, MAX_SWEEPS + 1):
        q = np.broadcast_to(np.eye(d), (len(active), d, d)).copy()
        rs = np.empty_like(seq)
        acc = np.zeros((len(active), d))
        for i in range(n):
            q, r = qr_positive(seq[:, i] @ q)
            rs[:, i] = r
            acc += np.log(np.diagonal(r, axis1=-2, axis2=-1))
        logd[active] = acc
        if sweep % 2 == 1:
            left[active] = left[active] @ q
        seq = np.swapaxes(rs[:, ::-1], -1, -2)
        if sweep % 2 == 1:
            if sweep >= 3:
                scale = np.maximum(1.0, np.max(np.abs(acc), axis=1))
                done = np.max(np.abs(acc - prev[active]), axis=1) <= SWEEP_TOL * scale
                keep = ~done
                active, seq = active[keep], seq[keep]
                if not len(active):
                    break
            prev[active] = logd[active]
    order = np.argsort(-logd, axis=-1, kind="stable")
    logsv = np.take_along_axis(logd, order, axis=-1)
    left = np.take_along_axis(left, order[..., None, :], axis=-1)
    return left.reshape(batch + (d, d)), logsv.reshape(batch + (d,)), not len(active)


def a_cocycle(c: CocycleSystem, n: int, xi: FlagBundlePoint) -> np.ndarray:
    if n < 0:
        raise InvalidArgument("a_cocycle needs n >= 0")
    if not xi.b.is_full():
        raise InvalidArgument("a_cocycle needs a full flag")
    if n == 0:
        return np.zeros(c.d)
    total, _, _ = qr_run(c.matrices(xi.x, 0, n), xi.b.frame)
    return total


def a_cocycle_batch(c: CocycleSystem, xs, frames: np.ndarray, n: int) -> np.ndarray:
    """a_cocycle for many base points and full-flag frames at once."""
    mats = np.stack([c.matrices(x, 0, n) for x in xs])
    total, _, _ = qr_run(mats, frames)
    return total


def _as_chamber(v, variant):
    v = np.asarray(v, dtype=float)
    if variant == "sl":
        v = trace_free(v)
    return chamber_project(v, variant)


def aplus_cocycle(c: CocycleSystem, n: int, x) -> ChamberVector:
    if n < 1:
        raise InvalidArgument("aplus_cocycle needs n >= 1")
    _, logsv, _ = _sweeps(c.matrices(x, 0, n))
    return _as_chamber(logsv, c.variant)


def aplus_batch(c: CocycleSystem, xs, n: int, start: int = 0) -> np.ndarray:
    """Sorted log singular values of the n-step products for many base points."""
    mats = np.stack([c.matrices(x, start, n) for x in xs])
    _, logsv, _ = _sweeps(mats)
    return logsv


def left_singular_frames(c: CocycleSystem, xs, m: int) -> tuple:
    """Left singular frames of the products over the ``m`` steps leading up to each point."""
    mats = np.stack([c.matrices(x, -m, m) for x in xs])
    left, logsv, conv = _sweeps(mats)
    return left, logsv, conv


def flow_step(c: CocycleSystem, xi: FlagBundlePoint) -> FlagBundlePoint:
    return FlagBundlePoint(c.advance(xi.x), act(c.generator(xi.x), xi.b))


def flow_step_inv(c: CocycleSystem, xi: FlagBundlePoint) -> FlagBundlePoint:
    y = c.advance(xi.x, -1)
    return FlagBundlePoint(y, act(np.linalg.inv(c.generator(y)), xi.b))
