"""Occupation measures on flag bundles and attractor/repeller classification."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import qr_positive
from .cocycle_engine import CocycleSystem, FlagBundlePoint
from .errors import InvalidArgument
from .flags import Flag
from .lie_structure import ThetaSet, WeylElement
from .matrix_decomp import FixedComponent
from .morse_chain import periodic_morse
from .oseledets import period_product


@dataclass(frozen=True, eq=False)
class OccupationMeasure:
    """Empirical measure of an orbit segment; frames are full-flag lifts of the support flags."""

    points: list
    frames: np.ndarray
    dims: tuple
    weights: np.ndarray
    origin: tuple = None  # (base point, horizon) when built from one orbit segment

    def __post_init__(self):
        if len(self.points) != len(self.frames) or len(self.points) != len(self.weights):
            raise InvalidArgument("support, frames and weights must have equal length")
        if abs(float(np.sum(self.weights)) - 1.0) > 1e-12:
            raise InvalidArgument("occupation weights must sum to 1")

    def __len__(self):
        return len(self.points)

    def flag(self, i: int) -> Flag:
        return Flag(self.dims, self.frames[i])


def occupation_measure(c: CocycleSystem, xi: FlagBundlePoint, n: int) -> OccupationMeasure:
    if n < 1:
        raise InvalidArgument("occupation horizon must be >= 1")
    mats = c.matrices(xi.x, 0, n)
    frames = np.empty((n, c.d, c.d))
    q = np.array(xi.b.frame)
    pts = []
    x = xi.x
    for i in range(n):
        frames[i] = q
        pts.append(x)
        q, _ = qr_positive(mats[i] @ q)
        x = c.advance(x)
    return OccupationMeasure(pts, frames, xi.b.dims, np.full(n, 1.0 / n), (xi.x, n))


def integral_q(c: CocycleSystem, mu: OccupationMeasure) -> np.ndarray:
    """Weighted mean of the one-step additive cocycle over the support."""
    if len(mu.dims) != c.d - 1:
        raise InvalidArgument("integral_q needs full-flag support")
    if mu.origin is not None:
        mats = c.matrices(mu.origin[0], 0, mu.origin[1])
    else:
        mats = np.stack([c.generator(x) for x in mu.points])
    _, r = qr_positive(mats @ mu.frames)
    q = np.log(np.diagonal(r, axis1=-2, axis2=-1))
    return mu.weights @ q


@dataclass(frozen=True, eq=False)
class MeasureClass:
    label: str
    vector: np.ndarray
    coset: WeylElement
    boundary: bool = False

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "vector": [float(v) for v in self.vector],
            "coset": str(self.coset),
            "boundary": self.boundary,
        }


def nearest_coset(v) -> WeylElement:
    """The w with v = w^{-1} chamber_project(v): entry i of v sits at rank perm[i]."""
    v = np.asarray(v, dtype=float)
    order = np.argsort(-v, kind="stable")
    perm = np.empty(len(v), dtype=int)
    perm[order] = np.arange(len(v))
    return WeylElement(tuple(perm))


def classify(v, tol: float = 1e-9) -> MeasureClass:
    v = np.asarray(v, dtype=float)
    diffs = v[:-1] - v[1:]
    att = bool(np.all(diffs >= -tol))
    rep = bool(np.all(diffs <= tol))
    w = nearest_coset(v)
    if att:
        return MeasureClass("attractor", v, w, boundary=rep)
    if rep:
        return MeasureClass("repeller", v, w)
    return MeasureClass("neither", v, w)


@dataclass(frozen=True, eq=False)
class FiberMeasure:
    """Homogeneous measure over a periodic orbit supported on the orbit of one fixed flag."""

    component: FixedComponent
    occupation: OccupationMeasure
    exact: np.ndarray
    measured: np.ndarray
    klass: MeasureClass


def _repeller_side(comp: FixedComponent, period: int, tol: float) -> MeasureClass | None:
    v = comp.exponent("repeller") / period
    k = classify(v, tol)
    return k if k.label == "repeller" else None


def ergodic_fiber_measures_over_periodic(
    c: CocycleSystem,
    rho,
    theta: ThetaSet,
    samples: int = 1,
    periods: int = 1,
    tol: float = 1e-9,
    rng: np.random.Generator | None = None,
) -> list:
    """Fiber measures over ``rho`` on the orbits of fixed flags, ``samples`` per component.

    Components of positive dimension get random representatives when ``rng``
    is given.  The exact exponent lists each block's modulus classes in
    decreasing order; a component whose decreasing lift is not in the closed
    chamber is tested with the increasing lift for the repeller side.
    """
    x, _ = period_product(c, rho)
    out = []
    for comp, _ in periodic_morse(c, rho, theta):
        reps = [comp.representative()]
        if comp.manifold_dim > 0 and rng is not None:
            reps += [comp.representative(rng) for _ in range(samples - 1)]
        for f in reps:
            full = Flag(tuple(range(1, c.d)), f.frame)
            occ = occupation_measure(c, FlagBundlePoint(x, full), rho.period * periods)
            measured = integral_q(c, occ)
            exact = comp.exponent("attractor") / rho.period
            k = classify(exact, tol)
            if k.label != "attractor":
                k = _repeller_side(comp, rho.period, tol) or k
            out.append(FiberMeasure(comp, OccupationMeasure(occ.points, occ.frames, f.dims, occ.weights, occ.origin), exact, measured, k))
    return out
