"""Iwasawa, polar and multiplicative Jordan data of invertible real matrices."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ._linalg import qr_positive
from .errors import DecompositionError, InvalidArgument
from .flags import Flag
from .lie_structure import ChamberVector, ThetaSet, WeylElement, chamber_project

SINGULAR_THRESHOLD = 1e-12
DEFECTIVE_COND = 1e8


def as_group_element(g) -> np.ndarray:
    """Validate ``g`` as an invertible square matrix and return it as a float array."""
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise InvalidArgument(f"expected a square matrix, got shape {g.shape}")
    if not np.all(np.isfinite(g)):
        raise DecompositionError("matrix has non-finite entries")
    s = np.linalg.svd(g, compute_uv=False)
    if s[0] == 0 or s[-1] / s[0] < SINGULAR_THRESHOLD:
        raise DecompositionError(f"matrix is numerically singular (sigma_min/sigma_max={s[-1] / s[0] if s[0] else 0:.3g})")
    return g


@dataclass(frozen=True, eq=False)
class IwasawaFactors:
    k: np.ndarray
    a: np.ndarray
    n: np.ndarray

    def recompose(self) -> np.ndarray:
        return self.k @ (self.a[:, None] * self.n)


def iwasawa(g) -> IwasawaFactors:
    g = as_group_element(g)
    k, r = qr_positive(g)
    a = np.diag(r).copy()
    if np.any(a <= 0):
        raise DecompositionError("QR produced a non-positive diagonal")
    return IwasawaFactors(k, a, r / a[:, None])


def a_of(g) -> np.ndarray:
    return np.log(iwasawa(g).a)


def polar_aplus(g, variant: str = "gl") -> ChamberVector:
    g = as_group_element(g)
    try:
        s = np.linalg.svd(g, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(str(exc)) from exc
    v = np.log(s)
    if variant == "sl":
        v = v - v.mean()
    return chamber_project(v, variant)


@dataclass(frozen=True, eq=False)
class JordanData:
    """Modulus data of a matrix.

    ``groups`` lists ``(log_modulus, basis)`` by decreasing modulus, where
    ``basis`` is an orthonormal basis of the sum of generalized eigenspaces
    whose eigenvalues have that modulus.
    """

    log_moduli: ChamberVector
    groups: tuple
    defective: bool = False
    residual: float = 0.0

    @property
    def d(self) -> int:
        return self.log_moduli.d

    @property
    def class_dims(self) -> tuple:
        return tuple(b.shape[1] for _, b in self.groups)

    @property
    def class_values(self) -> np.ndarray:
        return np.array([v for v, _ in self.groups])


def _cluster(values: np.ndarray, tol: float) -> list:
    """Group sorted-descending values whose consecutive gaps are <= tol."""
    order = np.argsort(-values, kind="stable")
    clusters, cur = [], [order[0]]
    for a, b in zip(order, order[1:]):
        if values[a] - values[b] <= tol:
            cur.append(b)
        else:
            clusters.append(cur)
            cur = [b]
    clusters.append(cur)
    return clusters


def jordan_multiplicative(g, tol: float = 1e-6) -> JordanData:
    if not tol > 0:
        raise InvalidArgument("jordan tolerance must be positive")
    g = as_group_element(g)
    d = g.shape[0]
    try:
        lam, vecs = np.linalg.eig(g)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(str(exc)) from exc
    logmod = np.log(np.abs(lam))
    clusters = _cluster(logmod, tol)
    defective = bool(np.linalg.cond(vecs) > DEFECTIVE_COND)

    values = []
    for c in clusters:
        values.append(float(np.mean(logmod[c])))
    entries = np.concatenate([[v] * len(c) for v, c in zip(values, clusters)])

    groups = []
    scale = np.linalg.norm(g, 2)
    residual = 0.0
    for k, c in enumerate(clusters):
        if len(clusters) == 1:
            basis = np.eye(d)
        else:
            hi = values[k - 1] if k > 0 else np.inf
            lo = values[k + 1] if k + 1 < len(clusters) else -np.inf
            top = 0.5 * (values[k] + hi) if np.isfinite(hi) else np.inf
            bot = 0.5 * (values[k] + lo) if np.isfinite(lo) else -np.inf

            def select(x, y, top=top, bot=bot):
                m = np.log(abs(complex(x, y)))
                return bot < m < top

            _, z, sdim = scipy.linalg.schur(g, output="real", sort=select)
            if sdim != len(c):
                raise DecompositionError(f"Schur reordering selected {sdim} eigenvalues, expected {len(c)}")
            basis = z[:, :sdim]
        res = np.linalg.norm(g @ basis - basis @ (basis.T @ g @ basis), 2) / scale
        residual = max(residual, float(res))
        groups.append((values[k], basis))
    if residual > 1e-8:
        defective = True
    return JordanData(chamber_project(entries), tuple(groups), defective, residual)


@dataclass(frozen=True, eq=False)
class FixedComponent:
    """A connected component of the fixed set of the hyperbolic part on a flag manifold.

    ``counts[i][c]`` is dim(V_{i+1} cap E_c) for the modulus classes E_c of
    the Jordan data, listed by decreasing modulus.
    """

    counts: tuple
    theta: ThetaSet
    jordan: JordanData = field(repr=False)
    label: WeylElement = None
    is_attractor: bool = False
    is_repeller: bool = False

    @property
    def increments(self) -> list:
        dims = self.jordan.class_dims
        levels = [tuple(0 for _ in dims), *self.counts, dims]
        return [tuple(b - a for a, b in zip(p, q)) for p, q in zip(levels, levels[1:])]

    @property
    def manifold_dim(self) -> int:
        total = 0
        for c, m in enumerate(self.jordan.class_dims):
            incs = [inc[c] for inc in self.increments]
            total += (m * m - sum(x * x for x in incs)) // 2
        return total

    def exponent(self, order: str = "attractor") -> np.ndarray:
        """Exponent vector of a full-flag lift of a point in this component.

        Within each block of ``theta`` the lift can order the modulus classes
        freely; ``"attractor"`` sorts them decreasingly (the lift closest to
        the chamber) and ``"repeller"`` increasingly.
        """
        vals = self.jordan.class_values
        out = []
        for inc in self.increments:
            block = [vals[c] for c, n in enumerate(inc) for _ in range(n)]
            block.sort(reverse=(order == "attractor"))
            out.extend(block)
        return np.array(out)

    def representative(self, rng: np.random.Generator | None = None) -> Flag:
        """A point of the component; with ``rng`` a random one, else the one built from the class bases."""
        bases = []
        for _, b in self.jordan.groups:
            if rng is not None and b.shape[1] > 1:
                q, _ = np.linalg.qr(rng.standard_normal((b.shape[1], b.shape[1])))
                b = b @ q
            bases.append(b)
        used = [0] * len(bases)
        cols = []
        for inc in self.increments:
            for c, n in enumerate(inc):
                cols.append(bases[c][:, used[c] : used[c] + n])
                used[c] += n
        return Flag.from_basis(np.hstack(cols), self.theta.dims)


def _greedy(dims_classes, level_dims, from_top=True):
    order = range(len(dims_classes)) if from_top else range(len(dims_classes) - 1, -1, -1)
    counts = []
    for di in level_dims:
        row = [0] * len(dims_classes)
        left = di
        for c in order:
            take = min(dims_classes[c], left)
            row[c] = take
            left -= take
        counts.append(tuple(row))
    return tuple(counts)


def _label(jordan: JordanData, theta: ThetaSet, counts) -> WeylElement:
    dims = jordan.class_dims
    offsets = np.concatenate([[0], np.cumsum(dims)[:-1]])
    comp = FixedComponent(counts, theta, jordan)
    used = [0] * len(dims)
    perm = []
    for inc in comp.increments:
        block = [c for c, n in enumerate(inc) for _ in range(n)]
        for c in sorted(block):
            perm.append(int(offsets[c] + used[c]))
            used[c] += 1
    return WeylElement(tuple(perm))


def fixed_point_components(jordan: JordanData, theta: ThetaSet) -> list:
    """Enumerate the fixed-point components of the hyperbolic part on the flag manifold of type ``theta``."""
    if theta.d != jordan.d:
        raise InvalidArgument("fixed_point_components: dimension mismatch")
    dims = jordan.class_dims
    level_dims = theta.dims

    def rows_for(prev, target):
        ranges = [range(p, m + 1) for p, m in zip(prev, dims)]
        for row in itertools.product(*ranges):
            if sum(row) == target:
                yield row

    results = []

    def rec(prev, level, acc):
        if level == len(level_dims):
            results.append(tuple(acc))
            return
        for row in rows_for(prev, level_dims[level]):
            rec(row, level + 1, acc + [row])

    rec(tuple(0 for _ in dims), 0, [])
    top = _greedy(dims, level_dims, True)
    bottom = _greedy(dims, level_dims, False)
    out = []
    for counts in results:
        out.append(
            FixedComponent(
                counts,
                theta,
                jordan,
                label=_label(jordan, theta, counts),
                is_attractor=counts == top,
                is_repeller=counts == bottom,
            )
        )
    return out
