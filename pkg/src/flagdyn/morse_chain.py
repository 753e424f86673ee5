"""Chain-recurrent Morse sets on projective bundles and their Morse spectra.

The bundle is discretized as (base cell) x (cell of a projective grid).  A
node ``u`` has an edge to ``v`` when the image of u's centre under one step of
the flow lands within ``eps`` of v's cell, and carries the weight vector
``a(1, .)`` at its centre.  Morse sets are the strongly connected components
with an internal edge, and the Morse spectrum of a set is probed through
extreme cycle means of <u, weight> in sampled directions ``u``.
"""
from __future__ import annotations

import graphlib
import itertools
from collections import Counter
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph
from scipy.spatial import ConvexHull, cKDTree

from . import base_dynamics as bd
from ._linalg import orthonormal_complement, qr_positive
from .cocycle_engine import CocycleSystem
from .errors import AmbiguityError, CapacityError, InvalidArgument
from .lie_structure import ThetaSet, weyl_subgroup
from .matrix_decomp import fixed_point_components, jordan_multiplicative
from .oseledets import period_product, periodic_spectrum

NODE_BUDGET = 5_000_000
RANK_THRESHOLD = 0.25
HOWARD_TOL = 1e-12
GOLDEN = np.pi * (3.0 - np.sqrt(5.0))


# --------------------------------------------------------------------------- resolutions


@dataclass(frozen=True)
class Resolution:
    """Grid parameters: cylinder length, circle cells and projective cells."""

    cylinder: int = 6
    circle: int = 64
    fiber: int | None = None  # defaults to 256 cells of P^1, 2000 of P^2

    def fiber_cells(self, d: int) -> int:
        if self.fiber is not None:
            return int(self.fiber)
        return 256 if d == 2 else 2000


# --------------------------------------------------------------------------- base grids


@dataclass(frozen=True, eq=False)
class BaseGrid:
    kind: str
    centers: list
    succ: list
    words: list = None
    past: int = 0
    size: int = 0

    @property
    def n(self) -> int:
        return len(self.centers)

    def locate(self, base, x) -> int:
        if self.kind == "periodic":
            return int(x) % self.n
        if self.kind == "circle":
            return int(np.floor(float(x) * self.n)) % self.n
        w = tuple(int(a) for a in bd.symbols(base, x, -self.past, self.size))
        return self._index[w]

    @property
    def _index(self):
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {w: i for i, w in enumerate(self.words)}
            self.__dict__["_idx"] = idx
        return idx


def _admissible_words(s, L):
    m = bd.alphabet_size(s)
    if m**L > NODE_BUDGET:
        raise CapacityError(f"{m}^{L} cylinder words exceed the node budget")
    words = [()]
    for _ in range(L):
        nxt = []
        for w in words:
            for a in range(m):
                if w and isinstance(s, bd.SubshiftFinite) and not s.transition[w[-1]][a]:
                    continue
                nxt.append(w + (a,))
        words = nxt
    return words


def base_grid(c: CocycleSystem, eps: float, res: Resolution) -> BaseGrid:
    s = c.base
    if isinstance(s, bd.PeriodicOrbit):
        w = s.period
        return BaseGrid("periodic", list(range(w)), [np.array([(i + c.direction) % w]) for i in range(w)])
    if isinstance(s, bd.IrrationalRotation):
        n = res.circle
        centers = [(i + 0.5) / n for i in range(n)]
        succ = []
        for x in centers:
            y = (x + c.direction * s.angle) % 1.0
            lo, hi = int(np.floor((y - eps) * n)), int(np.floor((y + eps) * n))
            succ.append(np.unique(np.arange(lo, hi + 1) % n))
        return BaseGrid("circle", centers, succ)
    L = res.cylinder
    h = L // 2
    words = _admissible_words(s, L)
    index = {w: i for i, w in enumerate(words)}
    centers = [bd.ShiftPoint(word=w, offset=h) for w in words]
    succ = []
    for w in words:
        if c.direction == 1:
            cand = [w[1:] + (a,) for a in range(bd.alphabet_size(s))]
        else:
            cand = [(a,) + w[:-1] for a in range(bd.alphabet_size(s))]
        succ.append(np.array(sorted(index[v] for v in cand if v in index)))
    return BaseGrid("symbolic", centers, succ, words, h, L)


# --------------------------------------------------------------------------- projective grids


@dataclass(frozen=True, eq=False)
class FiberGrid:
    """Cells of P^{d-1}; ``dual`` grids carry hyperplanes through their normals."""

    d: int
    dual: bool
    centers: np.ndarray
    radius: float  # covering radius, as an angle

    @property
    def n(self) -> int:
        return len(self.centers)

    @property
    def dims(self) -> tuple:
        return (self.d - 1,) if self.dual else (1,)

    def image(self, g, vecs):
        m = np.linalg.inv(g).T if self.dual else g
        out = vecs @ m.T
        return out / np.linalg.norm(out, axis=1, keepdims=True)

    def expansion(self, g, vecs) -> np.ndarray:
        """Norm of the derivative of the induced map on P^{d-1} at each line."""
        m = np.linalg.inv(g).T if self.dual else g
        out = np.empty(len(vecs))
        for i, v in enumerate(vecs):
            gv = m @ v
            nrm = np.linalg.norm(gv)
            u = gv / nrm
            t = orthonormal_complement(v[:, None], self.d)
            dt = m @ t
            dt -= np.outer(u, u @ dt)
            out[i] = np.linalg.norm(dt, 2) / nrm
        return out

    def lifts(self) -> np.ndarray:
        """Canonical full-flag frames over every cell centre."""
        out = np.empty((self.n, self.d, self.d))
        for i, v in enumerate(self.centers):
            comp = orthonormal_complement(v[:, None], self.d)
            out[i] = np.column_stack([comp, v]) if self.dual else np.column_stack([v, comp])
        return out

    def line_of(self, frames) -> np.ndarray:
        """Grid coordinates of flags of this grid's type given by frames."""
        frames = np.asarray(frames)
        return frames[..., :, -1] if self.dual else frames[..., :, 0]

    def neighbors(self, vecs, eps, spread=None) -> list:
        """Cells within gap distance ``eps`` of each line in ``vecs``.

        ``spread`` (angles, one per line) widens the reach, e.g. by the image
        of a source cell around its centre.
        """
        if eps >= 1:
            return [np.arange(self.n)] * len(vecs)
        ang = np.arcsin(eps) + self.radius + (0.0 if spread is None else np.asarray(spread))
        ang = np.broadcast_to(ang, (len(vecs),))
        if self.d == 2:
            phi = np.mod(np.arctan2(vecs[:, 1], vecs[:, 0]), np.pi)
            cphi = np.mod(np.arctan2(self.centers[:, 1], self.centers[:, 0]), np.pi)
            diff = np.abs(phi[:, None] - cphi[None, :])
            diff = np.minimum(diff, np.pi - diff)
            return [np.flatnonzero(row <= a + 1e-15) for row, a in zip(diff, ang)]
        out = []
        for v, a in zip(vecs, ang):
            if a >= np.pi / 2:
                out.append(np.arange(self.n))
                continue
            hits = self._tree.query_ball_point(v, 2 * np.sin(a / 2) + 1e-15)
            out.append(np.unique(np.asarray(hits, dtype=int) % self.n))
        return out

    def distance_to_cells(self, vecs, cells) -> np.ndarray:
        """Gap distance from each line to the nearest of ``cells``, less the cell radius."""
        c = self.centers[np.asarray(cells, dtype=int)]
        cos = np.abs(vecs @ c.T).max(axis=1)
        ang = np.arccos(np.clip(cos, 0, 1))
        return np.sin(np.maximum(ang - self.radius, 0.0))

    def locate(self, vecs) -> np.ndarray:
        cos = np.abs(vecs @ self.centers.T)
        return np.argmax(cos, axis=1)

    @property
    def _tree(self):
        t = self.__dict__.get("_kd")
        if t is None:
            t = cKDTree(np.vstack([self.centers, -self.centers]))
            self.__dict__["_kd"] = t
        return t


def fiber_grid(d: int, n: int, dual: bool = False) -> FiberGrid:
    if d == 2:
        phi = np.pi * (np.arange(n) + 0.5) / n
        return FiberGrid(2, dual, np.column_stack([np.cos(phi), np.sin(phi)]), np.pi / (2 * n))
    if d == 3:
        z = (np.arange(n) + 0.5) / n
        phi = GOLDEN * np.arange(n)
        rr = np.sqrt(1 - z * z)
        centers = np.column_stack([rr * np.cos(phi), rr * np.sin(phi), z])
        probe = np.random.default_rng(12345).standard_normal((20000, 3))
        probe /= np.linalg.norm(probe, axis=1, keepdims=True)
        cos = np.abs(probe @ centers.T).max(axis=1)
        radius = float(np.arccos(np.clip(cos.min(), 0, 1))) * 1.05
        return FiberGrid(3, dual, centers, radius)
    raise CapacityError(f"projective grids are limited to d <= 3, got d={d}")


# --------------------------------------------------------------------------- graphs


@dataclass(frozen=True, eq=False)
class ChainGraph:
    system: CocycleSystem
    base: BaseGrid
    fiber: FiberGrid
    eps: float
    resolution: Resolution
    adjacency: sp.csr_matrix
    weights: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_edges(self) -> int:
        return self.adjacency.nnz

    def node(self, b, f):
        return np.asarray(b) * self.fiber.n + np.asarray(f)

    def split(self, nodes):
        nodes = np.asarray(nodes)
        return nodes // self.fiber.n, nodes % self.fiber.n

    def grid_tolerance(self, nodes=None) -> float:
        """Largest spread of weight vectors across the fiber cells of ``nodes`` over one base cell.

        Cycle means can sit anywhere in the grid-scale neighbourhood of a
        Morse set, so this bounds the discretization error of its spectrum.
        """
        nodes = np.arange(self.n_nodes) if nodes is None else np.asarray(nodes)
        bs, _ = self.split(nodes)
        worst = 0.0
        for b in np.unique(bs):
            w = self.weights[nodes[bs == b]]
            if len(w) > 1:
                span = w.max(axis=0) - w.min(axis=0)
                worst = max(worst, float(np.linalg.norm(span)))
        return worst

    def summary(self) -> dict:
        return {
            "nodes": int(self.n_nodes),
            "edges": int(self.n_edges),
            "eps": float(self.eps),
            "base_cells": int(self.base.n),
            "fiber_cells": int(self.fiber.n),
            "dual": bool(self.fiber.dual),
            "cylinder": int(self.resolution.cylinder),
        }


def build_chain_graph(c: CocycleSystem, theta: ThetaSet, eps: float, res: Resolution = Resolution()) -> ChainGraph:
    """Chain graph on the projective bundle (``theta`` with dims (1,)) or its dual (dims (d-1,))."""
    if not eps > 0:
        raise InvalidArgument("eps must be positive")
    d = c.d
    if d > 3:
        raise CapacityError(f"chain graphs are limited to d <= 3, got d={d}")
    if theta.d != d or theta.dims not in ((1,), (d - 1,)):
        raise InvalidArgument(f"flag type {theta} is not projective or dual projective")
    dual = d == 3 and theta.dims == (d - 1,)
    bg = base_grid(c, eps, res)
    fg = fiber_grid(d, res.fiber_cells(d), dual)
    nb, nf = bg.n, fg.n
    if nb * nf > NODE_BUDGET:
        raise CapacityError(f"{nb * nf} nodes exceed the budget of {NODE_BUDGET}")
    lifts = fg.lifts()
    weights = np.empty((nb * nf, d))
    rows, cols = [], []
    for b in range(nb):
        g = c.generator(bg.centers[b])
        _, r = qr_positive(g @ lifts)
        weights[b * nf : (b + 1) * nf] = np.log(np.diagonal(r, axis1=-2, axis2=-1))
        spread = fg.radius * fg.expansion(g, fg.centers)
        nbrs = fg.neighbors(fg.image(g, fg.centers), eps, spread)
        counts = np.array([len(x) for x in nbrs])
        src = np.repeat(np.arange(nf), counts)
        dst = np.concatenate(nbrs)
        for b2 in bg.succ[b]:
            rows.append(b * nf + src)
            cols.append(b2 * nf + dst)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    adj = sp.csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(nb * nf, nb * nf))
    adj.sum_duplicates()
    adj.data[:] = 1
    return ChainGraph(c, bg, fg, float(eps), res, adj, weights)


# --------------------------------------------------------------------------- Morse sets


@dataclass(frozen=True, eq=False)
class MorseSet:
    index: int
    nodes: np.ndarray
    rank: int
    is_attractor: bool
    is_repeller: bool
    fiber_rank: int

    @property
    def fiber_dim(self) -> int:
        """Dimension of the projective fiber."""
        return self.fiber_rank - 1


@dataclass(frozen=True, eq=False)
class MorseDecomposition:
    graph: ChainGraph
    sets: list
    reach: dict
    resolution_artifact: bool

    @property
    def attractors(self) -> list:
        return [m for m in self.sets if m.is_attractor]

    @property
    def repellers(self) -> list:
        return [m for m in self.sets if m.is_repeller]

    def summary(self) -> dict:
        return {
            "count": len(self.sets),
            "sizes": [int(len(m.nodes)) for m in self.sets],
            "attractors": [m.index for m in self.attractors],
            "repellers": [m.index for m in self.repellers],
            "fiber_ranks": [m.fiber_rank for m in self.sets],
            "resolution_artifact": self.resolution_artifact,
        }


def _fiber_rank(g: ChainGraph, nodes, tol: float) -> int:
    """Projective rank of the set: least k such that, over every base cell, all
    its lines lie within gap distance ``tol`` of some k-dimensional subspace.

    The per-cell ranks are aggregated by their most frequent value (the larger
    one on ties), which discounts base cells holding a single stray node.
    """
    bs, fs = g.split(nodes)
    ranks = []
    for b in np.unique(bs):
        v = g.fiber.centers[fs[bs == b]]
        _, _, vt = np.linalg.svd(v, full_matrices=False)
        k = v.shape[1]
        for j in range(1, v.shape[1] + 1):
            resid = np.sqrt(np.clip(1 - np.sum((v @ vt[:j].T) ** 2, axis=1), 0, None))
            if resid.max() <= tol:
                k = j
                break
        ranks.append(k)
    counts = Counter(ranks)
    top = max(counts.values())
    return max(r for r, k in counts.items() if k == top)


def _merge_adjacent(g: ChainGraph, comps: list) -> list:
    """Union Morse candidates that touch in the fiber over a common base cell.

    Cell-level outer approximations can split an attractor into a core and a
    thin shell of self-looping cells one cell away; those shells are not
    separated from the core at the grid scale.
    """
    nf = g.fiber.n
    parent = list(range(len(comps)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner = np.full(g.n_nodes, -1)
    for i, nodes in enumerate(comps):
        owner[nodes] = i
    adj = g.fiber.neighbors(g.fiber.centers, 0.0, g.fiber.radius * 1.01)
    for i, nodes in enumerate(comps):
        for u in nodes:
            b, f = divmod(int(u), nf)
            for j in owner[b * nf + adj[f]]:
                if j >= 0 and find(j) != find(i):
                    parent[find(j)] = find(i)
    groups = {}
    for i in range(len(comps)):
        groups.setdefault(find(i), []).append(comps[i])
    merged = [np.sort(np.concatenate(v)) for v in groups.values()]
    merged.sort(key=lambda a: int(a[0]))
    return merged


def morse_sets(g: ChainGraph, rank_tol: float = 0.5, merge: bool = True) -> MorseDecomposition:
    n, labels = csgraph.connected_components(g.adjacency, directed=True, connection="strong")
    coo = g.adjacency.tocoo()
    internal = np.zeros(n, bool)
    same = labels[coo.row] == labels[coo.col]
    internal[labels[coo.row[same]]] = True
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(n + 1))
    comps = [order[bounds[k] : bounds[k + 1]] for k in range(n) if internal[k]]
    comps.sort(key=lambda a: int(a[0]))
    if merge and len(comps) > 1:
        comps = _merge_adjacent(g, comps)
    morse_of = np.full(g.n_nodes, -1)
    for i, nodes in enumerate(comps):
        morse_of[nodes] = i
    reach = {}
    for i, nodes in enumerate(comps):
        seen = csgraph.breadth_first_order(g.adjacency, int(nodes[0]), directed=True, return_predecessors=False)
        hit = set(int(j) for j in np.unique(morse_of[seen]) if j >= 0 and j != i)
        reach[i] = hit
    ts = graphlib.TopologicalSorter({i: {j for j in reach if i in reach[j]} for i in reach})
    try:
        topo = list(ts.static_order())
    except graphlib.CycleError:
        # merged sets can be mutually reachable at coarse resolution
        topo = sorted(reach)
    rank = {i: r for r, i in enumerate(topo)}
    reached = set().union(*reach.values()) if reach else set()
    sets = [
        MorseSet(
            index=i,
            nodes=nodes,
            rank=rank[i],
            is_attractor=not reach[i],
            is_repeller=i not in reached,
            fiber_rank=_fiber_rank(g, nodes, rank_tol),
        )
        for i, nodes in enumerate(comps)
    ]
    n_att = sum(m.is_attractor for m in sets)
    n_rep = sum(m.is_repeller for m in sets)
    return MorseDecomposition(g, sets, reach, bool(n_att != 1 or n_rep != 1))


# --------------------------------------------------------------------------- flag type


@dataclass(frozen=True)
class ThetaMo:
    theta: ThetaSet
    attractor_rank: int
    repeller_rank: int
    dual_checked: bool
    morse_counts: tuple


def _blocks_from_ranks(d, top, bottom):
    if top == d or bottom == d:
        if top != bottom:
            raise AmbiguityError(
                f"attractor rank {top} and repeller rank {bottom} disagree",
                [ThetaSet.full(d), ThetaSet.from_blocks([top, d - top]) if top < d else ThetaSet.full(d)],
            )
        return ThetaSet.full(d)
    if top + bottom > d:
        raise AmbiguityError(
            f"attractor rank {top} and repeller rank {bottom} overlap in dimension {d}",
            [ThetaSet.from_blocks([top, d - top]), ThetaSet.from_blocks([d - bottom, bottom])],
        )
    mid = d - top - bottom
    return ThetaSet.from_blocks([top] + ([mid] if mid else []) + [bottom])


def _ranks(dec: MorseDecomposition):
    att = max(m.fiber_rank for m in dec.attractors)
    rep = max(m.fiber_rank for m in dec.repellers)
    return att, rep


def theta_mo(c: CocycleSystem, eps: float, res: Resolution = Resolution()) -> ThetaMo:
    """Flag type of the finest Morse decomposition from projective fiber dimensions (d = 2, 3)."""
    d = c.d
    if d > 3:
        raise CapacityError("theta_mo needs d <= 3; use theta_mo_bracket")
    dec = morse_sets(build_chain_graph(c, ThetaSet.from_dims((1,), d), eps, res))
    top, bottom = _ranks(dec)
    theta = _blocks_from_ranks(d, top, bottom)
    dual_checked = False
    if d == 3:
        ddec = morse_sets(build_chain_graph(c, ThetaSet.from_dims((2,), d), eps, res))
        dtop, dbottom = _ranks(ddec)
        dual = _blocks_from_ranks(d, dtop, dbottom)
        if tuple(reversed(dual.blocks)) != theta.blocks:
            raise AmbiguityError(
                f"projective bundle gives {theta}, dual bundle gives reversed {dual}",
                [theta, ThetaSet.from_blocks(tuple(reversed(dual.blocks)))],
            )
        dual_checked = True
    return ThetaMo(theta, top, bottom, dual_checked, (len(dec.sets),))


@dataclass(frozen=True)
class ThetaBracket:
    lower: ThetaSet
    upper: ThetaSet
    max_period: int


def theta_mo_bracket(c: CocycleSystem, max_period: int, theta_ly: ThetaSet | None = None) -> ThetaBracket:
    """Bounds on the Morse flag type from periodic data.

    A simple root vanishing on some periodic exponent cannot be positive on
    the whole Morse spectrum, so it lies in the Morse type; nothing here
    excludes a root, so the upper bound is the full set.
    """
    d = c.d
    inc = [False] * (d - 1)
    if theta_ly is not None:
        inc = list(theta_ly.included)
    for rho in bd.enumerate_periodic_orbits(c.base, max_period):
        t = periodic_spectrum(c, rho).theta
        inc = [a or b for a, b in zip(inc, t.included)]
    return ThetaBracket(ThetaSet(tuple(inc)), ThetaSet.full(d), max_period)


# --------------------------------------------------------------------------- cycle means


@dataclass(frozen=True)
class CycleMean:
    value: float
    cycle: tuple  # node ids, in order


def max_cycle_mean(indptr, indices, node_w) -> CycleMean:
    """Maximum mean node weight over cycles of a graph with no dead ends (Howard's policy iteration)."""
    n = len(indptr) - 1
    deg = np.diff(indptr)
    if n == 0 or np.any(deg == 0):
        raise InvalidArgument("max_cycle_mean needs a nonempty graph without dead ends")
    src = np.repeat(np.arange(n), deg)
    # initial policy: best immediate successor weight
    pos = np.array([indptr[v] + int(np.argmax(node_w[indices[indptr[v] : indptr[v + 1]]])) for v in range(n)])
    pi = indices[pos]
    scale = max(1.0, float(np.max(np.abs(node_w))))
    tol = HOWARD_TOL * scale
    for _ in range(10 * n + 100):
        eta, x, root_cycle = _evaluate(pi, node_w)
        e_dst = eta[indices]
        best = np.maximum.reduceat(e_dst, indptr[:-1])
        improve = best > eta + tol
        if improve.any():
            for v in np.flatnonzero(improve):
                seg = indices[indptr[v] : indptr[v + 1]]
                pi[v] = seg[int(np.argmax(eta[seg]))]
            continue
        val = np.where(e_dst >= eta[src] - tol, node_w[src] - eta[src] + x[indices], -np.inf)
        bestv = np.maximum.reduceat(val, indptr[:-1])
        improve = bestv > x + tol
        if not improve.any():
            v = int(np.argmax(eta))
            return CycleMean(float(eta[v]), root_cycle[v])
        for v in np.flatnonzero(improve):
            seg = slice(indptr[v], indptr[v + 1])
            pi[v] = indices[seg][int(np.argmax(val[seg]))]
    raise ArithmeticError("policy iteration did not terminate")


def _evaluate(pi, w):
    n = len(pi)
    eta = np.zeros(n)
    x = np.zeros(n)
    state = np.zeros(n, np.int8)  # 0 new, 1 on stack, 2 done
    cycle_of = [None] * n
    for s in range(n):
        if state[s]:
            continue
        path = []
        v = s
        while state[v] == 0:
            state[v] = 1
            path.append(v)
            v = int(pi[v])
        if state[v] == 1:
            k = path.index(v)
            cyc = path[k:]
            mean = float(np.mean(w[cyc]))
            tup = tuple(cyc)
            # bias along the cycle with x[v] = 0 at its entry point
            x[cyc[0]] = 0.0
            for u in reversed(cyc[1:]):
                nxt = int(pi[u])
                x[u] = w[u] - mean + (x[nxt] if nxt != cyc[0] else 0.0)
            for u in cyc:
                eta[u] = mean
                cycle_of[u] = tup
                state[u] = 2
            path = path[:k]
        for u in reversed(path):
            nxt = int(pi[u])
            eta[u] = eta[nxt]
            x[u] = w[u] - eta[u] + x[nxt]
            cycle_of[u] = cycle_of[nxt]
            state[u] = 2
    return eta, x, cycle_of


# --------------------------------------------------------------------------- spectrum hulls


def sphere_directions(d: int, k: int) -> np.ndarray:
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        t = 2 * np.pi * np.arange(k) / k
        return np.column_stack([np.cos(t), np.sin(t)])
    z = 1 - 2 * (np.arange(k) + 0.5) / k
    phi = GOLDEN * np.arange(k)
    r = np.sqrt(1 - z * z)
    base = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    if d == 3:
        return base
    rng = np.random.default_rng(d * 7919 + k)
    u = rng.standard_normal((k, d))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


@dataclass(frozen=True, eq=False)
class SpectrumHull:
    directions: np.ndarray
    support: np.ndarray
    points: np.ndarray  # cycle-mean vector realizing each support value
    vertices: np.ndarray
    cycles: list
    tolerance: float

    @property
    def diameter(self) -> float:
        v = self.vertices
        if len(v) < 2:
            return 0.0
        return float(max(np.linalg.norm(a - b) for a, b in itertools.combinations(v, 2)))

    def support_at(self, u) -> float:
        """Support function of the vertex hull."""
        return float(np.max(self.vertices @ np.asarray(u, dtype=float)))

    def contains(self, p, inflate: float = 0.0) -> bool:
        """Membership of ``p`` in the hull grown by ``inflate``, tested on the sampled directions."""
        p = np.asarray(p, dtype=float)
        vals = self.directions @ p
        sup = np.array([self.support_at(u) for u in self.directions])
        return bool(np.all(vals <= sup + inflate + 1e-12))

    def convexity_defect(self) -> float:
        """Largest violation of h(u) >= <u, p> over sampled directions and realizing points."""
        lhs = self.points @ self.directions.T
        return float(max(0.0, np.max(lhs - self.support[None, :])))


def _hull_vertices(points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    pts = np.unique(np.round(points, 12), axis=0)
    if len(pts) == 1:
        return pts
    center = pts.mean(axis=0)
    _, s, vt = np.linalg.svd(pts - center)
    k = int(np.sum(s > tol * max(1.0, s[0])))
    if k == 0:
        return pts[:1]
    coords = (pts - center) @ vt[:k].T
    if k == 1:
        return pts[[int(np.argmin(coords[:, 0])), int(np.argmax(coords[:, 0]))]]
    hull = ConvexHull(coords)
    return pts[np.sort(hull.vertices)]


def morse_spectrum(g: ChainGraph, M: MorseSet, directions: int = 16) -> SpectrumHull:
    nodes = np.asarray(M.nodes)
    sub = g.adjacency[nodes][:, nodes].tocsr()
    sub.sort_indices()
    w = g.weights[nodes]
    dirs = sphere_directions(g.system.d, directions)
    support, pts, cycles = [], [], []
    for u in dirs:
        cm = max_cycle_mean(sub.indptr, sub.indices, w @ u)
        cyc = np.asarray(cm.cycle)
        support.append(cm.value)
        pts.append(w[cyc].mean(axis=0))
        cycles.append(tuple(int(v) for v in nodes[cyc]))
    pts = np.asarray(pts)
    return SpectrumHull(dirs, np.asarray(support), pts, _hull_vertices(pts), cycles, g.grid_tolerance(nodes))


def weyl_defect(hull: SpectrumHull, theta: ThetaSet) -> float:
    """Largest |h(u) - h(w u)| over sampled directions and w in the Weyl subgroup of ``theta``."""
    worst = 0.0
    for w in weyl_subgroup(theta):
        for u in hull.directions:
            worst = max(worst, abs(hull.support_at(u) - hull.support_at(w.act(u))))
    return worst


# --------------------------------------------------------------------------- periodic case


def periodic_morse(c: CocycleSystem, rho, theta: ThetaSet, jordan_tol: float = 1e-6) -> list:
    """Fixed components of the period map with exponent vectors (per time step)."""
    _, g = period_product(c, rho)
    jd = jordan_multiplicative(g, jordan_tol)
    comps = fixed_point_components(jd, theta)
    return [(comp, comp.exponent("attractor") / rho.period) for comp in comps]


# --------------------------------------------------------------------------- containment


def cell_distances(g: ChainGraph, M: MorseSet, xs, lines) -> np.ndarray:
    """Distance of each (base point, line) to the cells of ``M`` over the same base cell."""
    bs, fs = g.split(M.nodes)
    out = np.empty(len(xs))
    for i, (x, v) in enumerate(zip(xs, lines)):
        b = g.base.locate(g.system.base, x)
        cells = fs[bs == b]
        out[i] = np.inf if len(cells) == 0 else g.fiber.distance_to_cells(np.asarray(v)[None, :], cells)[0]
    return out
