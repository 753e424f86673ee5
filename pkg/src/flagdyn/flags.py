"""Partial flags of R^d carried as orthonormal frames."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ._linalg import qr_positive
from .errors import InvalidArgument
from .lie_structure import ThetaSet, dual_theta, refines

TRANSVERSAL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Flag:
    """Flag V_1 < ... < V_k; the first ``dims[i]`` columns of ``frame`` span V_{i+1}."""

    dims: tuple
    frame: np.ndarray = field(repr=False)

    def __post_init__(self):
        frame = np.array(self.frame, dtype=float)
        d = frame.shape[0]
        if frame.shape != (d, d):
            raise InvalidArgument(f"frame must be square, got {frame.shape}")
        dims = tuple(int(x) for x in self.dims)
        ThetaSet.from_dims(dims, d)  # validates
        if not np.allclose(frame.T @ frame, np.eye(d), atol=1e-10):
            raise InvalidArgument("frame is not orthonormal")
        frame.setflags(write=False)
        object.__setattr__(self, "frame", frame)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_basis(cls, vectors, dims) -> "Flag":
        """Flag spanned by column prefixes of ``vectors`` (any invertible d x d matrix)."""
        v = np.asarray(vectors, dtype=float)
        q, r = qr_positive(v)
        if np.min(np.abs(np.diag(r))) < 1e-13 * max(1.0, np.max(np.abs(r))):
            raise InvalidArgument("basis vectors are linearly dependent")
        return cls(tuple(dims), q)

    @classmethod
    def standard(cls, theta: ThetaSet) -> "Flag":
        return cls(theta.dims, np.eye(theta.d))

    @classmethod
    def random(cls, theta: ThetaSet, rng: np.random.Generator) -> "Flag":
        return cls.from_basis(rng.standard_normal((theta.d, theta.d)), theta.dims)

    @property
    def d(self) -> int:
        return self.frame.shape[0]

    @property
    def theta(self) -> ThetaSet:
        return ThetaSet.from_dims(self.dims, self.d)

    def subspace(self, i: int) -> np.ndarray:
        """Orthonormal basis of the i-th subspace (0-based level index)."""
        return self.frame[:, : self.dims[i]]

    def is_full(self) -> bool:
        return len(self.dims) == self.d - 1

    def to_dict(self) -> dict:
        return {"dims": list(self.dims), "frame": [[float(x) for x in row] for row in self.frame.T]}

    def __repr__(self):
        return f"Flag(dims={self.dims})"


def act(g, b: Flag) -> Flag:
    q, _ = qr_positive(np.asarray(g, dtype=float) @ b.frame)
    return Flag(b.dims, q)


def act_frames(g, frames: np.ndarray) -> np.ndarray:
    """Batched action on frames: ``g`` (..., d, d), ``frames`` (..., d, d)."""
    q, _ = qr_positive(g @ frames)
    return q


def project(b: Flag, theta2: ThetaSet) -> Flag:
    if theta2.d != b.d:
        raise InvalidArgument("project: dimension mismatch")
    if not refines(b.theta, theta2):
        raise InvalidArgument(f"project: type {b.theta} does not refine {theta2}")
    return Flag(theta2.dims, b.frame)


def sin_min_angle(a, b):
    """Sine of the smallest principal angle between column spans (batched, orthonormal columns).

    The sines are the singular values of the part of the smaller basis
    orthogonal to the larger span, which stays accurate near zero angle.
    """
    if a.shape[-1] > b.shape[-1]:
        a, b = b, a
    resid = a - b @ (np.swapaxes(b, -1, -2) @ a)
    return np.clip(np.linalg.svd(resid, compute_uv=False)[..., -1], 0.0, 1.0)


def transversal(b: Flag, bstar: Flag, tol: float = TRANSVERSAL_TOL) -> tuple:
    """Return ``(is_transversal, margin)``.

    The margin is the sine of the smallest principal angle between ``V_i``
    and ``W_{d-d_i}``, minimised over the paired levels.
    """
    if b.d != bstar.d:
        raise InvalidArgument("transversal: dimension mismatch")
    if bstar.theta != dual_theta(b.theta):
        raise InvalidArgument(f"transversal: {bstar.theta} is not dual to {b.theta}")
    d = b.d
    margin = 1.0
    for di in b.dims:
        margin = min(margin, float(sin_min_angle(b.frame[:, :di], bstar.frame[:, : d - di])))
    return margin > tol, margin


def flag_distance(b1: Flag, b2: Flag) -> float:
    """Max over levels of the operator-norm gap between the orthogonal projectors."""
    if b1.dims != b2.dims or b1.d != b2.d:
        raise InvalidArgument("flag_distance: type mismatch")
    return frame_distance(b1.frame, b2.frame, b1.dims)


def frame_distance(f1, f2, dims) -> float:
    out = 0.0
    for k in dims:
        a, b = f1[..., :, :k], f2[..., :, :k]
        p = a @ np.swapaxes(a, -1, -2) - b @ np.swapaxes(b, -1, -2)
        out = np.maximum(out, np.linalg.norm(p, ord=2, axis=(-2, -1)))
    return float(out) if np.ndim(out) == 0 else out


def distance_to_nontransversal(b: Flag, bstar: Flag) -> float:
    """Distance from ``b`` to the set of flags that fail to be transversal to ``bstar``.

    A rotation by the smallest principal angle between some V_i and its
    partner W_{d-d_i} reaches that set, and nothing closer can, so the
    distance is the minimum over levels of the sine of that angle.
    """
    if bstar.theta != dual_theta(b.theta):
        raise InvalidArgument("distance_to_nontransversal: types are not dual")
    d = b.d
    best = 1.0
    for di in b.dims:
        ang = scipy.linalg.subspace_angles(b.frame[:, :di], bstar.frame[:, : d - di])
        best = min(best, float(np.sin(np.min(ang))))
    return best


def line_flag(v) -> Flag:
    """The point of P^{d-1} spanned by ``v``."""
    return subspace_flag(np.asarray(v, dtype=float).reshape(-1, 1))


def subspace_flag(basis, dims=None) -> Flag:
    """Flag whose levels are column prefixes of ``basis`` (d x k, full rank, k < d)."""
    basis = np.asarray(basis, dtype=float)
    d, k = basis.shape
    q, _ = np.linalg.qr(np.column_stack([basis, np.eye(d)]))
    frame = q[:, :d]
    lead, _ = qr_positive(basis)
    frame[:, :k] = lead
    return Flag(tuple(dims) if dims is not None else (k,), frame)
