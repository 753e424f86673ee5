"""Polar exponent estimation, Oseledets flag sections and per-flag exponents."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import base_dynamics as bd
from .cocycle_engine import (
    CocycleSystem,
    FlagBundlePoint,
    a_cocycle,
    a_cocycle_batch,
    aplus_batch,
    left_singular_frames,
    product_value,
    time_reversed,
)
from .errors import InvalidArgument
from .flags import Flag, sin_min_angle, frame_distance
from .lie_structure import (
    ChamberVector,
    ThetaSet,
    WeylElement,
    chamber_project,
    coset_representatives,
    dual_theta,
    refines,
    trace_free,
)
from .matrix_decomp import jordan_multiplicative

GAP_SIGMAS = 10.0
GAP_FLOOR = 1e-6
EXACT_TOL = 1e-9
FLAG_CONV_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class SpectrumEstimate:
    H: ChamberVector
    theta: ThetaSet
    n_used: int
    samples: int
    stderr: np.ndarray
    method: str
    gap_tol: tuple = ()
    gap_stderr: np.ndarray = None
    half_H: np.ndarray = None
    converged: bool = True
    seed: int | None = None

    @property
    def d(self) -> int:
        return self.H.d

    def gaps(self) -> np.ndarray:
        h = np.asarray(self.H)
        return h[:-1] - h[1:]

    def block_H(self) -> np.ndarray:
        """H averaged over the blocks of ``theta`` so that it is constant on blocks."""
        h = np.asarray(self.H, dtype=float).copy()
        for a, b in self.theta.intervals:
            h[a:b] = h[a:b].mean()
        return h

    def to_dict(self) -> dict:
        return {
            "H": list(self.H.entries),
            "theta_blocks": list(self.theta.blocks),
            "n_used": self.n_used,
            "samples": self.samples,
            "stderr": [float(v) for v in self.stderr],
            "method": self.method,
            "gap_tol": [float(v) for v in self.gap_tol],
            "converged": bool(self.converged),
        }


def _chamber(v, variant):
    v = np.asarray(v, dtype=float)
    if variant == "sl":
        v = trace_free(v)
    return chamber_project(v, variant)


def _theta_from_gaps(gaps, tols) -> ThetaSet:
    return ThetaSet(tuple(bool(g <= t) for g, t in zip(gaps, tols)))


def estimate_polar_exponent(
    c: CocycleSystem,
    mu,
    n: int,
    k: int,
    seed: int | None = None,
    gap_tol: float | None = None,
    chunk: int = 64,
) -> SpectrumEstimate:
    """Monte Carlo mean of (1/n) a+(n, x) over ``k`` points drawn from ``mu``.

    The root-gap tolerance defaults to ``10*stderr + |gap(n) - gap(n/2)| + 1e-6``
    per simple root; an explicit ``gap_tol`` replaces it for every root.
    """
    if n < 1 or k < 1:
        raise InvalidArgument("estimate_polar_exponent needs n >= 1 and k >= 1")
    xs = bd.sample(c.base, mu, k, seed)
    half = max(1, n // 2)
    full_v, half_v = [], []
    for i in range(0, k, chunk):
        part = xs[i : i + chunk]
        full_v.append(aplus_batch(c, part, n) / n)
        half_v.append(aplus_batch(c, part, half) / half)
    v = np.concatenate(full_v)
    vh = np.concatenate(half_v)
    if c.variant == "sl":
        v, vh = trace_free(v), trace_free(vh)
    H = v.mean(axis=0)
    Hh = vh.mean(axis=0)
    g = v[:, :-1] - v[:, 1:]
    if k > 1:
        stderr = v.std(axis=0, ddof=1) / np.sqrt(k)
        gstd = g.std(axis=0, ddof=1) / np.sqrt(k)
    else:
        stderr = np.zeros(c.d)
        gstd = np.zeros(c.d - 1)
    gaps = H[:-1] - H[1:]
    bias = np.abs(gaps - (Hh[:-1] - Hh[1:]))
    if gap_tol is None:
        tols = GAP_SIGMAS * gstd + bias + GAP_FLOOR
    else:
        if not gap_tol > 0:
            raise InvalidArgument("gap_tol must be positive")
        tols = np.full(c.d - 1, float(gap_tol))
    converged = bool(np.max(np.abs(H - Hh)) <= GAP_SIGMAS * np.max(stderr) + GAP_FLOOR)
    return SpectrumEstimate(
        H=_chamber(H, c.variant),
        theta=_theta_from_gaps(gaps, tols),
        n_used=n,
        samples=k,
        stderr=stderr,
        method="iterative",
        gap_tol=tuple(float(t) for t in tols),
        gap_stderr=gstd,
        half_H=Hh,
        converged=converged,
        seed=seed,
    )


def _orbit_point(c: CocycleSystem, rho: bd.PeriodicOrbitMeasure):
    if isinstance(c.base, bd.PeriodicOrbit):
        if rho.word != tuple(range(c.base.period)):
            raise InvalidArgument("periodic base carries only its own orbit")
        return 0
    if not bd.is_symbolic(c.base):
        raise InvalidArgument("rotation bases carry no periodic orbits")
    if not bd.admissible_cycle(c.base, rho.word):
        raise InvalidArgument(f"word {rho.word} is not an admissible cycle")
    return bd.periodic_point(rho.word)


def period_product(c: CocycleSystem, rho) -> tuple:
    """Base point and cocycle over one period of ``rho``."""
    x = _orbit_point(c, rho)
    return x, product_value(c, rho.period, x)


def periodic_spectrum(c: CocycleSystem, rho, jordan_tol: float = 1e-6) -> SpectrumEstimate:
    _, g = period_product(c, rho)
    jd = jordan_multiplicative(g, jordan_tol)
    H = np.asarray(jd.log_moduli) / rho.period
    if c.variant == "sl":
        H = trace_free(H)
    gaps = H[:-1] - H[1:]
    tols = (EXACT_TOL,) * (c.d - 1)
    return SpectrumEstimate(
        H=_chamber(H, c.variant),
        theta=_theta_from_gaps(gaps, tols),
        n_used=rho.period,
        samples=1,
        stderr=np.zeros(c.d),
        method="exact-periodic",
        gap_tol=tols,
        gap_stderr=np.zeros(c.d - 1),
        half_H=H,
    )


def required_lookback(H, theta: ThetaSet, target: float = 30.0, cap: int = 1 << 14) -> int:
    """Smallest m with m * (least gap between distinct blocks) >= target, capped."""
    h = np.asarray(H, dtype=float)
    ends = [b for _, b in theta.intervals][:-1]
    gaps = [h[e - 1] - h[e] for e in ends]
    if not gaps or min(gaps) <= 0:
        return cap
    return int(min(cap, max(1, np.ceil(target / min(gaps)))))


# --------------------------------------------------------------------------- sections


@dataclass(frozen=True, eq=False)
class FlagBatch:
    """Flags of one type at many base points, with a convergence certificate per point."""

    points: list
    dims: tuple
    frames: np.ndarray
    drift: np.ndarray
    lookback: int

    @property
    def converged(self) -> np.ndarray:
        return self.drift <= FLAG_CONV_TOL

    def flag(self, i: int) -> Flag:
        return Flag(self.dims, self.frames[i])


def attractor_flags(c: CocycleSystem, xs, theta: ThetaSet, m: int, spectrum: SpectrumEstimate | None = None) -> FlagBatch:
    """Push-forward attractor flags of type ``theta`` at each point of ``xs``."""
    if m < 2:
        raise InvalidArgument("lookback must be >= 2")
    if spectrum is not None and not refines(spectrum.theta, theta):
        raise InvalidArgument(f"requested type {theta} is finer than the spectral type {spectrum.theta}")
    xs = list(xs)
    full, _, _ = left_singular_frames(c, xs, m)
    half, _, _ = left_singular_frames(c, xs, m // 2)
    drift = np.atleast_1d(frame_distance(full, half, theta.dims)) if theta.dims else np.zeros(len(xs))
    return FlagBatch(xs, theta.dims, full, drift, m)


def attractor_flag(c: CocycleSystem, x, theta: ThetaSet, m: int, spectrum: SpectrumEstimate | None = None) -> Flag:
    return attractor_flags(c, [x], theta, m, spectrum).flag(0)


def repeller_flags(c: CocycleSystem, xs, theta_star: ThetaSet, m: int, spectrum: SpectrumEstimate | None = None) -> FlagBatch:
    if spectrum is not None and not refines(dual_theta(spectrum.theta), theta_star):
        raise InvalidArgument(f"requested type {theta_star} is finer than the dual spectral type")
    return attractor_flags(time_reversed(c), xs, theta_star, m)


def repeller_flag(c: CocycleSystem, x, theta_star: ThetaSet, m: int, spectrum: SpectrumEstimate | None = None) -> Flag:
    return repeller_flags(c, [x], theta_star, m, spectrum).flag(0)


def transversal_margins(att: np.ndarray, rep: np.ndarray, dims) -> np.ndarray:
    """Batched transversality margin of attractor frames against dual repeller frames."""
    d = att.shape[-1]
    out = np.ones(att.shape[:-2])
    for di in dims:
        out = np.minimum(out, sin_min_angle(att[..., :, :di], rep[..., :, : d - di]))
    return out


@dataclass(frozen=True, eq=False)
class SectionSample:
    points: list
    attractor: FlagBatch
    repeller: FlagBatch
    margins: np.ndarray
    lookback: int

    @property
    def converged(self) -> np.ndarray:
        return self.attractor.converged & self.repeller.converged


def section_sample(c: CocycleSystem, mu, spectrum: SpectrumEstimate, k: int, m: int, seed: int | None = None) -> SectionSample:
    xs = bd.sample(c.base, mu, k, seed)
    theta = spectrum.theta
    att = attractor_flags(c, xs, theta, m)
    rep = repeller_flags(c, xs, dual_theta(theta), m)
    margins = transversal_margins(att.frames, rep.frames, theta.dims)
    return SectionSample(xs, att, rep, margins, m)


# --------------------------------------------------------------------------- per-flag exponents


@dataclass(frozen=True)
class Classification:
    vector: np.ndarray
    coset: WeylElement
    residual: float
    runner_up: float
    ambiguous: bool


def classify_exponent(lam, H_block, theta: ThetaSet) -> Classification:
    """Nearest vector of the form w^{-1}H (H constant on the blocks of ``theta``)."""
    lam = np.asarray(lam, dtype=float)
    cands = coset_representatives(H_block, theta)
    res = sorted(((float(np.linalg.norm(lam - v)), i) for i, (w, v) in enumerate(cands)))
    best, i = res[0]
    second = res[1][0] if len(res) > 1 else np.inf
    return Classification(lam, cands[i][0], best, second, bool(second < 2 * best))


def flag_exponent(c: CocycleSystem, xi: FlagBundlePoint, n: int, spectrum: SpectrumEstimate) -> Classification:
    lam = a_cocycle(c, n, xi) / n
    if c.variant == "sl":
        lam = trace_free(lam)
    return classify_exponent(lam, spectrum.block_H(), spectrum.theta)


def flag_exponents_batch(c: CocycleSystem, xs, frames, n: int, spectrum: SpectrumEstimate) -> list:
    lam = a_cocycle_batch(c, xs, frames, n) / n
    if c.variant == "sl":
        lam = trace_free(lam)
    hb = spectrum.block_H()
    return [classify_exponent(v, hb, spectrum.theta) for v in lam]


def vertical_exponents(H, theta: ThetaSet) -> list:
    h = np.asarray(H, dtype=float)
    lab = theta.block_index()
    out = [float(h[j] - h[i]) for i in range(len(h)) for j in range(i + 1, len(h)) if lab[i] != lab[j]]
    return sorted(out)


class CentralExponent(NamedTuple):
    value: float
    stderr: float


def central_exponent(c: CocycleSystem, mu, n: int, k: int, seed: int | None = None) -> CentralExponent:
    """Mean of (1/d) log|det A| along ``k`` orbit segments of length ``n``."""
    if c.variant == "sl":
        return CentralExponent(0.0, 0.0)
    xs = bd.sample(c.base, mu, k, seed)
    vals = []
    for x in xs:
        _, logdet = np.linalg.slogdet(c.matrices(x, 0, n))
        vals.append(logdet.mean() / c.d)
    vals = np.asarray(vals)
    se = float(vals.std(ddof=1) / np.sqrt(k)) if k > 1 else 0.0
    return CentralExponent(float(vals.mean()), se)
