"""Checks that decide whether the Lyapunov and Morse flag types agree.

Three conditions are tested on sampled data: uniform transversality of the
attractor and repeller sections, refinement of periodic spectra, and the
attractor/repeller character of periodic fiber measures near the sections.
A verdict combines them and is cross-checked against the chain-graph type.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import base_dynamics as bd
from ._linalg import qr_positive
from .cocycle_engine import CocycleSystem, aplus_batch, gauge_perturb, qr_run, time_reversed
from .errors import AmbiguityError, InvalidArgument
from .flags import Flag, frame_distance
from .lie_structure import ThetaSet, dual_theta, refines, simple_root_eval
from .measures import ergodic_fiber_measures_over_periodic
from .morse_chain import (
    Resolution,
    periodic_morse,
    build_chain_graph,
    morse_sets,
    morse_spectrum,
    theta_mo,
    theta_mo_bracket,
)
from .oseledets import (
    SpectrumEstimate,
    attractor_flags,
    estimate_polar_exponent,
    period_product,
    periodic_spectrum,
    repeller_flags,
    required_lookback,
    section_sample,
    transversal_margins,
)

DEFAULT_TAU = 1e-4


def word_label(word, names=None) -> str:
    if names:
        return "(" + " ".join(names[a] for a in word) + ")"
    return "(" + " ".join(str(a) for a in word) + ")"


# --------------------------------------------------------------------------- condition 1


@dataclass(frozen=True, eq=False)
class BoundedSection:
    min_margin: float
    samples: int
    excluded: int
    lookback: int
    tau: float
    margins: np.ndarray = field(repr=False)
    histogram: tuple = field(repr=False)

    @property
    def passed(self) -> bool:
        return bool(self.min_margin >= self.tau)

    def to_dict(self) -> dict:
        counts, edges = self.histogram
        return {
            "min_margin": float(self.min_margin),
            "samples": self.samples,
            "excluded_nonconverged": self.excluded,
            "lookback": self.lookback,
            "tau": self.tau,
            "verdict": "pass" if self.passed else "fail",
            "histogram_log10": {"edges": [float(e) for e in edges], "counts": [int(k) for k in counts]},
        }


def margin_histogram(margins) -> tuple:
    edges = np.arange(-16.0, 0.5, 0.5)
    logs = np.log10(np.clip(np.asarray(margins, dtype=float), 1e-16, 1.0))
    counts, _ = np.histogram(logs, bins=edges)
    return counts, edges


def check_bounded_section(
    c: CocycleSystem,
    mu,
    spectrum: SpectrumEstimate,
    k: int,
    m: int,
    tau: float = DEFAULT_TAU,
    seed: int | None = None,
) -> BoundedSection:
    if not tau > 0:
        raise InvalidArgument("tau must be positive")
    return bounded_from_sections(section_sample(c, mu, spectrum, k, m, seed), tau)


def bounded_from_sections(ss, tau: float = DEFAULT_TAU) -> BoundedSection:
    ok = ss.converged
    margins = ss.margins[ok]
    min_margin = float(margins.min()) if len(margins) else float("nan")
    return BoundedSection(
        min_margin, int(ok.sum()), int((~ok).sum()), ss.lookback, tau, margins, margin_histogram(margins)
    )


# --------------------------------------------------------------------------- condition 2


@dataclass(frozen=True)
class OrbitSpectrum:
    word: tuple
    label: str
    H: tuple
    theta_blocks: tuple
    refines: bool


@dataclass(frozen=True, eq=False)
class Refinement:
    orbits: list
    max_period: int
    vacuous: bool

    @property
    def violations(self) -> list:
        return [o for o in self.orbits if not o.refines]

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "max_period": self.max_period,
            "vacuous": self.vacuous,
            "verdict": "pass" if self.passed else "fail",
            "orbits": [
                {"word": o.label, "H": list(o.H), "theta_blocks": list(o.theta_blocks), "refines": o.refines}
                for o in self.orbits
            ],
            "violations": [o.label for o in self.violations],
        }


def _periodic_measures(c, max_period):
    if isinstance(c.base, bd.IrrationalRotation):
        return []
    return bd.enumerate_periodic_orbits(c.base, max_period)


def check_refinement(c: CocycleSystem, spectrum: SpectrumEstimate, max_period: int, names=None) -> Refinement:
    rows = []
    for rho in _periodic_measures(c, max_period):
        ps = periodic_spectrum(c, rho)
        rows.append(
            OrbitSpectrum(
                rho.word,
                word_label(rho.word, names),
                tuple(ps.H.entries),
                ps.theta.blocks,
                refines(ps.theta, spectrum.theta),
            )
        )
    return Refinement(rows, max_period, isinstance(c.base, bd.IrrationalRotation))


# --------------------------------------------------------------------------- condition 3 and section containment


def _orbit_frames(c, x, frame, period):
    """Frames of the flag along one period of the orbit of x."""
    mats = c.matrices(x, 0, period)
    out = [np.array(frame)]
    q = np.array(frame)
    for a in mats[:-1]:
        q, _ = qr_positive(a @ q)
        out.append(q)
    return out


def _window(c, x, r):
    if isinstance(c.base, bd.PeriodicOrbit):
        return bd.states(c.base, x, 0, 1)
    return bd.symbols(c.base, x, -r, 2 * r + 1)


def _near_samples(c, x, frames_on_orbit, sample_pts, samples: np.ndarray, dims, r: int) -> float:
    """Largest over the orbit of the distance to the nearest section flag sampled over a nearby base point.

    Base points are near when their symbols agree on coordinates ``-r .. r``;
    ``inf`` marks an orbit point with no sampled neighbour.
    """
    if len(sample_pts) == 0:
        return float("inf")
    win = np.array([_window(c, y, r) for y in sample_pts])
    worst = 0.0
    for i, f in enumerate(frames_on_orbit):
        key = _window(c, c.advance(x, i), r)
        near = np.all(win == key, axis=1)
        if not near.any():
            return float("inf")
        cand = samples[near]
        dist = np.atleast_1d(frame_distance(np.broadcast_to(f, cand.shape), cand, dims))
        worst = max(worst, float(dist.min()))
    return worst


@dataclass(frozen=True)
class OrbitMeasures:
    word: tuple
    label: str
    attractor_side: list  # (component label, class, distance)
    repeller_side: list
    inconclusive: bool
    violations: list


@dataclass(frozen=True, eq=False)
class AttRep:
    orbits: list
    max_period: int
    delta: float
    vacuous: bool

    @property
    def violations(self) -> list:
        return [(o.label, v) for o in self.orbits for v in o.violations]

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "max_period": self.max_period,
            "delta": self.delta,
            "vacuous": self.vacuous,
            "verdict": "pass" if self.passed else "fail",
            "orbits": [
                {
                    "word": o.label,
                    "attractor_side": [list(t) for t in o.attractor_side],
                    "repeller_side": [list(t) for t in o.repeller_side],
                    "inconclusive": o.inconclusive,
                }
                for o in self.orbits
            ],
            "violations": [f"{w}: {v}" for w, v in self.violations],
        }


def _side(c, rho, theta, pts, samples, delta, want, rng, reps, r):
    x, _ = period_product(c, rho)
    rows, bad = [], []
    for fm in ergodic_fiber_measures_over_periodic(c, rho, theta, samples=reps, rng=rng):
        dims = theta.dims
        frames = _orbit_frames(c, x, fm.occupation.frames[0], rho.period)
        dist = _near_samples(c, x, frames, pts, samples, dims, r) if dims else 0.0
        if dist > delta:
            continue
        label = fm.klass.label
        ok = label == want or (fm.klass.boundary and want in ("attractor", "repeller"))
        rows.append((str(fm.component.label), label, float(dist)))
        if not ok:
            bad.append(f"{want} side holds a {label} measure {str(fm.component.label)} with exponent {np.round(fm.exact, 6).tolist()}")
    return rows, bad


def check_att_rep(
    c: CocycleSystem,
    spectrum: SpectrumEstimate,
    sections,
    max_period: int,
    delta: float,
    names=None,
    reps: int = 8,
    seed: int = 0,
    base_radius: int = 2,
) -> AttRep:
    """Periodic fiber measures within ``delta`` of the sampled sections must be attractors (repellers).

    ``sections`` is a :class:`SectionSample` of typical points; its flags
    over base points agreeing on coordinates ``-base_radius .. base_radius``
    stand in for the closure of the section image over the orbit.
    """
    theta = spectrum.theta
    theta_star = dual_theta(theta)
    ok = sections.converged
    pts = [p for p, keep in zip(sections.points, ok) if keep]
    att = sections.attractor.frames[ok]
    rep = sections.repeller.frames[ok]
    out = []
    rng = np.random.default_rng([seed, 0xA7])
    for rho in _periodic_measures(c, max_period):
        a_rows, a_bad = _side(c, rho, theta, pts, att, delta, "attractor", rng, reps, base_radius)
        r_rows, r_bad = _side(time_reversed(c), rho, theta_star, pts, rep, delta, "attractor", rng, reps, base_radius)
        r_rows = [(lab, "repeller" if cls == "attractor" else cls, dist) for lab, cls, dist in r_rows]
        r_bad = [b.replace("attractor side", "repeller side") for b in r_bad]
        out.append(
            OrbitMeasures(
                rho.word,
                word_label(rho.word, names),
                a_rows,
                r_rows,
                inconclusive=not a_rows or not r_rows,
                violations=a_bad + r_bad,
            )
        )
    return AttRep(out, max_period, delta, isinstance(c.base, bd.IrrationalRotation))


@dataclass(frozen=True, eq=False)
class SectionContainment:
    rows: list  # (word label, distance or None, ok)
    delta: float

    @property
    def passed(self) -> bool:
        return all(ok for _, _, ok in self.rows)

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "verdict": "pass" if self.passed else "fail",
            "orbits": [{"word": w, "distance": d, "ok": ok} for w, d, ok in self.rows],
        }


def _attractor_orbit(c, rho, theta_rho):
    x, _ = period_product(c, rho)
    comp = next(cp for cp, _ in periodic_morse(c, rho, theta_rho) if cp.is_attractor)
    return x, _orbit_frames(c, x, comp.representative().frame, rho.period)


def check_section_containment(
    c: CocycleSystem,
    spectrum: SpectrumEstimate,
    sections,
    max_period: int,
    delta: float,
    names=None,
    base_radius: int = 2,
) -> SectionContainment:
    """Projected periodic attractor (repeller) sections must lie near the sampled attractor (repeller) section.

    An orbit whose spectral type does not refine the sampled type has no
    projection and fails; an orbit with no sampled base neighbour is
    reported with distance ``None`` and passes.
    """
    theta = spectrum.theta
    ok = sections.converged
    pts = [p for p, keep in zip(sections.points, ok) if keep]
    att = sections.attractor.frames[ok]
    rep = sections.repeller.frames[ok]
    rc = time_reversed(c)
    rows = []
    for rho in _periodic_measures(c, max_period):
        ps = periodic_spectrum(c, rho)
        label = word_label(rho.word, names)
        if not refines(ps.theta, theta):
            rows.append((label, None, False))
            continue
        if not theta.dims:
            rows.append((label, 0.0, True))
            continue
        x, frames = _attractor_orbit(c, rho, ps.theta)
        rx, rframes = _attractor_orbit(rc, rho, dual_theta(ps.theta))
        dist = max(
            _near_samples(c, x, frames, pts, att, theta.dims, base_radius),
            _near_samples(rc, rx, rframes, pts, rep, dual_theta(theta).dims, base_radius),
        )
        if np.isinf(dist):
            rows.append((label, None, True))
        else:
            rows.append((label, float(dist), bool(dist <= delta)))
    return SectionContainment(rows, delta)


# --------------------------------------------------------------------------- attractor-repeller realization


@dataclass(frozen=True, eq=False)
class PairRealization:
    forward: np.ndarray
    backward: np.ndarray
    bound: float

    @property
    def passed(self) -> bool:
        return bool(np.all(self.forward <= self.bound) and np.all(self.backward <= self.bound))

    def to_dict(self) -> dict:
        return {
            "flags": int(len(self.forward)),
            "bound": self.bound,
            "max_forward_distance": float(self.forward.max()) if len(self.forward) else 0.0,
            "max_backward_distance": float(self.backward.max()) if len(self.backward) else 0.0,
            "verdict": "pass" if self.passed else "fail",
        }


def check_pair_realization(
    c: CocycleSystem, mu, spectrum: SpectrumEstimate, eps: float, flags: int = 100, horizon: int = 200, m: int = 200, seed: int = 0
) -> PairRealization:
    """Forward orbits of random flags approach the attractor section, backward ones the non-transversal set."""
    theta = spectrum.theta
    if not theta.dims:
        return PairRealization(np.zeros(flags), np.zeros(flags), 2 * eps)
    rng = np.random.default_rng([seed, 0x9A1])
    xs = bd.sample(c.base, mu, flags, seed + 7)
    f0 = np.stack([Flag.random(theta, rng).frame for _ in range(flags)])
    mats = np.stack([c.matrices(x, 0, horizon) for x in xs])
    _, fwd, _ = qr_run(mats, f0)
    ends = [c.advance(x, horizon) for x in xs]
    att = attractor_flags(c, ends, theta, m)
    fdist = np.atleast_1d(frame_distance(fwd, att.frames, theta.dims))
    rc = time_reversed(c)
    rmats = np.stack([rc.matrices(x, 0, horizon) for x in xs])
    _, bwd, _ = qr_run(rmats, f0)
    starts = [c.advance(x, -horizon) for x in xs]
    rep = repeller_flags(c, starts, dual_theta(theta), m)
    bdist = transversal_margins(bwd, rep.frames, theta.dims)
    return PairRealization(fdist, bdist, 2 * eps)


# --------------------------------------------------------------------------- verdict


@dataclass(frozen=True, eq=False)
class ConditionReport:
    spectrum: SpectrumEstimate
    bounded_section: BoundedSection
    refinement: Refinement
    att_rep: AttRep
    section_containment: SectionContainment
    theta_mo: ThetaSet | None
    theta_bracket: tuple | None
    equal: str
    alarm: bool
    rationale: list
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "spectrum": self.spectrum.to_dict(),
            "bounded_section": self.bounded_section.to_dict(),
            "refinement": self.refinement.to_dict(),
            "att_rep": self.att_rep.to_dict(),
            "section_containment": self.section_containment.to_dict(),
            "verdict": {
                "theta_ly": list(self.spectrum.theta.blocks),
                "theta_mo": list(self.theta_mo.blocks) if self.theta_mo is not None else None,
                "theta_mo_bracket": [list(t.blocks) for t in self.theta_bracket] if self.theta_bracket else None,
                "equal": self.equal,
                "falsification_alarm": self.alarm,
                "rationale": list(self.rationale),
            },
        }
        out.update(self.extras)
        return out


def verdict(
    spectrum: SpectrumEstimate,
    bounded: BoundedSection,
    refinement: Refinement,
    att_rep: AttRep,
    containment: SectionContainment,
    theta_mo_value: ThetaSet | None = None,
    bracket: tuple | None = None,
    extras: dict | None = None,
) -> ConditionReport:
    why = []
    for name, sub in (("bounded section", bounded), ("refinement", refinement), ("attractor/repeller", att_rep)):
        why.append(f"{name}: {'pass' if sub.passed else 'fail'}")
    if not bounded.passed:
        why.append(f"condition-1 witness: min margin {bounded.min_margin:.6g} < tau {bounded.tau:g}")
    for o in refinement.violations:
        why.append(f"refinement violation at word {o.label}: blocks {list(o.theta_blocks)}")
    for w, v in att_rep.violations:
        why.append(f"attractor/repeller violation at {w}: {v}")
    all_pass = bounded.passed and refinement.passed and att_rep.passed
    alarm = False
    if theta_mo_value is not None:
        same = theta_mo_value == spectrum.theta
        equal = "yes" if all_pass else "no"
        if same != all_pass:
            alarm = True
            why.append(
                f"falsification alarm: conditions say {equal} but chain graph gives {theta_mo_value} vs {spectrum.theta}"
            )
        else:
            why.append(f"chain-graph type {theta_mo_value} agrees")
    elif not all_pass:
        equal = "no"
    elif bracket is not None and bracket[0] == bracket[1]:
        equal = "yes"
    else:
        equal = "undetermined"
        why.append("Morse type only bracketed")
    if containment.passed != (refinement.passed and att_rep.passed):
        why.append("section containment disagrees with refinement and attractor/repeller checks")
    return ConditionReport(
        spectrum, bounded, refinement, att_rep, containment, theta_mo_value, bracket, equal, alarm, why, extras or {}
    )


# --------------------------------------------------------------------------- orchestration

LOOKBACK_TARGET = 60.0


def lookback_for(spec: SpectrumEstimate) -> int:
    """Lookback with (least spectral gap) * m >= LOOKBACK_TARGET, so the m versus m/2 drift is far below tolerance."""
    if not spec.theta.dims:
        return 64
    return max(64, required_lookback(np.asarray(spec.H), spec.theta, LOOKBACK_TARGET))


@dataclass(frozen=True)
class CheckSettings:
    n: int = 2000
    k: int = 64
    m: int | None = None  # lookback; None derives it from the spectral gaps
    section_samples: int = 400
    max_period: int = 3
    tau: float = DEFAULT_TAU
    delta: float = 0.05
    eps: float = 0.03
    resolution: Resolution = Resolution()
    gap_tol: float | None = None
    seed: int = 0
    morse: bool = True
    base_radius: int = 2


def _morse_part(c, s: CheckSettings, spec):
    if s.morse and c.d <= 3:
        try:
            r = theta_mo(c, s.eps, s.resolution)
        except AmbiguityError as e:
            info = {"ambiguous": str(e), "candidates": [list(t.blocks) for t in e.candidates], "eps": s.eps}
            return None, None, {"morse": info}
        info = {
            "theta_mo": list(r.theta.blocks),
            "attractor_rank": r.attractor_rank,
            "repeller_rank": r.repeller_rank,
            "dual_checked": r.dual_checked,
            "eps": s.eps,
        }
        return r.theta, None, {"morse": info}
    if isinstance(c.base, bd.IrrationalRotation):
        return None, None, {}
    b = theta_mo_bracket(c, s.max_period, spec.theta)
    return None, (b.lower, b.upper), {}


def run_check(c: CocycleSystem, mu, s: CheckSettings, names=None, workers: int = 1) -> ConditionReport:
    """Full condition report; independent sub-checks run on ``workers`` threads with a fixed merge order."""
    spec = estimate_polar_exponent(c, mu, s.n, s.k, seed=s.seed, gap_tol=s.gap_tol)
    m = s.m or lookback_for(spec)
    sections = section_sample(c, mu, spec, s.section_samples, m, seed=s.seed + 1)
    jobs = (
        lambda: check_refinement(c, spec, s.max_period, names),
        lambda: check_att_rep(c, spec, sections, s.max_period, s.delta, names, seed=s.seed, base_radius=s.base_radius),
        lambda: check_section_containment(c, spec, sections, s.max_period, s.delta, names, s.base_radius),
        lambda: _morse_part(c, s, spec),
    )
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = [f.result() for f in [pool.submit(j) for j in jobs]]
    else:
        results = [j() for j in jobs]
    refinement, att_rep, containment, (tm, bracket, extras) = results
    extras = dict(extras, lookback=m)
    return verdict(spec, bounded_from_sections(sections, s.tau), refinement, att_rep, containment, tm, bracket, extras)


# --------------------------------------------------------------------------- unique ergodicity


def unique_ergodic_analysis(c: CocycleSystem, s: CheckSettings, directions: int = 16) -> dict:
    if not isinstance(c.base, bd.IrrationalRotation):
        raise InvalidArgument("unique_ergodic_analysis needs a rotation base")
    mu = bd.LebesgueCircle()
    spec = estimate_polar_exponent(c, mu, s.n, s.k, seed=s.seed, gap_tol=s.gap_tol)
    bounded = check_bounded_section(c, mu, spec, s.section_samples, s.m or lookback_for(spec), s.tau, seed=s.seed + 1)
    tm = theta_mo(c, s.eps, s.resolution)
    g = build_chain_graph(c, ThetaSet.from_dims((1,), c.d), s.eps, s.resolution)
    dec = morse_sets(g)
    hull = morse_spectrum(g, dec.attractors[0], directions)
    tol = hull.tolerance
    roots = tm.theta.roots()
    root_vals = [abs(simple_root_eval(i, v)) for i in roots for v in hull.vertices]
    cond3 = all(r <= tol for r in root_vals)
    singleton = hull.diameter <= tol + 1e-12
    H = np.asarray(spec.H)
    poly = all(min(np.linalg.norm(v - H[list(p)]) for p in _perms(len(H))) <= tol for v in hull.vertices)
    return {
        "spectrum": spec.to_dict(),
        "theta_mo": list(tm.theta.blocks),
        "conditions": {
            "equal_types": tm.theta == spec.theta,
            "bounded_section": bounded.to_dict(),
            "roots_vanish_on_morse_spectrum": cond3,
            "refinement": "vacuous pass",
            "att_rep": "vacuous pass",
        },
        "hull": {
            "vertices": hull.vertices.tolist(),
            "diameter": hull.diameter,
            "tolerance": tol,
            "singleton": singleton,
            "contains_H": hull.contains(H, tol),
            "vertices_in_weyl_orbit": poly,
        },
        "graph": g.summary(),
        "morse": dec.summary(),
        "_hull": hull,
        "_bounded": bounded,
        "_spectrum": spec,
        "_theta_mo": tm,
    }


def _perms(d):
    import itertools

    return list(itertools.permutations(range(d)))


# --------------------------------------------------------------------------- continuity


@dataclass(frozen=True, eq=False)
class ContinuityTable:
    eps: np.ndarray
    js: tuple
    delta: np.ndarray  # (len(eps), len(js))
    stderr: np.ndarray
    change: np.ndarray  # max_j |delta_j(eps) - delta_j(0)|
    fitted_C: float
    monotone: bool
    envelope: list  # rows (eps, k, j, value, stderr, bound, ok)
    envelope_ok: bool

    def to_dict(self) -> dict:
        return {
            "eps": self.eps.tolist(),
            "j": list(self.js),
            "delta": self.delta.tolist(),
            "stderr": self.stderr.tolist(),
            "max_change": self.change.tolist(),
            "fitted_C": self.fitted_C,
            "monotone_within_noise": self.monotone,
            "below_linear_bound": bool(np.all(self.change <= self.fitted_C * self.eps + 1e-15)),
            "envelope": [
                {"eps": e, "k": k, "j": j, "value": v, "stderr": se, "bound": b, "ok": ok}
                for e, k, j, v, se, b, ok in self.envelope
            ],
            "envelope_ok": self.envelope_ok,
        }


def continuity_experiment(
    c: CocycleSystem,
    sigma: Callable,
    eps_list: Sequence[float],
    js: Sequence[int],
    mu,
    n: int = 2000,
    k: int = 64,
    ks: Sequence[int] = (1, 2, 4, 8, 16),
    seed: int = 0,
) -> ContinuityTable:
    """delta_j of the polar exponent under the gauge family ``sigma(eps)``, with common random numbers.

    ``sigma(eps)`` returns a matrix field; ``eps = 0`` uses the unperturbed cocycle.
    """
    eps = np.asarray(sorted(set([0.0, *map(float, eps_list)])))
    js = tuple(int(j) for j in js)
    vals = np.empty((len(eps), len(js)))
    ses = np.empty((len(eps), len(js)))
    env = []
    xs = bd.sample(c.base, mu, k, seed)
    for a, e in enumerate(eps):
        ce = c if e == 0 else gauge_perturb(c, sigma(e))
        v = aplus_batch(ce, xs, n) / n
        for b, j in enumerate(js):
            dj = v[:, :j].sum(axis=1)
            vals[a, b] = dj.mean()
            ses[a, b] = dj.std(ddof=1) / np.sqrt(k) if k > 1 else 0.0
        for kk in ks:
            vk = aplus_batch(ce, xs, kk) / kk
            for b, j in enumerate(js):
                dj = vk[:, :j].sum(axis=1)
                val = float(dj.mean())
                se = float(dj.std(ddof=1) / np.sqrt(k)) if k > 1 else 0.0
                bound = float(vals[a, b] - 3 * np.hypot(ses[a, b], se))
                env.append((float(e), int(kk), j, val, se, bound, bool(val >= bound)))
    change = np.max(np.abs(vals - vals[0]), axis=1)
    noise = np.max(ses, axis=1)
    pos = eps > 0
    fitted = float(np.max(change[pos] / eps[pos])) if pos.any() else 0.0
    monotone = bool(all(change[i] <= change[i + 1] + 3 * (noise[i] + noise[i + 1]) for i in range(len(eps) - 1)))
    return ContinuityTable(eps, js, vals, ses, change, fitted, monotone, env, all(r[-1] for r in env))


# --------------------------------------------------------------------------- i.i.d. demo


def demo_alphabet(seed: int = 0) -> tuple:
    """A nonregular diagonal symbol ``h`` and a generic symbol ``g`` with weights one half each."""
    rng = np.random.default_rng([seed, 0x1D])
    g = rng.uniform(-1.0, 1.0, (3, 3)) + 2.0 * np.eye(3)
    h = np.diag([2.0, 2.0, 0.25])
    return np.stack([h, g]), (0.5, 0.5), ("h", "g")


def iid_demo(c: CocycleSystem, s: CheckSettings, names=None) -> dict:
    """Regularity of the sampled spectrum with confidence bounds plus the full condition report."""
    if not isinstance(c.base, bd.FullShift):
        raise InvalidArgument("iid_demo needs a full-shift base")
    mu = bd.ProductMeasure()
    report = run_check(c, mu, s, names)
    spec = report.spectrum
    H = np.asarray(spec.H)
    gaps = []
    for i in range(1, c.d):
        g = simple_root_eval(i, H)
        se = float(spec.gap_stderr[i - 1])
        gaps.append({"root": i, "value": g, "stderr": se, "lower_3sigma": g - 3 * se, "positive_3sigma": bool(g - 3 * se > 0)})
    out = report.to_dict()
    out["regularity"] = {"gaps": gaps, "regular_3sigma": all(r["positive_3sigma"] for r in gaps)}
    out["_report"] = report
    return out
