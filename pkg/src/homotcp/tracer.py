"""Predictor-corrector tracing of the homotopy root curve.

Starting at the anchor with mu = 1, each outer iteration computes the unit
tangent of the curve (oriented by the sign of the state-Jacobian
determinant so the curve is traversed toward mu = 0), then produces a
candidate point by a fixed number of predictor passes, each followed by a
sweep of minimum-norm pseudoinverse corrections.  A candidate is accepted
only when the corrector has actually converged back onto the curve and the
complementarity pair stays positive; otherwise the step length shrinks
geometrically and the cycle reruns.  Termination is tiered by three
tolerances (eps2 > eps3 > eps1 > 0) separating stalls, exhausted step
budgets, and arrival near mu = 0; an arrival is only reported as solved
after a Newton polish of the mu = 0 limit system produces a point whose
complementarity certificate passes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .homotopy import HomotopyMap, HomotopyPoint
from .linalg import (
    SingularMatrixError,
    det_sign,
    euclidean_norm,
    lu_solve,
    pinv_right_apply,
)

__all__ = [
    "Status",
    "TracerConfig",
    "TraceRecord",
    "PathTrace",
    "SolveReport",
    "NonFiniteIterateError",
    "CERT_NEGATIVITY_TOL",
    "CERT_GAP_TOL",
    "tangent",
    "predictor_corrector_cycle",
    "trace_path",
    "solution_extract",
]

# Complementarity certificate bounds a final point must meet to be reported
# as solved: componentwise negativity of x and of the recomputed slack, and
# the absolute duality gap |x.w|.
CERT_NEGATIVITY_TOL = 1e-8
CERT_GAP_TOL = 1e-6


class Status(enum.Enum):
    SOLVED = "Solved"
    STALLED_TERMINATED = "StalledTerminated"
    DIVERGED_UNBOUNDED = "DivergedUnbounded"
    SINGULAR_SYSTEM = "SingularSystem"
    MAX_ITERATIONS = "MaxIterations"


class NonFiniteIterateError(RuntimeError):
    """A corrector iterate left the representable range."""


@dataclass(frozen=True)
class TracerConfig:
    """Tracer parameters.

    The termination tolerances must satisfy eps2 > eps3 > eps1 > 0: eps1 is
    the final |mu| tolerance, eps3 the step length below which shrinking
    gives up, and eps2 the mu-movement threshold of the stall detector.
    `corrector_tol` is the relative residual under which a corrector sweep
    counts as converged; candidates that fail it are retried with a smaller
    step, which keeps the tracer from accepting half-corrected points that
    sit on a different branch of the root set.
    """

    mu0: float = 1.0
    eps1: float = 1e-8
    eps2: float = 1e-3
    eps3: float = 1e-6
    shrink: float = 0.9
    inner_refinements: int = 3
    step_floor: float = 1e-5
    r_max: float = 1.0
    max_outer_iterations: int = 500
    overflow_bound: float = 1e12
    corrector_tol: float = 1e-8
    orientation_continuity: bool = False

    def __post_init__(self):
        if not (self.eps2 > self.eps3 > self.eps1 > 0):
            raise ValueError("tolerances must satisfy eps2 > eps3 > eps1 > 0")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink factor must lie in (0, 1)")
        if not 1 <= self.inner_refinements <= 49:
            raise ValueError("inner_refinements must lie in 1..49")
        for name in ("mu0", "step_floor", "r_max", "overflow_bound", "corrector_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be at least 1")


@dataclass(frozen=True)
class TraceRecord:
    """One candidate point examined by the tracer."""

    index: int
    mu: float
    state: np.ndarray
    step: float
    residual: float
    det_sign: int
    accepted: bool


@dataclass
class PathTrace:
    """Ordered log of every finite candidate, accepted or rejected."""

    records: list[TraceRecord] = field(default_factory=list)

    def append(self, rec: TraceRecord):
        self.records.append(rec)

    def accepted(self) -> list[TraceRecord]:
        return [r for r in self.records if r.accepted]

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one trace, with the complementarity certificate.

    `residual_triple` is (negative part of min x, negative part of min w,
    |x.w|) with w recomputed from the tensor at the final x, independent of
    the path's own w coordinate.
    """

    status: Status
    point: HomotopyPoint
    residual_triple: tuple[float, float, float]
    iterations: int
    trace: PathTrace | None
    map: HomotopyMap

    @property
    def solved(self) -> bool:
        return self.status is Status.SOLVED


def recomputed_slack(hmap: HomotopyMap, x: np.ndarray) -> np.ndarray:
    """w = A x^(m-1) + q straight from the tensor."""
    return hmap.tensor.contract_vector(x) + hmap.q


def _certificate(hmap: HomotopyMap, x: np.ndarray) -> tuple[float, float, float]:
    w = recomputed_slack(hmap, x)
    return (
        float(max(0.0, -x.min())),
        float(max(0.0, -w.min())),
        float(abs(x @ w)),
    )


def _certified(triple: tuple[float, float, float]) -> bool:
    return (
        triple[0] <= CERT_NEGATIVITY_TOL
        and triple[1] <= CERT_NEGATIVITY_TOL
        and triple[2] <= CERT_GAP_TOL
    )


def _tangent_raw(
    hmap: HomotopyMap,
    u: np.ndarray,
    is_first: bool,
    prev_tangent: np.ndarray | None,
    enforce_continuity: bool,
) -> tuple[np.ndarray, int]:
    jac = hmap._state_jacobian_raw(u)
    s = lu_solve(jac, hmap._mu_derivative_raw(u))
    xi = np.append(s, -1.0)
    xi /= euclidean_norm(xi)
    sign = det_sign(jac)
    if is_first:
        tau = xi
    else:
        tau = xi if sign > 0 else -xi
    if enforce_continuity and prev_tangent is not None and float(tau @ prev_tangent) < 0:
        tau = -tau
    return tau, sign


def tangent(
    hmap: HomotopyMap,
    p: HomotopyPoint,
    is_first: bool = False,
    prev_tangent: np.ndarray | None = None,
    enforce_continuity: bool = False,
) -> tuple[np.ndarray, int]:
    """Oriented unit tangent of the root curve at p.

    Solves (dH/dstate) s = dH/dmu, normalizes (s, -1), and keeps that
    orientation when the state-Jacobian determinant is positive, flipping
    it otherwise.  At the start point the raw orientation (mu decreasing)
    is used directly.  Returns the tangent and the determinant sign.
    Raises SingularMatrixError when the tangent system is singular.
    """
    return _tangent_raw(hmap, p.stacked(), is_first, prev_tangent, enforce_continuity)


def _ensure_finite(u: np.ndarray):
    if not np.all(np.isfinite(u)):
        raise NonFiniteIterateError("iterate is no longer finite")


def _cycle_raw(
    hmap: HomotopyMap,
    u: np.ndarray,
    tau: np.ndarray,
    step: float,
    inner_refinements: int,
) -> np.ndarray:
    for _ in range(inner_refinements):
        pred = u + step * tau
        _ensure_finite(pred)
        res_pred = hmap._residual_raw(pred)
        jac_pred = hmap._full_jacobian_raw(pred)
        bar = pred - pinv_right_apply(jac_pred, res_pred)
        _ensure_finite(bar)
        jac_bar = hmap._full_jacobian_raw(bar)
        barbar = pred - 2.0 * pinv_right_apply(jac_pred + jac_bar, res_pred)
        _ensure_finite(barbar)
        u = barbar - pinv_right_apply(jac_bar, hmap._residual_raw(barbar))
        _ensure_finite(u)
    return u


def predictor_corrector_cycle(
    hmap: HomotopyMap,
    p: HomotopyPoint,
    tau: np.ndarray,
    step: float,
    inner_refinements: int,
) -> HomotopyPoint:
    """One candidate point from `inner_refinements` predictor-corrector passes.

    Each pass advances the running point by step * tau, then applies three
    minimum-norm corrections: a plain pseudoinverse Newton pull-back, a
    summed-Jacobian pull-back counted twice, and a final pull-back of the
    twice-corrected point under the first corrected point's Jacobian.  The
    refined point of one pass seeds the next; the tangent is held fixed
    over the whole cycle.

    Raises SingularMatrixError when a corrector system is rank deficient
    (callers treat this as a retry signal) and NonFiniteIterateError when
    an iterate overflows.
    """
    u = _cycle_raw(hmap, p.stacked(), np.asarray(tau, dtype=float), step, inner_refinements)
    return HomotopyPoint.from_stacked(u)


def _polish_limit(hmap: HomotopyMap, u: np.ndarray, max_iter: int = 30):
    """Newton refinement of the mu = 0 limit system from a near-limit point.

    Returns (state, limit-residual-norm, certificate) for the best iterate
    seen, judged by the limit residual.  Never raises: a singular or
    overflowing Newton step just stops the refinement.
    """
    v = np.append(u[: 4 * hmap.n], 0.0)
    best = None
    for _ in range(max_iter):
        r = hmap._residual_raw(v)
        score = euclidean_norm(r)
        if best is None or score < best[1]:
            best = (v[:-1].copy(), score, _certificate(hmap, v[: hmap.n]))
        if score < 1e-13:
            break
        try:
            dv = lu_solve(hmap._state_jacobian_raw(v), r)
        except SingularMatrixError:
            break
        v = v - np.append(dv, 0.0)
        if not np.all(np.isfinite(v)):
            break
    return best


def _residual_scale(hmap: HomotopyMap, u: np.ndarray) -> float:
    """Magnitude of the homotopy residual at unit relative accuracy.

    Residual blocks combine tensor contractions of degree m-1 and state
    products of degree 2, so roundoff alone produces residuals of this
    order times machine epsilon at large states.
    """
    vmax = max(1.0, float(np.abs(u[:-1]).max()))
    return 1.0 + hmap.coeff_scale * vmax ** (hmap.order - 1) + vmax**2


def trace_path(
    hmap: HomotopyMap,
    config: TracerConfig | None = None,
    keep_trace: bool = True,
) -> SolveReport:
    """Trace the root curve from the anchor toward mu = 0.

    Returns a SolveReport whose status is SOLVED when a polished arrival
    point passes the complementarity certificate, STALLED_TERMINATED when
    the stall detector fires without a certifiable point,
    DIVERGED_UNBOUNDED when the state overflows the configured bound or the
    run ends with the state grown orders of magnitude beyond the anchor
    while mu heads to 0 without certification, SINGULAR_SYSTEM when the
    tangent or corrector systems are singular beyond retry, and
    MAX_ITERATIONS otherwise.
    """
    cfg = config if config is not None else TracerConfig()
    n = hmap.n
    u = np.append(hmap.anchor.stacked(), cfg.mu0)
    trace = PathTrace() if keep_trace else None
    counter = 0
    # Scale against which terminal growth is judged divergent.
    anchor_scale = max(1.0, float(np.abs(hmap.anchor.stacked()).max()))
    floor_hit = False  # reached |mu| <= eps1 without a certifiable point

    def record(cand: np.ndarray, a: float, r: float, sign: int, accepted: bool):
        nonlocal counter
        if trace is not None and np.all(np.isfinite(cand)):
            trace.append(
                TraceRecord(counter, float(cand[-1]), cand[:-1].copy(), a, r, sign, accepted)
            )
            counter += 1

    def grown(point_u: np.ndarray) -> bool:
        return float(np.abs(point_u[:-1]).max()) >= 100.0 * anchor_scale

    def report(status: Status, point_u: np.ndarray, iterations: int) -> SolveReport:
        p = HomotopyPoint.from_stacked(point_u)
        return SolveReport(status, p, _certificate(hmap, p.x), iterations, trace, hmap)

    def try_solution(point_u: np.ndarray, iterations: int, sign: int):
        """Polish toward the limit system; report SOLVED only if certified."""
        best = _polish_limit(hmap, point_u)
        if best is not None and _certified(best[2]):
            out = np.append(best[0], 0.0)
            record(out, 0.0, best[1], sign, accepted=True)
            return report(Status.SOLVED, out, iterations)
        return None

    def terminal(point_u: np.ndarray, iterations: int, fallback: Status) -> SolveReport:
        if floor_hit and grown(point_u):
            return report(Status.DIVERGED_UNBOUNDED, point_u, iterations)
        return report(fallback, point_u, iterations)

    prev_tau = None
    for i in range(cfg.max_outer_iterations):
        try:
            tau, sign = _tangent_raw(
                hmap, u, i == 0, prev_tau, cfg.orientation_continuity
            )
        except SingularMatrixError:
            return report(Status.SINGULAR_SYSTEM, u, i)
        prev_tau = tau

        l = 0
        while True:
            a = cfg.shrink**l
            try:
                cand = _cycle_raw(hmap, u, tau, a, cfg.inner_refinements)
            except NonFiniteIterateError:
                return report(Status.DIVERGED_UNBOUNDED, u, i)
            except SingularMatrixError:
                if a > cfg.eps3:
                    l += 1
                    continue
                return report(Status.SINGULAR_SYSTEM, u, i)
            r = euclidean_norm(hmap._residual_raw(cand))
            dmu = abs(cand[-1] - u[-1])

            if np.abs(cand[:-1]).max() > cfg.overflow_bound:
                record(cand, a, r, sign, accepted=False)
                return report(Status.DIVERGED_UNBOUNDED, u, i)

            # mu-movement gate: shrink while the candidate moves mu by a
            # full unit or not at all, unless the step is already tiny.
            if not (0.0 < dmu < 1.0):
                if min(a, euclidean_norm(cand - u)) > cfg.step_floor:
                    record(cand, a, r, sign, accepted=False)
                    l += 1
                    continue

            # Acceptance: corrector converged (residual at roundoff scale,
            # and in any case within r_max) and the complementarity pair
            # plus the x-multiplier stay positive.  z2 is left ungated: on
            # problems without a finite solution the curve leaves the
            # closed region through z2 and the published end behaviour
            # lives just beyond that face.
            converged = r <= min(cfg.r_max, cfg.corrector_tol * _residual_scale(hmap, cand))
            if converged and np.all(cand[: 3 * n] > 0):
                record(cand, a, r, sign, accepted=True)
                if abs(cand[-1]) <= cfg.eps1:
                    solved = try_solution(cand, i + 1, sign)
                    if solved is not None:
                        return solved
                    floor_hit = True
                u = cand
                break

            if a > cfg.eps3:
                record(cand, a, r, sign, accepted=False)
                l += 1
                continue

            # step budget exhausted: stall detection
            if dmu < cfg.eps2:
                if abs(cand[-1]) < cfg.eps2:
                    record(cand, a, r, sign, accepted=False)
                    solved = try_solution(cand, i + 1, sign)
                    if solved is not None:
                        return solved
                    return terminal(cand, i + 1, Status.STALLED_TERMINATED)
                record(cand, a, r, sign, accepted=False)
                return terminal(u, i, Status.STALLED_TERMINATED)

            # mu still moving: accept the candidate despite the failed gate
            record(cand, a, r, sign, accepted=True)
            u = cand
            break

    return terminal(u, cfg.max_outer_iterations, Status.MAX_ITERATIONS)


def solution_extract(report: SolveReport) -> tuple[np.ndarray, np.ndarray]:
    """Final x and the slack w recomputed from the tensor.

    Only meaningful for solved reports; raises ValueError otherwise.
    """
    if report.status is not Status.SOLVED:
        raise ValueError(f"no solution to extract from a {report.status.value} report")
    x = report.point.x.copy()
    return x, recomputed_slack(report.map, x)
