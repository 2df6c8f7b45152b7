"""Partitions of ``[a, b]_T`` and the delta-fine construction.

A partition is a strictly increasing array of scale points starting at ``a``
and ending at ``b``.  :func:`delta_fine` builds a partition in which every step
either moves ``g`` by at most ``delta`` or is a single jump between
neighbouring scale points; :func:`certify` and :func:`verify_certificate`
record and re-check that property.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import GNotIncreasing, NonTermination
from .expr import Expr, as_expr
from .timescale import IsolatedPoints, RealInterval, TimeScale, snap_tol

__all__ = [
    "DEFAULT_MAX_STEPS",
    "Partition",
    "DeltaFineCertificate",
    "grid_partition",
    "common_refinement",
    "delta_fine",
    "halve_and_refine",
    "certify",
    "verify_certificate",
]

# A width below 1e-6 on a real interval already needs about a million points,
# so the budget is well above the 1e5 one might pick for scattered scales.
DEFAULT_MAX_STEPS = 5_000_000

# stopping rule of the monotone inversion; ttol = 0 bisects to full resolution
_TTOL = 0.0
_GTOL = 1e-13


class Partition:
    """A finite, strictly increasing set of scale points from ``a`` to ``b``.

    Parameters
    ----------
    scale : TimeScale
    points : array_like
        Candidate points.  They are snapped to canonical scale points, sorted
        and deduplicated; the first and last must equal ``a`` and ``b``.
    """

    __slots__ = ("scale", "points")

    def __init__(self, scale: TimeScale, points):
        pts = scale.snap_many(np.asarray(points, dtype=float).ravel())
        pts = _dedupe(np.sort(pts))
        if len(pts) < 2 or not pts[0] < pts[-1]:
            raise ValueError("a partition needs a < b")
        pts.setflags(write=False)
        self.scale = scale
        self.points = pts

    @classmethod
    def _trusted(cls, scale: TimeScale, pts: np.ndarray) -> "Partition":
        # points are already canonical, sorted and deduplicated
        obj = cls.__new__(cls)
        pts = np.asarray(pts, dtype=float)
        pts.setflags(write=False)
        obj.scale = scale
        obj.points = pts
        return obj

    @property
    def a(self) -> float:
        return float(self.points[0])

    @property
    def b(self) -> float:
        return float(self.points[-1])

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points.tolist())

    def __eq__(self, other):
        return (
            isinstance(other, Partition)
            and self.scale == other.scale
            and np.array_equal(self.points, other.points)
        )

    def __repr__(self):
        n = len(self.points)
        if n <= 8:
            body = ", ".join(repr(p) for p in self.points.tolist())
        else:
            head = ", ".join(repr(p) for p in self.points[:3].tolist())
            body = f"{head}, ... ({n} points), {self.b!r}"
        return f"Partition([{body}])"

    def refines(self, other: "Partition") -> bool:
        """True if every point of ``other`` is a point of ``self``."""
        return bool(np.isin(other.points, self.points).all())


def _dedupe(pts: np.ndarray) -> np.ndarray:
    """Drop points within the snap tolerance of their predecessor, keeping the
    first and last entries."""
    if len(pts) < 2:
        return pts
    close = np.diff(pts) <= 1e-12 * np.maximum(1.0, np.abs(pts[1:]))
    if not close.any():
        return pts
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = ~close
    keep[-1] = True
    out = pts[keep]
    if len(out) > 2 and out[-1] - out[-2] <= 1e-12 * max(1.0, abs(out[-1])):
        # the endpoint b wins over an interior point right below it
        out = np.delete(out, -2)
    return out


@dataclass(frozen=True)
class DeltaFineCertificate:
    """Per-step flags for a partition ``t_0 < ... < t_n``.

    ``gap_small[j-1]`` says ``g(t_j) - g(t_{j-1}) <= delta`` (up to the snap
    tolerance); ``jump_step[j-1]`` says ``rho(t_j) = t_{j-1}``.
    """

    delta: float
    gap_small: np.ndarray
    jump_step: np.ndarray

    @property
    def ok(self) -> bool:
        return bool(np.all(self.gap_small | self.jump_step))

    @property
    def failures(self) -> np.ndarray:
        """1-based indices ``j`` of steps carrying neither flag."""
        return np.flatnonzero(~(self.gap_small | self.jump_step)) + 1


def grid_partition(scale: TimeScale, a: float, b: float, cap: int = 100_000) -> Partition:
    """Partition made of every scale point in ``[a, b]``.

    Raises
    ------
    TooManyPoints
        If ``[a, b]_T`` is infinite or has more than ``cap`` points.
    """
    a, b = scale.snap(a), scale.snap(b)
    pts = scale.enumerate_between(a, b, cap)
    return Partition._trusted(scale, _dedupe(pts))


def common_refinement(p1: Partition, p2: Partition) -> Partition:
    """The union of two partitions of the same ``[a, b]_T``."""
    if p1.scale != p2.scale:
        raise ValueError("partitions live on different scales")
    if p1.a != p2.a or p1.b != p2.b:
        raise ValueError("partitions have different endpoints")
    if p1.points is p2.points:
        return p1
    return Partition._trusted(p1.scale, _dedupe(np.union1d(p1.points, p2.points)))


class _Walker:
    """State of one delta-fine construction."""

    def __init__(self, scale, g, b, delta, max_steps):
        self.scale = scale
        self.g = g
        self.b = b
        self.delta = delta
        self.max_steps = max_steps
        self.backend = kernels.active()
        self.prog = g.program
        self._gcache: dict[int, np.ndarray] = {}

    def gval(self, t: float) -> float:
        return float(self.g.eval_many(np.array([t]))[0])

    def invert(self, lo, hi, y) -> np.ndarray:
        y = np.atleast_1d(np.asarray(y, dtype=float))
        out = self.backend.invert_increasing(self.prog, lo, hi, y, _TTOL, _GTOL)
        if np.isnan(out).any():
            # surface the underlying domain problem with a precise message
            lo, hi = float(np.min(lo)), float(np.max(hi))
            self.g.eval_many(np.linspace(lo, hi, 65))
            raise GNotIncreasing(f"g could not be inverted on [{lo!r}, {hi!r}]")
        return out

    def point_gvals(self, i: int, comp: IsolatedPoints) -> np.ndarray:
        gv = self._gcache.get(i)
        if gv is None:
            gv = self.g.eval_many(comp.array)
            self._gcache[i] = gv
        return gv

    def sup_window(self, ci: int, cur: float, y: float) -> float:
        """Largest scale point ``t`` in ``[cur, b]`` with ``g(t) <= y``."""
        best = cur
        comps = self.scale.components
        for i in range(ci, len(comps)):
            c = comps[i]
            lo, hi = max(c.lo, cur), min(c.hi, self.b)
            if lo > hi:
                break
            if isinstance(c, IsolatedPoints):
                gv = self.point_gvals(i, c)
                k0 = int(np.searchsorted(c.array, lo))
                k1 = int(np.searchsorted(c.array, hi, side="right")) - 1
                if gv[k0] > y:
                    break
                k = int(np.searchsorted(gv[k0 : k1 + 1], y, side="right")) - 1 + k0
                best = float(c.array[k])
                if k < k1:
                    break
                continue
            if self.gval(lo) > y:
                break
            if self.gval(hi) <= y:
                best = hi
                continue
            x = float(self.invert(lo, hi, y)[0])
            if isinstance(c, RealInterval):
                best = x
            else:
                p = c.floor(x)
                best = max(best, p) if p >= lo else best
            break
        return best

    def interval_run(self, c: RealInterval, cur: float, budget: int) -> np.ndarray:
        """All steps inside the interval ``c`` from ``cur`` up to its top (or b)."""
        end = min(c.hi, self.b)
        g0, g1 = self.gval(cur), self.gval(end)
        if g1 < g0:
            raise GNotIncreasing(f"g({end!r}) < g({cur!r})")
        n = int(math.ceil((g1 - g0) / self.delta))
        if n > budget:
            raise NonTermination(
                f"delta={self.delta!r} needs about {n} steps on [{cur!r}, {end!r}], "
                f"over the budget of {self.max_steps}"
            )
        if n <= 1:
            return np.array([end])
        ys = g0 + self.delta * np.arange(1, n, dtype=float)
        # bracket every target between neighbouring nodes of a uniform table
        nodes = np.linspace(cur, end, n + 1)
        gn = self.g.eval_many(nodes)
        bad = np.flatnonzero(np.diff(gn) <= 0)
        if len(bad):
            j = int(bad[0])
            raise GNotIncreasing(f"g({float(nodes[j + 1])!r}) <= g({float(nodes[j])!r})")
        k = np.clip(np.searchsorted(gn, ys, side="right") - 1, 0, n - 1)
        xs = self.invert(nodes[k], nodes[k + 1], ys)
        xs = xs[(xs > cur) & (xs < end)]
        return np.append(xs, end)


def delta_fine(
    scale: TimeScale,
    g: Expr | str,
    a: float,
    b: float,
    delta: float,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> tuple[Partition, DeltaFineCertificate]:
    """Build a delta-fine partition of ``[a, b]_T``.

    Each new point is ``t_j = sup{t in [t_{j-1}, b]_T : g(t) <= g(t_{j-1}) + delta}``,
    falling back to ``sigma(t_{j-1})`` when that supremum does not advance.
    Inside a real interval the windows are anchored at ``g(start) + k*delta``
    and solved together; the resulting steps still move ``g`` by at most
    ``delta`` up to the inversion tolerance.

    Raises
    ------
    GNotIncreasing
        If ``g`` fails to increase strictly along the generated points.
    NonTermination
        If more than ``max_steps`` points would be needed, or the window
        cannot advance from a dense point.
    """
    g = as_expr(g)
    if not delta > 0 or not math.isfinite(delta):
        raise ValueError("delta must be a positive finite number")
    a, b = scale.snap(a), scale.snap(b)
    if not a < b:
        raise ValueError("delta_fine needs a < b")
    w = _Walker(scale, g, b, float(delta), max_steps)
    chunks: list = [np.array([a])]
    count = 1
    cur = a
    ci = scale.locate(a)[0]
    while cur < b:
        c = scale.components[ci]
        if isinstance(c, RealInterval) and c.lo <= cur < c.hi:
            run = w.interval_run(c, cur, max_steps - count)
            chunks.append(run)
            count += len(run)
            cur = float(run[-1])
        else:
            y = w.gval(cur) + w.delta
            nxt = w.sup_window(ci, cur, y)
            if nxt <= cur:
                nxt = scale.sigma(cur)
                if nxt <= cur:
                    raise NonTermination(f"window of width {delta!r} cannot advance from dense point {cur!r}")
            chunks.append(np.array([nxt]))
            count += 1
            cur = nxt
        if count > max_steps:
            raise NonTermination(f"delta_fine exceeded {max_steps} steps at t={cur!r} (delta={delta!r})")
        while ci + 1 < len(scale.components) and cur > scale.components[ci].hi:
            ci += 1
    pts = np.concatenate(chunks)
    gv = g.eval_many(pts)
    bad = np.flatnonzero(np.diff(gv) <= 0)
    if len(bad):
        j = int(bad[0])
        raise GNotIncreasing(f"g({float(pts[j + 1])!r}) <= g({float(pts[j])!r})")
    part = Partition._trusted(scale, pts)
    return part, _certify(part, gv, delta)


def halve_and_refine(
    p: Partition,
    g: Expr | str,
    delta: float,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> tuple[Partition, DeltaFineCertificate]:
    """Common refinement of ``p`` with a fresh delta-fine partition.

    A refinement of a delta-fine partition is again delta-fine (a jump step has
    no scale point inside, and a small gap only shrinks), so the returned
    certificate describes the merged partition.
    """
    g = as_expr(g)
    q, _ = delta_fine(p.scale, g, p.a, p.b, delta, max_steps)
    merged = common_refinement(p, q)
    return merged, certify(merged, g, delta)


def _certify(p: Partition, gv: np.ndarray, delta: float) -> DeltaFineCertificate:
    dg = np.diff(gv)
    tol = 1e-12 * np.maximum(1.0, np.abs(gv[1:]))
    gap_small = dg <= delta + tol
    jump = np.zeros(len(dg), dtype=bool)
    need = ~gap_small
    if need.any():
        idx = np.flatnonzero(need)
        r = p.scale.rho_many(p.points[idx + 1], canonical=True)
        jump[idx] = r == p.points[idx]
    return DeltaFineCertificate(float(delta), gap_small, jump)


def certify(p: Partition, g: Expr | str, delta: float) -> DeltaFineCertificate:
    """Flags of every step of ``p`` with respect to ``delta``."""
    g = as_expr(g)
    return _certify(p, g.eval_many(p.points), delta)


def verify_certificate(p: Partition, g: Expr | str, cert: DeltaFineCertificate) -> bool:
    """Recheck a certificate point by point with scalar arithmetic.

    Every step must carry a flag, and every flag must be true.
    """
    g = as_expr(g)
    pts = p.points.tolist()
    if len(cert.gap_small) != len(pts) - 1:
        return False
    for j in range(1, len(pts)):
        g0, g1 = g.evaluate(pts[j - 1]), g.evaluate(pts[j])
        small = g1 - g0 <= cert.delta + snap_tol(g1)
        jump = p.scale.rho(pts[j]) == pts[j - 1]
        if cert.gap_small[j - 1] and not small:
            return False
        if cert.jump_step[j - 1] and not jump:
            return False
        if not (small or jump):
            return False
    return True
