"""Closed bounded time scales built from isolated points, real intervals and
geometric clusters, with the jump operators and point queries used by the
partition and integration code.

All membership and equality tests use a snap tolerance of ``1e-12`` relative
(floored at ``1e-12`` absolute); any query value within that distance of a
scale point is treated as that point.  Values returned by the queries are
always *canonical* scale points, i.e. the floats produced by the component
that owns them.
"""

from __future__ import annotations

import bisect
import enum
import math
import re
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    ExprSyntaxError,
    InvalidRatio,
    InvalidScale,
    NotCommensurate,
    NotInScale,
    OutOfRange,
    TooManyPoints,
)

__all__ = [
    "SNAP_REL",
    "snap_tol",
    "BoxKind",
    "IsolatedPoints",
    "RealInterval",
    "GeometricCluster",
    "TimeScale",
    "make_qscale",
    "make_uniform",
    "parse_scale",
]

SNAP_REL = 1e-12


def snap_tol(x: float) -> float:
    return SNAP_REL * max(1.0, abs(x))


def _snap_tol_many(ts: np.ndarray) -> np.ndarray:
    return SNAP_REL * np.maximum(1.0, np.abs(ts))


class BoxKind(enum.Enum):
    """Which of the two time-scale integrals (delta or nabla) is meant."""

    DELTA = "delta"
    NABLA = "nabla"

    @classmethod
    def parse(cls, value: "BoxKind | str") -> "BoxKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown kind {value!r}; expected 'delta' or 'nabla'") from None


# --------------------------------------------------------------------------
# components
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class IsolatedPoints:
    """A finite, strictly increasing list of points."""

    points: tuple[float, ...]

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points)
        if not pts:
            raise InvalidScale("IsolatedPoints needs at least one point")
        if not all(math.isfinite(p) for p in pts):
            raise InvalidScale("points must be finite")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise InvalidScale("points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.points, dtype=float)
        arr.setflags(write=False)
        return arr

    @property
    def lo(self) -> float:
        return self.points[0]

    @property
    def hi(self) -> float:
        return self.points[-1]

    def locate(self, t: float) -> float | None:
        i = bisect.bisect_left(self.points, t)
        tol = snap_tol(t)
        best = None
        for j in (i - 1, i):
            if 0 <= j < len(self.points):
                d = abs(self.points[j] - t)
                if d <= tol and (best is None or d < abs(best - t)):
                    best = self.points[j]
        return best

    def succ(self, p: float) -> float | None:
        i = bisect.bisect_left(self.points, p)
        return self.points[i + 1] if i + 1 < len(self.points) else None

    def pred(self, p: float) -> float | None:
        i = bisect.bisect_left(self.points, p)
        return self.points[i - 1] if i > 0 else None

    def floor(self, x: float) -> float:
        i = bisect.bisect_right(self.points, x)
        return self.points[max(i - 1, 0)]

    def ceil(self, x: float) -> float:
        i = bisect.bisect_left(self.points, x)
        return self.points[min(i, len(self.points) - 1)]

    def between(self, lo: float, hi: float) -> np.ndarray | None:
        i = bisect.bisect_left(self.points, lo)
        j = bisect.bisect_right(self.points, hi)
        return self.array[i:j]

    def count_between(self, lo: float, hi: float) -> int | None:
        return max(0, bisect.bisect_right(self.points, hi) - bisect.bisect_left(self.points, lo))

    def clip(self, a: float, b: float):
        pts = self.between(a, b)
        return IsolatedPoints(tuple(pts)) if len(pts) else None

    def snap_many(self, ts: np.ndarray) -> np.ndarray:
        arr = self.array
        i = np.clip(np.searchsorted(arr, ts), 1, len(arr) - 1) if len(arr) > 1 else np.zeros(len(ts), int)
        if len(arr) > 1:
            left, right = arr[i - 1], arr[i]
            near = np.where(np.abs(ts - left) <= np.abs(right - ts), left, right)
        else:
            near = np.full(len(ts), arr[0])
        return np.where(np.abs(near - ts) <= _snap_tol_many(ts), near, np.nan)

    def succ_many(self, ps: np.ndarray) -> np.ndarray:
        arr = self.array
        i = np.searchsorted(arr, ps) + 1
        ok = i < len(arr)
        out = np.full(len(ps), np.nan)
        out[ok] = arr[i[ok]]
        return out

    def pred_many(self, ps: np.ndarray) -> np.ndarray:
        arr = self.array
        i = np.searchsorted(arr, ps) - 1
        ok = i >= 0
        out = np.full(len(ps), np.nan)
        out[ok] = arr[i[ok]]
        return out

    def describe(self) -> str:
        return "points(" + ",".join(repr(p) for p in self.points) + ")"


@dataclass(frozen=True)
class RealInterval:
    """The closed real interval ``[lo, hi]`` with ``lo < hi``."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise InvalidScale("interval endpoints must be finite")
        if not lo < hi:
            raise InvalidScale(f"interval needs lo < hi, got [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def locate(self, t: float) -> float | None:
        tol = snap_tol(t)
        if abs(t - self.lo) <= tol:
            return self.lo
        if abs(t - self.hi) <= tol:
            return self.hi
        if self.lo < t < self.hi:
            return float(t)
        return None

    def succ(self, p: float) -> float | None:
        return p if p < self.hi else None

    def pred(self, p: float) -> float | None:
        return p if p > self.lo else None

    def floor(self, x: float) -> float:
        return min(max(x, self.lo), self.hi)

    def ceil(self, x: float) -> float:
        return max(min(x, self.hi), self.lo)

    def between(self, lo: float, hi: float) -> np.ndarray | None:
        lo, hi = max(lo, self.lo), min(hi, self.hi)
        if lo > hi:
            return np.empty(0)
        if lo == hi:
            return np.array([lo])
        return None

    def count_between(self, lo: float, hi: float) -> int | None:
        pts = self.between(lo, hi)
        return None if pts is None else len(pts)

    def clip(self, a: float, b: float):
        lo, hi = max(a, self.lo), min(b, self.hi)
        if lo > hi:
            return None
        if lo == hi:
            return IsolatedPoints((lo,))
        return RealInterval(lo, hi)

    def snap_many(self, ts: np.ndarray) -> np.ndarray:
        tol = _snap_tol_many(ts)
        out = np.where((ts >= self.lo) & (ts <= self.hi), ts, np.nan)
        out = np.where(np.abs(ts - self.lo) <= tol, self.lo, out)
        return np.where(np.abs(ts - self.hi) <= tol, self.hi, out)

    def succ_many(self, ps: np.ndarray) -> np.ndarray:
        return np.where(ps < self.hi, ps, np.nan)

    def pred_many(self, ps: np.ndarray) -> np.ndarray:
        return np.where(ps > self.lo, ps, np.nan)

    def describe(self) -> str:
        return f"interval({self.lo!r},{self.hi!r})"


@dataclass(frozen=True)
class GeometricCluster:
    """``{limit} U {limit + anchor_offset * ratio**k : k >= start}``.

    Points decrease toward ``limit``, which belongs to the set.  ``start`` lets
    a clipped cluster keep the exact floats of the cluster it came from.
    """

    limit: float
    anchor_offset: float
    ratio: float
    start: int = field(default=0)

    def __post_init__(self):
        for name in ("limit", "anchor_offset", "ratio"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise InvalidScale(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.anchor_offset <= 0:
            raise InvalidScale("anchor_offset must be positive")
        if not 0.0 < self.ratio < 1.0:
            raise InvalidRatio(f"cluster ratio must lie in (0, 1), got {self.ratio}")
        if self.start < 0:
            raise InvalidScale("start index must be nonnegative")
        object.__setattr__(self, "start", int(self.start))

    def point(self, k: int) -> float:
        return self.limit + self.anchor_offset * self.ratio**k

    @property
    def lo(self) -> float:
        return self.limit

    @property
    def hi(self) -> float:
        return self.point(self.start)

    def _index_floor(self, x: float) -> int:
        """Smallest k >= start with point(k) <= x; requires x > limit."""
        if x >= self.hi:
            return self.start
        k = math.ceil(math.log((x - self.limit) / self.anchor_offset) / math.log(self.ratio))
        k = max(k, self.start)
        while k > self.start and self.point(k - 1) <= x:
            k -= 1
        while self.point(k) > x:
            k += 1
        return k

    def _index_ceil(self, x: float) -> int:
        """Largest k >= start with point(k) >= x; requires limit < x <= hi."""
        k = math.floor(math.log((x - self.limit) / self.anchor_offset) / math.log(self.ratio))
        k = max(k, self.start)
        while self.point(k + 1) >= x:
            k += 1
        while k > self.start and self.point(k) < x:
            k -= 1
        return k

    def index(self, p: float) -> int:
        """Index k of a canonical non-limit point."""
        return self._index_floor(p)

    def _near_limit(self, t: float) -> bool:
        return abs(t - self.limit) <= snap_tol(self.limit)

    def locate(self, t: float) -> float | None:
        if self._near_limit(t) or abs(t - self.limit) <= snap_tol(t):
            return self.limit
        if t < self.limit or t > self.hi + snap_tol(t):
            return None
        k = self._index_floor(min(t, self.hi))
        tol = snap_tol(t)
        cands = [self.point(k)]
        if k > self.start:
            cands.append(self.point(k - 1))
        best = min(cands, key=lambda p: abs(p - t))
        return best if abs(best - t) <= tol else None

    def succ(self, p: float) -> float | None:
        if p == self.limit:
            return self.limit
        k = self.index(p)
        return None if k == self.start else self.point(k - 1)

    def pred(self, p: float) -> float | None:
        if p == self.limit:
            return None
        q = self.point(self.index(p) + 1)
        return self.limit if self._near_limit(q) else q

    def floor(self, x: float) -> float:
        if x <= self.limit:
            return self.limit
        p = self.point(self._index_floor(x))
        return self.limit if self._near_limit(p) else p

    def ceil(self, x: float) -> float:
        if x <= self.limit:
            return self.limit
        return self.point(self._index_ceil(min(x, self.hi)))

    def _index_range(self, lo: float, hi: float) -> tuple[int, int] | None:
        """Inclusive index range of points in [lo, hi] for lo > limit."""
        hi = min(hi, self.hi)
        if lo > hi:
            return None
        k_top = self._index_floor(hi)
        k_bot = self._index_ceil(lo)
        if k_bot < k_top:
            return None
        return k_top, k_bot

    def between(self, lo: float, hi: float) -> np.ndarray | None:
        lo, hi = max(lo, self.limit), min(hi, self.hi)
        if lo > hi:
            return np.empty(0)
        if lo <= self.limit:
            return np.array([self.limit]) if hi <= self.limit else None
        rng = self._index_range(lo, hi)
        if rng is None:
            return np.empty(0)
        return np.array([self.point(k) for k in range(rng[1], rng[0] - 1, -1)])

    def count_between(self, lo: float, hi: float) -> int | None:
        lo, hi = max(lo, self.limit), min(hi, self.hi)
        if lo > hi:
            return 0
        if lo <= self.limit:
            return 1 if hi <= self.limit else None
        rng = self._index_range(lo, hi)
        return 0 if rng is None else rng[1] - rng[0] + 1

    def clip(self, a: float, b: float):
        lo, hi = max(a, self.limit), min(b, self.hi)
        if lo > hi:
            return None
        if lo > self.limit:
            pts = self.between(lo, hi)
            return IsolatedPoints(tuple(pts)) if len(pts) else None
        if hi <= self.limit:
            return IsolatedPoints((self.limit,))
        return GeometricCluster(self.limit, self.anchor_offset, self.ratio, self._index_floor(hi))

    def snap_many(self, ts: np.ndarray) -> np.ndarray:
        return np.array([np.nan if (p := self.locate(t)) is None else p for t in ts.tolist()])

    def succ_many(self, ps: np.ndarray) -> np.ndarray:
        return np.array([np.nan if (s := self.succ(p)) is None else s for p in ps.tolist()])

    def pred_many(self, ps: np.ndarray) -> np.ndarray:
        return np.array([np.nan if (s := self.pred(p)) is None else s for p in ps.tolist()])

    def describe(self) -> str:
        if self.start:
            return f"cluster({self.limit!r},{self.anchor_offset * self.ratio**self.start!r},{self.ratio!r})"
        return f"cluster({self.limit!r},{self.anchor_offset!r},{self.ratio!r})"


Component = IsolatedPoints | RealInterval | GeometricCluster


# --------------------------------------------------------------------------
# the time scale
# --------------------------------------------------------------------------


class TimeScale:
    """An ordered union of pairwise disjoint components.

    Parameters
    ----------
    components : sequence of IsolatedPoints, RealInterval or GeometricCluster
        Must already be ordered: every point of component ``i`` lies strictly
        below every point of component ``i + 1``.  Use :meth:`union` to build a
        scale from overlapping or unordered pieces.
    """

    def __init__(self, components):
        comps = tuple(components)
        if not comps:
            raise InvalidScale("a time scale needs at least one component")
        for c in comps:
            if not isinstance(c, (IsolatedPoints, RealInterval, GeometricCluster)):
                raise InvalidScale(f"not a scale component: {c!r}")
        for left, right in zip(comps, comps[1:]):
            if not left.hi < right.lo:
                raise InvalidScale("components must be disjoint and ordered")
        self.components = comps
        self._los = [c.lo for c in comps]
        self._his = [c.hi for c in comps]

    # -- construction -------------------------------------------------------

    @classmethod
    def union(cls, *parts: "TimeScale | Component") -> "TimeScale":
        comps = []
        for p in parts:
            comps.extend(p.components if isinstance(p, TimeScale) else [p])
        return cls(_normalize(comps))

    def __eq__(self, other):
        return isinstance(other, TimeScale) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return f"TimeScale({self.describe()})"

    def describe(self) -> str:
        parts = [c.describe() for c in self.components]
        return parts[0] if len(parts) == 1 else "union(" + "; ".join(parts) + ")"

    @property
    def min(self) -> float:
        return self._los[0]

    @property
    def max(self) -> float:
        return self._his[-1]

    @property
    def is_finite(self) -> bool:
        return all(isinstance(c, IsolatedPoints) for c in self.components)

    # -- point queries ------------------------------------------------------

    def component_index(self, t: float) -> int | None:
        i = bisect.bisect_left(self._his, t - snap_tol(t))
        if i < len(self.components) and self._los[i] - snap_tol(t) <= t:
            return i
        return None

    def locate(self, t: float) -> tuple[int, float]:
        """Return ``(component index, canonical point)`` or raise NotInScale."""
        t = float(t)
        i = self.component_index(t)
        if i is not None:
            p = self.components[i].locate(t)
            if p is not None:
                return i, p
            # a point just above a component's top may belong to the next one
            if i + 1 < len(self.components):
                p = self.components[i + 1].locate(t)
                if p is not None:
                    return i + 1, p
        raise NotInScale(f"{t!r} is not a point of the time scale")

    def contains(self, t: float) -> bool:
        try:
            self.locate(t)
        except NotInScale:
            return False
        return True

    def snap(self, t: float) -> float:
        return self.locate(t)[1]

    def sigma(self, t: float) -> float:
        """Forward jump: the least scale point above ``t`` (``t`` itself at the max)."""
        i, p = self.locate(t)
        s = self.components[i].succ(p)
        if s is not None:
            return s
        return self._los[i + 1] if i + 1 < len(self.components) else p

    def rho(self, t: float) -> float:
        """Backward jump: the greatest scale point below ``t`` (``t`` itself at the min)."""
        i, p = self.locate(t)
        s = self.components[i].pred(p)
        if s is not None:
            return s
        return self._his[i - 1] if i > 0 else p

    def mu(self, t: float) -> float:
        return self.sigma(t) - self.snap(t)

    def nu(self, t: float) -> float:
        return self.snap(t) - self.rho(t)

    def floor_point(self, x: float) -> float:
        """Largest scale point ``<= x`` (``x`` snapped to a nearby point first)."""
        x = float(x)
        if x < self.min - snap_tol(x):
            raise OutOfRange(f"{x!r} lies below the time scale")
        try:
            return self.locate(x)[1]
        except NotInScale:
            pass
        i = bisect.bisect_right(self._los, x) - 1
        return self.components[i].floor(x)

    def ceil_point(self, x: float) -> float:
        """Smallest scale point ``>= x`` (``x`` snapped to a nearby point first)."""
        x = float(x)
        if x > self.max + snap_tol(x):
            raise OutOfRange(f"{x!r} lies above the time scale")
        try:
            return self.locate(x)[1]
        except NotInScale:
            pass
        i = bisect.bisect_left(self._his, x)
        return self.components[i].ceil(x)

    def floor_strict(self, x: float) -> float:
        """Largest scale point ``<= x`` without snapping; ``x >= min`` required."""
        i = bisect.bisect_right(self._los, x) - 1
        if i < 0:
            raise OutOfRange(f"{x!r} lies below the time scale")
        return self.components[i].floor(x)

    def enumerate_between(self, lo: float, hi: float, cap: int = 100_000) -> np.ndarray:
        """All scale points in ``[lo, hi]``.

        Raises
        ------
        TooManyPoints
            If the set is infinite (a dense interval or a cluster limit lies
            inside) or has more than ``cap`` elements.
        """
        if lo > hi:
            raise ValueError("enumerate_between needs lo <= hi")
        lo_w, hi_w = lo - snap_tol(lo), hi + snap_tol(hi)
        total = 0
        for c in self.components:
            if c.hi < lo_w or c.lo > hi_w:
                continue
            n = c.count_between(lo_w, hi_w)
            if n is None:
                raise TooManyPoints(f"infinitely many scale points in [{lo}, {hi}]")
            total += n
            if total > cap:
                raise TooManyPoints(f"more than {cap} scale points in [{lo}, {hi}]")
        out = [c.between(lo_w, hi_w) for c in self.components if not (c.hi < lo_w or c.lo > hi_w)]
        return np.concatenate(out) if out else np.empty(0)

    def count_between(self, lo: float, hi: float) -> int | None:
        """Number of scale points in ``[lo, hi]``; ``None`` when infinite."""
        lo_w, hi_w = lo - snap_tol(lo), hi + snap_tol(hi)
        total = 0
        for c in self.components:
            if c.hi < lo_w or c.lo > hi_w:
                continue
            n = c.count_between(lo_w, hi_w)
            if n is None:
                return None
            total += n
        return total

    def restrict(self, a: float, b: float) -> "TimeScale":
        """The scale ``T ∩ [a, b]`` for scale points ``a <= b``."""
        a, b = self.snap(a), self.snap(b)
        if a > b:
            raise ValueError("restrict needs a <= b")
        comps = [c.clip(a, b) for c in self.components if not (c.hi < a or c.lo > b)]
        return TimeScale([c for c in comps if c is not None])

    def box_subinterval(self, lo: float, hi: float, kind: BoxKind | str) -> tuple[float, float]:
        """Real hull of ``[lo, rho(hi)]`` (delta) or ``[sigma(lo), hi]`` (nabla)."""
        kind = BoxKind.parse(kind)
        lo, hi = self.snap(lo), self.snap(hi)
        if not lo < hi:
            raise ValueError("box_subinterval needs lo < hi")
        if kind is BoxKind.DELTA:
            return lo, self.rho(hi)
        return self.sigma(lo), hi

    # -- vectorized variants -----------------------------------------------

    def _masks(self, ts: np.ndarray):
        tol = _snap_tol_many(ts)
        for i, c in enumerate(self.components):
            m = (ts >= c.lo - tol) & (ts <= c.hi + tol)
            if m.any():
                yield i, c, m

    def snap_many(self, ts, strict: bool = True) -> np.ndarray:
        """Canonical points for every entry of ``ts`` (NaN for non-members
        when ``strict`` is false)."""
        ts = np.asarray(ts, dtype=float)
        out = np.full(ts.shape, np.nan)
        for _, c, m in self._masks(ts):
            hit = np.isnan(out) & m
            if hit.any():
                out[hit] = c.snap_many(ts[hit])
        if strict and np.isnan(out).any():
            bad = float(ts[np.isnan(out)][0])
            raise NotInScale(f"{bad!r} is not a point of the time scale")
        return out

    def _jump_many(self, ps: np.ndarray, forward: bool, canonical: bool) -> np.ndarray:
        if not canonical:
            ps = self.snap_many(ps)
        out = np.empty_like(ps)
        n = len(self.components)
        for i, c in enumerate(self.components):
            m = (ps >= c.lo) & (ps <= c.hi)
            if not m.any():
                continue
            sub = ps[m]
            nxt = c.succ_many(sub) if forward else c.pred_many(sub)
            miss = np.isnan(nxt)
            if miss.any():
                if forward:
                    nxt[miss] = self._los[i + 1] if i + 1 < n else sub[miss]
                else:
                    nxt[miss] = self._his[i - 1] if i > 0 else sub[miss]
            out[m] = nxt
        return out

    def sigma_many(self, ts, canonical: bool = False) -> np.ndarray:
        """Vectorized :meth:`sigma`; ``canonical=True`` skips snapping for
        inputs that are already canonical scale points."""
        return self._jump_many(np.asarray(ts, dtype=float), True, canonical)

    def rho_many(self, ts, canonical: bool = False) -> np.ndarray:
        return self._jump_many(np.asarray(ts, dtype=float), False, canonical)


def _normalize(comps) -> list:
    """Merge overlapping pieces into ordered, disjoint components."""
    intervals = sorted(((c.lo, c.hi) for c in comps if isinstance(c, RealInterval)))
    merged: list[list[float]] = []
    for lo, hi in intervals:
        if merged and lo <= merged[-1][1] + snap_tol(lo):
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    ivs = [RealInterval(lo, hi) for lo, hi in merged]

    clusters = []
    for cl in sorted((c for c in comps if isinstance(c, GeometricCluster)), key=lambda c: c.lo):
        for iv in ivs:
            if iv.hi < cl.lo or iv.lo > cl.hi:
                continue
            if abs(iv.lo - cl.hi) <= snap_tol(cl.hi):
                cl = GeometricCluster(cl.limit, cl.anchor_offset, cl.ratio, cl.start + 1)
            else:
                raise InvalidScale("a cluster overlaps an interval")
        if clusters and not clusters[-1].hi < cl.lo:
            raise InvalidScale("clusters overlap")
        clusters.append(cl)

    big = sorted(ivs + clusters, key=lambda c: c.lo)
    for left, right in zip(big, big[1:]):
        if not left.hi < right.lo:
            raise InvalidScale("components overlap")

    pts = sorted({p for c in comps if isinstance(c, IsolatedPoints) for p in c.points})
    groups: list[list[float]] = [[] for _ in range(len(big) + 1)]
    for p in pts:
        j = bisect.bisect_right([c.lo - snap_tol(c.lo) for c in big], p)
        if j > 0 and p <= big[j - 1].hi + snap_tol(p):
            if big[j - 1].locate(p) is None:
                raise InvalidScale(f"point {p!r} interleaves with a cluster")
            continue
        g = groups[j]
        if g and abs(p - g[-1]) <= snap_tol(p):
            continue
        g.append(p)

    out: list = []
    for j, g in enumerate(groups):
        if g:
            out.append(IsolatedPoints(tuple(g)))
        if j < len(big):
            out.append(big[j])
    return out


# --------------------------------------------------------------------------
# factories
# --------------------------------------------------------------------------


def make_qscale(q: float) -> TimeScale:
    """The part of the closure of ``q**Z`` inside ``[0, 1]``."""
    q = float(q)
    if not q > 1.0:
        raise InvalidRatio(f"qscale needs q > 1, got {q}")
    return TimeScale([GeometricCluster(0.0, 1.0, 1.0 / q)])


def make_uniform(a: float, b: float, h: float) -> TimeScale:
    """The grid ``{a, a + h, ..., b}``."""
    a, b, h = float(a), float(b), float(h)
    if not h > 0:
        raise NotCommensurate(f"step must be positive, got {h}")
    ratio = (b - a) / h
    n = round(ratio)
    if n < 1 or abs(ratio - n) > SNAP_REL * max(1.0, abs(ratio)):
        raise NotCommensurate(f"({b} - {a}) / {h} is not a positive integer")
    pts = [a + k * h for k in range(n)] + [b]
    return TimeScale([IsolatedPoints(tuple(pts))])


# --------------------------------------------------------------------------
# scale description grammar
# --------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[(),;/]))"
)


def _tokenize(text: str):
    pos = 0
    toks = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError(pos, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _ScaleParser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if (kind and tok[0] != kind) or (value and tok[1] != value):
            want = value or kind
            got = tok[1] or "end of input"
            raise ExprSyntaxError(tok[2], f"expected {want!r}, got {got!r}")
        self.i += 1
        return tok

    def number(self) -> float:
        tok = self.take("num")
        val = float(tok[1])
        if self.peek()[1] == "/":
            self.take("op", "/")
            den = self.take("num")
            if float(den[1]) == 0:
                raise ExprSyntaxError(den[2], "zero denominator")
            val = val / float(den[1])
        return val

    def numbers(self) -> list[float]:
        vals = [self.number()]
        while self.peek()[1] == ",":
            self.take("op", ",")
            vals.append(self.number())
        return vals

    def scale(self) -> TimeScale:
        _, name, pos = self.take("name")
        self.take("op", "(")
        if name == "union":
            parts = [self.scale()]
            while self.peek()[1] == ";":
                self.take("op", ";")
                parts.append(self.scale())
            self.take("op", ")")
            return TimeScale.union(*parts)
        args = self.numbers()
        self.take("op", ")")
        arity = {"points": None, "uniform": 3, "qscale": 1, "interval": 2, "cluster": 3}
        if name not in arity:
            raise ExprSyntaxError(pos, f"unknown scale form {name!r}")
        if arity[name] is not None and len(args) != arity[name]:
            raise ExprSyntaxError(pos, f"{name} takes {arity[name]} arguments, got {len(args)}")
        if name == "points":
            return TimeScale.union(IsolatedPoints(tuple(sorted(set(args)))))
        if name == "uniform":
            return make_uniform(*args)
        if name == "qscale":
            return make_qscale(args[0])
        if name == "interval":
            return TimeScale([RealInterval(*args)])
        return TimeScale([GeometricCluster(*args)])


def parse_scale(text: str) -> TimeScale:
    """Parse a scale description such as ``union(qscale(2); interval(1, 2))``.

    Forms: ``points(x, ...)``, ``uniform(a, b, h)``, ``qscale(q)``,
    ``interval(lo, hi)``, ``cluster(limit, offset, ratio)`` and
    ``union(s1; s2; ...)``.  Numbers may be integers, decimals or ``p/q``.
    """
    p = _ScaleParser(text)
    ts = p.scale()
    p.take("end")
    return ts


def parse_number(text: str) -> float:
    """Parse a single numeric literal of the scale grammar (``3``, ``0.5``, ``1/4``)."""
    p = _ScaleParser(str(text))
    v = p.number()
    p.take("end")
    return v
