"""Seeded generators of random scales and expressions shared by the tests.

Scales live inside [0, 3] so that every integrator below is strictly
increasing on them.
"""

from __future__ import annotations

import numpy as np

from tsstieltjes import parse, parse_scale

# strictly increasing on [0, 3]
INTEGRATORS = ["t", "t^2", "t^3+t", "exp(t)", "2*t+t^2/2", "ln(1+t)", "sqrt(1+t)"]
# smooth and bounded on [0, 3]
INTEGRANDS = ["t", "t^2", "1+t", "exp(t)", "2-t", "t^3-t", "sqrt(1+t)", "1/(1+t)", "3", "-2*t^2+1"]
INCREASING = ["t", "t^2", "1+t", "exp(t)", "sqrt(1+t)", "t^3+t"]
DECREASING = ["2-t", "1/(1+t)", "-t^2", "exp(-t)"]


def scattered_scale(rng: np.random.Generator) -> str:
    n = int(rng.integers(2, 25))
    pts = np.unique(np.round(rng.uniform(0.0, 3.0, n), 3))
    if len(pts) < 2:
        pts = np.array([0.0, 3.0])
    return "points(" + ",".join(repr(float(p)) for p in pts) + ")"


def uniform_scale(rng: np.random.Generator) -> str:
    h = float(rng.choice([1.0, 0.5, 0.25, 0.125, 0.1]))
    n = int(rng.integers(1, int(3.0 / h) + 1))
    a = float(rng.choice([0.0, 0.5]))
    return f"uniform({a!r},{a + n * h!r},{h!r})"


def qscale_mixed(rng: np.random.Generator) -> str:
    q = float(rng.choice([1.5, 2.0, 3.0]))
    extra = rng.choice(["", "; points(1.5,2)", "; interval(1.5,2.5)", "; points(1.25); interval(2,3)"])
    return f"union(qscale({q!r}){extra})" if extra else f"qscale({q!r})"


def dense_mixed(rng: np.random.Generator) -> str:
    lo = float(rng.choice([0.0, 0.5, 1.0]))
    hi = lo + float(rng.choice([0.5, 1.0, 1.5]))
    parts = [f"interval({lo!r},{hi!r})"]
    if rng.random() < 0.7:
        parts.append(f"points({hi + 0.25!r},{hi + 0.5!r})")
    if lo > 0 and rng.random() < 0.5:
        parts.append(f"points({lo / 2!r})")
    return "union(" + "; ".join(parts) + ")" if len(parts) > 1 else parts[0]


def random_scale_text(rng: np.random.Generator, dense_share: float = 0.3) -> str:
    """A scale description; about ``dense_share`` of the draws contain
    intervals or clusters."""
    u = rng.random()
    if u < dense_share / 2:
        return dense_mixed(rng)
    if u < dense_share:
        return qscale_mixed(rng)
    if u < dense_share + (1 - dense_share) / 2:
        return scattered_scale(rng)
    return uniform_scale(rng)


def random_scale(rng: np.random.Generator, dense_share: float = 0.3):
    return parse_scale(random_scale_text(rng, dense_share))


def sample_scale_points(scale, rng: np.random.Generator, n: int = 6) -> np.ndarray:
    """Up to ``n`` scale points: all component edges plus random members."""
    pts = [scale.min, scale.max]
    for c in scale.components:
        pts += [c.lo, c.hi]
        if hasattr(c, "points"):
            pts += list(rng.choice(c.points, size=min(n, len(c.points)), replace=False))
        elif hasattr(c, "ratio"):
            pts += [c.point(c.start + int(k)) for k in rng.integers(0, 20, size=n)]
        else:
            pts += list(rng.uniform(c.lo, c.hi, size=n))
    return np.unique(np.array(pts, dtype=float))


def pick_endpoints(scale, rng: np.random.Generator) -> tuple[float, float]:
    pts = sample_scale_points(scale, rng)
    a, b = sorted(rng.choice(pts, size=2, replace=False).tolist())
    return a, b


def random_expr(rng: np.random.Generator, menu=INTEGRANDS):
    return parse(str(rng.choice(menu)))
