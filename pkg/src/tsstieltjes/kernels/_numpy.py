"""Pure numpy implementations of the array kernels.

The program is interpreted once per call with whole-array operations.  Integer
powers use the same square-and-multiply sequence as the numba backend, so both
backends agree bit for bit on rational expressions; ``exp``/``ln`` go through
numpy's ufuncs and may differ from libm in the last place.
"""

import numpy as np

NAME = "numpy"

_MAX_ITER = 4400


def _ipow(x, n):
    result = np.ones_like(x)
    base = x
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


def _eval(prog, t):
    ops, args, consts = prog.ops.tolist(), prog.args.tolist(), prog.consts
    n = t.shape[0]
    bad = np.zeros(n, dtype=bool)
    stack = []
    with np.errstate(all="ignore"):
        for op, arg in zip(ops, args):
            if op == 0:
                stack.append(np.full(n, consts[arg]))
            elif op == 1:
                stack.append(t)
            elif op == 6:
                stack.append(-stack.pop())
            elif op == 7:
                x = stack.pop()
                if arg >= 0:
                    stack.append(_ipow(x, arg))
                else:
                    z = x == 0.0
                    bad |= z
                    stack.append(1.0 / _ipow(np.where(z, 1.0, x), -arg))
            elif op == 8:
                stack.append(np.exp(stack.pop()))
            elif op == 9:
                x = stack.pop()
                neg = ~(x > 0.0)
                bad |= neg
                stack.append(np.log(np.where(neg, 1.0, x)))
            elif op == 10:
                x = stack.pop()
                neg = ~(x >= 0.0)
                bad |= neg
                stack.append(np.sqrt(np.where(neg, 0.0, x)))
            else:
                b = stack.pop()
                a = stack.pop()
                if op == 2:
                    stack.append(a + b)
                elif op == 3:
                    stack.append(a - b)
                elif op == 4:
                    stack.append(a * b)
                else:
                    z = b == 0.0
                    bad |= z
                    stack.append(a / np.where(z, 1.0, b))
    out = np.array(stack[0], dtype=float, copy=True)
    out[bad] = np.nan
    return out


def eval_points(prog, ts):
    return _eval(prog, np.asarray(ts, dtype=np.float64))


def _minmax4(p1, p2, p3, p4):
    return (
        np.minimum(np.minimum(p1, p2), np.minimum(p3, p4)),
        np.maximum(np.maximum(p1, p2), np.maximum(p3, p4)),
    )


def eval_boxes(prog, lo, hi):
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    ops, args, consts = prog.ops.tolist(), prog.args.tolist(), prog.consts
    n = lo.shape[0]
    bad = np.zeros(n, dtype=bool)
    stack = []
    with np.errstate(all="ignore"):
        for op, arg in zip(ops, args):
            if op == 0:
                c = np.full(n, consts[arg])
                stack.append((c, c))
            elif op == 1:
                stack.append((lo, hi))
            elif op == 6:
                a, b = stack.pop()
                stack.append((-b, -a))
            elif op == 7:
                a, b = stack.pop()
                m = abs(arg)
                if arg < 0:
                    bad |= (a <= 0.0) & (b >= 0.0)
                if m == 0:
                    plo = phi = np.ones(n)
                elif m % 2 == 1:
                    plo, phi = _ipow(a, m), _ipow(b, m)
                else:
                    pa, pb = _ipow(a, m), _ipow(b, m)
                    plo = np.where(a >= 0.0, pa, np.where(b <= 0.0, pb, 0.0))
                    phi = np.where(a >= 0.0, pb, np.where(b <= 0.0, pa, np.maximum(pa, pb)))
                if arg < 0:
                    plo, phi = 1.0 / phi, 1.0 / plo
                stack.append((plo, phi))
            elif op == 8:
                a, b = stack.pop()
                stack.append((np.exp(a), np.exp(b)))
            elif op == 9:
                a, b = stack.pop()
                neg = ~(a > 0.0)
                bad |= neg
                stack.append((np.log(np.where(neg, 1.0, a)), np.log(np.where(neg, 1.0, b))))
            elif op == 10:
                a, b = stack.pop()
                neg = ~(a >= 0.0)
                bad |= neg
                stack.append((np.sqrt(np.where(neg, 0.0, a)), np.sqrt(np.where(neg, 0.0, b))))
            else:
                c, d = stack.pop()
                a, b = stack.pop()
                if op == 2:
                    stack.append((a + c, b + d))
                elif op == 3:
                    stack.append((a - d, b - c))
                elif op == 4:
                    stack.append(_minmax4(a * c, a * d, b * c, b * d))
                else:
                    z = (c <= 0.0) & (d >= 0.0)
                    bad |= z
                    c = np.where(z, 1.0, c)
                    d = np.where(z, 1.0, d)
                    stack.append(_minmax4(a / c, a / d, b / c, b / d))
    olo = np.array(stack[0][0], dtype=float, copy=True)
    ohi = np.array(stack[0][1], dtype=float, copy=True)
    olo[bad] = np.nan
    ohi[bad] = np.nan
    return olo, ohi


def invert_increasing(prog, lo, hi, y, ttol, gtol):
    # same Illinois / bisection scheme as the numba kernel, over an active set
    y = np.asarray(y, dtype=np.float64)
    a = np.array(np.broadcast_to(lo, y.shape), dtype=np.float64)
    b = np.array(np.broadcast_to(hi, y.shape), dtype=np.float64)
    ga = _eval(prog, a)
    gb = _eval(prog, b)
    out = a.copy()
    nan = np.isnan(ga) | np.isnan(gb)
    top = ~nan & (gb <= y)
    out[top] = b[top]
    out[nan] = np.nan
    act = np.flatnonzero(~nan & ~top & ~(ga > y))
    gt = gtol * np.maximum(1.0, np.abs(y))
    fa = ga - y
    fb = gb - y
    side = np.zeros(y.shape, dtype=np.int8)
    bis = np.zeros(y.shape, dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(_MAX_ITER):
            if act.size == 0:
                break
            aa, bb = a[act], b[act]
            m = 0.5 * (aa + bb)
            done = (fa[act] == 0.0) | (m <= aa) | (m >= bb) | ((bb - aa <= ttol) & (gb[act] - ga[act] <= gt[act]))
            keep = ~done
            act, aa, bb, m = act[keep], aa[keep], bb[keep], m[keep]
            if act.size == 0:
                break
            faa, fbb = fa[act], fb[act]
            xf = (aa * fbb - bb * faa) / (fbb - faa)
            x = np.where(~bis[act] & (xf > aa) & (xf < bb), xf, m)
            w = bb - aa
            gx = _eval(prog, x)
            broken = np.isnan(gx)
            if broken.any():
                a[act[broken]] = np.nan
                keep = ~broken
                act, x, gx, w = act[keep], x[keep], gx[keep], w[keep]
            fx = gx - y[act]
            below = fx <= 0.0
            ia, ib = act[below], act[~below]
            a[ia], ga[ia], fa[ia] = x[below], gx[below], fx[below]
            fb[ia] = np.where(side[ia] == -1, 0.5 * fb[ia], fb[ia])
            side[ia] = -1
            b[ib], gb[ib], fb[ib] = x[~below], gx[~below], fx[~below]
            fa[ib] = np.where(side[ib] == 1, 0.5 * fa[ib], fa[ib])
            side[ib] = 1
            bis[act] = ~bis[act] & (b[act] - a[act] > 0.5 * w)
    mid = ~nan & ~top
    out[mid] = a[mid]
    return out
