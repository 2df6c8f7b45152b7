"""numba implementations of the array kernels (one interpreter loop per element)."""

import math

import numpy as np
from numba import njit

NAME = "numba"


@njit(cache=True)
def _ipow(x, n):
    result = 1.0
    base = x
    while n:
        if n & 1:
            result *= base
        n >>= 1
        if n:
            base *= base
    return result


@njit(cache=True)
def _eval1(ops, args, consts, stack, t):
    sp = 0
    for k in range(ops.shape[0]):
        op = ops[k]
        if op == 0:
            stack[sp] = consts[args[k]]
            sp += 1
        elif op == 1:
            stack[sp] = t
            sp += 1
        elif op == 2:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] + stack[sp]
        elif op == 3:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] - stack[sp]
        elif op == 4:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] * stack[sp]
        elif op == 5:
            sp -= 1
            d = stack[sp]
            if d == 0.0:
                return np.nan
            stack[sp - 1] = stack[sp - 1] / d
        elif op == 6:
            stack[sp - 1] = -stack[sp - 1]
        elif op == 7:
            n = args[k]
            x = stack[sp - 1]
            if n >= 0:
                stack[sp - 1] = _ipow(x, n)
            else:
                if x == 0.0:
                    return np.nan
                stack[sp - 1] = 1.0 / _ipow(x, -n)
        elif op == 8:
            stack[sp - 1] = math.exp(stack[sp - 1])
        elif op == 9:
            x = stack[sp - 1]
            if not x > 0.0:
                return np.nan
            stack[sp - 1] = math.log(x)
        else:
            x = stack[sp - 1]
            if not x >= 0.0:
                return np.nan
            stack[sp - 1] = math.sqrt(x)
    return stack[0]


@njit(cache=True)
def _eval_points(ops, args, consts, depth, ts):
    n = ts.shape[0]
    out = np.empty(n)
    stack = np.empty(depth)
    for i in range(n):
        out[i] = _eval1(ops, args, consts, stack, ts[i])
    return out


@njit(cache=True)
def _enc1(ops, args, consts, slo, shi, lo, hi):
    sp = 0
    for k in range(ops.shape[0]):
        op = ops[k]
        if op == 0:
            c = consts[args[k]]
            slo[sp] = c
            shi[sp] = c
            sp += 1
        elif op == 1:
            slo[sp] = lo
            shi[sp] = hi
            sp += 1
        elif op == 2:
            sp -= 1
            slo[sp - 1] = slo[sp - 1] + slo[sp]
            shi[sp - 1] = shi[sp - 1] + shi[sp]
        elif op == 3:
            sp -= 1
            a = slo[sp - 1] - shi[sp]
            b = shi[sp - 1] - slo[sp]
            slo[sp - 1] = a
            shi[sp - 1] = b
        elif op == 4:
            sp -= 1
            p1 = slo[sp - 1] * slo[sp]
            p2 = slo[sp - 1] * shi[sp]
            p3 = shi[sp - 1] * slo[sp]
            p4 = shi[sp - 1] * shi[sp]
            slo[sp - 1] = min(min(p1, p2), min(p3, p4))
            shi[sp - 1] = max(max(p1, p2), max(p3, p4))
        elif op == 5:
            sp -= 1
            c, d = slo[sp], shi[sp]
            if c <= 0.0 <= d:
                return np.nan, np.nan
            p1 = slo[sp - 1] / c
            p2 = slo[sp - 1] / d
            p3 = shi[sp - 1] / c
            p4 = shi[sp - 1] / d
            slo[sp - 1] = min(min(p1, p2), min(p3, p4))
            shi[sp - 1] = max(max(p1, p2), max(p3, p4))
        elif op == 6:
            a = -shi[sp - 1]
            shi[sp - 1] = -slo[sp - 1]
            slo[sp - 1] = a
        elif op == 7:
            n = args[k]
            a, b = slo[sp - 1], shi[sp - 1]
            m = n if n >= 0 else -n
            if n < 0 and a <= 0.0 <= b:
                return np.nan, np.nan
            if m == 0:
                plo, phi = 1.0, 1.0
            elif m % 2 == 1 or a >= 0.0:
                plo, phi = _ipow(a, m), _ipow(b, m)
            elif b <= 0.0:
                plo, phi = _ipow(b, m), _ipow(a, m)
            else:
                plo, phi = 0.0, max(_ipow(a, m), _ipow(b, m))
            if n < 0:
                plo, phi = 1.0 / phi, 1.0 / plo
            slo[sp - 1] = plo
            shi[sp - 1] = phi
        elif op == 8:
            slo[sp - 1] = math.exp(slo[sp - 1])
            shi[sp - 1] = math.exp(shi[sp - 1])
        elif op == 9:
            if not slo[sp - 1] > 0.0:
                return np.nan, np.nan
            slo[sp - 1] = math.log(slo[sp - 1])
            shi[sp - 1] = math.log(shi[sp - 1])
        else:
            if not slo[sp - 1] >= 0.0:
                return np.nan, np.nan
            slo[sp - 1] = math.sqrt(slo[sp - 1])
            shi[sp - 1] = math.sqrt(shi[sp - 1])
    return slo[0], shi[0]


@njit(cache=True)
def _eval_boxes(ops, args, consts, depth, lo, hi):
    n = lo.shape[0]
    olo = np.empty(n)
    ohi = np.empty(n)
    slo = np.empty(depth)
    shi = np.empty(depth)
    for i in range(n):
        a, b = _enc1(ops, args, consts, slo, shi, lo[i], hi[i])
        olo[i] = a
        ohi[i] = b
    return olo, ohi


@njit(cache=True)
def _invert(ops, args, consts, depth, lo, hi, y, ttol, gtol):
    # Illinois false position; a step that fails to halve the bracket is
    # followed by a bisection step
    n = y.shape[0]
    out = np.empty(n)
    stack = np.empty(depth)
    for i in range(n):
        a = lo[i]
        b = hi[i]
        yi = y[i]
        ga = _eval1(ops, args, consts, stack, a)
        gb = _eval1(ops, args, consts, stack, b)
        if ga != ga or gb != gb:
            out[i] = np.nan
            continue
        if gb <= yi:
            out[i] = b
            continue
        if ga > yi:
            out[i] = a
            continue
        gt = gtol * max(1.0, abs(yi))
        fa = ga - yi
        fb = gb - yi
        side = 0
        bisect = False
        while fa != 0.0:
            m = 0.5 * (a + b)
            if m <= a or m >= b:
                break
            if b - a <= ttol and gb - ga <= gt:
                break
            x = m
            if not bisect:
                xf = (a * fb - b * fa) / (fb - fa)
                if a < xf < b:
                    x = xf
            w = b - a
            gx = _eval1(ops, args, consts, stack, x)
            if gx != gx:
                a = np.nan
                break
            fx = gx - yi
            if fx <= 0.0:
                a = x
                ga = gx
                fa = fx
                if side == -1:
                    fb *= 0.5
                side = -1
            else:
                b = x
                gb = gx
                fb = fx
                if side == 1:
                    fa *= 0.5
                side = 1
            bisect = (not bisect) and b - a > 0.5 * w
        out[i] = a
    return out


def eval_points(prog, ts):
    ts = np.ascontiguousarray(ts, dtype=np.float64)
    return _eval_points(prog.ops, prog.args, prog.consts, prog.depth, ts)


def eval_boxes(prog, lo, hi):
    lo = np.ascontiguousarray(lo, dtype=np.float64)
    hi = np.ascontiguousarray(hi, dtype=np.float64)
    return _eval_boxes(prog.ops, prog.args, prog.consts, prog.depth, lo, hi)


def invert_increasing(prog, lo, hi, y, ttol, gtol):
    y = np.ascontiguousarray(y, dtype=np.float64)
    lo = np.ascontiguousarray(np.broadcast_to(lo, y.shape), dtype=np.float64)
    hi = np.ascontiguousarray(np.broadcast_to(hi, y.shape), dtype=np.float64)
    return _invert(prog.ops, prog.args, prog.consts, prog.depth, lo, hi, y, float(ttol), float(gtol))
