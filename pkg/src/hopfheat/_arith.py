"""Precision-generic elementwise math.

Kernels are written once against numpy arrays. In double precision they
are float64 arrays; in extended precision they are object arrays of
``gmpy2.mpfr`` values evaluated under a gmpy2 context of the requested
precision. The helpers here dispatch on dtype.
"""
import math

import gmpy2
import numpy as np

DOUBLE_BITS = 53

_UFUNCS = {}


def _obj_ufunc(name):
    f = _UFUNCS.get(name)
    if f is None:
        f = np.frompyfunc(getattr(gmpy2, name), 1, 1)
        _UFUNCS[name] = f
    return f


def is_mp(x):
    return isinstance(x, np.ndarray) and x.dtype == object


def _apply(name, npname, x):
    if is_mp(x):
        return _obj_ufunc(name)(x)
    if isinstance(x, gmpy2.mpfr):
        return getattr(gmpy2, name)(x)
    return getattr(np, npname)(x)


def exp(x):
    return _apply("exp", "exp", x)


def log(x):
    return _apply("log", "log", x)


def sin(x):
    return _apply("sin", "sin", x)


def cos(x):
    return _apply("cos", "cos", x)


def sinh(x):
    return _apply("sinh", "sinh", x)


def cosh(x):
    return _apply("cosh", "cosh", x)


def sqrt(x):
    return _apply("sqrt", "sqrt", x)


def acos(x):
    return _apply("acos", "arccos", x)


def acosh(x):
    return _apply("acosh", "arccosh", x)


def absolute(x):
    if is_mp(x):
        return np.frompyfunc(abs, 1, 1)(x)
    return np.abs(x)


def to_mp(x, bits):
    """Convert floats (exactly) to an mpfr object array at ``bits`` precision."""
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        conv = np.frompyfunc(lambda v: gmpy2.mpfr(v), 1, 1)
        return conv(np.asarray(x, dtype=float)).astype(object)


def to_float(x):
    if is_mp(x):
        return np.frompyfunc(float, 1, 1)(x).astype(float)
    return np.asarray(x, dtype=float)


def const_pi(bits=None):
    if bits is None:
        return math.pi
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        return gmpy2.const_pi()


def scalar(v, bits=None):
    """A scalar in the working arithmetic: float or mpfr."""
    if bits is None:
        return float(v)
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        return gmpy2.mpfr(v)


def working_precision(bits):
    """Context manager setting the gmpy2 working precision (no-op for doubles)."""
    if bits is None:
        return gmpy2.context(gmpy2.get_context())
    return gmpy2.context(gmpy2.get_context(), precision=int(bits))


def bits_for(cond, target_rel, margin_bits=24):
    """Bits needed so that roundoff amplified by ``cond`` stays below target."""
    c = np.maximum(np.asarray(cond, dtype=float), 1.0)
    need = np.ceil(np.log2(c) - math.log2(target_rel) + margin_bits)
    out = np.maximum(DOUBLE_BITS + 11, need).astype(int)
    return int(out) if out.ndim == 0 else out


def needs_extended(cond, target_rel, safety=64.0):
    """True when double precision cannot deliver ``target_rel`` at this conditioning."""
    return safety * np.asarray(cond, dtype=float) * 2.0 ** -DOUBLE_BITS > target_rel
