"""Measure-preserving flows and their exact time averages.

Three flow kinds:

* rotation  x -> x + t*theta mod 1 on the circle; the time average has a
            closed form through the periodic antiderivative, so no time
            discretization is ever involved.
* step      T_t = S^floor(t/h) for a weight-preserving atom permutation S;
            the integrand is piecewise constant in time, so the average is
            a finite sum.
* identity  T_t = id on any space.

Wrap counts floor(t*theta) and floor(t/h) are taken in extended precision:
a double-precision product can land on the wrong side of an integer and
misassign every piece of the result.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .functions import CircleFunction, AtomFunction, merge_sum, DEGREE_CAP
from .fields import PolyField, SqrtPolyField, GenericField, AtomField
from .spaces import circle_space

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _split_product(a, b):
    """floor and fractional part of a*b computed in extended precision."""
    prod = np.longdouble(a) * np.longdouble(b)
    n = int(np.floor(prod))
    frac = float(prod - n)
    if frac >= 1.0 - 1e-14:
        n += 1
        frac = 0.0
    elif frac < 1e-14:
        frac = 0.0
    return n, frac


def _split_ratio(t, h):
    """floor and remainder of t/h, snapping to exact multiples."""
    ratio = np.longdouble(t) / np.longdouble(h)
    n = int(np.floor(ratio))
    rem = float((np.longdouble(t) - np.longdouble(n) * np.longdouble(h)))
    if rem >= h * (1.0 - 1e-13):
        n += 1
        rem = 0.0
    elif rem < h * 1e-13:
        rem = 0.0
    return n, rem


def _perm_power(perm, n):
    result = np.arange(perm.size)
    base = perm.copy()
    while n > 0:
        if n & 1:
            result = base[result]
        n >>= 1
        base = base[base]
    return result


class Flow:
    """A one-sided measure-preserving flow on a concrete space."""

    def __init__(self, kind, space, theta=None, perm=None, h=None):
        self.kind = kind
        self.space = space
        self.theta = theta
        self.h = h
        self.perm = perm
        if kind == "rotation":
            if space.kind != "circle":
                raise ValueError("rotation flows live on the circle")
            if not (0.0 < theta < 1.0):
                raise ValueError("rotation angle must lie in (0, 1)")
        elif kind == "step":
            if space.kind == "circle":
                raise ValueError("step flows need an atomic space")
            p = np.asarray(perm, dtype=int)
            if sorted(p.tolist()) != list(range(space.natoms)):
                raise ValueError("base map must be a permutation of the atoms")
            if np.max(np.abs(space.weights[p] - space.weights)) > 1e-12:
                raise ValueError("base map must preserve atom weights")
            if not (h is not None and h > 0.0):
                raise ValueError("step width must be positive")
            self.perm = p
        elif kind != "identity":
            raise ValueError(f"unknown flow kind {kind!r}")

    @property
    def ergodic(self):
        """Whether time averages converge to the space mean.

        Rotations by an angle not close to a small-denominator rational
        are treated as ergodic; step flows must cycle through all atoms
        of a uniformly weighted space.
        """
        if self.kind == "rotation":
            approx = Fraction(self.theta).limit_denominator(64)
            return abs(float(approx) - self.theta) > 1e-12
        if self.kind == "step":
            seen = {0}
            a = int(self.perm[0])
            while a not in seen:
                seen.add(a)
                a = int(self.perm[a])
            uniform = np.ptp(self.space.weights) == 0.0
            return len(seen) == self.space.natoms and uniform
        return False

    def orbit_period(self):
        """Smallest n >= 1 with S^n = id (step flows only)."""
        if self.kind != "step":
            raise ValueError("orbit_period applies to step flows")
        n = 1
        cur = self.perm
        ident = np.arange(self.perm.size)
        while not np.array_equal(cur, ident):
            cur = self.perm[cur]
            n += 1
        return n

    def __repr__(self):
        if self.kind == "rotation":
            return f"Flow(rotation, theta={self.theta})"
        if self.kind == "step":
            return f"Flow(step, h={self.h}, {self.space.natoms} atoms)"
        return "Flow(identity)"


def rotation_flow(theta=GOLDEN, space=None):
    return Flow("rotation", space if space is not None else circle_space(),
                theta=float(theta))


def step_flow(space, perm, h=1.0):
    return Flow("step", space, perm=perm, h=float(h))


def shift_perm(space):
    """Cyclic shift on a discrete space, or on the cyclic factor of a product."""
    if space.kind == "discrete":
        return (np.arange(space.natoms) + 1) % space.natoms
    if space.kind == "product":
        m1 = space.cyclic_size
        m2 = space.factor_weights.size
        i, j = np.divmod(np.arange(space.natoms), m2)
        return ((i + 1) % m1) * m2 + j
    raise ValueError("shift permutations need an atomic space")


def identity_flow(space):
    return Flow("identity", space)


def apply_flow(flow, t, f):
    """T_t f = f composed with the time-t point map."""
    if t < 0.0:
        raise ValueError("the flow is one-sided: t must be nonnegative")
    if flow.kind == "identity" or t == 0.0:
        return f
    if flow.kind == "rotation":
        _, delta = _split_product(t, flow.theta)
        return f.rotate(delta)
    n, _ = _split_ratio(t, flow.h)
    return f.permute(_perm_power(flow.perm, n))


def _check_degree(f):
    if isinstance(f, CircleFunction) and f.degree + 1 > DEGREE_CAP:
        raise ValueError(
            f"averaging degree-{f.degree} input exceeds the degree cap")


def _rotation_average_fn(fn, t, theta):
    """Closed-form (1/t)∫_0^t f(x+τθ)dτ for a CircleFunction."""
    total = np.longdouble(t) * np.longdouble(theta)
    n0, delta = _split_product(t, theta)
    big_f = fn.antiderivative()
    iv = fn.integral()
    shifted = big_f.rotate(delta)
    if delta == 0.0:
        wrap = CircleFunction.constant(float(n0) * iv, fn.space)
    else:
        wedge = np.array([0.0, 1.0 - delta, 1.0])
        counts = np.array([float(n0), float(n0 + 1)])
        wrap = CircleFunction(wedge, counts[:, None, None] * iv[None, None, :],
                              fn.space)
    comb = merge_sum([shifted, big_f, wrap], [1.0, -1.0, 1.0])
    return comb * float(1.0 / total)


def _step_average_values(values, perm, t, h):
    n, rem = _split_ratio(t, h)
    acc = np.zeros_like(values)
    cur = np.arange(values.shape[0])
    for _ in range(n):
        acc += values[cur]
        cur = perm[cur]
    acc *= h
    if rem > 0.0:
        acc += rem * values[cur]
    return acc / t


def cesaro_average(flow, t, f):
    """Time average A_t f = (1/t)∫_0^t T_τ f dτ, exact for every kind."""
    if t <= 0.0:
        raise ValueError("averaging time must be positive")
    if flow.kind == "identity":
        return f
    if flow.kind == "rotation":
        _check_degree(f)
        return _rotation_average_fn(f, t, flow.theta)
    return AtomFunction(f.space,
                        _step_average_values(f.values, flow.perm, t, flow.h))


def discrete_average(flow, n, f):
    """Arithmetic mean of f, T_1 f, ..., T_1^{n-1} f."""
    if n < 1 or int(n) != n:
        raise ValueError("discrete averages need a positive integer count")
    n = int(n)
    if flow.kind == "identity" or n == 1:
        return f
    if flow.kind == "rotation":
        terms = []
        for i in range(n):
            _, delta = _split_product(i, flow.theta)
            terms.append(f.rotate(delta))
        return merge_sum(terms, np.full(n, 1.0 / n))
    step1 = _perm_power(flow.perm, _split_ratio(1.0, flow.h)[0])
    acc = np.zeros_like(f.values)
    cur = np.arange(f.space.natoms)
    for _ in range(n):
        acc += f.values[cur]
        cur = step1[cur]
    return AtomFunction(f.space, acc / n)


class DominantFlow:
    """Scalar companion of a composition flow: same point map, scalar data."""

    def __init__(self, base):
        self.base = base

    def apply(self, t, field):
        if t < 0.0:
            raise ValueError("the flow is one-sided: t must be nonnegative")
        base = self.base
        if base.kind == "identity" or t == 0.0:
            return field
        if base.kind == "rotation":
            _, delta = _split_product(t, base.theta)
            if isinstance(field, PolyField):
                return PolyField(field.fn.rotate(delta))
            if isinstance(field, SqrtPolyField):
                return SqrtPolyField(field.q.rotate(delta))
            if isinstance(field, GenericField):
                ev = field.eval
                shifted = lambda x: ev((np.asarray(x) + delta) % 1.0)
                return GenericField(field.space, shifted,
                                    (field.breaks - delta) % 1.0,
                                    deriv_bound=field.deriv_bound,
                                    exact_integral=field._exact_integral)
            raise ValueError("rotation dominants act on circle fields")
        n, _ = _split_ratio(t, base.h)
        return field.permute(_perm_power(base.perm, n))

    def cesaro(self, t, field):
        """A'_t h = (1/t)∫_0^t P_τ h dτ; positivity preserving."""
        if t <= 0.0:
            raise ValueError("averaging time must be positive")
        base = self.base
        if base.kind == "identity":
            return field
        if base.kind == "step":
            if not isinstance(field, AtomField):
                raise ValueError("step dominants act on atomic fields")
            vals = _step_average_values(field.values[:, None], base.perm,
                                        t, base.h)[:, 0]
            return AtomField(field.space, vals)
        if isinstance(field, PolyField):
            _check_degree(field.fn)
            return PolyField(_rotation_average_fn(field.fn, t, base.theta))
        return self._rotation_generic(t, field)

    def _rotation_generic(self, t, field):
        theta = self.base.theta
        total = float(np.longdouble(t) * np.longdouble(theta))
        n0, delta = _split_product(t, theta)
        iv = field.integral()
        cum = field.cumint if hasattr(field, "cumint") else None
        if cum is None:
            raise ValueError("field does not support cumulative integrals")

        def evaluator(x):
            x = np.atleast_1d(np.asarray(x, dtype=float)) % 1.0
            end = x + delta
            wraps = np.where(end >= 1.0, n0 + 1.0, float(n0))
            end = np.where(end >= 1.0, end - 1.0, end)
            return (cum(end) - cum(x) + wraps * iv) / total

        inner = np.concatenate([field.breaks,
                                (field.breaks - delta) % 1.0,
                                [(1.0 - delta) % 1.0]])
        bound = None
        if hasattr(field, "sup"):
            bound = 2.0 * field.sup() / total
        return GenericField(field.space, evaluator, inner,
                            deriv_bound=bound, exact_integral=iv)


def dominant_cesaro(flow, t, field):
    """Convenience wrapper: time average under the dominant of ``flow``."""
    return DominantFlow(flow).cesaro(t, field)
