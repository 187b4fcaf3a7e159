"""Vector-valued functions with exact piecewise-polynomial arithmetic.

Circle functions are piecewise polynomials on [0, 1) stored in the global
monomial basis as a dense coefficient array of shape (pieces, degree+1, d).
All structural operations (sums, antiderivatives, rotations, definite
integrals) are closed-form; only norms of genuinely non-polynomial
compositions fall back to quadrature (see fields.py).

Discrete functions are plain per-atom value tables.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.interpolate import CubicSpline

from .spaces import MeasureSpace, circle_space

DEGREE_CAP = 8


def _binom_matrix(n):
    m = np.zeros((n, n))
    for j in range(n):
        for k in range(j + 1):
            m[k, j] = math.comb(j, k)
    return m


def taylor_shift(coeffs, sigma):
    """Coefficients of p(x + sigma) for p given by ascending ``coeffs``.

    coeffs has shape (..., K+1, d); sigma is scalar or matches the leading
    axes of coeffs.
    """
    c = np.asarray(coeffs, dtype=float)
    k1 = c.shape[-2]
    comb = _binom_matrix(k1)
    j = np.arange(k1)
    powdiff = j[None, :] - j[:, None]          # j - k
    mask = powdiff >= 0
    sig = np.asarray(sigma, dtype=float)
    base = np.where(sig == 0.0, 0.0, sig)[..., None, None] ** np.where(
        mask, powdiff, 0)
    m = np.where(mask, comb * base, 0.0)
    # sigma == 0 must give the identity even though 0**0 == 1 fills row 0
    return np.einsum("...kj,...jd->...kd", m, c)


class CircleFunction:
    """Piecewise polynomial on the circle [0, 1) with values in R^d."""

    def __init__(self, breaks, coeffs, space=None):
        self.space = space if space is not None else circle_space()
        if self.space.kind != "circle":
            raise ValueError("CircleFunction lives on the circle")
        b = np.asarray(breaks, dtype=float)
        c = np.asarray(coeffs, dtype=float)
        if b.ndim != 1 or b[0] != 0.0 or b[-1] != 1.0 or np.any(np.diff(b) <= 0):
            raise ValueError("breaks must increase strictly from 0 to 1")
        if c.ndim != 3 or c.shape[0] != b.size - 1:
            raise ValueError("coeffs must have shape (pieces, degree+1, d)")
        self.breaks = b
        self.coeffs = c
        self._antideriv = None

    # -- basic structure ---------------------------------------------------

    @property
    def d(self):
        return self.coeffs.shape[2]

    @property
    def degree(self):
        return self.coeffs.shape[1] - 1

    @property
    def npieces(self):
        return self.breaks.size - 1

    @classmethod
    def from_pieces(cls, breaks, piece_coeffs, space=None):
        """Public constructor; enforces the degree cap."""
        coeff_list = [np.atleast_2d(np.asarray(p, dtype=float))
                      for p in piece_coeffs]
        k1 = max(p.shape[0] for p in coeff_list)
        if k1 - 1 > DEGREE_CAP:
            raise ValueError(f"degree {k1 - 1} exceeds cap {DEGREE_CAP}")
        d = coeff_list[0].shape[1]
        stacked = np.zeros((len(coeff_list), k1, d))
        for i, p in enumerate(coeff_list):
            if p.shape[1] != d:
                raise ValueError("inconsistent value dimension across pieces")
            stacked[i, :p.shape[0]] = p
        return cls(breaks, stacked, space=space)

    @classmethod
    def constant(cls, value, space=None):
        v = np.atleast_1d(np.asarray(value, dtype=float))
        return cls([0.0, 1.0], v.reshape(1, 1, -1), space=space)

    @classmethod
    def piecewise_constant(cls, bounds, values, space=None):
        """Degree-0 function: values[i] on [bounds[i], bounds[i+1])."""
        v = np.asarray(values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        return cls(bounds, v[:, None, :], space=space)

    def pad_degree(self, k1):
        if self.coeffs.shape[1] >= k1:
            return self.coeffs
        pad = np.zeros((self.npieces, k1 - self.coeffs.shape[1], self.d))
        return np.concatenate([self.coeffs, pad], axis=1)

    def piece_index(self, x):
        return np.clip(np.searchsorted(self.breaks, x, side="right") - 1,
                       0, self.npieces - 1)

    # -- evaluation ---------------------------------------------------------

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xm = np.mod(np.atleast_1d(x), 1.0)
        out = self._eval_unwrapped(xm)
        return out[0] if scalar else out

    def _eval_unwrapped(self, x):
        """Evaluate without periodic wrap; x = 1 uses the last piece."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        idx = self.piece_index(x)
        powers = x[:, None] ** np.arange(self.coeffs.shape[1])
        return np.einsum("nk,nkd->nd", powers, self.coeffs[idx])

    # -- arithmetic ----------------------------------------------------------

    def _merged_with(self, other):
        if not isinstance(other, CircleFunction) or self.space != other.space:
            raise ValueError("operands must live on the same circle space")
        if self.d != other.d:
            raise ValueError("value dimensions differ")
        return np.unique(np.concatenate([self.breaks, other.breaks]))

    def coeffs_on(self, edges):
        """Coefficients of this function re-tabulated on refined edges."""
        mids = 0.5 * (edges[:-1] + edges[1:])
        return self.coeffs[self.piece_index(mids)]

    def __add__(self, other):
        edges = self._merged_with(other)
        k1 = max(self.coeffs.shape[1], other.coeffs.shape[1])
        a = CircleFunction(edges, _pad(self.coeffs_on(edges), k1), self.space)
        b = _pad(other.coeffs_on(edges), k1)
        return CircleFunction(edges, a.coeffs + b, self.space)

    def __sub__(self, other):
        return self + (other * -1.0)

    def __mul__(self, scalar):
        return CircleFunction(self.breaks, self.coeffs * float(scalar),
                              self.space)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    # -- calculus ------------------------------------------------------------

    def antiderivative(self):
        """F with F' = f piecewise and F(0) = 0, continuous on [0, 1]."""
        if self._antideriv is not None:
            return self._antideriv
        k1 = self.coeffs.shape[1]
        ad = np.zeros((self.npieces, k1 + 1, self.d))
        ad[:, 1:] = self.coeffs / np.arange(1, k1 + 1)[None, :, None]
        powl = self.breaks[:-1, None] ** np.arange(k1 + 1)
        powr = self.breaks[1:, None] ** np.arange(k1 + 1)
        vall = np.einsum("pk,pkd->pd", powl, ad)
        valr = np.einsum("pk,pkd->pd", powr, ad)
        gains = valr - vall
        offsets = np.concatenate(
            [np.zeros((1, self.d)), np.cumsum(gains, axis=0)[:-1]], axis=0)
        ad[:, 0] += offsets - vall
        self._antideriv = CircleFunction(self.breaks, ad, self.space)
        return self._antideriv

    def derivative(self):
        k1 = self.coeffs.shape[1]
        if k1 == 1:
            return CircleFunction(self.breaks,
                                  np.zeros((self.npieces, 1, self.d)),
                                  self.space)
        der = self.coeffs[:, 1:] * np.arange(1, k1)[None, :, None]
        return CircleFunction(self.breaks, der, self.space)

    def integral(self):
        """Integral over the whole circle, an R^d vector."""
        return self.antiderivative()._eval_unwrapped(np.array([1.0]))[0]

    def integrate(self, lo, hi):
        """Exact integral over [lo, hi] within [0, 1]."""
        if hi <= lo:
            return np.zeros(self.d)
        if lo < 0.0 or hi > 1.0:
            raise ValueError("integration interval must lie within [0, 1]")
        af = self.antiderivative()
        vals = af._eval_unwrapped(np.array([lo, hi]))
        return vals[1] - vals[0]

    def mean(self):
        return self.integral() / self.space.mass

    # -- flow support ----------------------------------------------------------

    def rotate(self, delta):
        """Precompose with x -> (x + delta) mod 1 (exact piece reindexing)."""
        delta = float(delta) % 1.0
        if delta == 0.0:
            return self
        inner = (self.breaks[:-1] - delta) % 1.0
        edges = np.unique(np.concatenate([[0.0, 1.0], inner]))
        mids = 0.5 * (edges[:-1] + edges[1:])
        y = mids + delta
        wrapped = y >= 1.0
        y = np.where(wrapped, y - 1.0, y)
        src = self.coeffs[self.piece_index(y)]
        sigma = np.where(wrapped, delta - 1.0, delta)
        return CircleFunction(edges, taylor_shift(src, sigma), self.space)

    # -- diagnostics -------------------------------------------------------------

    def is_continuous(self, tol=1e-9):
        """Continuity across interior breakpoints and the wrap point."""
        pts = self.breaks[1:]
        left = np.einsum("pk,pkd->pd",
                         pts[:, None] ** np.arange(self.coeffs.shape[1]),
                         self.coeffs)
        right = np.vstack([self._eval_unwrapped(self.breaks[1:-1]),
                           self._eval_unwrapped(np.array([0.0]))])
        return float(np.max(np.abs(left - right))) <= tol

    def __repr__(self):
        return (f"CircleFunction({self.npieces} pieces, degree "
                f"{self.degree}, d={self.d})")


def _pad(coeffs, k1):
    if coeffs.shape[1] >= k1:
        return coeffs
    pad = np.zeros((coeffs.shape[0], k1 - coeffs.shape[1], coeffs.shape[2]))
    return np.concatenate([coeffs, pad], axis=1)


def merge_sum(funcs, weights):
    """Weighted sum of circle functions with one breakpoint merge."""
    funcs = list(funcs)
    space = funcs[0].space
    d = funcs[0].d
    edges = np.unique(np.concatenate([f.breaks for f in funcs]))
    k1 = max(f.coeffs.shape[1] for f in funcs)
    acc = np.zeros((edges.size - 1, k1, d))
    for f, w in zip(funcs, weights):
        acc += float(w) * _pad(f.coeffs_on(edges), k1)
    return CircleFunction(edges, acc, space)


class AtomFunction:
    """Vector-valued function on a discrete or product space."""

    def __init__(self, space, values):
        if space.kind == "circle":
            raise ValueError("AtomFunction needs an atomic space")
        v = np.asarray(values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != space.natoms:
            raise ValueError(f"expected {space.natoms} atom values")
        self.space = space
        self.values = v

    @property
    def d(self):
        return self.values.shape[1]

    @classmethod
    def constant(cls, value, space):
        v = np.atleast_1d(np.asarray(value, dtype=float))
        return cls(space, np.tile(v, (space.natoms, 1)))

    def __call__(self, atoms):
        return self.values[np.asarray(atoms, dtype=int)]

    def __add__(self, other):
        if self.space != other.space:
            raise ValueError("operands live on different spaces")
        return AtomFunction(self.space, self.values + other.values)

    def __sub__(self, other):
        if self.space != other.space:
            raise ValueError("operands live on different spaces")
        return AtomFunction(self.space, self.values - other.values)

    def __mul__(self, scalar):
        return AtomFunction(self.space, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def permute(self, perm):
        """Composition with an atom map: result(a) = self(perm[a])."""
        return AtomFunction(self.space, self.values[np.asarray(perm, int)])

    def integral(self):
        return self.space.weights @ self.values

    def integrate_atoms(self, atoms):
        idx = np.asarray(atoms, dtype=int)
        return self.space.weights[idx] @ self.values[idx]

    def mean(self):
        return self.integral() / self.space.mass

    def __repr__(self):
        return f"AtomFunction({self.space.natoms} atoms, d={self.d})"


def integrate(f, region=None):
    """Integral of f over a region.

    Regions: ``None`` (whole space), an ``(a, b)`` interval on the circle,
    or a sequence of atom indices on atomic spaces.  Empty regions give the
    zero vector.
    """
    if region is None:
        return f.integral()
    if isinstance(f, CircleFunction):
        a, b = region
        return f.integrate(float(a), float(b))
    return f.integrate_atoms(region)


# -- builtin test functions ------------------------------------------------------


def _component_breaks(phases):
    pts = [(-p) % 1.0 for p in phases]
    return pts


def sawtooth(d=1, amplitudes=None, phases=None, space=None):
    """Mean-zero sawtooth per component: a * (frac(x + phase) - 1/2)."""
    amplitudes = [1.0] * d if amplitudes is None else list(amplitudes)
    phases = [0.0] * d if phases is None else list(phases)
    edges = np.unique(np.concatenate(
        [[0.0, 1.0], _component_breaks(phases)]))
    coeffs = np.zeros((edges.size - 1, 2, d))
    mids = 0.5 * (edges[:-1] + edges[1:])
    for i, (a, p) in enumerate(zip(amplitudes, phases)):
        # frac(x + p) = x + p - floor(mid + p) on each piece
        off = np.floor(mids + p)
        coeffs[:, 0, i] = a * (p - off - 0.5)
        coeffs[:, 1, i] = a
    return CircleFunction(edges, coeffs, space=space)


def hat(d=1, amplitudes=None, phases=None, space=None):
    """Mean-zero continuous tent per component, slope +-2a, period 1."""
    amplitudes = [1.0] * d if amplitudes is None else list(amplitudes)
    phases = [0.0] * d if phases is None else list(phases)
    pts = []
    for p in phases:
        pts.extend([(-p) % 1.0, (0.5 - p) % 1.0])
    edges = np.unique(np.concatenate([[0.0, 1.0], pts]))
    coeffs = np.zeros((edges.size - 1, 2, d))
    mids = 0.5 * (edges[:-1] + edges[1:])
    for i, (a, p) in enumerate(zip(amplitudes, phases)):
        u = (mids + p) % 1.0
        rising = u < 0.5
        off = np.floor(mids + p)
        # rising: 2(x + p - off) - 1/2 ... values in [-1/2, 1/2], mean zero
        coeffs[:, 0, i] = np.where(rising,
                                   a * (2.0 * (p - off) - 0.5),
                                   a * (1.5 - 2.0 * (p - off)))
        coeffs[:, 1, i] = np.where(rising, 2.0 * a, -2.0 * a)
    return CircleFunction(edges, coeffs, space=space)


def from_smooth(generator, d, target=1e-8, max_knots=4096, space=None):
    """Sample a smooth 1-periodic generator into a piecewise cubic.

    Doubles the knot count until the sup error against the generator at a
    dense probe grid is below ``target``.
    """
    n = 16
    while True:
        knots = np.linspace(0.0, 1.0, n + 1)
        vals = np.atleast_2d(np.asarray(
            [np.atleast_1d(generator(float(x))) for x in knots], dtype=float))
        vals[-1] = vals[0]
        cs = CubicSpline(knots, vals, axis=0, bc_type="periodic")
        local = np.transpose(cs.c, (1, 0, 2))[:, ::-1, :]  # (n, 4, d) ascending
        coeffs = taylor_shift(local, -knots[:-1])
        f = CircleFunction(knots, coeffs, space=space)
        probe = np.linspace(0.0, 1.0, 8 * n, endpoint=False)
        exact = np.asarray([np.atleast_1d(generator(float(x)))
                            for x in probe], dtype=float)
        err = float(np.max(np.abs(f(probe) - exact)))
        if err <= target or n >= max_knots:
            if err > target:
                raise ValueError(
                    f"smooth sampler missed target {target} (err {err:.2e})")
            return f
        n *= 2


def cascade(levels=14, ramp_exp=20, amplitude=1.0, space=None):
    """Continuous profile whose dyadic cell averages lose half their
    L1 distance to the profile with every refinement level.

    The value pattern is a weighted sum of +-1 dyadic sign waves (weight
    2^-k at scale k); jumps are replaced by ramps of width 2^-ramp_exp to
    keep the function Lipschitz.  Exact halving holds for levels up to
    ``levels - 2`` with relative drift well under one percent.
    """
    ncell = 2 ** (levels + 1)
    idx = np.arange(ncell)
    vals = np.zeros(ncell)
    for k in range(levels + 1):
        bit = (idx >> (levels - k)) & 1
        vals += (2.0 ** -k) * np.where(bit == 0, 1.0, -1.0)
    vals *= amplitude
    wr = 2.0 ** (-ramp_exp)
    w = 1.0 / ncell
    if wr >= w:
        raise ValueError("ramp width must stay below the cell width")
    edges = []
    coeffs = []
    for j in range(ncell):
        b = j * w
        prev = vals[j - 1]
        cur = vals[j]
        if prev != cur:
            slope = (cur - prev) / wr
            edges.append(b)
            coeffs.append([prev - slope * b, slope])
            edges.append(b + wr)
            coeffs.append([cur, 0.0])
        else:
            edges.append(b)
            coeffs.append([cur, 0.0])
    edges.append(1.0)
    return CircleFunction(np.asarray(edges),
                          np.asarray(coeffs)[:, :, None], space=space)


def harmonic_generator(d=1, amplitudes=None, phases=None, harmonic=1):
    """Smooth periodic generator: a_i * sin(2 pi k (x + phase_i))."""
    amplitudes = [1.0] * d if amplitudes is None else list(amplitudes)
    phases = [0.0] * d if phases is None else list(phases)

    def gen(x):
        return np.array([a * math.sin(2.0 * math.pi * harmonic * (x + p))
                         for a, p in zip(amplitudes, phases)])

    return gen
