"""Measure spaces, finite partitions, filtrations, and vector norms.

Three kinds of spaces are supported:

* ``circle``   -- the unit circle [0, 1) with Lebesgue measure (mass 1),
* ``discrete`` -- finitely many atoms with strictly positive weights,
* ``product``  -- a uniform cyclic factor times a weighted atomic factor.

Finite sigma-algebras are represented by partitions.  Circle partitions use
dyadic-rational cell boundaries kept as exact ``Fraction`` values so that
refinement tests never suffer from float rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

MAX_DYADIC_LEVEL = 30


def _is_dyadic(x: Fraction) -> bool:
    d = x.denominator
    return d & (d - 1) == 0


class MeasureSpace:
    """A finite measure space: the circle, an atomic space, or a product."""

    def __init__(self, kind, weights=None, labels=None, cyclic_size=None,
                 atom_weights=None, atom_labels=None, mass=None):
        self.kind = kind
        if kind == "circle":
            self.mass = 1.0
            self.weights = None
            self.labels = None
        elif kind == "discrete":
            w = np.asarray(weights, dtype=float)
            if w.ndim != 1 or w.size == 0:
                raise ValueError("discrete space needs a 1-d weight sequence")
            if np.any(w <= 0):
                raise ValueError("atom weights must be strictly positive")
            declared = float(w.sum()) if mass is None else float(mass)
            if abs(float(w.sum()) - declared) > 1e-12:
                raise ValueError(
                    f"weights sum to {w.sum()!r}, declared mass {declared!r}")
            self.weights = w
            self.mass = declared
            self.labels = tuple(labels) if labels is not None else tuple(
                str(i) for i in range(w.size))
            if len(self.labels) != w.size:
                raise ValueError("label/weight length mismatch")
        elif kind == "product":
            m1 = int(cyclic_size)
            if m1 < 1:
                raise ValueError("cyclic factor must have at least one atom")
            w2 = np.asarray(atom_weights, dtype=float)
            if np.any(w2 <= 0):
                raise ValueError("atom weights must be strictly positive")
            self.cyclic_size = m1
            self.factor_weights = w2
            self.factor_labels = tuple(atom_labels) if atom_labels is not None \
                else tuple(str(j) for j in range(w2.size))
            # product atom (i, j) has weight w1_i * w2_j with uniform w1
            w1 = np.full(m1, 1.0 / m1)
            self.weights = np.repeat(w1, w2.size) * np.tile(w2, m1)
            self.mass = float(self.weights.sum()) if mass is None else float(mass)
            if abs(float(self.weights.sum()) - self.mass) > 1e-12:
                raise ValueError("product weights do not sum to declared mass")
            self.labels = tuple(
                (i, self.factor_labels[j]) for i in range(m1)
                for j in range(w2.size))
        else:
            raise ValueError(f"unknown space kind {kind!r}")

    @property
    def natoms(self):
        return None if self.kind == "circle" else self.weights.size

    def atom_index(self, i, j=None):
        """Flat index of atom i (discrete) or product atom (i, j)."""
        if self.kind == "product":
            return i * self.factor_weights.size + j
        return i

    def __eq__(self, other):
        if not isinstance(other, MeasureSpace) or self.kind != other.kind:
            return False
        if self.kind == "circle":
            return True
        if self.kind == "product" and self.cyclic_size != other.cyclic_size:
            return False
        return self.weights.shape == other.weights.shape and \
            bool(np.all(self.weights == other.weights))

    def __repr__(self):
        if self.kind == "circle":
            return "MeasureSpace(circle)"
        if self.kind == "discrete":
            return f"MeasureSpace(discrete, {self.natoms} atoms)"
        return (f"MeasureSpace(product, {self.cyclic_size} x "
                f"{self.factor_weights.size})")


def circle_space():
    return MeasureSpace("circle")


def discrete_space(weights, labels=None):
    return MeasureSpace("discrete", weights=weights, labels=labels)


def product_space(cyclic_size, atom_weights, atom_labels=None):
    return MeasureSpace("product", cyclic_size=cyclic_size,
                        atom_weights=atom_weights, atom_labels=atom_labels)


class Partition:
    """A finite partition of a measure space into positive-measure cells.

    Circle cells are half-open dyadic intervals [a, b); discrete cells are
    disjoint atom-index sets covering every atom.
    """

    def __init__(self, space, boundaries=None, cells=None):
        self.space = space
        if space.kind == "circle":
            bounds = [Fraction(b) for b in boundaries]
            if bounds[0] != 0 or bounds[-1] != 1:
                raise ValueError("circle partition must span [0, 1)")
            for a, b in zip(bounds, bounds[1:]):
                if b <= a:
                    raise ValueError("boundaries must be strictly increasing")
            for b in bounds:
                if not _is_dyadic(b):
                    raise ValueError(f"boundary {b} is not dyadic")
                if b.denominator > 2 ** MAX_DYADIC_LEVEL:
                    raise ValueError("boundary finer than the dyadic cap")
            self.boundaries = tuple(bounds)
            self.cells = None
        else:
            seen = np.zeros(space.natoms, dtype=bool)
            cleaned = []
            for cell in cells:
                idx = np.asarray(sorted(cell), dtype=int)
                if idx.size == 0:
                    raise ValueError("empty cell")
                if np.any(seen[idx]):
                    raise ValueError("cells overlap")
                seen[idx] = True
                cleaned.append(idx)
            if not np.all(seen):
                raise ValueError("cells do not cover the space")
            self.boundaries = None
            self.cells = tuple(tuple(int(i) for i in c) for c in cleaned)

    @property
    def ncells(self):
        if self.space.kind == "circle":
            return len(self.boundaries) - 1
        return len(self.cells)

    def cell_bounds_float(self):
        """Circle cell boundaries as floats (exact for dyadic <= 2^30)."""
        return np.array([float(b) for b in self.boundaries])

    def cell_measure(self, i):
        if self.space.kind == "circle":
            return float(self.boundaries[i + 1] - self.boundaries[i])
        return float(self.space.weights[list(self.cells[i])].sum())

    def measures(self):
        return np.array([self.cell_measure(i) for i in range(self.ncells)])

    def is_trivial(self):
        return self.ncells == 1

    def refines(self, other):
        """True when every cell of self lies inside a cell of other."""
        if self.space != other.space:
            return False
        if self.space.kind == "circle":
            return set(other.boundaries) <= set(self.boundaries)
        owner = {}
        for k, cell in enumerate(other.cells):
            for a in cell:
                owner[a] = k
        return all(len({owner[a] for a in cell}) == 1 for cell in self.cells)

    def __eq__(self, other):
        if not isinstance(other, Partition) or self.space != other.space:
            return False
        return self.boundaries == other.boundaries and self.cells == other.cells

    def __repr__(self):
        return f"Partition({self.space.kind}, {self.ncells} cells)"


def make_dyadic_partition(level, space=None):
    """Split the circle into 2**level equal half-open cells."""
    if level < 0 or level > MAX_DYADIC_LEVEL:
        raise ValueError(
            f"level must lie in [0, {MAX_DYADIC_LEVEL}] (measure underflow)")
    space = space if space is not None else circle_space()
    if space.kind != "circle":
        raise ValueError("dyadic partitions live on the circle")
    n = 2 ** level
    return Partition(space, boundaries=[Fraction(k, n) for k in range(n + 1)])


def _dyadic_index_blocks(n, level):
    """Nested index blocks: level-k boundaries are ceil(j*n / 2**k)."""
    k = 2 ** level
    edges = sorted({-(-j * n // k) for j in range(k + 1)})
    return [range(a, b) for a, b in zip(edges, edges[1:])]


def make_block_partition(space, level):
    """Dyadic-style partition of a discrete space into index blocks."""
    if space.kind != "discrete":
        raise ValueError("block partitions live on discrete spaces")
    if level < 0:
        raise ValueError("level must be nonnegative")
    return Partition(space, cells=[list(b) for b in
                                   _dyadic_index_blocks(space.natoms, level)])


def make_factor_partition(space, level):
    """Partition of a product space by blocks of the atomic factor."""
    if space.kind != "product":
        raise ValueError("factor partitions live on product spaces")
    m2 = space.factor_weights.size
    cells = []
    for block in _dyadic_index_blocks(m2, level):
        cells.append([space.atom_index(i, j)
                      for i in range(space.cyclic_size) for j in block])
    return Partition(space, cells=cells)


def partition_at_level(space, level):
    if space.kind == "circle":
        return make_dyadic_partition(level, space)
    if space.kind == "discrete":
        return make_block_partition(space, level)
    return make_factor_partition(space, level)


def max_partition_level(space):
    """Finest level at which every cell still has positive measure."""
    if space.kind == "circle":
        return MAX_DYADIC_LEVEL
    n = space.natoms if space.kind == "discrete" else space.factor_weights.size
    return int(np.floor(np.log2(n))) if n > 1 else 0


class Filtration:
    """Monotone family of partitions indexed by a real parameter s >= 0.

    ``increasing`` filtrations refine as s grows and stabilise at
    ``max_level``; ``decreasing`` ones start at ``max_level`` and coarsen to
    the trivial partition.
    """

    def __init__(self, space, direction, max_level):
        if direction not in ("increasing", "decreasing"):
            raise ValueError(f"unknown direction {direction!r}")
        cap = max_partition_level(space)
        if max_level < 0 or max_level > cap:
            raise ValueError(f"max_level must lie in [0, {cap}] on this space")
        self.space = space
        self.direction = direction
        self.max_level = int(max_level)
        self._cache = {}

    def level(self, s):
        if s < 0:
            raise ValueError("filtration parameter must be nonnegative")
        k = int(np.floor(s))
        if self.direction == "increasing":
            return min(k, self.max_level)
        return max(self.max_level - k, 0)

    def partition_at_level(self, k):
        if k not in self._cache:
            self._cache[k] = partition_at_level(self.space, k)
        return self._cache[k]

    def partition(self, s):
        return self.partition_at_level(self.level(s))

    def terminal(self):
        """Partition reached as s -> infinity."""
        if self.direction == "increasing":
            return self.partition_at_level(self.max_level)
        return self.partition_at_level(0)

    def __repr__(self):
        return (f"Filtration({self.space.kind}, {self.direction}, "
                f"max_level={self.max_level})")


@dataclass(frozen=True)
class VectorNorm:
    """Norm on R^d: euclidean, max, or sum of absolute coordinates."""

    selector: str
    dim: int

    _SELECTORS = ("euclidean", "max", "sum")

    def __post_init__(self):
        if self.selector not in self._SELECTORS:
            raise ValueError(f"unknown norm selector {self.selector!r}")
        if self.dim < 1:
            raise ValueError("dimension must be positive")

    def __call__(self, arr):
        """Norm along the last axis of an (..., d) array."""
        a = np.asarray(arr, dtype=float)
        if a.shape[-1] != self.dim:
            raise ValueError(
                f"expected last axis {self.dim}, got {a.shape[-1]}")
        if self.selector == "euclidean":
            return np.sqrt(np.sum(a * a, axis=-1))
        if self.selector == "max":
            return np.max(np.abs(a), axis=-1)
        return np.sum(np.abs(a), axis=-1)
