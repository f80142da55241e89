"""Discrete L_p spaces on the torus: point sets, measures, norms and norming functionals.

Everything here is a finite weighted sum. A quadrature grid for the
normalized Lebesgue measure is just another :class:`DiscreteMeasure` with
uniform weights, and the mixed measure (mu + mu_m)/2 is the concatenation of
a grid and a point set with halved weights.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError, ZeroResidual

TWO_PI = 2.0 * np.pi

# ||f_m|| < ZERO_RESIDUAL_RTOL * ||f_0|| counts as an exact zero
ZERO_RESIDUAL_RTOL = 1e-13


@dataclass(frozen=True, eq=False)
class PointSet:
    """``m`` points in ``[0, 2*pi)^d`` stored as an ``(m, d)`` float array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ParameterError("a point set needs at least one point of dimension >= 1")
        if np.any(pts < 0.0) or np.any(pts >= TWO_PI):
            raise ParameterError("point coordinates must lie in [0, 2*pi)")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def count(self) -> int:
        return self.points.shape[0]

    def __len__(self):
        return self.count

    def concat(self, other: "PointSet") -> "PointSet":
        if other.dim != self.dim:
            raise DimensionError("cannot join point sets of different dimension")
        return PointSet(np.vstack([self.points, other.points]))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"x{i}" for i in range(self.dim)])
            for row in self.points:
                writer.writerow([repr(float(x)) for x in row])

    @classmethod
    def from_csv(cls, path) -> "PointSet":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if rows and not _is_number(rows[0][0]):
            rows = rows[1:]
        return cls(np.array([[float(x) for x in row] for row in rows if row]))


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def torus_grid(dim: int, per_axis: int) -> PointSet:
    """Tensor-product uniform grid with ``per_axis`` nodes per coordinate."""
    axis = TWO_PI * np.arange(per_axis) / per_axis
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return PointSet(np.stack([g.ravel() for g in mesh], axis=1))


def quadrature_size(max_frequency: int) -> int:
    """Per-axis grid size used for continuous L_p norms of band-limited functions."""
    return max(64, 8 * (int(max_frequency) + 1))


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Probability measure on a finite support.

    ``kind`` is ``"points"`` for mu_m, ``"grid"`` for a quadrature grid standing
    in for the Lebesgue measure, and ``"mixed"`` for (mu + mu_m)/2. For mixed
    measures ``split`` is the number of leading support entries that belong to
    the grid part.
    """

    support: PointSet
    weights: np.ndarray
    kind: str = "points"
    split: int | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.support.count,):
            raise DimensionError(
                f"{w.shape[0] if w.ndim else 0} weights for {self.support.count} support points"
            )
        if np.any(w < 0):
            raise ParameterError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ParameterError(f"weights sum to {w.sum()!r}, expected 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, points: PointSet, kind: str = "points") -> "DiscreteMeasure":
        return cls(points, np.full(points.count, 1.0 / points.count), kind=kind)

    @classmethod
    def grid(cls, dim: int, per_axis: int) -> "DiscreteMeasure":
        return cls.uniform(torus_grid(dim, per_axis), kind="grid")

    @classmethod
    def mixed(cls, grid: "DiscreteMeasure", points: "DiscreteMeasure") -> "DiscreteMeasure":
        """The measure (mu + mu_m)/2 with mu represented by a quadrature grid."""
        support = grid.support.concat(points.support)
        weights = np.concatenate([grid.weights, points.weights]) / 2.0
        return cls(support, weights, kind="mixed", split=grid.support.count)

    @property
    def size(self) -> int:
        return self.support.count

    @property
    def is_uniform(self) -> bool:
        return bool(np.all(self.weights == self.weights[0]))


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Complex values of a function on the support of a measure."""

    values: np.ndarray
    measure: DiscreteMeasure

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.measure.size,):
            raise DimensionError(
                f"{vals.size} values for a measure supported on {self.measure.size} points"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __add__(self, other):
        _same_measure(self, other)
        return SampledFunction(self.values + other.values, self.measure)

    def __sub__(self, other):
        _same_measure(self, other)
        return SampledFunction(self.values - other.values, self.measure)

    def __mul__(self, scalar):
        return SampledFunction(scalar * self.values, self.measure)

    __rmul__ = __mul__


def _same_measure(f, g):
    if f.measure is not g.measure and f.measure.size != g.measure.size:
        raise DimensionError("functions live on different measures")


@dataclass(frozen=True)
class LpExponent:
    """An exponent ``1 <= p < inf`` together with p* = min(p, 2) and q* = p*/(p*-1)."""

    p: float
    p_star: float = field(init=False)
    q_star: float = field(init=False)

    def __post_init__(self):
        p = float(self.p)
        if not (p >= 1.0) or math.isinf(p):
            raise ParameterError(f"need 1 <= p < inf, got {self.p!r}")
        object.__setattr__(self, "p", p)
        p_star = min(p, 2.0)
        object.__setattr__(self, "p_star", p_star)
        object.__setattr__(self, "q_star", math.inf if p_star == 1.0 else p_star / (p_star - 1.0))

    @classmethod
    def of(cls, p) -> "LpExponent":
        return p if isinstance(p, cls) else cls(p)


def _p(p) -> float:
    return LpExponent.of(p).p


def weighted_lp_norm(values, weights, p: float) -> float:
    """(sum_nu w_nu |values_nu|^p)^(1/p) on raw arrays.

    Large arrays are rescaled by their max modulus first so that high powers
    cannot underflow or overflow.
    """
    a = np.abs(np.asarray(values))
    if a.shape != np.shape(weights):
        raise DimensionError(f"{a.shape} values against {np.shape(weights)} weights")
    if p == 2.0:
        return float(np.sqrt(np.dot(weights, a * a)))
    top = a.max(initial=0.0)
    if top == 0.0:
        return 0.0
    return float(top * np.dot(weights, (a / top) ** p) ** (1.0 / p))


def lp_norm(f: SampledFunction, p) -> float:
    """Discrete L_p norm of ``f`` with respect to its own measure."""
    return weighted_lp_norm(f.values, f.measure.weights, _p(p))


def linf_norm(f: SampledFunction) -> float:
    """max_nu |f(xi^nu)|; no norming functional is attached to this norm."""
    return float(np.abs(f.values).max())


def norming_kernel(values, weights, p: float, norm: float | None = None) -> np.ndarray:
    """Vector ``h`` with F_f(g) = sum_nu h_nu g_nu for the L_p norming functional of ``f``.

    For p > 1 this is w |f|^(p-2) conj(f) / ||f||_p^(p-1). For p = 1 the
    subgradient w conj(f)/|f| with 0 at zeros is used. Raises
    :class:`ZeroResidual` if ``f`` vanishes.
    """
    values = np.asarray(values, dtype=complex)
    if norm is None:
        norm = weighted_lp_norm(values, weights, p)
    if norm == 0.0:
        raise ZeroResidual("norming functional of the zero function")
    a = np.abs(values)
    if p == 2.0:
        return weights * np.conj(values) / norm
    u = values / norm
    au = a / norm
    if p == 1.0:
        with np.errstate(invalid="ignore", divide="ignore"):
            phase = np.where(a > 0, np.conj(values) / np.where(a > 0, a, 1.0), 0.0)
        return weights * phase
    with np.errstate(divide="ignore", invalid="ignore"):
        mag = np.where(au > 0, au ** (p - 2.0), 0.0)
    return weights * mag * np.conj(u)


def norming_functional_apply(f: SampledFunction, g: SampledFunction, p) -> complex:
    """F_f(g) for the norming (peak) functional of ``f`` in L_p of its measure."""
    _same_measure(f, g)
    h = norming_kernel(f.values, f.measure.weights, _p(p))
    return complex(np.dot(h, g.values))


def mixed_measure_norm(f_grid: SampledFunction, f_points: SampledFunction, p) -> float:
    """L_p norm for (mu + mu_m)/2: mean of the two p-th powers, then the 1/p root."""
    p = _p(p)
    a = lp_norm(f_grid, p)
    b = lp_norm(f_points, p)
    return float(((a**p + b**p) / 2.0) ** (1.0 / p))
