"""Finite dictionaries D_N: the multivariate trigonometric system and tabulated systems.

A dictionary is turned into a matrix by sampling it on the support of a
:class:`~sparsesampling.lp_space.DiscreteMeasure`; :class:`SampledSystem`
bundles that matrix with the measure weights and is what the greedy and
certification code works on.
"""

from __future__ import annotations

import csv
import json
import math
from collections.abc import Mapping
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionError, ParameterError
from .lp_space import (
    DiscreteMeasure,
    PointSet,
    SampledFunction,
    quadrature_size,
    weighted_lp_norm,
)

_CHUNK = 4096


def block_of(k) -> int:
    """Dyadic block j of a frequency: [2^(j-1)] <= ||k||_inf < 2^j, with j=0 for k=0."""
    top = int(np.max(np.abs(k))) if np.ndim(k) else abs(int(k))
    return 0 if top == 0 else top.bit_length()


def _key(k):
    if isinstance(k, (int, np.integer)):
        return int(k)
    return tuple(int(x) for x in k)


class CoefficientVector(Mapping):
    """Sparse map index -> complex coefficient. Zero entries are dropped.

    Indices are integers for tabulated systems and integer tuples (frequency
    vectors) for the trigonometric system.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries=None):
        items = entries.items() if isinstance(entries, Mapping) else (entries or ())
        self._entries = {_key(k): complex(v) for k, v in items if v != 0}

    def __getitem__(self, key):
        return self._entries[_key(key)]

    def get(self, key, default=0j):
        return self._entries.get(_key(key), default)

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __repr__(self):
        return f"CoefficientVector({self._entries!r})"

    def __add__(self, other):
        out = dict(self._entries)
        for k, v in other.items():
            out[k] = out.get(k, 0j) + v
        return CoefficientVector(out)

    def __sub__(self, other):
        return self + other.scaled(-1.0)

    def scaled(self, factor) -> "CoefficientVector":
        return CoefficientVector({k: factor * v for k, v in self._entries.items()})

    def restricted(self, keys) -> "CoefficientVector":
        keys = {_key(k) for k in keys}
        return CoefficientVector({k: v for k, v in self._entries.items() if k in keys})

    @property
    def indices(self) -> list:
        return list(self._entries)

    @property
    def values(self) -> np.ndarray:
        return np.array(list(self._entries.values()), dtype=complex)

    def l2(self) -> float:
        return float(np.linalg.norm(self.values)) if self._entries else 0.0

    def to_json(self) -> list:
        out = []
        for k, v in self._entries.items():
            kk = list(k) if isinstance(k, tuple) else k
            out.append([kk, v.real, v.imag])
        return out

    @classmethod
    def from_json(cls, rows) -> "CoefficientVector":
        return cls({_key(k): complex(re, im) for k, re, im in rows})


class TrigSystem:
    """Exponentials e^{i(k,x)} on the d-torus with ||k||_inf < 2^J.

    Frequencies are stored in canonical order: by dyadic block, then
    lexicographically. All tie-breaking elsewhere refers to this order.
    """

    bound = 1.0
    orthonormal = True

    def __init__(self, dim: int, max_level: int):
        if dim < 1 or max_level < 0:
            raise ParameterError("need dim >= 1 and max_level >= 0")
        self.dim = int(dim)
        self.max_level = int(max_level)
        top = 2**self.max_level - 1
        axes = [np.arange(-top, top + 1)] * self.dim
        grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
        blocks = np.array([block_of(k) for k in grid]) if len(grid) else np.zeros(0, int)
        order = np.lexsort(tuple(grid[:, i] for i in reversed(range(self.dim))) + (blocks,))
        self.frequencies = grid[order]
        self.frequencies.setflags(write=False)
        self.blocks = blocks[order]
        self.blocks.setflags(write=False)
        self._index = {tuple(int(x) for x in k): i for i, k in enumerate(self.frequencies)}

    def __repr__(self):
        return f"TrigSystem(dim={self.dim}, max_level={self.max_level})"

    @property
    def size(self) -> int:
        return len(self.frequencies)

    N = size

    @property
    def max_frequency(self) -> int:
        return 2**self.max_level - 1

    def block_slices(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.blocks == j) for j in range(self.max_level + 1)]

    def index_of(self, k) -> int:
        key = (int(k),) if np.ndim(k) == 0 else tuple(int(x) for x in k)
        if len(key) != self.dim:
            raise IndexError(f"frequency {k!r} has wrong dimension for d={self.dim}")
        try:
            return self._index[key]
        except KeyError:
            raise IndexError(f"frequency {k!r} is not in {self!r}") from None

    def key(self, i) -> tuple:
        return tuple(int(x) for x in self.frequencies[i])

    def to_dense(self, coeffs: CoefficientVector) -> np.ndarray:
        out = np.zeros(self.size, dtype=complex)
        for k, v in coeffs.items():
            out[self.index_of(k)] = v
        return out

    def from_dense(self, dense, indices=None) -> CoefficientVector:
        if indices is None:
            indices = range(self.size)
        return CoefficientVector({self.key(i): c for i, c in zip(indices, dense)})

    def sample_matrix(self, points: PointSet, columns=None) -> np.ndarray:
        freqs = self.frequencies if columns is None else self.frequencies[np.asarray(columns, int)]
        if points.dim != self.dim:
            raise DimensionError(f"points of dimension {points.dim} for d={self.dim}")
        return np.exp(1j * (points.points @ freqs.T))

    def gram(self, measure: DiscreteMeasure) -> np.ndarray:
        """Weighted Gram matrix sum_nu w_nu conj(g_a(x_nu)) g_b(x_nu).

        For d = 1 this is Toeplitz in the frequency difference and is built from
        the 2N-1 weighted moments, which avoids forming the sample matrix.
        """
        if self.dim == 1:
            freqs = self.frequencies[:, 0]
            diff = freqs[None, :] - freqs[:, None]
            mom = trig_moments(measure.support.points[:, 0], measure.weights, int(np.abs(diff).max()))
            return np.where(diff >= 0, mom[np.abs(diff)], np.conj(mom[np.abs(diff)]))
        out = np.zeros((self.size, self.size), dtype=complex)
        pts = measure.support.points
        for s in range(0, len(pts), _CHUNK):
            block = np.exp(1j * (pts[s : s + _CHUNK] @ self.frequencies.T))
            out += block.conj().T @ (measure.weights[s : s + _CHUNK, None] * block)
        return out

    def adjoint(self, measure: DiscreteMeasure, values) -> np.ndarray:
        """sum_nu w_nu conj(g_k(x_nu)) values_nu for every k; ``values`` may be (m,) or (m, B)."""
        vals = np.asarray(values, dtype=complex)
        out = np.zeros((self.size,) + vals.shape[1:], dtype=complex)
        pts = measure.support.points
        for s in range(0, len(pts), _CHUNK):
            block = np.exp(-1j * (self.frequencies @ pts[s : s + _CHUNK].T))
            wv = vals[s : s + _CHUNK] * (measure.weights[s : s + _CHUNK] if vals.ndim == 1
                                         else measure.weights[s : s + _CHUNK, None])
            out += block @ wv
        return out

    def quadrature_measure(self, max_frequency: int | None = None) -> DiscreteMeasure:
        top = self.max_frequency if max_frequency is None else max_frequency
        return DiscreteMeasure.grid(self.dim, quadrature_size(top))


def trig_moments(x, weights, top: int) -> np.ndarray:
    """sum_nu w_nu e^{i t x_nu} for t = 0..top, by chunked power recurrence."""
    out = np.zeros(top + 1, dtype=complex)
    x = np.asarray(x, dtype=float)
    for s in range(0, len(x), _CHUNK):
        z = np.exp(1j * x[s : s + _CHUNK])
        w = np.asarray(weights[s : s + _CHUNK], dtype=complex)
        # resync with exp every 64 steps to keep the recurrence accurate
        for t0 in range(0, top + 1, 64):
            cur = w * np.exp(1j * t0 * x[s : s + _CHUNK])
            for t in range(t0, min(t0 + 64, top + 1)):
                out[t] += cur.sum()
                cur = cur * z
    return out


def evaluate_trig_series(coeffs: CoefficientVector, points: PointSet) -> np.ndarray:
    """sum_k a_k e^{i(k,x)} at each point, for arbitrary integer frequencies."""
    if len(coeffs) == 0:
        return np.zeros(points.count, dtype=complex)
    freqs = np.array([k if isinstance(k, tuple) else (k,) for k in coeffs.indices], dtype=float)
    if freqs.shape[1] != points.dim:
        raise DimensionError("frequency and point dimensions differ")
    a = coeffs.values
    out = np.empty(points.count, dtype=complex)
    pts = points.points
    for s in range(0, len(pts), _CHUNK):
        out[s : s + _CHUNK] = np.exp(1j * (pts[s : s + _CHUNK] @ freqs.T)) @ a
    return out


def trig_grid_values(coeffs: CoefficientVector, dim: int, per_axis: int) -> np.ndarray:
    """Values of a trig series on the uniform grid of :func:`torus_grid`, by inverse FFT."""
    spectrum = np.zeros((per_axis,) * dim, dtype=complex)
    for k, v in coeffs.items():
        kk = k if isinstance(k, tuple) else (k,)
        if len(kk) != dim:
            raise DimensionError("frequency dimension differs from grid dimension")
        if max(abs(x) for x in kk) * 2 >= per_axis:
            raise ParameterError("grid too coarse for the frequencies present")
        spectrum[tuple(x % per_axis for x in kk)] += v
    return (np.fft.ifftn(spectrum) * per_axis**dim).ravel()


class TabulatedSystem:
    """Dictionary given by its values on a fixed reference point set.

    ``values[i, j]`` is g_i at ``grid.points[j]``. The reference measure is
    uniform on the grid unless ``weights`` is given. Nothing is normalized;
    the declared sup bound ``bound`` is carried along instead.
    """

    orthonormal = False

    def __init__(self, values, bound=None, R1=None, R2=None, K=None, grid=None, weights=None):
        vals = np.asarray(values, dtype=complex)
        if vals.ndim != 2:
            raise DimensionError("tabulated values must be an N x M matrix")
        self.values = vals
        self.values.setflags(write=False)
        top = float(np.abs(vals).max()) if vals.size else 0.0
        self.bound = top if bound is None else float(bound)
        if top > self.bound * (1 + 1e-12):
            raise ParameterError(f"entries reach {top}, above the declared bound {self.bound}")
        if R1 is not None and R2 is not None and not (0 < R1 <= R2):
            raise ParameterError("Riesz constants must satisfy 0 < R1 <= R2")
        self.R1, self.R2, self.K = R1, R2, K
        if grid is None:
            grid = PointSet(2 * np.pi * np.arange(vals.shape[1]) / vals.shape[1])
        if grid.count != vals.shape[1]:
            raise DimensionError("grid size differs from number of tabulated columns")
        self.grid = grid
        self.reference = (
            DiscreteMeasure.uniform(grid, kind="grid")
            if weights is None
            else DiscreteMeasure(grid, weights, kind="grid")
        )
        self._lookup = {tuple(p): j for j, p in enumerate(grid.points)}

    @property
    def size(self) -> int:
        return self.values.shape[0]

    N = size

    def key(self, i) -> int:
        return int(i)

    def index_of(self, i) -> int:
        i = int(i)
        if not 0 <= i < self.size:
            raise IndexError(f"element {i} not in a system of size {self.size}")
        return i

    def to_dense(self, coeffs: CoefficientVector) -> np.ndarray:
        out = np.zeros(self.size, dtype=complex)
        for k, v in coeffs.items():
            out[self.index_of(k)] = v
        return out

    def from_dense(self, dense, indices=None) -> CoefficientVector:
        if indices is None:
            indices = range(self.size)
        return CoefficientVector({int(i): c for i, c in zip(indices, dense)})

    def columns_for(self, points: PointSet) -> np.ndarray:
        try:
            return np.array([self._lookup[tuple(p)] for p in points.points], dtype=int)
        except KeyError:
            raise IndexError("tabulated systems can only be sampled on their reference grid") from None

    def sample_matrix(self, points: PointSet, columns=None) -> np.ndarray:
        mat = self.values[:, self.columns_for(points)].T
        return mat if columns is None else mat[:, np.asarray(columns, int)]

    def gram(self, measure: DiscreteMeasure) -> np.ndarray:
        mat = self.sample_matrix(measure.support)
        return mat.conj().T @ (measure.weights[:, None] * mat)

    def adjoint(self, measure: DiscreteMeasure, values) -> np.ndarray:
        vals = np.asarray(values, dtype=complex)
        w = measure.weights if vals.ndim == 1 else measure.weights[:, None]
        return self.sample_matrix(measure.support).conj().T @ (w * vals)

    def quadrature_measure(self, max_frequency=None) -> DiscreteMeasure:
        return self.reference

    # serialization: JSON {"B","R1","R2","K","values":[[[re,im],...],...]} or CSV
    # with a "#B=..,R1=..,R2=..,K=.." header and rows re0,im0,re1,im1,...
    def save(self, path):
        path = str(path)
        meta = {"B": self.bound, "R1": self.R1, "R2": self.R2, "K": self.K}
        if path.endswith(".json"):
            rows = [[[float(z.real), float(z.imag)] for z in row] for row in self.values]
            with open(path, "w") as fh:
                json.dump({**meta, "values": rows}, fh)
            return
        with open(path, "w", newline="") as fh:
            fh.write("#" + ",".join(f"{k}={'' if v is None else repr(v)}" for k, v in meta.items()) + "\n")
            writer = csv.writer(fh)
            for row in self.values:
                writer.writerow([repr(float(x)) for z in row for x in (z.real, z.imag)])

    @classmethod
    def load(cls, path) -> "TabulatedSystem":
        path = str(path)
        if path.endswith(".json"):
            with open(path) as fh:
                data = json.load(fh)
            vals = np.array([[complex(re, im) for re, im in row] for row in data["values"]])
            return cls(vals, bound=data.get("B"), R1=data.get("R1"), R2=data.get("R2"), K=data.get("K"))
        with open(path, newline="") as fh:
            header = fh.readline().strip()
            if not header.startswith("#"):
                raise ParameterError("tabulated CSV must start with a '#B=...' header line")
            meta = {}
            for part in header[1:].split(","):
                name, _, val = part.partition("=")
                meta[name.strip()] = float(val) if val.strip() else None
            rows = [row for row in csv.reader(fh) if row]
        nums = np.array([[float(x) for x in row] for row in rows])
        if nums.shape[1] % 2:
            raise ParameterError("each CSV row needs re,im pairs")
        vals = nums[:, 0::2] + 1j * nums[:, 1::2]
        return cls(vals, bound=meta.get("B"), R1=meta.get("R1"), R2=meta.get("R2"), K=meta.get("K"))


@dataclass(eq=False)
class SampledSystem:
    """A dictionary restricted to the support of a measure: matrix plus weights."""

    system: object
    measure: DiscreteMeasure

    @cached_property
    def matrix(self) -> np.ndarray:
        return self.system.sample_matrix(self.measure.support)

    @property
    def weights(self) -> np.ndarray:
        return self.measure.weights

    @property
    def size(self) -> int:
        return self.system.size

    @cached_property
    def gram(self) -> np.ndarray:
        return self.system.gram(self.measure)

    def synthesize(self, dense) -> np.ndarray:
        return self.matrix @ dense

    def norm(self, dense, p: float) -> float:
        return weighted_lp_norm(self.matrix @ dense, self.weights, p)

    def function(self, dense) -> SampledFunction:
        return SampledFunction(self.matrix @ dense, self.measure)


def continuous_context(system, max_frequency=None) -> SampledSystem:
    """The system sampled on its quadrature grid (trig) or reference measure (tabulated)."""
    return SampledSystem(system, system.quadrature_measure(max_frequency))


def evaluate(system, coeffs: CoefficientVector, points: PointSet, measure=None) -> SampledFunction:
    """Synthesize sum_i c_i g_i on ``points``. Unknown indices raise IndexError."""
    idx = [system.index_of(k) for k in coeffs]
    if measure is None:
        measure = DiscreteMeasure.uniform(points)
    if not idx:
        return SampledFunction(np.zeros(points.count, complex), measure)
    mat = system.sample_matrix(points, columns=idx)
    return SampledFunction(mat @ coeffs.values, measure)


def _max_abs_frequency(coeffs) -> int:
    top = 0
    for k in coeffs:
        kk = k if isinstance(k, tuple) else (k,)
        top = max(top, max(abs(x) for x in kk))
    return top


def continuous_l2_norm(system, coeffs: CoefficientVector) -> float:
    """Exact L_2(mu) norm. Parseval for the trig system, reference Gram otherwise."""
    if getattr(system, "orthonormal", False):
        return coeffs.l2()
    dense = system.to_dense(coeffs)
    return float(np.sqrt(max(np.real(dense.conj() @ system.gram(system.reference) @ dense), 0.0)))


def continuous_lp_norm(system, coeffs: CoefficientVector, p) -> float:
    """L_p(mu) norm; quadrature on an oversampled grid, Parseval at p=2 for trig."""
    p = float(p)
    if p < 1:
        raise ParameterError("need p >= 1")
    if isinstance(system, TrigSystem):
        for k in coeffs:
            system.index_of(k)
        if p == 2.0:
            return coeffs.l2()
        return trig_lp_norm(coeffs, system.dim, p)
    f = evaluate(system, coeffs, system.grid, measure=system.reference)
    return weighted_lp_norm(f.values, f.measure.weights, p)


def trig_lp_norm(coeffs: CoefficientVector, dim: int, p: float) -> float:
    """Continuous L_p norm of a trig series of arbitrary frequencies via FFT quadrature."""
    if len(coeffs) == 0:
        return 0.0
    if p == 2.0:
        return coeffs.l2()
    per_axis = quadrature_size(_max_abs_frequency(coeffs))
    vals = trig_grid_values(coeffs, dim, per_axis)
    return weighted_lp_norm(vals, np.full(vals.size, 1.0 / vals.size), p)


def a_beta_block_norms(coeffs: CoefficientVector, beta: float, system: TrigSystem | None = None,
                       levels: int | None = None) -> np.ndarray:
    """Per-block quasi-norms b_j = (sum_{k in block j} |a_k|^beta)^(1/beta).

    With a ``system`` the result has J+1 slots and frequencies outside it raise
    IndexError; otherwise the length is ``levels`` or the highest block present.
    """
    if not 0 < beta <= 1:
        raise ParameterError("need 0 < beta <= 1")
    if system is not None:
        for k in coeffs:
            system.index_of(k)
        n_blocks = system.max_level + 1
    else:
        top = max((block_of(k) for k in coeffs), default=0)
        n_blocks = (top + 1) if levels is None else max(levels, top + 1)
    sums = np.zeros(n_blocks)
    for k, v in coeffs.items():
        sums[block_of(k)] += abs(v) ** beta
    return sums ** (1.0 / beta)


def block_frequencies(dim: int, j: int) -> np.ndarray:
    """All k in Z^d with [2^(j-1)] <= ||k||_inf < 2^j, lexicographic."""
    top = 2**j - 1
    axes = [np.arange(-top, top + 1)] * dim
    grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    low = 0 if j == 0 else 2 ** (j - 1)
    keep = np.abs(grid).max(axis=1) >= low
    return grid[keep]


def block_size(dim: int, j: int) -> int:
    if j == 0:
        return 1
    return (2 ** (j + 1) - 1) ** dim - (2**j - 1) ** dim


def system_size(dim: int, level: int) -> int:
    return (2 ** (level + 1) - 1) ** dim


def log_binomial(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
