"""Universal sampling discretization: point generation, sample budgets and certificates.

The certificates here are searches. They report the worst ratios they could
find and never raise on failure: a failing :class:`UsdReport` is a valid
result. For p = 2 the extreme ratio on a fixed support is an eigenvalue
problem, so that case is solved exactly per support, and exhaustively when
the number of supports fits in the trial budget.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .dictionaries import CoefficientVector, SampledSystem, continuous_context
from .errors import ParameterError
from .lp_space import TWO_PI, DiscreteMeasure, PointSet
from .rng import complex_gaussian, stream
from .search import coordinate_ascent

log = logging.getLogger(__name__)

USD_LOWER = 0.5
USD_UPPER = 1.5


def draw_random_points(d: int, m: int, seed: int) -> PointSet:
    """``m`` i.i.d. uniform points on [0, 2*pi)^d from a Philox stream keyed by ``seed``."""
    if m < 1:
        raise ParameterError("need m >= 1")
    pts = stream(seed, 0, d, m).uniform(0.0, TWO_PI, size=(m, d))
    # uniform() can round up to the endpoint
    return PointSet(np.minimum(pts, np.nextafter(TWO_PI, 0.0)))


def sample_budget(p: float, u: int, N: int, K_or_R1: float = 1.0, epsilon: float = 0.5,
                  C: float = 1.0) -> int:
    """Number of points suggested by the universal discretization bounds.

    p > 2:  ceil(C eps^-7 u^(p/2) (ln N)^2)
    p <= 2: ceil(C K u ln N (ln 2Ku)^2 (ln 2Ku + ln ln N))

    ``C`` is not known in closed form; the result is a shape, not a guarantee.
    """
    if u > N:
        raise ParameterError(f"u={u} exceeds N={N}")
    if u <= 0:
        log.warning("sample budget requested for u=%s; returning 0", u)
        return 0
    lnN = math.log(N)
    if p > 2:
        return math.ceil(C * epsilon**-7 * u ** (p / 2.0) * lnN**2)
    K = K_or_R1
    l2ku = math.log(2 * K * u)
    lnlnN = math.log(lnN) if lnN > 1 else 0.0
    return math.ceil(C * K * u * lnN * l2ku**2 * (l2ku + lnlnN))


def _supports(N, size, trials, rng_for):
    """Either all supports of ``size`` (if they fit in ``trials``) or ``trials`` random ones."""
    total = math.comb(N, size)
    if total <= trials:
        return list(itertools.combinations(range(N), size)), True
    out = []
    for t in range(trials):
        out.append(tuple(sorted(rng_for(t).choice(N, size=size, replace=False).tolist())))
    return out, False


@dataclass
class UsdReport:
    lower_ratio: float
    upper_ratio: float
    trials: int
    p: float
    u: int
    m: int
    lower_witness: CoefficientVector
    upper_witness: CoefficientVector
    exhaustive: bool = False

    @property
    def passed(self) -> bool:
        return self.lower_ratio >= USD_LOWER and self.upper_ratio <= USD_UPPER

    def to_dict(self) -> dict:
        return {
            "lower_ratio": self.lower_ratio,
            "upper_ratio": self.upper_ratio,
            "passed": self.passed,
            "trials": self.trials,
            "exhaustive": self.exhaustive,
            "p": self.p,
            "u": self.u,
            "m": self.m,
            "lower_witness": self.lower_witness.to_json(),
            "upper_witness": self.upper_witness.to_json(),
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)


def _disc_context(system, points):
    measure = points if isinstance(points, DiscreteMeasure) else DiscreteMeasure.uniform(points)
    return SampledSystem(system, measure)


def usd_ratio(system, points, coeffs: CoefficientVector, p: float) -> float:
    """(1/m) sum |f(xi^j)|^p / ||f||_p^p for the explicit witness ``coeffs``."""
    disc = _disc_context(system, points)
    cont = continuous_context(system)
    dense = system.to_dense(coeffs)
    return disc.norm(dense, p) ** p / cont.norm(dense, p) ** p


def _p2_extremes(disc_gram, cont_gram, supports, orthonormal):
    """Extreme generalized eigenpairs of (disc_gram, cont_gram) on each support."""
    idx = np.array(supports)
    A = disc_gram[idx[:, :, None], idx[:, None, :]]
    if orthonormal:
        w, vecs = np.linalg.eigh(A)
    else:
        Bm = cont_gram[idx[:, :, None], idx[:, None, :]]
        w = np.empty(A.shape[:2])
        vecs = np.empty(A.shape, dtype=complex)
        for s in range(len(idx)):
            w[s], vecs[s] = scipy.linalg.eigh(A[s], Bm[s])
    lo = int(np.argmin(w[:, 0]))
    hi = int(np.argmax(w[:, -1]))
    return (w[lo, 0], idx[lo], vecs[lo][:, 0]), (w[hi, -1], idx[hi], vecs[hi][:, -1])


def _ratio_score(p):
    def score(coefs, images):
        d, c = images
        num = np.sum(np.abs(d) ** p, axis=1)
        den = np.sum(np.abs(c) ** p, axis=1)
        return num / np.maximum(den, 1e-300)

    return score


def verify_usd(system, points, u: int, p: float = 2.0, trials: int = 1000, refine_steps: int = 3,
               seed: int = 0, exact_p2: bool = True) -> UsdReport:
    """Search for the worst discrete/continuous L_p^p ratio over u-sparse functions.

    Supports of size exactly ``u`` are drawn (or enumerated when C(N,u) <=
    ``trials``). For p = 2 with ``exact_p2`` each support is solved exactly as
    a generalized eigenproblem. Otherwise a complex Gaussian start is refined
    by ``refine_steps`` cycles of coordinate ascent, once maximizing and once
    minimizing the ratio.
    """
    N = system.size
    if u > N:
        raise ParameterError(f"u={u} exceeds N={N}")
    disc = _disc_context(system, points)
    cont = continuous_context(system)
    m = disc.measure.size
    supports, exhaustive = _supports(N, u, trials, lambda t: stream(seed, 1, t))

    if p == 2.0 and exact_p2:
        orth = getattr(system, "orthonormal", False)
        cont_gram = np.eye(N) if orth else cont.gram
        (lo, lo_s, lo_v), (hi, hi_s, hi_v) = _p2_extremes(disc.gram, cont_gram, supports, orth)
        return UsdReport(float(lo), float(hi), len(supports), p, u, m,
                         system.from_dense(lo_v, lo_s), system.from_dense(hi_v, hi_s), exhaustive)

    wd = disc.weights
    wc = cont.weights
    score = _ratio_score(p)
    lo_best, hi_best = math.inf, -math.inf
    lo_wit = hi_wit = None
    for t, supp in enumerate(supports):
        cols = list(supp)
        md = disc.matrix[:, cols] * wd[:, None] ** (1.0 / p)
        mc = cont.matrix[:, cols] * wc[:, None] ** (1.0 / p)
        start = complex_gaussian(stream(seed, 2, t), len(cols))
        start /= np.linalg.norm(start)
        c_hi, v_hi = coordinate_ascent(start, [md, mc], score, refine_steps)
        c_lo, v_lo = coordinate_ascent(start, [mc, md], score, refine_steps)
        v_lo = 1.0 / v_lo if v_lo > 0 else math.inf
        if v_hi > hi_best:
            hi_best, hi_wit = v_hi, system.from_dense(c_hi, cols)
        if v_lo < lo_best:
            lo_best, lo_wit = v_lo, system.from_dense(c_lo, cols)
    return UsdReport(float(lo_best), float(hi_best), len(supports), p, u, m, lo_wit, hi_wit, exhaustive)


def sampling_matrix(system, points: PointSet, p: float) -> np.ndarray:
    """G_N(xi): columns m^(-1/p) (g_i(xi^1), ..., g_i(xi^m))^T."""
    return system.sample_matrix(points) * points.count ** (-1.0 / p)


@dataclass
class RipReport:
    delta_estimate: float
    v: int
    p: float
    norm: str
    lower_ratio: float
    upper_ratio: float
    trials: int
    lower_witness: CoefficientVector | None = None
    upper_witness: CoefficientVector | None = None
    exhaustive: bool = False

    def to_dict(self) -> dict:
        return {
            "delta_estimate": self.delta_estimate,
            "v": self.v,
            "p": self.p,
            "norm": self.norm,
            "lower_ratio": self.lower_ratio,
            "upper_ratio": self.upper_ratio,
            "trials": self.trials,
            "exhaustive": self.exhaustive,
            "lower_witness": None if self.lower_witness is None else self.lower_witness.to_json(),
            "upper_witness": None if self.upper_witness is None else self.upper_witness.to_json(),
        }


def rip_check(U, norm: str = "euclidean", p: float = 2.0, v: int = 1, trials: int = 1000,
              seed: int = 0, system=None, refine_steps: int = 3) -> RipReport:
    """Estimate delta in (1-delta)||a|| <= ||U a||_{l_p^m} <= (1+delta)||a|| over v-sparse a.

    ``norm`` is ``"euclidean"`` (||a||_2, the classical RIP when p = 2) or
    ``"synthesis"`` (||sum a_i g_i||_{L_p(mu)} for ``system``). Ratios in the
    report are ||Ua|| / ||a||, not their p-th powers.
    """
    U = np.asarray(U, dtype=complex)
    m, N = U.shape
    if v > N or v < 1:
        raise ParameterError(f"need 1 <= v <= N, got v={v}, N={N}")
    if norm not in ("euclidean", "synthesis"):
        raise ParameterError(f"unknown norm {norm!r}")
    if norm == "synthesis" and system is None:
        raise ParameterError("synthesis norm needs the system")
    supports, exhaustive = _supports(N, v, trials, lambda t: stream(seed, 3, t))
    key = (lambda i: int(i)) if system is None else system.key

    def witness(vec, supp):
        return CoefficientVector({key(i): z for i, z in zip(supp, vec)})

    plain = norm == "euclidean" or getattr(system, "orthonormal", False)
    if p == 2.0:
        gram_u = U.conj().T @ U
        cont_gram = np.eye(N) if plain else continuous_context(system).gram
        (lo, lo_s, lo_v), (hi, hi_s, hi_v) = _p2_extremes(gram_u, cont_gram, supports, plain)
        lo_r, hi_r = math.sqrt(max(lo, 0.0)), math.sqrt(max(hi, 0.0))
        delta = max(hi_r - 1.0, 1.0 - lo_r, 0.0)
        return RipReport(delta, v, p, norm, lo_r, hi_r, len(supports),
                         witness(lo_v, lo_s), witness(hi_v, hi_s), exhaustive)

    if norm == "synthesis":
        cont = continuous_context(system)
        cmat, cw = cont.matrix, cont.weights
    score = _ratio_score(p)
    lo_best, hi_best = math.inf, -math.inf
    lo_wit = hi_wit = None
    for t, supp in enumerate(supports):
        cols = list(supp)
        mu_ = U[:, cols]
        if norm == "euclidean":
            # ||a||_2^p is not a p-th power sum; fold it into the score instead
            def sc(coefs, images, _p=p):
                num = np.sum(np.abs(images[0]) ** _p, axis=1)
                den = np.linalg.norm(coefs, axis=1) ** _p
                return num / np.maximum(den, 1e-300)

            def sc_inv(coefs, images, _p=p):
                num = np.sum(np.abs(images[0]) ** _p, axis=1)
                den = np.linalg.norm(coefs, axis=1) ** _p
                return den / np.maximum(num, 1e-300)

            maps_hi, score_hi, maps_lo, score_lo = [mu_], sc, [mu_], sc_inv
        else:
            mc = cmat[:, cols] * cw[:, None] ** (1.0 / p)
            maps_hi, score_hi, maps_lo, score_lo = [mu_, mc], score, [mc, mu_], score
        start = complex_gaussian(stream(seed, 4, t), len(cols))
        start /= np.linalg.norm(start)
        c_hi, v_hi = coordinate_ascent(start, maps_hi, score_hi, refine_steps)
        c_lo, v_lo = coordinate_ascent(start, maps_lo, score_lo, refine_steps)
        v_lo = 1.0 / v_lo if v_lo > 0 else math.inf
        if v_hi > hi_best:
            hi_best, hi_wit = v_hi, witness(c_hi, cols)
        if v_lo < lo_best:
            lo_best, lo_wit = v_lo, witness(c_lo, cols)
    lo_r, hi_r = lo_best ** (1.0 / p), hi_best ** (1.0 / p)
    delta = max(hi_r - 1.0, 1.0 - lo_r, 0.0)
    return RipReport(delta, v, p, norm, lo_r, hi_r, len(supports), lo_wit, hi_wit, exhaustive)


@dataclass
class IncoherenceEstimate:
    V_estimate: float
    r: float
    v: int
    S: int
    p: float
    trials: int
    witness_A: list = field(default_factory=list)
    witness: CoefficientVector | None = None

    def to_dict(self) -> dict:
        return {
            "V_estimate": self.V_estimate,
            "r": self.r,
            "v": self.v,
            "S": self.S,
            "p": self.p,
            "trials": self.trials,
            "witness_A": [list(k) if isinstance(k, tuple) else k for k in self.witness_A],
            "witness": None if self.witness is None else self.witness.to_json(),
        }


def _context(system, measure):
    if measure is None:
        return continuous_context(system)
    if isinstance(measure, PointSet):
        measure = DiscreteMeasure.uniform(measure)
    return SampledSystem(system, measure)


def _nested_sets(rng, N, v, S):
    b = int(rng.integers(1, S + 1))
    B = rng.choice(N, size=b, replace=False)
    a = int(rng.integers(1, min(v, b) + 1))
    A = rng.choice(b, size=a, replace=False)
    return B, np.sort(A)


def incoherence_estimate(system, measure=None, p: float = 2.0, v: int = 1, S: int = 1,
                         r: float = 0.5, trials: int = 100, refine_steps: int = 3,
                         seed: int = 0) -> IncoherenceEstimate:
    """Largest found value of sum_{i in A} |c_i| / (|A|^r ||sum_{i in B} c_i g_i||_p).

    ``measure`` selects the norm: ``None`` for the continuous L_p(mu) norm, a
    point set or discrete measure for L_p(Omega_m, mu_m). A lower bound on the
    true constant V.
    """
    N = system.size
    if not 1 <= v <= S <= N:
        raise ParameterError(f"need 1 <= v <= S <= N, got v={v}, S={S}, N={N}")
    ctx = _context(system, measure)
    mat, w = ctx.matrix, ctx.weights
    best, best_A, best_c = -math.inf, [], None
    for t in range(trials):
        rng = stream(seed, 5, t)
        B, A_pos = _nested_sets(rng, N, v, S)
        mb = mat[:, B] * w[:, None] ** (1.0 / p)
        scale = len(A_pos) ** r

        def score(coefs, images, _A=A_pos, _s=scale):
            num = np.sum(np.abs(coefs[:, _A]), axis=1)
            den = np.sum(np.abs(images[0]) ** p, axis=1) ** (1.0 / p)
            return num / (_s * np.maximum(den, 1e-300))

        start = complex_gaussian(rng, len(B))
        c, val = coordinate_ascent(start, [mb], score, refine_steps)
        if val > best:
            best, best_A = val, [system.key(B[i]) for i in A_pos]
            best_c = system.from_dense(c, B)
    return IncoherenceEstimate(float(best), r, v, S, p, trials, best_A, best_c)


def unconditionality_estimate(system, measure=None, p: float = 2.0, v: int = 1, S: int = 1,
                              trials: int = 100, refine_steps: int = 3, seed: int = 0) -> float:
    """Largest found ||sum_A c_i g_i|| / ||sum_B c_i g_i|| over A in B, |A| <= v, |B| <= S."""
    N = system.size
    if not 1 <= v <= S <= N:
        raise ParameterError(f"need 1 <= v <= S <= N, got v={v}, S={S}, N={N}")
    ctx = _context(system, measure)
    mat, w = ctx.matrix, ctx.weights
    best = -math.inf
    for t in range(trials):
        rng = stream(seed, 6, t)
        B, A_pos = _nested_sets(rng, N, v, S)
        mb = mat[:, B] * w[:, None] ** (1.0 / p)
        ma = np.zeros_like(mb)
        ma[:, A_pos] = mb[:, A_pos]

        def score(coefs, images):
            num = np.sum(np.abs(images[0]) ** p, axis=1)
            den = np.sum(np.abs(images[1]) ** p, axis=1)
            return (num / np.maximum(den, 1e-300)) ** (1.0 / p)

        start = complex_gaussian(rng, len(B))
        _, val = coordinate_ascent(start, [ma, mb], score, refine_steps)
        best = max(best, val)
    return float(best)
