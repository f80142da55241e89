"""Weak Chebyshev Greedy Algorithm over discrete L_p spaces, budgets and brute-force oracles."""

from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .dictionaries import (
    CoefficientVector,
    SampledSystem,
    block_of,
    continuous_context,
)
from .errors import CapExceeded, ConvergenceError, ParameterError, ZeroResidual
from .lp_space import (
    ZERO_RESIDUAL_RTOL,
    DiscreteMeasure,
    LpExponent,
    SampledFunction,
    norming_kernel,
    weighted_lp_norm,
)

log = logging.getLogger(__name__)

WEIGHT_FLOOR = 1e-12
DEFAULT_CAP = 200_000


# --------------------------------------------------------------------------
# Chebyshev step: best L_p approximation from a span
# --------------------------------------------------------------------------

def _objective(y, A, w, c, p):
    return weighted_lp_norm(y - A @ c, w, p)


def _dual_residual(r, A, w, p, rnorm):
    """max_i |F_r(g_i)| over the columns of A."""
    if rnorm == 0.0:
        return 0.0
    h = norming_kernel(r, w, p, norm=rnorm)
    return float(np.abs(h @ A).max())


def _weighted_lstsq(A, y, omega):
    s = np.sqrt(omega)
    c, *_ = np.linalg.lstsq(s[:, None] * A, s * y, rcond=None)
    return c


def _golden_line(fun, lo=0.0, hi=2.0, steps=40):
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1, x2 = b - inv * (b - a), a + inv * (b - a)
    f1, f2 = fun(x1), fun(x2)
    for _ in range(steps):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv * (b - a)
            f1 = fun(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv * (b - a)
            f2 = fun(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def _newton_direction(r, A, w, p):
    """Newton step for sum w |r|^p in real coordinates of the coefficients."""
    k = A.shape[1]
    a = np.abs(r)
    top = a.max()
    floor = WEIGHT_FLOOR * top
    aa = np.maximum(a, floor)
    ur = r / aa
    # gradient of sum w|r|^p w.r.t. (Re c, Im c)
    g_c = -p * (A.conj().T @ (w * aa ** (p - 1) * ur))
    grad = np.concatenate([g_c.real, g_c.imag])
    # Hessian of |z|^p in R^2: p|z|^(p-2) [I + (p-2) u u^T], z = r, dz/dc = -A
    Ar = np.concatenate([A.real, -A.imag], axis=1)
    Ai = np.concatenate([A.imag, A.real], axis=1)
    base = w * p * aa ** (p - 2)
    ux, uy = ur.real, ur.imag
    H = (
        Ar.T @ ((base * (1 + (p - 2) * ux * ux))[:, None] * Ar)
        + Ai.T @ ((base * (1 + (p - 2) * uy * uy))[:, None] * Ai)
        + Ar.T @ ((base * (p - 2) * ux * uy)[:, None] * Ai)
        + Ai.T @ ((base * (p - 2) * ux * uy)[:, None] * Ar)
    )
    H += 1e-14 * np.trace(H) / (2 * k) * np.eye(2 * k)
    step = np.linalg.solve(H, -grad)
    return step[:k] + 1j * step[k:]


def _newton_try(y, A, w, p, c, r, rn, halvings=6):
    """Damped Newton step with halving; None unless the norm strictly decreases."""
    try:
        d = _newton_direction(r, A, w, p)
    except np.linalg.LinAlgError:
        return None
    s = 1.0
    for _ in range(halvings):
        c_new = c + s * d
        r_new = y - A @ c_new
        rn_new = weighted_lp_norm(r_new, w, p)
        if rn_new < rn * (1 - 1e-15):
            return c_new, r_new, rn_new
        s *= 0.5
    return None


def _project(y, A, w, p, tol=1e-9, max_iter=500, start=None):
    """Minimize ||y - A c||_{L_p(w)}; returns (c, residual, converged)."""
    k = A.shape[1]
    if k == 0:
        return np.zeros(0, complex), y.copy(), True
    if p == 2.0:
        c = _weighted_lstsq(A, y, w)
        return c, y - A @ c, True
    col_norm = max(weighted_lp_norm(A[:, i], w, p) for i in range(k))
    if start is None:
        c = _weighted_lstsq(A, y, w)
    else:
        c = np.asarray(start, dtype=complex)
        c2 = _weighted_lstsq(A, y, w)
        if _objective(y, A, w, c2, p) < _objective(y, A, w, c, p):
            c = c2
    r = y - A @ c
    rn = weighted_lp_norm(r, w, p)
    ynorm = weighted_lp_norm(y, w, p)
    for _ in range(max_iter):
        if rn <= ZERO_RESIDUAL_RTOL * max(ynorm, 1e-300):
            return c, r, True
        if p == 1.0:
            dual_ok = False
        else:
            dual_ok = _dual_residual(r, A, w, p, rn) <= tol * rn * col_norm
        if dual_ok:
            return c, r, True
        step = _newton_try(y, A, w, p, c, r, rn) if p != 1.0 else None
        if step is not None:
            c, r, rn = step
            continue
        a = np.abs(r)
        omega = w * np.maximum(a, WEIGHT_FLOOR * a.max()) ** (p - 2.0)
        d = _weighted_lstsq(A, y, omega) - c
        t, val = _golden_line(lambda s: _objective(y, A, w, c + s * d, p))
        if not val < rn * (1 - 1e-15):
            if p == 1.0:
                return c, r, True
            # Near the optimum the objective is flat to roundoff, so value-based
            # line searches stall. Take the full Newton step when it shrinks the
            # dual residual without increasing the norm beyond roundoff.
            try:
                d = _newton_direction(r, A, w, p)
            except np.linalg.LinAlgError:
                break
            c_new = c + d
            r_new = y - A @ c_new
            rn_new = weighted_lp_norm(r_new, w, p)
            if rn_new > rn * (1 + 1e-13) or _dual_residual(r_new, A, w, p, rn_new) >= _dual_residual(r, A, w, p, rn):
                break
            c, r, rn = c_new, r_new, rn_new
            continue
        c = c + t * d
        r = y - A @ c
        rn = weighted_lp_norm(r, w, p)
    converged = p == 1.0 or _dual_residual(r, A, w, p, rn) <= tol * rn * col_norm
    return c, r, converged


def lp_span_projection(f0: SampledFunction, system, indices, p, tol: float = 1e-9,
                       max_iter: int = 500, context: SampledSystem | None = None):
    """Best L_p approximation of ``f0`` from span{g_i : i in indices} in the measure of ``f0``.

    Returns ``(coefficients, residual)`` with ``coefficients`` a
    :class:`CoefficientVector` keyed like the system. For p = 2 the weighted
    normal equations are solved directly; otherwise damped IRLS is run until
    the dual residual max_i |F_res(g_i)| drops below tol * ||res|| * max ||g_i||.

    Raises :class:`ConvergenceError` (carrying the last iterate) if that does
    not happen within ``max_iter`` steps.
    """
    p = LpExponent.of(p).p
    indices = list(indices)
    if len(set(indices)) != len(indices):
        raise ParameterError("projection indices must be distinct")
    ctx = context or SampledSystem(system, f0.measure)
    A = ctx.matrix[:, indices] if indices else np.zeros((f0.measure.size, 0), complex)
    c, r, ok = _project(f0.values, A, f0.measure.weights, p, tol, max_iter)
    coeffs = system.from_dense(c, indices)
    residual = SampledFunction(r, f0.measure)
    if not ok:
        raise ConvergenceError("L_p projection did not reach the dual tolerance", coeffs, residual)
    return coeffs, residual


# --------------------------------------------------------------------------
# WCGA
# --------------------------------------------------------------------------

@dataclass
class GreedyTrace:
    """Per-iteration record of a WCGA run.

    ``residual_norms[0]`` is ||f_0||; entry m is ||f_m|| after m iterations.
    ``coefficients[m-1]`` holds the projection coefficients after iteration m,
    aligned with ``support_at(m)``.
    """

    p: float
    t: float
    selected: list = field(default_factory=list)
    coefficients: list = field(default_factory=list)
    residual_norms: list = field(default_factory=list)
    functional_maxima: list = field(default_factory=list)
    selected_values: list = field(default_factory=list)
    keys: list = field(default_factory=list)
    stop_reason: str = ""

    @property
    def iterations(self) -> int:
        return len(self.selected)

    def support_at(self, m: int) -> list:
        return list(dict.fromkeys(self.selected[:m]))

    def final_coefficients(self) -> CoefficientVector:
        if not self.coefficients:
            return CoefficientVector()
        supp = self.support_at(len(self.selected))
        return CoefficientVector({self.keys[i]: c for i, c in zip(supp, self.coefficients[-1])})

    def approximant_after(self, m: int) -> CoefficientVector:
        if m == 0:
            return CoefficientVector()
        supp = self.support_at(m)
        return CoefficientVector({self.keys[i]: c for i, c in zip(supp, self.coefficients[m - 1])})

    def to_dict(self) -> dict:
        def key(i):
            k = self.keys[i]
            return list(k) if isinstance(k, tuple) else k

        return {
            "p": self.p,
            "t": self.t,
            "stop_reason": self.stop_reason,
            "initial_norm": self.residual_norms[0] if self.residual_norms else None,
            "iterations": [
                {
                    "m": m + 1,
                    "selected_index": int(self.selected[m]),
                    "selected_key": key(self.selected[m]),
                    "functional_max": self.functional_maxima[m],
                    "selected_functional": self.selected_values[m],
                    "residual_norm": self.residual_norms[m + 1],
                    "coefficients": [[c.real, c.imag] for c in self.coefficients[m]],
                }
                for m in range(len(self.selected))
            ],
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def _select(values, t):
    top = float(values.max())
    if t >= 1.0:
        return int(np.argmax(values)), top
    return int(np.flatnonzero(values >= t * top)[0]), top


def wcga_run(f0: SampledFunction, system, p, t: float = 1.0, max_iter: int = 10,
             stop_tol: float = 1e-12, context: SampledSystem | None = None, tol: float = 1e-9,
             proj_max_iter: int = 500, method: str = "auto", correlations=None) -> GreedyTrace:
    """Run the WCGA on ``f0`` with the system restricted to ``f0``'s measure.

    Each iteration selects phi_m with |F_{f_{m-1}}(phi_m)| >= t sup_g |F_{f_{m-1}}(g)|
    (the maximizer for t = 1, otherwise the first index in canonical order
    over the threshold), projects f0 onto the span of everything selected
    so far and records the new residual. Stops after ``max_iter`` iterations
    or when ||f_m|| <= stop_tol ||f_0||.

    ``method="gram"`` (chosen automatically for p = 2 when the measure has
    many more points than the system has elements) works with the Gram
    matrix and the adjoint vector instead of the full sample matrix;
    ``correlations`` may supply that vector (sum_nu w_nu conj(g_k) f0) when
    it has been computed in bulk.
    """
    p = LpExponent.of(p).p
    if not 0 < t <= 1:
        raise ParameterError("weakness parameter t must lie in (0, 1]")
    if p == 1.0:
        log.info("WCGA at p=1 uses a subgradient norming functional")
    ctx = context or SampledSystem(system, f0.measure)
    if method == "auto":
        method = "gram" if (p == 2.0 and f0.measure.size > 4 * system.size) else "direct"
    keys = [system.key(i) for i in range(system.size)]
    trace = GreedyTrace(p=p, t=t, keys=keys)
    if method == "gram":
        if p != 2.0:
            raise ParameterError("the Gram path only applies at p=2")
        return _wcga_gram(f0, ctx, t, max_iter, stop_tol, trace, correlations)

    y = f0.values
    w = f0.measure.weights
    M = ctx.matrix
    norm0 = weighted_lp_norm(y, w, p)
    trace.residual_norms.append(norm0)
    r, rn = y.copy(), norm0
    support, c = [], np.zeros(0, complex)
    trace.stop_reason = "max_iter"
    for _ in range(max_iter):
        if rn <= stop_tol * norm0 or rn <= ZERO_RESIDUAL_RTOL * norm0:
            trace.stop_reason = "residual"
            break
        try:
            h = norming_kernel(r, w, p, norm=rn)
        except ZeroResidual:
            trace.stop_reason = "residual"
            break
        vals = np.abs(h @ M)
        i, top = _select(vals, t)
        trace.selected.append(i)
        trace.functional_maxima.append(top)
        trace.selected_values.append(float(vals[i]))
        if i not in support:
            support.append(i)
            start = np.concatenate([c, [0j]])
        else:
            start = c
        try:
            c, r, ok = _project(y, M[:, support], w, p, tol, proj_max_iter, start=start)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(str(exc), trace=trace) from exc
        rn = weighted_lp_norm(r, w, p)
        trace.coefficients.append(c.copy())
        trace.residual_norms.append(rn)
        if not ok:
            raise ConvergenceError("Chebyshev step did not converge",
                                   coefficients=trace.final_coefficients(),
                                   residual=SampledFunction(r, f0.measure), trace=trace)
    else:
        if rn <= stop_tol * norm0:
            trace.stop_reason = "residual"
    return trace


def _wcga_gram(f0, ctx, t, max_iter, stop_tol, trace, b=None):
    """p = 2 WCGA (weak OMP) from the Gram matrix and b = Phi^H W y."""
    system = ctx.system
    measure = f0.measure
    y = f0.values
    w = measure.weights
    G = ctx.gram
    if b is None:
        b = system.adjoint(measure, y)
    norm0 = weighted_lp_norm(y, w, 2.0)
    trace.residual_norms.append(norm0)
    support, c = [], np.zeros(0, complex)
    cols = np.zeros((measure.size, 0), complex)
    rn = norm0
    r = y.copy()
    trace.stop_reason = "max_iter"
    for _ in range(max_iter):
        if rn <= stop_tol * norm0 or rn <= ZERO_RESIDUAL_RTOL * norm0:
            trace.stop_reason = "residual"
            break
        corr = b - G[:, support] @ c if support else b
        vals = np.abs(corr) / rn
        i, top = _select(vals, t)
        trace.selected.append(i)
        trace.functional_maxima.append(top)
        trace.selected_values.append(float(vals[i]))
        if i not in support:
            support.append(i)
            cols = np.concatenate([cols, system.sample_matrix(measure.support, columns=[i])], axis=1)
        c = np.linalg.solve(G[np.ix_(support, support)], b[support])
        r = y - cols @ c
        rn = weighted_lp_norm(r, w, 2.0)
        trace.coefficients.append(c.copy())
        trace.residual_norms.append(rn)
    else:
        if rn <= stop_tol * norm0:
            trace.stop_reason = "residual"
    return trace


# --------------------------------------------------------------------------
# Iteration budgets
# --------------------------------------------------------------------------

@dataclass
class BudgetSpec:
    """Parameters of the iteration-count formulas.

    ``c`` scales the v' formulas (and plays C(q) in the base formula). The
    absolute constants are not known numerically, so they default to 1.
    """

    p: float
    V: float
    r: float
    v: int
    t: float = 1.0
    U: float | None = None
    c: float = 1.0

    def __post_init__(self):
        if not 0 < self.t <= 1:
            raise ParameterError("t must lie in (0, 1]")
        if self.v < 1:
            raise ParameterError("v must be >= 1")

    @property
    def smoothness(self) -> tuple[float, float]:
        """(gamma, q) with eta(L_p, w) <= gamma w^q."""
        p = self.p
        if p >= 2:
            return (p - 1.0) / 2.0, 2.0
        return 1.0 / p, p


def iteration_budget(spec: BudgetSpec, mode: str = "cgt2") -> int:
    """Number of WCGA iterations u for the Lebesgue-type inequalities.

    modes:
      ``cgt1``: ceil(C(q) gamma^(1/(q-1)) t^(-q') V^q' ln(V v) v^(r q'))
      ``cgt2``: ceil(c (2V)^q* ln(2 V v) v^(r q*))
      ``dt2``:  ceil(c (2V)^q* ln(3U + 1) v^(r q*))

    A nonpositive logarithm gives a budget of 1 (with a warning).
    """
    ex = LpExponent.of(spec.p)
    if ex.p == 1.0:
        raise ParameterError("iteration budgets need p > 1 (q* is undefined at p = 1)")
    V, v, r = spec.V, spec.v, spec.r
    if mode == "cgt1":
        gamma, q = spec.smoothness
        qp = q / (q - 1.0)
        const = spec.c * gamma ** (1.0 / (q - 1.0)) * spec.t ** (-qp)
        value = const * V**qp * math.log(V * v) * v ** (r * qp)
    elif mode == "cgt2":
        qs = ex.q_star
        value = spec.c * (2 * V) ** qs * math.log(2 * V * v) * v ** (r * qs)
    elif mode == "dt2":
        if spec.U is None:
            raise ParameterError("dt2 budget needs the unconditionality constant U")
        qs = ex.q_star
        value = spec.c * (2 * V) ** qs * math.log(3 * spec.U + 1) * v ** (r * qs)
    else:
        raise ParameterError(f"unknown budget mode {mode!r}")
    u = math.ceil(value - 1e-9 * abs(value))
    if u < 1:
        log.warning("iteration budget %s evaluated to %s; clamped to 1", mode, u)
        return 1
    return u


# --------------------------------------------------------------------------
# Block greedy v-term approximation for A^r_beta classes
# --------------------------------------------------------------------------

@dataclass
class BlockGreedyResult:
    support: list
    approximant: CoefficientVector
    predicted_error_bound: float
    n: int
    J: int
    alpha: float
    budgets: dict

    def __iter__(self):
        return iter((self.support, self.approximant, self.predicted_error_bound))


def block_budget_params(v: int, p: float, beta: float, smoothness_r: float, d: int):
    """(alpha, C1, n, J) for the block-greedy scheme.

    alpha solves alpha (1/beta - 1/p*) = r/2, C1 = 2^d + 2/(2^alpha - 1)
    bounds v_n + 2 sum_{j>n} v_j by C1 2^(nd), n is the largest level with
    C1 2^(nd) <= v (0 if none, -1 if v = 0) and J = ceil(nd/alpha) + n + 1.
    """
    p_star = min(p, 2.0)
    gap = 1.0 / beta - 1.0 / p_star
    if not 0 < beta <= 1 or smoothness_r <= 0 or not 1 < p < math.inf or gap <= 0:
        raise ParameterError("need 0 < beta <= 1, beta < p*, r > 0 and 1 < p < inf")
    alpha = smoothness_r / (2.0 * gap)
    C1 = 2.0**d + 2.0 / (2.0**alpha - 1.0)
    if v < 1:
        n = -1
    else:
        n = 0
        while C1 * 2.0 ** ((n + 1) * d) <= v:
            n += 1
    nn = max(n, 0)
    J = math.ceil(nn * d / alpha) + nn + 1
    return alpha, C1, n, J


def level_budget(n: int, j: int, d: int, alpha: float) -> int:
    """v_j = [2^(nd - alpha (j - n))]."""
    return int(math.floor(2.0 ** (n * d - alpha * (j - n)) + 1e-12))


def block_greedy_vterm(coeffs: CoefficientVector, v: int, p: float, beta: float,
                       smoothness_r: float, d: int) -> BlockGreedyResult:
    """Keep every coefficient in blocks <= n and the v_j largest in each block j > n.

    The predicted bound is sum_{j>n} (v_j + 1)^(1/p* - 1/beta) 2^(-r j), summed
    up to the highest level present (at least J). Ties in modulus are broken
    by canonical frequency order.
    """
    alpha, _, n, J = block_budget_params(v, p, beta, smoothness_r, d)
    p_star = min(p, 2.0)
    expo = 1.0 / p_star - 1.0 / beta
    if len(coeffs) <= v:
        return BlockGreedyResult(list(coeffs), CoefficientVector(coeffs), 0.0, n, J, alpha, {})
    by_block: dict[int, list] = {}
    for k, a in coeffs.items():
        by_block.setdefault(block_of(k), []).append((k, a))
    top = max(max(by_block), J)
    keep = []
    budgets = {}
    for j in sorted(by_block):
        items = by_block[j]
        if j <= n:
            keep.extend(k for k, _ in items)
            continue
        vj = level_budget(n, j, d, alpha)
        budgets[j] = vj
        items = sorted(items, key=lambda kv: (-abs(kv[1]), kv[0]))
        keep.extend(k for k, _ in items[:vj])
    bound = sum((level_budget(n, j, d, alpha) + 1) ** expo * 2.0 ** (-smoothness_r * j)
                for j in range(n + 1, top + 1))
    return BlockGreedyResult(keep, coeffs.restricted(keep), float(bound), n, J, alpha, budgets)


# --------------------------------------------------------------------------
# Brute-force oracles
# --------------------------------------------------------------------------

def _as_target(f0, system, measure):
    """Return (values, measure) for f0 given as samples or as coefficients."""
    if isinstance(f0, SampledFunction):
        return f0.values, f0.measure
    if measure is None:
        top = 0
        for k in f0:
            kk = k if isinstance(k, tuple) else (k,)
            top = max(top, max(abs(x) for x in kk))
        measure = system.quadrature_measure(max(top, getattr(system, "max_frequency", 0)))
    from .dictionaries import evaluate_trig_series

    if hasattr(system, "frequencies"):
        vals = evaluate_trig_series(f0, measure.support)
    else:
        ctx = SampledSystem(system, measure)
        vals = ctx.matrix @ system.to_dense(f0)
    return vals, measure


@dataclass
class OracleResult:
    support: list
    coefficients: CoefficientVector
    error: float
    evaluated: int


def sigma_v_bruteforce(f0, system, v: int, p, measure: DiscreteMeasure | None = None,
                       cap: int = DEFAULT_CAP, tol: float = 1e-10) -> OracleResult:
    """sigma_v(f0, D)_{L_p(measure)} by enumerating every support of size v.

    ``f0`` is a :class:`SampledFunction` (its measure is used) or a
    :class:`CoefficientVector` evaluated on ``measure`` (default: the
    system's quadrature grid, i.e. the continuous norm). Pass ``p=inf`` for
    the sup norm over the measure's support.
    """
    N = system.size
    if v < 0 or v > N:
        raise ParameterError(f"need 0 <= v <= N, got v={v}")
    total = math.comb(N, v)
    if total > cap:
        raise CapExceeded(total, cap)
    y, measure = _as_target(f0, system, measure)
    w = measure.weights
    if v == 0:
        return OracleResult([], CoefficientVector(), _norm(y, w, p), 1)
    ctx = SampledSystem(system, measure)
    M = ctx.matrix
    if p == math.inf:
        return _sigma_inf(y, M, w, v, system, total)
    p = LpExponent.of(p).p
    best = (math.inf, None, None)
    if p == 2.0:
        s = np.sqrt(w)
        As, ys = s[:, None] * M, s * y
        for supp in itertools.combinations(range(N), v):
            cols = list(supp)
            c, *_ = np.linalg.lstsq(As[:, cols], ys, rcond=None)
            err = float(np.linalg.norm(ys - As[:, cols] @ c))
            if err < best[0]:
                best = (err, cols, c)
    else:
        for supp in itertools.combinations(range(N), v):
            cols = list(supp)
            c, r, _ = _project(y, M[:, cols], w, p, tol)
            err = weighted_lp_norm(r, w, p)
            if err < best[0]:
                best = (err, cols, c)
    err, cols, c = best
    return OracleResult(cols, system.from_dense(c, cols), float(err), total)


def _norm(y, w, p):
    if p == math.inf:
        return float(np.abs(y).max())
    return weighted_lp_norm(y, w, float(p))


def _sigma_inf(y, M, w, v, system, total):
    """Sup-norm best v-term error; L_2 errors give a lower bound used for pruning."""
    import cvxpy as cp

    s = np.sqrt(w)
    As, ys = s[:, None] * M, s * y
    l2 = []
    for supp in itertools.combinations(range(M.shape[1]), v):
        cols = list(supp)
        c, *_ = np.linalg.lstsq(As[:, cols], ys, rcond=None)
        l2.append((float(np.linalg.norm(ys - As[:, cols] @ c)), cols))
    l2.sort(key=lambda e: e[0])
    best = (math.inf, None, None)
    evaluated = 0
    for low, cols in l2:
        if low >= best[0]:
            break
        x = cp.Variable(len(cols), complex=True)
        prob = cp.Problem(cp.Minimize(cp.max(cp.abs(y - M[:, cols] @ x))))
        prob.solve()
        evaluated += 1
        c = np.asarray(x.value).ravel()
        err = float(np.abs(y - M[:, cols] @ c).max())
        if err < best[0]:
            best = (err, cols, c)
    err, cols, c = best
    return OracleResult(cols, system.from_dense(c, cols), err, evaluated)


def bv_best_vterm_recovery(f0: SampledFunction, system, v: int, p, cap: int = DEFAULT_CAP) -> OracleResult:
    """Best v-term approximant in L_p(Omega_m, mu_m), computed from the samples in ``f0`` only."""
    return sigma_v_bruteforce(f0, system, v, p, cap=cap)
