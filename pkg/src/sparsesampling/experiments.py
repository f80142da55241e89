"""Desk-scale recovery experiments: rate tables, the linear baseline and Lebesgue-ratio ensembles.

All randomness is keyed by ``(config.seed, task ids)`` so tables do not depend
on thread scheduling. Members are shared across the v grid; point sets are
drawn per v and certified before use.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .dictionaries import (
    CoefficientVector,
    SampledSystem,
    TrigSystem,
    block_of,
    trig_lp_norm,
    trig_moments,
)
from .discretization import draw_random_points, sample_budget, verify_usd
from .errors import CapExceeded, ParameterError, PreconditionError
from .function_classes import ClassSpec, sample_member
from .greedy import (
    BudgetSpec,
    bv_best_vterm_recovery,
    iteration_budget,
    sigma_v_bruteforce,
    wcga_run,
)
from .lp_space import DiscreteMeasure, PointSet, SampledFunction

log = logging.getLogger(__name__)

THREADS_ENV = "SPARSESAMPLING_THREADS"
_CHUNK = 2048


class ConfigError(ParameterError):
    """Malformed experiment configuration."""


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

@dataclass
class MemberFamily:
    """``count`` members with blocks 0..``levels`` filled at ``density``."""

    density: float = 1.0
    levels: int = 8
    count: int = 10
    mode: str = "extremal"


@dataclass
class LebesgueConfig:
    level: int = 3
    v: int = 2
    u_factor: float = 3.0
    m: int = 0  # 0: use the sample rule at v
    trials: int = 20
    perturbation: float = 0.05


@dataclass
class ExperimentConfig:
    """Everything an experiment needs. JSON keys equal field names; unknown keys are rejected.

    ``sample_mode`` is ``"log_power"`` (m = ceil(v (ln 2v)^log_exponent)) or
    ``"budget"`` (the universal-discretization budget with ``sample_C``,
    ``epsilon``, ``K``). ``iteration_mode`` is ``"linear"`` (u = ceil(c v))
    or one of the greedy budget modes ``cgt1``, ``cgt2``, ``dt2``.
    """

    r: float = 1.0
    beta: float = 1.0
    dim: int = 1
    p: float = 2.0
    v_grid: list = field(default_factory=lambda: [4, 8, 16, 32, 64])
    sample_mode: str = "log_power"
    log_exponent: float = 4.0
    sample_C: float = 1.0
    epsilon: float = 0.5
    K: float = 1.0
    dictionary_level: int = 10
    members: list = field(default_factory=lambda: [MemberFamily(1.0, 10, 10), MemberFamily(1e-9, 15, 10)])
    iteration_mode: str = "linear"
    iteration_c: float = 2.0
    V: float = 1.0
    incoherence_r: float = 0.5
    U: float = 1.0
    t: float = 1.0
    tol: float = 1e-9
    usd_u_factor: float = 1.0
    usd_trials: int = 200
    usd_refine_steps: int = 3
    usd_attempts: int = 5
    linear_dim_fraction: float = 0.5
    mz_lower: float = 0.5
    oracle_cap: int = 200_000
    lebesgue: LebesgueConfig = field(default_factory=LebesgueConfig)
    seed: int = 0
    threads: int | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if any(b <= a for a, b in zip(self.v_grid, self.v_grid[1:])) or not self.v_grid:
            raise ConfigError("v_grid: must be a nonempty increasing list")
        if any(v < 1 for v in self.v_grid):
            raise ConfigError("v_grid: entries must be >= 1")
        if self.sample_mode not in ("log_power", "budget"):
            raise ConfigError(f"sample_mode: unknown value {self.sample_mode!r}")
        if self.iteration_mode not in ("linear", "cgt1", "cgt2", "dt2"):
            raise ConfigError(f"iteration_mode: unknown value {self.iteration_mode!r}")
        if not self.members or any(f.count < 1 for f in self.members):
            raise ConfigError("members: need at least one family with count >= 1")
        for name in ("usd_trials", "usd_attempts"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name}: must be >= 1")
        if self.lebesgue.trials < 1:
            raise ConfigError("lebesgue.trials: must be >= 1")
        if self.p < 1:
            raise ConfigError("p: must be >= 1")
        ClassSpec(self.r, self.beta, self.dim)

    @property
    def spec(self) -> ClassSpec:
        return ClassSpec(self.r, self.beta, self.dim)

    @property
    def member_count(self) -> int:
        return sum(f.count for f in self.members)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be a JSON object")
        _reject_unknown(cls, data, "")
        kw = dict(data)
        if "members" in kw:
            fams = kw["members"]
            if not isinstance(fams, list):
                raise ConfigError("members: must be a list of objects")
            out = []
            for i, fam in enumerate(fams):
                if not isinstance(fam, dict):
                    raise ConfigError(f"members[{i}]: must be an object")
                _reject_unknown(MemberFamily, fam, f"members[{i}].")
                out.append(MemberFamily(**fam))
            kw["members"] = out
        if "lebesgue" in kw:
            if not isinstance(kw["lebesgue"], dict):
                raise ConfigError("lebesgue: must be an object")
            _reject_unknown(LebesgueConfig, kw["lebesgue"], "lebesgue.")
            kw["lebesgue"] = LebesgueConfig(**kw["lebesgue"])
        try:
            return cls(**kw)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"config: {exc}") from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            text = fh.read()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
        return cls.from_dict(data)


def _reject_unknown(cls, data, prefix):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"unknown field(s): {', '.join(prefix + u for u in unknown)}")


def resolve_threads(requested: int | None = None) -> int:
    """CLI/config value, else the environment variable, else the CPU count."""
    if requested:
        return max(1, int(requested))
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _map(fn, items, threads):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# shared ingredients
# --------------------------------------------------------------------------

def sample_count(config: ExperimentConfig, v: int) -> int:
    if config.sample_mode == "log_power":
        return max(1, math.ceil(v * math.log(2 * v) ** config.log_exponent))
    N = TrigSystem(config.dim, config.dictionary_level).size
    return max(1, sample_budget(config.p, min(v, N), N, config.K, config.epsilon, config.sample_C))


def iteration_count(config: ExperimentConfig, v: int) -> int:
    if config.iteration_mode == "linear":
        return max(1, math.ceil(config.iteration_c * v - 1e-9))
    spec = BudgetSpec(config.p, config.V, config.incoherence_r, v, config.t, config.U, config.iteration_c)
    return iteration_budget(spec, config.iteration_mode)


def _sub_seed(*keys) -> int:
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


@dataclass
class CertifiedPoints:
    points: PointSet
    certified: bool
    attempts: int
    lower_ratio: float
    upper_ratio: float


def certified_points(config: ExperimentConfig, v: int, m: int | None = None,
                     system: TrigSystem | None = None) -> CertifiedPoints:
    """Random points for sparsity level v, redrawn up to ``usd_attempts`` times until certified."""
    system = system or TrigSystem(config.dim, config.dictionary_level)
    m = sample_count(config, v) if m is None else m
    u = min(system.size, max(1, math.ceil(config.usd_u_factor * v)))
    report = None
    for attempt in range(config.usd_attempts):
        pts = draw_random_points(config.dim, m, _sub_seed(config.seed, 11, v, attempt))
        report = verify_usd(system, pts, u, config.p, config.usd_trials, config.usd_refine_steps,
                            seed=_sub_seed(config.seed, 12, v, attempt))
        if report.passed:
            return CertifiedPoints(pts, True, attempt + 1, report.lower_ratio, report.upper_ratio)
        log.warning("usd certification failed for v=%s (attempt %s)", v, attempt + 1)
    return CertifiedPoints(pts, False, config.usd_attempts, report.lower_ratio, report.upper_ratio)


def draw_members(config: ExperimentConfig) -> list[CoefficientVector]:
    out = []
    i = 0
    for fam in config.members:
        for _ in range(fam.count):
            out.append(sample_member(config.spec, fam.levels, fam.density, config.seed, fam.mode, member=i))
            i += 1
    return out


def sample_members(members, points: PointSet) -> np.ndarray:
    """(m, B) matrix of member values at ``points``, one exponential pass over the union of frequencies."""
    keys = sorted({k for c in members for k in c})
    if not keys:
        return np.zeros((points.count, len(members)), complex)
    pos = {k: i for i, k in enumerate(keys)}
    C = np.zeros((len(keys), len(members)), complex)
    for b, c in enumerate(members):
        for k, a in c.items():
            C[pos[k], b] = a
    freqs = np.array(keys, dtype=float).reshape(len(keys), -1)
    out = np.empty((points.count, len(members)), complex)
    for s in range(0, points.count, _CHUNK):
        out[s : s + _CHUNK] = np.exp(1j * (points.points[s : s + _CHUNK] @ freqs.T)) @ C
    return out


def continuous_error(member: CoefficientVector, approx: CoefficientVector, p: float, dim: int) -> float:
    """||member - approx||_{L_p(mu)}: Parseval at p = 2, FFT quadrature otherwise."""
    diff = member - approx
    if p == 2.0:
        return diff.l2()
    return trig_lp_norm(diff, dim, p)


def sigma_l2_trig(member: CoefficientVector, system: TrigSystem, k: int) -> float:
    """Exact sigma_k(member, system)_{L_2(mu)}: by Parseval, drop all but the k largest in-system terms."""
    inside, outside = [], 0.0
    for key, a in member.items():
        try:
            system.index_of(key)
            inside.append(abs(a))
        except IndexError:
            outside += abs(a) ** 2
    inside.sort(reverse=True)
    return math.sqrt(outside + sum(a * a for a in inside[k:]))


# --------------------------------------------------------------------------
# rate tables
# --------------------------------------------------------------------------

@dataclass
class RateTable:
    """Rows of per-v results plus a fitted log-log slope.

    ``fit_variable`` names the column the slope was fitted against ("v" for
    the nonlinear pipeline, "m" for the linear baseline).
    """

    kind: str
    rows: list = field(default_factory=list)
    fit_variable: str = "v"
    slope: float | None = None
    intercept: float | None = None
    residual: float | None = None
    reference_slope: float | None = None
    notes: list = field(default_factory=list)

    columns = ("v", "m", "u", "mean_error", "max_error", "oracle_error", "certified", "attempts",
               "usd_lower", "usd_upper", "dim", "mz_lambda_min", "ridge")

    def fit(self):
        xs = [row[self.fit_variable] for row in self.rows]
        ys = [row["max_error"] for row in self.rows]
        try:
            self.slope, self.intercept, self.residual = fit_rate(xs, ys)
        except ParameterError as exc:
            self.notes.append(f"no fit: {exc}")
        return self

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "fit_variable": self.fit_variable,
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "reference_slope": self.reference_slope,
            "notes": list(self.notes),
            "rows": [{c: row.get(c) for c in self.columns} for row in self.rows],
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow(["" if row.get(c) is None else _fmt(row.get(c)) for c in self.columns])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def _fmt(x):
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return repr(x)
    return str(x)


def fit_rate(xs, errors):
    """Least squares of log(error) on log(x); returns (slope, intercept, rms residual).

    Rows with nonpositive or non-finite error are dropped; fewer than four
    remaining rows is a refusal (:class:`ParameterError`).
    """
    pairs = [(float(x), float(e)) for x, e in zip(xs, errors)
             if e is not None and math.isfinite(e) and e > 0 and x > 0]
    if len(pairs) < 4:
        raise ParameterError(f"need at least 4 rows with positive error, have {len(pairs)}")
    lx = np.log([x for x, _ in pairs])
    ly = np.log([e for _, e in pairs])
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    res = ly - A @ np.array([slope, intercept])
    return float(slope), float(intercept), float(np.sqrt(np.mean(res**2)))


def _row(v, m, pts: CertifiedPoints, **extra):
    row = {c: None for c in RateTable.columns}
    row.update(v=v, m=m, certified=pts.certified, attempts=pts.attempts,
               usd_lower=pts.lower_ratio, usd_upper=pts.upper_ratio)
    row.update(extra)
    return row


def _recover_member(f0, system, ctx, config, u, corr):
    trace = wcga_run(f0, system, config.p, t=config.t, max_iter=u, stop_tol=0.0, context=ctx,
                     tol=config.tol, correlations=corr)
    return trace.final_coefficients(), len(trace.support_at(trace.iterations))


def recovery_pipeline(config: ExperimentConfig, threads: int | None = None) -> RateTable:
    """Nonlinear recovery rate table: certified points, WCGA, continuous error, max over members."""
    threads = resolve_threads(threads or config.threads)
    system = TrigSystem(config.dim, config.dictionary_level)
    members = draw_members(config)
    table = RateTable("nonlinear", fit_variable="v",
                      reference_slope=0.5 - 1.0 / config.beta - config.r / config.dim)
    small = system.size <= 24
    for v in config.v_grid:
        m = sample_count(config, v)
        u = iteration_count(config, v)
        pts = certified_points(config, v, m, system)
        if not pts.certified:
            table.rows.append(_row(v, m, pts, u=u, mean_error=math.nan, max_error=math.nan))
            table.notes.append(f"v={v}: no certified point set after {pts.attempts} attempts")
            continue
        measure = DiscreteMeasure.uniform(pts.points)
        ctx = SampledSystem(system, measure)
        Y = sample_members(members, pts.points)
        gram_path = config.p == 2.0 and m > 4 * system.size
        corr = system.adjoint(measure, Y) if gram_path else None

        def task(b):
            f0 = SampledFunction(Y[:, b], measure)
            approx, k = _recover_member(f0, system, ctx, config, u, None if corr is None else corr[:, b])
            err = continuous_error(members[b], approx, config.p, config.dim)
            oracle = None
            if config.p == 2.0:
                oracle = sigma_l2_trig(members[b], system, k)
            if small and v <= 3:
                bv = bv_best_vterm_recovery(f0, system, v, config.p, cap=config.oracle_cap)
                oracle = continuous_error(members[b], bv.coefficients, config.p, config.dim)
            return err, oracle

        results = _map(task, range(len(members)), threads)
        errs = [e for e, _ in results]
        oracles = [o for _, o in results if o is not None]
        table.rows.append(_row(v, m, pts, u=u, mean_error=float(np.mean(errs)), max_error=float(np.max(errs)),
                               oracle_error=float(np.max(oracles)) if oracles else None))
    return table.fit()


# --------------------------------------------------------------------------
# linear baseline
# --------------------------------------------------------------------------

def _band_frequencies(dim: int, n: int) -> np.ndarray:
    axes = [np.arange(-n, n + 1)] * dim
    return np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)


def _band_gram(points: PointSet, n: int, moments=None) -> np.ndarray:
    """Gram matrix of {e^{i(k,x)} : ||k||_inf <= n} under the uniform measure on ``points``."""
    m = points.count
    if points.dim == 1:
        mom = trig_moments(points.points[:, 0], np.full(m, 1.0 / m), 2 * n) if moments is None else moments
        k = np.arange(-n, n + 1)
        diff = k[None, :] - k[:, None]
        vals = mom[np.abs(diff)]
        return np.where(diff >= 0, vals, np.conj(vals))
    freqs = _band_frequencies(points.dim, n)
    out = np.zeros((len(freqs), len(freqs)), complex)
    for s in range(0, m, _CHUNK):
        block = np.exp(1j * (points.points[s : s + _CHUNK] @ freqs.T))
        out += block.conj().T @ block
    return out / m


def _band_adjoint(points: PointSet, n: int, values) -> np.ndarray:
    freqs = _band_frequencies(points.dim, n)
    m = points.count
    out = np.zeros((len(freqs),) + np.shape(values)[1:], complex)
    for s in range(0, m, _CHUNK):
        block = np.exp(-1j * (freqs @ points.points[s : s + _CHUNK].T))
        out += block @ values[s : s + _CHUNK]
    return out / m


def _mz_holds(G, lower):
    try:
        scipy.linalg.cholesky(G - lower * np.eye(len(G)), lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        return False
    return True


def choose_linear_band(points: PointSet, fraction: float = 0.5, lower: float = 0.5):
    """Largest n with (2n+1)^d <= fraction * m and lambda_min(Gram_n) >= ``lower``.

    Gram matrices of nested bands are principal submatrices of each other, so
    lambda_min decreases with n and the search can bisect. Returns
    ``(n, lambda_min)``; n = 0 is always admissible.
    """
    d, m = points.dim, points.count
    n_cap = 0
    while (2 * (n_cap + 1) + 1) ** d <= fraction * m:
        n_cap += 1
    mom = trig_moments(points.points[:, 0], np.full(m, 1.0 / m), 2 * n_cap) if d == 1 else None

    def ok(n):
        return _mz_holds(_band_gram(points, n, None if mom is None else mom[: 2 * n + 1]), lower)

    lo, hi = 0, None
    step = 1
    while hi is None:
        cand = min(lo + step, n_cap)
        if cand == lo:
            break
        if ok(cand):
            lo = cand
            step *= 2
        else:
            hi = cand
    if hi is not None:
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ok(mid):
                lo = mid
            else:
                hi = mid
    G = _band_gram(points, lo, None if mom is None else mom[: 2 * lo + 1])
    lam = float(scipy.linalg.eigvalsh(G, subset_by_index=[0, 0])[0])
    return lo, lam


def linear_recovery(points: PointSet, values, n: int, ridge: float = 1e-10):
    """Least squares onto span{e^{i(k,x)} : ||k||_inf <= n} from samples.

    Returns ``(coefficient matrix (dim_n, B), frequencies, ridge_used)``. A
    subspace larger than the number of samples is refused.
    """
    dim_n = (2 * n + 1) ** points.dim
    if dim_n > points.count:
        raise PreconditionError(f"subspace dimension {dim_n} exceeds the {points.count} samples")
    values = np.asarray(values, complex)
    squeeze = values.ndim == 1
    vals = values[:, None] if squeeze else values
    G = _band_gram(points, n)
    b = _band_adjoint(points, n, vals)
    used_ridge = False
    try:
        c = scipy.linalg.solve(G, b, assume_a="pos")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning):
        used_ridge = True
        c = scipy.linalg.solve(G + ridge * np.eye(len(G)), b, assume_a="her")
    return (c[:, 0] if squeeze else c), _band_frequencies(points.dim, n), used_ridge


def _coeffs_from(freqs, col):
    return CoefficientVector({tuple(int(x) for x in k): a for k, a in zip(freqs, col)})


def linear_baseline(config: ExperimentConfig, threads: int | None = None) -> RateTable:
    """Linear least-squares recovery from the same certified samples; slope fitted against m."""
    if config.p != 2.0:
        raise ParameterError("the linear baseline compares L_2 errors; set p = 2")
    system = TrigSystem(config.dim, config.dictionary_level)
    members = draw_members(config)
    table = RateTable("linear", fit_variable="m", reference_slope=-config.r / config.dim)
    for v in config.v_grid:
        m = sample_count(config, v)
        pts = certified_points(config, v, m, system)
        Y = sample_members(members, pts.points)
        n, lam = choose_linear_band(pts.points, config.linear_dim_fraction, config.mz_lower)
        C, freqs, ridge = linear_recovery(pts.points, Y, n)
        errs = [continuous_error(mem, _coeffs_from(freqs, C[:, b]), 2.0, config.dim)
                for b, mem in enumerate(members)]
        table.rows.append(_row(v, m, pts, mean_error=float(np.mean(errs)), max_error=float(np.max(errs)),
                               dim=len(freqs), mz_lambda_min=lam, ridge=ridge))
        if ridge:
            table.notes.append(f"v={v}: singular normal equations, ridge fallback used")
    return table.fit()


# --------------------------------------------------------------------------
# Lebesgue-ratio ensembles
# --------------------------------------------------------------------------

@dataclass
class LebesgueTable:
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    columns = ("trial", "sigma_inf", "sigma_mixed", "wcga_error", "wcga_mixed_error", "bv_error",
               "ratio_inf", "ratio_mixed", "ratio_bv", "exact")

    def to_dict(self):
        return {"summary": self.summary, "rows": [{c: r.get(c) for c in self.columns} for r in self.rows]}

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow(["" if row.get(c) is None else _fmt(row.get(c)) for c in self.columns])
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(buf.getvalue())
        return buf.getvalue()


def _ratio(num, den, exact_tol=1e-8):
    if den <= exact_tol:
        return None if num > exact_tol else 1.0
    return num / den


def random_target(system: TrigSystem, v: int, perturbation: float, seed: int, trial: int) -> CoefficientVector:
    """v-sparse random coefficients plus a dense perturbation of l_1 size ``perturbation``."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 13, trial]))
    dense = np.zeros(system.size, complex)
    idx = rng.choice(system.size, size=v, replace=False)
    dense[idx] = rng.standard_normal(v) + 1j * rng.standard_normal(v)
    noise = rng.standard_normal(system.size) + 1j * rng.standard_normal(system.size)
    dense += perturbation * noise / np.abs(noise).sum()
    return system.from_dense(dense)


def lebesgue_ensemble(config: ExperimentConfig, threads: int | None = None) -> LebesgueTable:
    """Ratios ||f_u|| / sigma_v(f0) for WCGA (continuous and mixed norms) and for B_v.

    sigma_v is computed by brute force: in the sup norm over the quadrature
    grid, and in L_p of the mixed measure (mu + mu_m)/2. Ratios of exact
    recoveries (both sides <= 1e-8) are reported as 1 with ``exact`` set.
    """
    lc = config.lebesgue
    threads = resolve_threads(threads or config.threads)
    system = TrigSystem(config.dim, lc.level)
    v = lc.v
    if math.comb(system.size, v) > config.oracle_cap:
        raise CapExceeded(math.comb(system.size, v), config.oracle_cap)
    u = max(1, math.ceil(lc.u_factor * v - 1e-9))
    m = lc.m or sample_count(config, v)
    pts = certified_points(config, v, m, system)
    disc = DiscreteMeasure.uniform(pts.points)
    grid = system.quadrature_measure()
    mixed = DiscreteMeasure.mixed(grid, disc)
    ctx_disc = SampledSystem(system, disc)
    ctx_grid = SampledSystem(system, grid)
    ctx_mixed = SampledSystem(system, mixed)
    p = config.p

    def task(trial):
        target = random_target(system, v, lc.perturbation, config.seed, trial)
        dense = system.to_dense(target)
        f_disc = ctx_disc.function(dense)
        f_mixed = ctx_mixed.function(dense)
        s_inf = sigma_v_bruteforce(ctx_grid.function(dense), system, v, math.inf, cap=config.oracle_cap).error
        s_mix = sigma_v_bruteforce(f_mixed, system, v, p, cap=config.oracle_cap).error
        tr = wcga_run(f_disc, system, p, t=config.t, max_iter=u, stop_tol=0.0, context=ctx_disc, tol=config.tol)
        err = continuous_error(target, tr.final_coefficients(), p, config.dim)
        tr_mix = wcga_run(f_mixed, system, p, t=config.t, max_iter=u, stop_tol=0.0, context=ctx_mixed,
                          tol=config.tol)
        err_mix = tr_mix.residual_norms[-1]
        bv = bv_best_vterm_recovery(f_disc, system, v, p, cap=config.oracle_cap)
        err_bv = continuous_error(target, bv.coefficients, p, config.dim)
        r_inf, r_mix, r_bv = _ratio(err, s_inf), _ratio(err_mix, s_mix), _ratio(err_bv, s_inf)
        exact = s_inf <= 1e-8 and err <= 1e-8
        return {"trial": trial, "sigma_inf": s_inf, "sigma_mixed": s_mix, "wcga_error": err,
                "wcga_mixed_error": err_mix, "bv_error": err_bv, "ratio_inf": r_inf,
                "ratio_mixed": r_mix, "ratio_bv": r_bv, "exact": exact}

    rows = _map(task, range(lc.trials), threads)
    table = LebesgueTable(rows)

    def quantiles(key):
        vals = [r[key] for r in rows if r[key] is not None]
        if not vals:
            return None
        q = np.quantile(vals, [0.0, 0.5, 0.9, 1.0])
        return {"min": float(q[0]), "median": float(q[1]), "q90": float(q[2]), "max": float(q[3])}

    both = [r for r in rows if r["ratio_bv"] is not None and r["ratio_inf"] is not None]
    table.summary = {
        "v": v, "u": u, "m": m, "N": system.size, "p": p, "trials": lc.trials,
        "certified": pts.certified,
        "ratio_inf": quantiles("ratio_inf"),
        "ratio_mixed": quantiles("ratio_mixed"),
        "ratio_bv": quantiles("ratio_bv"),
        "all_finite": all(r[k] is not None and math.isfinite(r[k])
                          for r in rows for k in ("ratio_inf", "ratio_mixed", "ratio_bv")),
        "bv_not_worse_fraction": (sum(r["ratio_bv"] <= r["ratio_inf"] + 1e-12 for r in both) / len(both)
                                  if both else None),
    }
    return table


# --------------------------------------------------------------------------
# plotting
# --------------------------------------------------------------------------

def svg_loglog(tables, path=None, width=640, height=440) -> str:
    """Static SVG: max error against each table's fit variable, fitted lines and reference slopes."""
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    series = []
    for t in tables:
        pts = [(row[t.fit_variable], row["max_error"]) for row in t.rows
               if row["max_error"] is not None and math.isfinite(row["max_error"]) and row["max_error"] > 0]
        series.append((t, pts))
    allpts = [pt for _, pts in series for pt in pts]
    if not allpts:
        raise ParameterError("nothing to plot")
    lx = [math.log10(x) for x, _ in allpts]
    ly = [math.log10(y) for _, y in allpts]
    x0, x1 = math.floor(min(lx)), math.ceil(max(lx))
    y0, y1 = math.floor(min(ly)), math.ceil(max(ly))
    x1, y1 = max(x1, x0 + 1), max(y1, y0 + 1)
    L, R, T, B = 70, 20, 20, 50

    def X(x):
        return L + (math.log10(x) - x0) / (x1 - x0) * (width - L - R)

    def Y(y):
        return height - B - (math.log10(y) - y0) / (y1 - y0) * (height - T - B)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{L}" y="{T}" width="{width - L - R}" height="{height - T - B}" fill="none" stroke="black"/>']
    for e in range(x0, x1 + 1):
        xx = X(10.0**e)
        out.append(f'<line x1="{xx:.2f}" y1="{T}" x2="{xx:.2f}" y2="{height - B}" stroke="#ddd"/>')
        out.append(f'<text x="{xx:.2f}" y="{height - B + 16}" text-anchor="middle">1e{e}</text>')
    for e in range(y0, y1 + 1):
        yy = Y(10.0**e)
        out.append(f'<line x1="{L}" y1="{yy:.2f}" x2="{width - R}" y2="{yy:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{L - 6}" y="{yy + 4:.2f}" text-anchor="end">1e{e}</text>')
    names = ", ".join(sorted({t.fit_variable for t in tables}))
    out.append(f'<text x="{(width + L - R) / 2:.1f}" y="{height - 12}" text-anchor="middle">{names}</text>')
    out.append(f'<text x="16" y="{(height - B + T) / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {(height - B + T) / 2:.1f})">max error</text>')
    for i, (t, pts) in enumerate(series):
        col = colors[i % len(colors)]
        for x, y in pts:
            out.append(f'<circle cx="{X(x):.2f}" cy="{Y(y):.2f}" r="3.5" fill="{col}"/>')
        if t.slope is not None and pts:
            xa, xb = pts[0][0], pts[-1][0]
            ya = math.exp(t.intercept) * xa**t.slope
            yb = math.exp(t.intercept) * xb**t.slope
            out.append(f'<line x1="{X(xa):.2f}" y1="{Y(ya):.2f}" x2="{X(xb):.2f}" y2="{Y(yb):.2f}" '
                       f'stroke="{col}" stroke-width="1.5"/>')
            if t.reference_slope is not None:
                yr = ya * (xb / xa) ** t.reference_slope
                out.append(f'<line x1="{X(xa):.2f}" y1="{Y(ya):.2f}" x2="{X(xb):.2f}" y2="{Y(yr):.2f}" '
                           f'stroke="{col}" stroke-dasharray="5,4"/>')
        label = f"{t.kind}: slope {t.slope:.3f}" if t.slope is not None else f"{t.kind}: no fit"
        if t.reference_slope is not None:
            label += f" (reference {t.reference_slope:.3f})"
        out.append(f'<text x="{L + 10}" y="{T + 18 + 16 * i}" fill="{col}">{label}</text>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
