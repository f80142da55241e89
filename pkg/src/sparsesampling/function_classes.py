"""The classes A^r_beta over the trigonometric system.

A member is stored as one explicit representation (a :class:`CoefficientVector`
over frequencies). Block j collects the frequencies with
[2^(j-1)] <= ||k||_inf < 2^j and the class constraint is
(sum_{block j} |a_k|^beta)^(1/beta) <= 2^(-r j) for every j.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .dictionaries import (
    CoefficientVector,
    a_beta_block_norms,
    block_frequencies,
    block_of,
    block_size,
    trig_lp_norm,
)
from .errors import ParameterError, PreconditionError
from .rng import stream

MEMBERSHIP_RTOL = 1e-12


@dataclass(frozen=True)
class ClassSpec:
    smoothness_r: float
    beta: float
    dim: int = 1
    bound: float = 1.0

    def __post_init__(self):
        if self.smoothness_r <= 0:
            raise ParameterError("smoothness r must be positive")
        if not 0 < self.beta <= 1:
            raise ParameterError("beta must lie in (0, 1]")
        if self.dim < 1:
            raise ParameterError("dimension must be >= 1")

    def block_bound(self, j: int) -> float:
        return 2.0 ** (-self.smoothness_r * j)


def sample_member(spec: ClassSpec, J: int, density: float, seed: int, mode: str = "extremal",
                  member: int = 0) -> CoefficientVector:
    """Random member with blocks 0..J populated.

    Each block j gets ceil(density * |block|) distinct random frequencies,
    uniform phases and moduli log-uniform over two decades. The block is then
    rescaled to l_beta norm exactly 2^(-r j) (``mode="extremal"``) or that
    times a uniform(0, 1] factor (``mode="slack"``). ``member`` indexes
    independent members under one seed.
    """
    if J < 0:
        raise ParameterError("J must be >= 0")
    if not 0 < density <= 1:
        raise ParameterError("density must lie in (0, 1]")
    if mode not in ("extremal", "slack"):
        raise ParameterError(f"unknown mode {mode!r}")
    out = {}
    for j in range(J + 1):
        rng = stream(seed, 7, member, j)
        size = block_size(spec.dim, j)
        count = min(size, max(1, math.ceil(density * size - 1e-9)))
        if spec.dim == 1:
            # block j in d=1 is {+-k : 2^(j-1) <= k < 2^j}; avoid materializing it
            pos = rng.choice(size, size=count, replace=False)
            half = size // 2
            freqs = [(0,)] if j == 0 else [
                ((2 ** (j - 1) + q) if q < half else -(2 ** (j - 1) + q - half),) for q in pos
            ]
        else:
            block = block_frequencies(spec.dim, j)
            pos = rng.choice(len(block), size=count, replace=False)
            freqs = [tuple(int(x) for x in block[q]) for q in pos]
        moduli = 10.0 ** rng.uniform(-2.0, 0.0, size=count)
        phases = np.exp(2j * np.pi * rng.uniform(0.0, 1.0, size=count))
        scale = spec.block_bound(j) / np.sum(moduli**spec.beta) ** (1.0 / spec.beta)
        if mode == "slack":
            scale *= 1.0 - rng.uniform(0.0, 1.0)  # in (0, 1]
        for k, a in zip(freqs, scale * moduli * phases):
            out[k] = a
    return CoefficientVector(out)


def class_membership_check(coeffs: CoefficientVector, spec: ClassSpec):
    """(member?, slacks) with slack_j = 2^(-r j) - b_j for each block present.

    Membership allows a relative tolerance of 1e-12 on each block.
    """
    b = a_beta_block_norms(coeffs, spec.beta)
    bounds = np.array([spec.block_bound(j) for j in range(len(b))])
    slack = bounds - b
    ok = bool(np.all(b <= bounds * (1 + MEMBERSHIP_RTOL)))
    return ok, slack


def partial_sum(coeffs: CoefficientVector, n: int) -> CoefficientVector:
    """S_n: the part of ``coeffs`` in blocks j <= n."""
    return CoefficientVector({k: a for k, a in coeffs.items() if block_of(k) <= n})


def tail_bound_check(coeffs: CoefficientVector, spec: ClassSpec, n: int, p: float):
    """(lhs, rhs) for ||f - S_n f||_p <= B sum_{j>n} 2^(-r j).

    S_n keeps the blocks j <= n, i.e. ||k||_inf < 2^n. The right side is the
    certified chain ||.||_p <= B |.|_{A_1} <= B sum_j |block|_{A_beta}. It is
    written as B sum_{j>=n} 2^(-r(j+1)), which is the same sum. Raises
    :class:`PreconditionError` if ``coeffs`` is not in the class and
    ``AssertionError`` if the inequality fails.
    """
    ok, _ = class_membership_check(coeffs, spec)
    if not ok:
        raise PreconditionError("coefficients violate the class constraint")
    tail = CoefficientVector({k: a for k, a in coeffs.items() if block_of(k) > n})
    lhs = trig_lp_norm(tail, spec.dim, p)
    r = spec.smoothness_r
    rhs = spec.bound * 2.0 ** (-r * (n + 1)) / (1.0 - 2.0**-r)
    assert lhs <= rhs * (1 + 1e-9), f"tail bound violated: {lhs} > {rhs}"
    return float(lhs), float(rhs)


def a_beta_holder_bound_check(coeffs: CoefficientVector, beta: float, N: int, dim: int = 1):
    """(lhs, rhs) for |f|_{A_beta} <= (2N+1)^(d(1/beta - 1/2)) ||f||_2 on T(N, d)."""
    if not 0 < beta <= 1:
        raise ParameterError("need 0 < beta <= 1")
    for k in coeffs:
        kk = k if isinstance(k, tuple) else (k,)
        if max(abs(x) for x in kk) > N:
            raise PreconditionError(f"frequency {k} exceeds N={N}")
    a = np.abs(coeffs.values)
    lhs = float(np.sum(a**beta) ** (1.0 / beta)) if a.size else 0.0
    rhs = float((2 * N + 1) ** (dim * (1.0 / beta - 0.5)) * np.linalg.norm(a))
    assert lhs <= rhs * (1 + 1e-12), f"Holder bound violated: {lhs} > {rhs}"
    return lhs, rhs


def width_lower_bound_check(N: int, n: int, trials: int, seed: int):
    """(min over trials of max_j dist(e_j, L), sqrt(1 - n/N)) for random n-dim subspaces L of C^N.

    Subspaces are spans of orthonormalized complex Gaussian frames. Raises
    ``AssertionError`` if any trial falls below the bound by more than 1e-9.
    """
    if not 0 <= n < N:
        raise ParameterError("need 0 <= n < N")
    bound = math.sqrt(1.0 - n / N)
    worst = math.inf
    for t in range(trials):
        if n == 0:
            dist = 1.0
        else:
            rng = stream(seed, 8, t)
            frame = rng.standard_normal((N, n)) + 1j * rng.standard_normal((N, n))
            Q, _ = np.linalg.qr(frame)
            # dist(e_j, L)^2 = 1 - ||P e_j||^2 = 1 - ||row j of Q||^2
            lev = np.sum(np.abs(Q) ** 2, axis=1)
            dist = float(np.sqrt(max(0.0, 1.0 - lev.min())))
        worst = min(worst, dist)
    assert worst >= bound - 1e-9, f"width bound violated: {worst} < {bound}"
    return worst, bound


def member_to_json(coeffs: CoefficientVector, spec: ClassSpec) -> dict:
    return {"spec": asdict(spec), "coefficients": coeffs.to_json()}


def member_from_json(data) -> tuple[CoefficientVector, ClassSpec]:
    if isinstance(data, str):
        data = json.loads(data)
    return CoefficientVector.from_json(data["coefficients"]), ClassSpec(**data["spec"])
