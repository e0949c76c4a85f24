"""Monte-Carlo checks of the shifted-martingale tail bounds.

For non-negative ``X_i <= M`` with conditional means ``p_i``:

* upper tail: if ``p_i <= P_i`` and ``lambda > P = sum P_i``,
  ``P[S_t >= lambda] <= exp(-(lambda-P)^2 / (8 M P + 2 M (lambda-P)/3))``;
* lower tail: if ``Pl_i <= p_i <= Ph_i`` and ``lambda < Pl = sum Pl_i``,
  ``P[S_t <= lambda] <= exp(-(Pl-lambda)^2 / (8 M Ph + 2 M (Pl-lambda)/3))``.

A process is simulated for many trials, every sampled trajectory is
checked against its declared bounds, and empirical tail frequencies are
compared with the closed forms on a grid of ``lambda``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SpecViolationError
from .rng import STREAM_TRIAL, generator

PROCESS_KINDS = ("bernoulli", "alternating", "degenerate", "adaptive", "scaled")


def upper_tail_bound(lam: float, P: float, M: float) -> float:
    """Shifted upper bound on ``P[S_t >= lam]``; requires ``lam > P``."""
    if lam <= P:
        raise DomainError(f"upper bound needs lambda > P, got {lam} <= {P}")
    d = lam - P
    den = 8 * M * P + 2 * M * d / 3
    return 0.0 if den == 0 else math.exp(-d * d / den)


def lower_tail_bound(lam: float, Pl: float, Ph: float, M: float) -> float:
    """Shifted lower bound on ``P[S_t <= lam]``; requires ``lam < Pl``."""
    if lam >= Pl:
        raise DomainError(f"lower bound needs lambda < P_low, got {lam} >= {Pl}")
    d = Pl - lam
    den = 8 * M * Ph + 2 * M * d / 3
    return 0.0 if den == 0 else math.exp(-d * d / den)


@dataclass
class ProcessSpec:
    """A bounded non-negative process with declared conditional-mean bounds.

    Attributes:
        kind: one of :data:`PROCESS_KINDS`.
        t: number of steps.
        M: almost-sure upper bound on each ``X_i``.
        q: base success probability.
        P_high, P_low: per-step bounds on ``p_i`` (derived from ``kind``).
    """

    kind: str
    t: int = 1000
    M: float = 1.0
    q: float = 1 / 6
    P_high: np.ndarray = field(init=False, repr=False)
    P_low: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind not in PROCESS_KINDS:
            raise DomainError(f"unknown process kind {self.kind!r}; expected one of {PROCESS_KINDS}")
        if self.t < 1 or self.M <= 0 or not 0 <= self.q <= 1:
            raise DomainError("need t >= 1, M > 0 and q in [0, 1]")
        t, q = self.t, self.q
        hi = np.full(t, q * self.M)
        lo = hi.copy()
        if self.kind == "alternating":
            lo = np.zeros(t)
        elif self.kind == "degenerate":
            hi = np.zeros(t)
            lo = np.zeros(t)
        elif self.kind == "adaptive":
            lo = hi / 2
        self.P_high = hi
        self.P_low = lo

    def sample(self, trials: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """``(X, p)`` arrays of shape ``(trials, t)``: draws and their conditional means."""
        t, q, M = self.t, self.q, self.M
        if self.kind in ("bernoulli", "scaled"):
            p = np.full((trials, t), q * M)
            X = M * (rng.random((trials, t)) < q)
        elif self.kind == "alternating":
            # mean P_i on odd steps, 0 on even steps
            on = (np.arange(t) % 2 == 0)[None, :]
            p = np.where(on, q * M, 0.0) * np.ones((trials, 1))
            X = M * ((rng.random((trials, t)) < q) & on)
        elif self.kind == "degenerate":
            p = np.zeros((trials, t))
            X = np.zeros((trials, t))
        else:
            # mean drops to half its cap whenever the walk is ahead of schedule
            X = np.zeros((trials, t))
            p = np.zeros((trials, t))
            S = np.zeros(trials)
            for i in range(t):
                ahead = S > q * M * i
                pi = np.where(ahead, q * M / 2, q * M)
                p[:, i] = pi
                X[:, i] = M * (rng.random(trials) < pi / M)
                S += X[:, i]
        return X, p

    def check(self, X: np.ndarray, p: np.ndarray, tol: float = 1e-12) -> None:
        """Raise SpecViolationError if a trajectory breaks a declared bound."""
        if np.any(X < -tol) or np.any(X > self.M + tol):
            raise SpecViolationError(f"{self.kind}: sampled X_i outside [0, {self.M}]")
        if np.any(p > self.P_high[None, :] + tol) or np.any(p < self.P_low[None, :] - tol):
            raise SpecViolationError(f"{self.kind}: conditional mean outside its declared bounds")


@dataclass
class MartingaleReport:
    side: str
    process: str
    trials: int
    P: float
    P_low: float
    M: float
    rows: list

    @property
    def violations(self) -> int:
        return sum(r["violation"] for r in self.rows)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def as_dict(self) -> dict:
        return {
            "side": self.side,
            "process": self.process,
            "trials": self.trials,
            "P": self.P,
            "P_low": self.P_low,
            "M": self.M,
            "violations": self.violations,
            "passed": self.passed,
            "rows": self.rows,
        }


def default_grid(side: str, P: float, Pl: float, Ph: float, M: float, points: int = 12) -> np.ndarray:
    """``lambda`` values stepping away from the mean in units of ``sqrt(M P)``."""
    if side == "upper":
        scale = math.sqrt(M * max(P, 1e-12))
        return P + scale * np.linspace(0.25, 6.0, points) + 1e-9
    scale = math.sqrt(M * max(Ph, 1e-12))
    grid = Pl - scale * np.linspace(0.25, 6.0, points)
    return grid[grid >= 0] if Pl > 0 else np.array([])


def mc_martingale_check(side: str, process: ProcessSpec, trials: int = 20000, seed: int = 0,
                        grid=None, z: float = 3.0) -> MartingaleReport:
    """Empirical tails of ``S_t`` against the shifted-martingale bound.

    A grid point is a violation when the empirical frequency exceeds the
    bound by more than ``z`` binomial standard errors at the bound's value.

    Raises:
        SpecViolationError: if a sampled trajectory breaches its declared bounds.
        DomainError: on an unknown ``side``.
    """
    if side not in ("upper", "lower"):
        raise DomainError(f"side must be 'upper' or 'lower', got {side!r}")
    rng = generator(seed, STREAM_TRIAL, PROCESS_KINDS.index(process.kind))
    X, p = process.sample(trials, rng)
    process.check(X, p)
    S = X.sum(axis=1)
    P = float(process.P_high.sum())
    Pl = float(process.P_low.sum())
    M = process.M
    lams = default_grid(side, P, Pl, P, M) if grid is None else np.asarray(grid, float)
    rows = []
    for lam in lams:
        if side == "upper":
            if lam <= P:
                continue
            freq = float(np.mean(S >= lam))
            bound = upper_tail_bound(lam, P, M)
        else:
            if lam >= Pl:
                continue
            freq = float(np.mean(S <= lam))
            bound = lower_tail_bound(lam, Pl, P, M)
        se = math.sqrt(bound * (1 - bound) / trials)
        rows.append({"lambda": float(lam), "empirical": freq, "bound": bound, "se": se,
                     "violation": bool(freq > bound + z * se)})
    return MartingaleReport(side, process.kind, trials, P, Pl, M, rows)


def documented_grid(trials: int = 20000, seed: int = 0, t: int = 1000) -> list[MartingaleReport]:
    """Both tails for every process kind; ``scaled`` uses ``M = 3``."""
    out = []
    for kind in PROCESS_KINDS:
        spec = ProcessSpec(kind, t=t, M=3.0 if kind == "scaled" else 1.0)
        for side in ("upper", "lower"):
            if side == "lower" and float(spec.P_low.sum()) == 0:
                continue
            out.append(mc_martingale_check(side, spec, trials, seed))
    return out
