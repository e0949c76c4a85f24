"""Regularity parameter schedules for repeated Luby rounds.

``alpha_i`` bounds the relative degree spread of a typical node after
``i`` rounds and ``delta_i`` the fraction of nodes allowed to violate it:

    alpha_0 = D^(-1/600),        alpha_i = 10 alpha_{i-1} + D^(-1/600)
    delta_0 = exp(-D^(1/200)),   delta_i = D^2 (delta_{i-1} + 2 exp(-(D/2^i)^(1/100)))

Everything is evaluated with mpmath at ``dps`` decimal digits, so even the
astronomically small ``delta_i`` are represented without underflow.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import DomainError

REGIME_EXPONENT = 10**5


def mpf_to_fraction(x: mpmath.mpf) -> Fraction:
    """Exact value of a finite mpf as a Fraction."""
    man, exp = mpmath.mpf(x).man_exp
    man = int(man)
    exp = int(exp)
    return Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2**-exp)


@dataclass(frozen=True)
class ScheduleTable:
    """Per-round parameters; index ``i`` runs over ``0..horizon``.

    Attributes:
        delta: the starting degree ``D``.
        eps: target approximation parameter.
        horizon: ``ceil(10 * log2(1/eps))``.
        alpha, delta_frac: mpf sequences ``alpha_i`` and ``delta_i``.
        degree: exact ``D / 2^i`` as Fractions.
        alpha_ok: ``alpha_i <= 1/10`` for every ``1 <= i <= horizon``.
        delta_ok: ``delta_i <= exp(-D^(1/300))`` for every ``1 <= i <= horizon``.
        in_regime: ``eps >= D^(-1/10^5)``, the range where the bounds are claimed.
    """

    delta: int
    eps: mpmath.mpf
    horizon: int
    alpha: tuple
    delta_frac: tuple
    degree: tuple
    alpha_ok: bool
    delta_ok: bool
    in_regime: bool
    dps: int

    def entry(self, i: int) -> tuple[Fraction, Fraction]:
        """``(alpha_i, D/2^i)`` with alpha_i converted exactly to a Fraction."""
        return mpf_to_fraction(self.alpha[i]), self.degree[i]

    @property
    def delta_threshold(self) -> mpmath.mpf:
        with mpmath.workdps(self.dps):
            return mpmath.exp(-mpmath.power(self.delta, mpmath.mpf(1) / 300))

    def rows(self) -> list[dict]:
        return [
            {
                "i": i,
                "alpha": mpmath.nstr(self.alpha[i], 12),
                "delta": mpmath.nstr(self.delta_frac[i], 12),
                "degree": str(self.degree[i]),
            }
            for i in range(self.horizon + 1)
        ]


def horizon_for(eps, dps: int = 50) -> int:
    """``ceil(10 * log2(1/eps))``, never below 1."""
    with mpmath.workdps(dps):
        e = mpmath.mpf(eps)
        if not 0 < e < 1:
            raise DomainError(f"eps must lie in (0, 1), got {eps}")
        return max(1, int(mpmath.ceil(10 * mpmath.log(1 / e, 2))))


def param_schedules(delta: int, eps, strict: bool = False, dps: int = 60) -> ScheduleTable:
    """Evaluate the alpha/delta recursions up to the round horizon.

    Args:
        delta: starting degree ``D``.
        eps: approximation target in (0, 1); may be an mpf for tiny gaps
            such as ``D ** (-1/10**5)``.
        strict: raise instead of flagging when ``eps < D^(-1/10^5)``.
        dps: working precision in decimal digits.

    Raises:
        DomainError: if ``delta < 2``, ``eps`` is outside (0, 1), or
            ``strict`` is set and ``eps`` lies outside the proven regime.
    """
    if delta < 2:
        raise DomainError(f"delta must be at least 2, got {delta}")
    with mpmath.workdps(dps):
        D = mpmath.mpf(delta)
        e = mpmath.mpf(eps)
        horizon = horizon_for(e, dps)
        in_regime = bool(e >= mpmath.power(D, -mpmath.mpf(1) / REGIME_EXPONENT))
        if strict and not in_regime:
            raise DomainError(f"eps={mpmath.nstr(e, 8)} is below D^(-1/{REGIME_EXPONENT})")
        base = mpmath.power(D, -mpmath.mpf(1) / 600)
        alpha = [base]
        dfrac = [mpmath.exp(-mpmath.power(D, mpmath.mpf(1) / 200))]
        for i in range(1, horizon + 1):
            alpha.append(10 * alpha[-1] + base)
            tail = 2 * mpmath.exp(-mpmath.power(D / mpmath.power(2, i), mpmath.mpf(1) / 100))
            dfrac.append(D**2 * (dfrac[-1] + tail))
        thresh = mpmath.exp(-mpmath.power(D, mpmath.mpf(1) / 300))
        alpha_ok = all(a <= mpmath.mpf(1) / 10 for a in alpha[1:])
        delta_ok = all(d <= thresh for d in dfrac[1:])
    degree = tuple(Fraction(delta, 2**i) for i in range(horizon + 1))
    return ScheduleTable(delta, e, horizon, tuple(alpha), tuple(dfrac), degree, alpha_ok, delta_ok, in_regime, dps)


def alpha_closed_form_bound(delta: int, i: int, dps: int = 60) -> mpmath.mpf:
    """``sum_{j<=i} 10^(j+1) D^(-1/600)``, an upper bound on ``alpha_i``."""
    with mpmath.workdps(dps):
        base = mpmath.power(mpmath.mpf(delta), -mpmath.mpf(1) / 600)
        return mpmath.fsum(mpmath.power(10, j + 1) * base for j in range(i + 1))


def alpha_exact(delta: int, i: int, dps: int = 60) -> mpmath.mpf:
    """Closed form ``alpha_i = D^(-1/600) (10^(i+1) - 1) / 9`` of the recursion."""
    with mpmath.workdps(dps):
        base = mpmath.power(mpmath.mpf(delta), -mpmath.mpf(1) / 600)
        return base * (mpmath.power(10, i + 1) - 1) / 9
