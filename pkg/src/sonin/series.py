"""Truncated power-series algebra and the triangular kernel-pairing system.

A kernel pair ``kappa(x) = x^(beta-1) * sum a_n (lam x^alpha)^n`` and
``k(x) = x^(-beta) * sum b_n (lam x^alpha)^n`` satisfies the Sonin condition
``(kappa * k)(x) = 1`` exactly when the coefficient sequences solve a
triangular linear system with Gamma-function weights.  This module carries
the coefficient arithmetic: Cauchy products, series reciprocals, the
triangular solve, and the generator series used by the kernel catalog.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ParameterDomain, ZeroLeadingCoefficient

#: Relative residual allowed in the triangular identities of a validated pair.
PAIR_RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class PowerSeries:
    """Coefficients c_0..c_N of a truncated power series."""

    coeffs: tuple[float, ...]

    def __post_init__(self) -> None:
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs:
            raise ParameterDomain("a power series needs at least one coefficient")
        if not all(math.isfinite(c) for c in coeffs):
            raise ParameterDomain("power series coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def order(self) -> int:
        """Truncation index N; the series has N+1 coefficients."""
        return len(self.coeffs) - 1

    def __getitem__(self, n: int) -> float:
        return self.coeffs[n]

    def __len__(self) -> int:
        return len(self.coeffs)


def cauchy_product(f: PowerSeries, g: PowerSeries) -> PowerSeries:
    """Coefficient-wise product, truncated at min(f.order, g.order)."""
    order = min(f.order, g.order)
    out = []
    for n in range(order + 1):
        acc = 0.0
        comp = 0.0
        for m in range(n + 1):
            term = f.coeffs[m] * g.coeffs[n - m] - comp
            tmp = acc + term
            comp = (tmp - acc) - term
            acc = tmp
        out.append(acc)
    return PowerSeries(tuple(out))


def reciprocal_series(f: PowerSeries) -> PowerSeries:
    """Series d with cauchy_product(f, d) = [1, 0, ..., 0] up to truncation."""
    if f.coeffs[0] == 0.0:
        raise ZeroLeadingCoefficient("reciprocal needs a nonzero constant term")
    c0 = f.coeffs[0]
    d = [1.0 / c0]
    for n in range(1, f.order + 1):
        acc = 0.0
        for m in range(1, n + 1):
            acc += f.coeffs[m] * d[n - m]
        d.append(-acc / c0)
    return PowerSeries(tuple(d))


def identity_series(order: int) -> PowerSeries:
    """The multiplicative identity [1, 0, ..., 0] of the given order."""
    return PowerSeries((1.0,) + (0.0,) * order)


def coeffs_exp(order: int) -> PowerSeries:
    """Taylor coefficients 1/n! of exp(x)."""
    if order < 0:
        raise ParameterDomain("order must be >= 0")
    out = [1.0]
    for n in range(1, order + 1):
        out.append(out[-1] / n)
    return PowerSeries(tuple(out))


def coeffs_binomial(gamma: float, order: int) -> PowerSeries:
    """Taylor coefficients (-1)^n (gamma)_n / n! of (1+x)^(-gamma)."""
    if order < 0:
        raise ParameterDomain("order must be >= 0")
    out = [1.0]
    for n in range(1, order + 1):
        # (-1)^n (g)_n / n! satisfies r_n = -r_{n-1} (g+n-1)/n
        out.append(-out[-1] * (gamma + n - 1) / n)
    return PowerSeries(tuple(out))


def coeffs_exp_binomial(gamma: float, order: int) -> PowerSeries:
    """Taylor coefficients of exp(x) (1+x)^(-gamma), the product of the two."""
    return cauchy_product(coeffs_exp(order), coeffs_binomial(gamma, order))


def gamma_scaled(c: PowerSeries, alpha: float, offset: float) -> PowerSeries:
    """Divide c_n by Gamma(alpha*n + offset); maps phi-coefficients to kernel ones."""
    if alpha <= 0.0:
        raise ParameterDomain("alpha must be positive")
    out = []
    for n, cn in enumerate(c.coeffs):
        out.append(cn * math.exp(-math.lgamma(alpha * n + offset)))
    return PowerSeries(tuple(out))


def sonin_system_residuals(
    a: Sequence[float], b: Sequence[float], alpha: float, beta: float
) -> tuple[float, ...]:
    """Largest-term-normalized residuals of the triangular pairing system.

    Equation N=0 demands Gamma(beta)Gamma(1-beta) a_0 b_0 = 1; equation N>=1
    demands sum_n Gamma(alpha n + beta) Gamma(alpha (N-n) + 1 - beta)
    a_n b_{N-n} = 0.  Each residual is normalized by the largest term
    magnitude in its equation, so heavy cancellation does not masquerade
    as failure.  Log-space Gamma weights avoid overflow at large alpha*N;
    the weight arguments stay positive here, so no sign tracking is needed.
    """
    if alpha <= 0.0 or not 0.0 < beta < 1.0:
        raise ParameterDomain("need alpha > 0 and beta in (0, 1)")
    if len(a) != len(b):
        raise ParameterDomain("coefficient sequences must share a truncation order")
    residuals = []
    t0 = math.exp(math.lgamma(beta) + math.lgamma(1.0 - beta)) * a[0] * b[0]
    residuals.append(abs(t0 - 1.0) / max(1.0, abs(t0)))
    for big_n in range(1, len(a)):
        logw = [
            math.lgamma(alpha * n + beta) + math.lgamma(alpha * (big_n - n) + 1.0 - beta)
            for n in range(big_n + 1)
        ]
        top = max(logw)
        terms = [
            math.exp(lw - top) * a[n] * b[big_n - n] for n, lw in enumerate(logw)
        ]
        scale = max(abs(t) for t in terms)
        if scale == 0.0:
            residuals.append(0.0)
            continue
        residuals.append(abs(math.fsum(terms)) / scale)
    return tuple(residuals)


@dataclass(frozen=True)
class SeriesPairCoefficients:
    """A validated (a_n, b_n) pair solving the triangular system."""

    a: PowerSeries
    b: PowerSeries
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if self.a.coeffs[0] == 0.0:
            raise ZeroLeadingCoefficient("leading coefficient a_0 must be nonzero")
        if self.alpha <= 0.0 or not 0.0 < self.beta < 1.0:
            raise ParameterDomain("need alpha > 0 and beta in (0, 1)")
        if self.a.order != self.b.order:
            raise ParameterDomain("a and b must share a truncation order")
        worst = max(
            sonin_system_residuals(self.a.coeffs, self.b.coeffs, self.alpha, self.beta)
        )
        if worst > PAIR_RESIDUAL_TOL:
            raise ParameterDomain(
                f"coefficients violate the triangular system (residual {worst:.3e})"
            )

    @property
    def order(self) -> int:
        return self.a.order


def solve_sonin_triangular(
    a: PowerSeries, alpha: float, beta: float
) -> SeriesPairCoefficients:
    """Forward-substitute the triangular system for the associated coefficients.

    Each equation is normalized by its b_N weight Gamma(beta)Gamma(alpha N +
    1 - beta), so the Gamma products enter only through bounded log-space
    ratios.  Equivalent to b_n = d_n / Gamma(alpha n + 1 - beta) with d the
    reciprocal series of c_n = Gamma(alpha n + beta) a_n; the direct solve is
    kept independent of that shortcut so the two routes can cross-check.
    """
    if alpha <= 0.0 or not 0.0 < beta < 1.0:
        raise ParameterDomain("need alpha > 0 and beta in (0, 1)")
    if a.coeffs[0] == 0.0:
        raise ZeroLeadingCoefficient("leading coefficient a_0 must be nonzero")
    lg_beta = math.lgamma(beta)
    a0 = a.coeffs[0]
    b = [1.0 / (math.exp(lg_beta + math.lgamma(1.0 - beta)) * a0)]
    for big_n in range(1, a.order + 1):
        lg_bn = math.lgamma(alpha * big_n + 1.0 - beta)
        terms = []
        for n in range(1, big_n + 1):
            w = math.exp(
                math.lgamma(alpha * n + beta)
                + math.lgamma(alpha * (big_n - n) + 1.0 - beta)
                - lg_beta
                - lg_bn
            )
            terms.append(w * a.coeffs[n] * b[big_n - n])
        b.append(-math.fsum(terms) / a0)
    return SeriesPairCoefficients(a=a, b=PowerSeries(tuple(b)), alpha=alpha, beta=beta)
