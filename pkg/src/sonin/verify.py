"""End-to-end checkers: Sonin condition, Laplace closed forms, left inverses.

Laplace checks sample real p > 0 only; that is enough to validate the
closed-form transforms numerically without complex quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammainc, rgamma

from .catalog import KernelSide, SampledFunction, SoninPair
from .engine import (
    DEFAULT_ORDER,
    _rule,
    beta_mass,
    convolve_grid_functions,
    convolve_pair_at,
    five_point_derivative,
    gfd_apply,
    gfd_regularized_apply,
    gfi_apply,
    GridFunction,
)
from .errors import AbscissaViolation, ParameterDomain, TailBoundExceeded

#: Points of the singular-cell series used by the numeric Laplace transform.
_SINGULAR_SERIES_TERMS = 12
_PANEL_POINTS = 32
_PANEL_RATIO = 1.6


@dataclass(frozen=True)
class VerificationReport:
    """Residuals of one check over a set of abscissae."""

    check_name: str
    points: tuple[float, ...]
    residuals: tuple[float, ...]
    max_abs_residual: float
    tolerance: float
    passed: bool

    @staticmethod
    def build(
        check_name: str,
        points: Sequence[float],
        residuals: Sequence[float],
        tolerance: float,
    ) -> "VerificationReport":
        points = tuple(float(p) for p in points)
        residuals = tuple(float(r) for r in residuals)
        if len(points) != len(residuals):
            raise ParameterDomain("points and residuals must align")
        worst = max(residuals) if residuals else 0.0
        return VerificationReport(
            check_name=check_name,
            points=points,
            residuals=residuals,
            max_abs_residual=worst,
            tolerance=float(tolerance),
            passed=worst <= tolerance,
        )

    def to_json(self) -> dict:
        return {
            "check_name": self.check_name,
            "points": list(self.points),
            "residuals": list(self.residuals),
            "max_abs_residual": self.max_abs_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class LaplaceCheckConfig:
    """Sampling plan for the numeric Laplace transforms."""

    p_values: tuple[float, ...] = (2.0, 4.0, 8.0)
    truncation_x: float | None = None
    tail_bound: float = 1e-12
    abscissa: float = 0.0

    def __post_init__(self) -> None:
        if not self.p_values or any(p <= 0.0 for p in self.p_values):
            raise ParameterDomain("Laplace abscissae must be positive")
        if self.tail_bound <= 0.0:
            raise ParameterDomain("tail bound must be positive")


def check_sonin(
    pair: SoninPair,
    xs: Sequence[float],
    order: int = DEFAULT_ORDER,
    tol: float = 1e-8,
) -> VerificationReport:
    """Residuals |(kappa * k)(x) - 1| over the given points."""
    residuals = [abs(convolve_pair_at(pair, float(x), order) - 1.0) for x in xs]
    return VerificationReport.build("sonin", xs, residuals, tol)


def check_sonin_sides(
    kappa: KernelSide,
    k: KernelSide,
    xs: Sequence[float],
    order: int = DEFAULT_ORDER,
    tol: float = 1e-8,
    name: str = "sonin-sides",
) -> VerificationReport:
    """Sonin residuals for an arbitrary (possibly mismatched) side combination."""
    residuals = []
    for x in xs:
        x = float(x)
        total = 0.0
        for ti in kappa.terms:
            for tj in k.terms:
                power = x ** (ti.exponent + tj.exponent - 1.0)
                if ti.is_constant and tj.is_constant:
                    total += (
                        ti.coefficient
                        * tj.coefficient
                        * beta_mass(ti.exponent - 1.0, tj.exponent - 1.0)
                        * power
                    )
                else:
                    rule = _rule(ti.exponent - 1.0, tj.exponent - 1.0, order)
                    gi = ti.values(x * (1.0 - rule.nodes))
                    hj = tj.values(x * rule.nodes)
                    total += power * float(np.dot(rule.weights, gi * hj))
        residuals.append(abs(total - 1.0))
    return VerificationReport.build(name, xs, residuals, tol)


def check_sonin_grid(
    kappa: GridFunction,
    k: GridFunction,
    xs: Sequence[float],
    order: int = DEFAULT_ORDER,
    tol: float = 1e-5,
) -> VerificationReport:
    """Sonin residuals for grid-sampled kernels (convolution-series pairs)."""
    conv = convolve_grid_functions(kappa, k, np.asarray(xs, dtype=float), order=order)
    residuals = np.abs(conv - 1.0)
    return VerificationReport.build("sonin-grid", xs, residuals.tolist(), tol)


def laplace_transform_numeric(
    kernel,  # anything with evaluate(x) and series_terms(count)
    p: float,
    config: LaplaceCheckConfig | None = None,
) -> float:
    """integral_0^inf kernel(x) exp(-p x) dx by singular cell + smooth panels.

    The cell [0, eps] integrates the kernel's leading power series against
    the exponential term by term through lower incomplete Gamma functions;
    [eps, X] uses Gauss-Legendre on geometrically graded panels; the tail
    beyond X is bounded and must stay below the configured tail bound.
    """
    cfg = config or LaplaceCheckConfig()
    abscissa = max(cfg.abscissa, getattr(kernel, "abscissa", 0.0))
    if p <= abscissa:
        raise AbscissaViolation(f"p={p} is not above the abscissa {abscissa}")
    eps = 1e-3 * min(1.0, 1.0 / p)
    x_max = cfg.truncation_x if cfg.truncation_x is not None else max(20.0, 40.0 / p)

    total = 0.0
    for exponent, coeff in kernel.series_terms(_SINGULAR_SERIES_TERMS):
        if coeff == 0.0:
            continue
        # integral_0^eps x^(mu-1) e^(-p x) dx = Gamma(mu) P(mu, p eps) / p^mu
        total += coeff * math.exp(
            math.lgamma(exponent) - exponent * math.log(p)
        ) * float(gammainc(exponent, p * eps))

    glx, glw = np.polynomial.legendre.leggauss(_PANEL_POINTS)
    panels = max(8, int(math.ceil(math.log(x_max / eps) / math.log(_PANEL_RATIO))))
    edges = eps * (x_max / eps) ** (np.arange(panels + 1) / panels)
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        xs = mid + half * glx
        vals = np.array([kernel.evaluate(float(x)) for x in xs])
        total += half * float(np.dot(glw, vals * np.exp(-p * xs)))

    tail = abs(kernel.evaluate(x_max)) * math.exp(-p * x_max) * 2.0 / p
    if tail > cfg.tail_bound:
        raise TailBoundExceeded(
            f"Laplace tail bound {tail:.3e} exceeds {cfg.tail_bound:.1e}"
        )
    return total


def check_laplace_pair(
    pair: SoninPair,
    config: LaplaceCheckConfig | None = None,
    tol: float = 1e-7,
) -> VerificationReport:
    """Frequency-domain Sonin check and closed-form transform comparison.

    Per abscissa p the residual is the worst of |L[kappa] L[k] - 1/p| and,
    where the family has closed-form transforms, |numeric - closed| for each
    side.
    """
    cfg = config or LaplaceCheckConfig()
    residuals = []
    for p in cfg.p_values:
        lk = laplace_transform_numeric(pair.kappa, p, cfg)
        lkk = laplace_transform_numeric(pair.k, p, cfg)
        worst = abs(lk * lkk - 1.0 / p)
        closed_k = pair.kappa.laplace_closed_form(p)
        if closed_k is not None:
            worst = max(worst, abs(lk - closed_k))
        closed_kk = pair.k.laplace_closed_form(p)
        if closed_kk is not None:
            worst = max(worst, abs(lkk - closed_kk))
        residuals.append(worst)
    return VerificationReport.build("laplace", cfg.p_values, residuals, tol)


def _gfi_term_derivative(
    pair: SoninPair, f: SampledFunction, gfi_order: int
) -> tuple[tuple[float, Callable], ...]:
    """Weighted-term derivative of F = (kappa * f).

    Each decomposition term contributes x^mu_i * G_i(x) with G_i smooth, so
    F' = sum x^(mu_i - 1) * (mu_i G_i(x) + x G_i'(x)) with every G_i'
    obtained by five-point central differences (one Richardson step).  The
    exponents mu_i then sit in the quadrature weight of the derivative
    operator instead of polluting its integrand.
    """
    from .engine import _as_array_fn, _operator_terms

    s_f = f.leading_exponent
    fnv = _as_array_fn(f.evaluator)
    terms = []
    for t in _operator_terms(pair.kappa):
        mu = t.exponent

        def g_smooth(xi, _t=t, _mu=mu):
            arr = np.asarray(xi, dtype=float)
            flat = np.atleast_1d(arr).reshape(-1)
            rule = _rule(_mu - 1.0, s_f, gfi_order)
            u = rule.nodes
            fv = fnv(flat[:, None] * u[None, :])
            if s_f != 0.0:
                fv = fv * u[None, :] ** (-s_f)
            if _t.is_constant:
                gv = _t.coefficient
            else:
                gv = _t.values(flat[:, None] * (1.0 - u)[None, :])
            return ((fv * gv) @ rule.weights).reshape(arr.shape)

        dg = five_point_derivative(g_smooth)

        def phi(xi, _g=g_smooth, _dg=dg, _mu=mu):
            arr = np.asarray(xi, dtype=float)
            return _mu * _g(arr) + arr * _dg(arr)

        terms.append((mu, phi))
    return tuple(terms)


def check_left_inverse(
    pair: SoninPair,
    f: SampledFunction,
    xs: Sequence[float],
    tol: float = 1e-6,
    gfi_order: int = 64,
    gfd_order: int = 64,
) -> VerificationReport:
    """Residuals of GFD(GFI f) = f and regularized-GFD(GFI f) = f.

    The integral output is wrapped with a numerically differentiated
    evaluator (five-point stencil, one Richardson step); the differentiation
    runs per decomposition term so the derivative's algebraic components at
    the origin all land in the quadrature weights.
    """
    def F_eval(xi):
        return gfi_apply(pair, f, xi, order=gfi_order)

    wrapped = SampledFunction(
        evaluator=F_eval,
        derivative=five_point_derivative(F_eval),
        value_at_zero=0.0,
        leading_exponent=pair.kappa.leading_exponent,
        derivative_terms=_gfi_term_derivative(pair, f, gfi_order),
    )
    fv = np.vectorize(lambda x: float(f.evaluator(np.asarray(x, dtype=float))))
    residuals = []
    for x in xs:
        x = float(x)
        target = float(fv(x))
        r_full = abs(gfd_apply(pair, wrapped, x, order=gfd_order) - target)
        r_reg = abs(gfd_regularized_apply(pair, wrapped, x, order=gfd_order) - target)
        residuals.append(max(r_full, r_reg))
    return VerificationReport.build("left-inverse", xs, residuals, tol)


class _InverseTransformKernel:
    """Time-domain side of the power x double-confluent inversion identity."""

    abscissa = 0.0

    def __init__(self, mu: float, nu: float, a: float, b: float) -> None:
        self.s = -mu - nu
        self.mu, self.nu, self.a, self.b = mu, nu, a, b

    def evaluate(self, x: float) -> float:
        from .special import phi3_general

        return x ** (self.s - 1.0) * phi3_general(
            -self.nu, 1.0, 1.0, self.s, -self.b * x, self.a * x
        )

    def series_terms(self, count: int) -> list[tuple[float, float]]:
        out = []
        for j in range(count):
            acc = 0.0
            poch = 1.0
            b_pow = 1.0
            inv_mfact = 1.0
            for m in range(j + 1):
                if m > 0:
                    poch *= -self.nu + m - 1
                    b_pow *= -self.b
                    inv_mfact /= m
                acc += poch * b_pow * inv_mfact * self.a ** (j - m) / math.factorial(j - m)
            out.append((self.s + j, acc * float(rgamma(self.s + j))))
        return out


def check_inverse_laplace_horn(
    mu: float,
    nu: float,
    a: float,
    b: float,
    p_values: Sequence[float] = (2.0, 4.0),
    tol: float = 1e-6,
) -> VerificationReport:
    """Forward-transform consistency of the closed-form inversion pair.

    The candidate time-domain function x^(-mu-nu-1)/Gamma(-mu-nu) *
    Phi3(-nu; -mu-nu; -b x, a x) is transformed numerically and compared to
    p^mu (p+b)^nu exp(a/p) at each sample point.
    """
    if mu + nu >= 0.0:
        raise ParameterDomain("the identity requires mu + nu < 0")
    kernel = _InverseTransformKernel(mu, nu, a, b)
    cfg = LaplaceCheckConfig(p_values=tuple(float(p) for p in p_values))
    residuals = []
    for p in cfg.p_values:
        if p <= max(0.0, -b):
            raise AbscissaViolation(f"p={p} must exceed max(0, -b)")
        numeric = laplace_transform_numeric(kernel, p, cfg)
        target = p**mu * (p + b) ** nu * math.exp(a / p)
        residuals.append(abs(numeric - target))
    return VerificationReport.build("inverse-laplace-horn", cfg.p_values, residuals, tol)
