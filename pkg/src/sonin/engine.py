"""Weakly singular Laplace-convolution quadrature and the fractional operators.

All convolutions substitute xi = x*u and factor the exact endpoint exponents
of both operands into a Gauss-Jacobi weight (1-u)^a u^b on (0, 1), so the
algebraic singularities never meet the quadrature nodes.  Kernel
decompositions consist mostly of constant-factor power terms, whose
integrals a Gauss rule reproduces through its total mass; only the small
tail factors require node evaluations.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln
from scipy.interpolate import CubicSpline

from .catalog import (
    DEFAULT_X_SCALE,
    KernelSide,
    KernelTerm,
    SampledFunction,
    SoninPair,
    power_sum_factor,
)
from .errors import (
    CoefficientConditionViolated,
    GridTooCoarse,
    MissingDerivative,
    ParameterDomain,
)
from .series import PowerSeries

DEFAULT_ORDER = 32


@dataclass(frozen=True, eq=False)
class JacobiRule:
    """Gauss rule for integral_0^1 u^b_exp (1-u)^a_exp P(u) du."""

    a_exp: float
    b_exp: float
    nodes: np.ndarray
    weights: np.ndarray
    order: int

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights))


def beta_mass(a_exp: float, b_exp: float) -> float:
    """Total weight integral B(b_exp+1, a_exp+1) of the Jacobi weight."""
    return math.exp(
        math.lgamma(a_exp + 1.0) + math.lgamma(b_exp + 1.0) - math.lgamma(a_exp + b_exp + 2.0)
    )


def gauss_jacobi_rule(a_exp: float, b_exp: float, order: int) -> JacobiRule:
    """Golub-Welsch construction from the Jacobi three-term recurrence.

    Exact for polynomials up to degree 2*order - 1 against the weight
    (1-u)^a_exp u^b_exp on (0, 1); the weights sum to the Beta mass.
    """
    if a_exp <= -1.0 or b_exp <= -1.0:
        raise ParameterDomain("Jacobi exponents must exceed -1")
    if order < 1:
        raise ParameterDomain("rule order must be >= 1")
    a, b = float(a_exp), float(b_exp)
    diag = np.empty(order)
    off_sq = np.empty(max(order - 1, 0))
    apb = a + b
    diag[0] = (b - a) / (apb + 2.0)
    for k in range(1, order):
        den = (2.0 * k + apb) * (2.0 * k + apb + 2.0)
        diag[k] = (b * b - a * a) / den
    if order > 1:
        # k = 1 is written in cancelled form: the generic formula pits
        # (k + a + b) against (2k + a + b - 1), which both vanish at a+b = -1.
        off_sq[0] = 4.0 * (a + 1.0) * (b + 1.0) / ((apb + 2.0) ** 2 * (apb + 3.0))
        for k in range(2, order):
            t = 2.0 * k + apb
            off_sq[k - 1] = (
                4.0 * k * (k + a) * (k + b) * (k + apb) / (t * t * (t * t - 1.0))
            )
    nodes_t, vecs = eigh_tridiagonal(diag, np.sqrt(off_sq))
    mass = beta_mass(a, b)
    weights = mass * vecs[0, :] ** 2
    nodes = (nodes_t + 1.0) / 2.0
    return JacobiRule(a_exp=a, b_exp=b, nodes=nodes, weights=weights, order=order)


@lru_cache(maxsize=200_000)
def _rule(a_exp: float, b_exp: float, order: int) -> JacobiRule:
    return gauss_jacobi_rule(a_exp, b_exp, order)


def _as_array_fn(fn: Callable) -> Callable[[np.ndarray], np.ndarray]:
    """Adapt a scalar callable so it maps ndarrays elementwise."""

    def wrapped(x: np.ndarray) -> np.ndarray:
        try:
            out = np.asarray(fn(x), dtype=float)
            if out.shape == np.shape(x):
                return out
        except (TypeError, ValueError):
            pass
        return np.vectorize(fn, otypes=[float])(x)

    return wrapped


#: Relative weight below which constant terms are folded into the operator
#: tail; the operator checks run at 1e-6, so the fold costs O(cut * quad_err).
_OPERATOR_CUT = 3e-7

_OP_TERMS: "weakref.WeakKeyDictionary[KernelSide, tuple[KernelTerm, ...]]" = (
    weakref.WeakKeyDictionary()
)


def _operator_terms(side: KernelSide) -> tuple[KernelTerm, ...]:
    """Coarsened decomposition used by the operator paths.

    The Sonin checks keep the full term list; the fractional operators pay
    one quadrature rule per term and per kernel side, so light terms are
    merged into a single tail factor here.
    """
    cached = _OP_TERMS.get(side)
    if cached is not None:
        return cached
    mu0 = side.leading_exponent
    consts = [t for t in side.terms if t.is_constant]
    tails = [t for t in side.terms if not t.is_constant]
    w_max = max(
        (abs(t.coefficient) * DEFAULT_X_SCALE ** (t.exponent - mu0) for t in consts),
        default=0.0,
    )
    kept: list[KernelTerm] = []
    small: list[KernelTerm] = []
    for t in consts:
        w = abs(t.coefficient) * DEFAULT_X_SCALE ** (t.exponent - mu0)
        (kept if w >= _OPERATOR_CUT * w_max else small).append(t)
    merged = small + tails
    if merged:
        mu_op = min(t.exponent for t in merged)
        base = (
            power_sum_factor(
                [t.coefficient for t in small], [t.exponent - mu_op for t in small]
            )
            if small
            else None
        )
        parts = [(t.exponent - mu_op, t.factor) for t in tails]

        def factor(x, _base=base, _parts=parts):
            x = np.asarray(x, dtype=float)
            out = _base(x) if _base is not None else np.zeros_like(x)
            for de, fac in _parts:
                out = out + fac(x) * np.power(x, de)
            return out

        kept.append(KernelTerm(mu_op, factor))
    result = tuple(sorted(kept, key=lambda t: t.exponent))
    _OP_TERMS[side] = result
    return result


# -- pair convolution ---------------------------------------------------------


class _PairQuadData:
    """Order-independent precomputation for convolve_pair_at."""

    def __init__(self, pair: SoninPair) -> None:
        kc = [t for t in pair.kappa.terms if t.is_constant]
        kv = [t for t in pair.kappa.terms if not t.is_constant]
        cc = [t for t in pair.k.terms if t.is_constant]
        cv = [t for t in pair.k.terms if not t.is_constant]
        mu = np.array([t.exponent for t in kc])
        nu = np.array([t.exponent for t in cc])
        ci = np.array([t.coefficient for t in kc])
        dj = np.array([t.coefficient for t in cc])
        if len(mu) and len(nu):
            log_b = (
                gammaln(mu)[:, None]
                + gammaln(nu)[None, :]
                - gammaln(mu[:, None] + nu[None, :])
            )
            self.const_weights = (ci[:, None] * dj[None, :] * np.exp(log_b)).ravel()
            self.const_exponents = (mu[:, None] + nu[None, :] - 1.0).ravel()
        else:
            self.const_weights = np.zeros(0)
            self.const_exponents = np.zeros(0)
        self.mixed: list[tuple[KernelTerm, KernelTerm]] = (
            [(ti, tj) for ti in kv for tj in pair.k.terms]
            + [(ti, tj) for ti in kc for tj in cv]
        )


_PAIR_DATA: "weakref.WeakKeyDictionary[SoninPair, _PairQuadData]" = (
    weakref.WeakKeyDictionary()
)


def _pair_data(pair: SoninPair) -> _PairQuadData:
    data = _PAIR_DATA.get(pair)
    if data is None:
        data = _PairQuadData(pair)
        _PAIR_DATA[pair] = data
    return data


def convolve_pair_at(pair: SoninPair, x: float, order: int = DEFAULT_ORDER) -> float:
    """(kappa * k)(x) through the pair's weighted-term decomposition.

    Constant x constant term pairs integrate exactly: the matching Jacobi
    rule reproduces the Beta mass of its weight at machine precision for
    every order, so the mass is used directly.  Pairs touching a tail factor
    are integrated with the requested-order rule.
    """
    if x <= 0.0:
        raise ParameterDomain("convolution point must be positive")
    data = _pair_data(pair)
    total = float(np.dot(data.const_weights, np.power(x, data.const_exponents)))
    for ti, tj in data.mixed:
        rule = _rule(ti.exponent - 1.0, tj.exponent - 1.0, order)
        gi = ti.values(x * (1.0 - rule.nodes))
        hj = tj.values(x * rule.nodes)
        total += x ** (ti.exponent + tj.exponent - 1.0) * float(
            np.dot(rule.weights, gi * hj)
        )
    return total


def convolve_pair_direct(
    pair: SoninPair, x: float, order: int = DEFAULT_ORDER
) -> float:
    """(kappa * k)(x) with only the leading exponents factored into the weight.

    Slow-converging cross-check: both full kernels are evaluated through
    their special-function forms at the quadrature nodes, so this path is
    independent of the term decomposition.
    """
    if x <= 0.0:
        raise ParameterDomain("convolution point must be positive")
    mu0 = pair.kappa.leading_exponent
    nu0 = pair.k.leading_exponent
    rule = _rule(mu0 - 1.0, nu0 - 1.0, order)
    acc = 0.0
    for u, w in zip(rule.nodes, rule.weights):
        xk = x * (1.0 - u)
        xj = x * u
        fk = pair.kappa.evaluate(xk) * xk ** (1.0 - mu0)
        fj = pair.k.evaluate(xj) * xj ** (1.0 - nu0)
        acc += w * fk * fj
    return x ** (mu0 + nu0 - 1.0) * acc


# -- fractional operators -----------------------------------------------------


def _conv_side_with_function(
    side: KernelSide,
    fn: Callable[[np.ndarray], np.ndarray],
    s_exp: float,
    xs: np.ndarray,
    order: int,
    continuous_part: bool = False,
) -> np.ndarray:
    """(side * fn)(x) where fn(xi) = xi^s_exp * (continuous); vectorized in x.

    With ``continuous_part`` the callable is the continuous factor itself and
    the x^s_exp power is restored analytically, which avoids evaluating the
    singular component at the nodes altogether.
    """
    out = np.zeros_like(xs)
    fnv = _as_array_fn(fn)
    for t in _operator_terms(side):
        rule = _rule(t.exponent - 1.0, s_exp, order)
        u = rule.nodes
        fv = fnv(xs[:, None] * u[None, :])
        if continuous_part:
            if s_exp != 0.0:
                fv = fv * (xs**s_exp)[:, None]
        elif s_exp != 0.0:
            fv = fv * u[None, :] ** (-s_exp)
        if t.is_constant:
            gv = t.coefficient
        else:
            gv = t.values(xs[:, None] * (1.0 - u)[None, :])
        out += xs ** t.exponent * ((fv * gv) @ rule.weights)
    return out


def gfi_apply(
    pair: SoninPair,
    f: SampledFunction,
    x: float | np.ndarray,
    order: int = DEFAULT_ORDER,
):
    """General fractional integral (kappa * f)(x)."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs <= 0.0):
        raise ParameterDomain("operators are applied at x > 0")
    out = _conv_side_with_function(
        pair.kappa, f.evaluator, f.leading_exponent, xs, order
    )
    return out if np.ndim(x) else float(out[0])


def _derivative_weight_exponent(f: SampledFunction) -> float:
    # f = xi^s * continuous: for s in (0,1) the derivative carries xi^(s-1);
    # otherwise it is continuous at 0 and needs no weight.
    s = f.leading_exponent
    return s - 1.0 if 0.0 < s < 1.0 else 0.0


def _k_convolved_with_derivative(
    pair: SoninPair, f: SampledFunction, xs: np.ndarray, order: int
) -> np.ndarray:
    """(k * f')(xs), preferring the weighted-term split of f' when present."""
    if f.derivative_terms is not None:
        out = np.zeros_like(xs)
        for s_i, phi in f.derivative_terms:
            out += _conv_side_with_function(
                pair.k, phi, s_i - 1.0, xs, order, continuous_part=True
            )
        return out
    if f.derivative is None:
        raise MissingDerivative("the derivative operators need f'")
    return _conv_side_with_function(
        pair.k, f.derivative, _derivative_weight_exponent(f), xs, order
    )


def gfd_regularized_apply(
    pair: SoninPair,
    f: SampledFunction,
    x: float | np.ndarray,
    order: int = DEFAULT_ORDER,
):
    """Regularized general fractional derivative (k * f')(x)."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs <= 0.0):
        raise ParameterDomain("operators are applied at x > 0")
    out = _k_convolved_with_derivative(pair, f, xs, order)
    return out if np.ndim(x) else float(out[0])


def gfd_apply(
    pair: SoninPair,
    f: SampledFunction,
    x: float | np.ndarray,
    order: int = DEFAULT_ORDER,
):
    """General fractional derivative d/dx (k * f)(x).

    Computed through the absolutely-continuous identity as
    (k * f')(x) + k(x) f(0), which avoids differentiating the convolution
    numerically.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs <= 0.0):
        raise ParameterDomain("operators are applied at x > 0")
    out = _k_convolved_with_derivative(pair, f, xs, order)
    f0 = f.value0()
    if f0 != 0.0:
        out = out + f0 * np.array([pair.k.evaluate(float(xi)) for xi in xs])
    return out if np.ndim(x) else float(out[0])


def five_point_derivative(
    fn: Callable[[np.ndarray], np.ndarray], rel_step: float = 1e-4
) -> Callable[[np.ndarray], np.ndarray]:
    """Fourth-order central differences with one Richardson extrapolation."""
    fnv = _as_array_fn(fn)

    def deriv(x: np.ndarray) -> np.ndarray:
        xa = np.asarray(x, dtype=float)
        h = rel_step * xa

        def stencil(hh: np.ndarray) -> np.ndarray:
            return (
                -fnv(xa + 2.0 * hh)
                + 8.0 * fnv(xa + hh)
                - 8.0 * fnv(xa - hh)
                + fnv(xa - 2.0 * hh)
            ) / (12.0 * hh)

        d1 = stencil(h)
        d2 = stencil(h / 2.0)
        return (16.0 * d2 - d1) / 15.0

    return deriv


# -- grid functions and convolution powers ------------------------------------


@dataclass(eq=False)
class GridFunction:
    """Samples of f(x) = x^p * (continuous) on a positive increasing grid."""

    grid: np.ndarray
    values: np.ndarray
    leading_exponent: float = 0.0

    def __post_init__(self) -> None:
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.shape != self.values.shape or self.grid.ndim != 1:
            raise ParameterDomain("grid and values must be matching 1-D arrays")
        if not np.all(np.isfinite(self.grid)) or not np.all(np.isfinite(self.values)):
            raise ParameterDomain("grid function entries must be finite")
        if self.grid[0] <= 0.0 or np.any(np.diff(self.grid) <= 0.0):
            raise ParameterDomain("grid must be strictly increasing and positive")
        if self.leading_exponent <= -1.0:
            raise ParameterDomain("leading exponent must exceed -1")
        self._phi_spline = None

    def _phi(self):
        # Continuous part interpolated on the sqrt(x) axis, which matches the
        # default grid layout and keeps the clustering near the origin mild.
        if self._phi_spline is None:
            phi = self.values * self.grid ** (-self.leading_exponent)
            self._phi_spline = CubicSpline(np.sqrt(self.grid), phi, extrapolate=True)
        return self._phi_spline

    def continuous_part(self, x: np.ndarray) -> np.ndarray:
        return self._phi()(np.sqrt(np.asarray(x, dtype=float)))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.continuous_part(x) * x**self.leading_exponent


def make_sqrt_grid(x_max: float = 5.0, count: int = 512) -> np.ndarray:
    """Grid uniform in sqrt(x) on (0, x_max], clustering near the singularity."""
    if x_max <= 0.0 or count < 1:
        raise ParameterDomain("need x_max > 0 and count >= 1")
    t = np.linspace(0.0, math.sqrt(x_max), count + 1)[1:]
    return t**2


def convolve_grid_functions(
    f: GridFunction, g: GridFunction, xs: np.ndarray, order: int = DEFAULT_ORDER
) -> np.ndarray:
    """(f * g)(xs) with both leading exponents factored into the weight."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    rule = _rule(f.leading_exponent, g.leading_exponent, order)
    u = rule.nodes
    pf = f.continuous_part(xs[:, None] * (1.0 - u)[None, :])
    pg = g.continuous_part(xs[:, None] * u[None, :])
    p_total = f.leading_exponent + g.leading_exponent + 1.0
    return xs**p_total * ((pf * pg) @ rule.weights)


def _grid_convolution(
    f: GridFunction, g: GridFunction, order: int
) -> GridFunction:
    vals = convolve_grid_functions(f, g, f.grid, order=order)
    return GridFunction(
        grid=f.grid,
        values=vals,
        leading_exponent=f.leading_exponent + g.leading_exponent + 1.0,
    )


def convolution_power(
    f: GridFunction,
    n: int,
    order: int = DEFAULT_ORDER,
    tol: float = 1e-6,
) -> GridFunction:
    """n-fold self-convolution of f on its grid; n = 0 gives the constant 1."""
    if n < 0:
        raise ParameterDomain("convolution power needs n >= 0")
    if n == 0:
        return GridFunction(grid=f.grid, values=np.ones_like(f.values), leading_exponent=0.0)
    result = f
    for _ in range(n - 1):
        result = _grid_convolution(result, f, order)
    if n > 1:
        _check_grid_resolution(result, f, order, tol)
    return result


def _check_grid_resolution(
    result: GridFunction, f: GridFunction, order: int, tol: float
) -> None:
    probes = result.grid[[len(result.grid) // 4, len(result.grid) // 2, -1]]
    # The final convolution step is recomputed at doubled order; node
    # placement shifts everywhere, so interpolation roughness shows up too.
    base = convolve_grid_functions(result, f, probes, order=order)
    fine = convolve_grid_functions(result, f, probes, order=2 * order)
    scale = np.maximum(np.abs(fine), 1e-30)
    err = float(np.max(np.abs(base - fine) / scale))
    if err > tol:
        raise GridTooCoarse(
            f"estimated grid-convolution error {err:.3e} exceeds tol {tol:.1e}"
        )


def _kernel_side_conv_grid(
    side: KernelSide, g: GridFunction, xs: np.ndarray, order: int
) -> np.ndarray:
    """(side * g)(xs) using the kernel decomposition and g's continuous part."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    out = np.zeros_like(xs)
    p = g.leading_exponent
    for t in _operator_terms(side):
        rule = _rule(t.exponent - 1.0, p, order)
        u = rule.nodes
        pg = g.continuous_part(xs[:, None] * u[None, :])
        if t.is_constant:
            gv = t.coefficient
        else:
            gv = t.values(xs[:, None] * (1.0 - u)[None, :])
        out += xs ** (t.exponent + p) * ((pg * gv) @ rule.weights)
    return out


def convolution_series_pair(
    base: SoninPair,
    f: GridFunction,
    a: PowerSeries,
    b: PowerSeries,
    truncation: int | None = None,
    order: int = DEFAULT_ORDER,
    tol: float = 1e-6,
) -> tuple[GridFunction, GridFunction]:
    """Kernel pair built from convolution series over a base pair.

    kappa = a_0 kappa_1 + kappa_1 * sum_{n>=1} a_n f^<n> and the mirrored k;
    the coefficients must satisfy a_0 b_0 = 1 and vanishing Cauchy sums.
    """
    t_max = min(a.order, b.order) if truncation is None else truncation
    if t_max < 0 or t_max > min(a.order, b.order):
        raise ParameterDomain("truncation exceeds the coefficient order")
    _check_pairing_conditions(a, b, t_max)
    if not np.any(f.values != 0.0):
        raise ParameterDomain("generator f must not be identically zero")

    xs = f.grid
    sum_a = np.zeros_like(f.values)
    sum_b = np.zeros_like(f.values)
    power = f
    for n in range(1, t_max + 1):
        if n > 1:
            power = _grid_convolution(power, f, order)
        sum_a += a.coeffs[n] * power.values
        sum_b += b.coeffs[n] * power.values
    if t_max > 1:
        _check_grid_resolution(power, f, order, tol)

    sa = GridFunction(grid=xs, values=sum_a, leading_exponent=f.leading_exponent)
    sb = GridFunction(grid=xs, values=sum_b, leading_exponent=f.leading_exponent)

    kappa_base = np.array([base.kappa.evaluate(float(x)) for x in xs])
    k_base = np.array([base.k.evaluate(float(x)) for x in xs])
    kappa_vals = a.coeffs[0] * kappa_base + _kernel_side_conv_grid(base.kappa, sa, xs, order)
    k_vals = b.coeffs[0] * k_base + _kernel_side_conv_grid(base.k, sb, xs, order)

    p_kappa = base.kappa.leading_exponent - 1.0
    p_k = base.k.leading_exponent - 1.0
    return (
        GridFunction(grid=xs, values=kappa_vals, leading_exponent=p_kappa),
        GridFunction(grid=xs, values=k_vals, leading_exponent=p_k),
    )


def _check_pairing_conditions(a: PowerSeries, b: PowerSeries, t_max: int) -> None:
    head = a.coeffs[0] * b.coeffs[0]
    if abs(head - 1.0) > 1e-10:
        raise CoefficientConditionViolated(
            f"a_0 b_0 = {head!r}, expected 1 for a convolution-series pair"
        )
    for n in range(1, t_max + 1):
        terms = [a.coeffs[m] * b.coeffs[n - m] for m in range(n + 1)]
        scale = max(max(abs(t) for t in terms), 1e-30)
        if abs(math.fsum(terms)) > 1e-10 * scale:
            raise CoefficientConditionViolated(
                f"Cauchy sum of the pairing coefficients is nonzero at n={n}"
            )
