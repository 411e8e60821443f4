"""Named Sonin kernel families with validation, evaluation, and decomposition.

Every kernel here lives in C_-1(0, inf): it is a finite sum of weighted
power terms ``x^(mu_i - 1) * g_i(x)`` with exponents mu_i > 0 and factors
g_i continuous on [0, inf).  The decomposition drives the convolution
quadrature: series-type kernels are split into explicit leading power-law
terms (constant factors, integrated exactly by matched Gauss-Jacobi rules)
plus one small tail term with an honest factor evaluator, so the weakly
singular endpoint behaviour is always carried by the quadrature weight.

The associated kernel of every symmetrical family is expressed by the same
evaluator with mapped parameters (beta -> 1-beta, gamma -> -gamma, and a
sign flip on the exponential-side argument where the family demands it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import rgamma

from .errors import ParameterDomain, RadiusExceeded
from .series import SeriesPairCoefficients
from .special import (
    kummer_1f1,
    mittag_leffler2,
    phi3_general,
    prabhakar,
    wright,
    xi2_general,
)

POWER = "power"
TEMPERED = "tempered"
ML_SUM = "ml-sum"
WRIGHT = "wright"
PRABHAKAR = "prabhakar"
KUMMER = "kummer"
PHI3 = "phi3"
XI2 = "xi2"
SERIES = "series"

FAMILIES = (POWER, TEMPERED, ML_SUM, WRIGHT, PRABHAKAR, KUMMER, PHI3, XI2, SERIES)

#: Decomposition working radius: quadrature stays term-exact for x up to here.
DEFAULT_X_SCALE = 5.0

# Relative weight below which series terms move from explicit constants into
# the tail factor; the tail then contributes O(cut) and its quadrature error
# O(cut * jacobi_error) to any convolution on [0, x_scale].
_SINGLE_CUT = 1e-10
_DOUBLE_CUT = 1e-8
_MAX_EXPLICIT = 80
_MAX_DIAGONALS = 40


@dataclass(frozen=True)
class KernelSpec:
    """A tagged kernel family plus its named parameters."""

    family: str
    params: tuple[tuple[str, float], ...]

    @staticmethod
    def make(family: str, **params: float) -> "KernelSpec":
        if family not in FAMILIES:
            raise ParameterDomain(f"unknown kernel family {family!r}")
        items = tuple(sorted((k, float(v)) for k, v in params.items()))
        return KernelSpec(family=family, params=items)

    def param(self, name: str) -> float:
        for key, value in self.params:
            if key == name:
                return value
        raise KeyError(name)

    def params_dict(self) -> dict[str, float]:
        return dict(self.params)

    def to_json(self) -> dict:
        return {"family": self.family, "params": self.params_dict()}

    @staticmethod
    def from_json(obj: dict) -> "KernelSpec":
        if not isinstance(obj, dict) or "family" not in obj:
            raise ParameterDomain("kernel JSON must carry 'family' and 'params'")
        return KernelSpec.make(obj["family"], **obj.get("params", {}))


@dataclass(frozen=True, eq=False)
class KernelTerm:
    """One decomposition term: x^(exponent-1) * factor(x).

    ``factor is None`` marks a constant factor equal to ``coefficient``; the
    convolution engine integrates those exactly against the Beta mass of the
    matching Jacobi weight.
    """

    exponent: float
    factor: Callable[[np.ndarray], np.ndarray] | None
    coefficient: float = 0.0

    @property
    def is_constant(self) -> bool:
        return self.factor is None

    def values(self, x: np.ndarray) -> np.ndarray:
        if self.factor is None:
            return np.full_like(np.asarray(x, dtype=float), self.coefficient)
        return self.factor(np.asarray(x, dtype=float))


@dataclass(frozen=True, eq=False)
class KernelSide:
    """One kernel of a pair: pointwise evaluator plus weighted-term split."""

    spec: KernelSpec
    terms: tuple[KernelTerm, ...]
    evaluator: Callable[[float], float]
    series: Callable[[int], list[tuple[float, float]]]
    laplace: Callable[[float], float | None] | None = None
    radius_x: float = math.inf
    abscissa: float = 0.0

    @property
    def leading_exponent(self) -> float:
        return min(t.exponent for t in self.terms)

    def evaluate(self, x: float) -> float:
        if x <= 0.0:
            raise ParameterDomain("kernels are evaluated at x > 0")
        if x >= self.radius_x:
            raise RadiusExceeded(
                f"x={x} is outside the series radius (x < {self.radius_x:g})"
            )
        return float(self.evaluator(x))

    def series_terms(self, count: int) -> list[tuple[float, float]]:
        """First terms (exponent mu, coefficient c) of kernel = sum c x^(mu-1)."""
        return self.series(count)

    def laplace_closed_form(self, p: float) -> float | None:
        if self.laplace is None:
            return None
        return self.laplace(p)


@dataclass(frozen=True, eq=False)
class SoninPair:
    """A kernel and its associated kernel, with quadrature decompositions."""

    kappa: KernelSide
    k: KernelSide

    def __post_init__(self) -> None:
        for side in (self.kappa, self.k):
            if any(t.exponent <= 0.0 for t in side.terms):
                raise ParameterDomain("kernel term exponents must be positive")
        lead = self.kappa.leading_exponent + self.k.leading_exponent
        if abs(lead - 1.0) > 1e-12:
            raise ParameterDomain(
                "leading exponents of a Sonin pair must sum to 1 "
                f"(got {lead!r})"
            )

    def side(self, name: str) -> KernelSide:
        if name == "kappa":
            return self.kappa
        if name == "k":
            return self.k
        raise ParameterDomain("side must be 'kappa' or 'k'")


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """An operand for the fractional operators.

    ``leading_exponent`` declares f(x) = x^s * (continuous at 0); 0 means the
    function itself is continuous at the origin.  Evaluators should accept
    numpy arrays (the operators sample them at quadrature nodes in batches).

    ``derivative_terms``, when present, is a weighted-term split of f':
    f'(x) = sum_i x^(s_i - 1) * phi_i(x) with each phi_i continuous at 0.
    The derivative operators then factor every s_i into the quadrature
    weight, which keeps them accurate when f' has several algebraic
    components near the origin (fractional-integral outputs do).
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray] | None = None
    value_at_zero: float | None = None
    leading_exponent: float = 0.0
    derivative_terms: tuple[tuple[float, Callable], ...] | None = None

    def value0(self) -> float:
        if self.value_at_zero is not None:
            return float(self.value_at_zero)
        return float(self.evaluator(np.asarray(0.0)))


class _LazyProduct:
    """Memoized p_0 = start, p_{n+1} = p_n * ratio(n)."""

    def __init__(self, ratio: Callable[[int], float], start: float = 1.0) -> None:
        self._vals = [float(start)]
        self._ratio = ratio

    def __call__(self, n: int) -> float:
        while len(self._vals) <= n:
            k = len(self._vals) - 1
            self._vals.append(self._vals[-1] * self._ratio(k))
        return self._vals[n]


@dataclass(frozen=True, eq=False)
class _SeriesGroup:
    """kernel part = sum_n coef(n) * x^(mu0 + step*n - 1)."""

    mu0: float
    step: float
    coef: Callable[[int], float]
    length: int | None = None  # exact term count for finite series (no tail)


def power_sum_factor(
    coefficients: Sequence[float], exponents: Sequence[float]
) -> Callable[[np.ndarray], np.ndarray]:
    """Evaluator for sum_t C_t x^(E_t), blocked to bound temporary storage."""
    c_arr = np.asarray(coefficients, dtype=float)
    e_arr = np.asarray(exponents, dtype=float)

    def factor(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        out = np.empty_like(flat)
        for i in range(0, flat.size, 4096):
            block = flat[i : i + 4096]
            out[i : i + 4096] = np.power(block[:, None], e_arr[None, :]) @ c_arr
        return out.reshape(x.shape)

    return factor


def _tail_factor(
    group: _SeriesGroup, start: int, x_scale: float
) -> Callable[[np.ndarray], np.ndarray]:
    coeffs: list[float] = []
    exps: list[float] = []
    scale = 1e-300
    quiet = 0
    for m in range(400):
        c = group.coef(start + m)
        e = group.step * m
        coeffs.append(c)
        exps.append(e)
        mag = abs(c) * x_scale**e
        scale = max(scale, mag)
        quiet = quiet + 1 if mag < 1e-18 * scale else 0
        if quiet >= 3:
            break
    return power_sum_factor(coeffs, exps)


def _group_terms(group: _SeriesGroup, x_scale: float, cut: float) -> list[KernelTerm]:
    if group.length is not None:
        return [
            KernelTerm(group.mu0 + group.step * n, None, group.coef(n))
            for n in range(group.length)
        ]
    terms: list[KernelTerm] = []
    w_max = 1e-300
    quiet = 0
    n = 0
    while n < _MAX_EXPLICIT:
        c = group.coef(n)
        terms.append(KernelTerm(group.mu0 + group.step * n, None, c))
        w = abs(c) * x_scale ** (group.step * n)
        w_max = max(w_max, w)
        quiet = quiet + 1 if w <= cut * w_max else 0
        n += 1
        if quiet >= 3 and n >= 4:
            break
    terms.append(
        KernelTerm(group.mu0 + group.step * n, _tail_factor(group, n, x_scale))
    )
    return terms


def _merged_series(groups: Sequence[_SeriesGroup], count: int) -> list[tuple[float, float]]:
    entries: list[tuple[float, float]] = []
    for g in groups:
        n_avail = g.length if g.length is not None else count
        entries.extend(
            (g.mu0 + g.step * n, g.coef(n)) for n in range(min(count, n_avail))
        )
    entries.sort(key=lambda e: e[0])
    return entries[:count]


def _side_from_groups(
    spec: KernelSpec,
    groups: Sequence[_SeriesGroup],
    evaluator: Callable[[float], float],
    laplace: Callable[[float], float | None] | None,
    x_scale: float,
    radius_x: float = math.inf,
) -> KernelSide:
    terms: list[KernelTerm] = []
    for g in groups:
        terms.extend(_group_terms(g, min(x_scale, radius_x), _SINGLE_CUT))
    return KernelSide(
        spec=spec,
        terms=tuple(terms),
        evaluator=evaluator,
        series=lambda count: _merged_series(groups, count),
        laplace=laplace,
        radius_x=radius_x,
    )


# -- double-series sides (phi3 / xi2 families) -------------------------------


def _double_terms(
    mu0: float,
    a1: float,
    a2: float,
    coef: Callable[[int, int], float],
    x_scale: float,
) -> tuple[list[KernelTerm], int]:
    """Explicit terms for leading anti-diagonals; returns (terms, tail diag)."""
    terms: list[KernelTerm] = []
    w_max = 1e-300
    quiet = 0
    s = 0
    while s < _MAX_DIAGONALS:
        w = 0.0
        for m in range(s + 1):
            n = s - m
            c = coef(m, n)
            terms.append(KernelTerm(mu0 + a1 * m + a2 * n, None, c))
            w += abs(c) * x_scale ** (a1 * m + a2 * n)
        w_max = max(w_max, w)
        quiet = quiet + 1 if w <= _DOUBLE_CUT * w_max else 0
        s += 1
        if quiet >= 3 and s >= 3:
            break
    return terms, s


def _double_tail_factor(
    shift: float,
    a1: float,
    a2: float,
    coef: Callable[[int, int], float],
    start_diag: int,
    x_scale: float,
) -> Callable[[np.ndarray], np.ndarray]:
    coeffs: list[float] = []
    exps: list[float] = []
    scale = 1e-300
    quiet = 0
    for s in range(start_diag, start_diag + 200):
        mag = 0.0
        for m in range(s + 1):
            n = s - m
            c = coef(m, n)
            e = a1 * m + a2 * n - shift
            coeffs.append(c)
            exps.append(e)
            mag += abs(c) * x_scale**e
        quiet = quiet + 1 if mag < 1e-18 * scale else 0
        scale = max(scale, mag)
        if quiet >= 3:
            break
    return power_sum_factor(coeffs, exps)


def _double_series_entries(
    mu0: float,
    a1: float,
    a2: float,
    coef: Callable[[int, int], float],
    count: int,
) -> list[tuple[float, float]]:
    entries: list[tuple[float, float]] = []
    amin = min(a1, a2)
    s = 0
    while True:
        for m in range(s + 1):
            n = s - m
            entries.append((mu0 + a1 * m + a2 * n, coef(m, n)))
        s += 1
        if len(entries) >= count:
            entries.sort(key=lambda e: e[0])
            if mu0 + amin * s > entries[count - 1][0]:
                return entries[:count]
        if s > 200:
            entries.sort(key=lambda e: e[0])
            return entries[:count]


def _side_from_double(
    spec: KernelSpec,
    mu0: float,
    a1: float,
    a2: float,
    coef: Callable[[int, int], float],
    evaluator: Callable[[float], float],
    laplace: Callable[[float], float | None] | None,
    x_scale: float,
) -> KernelSide:
    terms, tail_diag = _double_terms(mu0, a1, a2, coef, x_scale)
    shift = min(a1, a2) * tail_diag
    terms.append(
        KernelTerm(
            mu0 + shift,
            _double_tail_factor(shift, a1, a2, coef, tail_diag, x_scale),
        )
    )
    return KernelSide(
        spec=spec,
        terms=tuple(terms),
        evaluator=evaluator,
        series=lambda count: _double_series_entries(mu0, a1, a2, coef, count),
        laplace=laplace,
    )


# -- validation helpers -------------------------------------------------------


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ParameterDomain(message)


def _spot_check(pair: SoninPair, tol: float = 1e-6) -> SoninPair:
    """Construction-time Sonin residual check at a few interior points."""
    from .engine import convolve_pair_at

    xr = 0.9 * min(pair.kappa.radius_x, pair.k.radius_x)
    points = [x for x in (0.5, 1.0, 2.0) if x <= xr]
    if not points:
        points = [0.3 * xr, 0.6 * xr]
    for x in points:
        residual = abs(convolve_pair_at(pair, x, order=24) - 1.0)
        if residual > tol:
            raise ParameterDomain(
                f"constructed pair fails the Sonin condition at x={x:g} "
                f"(residual {residual:.3e})"
            )
    return pair


# -- family constructors ------------------------------------------------------


def make_power_pair(alpha: float, x_scale: float = DEFAULT_X_SCALE) -> SoninPair:
    """kappa = x^(alpha-1)/Gamma(alpha), k the same with exponent 1-alpha."""
    _require(0.0 < alpha < 1.0, "power pair needs 0 < alpha < 1")

    def side(a: float) -> KernelSide:
        spec = KernelSpec.make(POWER, alpha=a)
        inv_gamma = 1.0 / math.gamma(a)
        return KernelSide(
            spec=spec,
            terms=(KernelTerm(a, None, inv_gamma),),
            evaluator=lambda x, _a=a, _c=inv_gamma: _c * x ** (_a - 1.0),
            series=lambda count, _a=a, _c=inv_gamma: [(_a, _c)],
            laplace=lambda p, _a=a: p ** (-_a),
        )

    return _spot_check(SoninPair(kappa=side(alpha), k=side(1.0 - alpha)))


def make_tempered_pair(
    alpha: float, rho: float, x_scale: float = DEFAULT_X_SCALE
) -> SoninPair:
    """Exponentially damped power kernel and its associated kernel.

    kappa(x) = x^(alpha-1) e^(-rho x) / Gamma(alpha); the associated kernel
    is the damped complement plus rho times its running integral, expanded
    here as an entire series so no nested quadrature is needed.
    """
    _require(0.0 < alpha < 1.0, "tempered pair needs 0 < alpha < 1")
    _require(rho > 0.0, "tempered pair needs rho > 0")
    spec_k = KernelSpec.make(TEMPERED, alpha=alpha, rho=rho)
    inv_ga = 1.0 / math.gamma(alpha)
    inv_g1a = 1.0 / math.gamma(1.0 - alpha)

    damp = _LazyProduct(lambda j: -rho / (j + 1))  # (-rho)^j / j!

    kappa = _side_from_groups(
        spec_k,
        [_SeriesGroup(alpha, 1.0, lambda n: inv_ga * damp(n))],
        evaluator=lambda x: inv_ga * x ** (alpha - 1.0) * math.exp(-rho * x),
        laplace=lambda p: (p + rho) ** (-alpha),
        x_scale=x_scale,
    )

    def k_eval(x: float) -> float:
        base = inv_g1a * x ** (-alpha) * math.exp(-rho * x)
        acc = 0.0
        term = rho * x ** (1.0 - alpha) * inv_g1a
        for j in range(400):
            acc += term / (j + 1.0 - alpha)
            term *= -rho * x / (j + 1)
            if abs(term) < 1e-18 * (1.0 + abs(acc)):
                break
        return base + acc

    k = _side_from_groups(
        spec_k,
        [
            _SeriesGroup(1.0 - alpha, 1.0, lambda n: inv_g1a * damp(n)),
            _SeriesGroup(
                2.0 - alpha,
                1.0,
                lambda n: rho * inv_g1a * damp(n) / (n + 1.0 - alpha),
            ),
        ],
        evaluator=k_eval,
        laplace=lambda p: (p + rho) ** alpha / p,
        x_scale=x_scale,
    )
    return _spot_check(SoninPair(kappa=kappa, k=k))


def make_ml_sum_pair(
    alpha: float, beta: float, x_scale: float = DEFAULT_X_SCALE
) -> SoninPair:
    """Two-power-term kernel paired with a Mittag-Leffler kernel."""
    _require(0.0 < alpha < beta < 1.0, "ml-sum pair needs 0 < alpha < beta < 1")
    spec = KernelSpec.make(ML_SUM, alpha=alpha, beta=beta)
    c1 = 1.0 / math.gamma(1.0 - beta + alpha)
    c2 = 1.0 / math.gamma(1.0 - beta)

    kappa = KernelSide(
        spec=spec,
        terms=(
            KernelTerm(1.0 - beta + alpha, None, c1),
            KernelTerm(1.0 - beta, None, c2),
        ),
        evaluator=lambda x: c1 * x ** (alpha - beta) + c2 * x ** (-beta),
        series=lambda count: sorted(
            [(1.0 - beta + alpha, c1), (1.0 - beta, c2)]
        )[:count],
        laplace=lambda p: p ** (beta - alpha - 1.0) + p ** (beta - 1.0),
    )

    sign = _LazyProduct(lambda n: -1.0)
    k = _side_from_groups(
        spec,
        [_SeriesGroup(beta, alpha, lambda n: sign(n) * float(rgamma(alpha * n + beta)))],
        evaluator=lambda x: x ** (beta - 1.0) * mittag_leffler2(alpha, beta, -(x**alpha)),
        laplace=lambda p: p ** (alpha - beta) / (p**alpha + 1.0),
        x_scale=x_scale,
    )
    return _spot_check(SoninPair(kappa=kappa, k=k))


def make_wright_pair(
    alpha: float, beta: float, lam: float, x_scale: float = DEFAULT_X_SCALE
) -> SoninPair:
    """kappa = x^(beta-1) W_(alpha,beta)(lam x^alpha) and its mirror with
    (1-beta, -lam)."""
    _require(alpha > 0.0, "wright pair needs alpha > 0")
    _require(0.0 < beta < 1.0, "wright pair needs beta in (0, 1)")
    spec = KernelSpec.make(WRIGHT, alpha=alpha, beta=beta, **{"lambda": lam})

    def side(offset: float, lam_side: float) -> KernelSide:
        w = _LazyProduct(lambda n: lam_side / (n + 1))  # lam^n / n!
        return _side_from_groups(
            spec,
            [
                _SeriesGroup(
                    offset,
                    alpha,
                    lambda n: w(n) * float(rgamma(alpha * n + offset)),
                )
            ],
            evaluator=lambda x: x ** (offset - 1.0)
            * wright(alpha, offset, lam_side * x**alpha),
            laplace=lambda p: p ** (-offset) * math.exp(lam_side * p ** (-alpha)),
            x_scale=x_scale,
        )

    return _spot_check(SoninPair(kappa=side(beta, lam), k=side(1.0 - beta, -lam)))


def make_prabhakar_pair(
    alpha: float,
    beta: float,
    gamma: float,
    lam: float,
    x_scale: float = DEFAULT_X_SCALE,
) -> SoninPair:
    """kappa = x^(beta-1) E^gamma_(alpha,beta)(-lam x^alpha); associated kernel
    with (1-beta, -gamma)."""
    _require(alpha > 0.0, "prabhakar pair needs alpha > 0")
    _require(0.0 < beta < 1.0, "prabhakar pair needs beta in (0, 1)")
    spec = KernelSpec.make(
        PRABHAKAR, alpha=alpha, beta=beta, gamma=gamma, **{"lambda": lam}
    )

    def side(offset: float, g: float) -> KernelSide:
        w = _LazyProduct(lambda n: (g + n) * (-lam) / (n + 1))  # (g)_n (-lam)^n / n!
        return _side_from_groups(
            spec,
            [
                _SeriesGroup(
                    offset,
                    alpha,
                    lambda n: w(n) * float(rgamma(alpha * n + offset)),
                )
            ],
            evaluator=lambda x: x ** (offset - 1.0)
            * prabhakar(alpha, offset, g, -lam * x**alpha),
            laplace=lambda p: (
                p ** (alpha * g - offset) * (p**alpha + lam) ** (-g)
                if p**alpha > abs(lam)
                else None
            ),
            x_scale=x_scale,
        )

    return _spot_check(SoninPair(kappa=side(beta, gamma), k=side(1.0 - beta, -gamma)))


def make_kummer_pair(
    beta: float, gamma: float, lam: float, x_scale: float = DEFAULT_X_SCALE
) -> SoninPair:
    """Confluent-hypergeometric kernels; pointwise the alpha = 1 Prabhakar pair."""
    _require(0.0 < beta < 1.0, "kummer pair needs beta in (0, 1)")
    spec = KernelSpec.make(KUMMER, beta=beta, gamma=gamma, **{"lambda": lam})

    def side(offset: float, g: float) -> KernelSide:
        inv_gihoffset = 1.0 / math.gamma(offset)
        w = _LazyProduct(lambda n: (g + n) * (-lam) / (n + 1))
        return _side_from_groups(
            spec,
            [_SeriesGroup(offset, 1.0, lambda n: w(n) * float(rgamma(n + offset)))],
            evaluator=lambda x: x ** (offset - 1.0)
            * inv_gihoffset
            * kummer_1f1(g, offset, -lam * x),
            laplace=lambda p: (
                p ** (g - offset) * (p + lam) ** (-g) if p + lam > 0.0 else None
            ),
            x_scale=x_scale,
        )

    return _spot_check(SoninPair(kappa=side(beta, gamma), k=side(1.0 - beta, -gamma)))


def make_phi3_pair(
    alpha1: float,
    alpha2: float,
    beta: float,
    gamma: float,
    lam1: float,
    lam2: float,
    x_scale: float = DEFAULT_X_SCALE,
) -> SoninPair:
    """Kernels built on the two-variable confluent series with one Pochhammer
    index; reduces to the Wright pair at lam1 = 0 and the Prabhakar pair at
    lam2 = 0."""
    _require(alpha1 > 0.0 and alpha2 > 0.0, "phi3 pair needs alpha1, alpha2 > 0")
    _require(0.0 < beta < 1.0, "phi3 pair needs beta in (0, 1)")
    spec = KernelSpec.make(
        PHI3,
        alpha1=alpha1,
        alpha2=alpha2,
        beta=beta,
        gamma=gamma,
        lambda1=lam1,
        lambda2=lam2,
    )

    def side(offset: float, g: float, l2: float) -> KernelSide:
        u = _LazyProduct(lambda m: (g + m) * (-lam1) / (m + 1))
        v = _LazyProduct(lambda n: l2 / (n + 1))

        def coef(m: int, n: int) -> float:
            return u(m) * v(n) * float(rgamma(alpha1 * m + alpha2 * n + offset))

        return _side_from_double(
            spec,
            offset,
            alpha1,
            alpha2,
            coef,
            evaluator=lambda x: x ** (offset - 1.0)
            * phi3_general(g, alpha1, alpha2, offset, -lam1 * x**alpha1, l2 * x**alpha2),
            laplace=lambda p: (
                p ** (alpha1 * g - offset)
                * (p**alpha1 + lam1) ** (-g)
                * math.exp(l2 * p ** (-alpha2))
                if p**alpha1 > abs(lam1)
                else None
            ),
            x_scale=x_scale,
        )

    return _spot_check(
        SoninPair(kappa=side(beta, gamma, lam2), k=side(1.0 - beta, -gamma, -lam2))
    )


def make_xi2_pair(
    alpha1: float,
    alpha2: float,
    beta: float,
    gamma1: float,
    gamma2: float,
    lam1: float,
    lam2: float,
    x_scale: float = DEFAULT_X_SCALE,
) -> SoninPair:
    """Kernels built on the two-variable confluent series with Pochhammer
    weights on both indices; reduces to the Prabhakar pair when either index
    collapses (lam_i = 0 or gamma_i = 0)."""
    _require(alpha1 > 0.0 and alpha2 > 0.0, "xi2 pair needs alpha1, alpha2 > 0")
    _require(0.0 < beta < 1.0, "xi2 pair needs beta in (0, 1)")
    spec = KernelSpec.make(
        XI2,
        alpha1=alpha1,
        alpha2=alpha2,
        beta=beta,
        gamma1=gamma1,
        gamma2=gamma2,
        lambda1=lam1,
        lambda2=lam2,
    )

    def side(offset: float, g1: float, g2: float) -> KernelSide:
        u = _LazyProduct(lambda m: (g1 + m) * (-lam1) / (m + 1))
        v = _LazyProduct(lambda n: (g2 + n) * (-lam2) / (n + 1))

        def coef(m: int, n: int) -> float:
            return u(m) * v(n) * float(rgamma(alpha1 * m + alpha2 * n + offset))

        return _side_from_double(
            spec,
            offset,
            alpha1,
            alpha2,
            coef,
            evaluator=lambda x: x ** (offset - 1.0)
            * xi2_general(
                g1, g2, alpha1, alpha2, offset, -lam1 * x**alpha1, -lam2 * x**alpha2
            ),
            laplace=lambda p: (
                p ** (alpha1 * g1 + alpha2 * g2 - offset)
                * (p**alpha1 + lam1) ** (-g1)
                * (p**alpha2 + lam2) ** (-g2)
                if p**alpha1 > abs(lam1) and p**alpha2 > abs(lam2)
                else None
            ),
            x_scale=x_scale,
        )

    return _spot_check(
        SoninPair(
            kappa=side(beta, gamma1, gamma2), k=side(1.0 - beta, -gamma1, -gamma2)
        )
    )


def from_series_pair(
    coeffs: SeriesPairCoefficients, lam: float, radius: float = math.inf
) -> SoninPair:
    """Kernels from validated series coefficients, truncated at their order.

    ``radius`` is the convergence radius in the series variable lam * x^alpha;
    evaluation beyond it raises RadiusExceeded.
    """
    alpha, beta = coeffs.alpha, coeffs.beta
    if lam != 0.0 and math.isfinite(radius):
        radius_x = (radius / abs(lam)) ** (1.0 / alpha)
    else:
        radius_x = math.inf
    spec = KernelSpec.make(SERIES, alpha=alpha, beta=beta, **{"lambda": lam})

    def side(offset: float, seq: Sequence[float]) -> KernelSide:
        scaled = []
        w = 1.0
        for c in seq:
            scaled.append(c * w)
            w *= lam
        values = tuple(scaled)

        def evaluator(x: float, _values=values, _o=offset) -> float:
            acc = 0.0
            xa = x**alpha
            pw = x ** (_o - 1.0)
            for c in _values:
                acc += c * pw
                pw *= xa
            return acc

        return _side_from_groups(
            spec,
            [
                _SeriesGroup(
                    offset,
                    alpha,
                    lambda n, _v=values: _v[n] if n < len(_v) else 0.0,
                    length=len(values),
                )
            ],
            evaluator=evaluator,
            laplace=None,
            x_scale=DEFAULT_X_SCALE,
            radius_x=radius_x,
        )

    return _spot_check(
        SoninPair(kappa=side(beta, coeffs.a.coeffs), k=side(1.0 - beta, coeffs.b.coeffs))
    )


def eval_kernel(pair: SoninPair, side: str, x: float) -> float:
    """Pointwise kernel value through the family's special-function form."""
    return pair.side(side).evaluate(x)


_CONSTRUCTORS: dict[str, Callable[..., SoninPair]] = {
    POWER: lambda p: make_power_pair(p["alpha"]),
    TEMPERED: lambda p: make_tempered_pair(p["alpha"], p["rho"]),
    ML_SUM: lambda p: make_ml_sum_pair(p["alpha"], p["beta"]),
    WRIGHT: lambda p: make_wright_pair(p["alpha"], p["beta"], p["lambda"]),
    PRABHAKAR: lambda p: make_prabhakar_pair(
        p["alpha"], p["beta"], p["gamma"], p["lambda"]
    ),
    KUMMER: lambda p: make_kummer_pair(p["beta"], p["gamma"], p["lambda"]),
    PHI3: lambda p: make_phi3_pair(
        p["alpha1"], p["alpha2"], p["beta"], p["gamma"], p["lambda1"], p["lambda2"]
    ),
    XI2: lambda p: make_xi2_pair(
        p["alpha1"],
        p["alpha2"],
        p["beta"],
        p["gamma1"],
        p["gamma2"],
        p["lambda1"],
        p["lambda2"],
    ),
}


def pair_from_spec(spec: KernelSpec | dict) -> SoninPair:
    """Build a validated pair from a KernelSpec or its JSON form."""
    if isinstance(spec, dict):
        spec = KernelSpec.from_json(spec)
    if spec.family not in _CONSTRUCTORS:
        raise ParameterDomain(
            f"family {spec.family!r} cannot be built from a parameter spec"
        )
    params = spec.params_dict()
    try:
        return _CONSTRUCTORS[spec.family](params)
    except KeyError as exc:
        raise ParameterDomain(
            f"family {spec.family!r} is missing parameter {exc.args[0]!r}"
        ) from None
