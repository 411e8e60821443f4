"""Series evaluators for the special functions behind the kernel catalog.

Everything here is a convergent power series summed in double precision with
compensated (Kahan) accumulation: Wright and Mittag-Leffler functions, the
Prabhakar three-parameter extension, Kummer's 1F1, the Horn confluent
functions Phi3/Xi2, and the two-variable generalizations phi3/xi2 in which
the Pochhammer denominator (beta)_{m+n} is replaced by
1/Gamma(alpha1*m + alpha2*n + beta).

Evaluation is restricted to real arguments in the series-practical range
(|z| <~ 30 for single sums, |y| + |z| <~ 20 for the double sums); there are
no asymptotic or contour algorithms.  Each evaluator tracks the ratio
sum|term| / |sum| and raises PrecisionLoss when cancellation has destroyed
the result.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, rgamma

from .errors import NonConvergence, ParameterDomain, PoleError, PrecisionLoss

#: Cancellation guard: raise PrecisionLoss above this sum|term|/|sum| ratio.
CONDITION_LIMIT = 1e12

#: Consecutive sub-tolerance terms (or diagonals) required before stopping.
_QUIET_RUN = 3


@dataclass(frozen=True)
class SeriesEvalConfig:
    """Stopping parameters for the series evaluators."""

    abs_tol: float = 1e-15
    max_terms: int = 500
    max_diagonals: int = 400

    def __post_init__(self) -> None:
        if self.abs_tol <= 0.0:
            raise ParameterDomain("abs_tol must be positive")
        if self.max_terms < 1 or self.max_diagonals < 1:
            raise ParameterDomain("term caps must be >= 1")


def default_config() -> SeriesEvalConfig:
    """Default config; SONIN_MAX_TERMS overrides both term caps."""
    cap = os.environ.get("SONIN_MAX_TERMS")
    if cap is None:
        return SeriesEvalConfig()
    n = int(cap)
    return SeriesEvalConfig(max_terms=n, max_diagonals=n)


class _Kahan:
    """Compensated accumulator that also tracks the absolute-term sum."""

    __slots__ = ("total", "_comp", "total_abs")

    def __init__(self) -> None:
        self.total = 0.0
        self._comp = 0.0
        self.total_abs = 0.0

    def add(self, term: float, abs_term: float | None = None) -> None:
        self.total_abs += abs(term) if abs_term is None else abs_term
        y = term - self._comp
        t = self.total + y
        self._comp = (t - self.total) - y
        self.total = t

    def finish(self, where: str) -> float:
        if self.total != 0.0 and self.total_abs / abs(self.total) > CONDITION_LIMIT:
            raise PrecisionLoss(
                f"{where}: cancellation ratio "
                f"{self.total_abs / abs(self.total):.2e} exceeds {CONDITION_LIMIT:.0e}"
            )
        return self.total


def gamma_fn(x: float) -> float:
    """Gamma(x) for real x away from the poles at 0, -1, -2, ..."""
    if x <= 0.0 and x == math.floor(x):
        raise PoleError(f"Gamma has a pole at {x}")
    return math.gamma(x)


def ln_gamma(x: float) -> float:
    """log Gamma(x) for x > 0."""
    if x <= 0.0:
        raise ParameterDomain("ln_gamma requires x > 0")
    return math.lgamma(x)


def pochhammer(gamma: float, n: int) -> float:
    """Rising factorial (gamma)_n = gamma (gamma+1) ... (gamma+n-1), exact product."""
    if n < 0:
        raise ParameterDomain("pochhammer needs n >= 0")
    out = 1.0
    for i in range(n):
        out *= gamma + i
    return out


def wright(
    alpha: float, beta: float, z: float, config: SeriesEvalConfig | None = None
) -> float:
    """Wright function: sum z^n / (n! Gamma(alpha n + beta)), alpha > -1.

    Terms whose Gamma argument hits a non-positive integer contribute zero
    through the reciprocal Gamma.
    """
    if alpha <= -1.0:
        raise ParameterDomain("wright requires alpha > -1")
    cfg = config or default_config()
    acc = _Kahan()
    w = 1.0  # z^n / n!
    quiet = 0
    for n in range(cfg.max_terms):
        term = w * float(rgamma(alpha * n + beta))
        acc.add(term)
        quiet = quiet + 1 if abs(term) < cfg.abs_tol else 0
        if quiet >= _QUIET_RUN:
            return acc.finish("wright")
        w *= z / (n + 1)
    raise NonConvergence(f"wright series not converged in {cfg.max_terms} terms")


def mittag_leffler2(
    alpha: float, beta: float, z: float, config: SeriesEvalConfig | None = None
) -> float:
    """Two-parameter Mittag-Leffler function: sum z^n / Gamma(alpha n + beta)."""
    if alpha <= 0.0:
        raise ParameterDomain("mittag_leffler2 requires alpha > 0")
    cfg = config or default_config()
    if z == 0.0:
        return float(rgamma(beta))
    acc = _Kahan()
    log_abs_z = math.log(abs(z))
    sign_z = 1.0 if z > 0.0 else -1.0
    sign = 1.0
    quiet = 0
    for n in range(cfg.max_terms):
        term = sign * math.exp(n * log_abs_z) * float(rgamma(alpha * n + beta))
        acc.add(term)
        quiet = quiet + 1 if abs(term) < cfg.abs_tol else 0
        if quiet >= _QUIET_RUN:
            return acc.finish("mittag_leffler2")
        sign *= sign_z
    raise NonConvergence(
        f"Mittag-Leffler series not converged in {cfg.max_terms} terms"
    )


def prabhakar(
    alpha: float,
    beta: float,
    gamma: float,
    z: float,
    config: SeriesEvalConfig | None = None,
) -> float:
    """Prabhakar function: sum (gamma)_n z^n / (n! Gamma(alpha n + beta)).

    For negative integer gamma the Pochhammer factor terminates the series.
    """
    if alpha <= 0.0:
        raise ParameterDomain("prabhakar requires alpha > 0")
    cfg = config or default_config()
    acc = _Kahan()
    w = 1.0  # (gamma)_n z^n / n!
    quiet = 0
    for n in range(cfg.max_terms):
        term = w * float(rgamma(alpha * n + beta))
        acc.add(term)
        quiet = quiet + 1 if abs(term) < cfg.abs_tol else 0
        if quiet >= _QUIET_RUN:
            return acc.finish("prabhakar")
        w *= (gamma + n) * z / (n + 1)
    raise NonConvergence(f"Prabhakar series not converged in {cfg.max_terms} terms")


def kummer_1f1(
    gamma: float, beta: float, z: float, config: SeriesEvalConfig | None = None
) -> float:
    """Kummer confluent function 1F1: sum ((gamma)_n / (beta)_n) z^n / n!."""
    if beta <= 0.0 and beta == math.floor(beta):
        raise PoleError("kummer_1f1 has poles at beta = 0, -1, -2, ...")
    cfg = config or default_config()
    acc = _Kahan()
    t = 1.0
    quiet = 0
    for n in range(cfg.max_terms):
        acc.add(t)
        quiet = quiet + 1 if abs(t) < cfg.abs_tol else 0
        if quiet >= _QUIET_RUN:
            return acc.finish("kummer_1f1")
        t *= (gamma + n) / (beta + n) * z / (n + 1)
    raise NonConvergence(f"1F1 series not converged in {cfg.max_terms} terms")


def _double_sum(
    u_step,  # u_{m+1} = u_m * u_step(m); u carries the m-indexed factor incl. y^m/m!
    v_step,  # same for the n index
    denom,  # denom(m_array, n_array) -> per-term multiplier array for one diagonal
    config: SeriesEvalConfig,
    where: str,
) -> float:
    """Sum a double series by anti-diagonals m + n = s with a quiet-run stop."""
    u = [1.0]
    v = [1.0]
    acc = _Kahan()
    quiet = 0
    for s in range(config.max_diagonals):
        m_idx = np.arange(s + 1)
        terms = np.asarray(u) * np.asarray(v)[::-1] * denom(m_idx, s - m_idx)
        diag = float(np.sum(terms))
        acc.add(diag, abs_term=float(np.sum(np.abs(terms))))
        quiet = quiet + 1 if abs(diag) < config.abs_tol else 0
        if quiet >= _QUIET_RUN:
            return acc.finish(where)
        u.append(u[-1] * u_step(s))
        v.append(v[-1] * v_step(s))
    raise NonConvergence(
        f"{where}: double series not converged in {config.max_diagonals} diagonals"
    )


def phi3_general(
    gamma: float,
    alpha1: float,
    alpha2: float,
    beta: float,
    y: float,
    z: float,
    config: SeriesEvalConfig | None = None,
) -> float:
    """Two-variable series sum (gamma)_m y^m z^n / (Gamma(a1 m + a2 n + beta) m! n!).

    For alpha1 = alpha2 = 1 this reduces to the Horn function Phi3 divided
    by Gamma(beta).
    """
    if alpha1 <= 0.0 or alpha2 <= 0.0:
        raise ParameterDomain("phi3_general requires alpha1, alpha2 > 0")
    cfg = config or default_config()
    return _double_sum(
        lambda m: (gamma + m) * y / (m + 1),
        lambda n: z / (n + 1),
        lambda m, n: rgamma(alpha1 * m + alpha2 * n + beta),
        cfg,
        "phi3_general",
    )


def xi2_general(
    gamma1: float,
    gamma2: float,
    alpha1: float,
    alpha2: float,
    beta: float,
    y: float,
    z: float,
    config: SeriesEvalConfig | None = None,
) -> float:
    """Like phi3_general but with Pochhammer weights on both indices."""
    if alpha1 <= 0.0 or alpha2 <= 0.0:
        raise ParameterDomain("xi2_general requires alpha1, alpha2 > 0")
    cfg = config or default_config()
    return _double_sum(
        lambda m: (gamma1 + m) * y / (m + 1),
        lambda n: (gamma2 + n) * z / (n + 1),
        lambda m, n: rgamma(alpha1 * m + alpha2 * n + beta),
        cfg,
        "xi2_general",
    )


def horn_phi3(
    gamma: float, beta: float, y: float, z: float, config: SeriesEvalConfig | None = None
) -> float:
    """Horn confluent function Phi3: sum (gamma)_m y^m z^n / ((beta)_{m+n} m! n!)."""
    if beta <= 0.0 and beta == math.floor(beta):
        raise PoleError("horn_phi3 has poles at beta = 0, -1, -2, ...")
    cfg = config or default_config()
    inv_poch = _InversePochhammer(beta)
    return _double_sum(
        lambda m: (gamma + m) * y / (m + 1),
        lambda n: z / (n + 1),
        inv_poch,
        cfg,
        "horn_phi3",
    )


def horn_xi2(
    gamma1: float,
    gamma2: float,
    beta: float,
    y: float,
    z: float,
    config: SeriesEvalConfig | None = None,
) -> float:
    """Horn confluent function Xi2: sum (g1)_m (g2)_n y^m z^n / ((beta)_{m+n} m! n!)."""
    if beta <= 0.0 and beta == math.floor(beta):
        raise PoleError("horn_xi2 has poles at beta = 0, -1, -2, ...")
    cfg = config or default_config()
    inv_poch = _InversePochhammer(beta)
    return _double_sum(
        lambda m: (gamma1 + m) * y / (m + 1),
        lambda n: (gamma2 + n) * z / (n + 1),
        inv_poch,
        cfg,
        "horn_xi2",
    )


class _InversePochhammer:
    """1/(beta)_{m+n} on a diagonal, extended lazily to avoid overflow."""

    def __init__(self, beta: float) -> None:
        self._beta = beta
        self._vals = [1.0]

    def __call__(self, m_idx: np.ndarray, n_idx: np.ndarray) -> float:
        s = int(m_idx[0] + n_idx[0])
        while len(self._vals) <= s:
            k = len(self._vals) - 1
            self._vals.append(self._vals[-1] / (self._beta + k))
        return self._vals[s]
