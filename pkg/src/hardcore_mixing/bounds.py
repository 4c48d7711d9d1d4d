"""Scalar inequality suite: entropy/Chernoff toolkit, condition checks,
and the assembled exponent bookkeeping.

Every report is evaluated twice, at 53-bit and at 128-bit precision; a
verdict flip between the two marks the report precision-sensitive (the
high-precision verdict wins).  Quantities with unstated asymptotic
constants take caller-supplied stand-ins, defaulting to 1 and clearly
labelled as configuration, never as published values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp

from .errors import InvalidParameterError, PreconditionError
from .hardcore import alpha_mp, beta_mp, gamma_of_lambda_mp
from .numerics import as_fraction, binom_sum_leq, floor_exact

FLOAT64_PREC = 53
HIGH_PREC = 128


@dataclass(frozen=True)
class BoundReport:
    inequality: str
    params: dict
    lhs: float
    rhs: float
    direction: str
    passed: bool
    passed_float64: bool
    precision_sensitive: bool
    margin: float
    vacuous: bool = False
    detail: dict = field(default_factory=dict)


def _dual_report(
    inequality: str,
    params: dict,
    pair_fn,
    direction: str = "<=",
    vacuous: bool = False,
    detail: dict | None = None,
) -> BoundReport:
    """Evaluate (lhs, rhs) at 53- and 128-bit precision and compare."""

    def verdict(lhs, rhs):
        return bool(lhs <= rhs) if direction == "<=" else bool(lhs >= rhs)

    with mp.workprec(FLOAT64_PREC):
        l64, r64 = pair_fn()
        p64 = verdict(l64, r64)
    with mp.workprec(HIGH_PREC):
        l128, r128 = pair_fn()
        p128 = verdict(l128, r128)
        margin = float(r128 - l128) if direction == "<=" else float(l128 - r128)
    return BoundReport(
        inequality=inequality,
        params=params,
        lhs=float(l128),
        rhs=float(r128),
        direction=direction,
        passed=p128,
        passed_float64=p64,
        precision_sensitive=p64 != p128,
        margin=margin,
        vacuous=vacuous,
        detail=detail or {},
    )


def _log2(x) -> mp.mpf:
    return mp.log(x) / mp.log(2)


# -- entropy ------------------------------------------------------------------


def binary_entropy(x: float) -> float:
    """H(x) = -x log2 x - (1-x) log2(1-x); endpoints return 0 by continuity."""
    if x < 0 or x > 1:
        raise InvalidParameterError(f"entropy argument must lie in [0,1], got {x}")
    if x == 0 or x == 1:
        return 0.0
    return float(-x * math.log2(x) - (1 - x) * math.log2(1 - x))


def _entropy_mp(x) -> mp.mpf:
    if x == 0 or x == 1:
        return mp.mpf(0)
    return -x * _log2(x) - (1 - x) * _log2(1 - x)


def check_entropy_sandwich(x: float) -> tuple[BoundReport, BoundReport]:
    """x <= H(x) <= 2 x log2(1/x) on 0 < x < 1/e."""
    with mp.workprec(HIGH_PREC):
        if not 0 < x < float(1 / mp.e):
            raise InvalidParameterError(f"need 0 < x < 1/e, got {x}")
    lower = _dual_report(
        "entropy-lower", {"x": x}, lambda: (mp.mpf(x), _entropy_mp(mp.mpf(x)))
    )
    upper = _dual_report(
        "entropy-upper",
        {"x": x},
        lambda: (_entropy_mp(mp.mpf(x)), 2 * mp.mpf(x) * _log2(1 / mp.mpf(x))),
    )
    return lower, upper


def chernoff_binomial_sum_bound(n: int, c) -> BoundReport:
    """Exact big-integer sum_{i <= floor(c n)} C(n, i) <= 2^(H(c) n), c <= 1/2.

    c is taken exactly (Fraction/int/str or the exact value of a float), so
    the floor never suffers a float round-trip.
    """
    cf = as_fraction(c)
    if cf > Fraction(1, 2) or cf < 0:
        raise InvalidParameterError(f"need 0 <= c <= 1/2, got {c}")
    k = floor_exact(cf * n)
    lhs_int = binom_sum_leq(n, k)

    def pair():
        centropy = _entropy_mp(mp.mpf(cf.numerator) / cf.denominator)
        return mp.mpf(lhs_int), mp.power(2, centropy * n)

    return _dual_report(
        "binomial-chernoff",
        {"N": n, "c": str(cf)},
        pair,
        detail={"lhs_exact": str(lhs_int), "k": k},
    )


# -- the alpha log alpha inequality ---------------------------------------------


def check_alpha_log_alpha(lam: float) -> tuple[BoundReport, BoundReport]:
    """4 a log2(1/a) <= log2(1+lam) / (2 (1 + log2(1+lam))) with a = alpha(lam),
    together with its equivalent closed form
    44 log2(1 + 1/gamma) <= gamma (1 + 1/gamma)^(11/2) at gamma = gamma(lam).

    Both forms are evaluated on the same point and must agree.
    """
    if lam <= 0:
        raise InvalidParameterError("lambda must be positive")

    def pair_original():
        a = alpha_mp(lam)
        L = _log2(1 + mp.mpf(lam))
        return 4 * a * _log2(1 / a), L / (2 * (1 + L))

    def pair_calculus():
        gam = gamma_of_lambda_mp(lam)
        return 44 * _log2(1 + 1 / gam), gam * (1 + 1 / gam) ** mp.mpf("5.5")

    original = _dual_report("alpha-log-alpha", {"lambda": lam}, pair_original)
    calculus = _dual_report("alpha-log-alpha-calculus", {"lambda": lam}, pair_calculus)
    return original, calculus


def check_calculus_form(gamma: float) -> BoundReport:
    """The closed form on its own grid: 44 log2(1+1/g) <= g (1+1/g)^(11/2)."""
    if not 0 < gamma < 1:
        raise InvalidParameterError("gamma must lie in (0,1)")

    def pair():
        gam = mp.mpf(gamma)
        return 44 * _log2(1 + 1 / gam), gam * (1 + 1 / gam) ** mp.mpf("5.5")

    return _dual_report("alpha-log-alpha-calculus", {"gamma": gamma}, pair)


# -- the trivial-region chain ---------------------------------------------------


def trivial_region_bound_chain(m: int, lam: float, d: int) -> list[BoundReport]:
    """The five-quantity descent from the counting bound to (1+lam)^(M/2).

    Quantities (as base-2 logs):
      L1 = log2( C(M, <= aM)^2 (1+lam)^(2 a M) )
      L2 = 2 H(a) M + 2 a M log2(1+lam)
      L3 = 2 M H(a) (1 + log2(1+lam))
      L4 = 4 M a log2(1/a) (1 + log2(1+lam))
      L5 = M log2(1+lam) / 2
    Each adjacent step is reported; a M < 1 yields vacuous reports (the
    regime has no nontrivial trivial-region sets to bound).
    """
    if lam < 1 / math.sqrt(d):
        raise PreconditionError(
            f"the chain presumes lambda >= 1/sqrt(d); got lambda={lam}, d={d}"
        )
    with mp.workprec(HIGH_PREC):
        a_check = alpha_mp(lam)
        vacuous = bool(a_check * m < 1)
        am_floor = int(mp.floor(a_check * m))
    lhs_int = binom_sum_leq(m, am_floor)

    def quantities():
        a = alpha_mp(lam)
        L = _log2(1 + mp.mpf(lam))
        ha = _entropy_mp(a)
        l1 = 2 * _log2(mp.mpf(lhs_int)) + 2 * a * m * L
        l2 = 2 * ha * m + 2 * a * m * L
        l3 = 2 * m * ha * (1 + L)
        l4 = 4 * m * a * _log2(1 / a) * (1 + L)
        l5 = m * L / 2
        return [l1, l2, l3, l4, l5]

    reports = []
    names = ["counting<=entropy", "entropy<=factored", "factored<=alphalog", "alphalog<=half"]
    for i, name in enumerate(names):
        reports.append(
            _dual_report(
                f"triv-chain-{name}",
                {"M": m, "lambda": lam, "d": d},
                lambda i=i: (quantities()[i], quantities()[i + 1]),
                vacuous=vacuous,
            )
        )
    return reports


# -- the activity/expansion conditions ------------------------------------------


def condition_check(
    lam: float, d: int, delta: float, c: float, variant: str = "main"
) -> BoundReport:
    """The lower-bound condition on the activity, three variants:

    main:     beta(lam) >= c max{ log2(d^5/delta)/sqrt(d), log2^2(d)/(delta d) }
    strong:   log2(1+lam) >= c max{ log2(d^5/delta)/d^(1/4),
                                    log2(d) sqrt(log2(d^5/delta)) / sqrt(delta d) }
    codegree: beta(lam) >= c max{ log2(d^5/delta)/sqrt(d), log2(d)/(delta d^2) }
    """
    if variant not in ("main", "strong", "codegree"):
        raise InvalidParameterError(f"unknown condition variant {variant!r}")
    if not 0 < delta < 1:
        raise InvalidParameterError("delta must lie in (0,1)")
    if d < 2 or lam <= 0 or c <= 0:
        raise InvalidParameterError("need d >= 2, lambda > 0, c > 0")

    def pair():
        dd = mp.mpf(d)
        dl = mp.mpf(delta)
        big = _log2(dd**5 / dl)
        if variant == "main":
            lhs = beta_mp(lam, d, delta)
            rhs = c * max(big / mp.sqrt(dd), _log2(dd) ** 2 / (dl * dd))
        elif variant == "codegree":
            lhs = beta_mp(lam, d, delta)
            rhs = c * max(big / mp.sqrt(dd), _log2(dd) / (dl * dd**2))
        else:
            lhs = _log2(1 + mp.mpf(lam))
            rhs = c * max(
                big / dd ** mp.mpf("0.25"),
                _log2(dd) * mp.sqrt(big) / mp.sqrt(dl * dd),
            )
        return rhs, lhs  # condition holds iff lhs >= rhs

    return _dual_report(
        f"condition-{variant}",
        {"lambda": lam, "d": d, "delta": delta, "c": c},
        pair,
        direction="<=",
    )


def theorem1_lower_bound(
    n: int, lam: float, d: int, delta: float | None, c: float = 1.0, c_exp: float = 1.0
):
    """2^(c_exp N alpha(lam) beta(lam) delta) once the preconditions hold.

    Raises PreconditionError naming the failed clause: the main condition at
    the configured c, N >= d^2, or an undefined expansion constant.  The
    exponent constant c_exp is caller configuration, never a published value.
    Returns (bound as mpf, exponent as float).
    """
    if delta is None:
        raise PreconditionError(
            "expansion constant undefined (no small nonempty sets); "
            "the bound does not apply to this graph"
        )
    if n < d * d:
        raise PreconditionError(f"need N >= d^2, got N={n}, d^2={d * d}")
    cond = condition_check(lam, d, delta, c, "main")
    if not cond.passed:
        raise PreconditionError(
            f"activity condition (main) fails at c={c}: "
            f"beta={cond.rhs} < required {cond.lhs}"
        )
    with mp.workprec(HIGH_PREC):
        exponent = c_exp * n * alpha_mp(lam) * beta_mp(lam, d, delta) * mp.mpf(delta)
        return mp.power(2, exponent), float(exponent)


# -- hypercube corollary regimes -------------------------------------------------


@dataclass(frozen=True)
class RegimeResult:
    applicable: bool
    regime: str | None
    log2_bound: float | None
    reason: str | None = None


def corollary_hypercube_regimes(
    d: int,
    lam: float,
    threshold_c: float = 1.0,
    small_limit: float = 1.0,
    large_coeff: float = 1.0,
) -> RegimeResult:
    """Three-branch mixing-time exponent for the d-cube.

    Applicability threshold lam >= threshold_c d^(-1/4) log2^(3/2) d and the
    regime boundaries (lam <= small_limit: branch 1; lam >= large_coeff*d:
    branch 3; else branch 2) carry configurable constants.
    Returns the branch tag and the exponent (a base-2 log of the bound).
    """
    if d < 2 or lam <= 0:
        raise InvalidParameterError("need d >= 2 and lambda > 0")
    with mp.workprec(HIGH_PREC):
        dd = mp.mpf(d)
        threshold = threshold_c * dd ** mp.mpf("-0.25") * _log2(dd) ** mp.mpf("1.5")
        if lam < threshold:
            return RegimeResult(
                applicable=False,
                regime=None,
                log2_bound=None,
                reason=f"lambda={lam} below applicability threshold {float(threshold)}",
            )
        L = _log2(1 + mp.mpf(lam))
        if lam <= small_limit:
            regime = "small"
            expo = mp.power(2, d) * L**3 / (mp.sqrt(dd) * _log2(dd) ** 2)
        elif lam >= large_coeff * d:
            regime = "large"
            expo = mp.power(2, d) * L / mp.sqrt(dd)
        else:
            regime = "middle"
            expo = mp.power(2, d) * L**2 / (mp.sqrt(dd) * _log2(dd))
        return RegimeResult(True, regime, float(expo))


# -- asymptotic binomial-sum estimate --------------------------------------------


def check_binomial_sum_asymptotic(n: int, k: int) -> BoundReport:
    """Exact sum_{i<=k} C(n,i) <= (1 + 10 k/n)(e n / k)^k in the k = o(n)
    regime (proxy: k <= n/10); the constant 10 stands in for the unstated
    O(k/n) factor and the empirically required constant is reported."""
    if k < 0 or n < 1:
        raise InvalidParameterError("need n >= 1 and k >= 0")
    vacuous = k > n // 10
    lhs_int = binom_sum_leq(n, k)

    def pair():
        if k == 0:
            return mp.mpf(lhs_int), mp.mpf(1)  # (en/k)^k -> 1 by convention
        rhs = (1 + mp.mpf(10 * k) / n) * (mp.e * n / mp.mpf(k)) ** k
        return mp.mpf(lhs_int), rhs

    detail: dict = {"lhs_exact": str(lhs_int)}
    if k > 0:
        with mp.workprec(HIGH_PREC):
            base = (mp.e * n / mp.mpf(k)) ** k
            ratio = mp.mpf(lhs_int) / base
            detail["empirical_constant"] = float((ratio - 1) * n / k) if ratio > 1 else 0.0
    return _dual_report(
        "binomial-asymptotic", {"n": n, "k": k}, pair, vacuous=vacuous, detail=detail
    )


# -- assembled exponent bookkeeping ----------------------------------------------


def theorem2_exponent_pipeline(
    lam: float,
    d: int,
    delta: float,
    g_: int,
    t: int,
    c_psi_phi: float = 1.0,
    c_rec: float = 1.0,
    condition_c: float = 4.0,
) -> BoundReport:
    """Total per-family exponent with explicit stand-in constants:

        cost = c_psi_phi g log2^2(d)/d + c_rec t log2(d^5/delta)/sqrt(d)
        gain = t beta(lam)

    The report asserts cost - gain < 0, i.e. the approximation bookkeeping
    loses to the reconstruction gain; with the main condition holding at a
    sufficiently large c this is guaranteed (t >= delta g for small
    closures turns the g-term into a t-term).  When the condition premise
    fails at condition_c the implication is empty and the report is marked
    vacuous rather than failed.
    """
    if g_ < 1 or t < 0:
        raise InvalidParameterError("need g >= 1 and t >= 0")
    if not 0 < delta < 1:
        raise InvalidParameterError("delta must lie in (0,1)")
    cond = condition_check(lam, d, delta, condition_c, "main")

    def pair():
        dd = mp.mpf(d)
        dl = mp.mpf(delta)
        cost = (
            c_psi_phi * g_ * _log2(dd) ** 2 / dd
            + c_rec * t * _log2(dd**5 / dl) / mp.sqrt(dd)
        )
        gain = t * beta_mp(lam, d, delta)
        return cost, gain

    return _dual_report(
        "theorem2-exponent",
        {
            "lambda": lam,
            "d": d,
            "delta": delta,
            "g": g_,
            "t": t,
            "c_psi_phi": c_psi_phi,
            "c_rec": c_rec,
            "condition_c": condition_c,
        },
        pair,
        vacuous=not cond.passed,
        detail={"condition_main_passed": cond.passed},
    )


def check_m2_absorption(m: int, d: int, constant: float = 1.0) -> BoundReport:
    """M^2 <= 2^(constant M log2(d)/d^2) given 2M >= d^2: the polynomial
    prefactor is absorbed into the exponent."""
    if 2 * m < d * d:
        raise PreconditionError(f"needs 2M >= d^2, got M={m}, d={d}")

    def pair():
        return 2 * _log2(mp.mpf(m)), constant * m * _log2(mp.mpf(d)) / (d * d)

    return _dual_report("m2-absorption", {"M": m, "d": d, "constant": constant}, pair)
