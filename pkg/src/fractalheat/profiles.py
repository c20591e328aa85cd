"""Radial decay profiles and their structural conditions.

A profile is a positive non-increasing function Phi on [0, inf) used to
sandwich a heat kernel in self-similar form  t^(-alpha/beta) * Phi(d / t^(1/beta)).
Three families are supported:

* ``GaussType(C, c, gamma)``  ->  C * exp(-c * s^gamma)
* ``CauchyType(C, gamma)``    ->  C * (1 + s)^(-gamma)
* ``TableProfile(s, values)`` ->  monotone piecewise-linear interpolation

The structural conditions below control the comparison machinery between a
lower profile Phi1 and an upper profile Phi2 (constants are the witnesses):

* minorization:        Phi1(s)       >= a1 * Phi2(a2 * s)            (0 < a1 <= 1, a2 > 1)
* factorization:       Phi2(s + t)   >= b1 * Phi2(b2 s) * Phi2(b3 t)
* power minorization:  Phi1(s)^p     >= c1 * Phi2(c2 * s)
* volume integrability:       integral s^(alpha-1) Phi2(s) ds < inf
* first-moment integrability: integral s^alpha     Phi2(s) ds < inf

Witnesses come from parameter algebra for closed-form families and from a
log-spaced grid search otherwise; every witness is re-verified on a fixed
evaluation grid before being reported.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

__all__ = [
    "GaussType",
    "CauchyType",
    "TableProfile",
    "ConditionWitness",
    "ProfilePredicateReport",
    "profile_eval",
    "check_profile_conditions",
    "verify_split_bound",
]

# fixed evaluation grid: witnesses must survive these s values
_S_GRID = np.concatenate([[0.0], np.logspace(-3, 3, 512)])
# witness search grids (log-spaced, 64 candidates per axis)
_A2_GRID = np.logspace(np.log10(1.0000001), 1.0, 64)
_A1_GRID = np.logspace(-6, 0, 64)


@dataclass(frozen=True)
class GaussType:
    """Phi(s) = C * exp(-c * s^gamma)."""

    C: float
    c: float
    gamma: float

    def __post_init__(self):
        if self.C <= 0 or self.c <= 0 or self.gamma <= 0:
            raise ValueError("GaussType requires positive C, c, gamma")


@dataclass(frozen=True)
class CauchyType:
    """Phi(s) = C * (1 + s)^(-gamma)."""

    C: float
    gamma: float

    def __post_init__(self):
        if self.C <= 0 or self.gamma <= 0:
            raise ValueError("CauchyType requires positive C, gamma")


@dataclass(frozen=True)
class TableProfile:
    """Positive non-increasing samples, piecewise-linear in between.

    Values are clamped to the end samples outside the tabulated range, so
    the tail is treated as constant; tail integrals therefore diverge and
    the integrability flags stay honest (False) for table profiles.
    """

    s: tuple
    values: tuple

    def __init__(self, s, values):
        s = tuple(float(v) for v in s)
        values = tuple(float(v) for v in values)
        if len(s) != len(values) or len(s) < 2:
            raise ValueError("need at least two (s, value) samples")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ValueError("abscissae must be strictly increasing")
        if any(v <= 0 for v in values):
            raise ValueError("profile values must be strictly positive")
        if any(b > a + 1e-15 for a, b in zip(values, values[1:])):
            raise ValueError("profile values must be non-increasing")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "values", values)


def profile_eval(profile, s):
    """Evaluate a profile at s >= 0 (scalar or array)."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise ValueError("profiles are defined for s >= 0")
    if isinstance(profile, GaussType):
        out = profile.C * np.exp(-profile.c * s_arr**profile.gamma)
    elif isinstance(profile, CauchyType):
        out = profile.C * (1.0 + s_arr) ** (-profile.gamma)
    elif isinstance(profile, TableProfile):
        out = np.interp(s_arr, profile.s, profile.values)
    else:
        raise TypeError(f"unknown profile type {type(profile).__name__}")
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ConditionWitness:
    """Outcome of one structural condition: flag plus verified constants."""

    holds: bool
    constants: tuple = ()
    method: str = ""      # "closed-form" | "grid" | "impossible"
    note: str = ""


@dataclass(frozen=True)
class ProfilePredicateReport:
    minorization: ConditionWitness          # Phi1(s) >= a1 Phi2(a2 s)
    factorization: ConditionWitness         # Phi2(s+t) >= b1 Phi2(b2 s) Phi2(b3 t)
    power_minorization: ConditionWitness    # Phi1(s)^p >= c1 Phi2(c2 s)
    volume_integrable: bool
    volume_integral: float
    moment_integrable: bool
    moment_integral: float
    alpha: float
    p: float

    @property
    def all_comparison_conditions(self) -> bool:
        return (self.minorization.holds and self.factorization.holds
                and self.power_minorization.holds)


# -- internal helpers -----------------------------------------------------

def _powered(profile, p):
    """Phi^p as a profile of the same family."""
    if isinstance(profile, GaussType):
        return GaussType(profile.C**p, p * profile.c, profile.gamma)
    if isinstance(profile, CauchyType):
        return CauchyType(profile.C**p, p * profile.gamma)
    if isinstance(profile, TableProfile):
        return TableProfile(profile.s, tuple(v**p for v in profile.values))
    raise TypeError(f"unknown profile type {type(profile).__name__}")


def _verify_minorization(phi1, phi2, a1, a2) -> bool:
    lhs = profile_eval(phi1, _S_GRID)
    rhs = a1 * profile_eval(phi2, a2 * _S_GRID)
    return bool(np.all(lhs >= rhs * (1.0 - 1e-12) - 1e-300))


def _grid_minorization(phi1, phi2) -> ConditionWitness:
    """Search a2 candidates; for each, the best a1 is the min pointwise ratio."""
    lhs = profile_eval(phi1, _S_GRID)
    best = None
    for a2 in _A2_GRID:
        rhs = profile_eval(phi2, a2 * _S_GRID)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ratio = np.where(rhs > 0, lhs / rhs, np.inf)
        a1_max = float(np.min(ratio))
        if best is None or a1_max > best[0]:
            best = (a1_max, a2)
    a1_max, a2 = best
    # snap a1 to the largest admissible log-spaced candidate in (0, 1]
    admissible = _A1_GRID[_A1_GRID <= min(a1_max, 1.0)]
    if admissible.size == 0:
        return ConditionWitness(False, (), "grid", "no positive lower ratio found")
    a1 = float(admissible[-1])
    ok = _verify_minorization(phi1, phi2, a1, a2)
    return ConditionWitness(ok, (a1, float(a2)) if ok else (), "grid",
                            "" if ok else "grid witness failed re-verification")


def _minorization(phi1, phi2) -> ConditionWitness:
    """Phi1(s) >= a1 Phi2(a2 s); closed-form algebra where possible."""
    if isinstance(phi1, GaussType) and isinstance(phi2, GaussType):
        if phi1.gamma > phi2.gamma:
            return ConditionWitness(False, (), "impossible",
                                    "upper profile has the fatter tail")
        if phi1.gamma == phi2.gamma:
            a2 = max((phi1.c / phi2.c) ** (1.0 / phi1.gamma), 2.0)
            a1 = min(1.0, phi1.C / phi2.C)
            ok = _verify_minorization(phi1, phi2, a1, a2)
            return ConditionWitness(ok, (a1, a2), "closed-form")
        return _grid_minorization(phi1, phi2)
    if isinstance(phi1, CauchyType) and isinstance(phi2, CauchyType):
        if phi1.gamma > phi2.gamma:
            return ConditionWitness(False, (), "impossible",
                                    "upper profile has the fatter tail")
        a1, a2 = min(1.0, phi1.C / phi2.C), 2.0
        ok = _verify_minorization(phi1, phi2, a1, a2)
        return ConditionWitness(ok, (a1, a2), "closed-form")
    if isinstance(phi1, GaussType) and isinstance(phi2, CauchyType):
        return ConditionWitness(False, (), "impossible",
                                "exponential cannot dominate a power tail")
    return _grid_minorization(phi1, phi2)


def _factorization(phi2) -> ConditionWitness:
    """Phi2(s+t) >= b1 Phi2(b2 s) Phi2(b3 t)."""
    if isinstance(phi2, GaussType):
        g = phi2.gamma
        b2 = b3 = 2.0 ** ((g - 1.0) / g) if g > 1 else 1.0
        b1 = 1.0 / phi2.C
        method = "closed-form"
    elif isinstance(phi2, CauchyType):
        b2 = b3 = 1.0
        b1 = 1.0 / phi2.C
        method = "closed-form"
    else:
        # grid search: scan the scale factor, then take the worst-pair ratio
        s = np.concatenate([[0.0], np.logspace(-3, 3, 64)])
        ss, tt = np.meshgrid(s, s)
        lhs = profile_eval(phi2, ss + tt)
        best = None
        for b in np.logspace(0, 1, 64):
            rhs = profile_eval(phi2, b * ss) * profile_eval(phi2, b * tt)
            with np.errstate(divide="ignore", invalid="ignore"):
                b1_max = float(np.min(np.where(rhs > 0, lhs / rhs, np.inf)))
            if best is None or b1_max > best[0]:
                best = (b1_max, b)
        b1_max, b2 = best
        b3 = b2
        if not np.isfinite(b1_max) or b1_max <= 0:
            return ConditionWitness(False, (), "grid", "no factorization constant found")
        b1 = 0.999 * b1_max
        method = "grid"
    # re-verify on the standard pair grid
    s = np.concatenate([[0.0], np.logspace(-3, 3, 128)])
    ss, tt = np.meshgrid(s, s)
    lhs = profile_eval(phi2, ss + tt)
    rhs = b1 * profile_eval(phi2, b2 * ss) * profile_eval(phi2, b3 * tt)
    ok = bool(np.all(lhs >= rhs * (1.0 - 1e-12) - 1e-300))
    return ConditionWitness(ok, (float(b1), float(b2), float(b3)) if ok else (),
                            method, "" if ok else "witness failed re-verification")


def _tail_integral(phi2, power: float) -> tuple[bool, float]:
    """integral_0^inf s^power * Phi2(s) ds -> (finite?, value)."""
    if isinstance(phi2, GaussType):
        val, _ = quad(lambda s: s**power * profile_eval(phi2, s), 0, np.inf, limit=200)
        return True, float(val)
    if isinstance(phi2, CauchyType):
        if phi2.gamma <= power + 1.0:
            return False, float("inf")
        val, _ = quad(lambda s: s**power * profile_eval(phi2, s), 0, np.inf, limit=200)
        return True, float(val)
    if isinstance(phi2, TableProfile):
        # constant tail extension: never integrable on [0, inf)
        return False, float("inf")
    raise TypeError(f"unknown profile type {type(phi2).__name__}")


def check_profile_conditions(phi1, phi2, p: float, alpha: float) -> ProfilePredicateReport:
    """Evaluate all structural conditions for a profile pair.

    ``phi1`` is the lower bound profile, ``phi2`` the upper; ``p`` is the
    nonlinearity exponent entering the power-minorization condition and
    ``alpha`` the volume-growth exponent entering the tail integrals.
    """
    if p <= 1:
        raise ValueError("nonlinearity exponent p must exceed 1")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    minor = _minorization(phi1, phi2)
    fact = _factorization(phi2)
    power = _minorization(_powered(phi1, p), phi2)
    vol_ok, vol_val = _tail_integral(phi2, alpha - 1.0)
    mom_ok, mom_val = _tail_integral(phi2, alpha)
    return ProfilePredicateReport(
        minorization=minor,
        factorization=fact,
        power_minorization=power,
        volume_integrable=vol_ok,
        volume_integral=vol_val,
        moment_integrable=mom_ok,
        moment_integral=mom_val,
        alpha=float(alpha),
        p=float(p),
    )


def verify_split_bound(phi2, witness: ConditionWitness, space, beta: float,
                       t_samples, n_pairs: int = 256, seed: int = 0) -> float:
    """Check the split consequence of factorization on sampled point pairs.

    For sampled grid points (x, y) and every t in ``t_samples`` the
    factorization constants (b1, b2, b3) must satisfy

        Phi2(d(x,y) / t^(1/beta)) / Phi2(b2 d(x,x0) / t^(1/beta))
            >= b1 * Phi2(b3 d(y,x0) / t^(1/beta)).

    Returns the minimal margin (LHS - RHS) over all samples; non-negative
    (up to rounding) whenever the factorization witness is genuine.
    """
    if not witness.holds:
        raise ValueError("factorization witness does not hold; nothing to verify")
    if beta <= 0:
        raise ValueError("beta must be positive")
    b1, b2, b3 = witness.constants
    rng = np.random.default_rng(seed)
    n = space.n
    ii = rng.integers(0, n, size=n_pairs)
    jj = rng.integers(0, n, size=n_pairs)
    dxy = space.distances()[ii, jj]
    d_x0 = space.distance_from(space.x0_index)
    margin = np.inf
    for t in np.atleast_1d(np.asarray(t_samples, dtype=float)):
        if t <= 0:
            raise ValueError("t_samples must be positive")
        scale = t ** (-1.0 / beta)
        lhs = profile_eval(phi2, dxy * scale) / profile_eval(phi2, b2 * d_x0[ii] * scale)
        rhs = b1 * profile_eval(phi2, b3 * d_x0[jj] * scale)
        margin = min(margin, float(np.min(lhs - rhs)))
    return margin
