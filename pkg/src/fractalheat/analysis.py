"""Quantitative inequalities and regime classification.

This module turns the comparison machinery into measurable checks:

* Harnack-type time comparisons for the semigroup, with the explicit
  constants derived from a minorization witness (a1, a2):
  A1 = a1 a2^(-alpha), A2 = a1 a2^(-2 alpha) (1 - a2^(-beta)),
  B = a2^(-beta), B1 = B^2, A = min(A1^2, A2).
* The exponent-driven classification of (alpha, beta, p, data) into
  nonexistence / conditional global existence / indeterminate regimes,
  reported with the citation tag each verdict carries.
* Weighted tail integrals and kernel moment bounds on the grid.
* Hoelder continuity estimation by log-log envelope regression, and the
  theoretical exponent theta = theta1 * sigma / (theta1 + nu * beta).
* The small-data fixed-point certificate: constants measured by quadrature
  feed a feasibility test producing a concrete (epsilon, delta) pair, and
  computed trajectories are checked against the decay envelope
  u <= epsilon / (1 + d(x, x0)^(alpha - beta)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .semigroup import TimeGrid, apply_semigroup, source_integral, transport_all
from .space import power_decay_field

__all__ = [
    "HarnackConstants",
    "HarnackReport",
    "RegimeVerdict",
    "WeightedIntegralReport",
    "MomentBoundReport",
    "HolderParams",
    "HolderReport",
    "EnvelopeReport",
    "FeasibilityReport",
    "SmallDataConstants",
    "harnack_constants",
    "verify_harnack",
    "classify_regime",
    "check_weighted_integrals",
    "check_moment_bound",
    "holder_estimate",
    "envelope_check",
    "contraction_feasibility",
    "measure_smalldata_constants",
]

VERDICTS = (
    "NonexistenceSubcritical",
    "NonexistenceCritical",
    "NonexistenceAlphaLeBeta",
    "NonexistenceIntermediate",
    "GlobalExistenceSmallData",
    "Indeterminate",
)


@dataclass(frozen=True)
class HarnackConstants:
    """Time-comparison constants induced by a minorization witness."""

    a1: float
    a2: float
    alpha: float
    beta: float
    A1: float
    A2: float
    B: float
    B1: float
    A: float


def harnack_constants(a1: float, a2: float, alpha: float, beta: float) -> HarnackConstants:
    """Derive (A1, A2, B, B1, A) from the witness (a1, a2)."""
    if not 0 < a1 <= 1:
        raise ValueError("a1 must lie in (0, 1]")
    if a2 <= 1:
        raise ValueError("a2 must exceed 1")
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")
    A1 = a1 * a2 ** (-alpha)
    B = a2 ** (-beta)
    A2 = a1 * a2 ** (-2.0 * alpha) * (1.0 - B)
    return HarnackConstants(a1=a1, a2=a2, alpha=alpha, beta=beta,
                            A1=A1, A2=A2, B=B, B1=B * B, A=min(A1 * A1, A2))


@dataclass(frozen=True)
class HarnackReport:
    margin_time: float        # min of K_t g - A1 K_{Bt} g
    margin_integral: float    # min of int_0^t K g - A2 t K_{B^2 t} g
    margin_combined: float    # min of the combined two-term comparison
    passed: bool
    tol: float


def verify_harnack(kernel, space, g, t: float, constants: HarnackConstants,
                   steps: int = 64, tol: float = 1e-6) -> HarnackReport:
    """Check the three semigroup time-comparison inequalities pointwise.

    For non-negative g and the constants of ``harnack_constants``:

        K_t g >= A1 K_{Bt} g
        integral_0^t K_tau g d tau >= A2 t K_{B^2 t} g
        K_t g + integral_0^t K_tau g d tau >= A [K_{B1 t} g + t K_{B1 t} g]

    Margins are worst-case over grid points; ``passed`` tolerates -tol of
    quadrature slack.
    """
    g = np.asarray(g, dtype=float)
    if np.any(g < 0):
        raise ValueError("g must be non-negative")
    if t <= 0:
        raise ValueError("t must be positive")
    hc = constants
    k_t = apply_semigroup(kernel, space, g, t)
    k_bt = apply_semigroup(kernel, space, g, hc.B * t)
    k_b2t = apply_semigroup(kernel, space, g, hc.B1 * t)
    time_int = source_integral(kernel, space, g, t, steps=steps)

    m1 = float(np.min(k_t - hc.A1 * k_bt))
    m2 = float(np.min(time_int - hc.A2 * t * k_b2t))
    m3 = float(np.min(k_t + time_int - hc.A * (k_b2t + t * k_b2t)))
    return HarnackReport(margin_time=m1, margin_integral=m2, margin_combined=m3,
                         passed=bool(min(m1, m2, m3) >= -tol), tol=tol)


# -- regime classification ---------------------------------------------------


@dataclass(frozen=True)
class RegimeVerdict:
    verdict: str
    cited_case: str
    also_cited: tuple = ()
    required_conditions: tuple = ()
    conditional: bool = False
    note: str = ""


def classify_regime(alpha: float, beta: float, p: float, phi_nonzero: bool,
                    f_nonzero: bool, conditions, conservative: bool) -> RegimeVerdict:
    """Deterministic exponent-arithmetic classification.

    ``conditions`` is a :class:`~fractalheat.profiles.ProfilePredicateReport`
    for the kernel's profile pair.  The decision ladder is evaluated in
    order; the first matching case wins:

    1. f != 0 and alpha <= beta                      -> NonexistenceAlphaLeBeta
    2. f != 0, alpha > beta, p < alpha/(alpha-beta)  -> NonexistenceIntermediate
    3. data != 0 and p < 1 + beta/alpha              -> NonexistenceSubcritical
    4. data != 0, p = 1 + beta/alpha, all comparison
       conditions + conservative                     -> NonexistenceCritical
    5. alpha > beta, p > alpha/(alpha-beta),
       volume-integrable profile + conservative      -> GlobalExistenceSmallData
    6. otherwise                                     -> Indeterminate
    """
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")
    if p <= 1:
        raise ValueError("nonlinearity exponent p must exceed 1")
    data_nonzero = phi_nonzero or f_nonzero
    fujita = 1.0 + beta / alpha
    steady = alpha / (alpha - beta) if alpha > beta else math.inf

    def _eq(x, y):
        return abs(x - y) <= 1e-12 * max(abs(x), abs(y), 1.0)

    if f_nonzero and alpha <= beta:
        return RegimeVerdict("NonexistenceAlphaLeBeta", "thm2.3(ii)",
                             required_conditions=("minorization",),
                             note="forced problem with alpha <= beta admits no global solution")
    if f_nonzero and alpha > beta and p < steady and not _eq(p, steady):
        also = ("thm2.3(i)",) if p < fujita and not _eq(p, fujita) else ()
        return RegimeVerdict("NonexistenceIntermediate", "thm2.3(iii)", also_cited=also,
                             required_conditions=("minorization",),
                             note="forced problem below the steady-state exponent")
    if data_nonzero and p < fujita and not _eq(p, fujita):
        return RegimeVerdict("NonexistenceSubcritical", "thm2.3(i)",
                             required_conditions=("minorization",),
                             note="subcritical exponent: p < 1 + beta/alpha")
    if (data_nonzero and _eq(p, fujita) and conservative
            and conditions.minorization.holds and conditions.factorization.holds
            and conditions.power_minorization.holds):
        return RegimeVerdict(
            "NonexistenceCritical", "thm2.4",
            required_conditions=("minorization", "factorization",
                                 "power_minorization", "conservative"),
            note="critical exponent with full comparison conditions")
    if (alpha > beta and p > steady and not _eq(p, steady)
            and conditions.volume_integrable and conservative):
        return RegimeVerdict(
            "GlobalExistenceSmallData", "thm3.4",
            required_conditions=("volume_integrable", "conservative"),
            conditional=True,
            note="conditional: requires small data per the feasibility certificate")
    return RegimeVerdict("Indeterminate", "open",
                         note="no case of the decision table applies")


# -- weighted integrals ------------------------------------------------------


@dataclass(frozen=True)
class WeightedIntegralReport:
    sup_value: float
    sup_normalized: float | None     # sup of I(x) (1 + d(x,x0)^lambda1); lambda2 > alpha only
    shell_decay_rate: float          # log-log slope of shell contributions at x0
    diverges: bool
    lambda1: float
    lambda2: float
    alpha: float


def check_weighted_integrals(space, alpha: float, lambda1: float, lambda2: float,
                             x_samples=None) -> WeightedIntegralReport:
    """Quadrature of I(x) = integral d(y,x)^(-lambda1) (1 + d(y,x0)^lambda2)^(-1) d mu(y).

    The singular cell y = x is excluded from the sum.  Divergence is
    diagnosed empirically from the decay of log-spaced shell contributions
    around the reference point: shells that stop decaying signal a
    divergent tail (expected exactly when lambda1 + lambda2 <= alpha).
    """
    if not 0 < lambda1 < alpha:
        raise ValueError("lambda1 must lie in (0, alpha)")
    if lambda2 <= 0:
        raise ValueError("lambda2 must be positive")
    x0 = space.x0_index
    d0 = space.distance_from(x0)
    if x_samples is None:
        order = np.argsort(d0)
        x_samples = order[np.linspace(0, space.n - 1, min(space.n, 9)).astype(int)]
    x_samples = np.asarray(x_samples, dtype=int)

    def integral_at(i):
        d = space.distance_from(i)
        mask = np.arange(space.n) != i
        return float(np.sum(space.weights[mask]
                            / (d[mask] ** lambda1 * (1.0 + d0[mask] ** lambda2))))

    values = np.array([integral_at(i) for i in x_samples])
    sup_value = float(values.max())
    sup_norm = None
    if lambda2 > alpha:
        sup_norm = float(np.max(values * (1.0 + d0[x_samples] ** lambda1)))

    # shell decay at the reference point
    pos = d0[d0 > 0]
    r_lo, r_hi = 2.0 * max(space.spacing, pos.min()), float(pos.max())
    edges = np.geomspace(r_lo, r_hi, 9)
    shell_sums, shell_mids = [], []
    integrand = np.zeros(space.n)
    mask = d0 > 0
    integrand[mask] = space.weights[mask] / (d0[mask] ** lambda1 * (1.0 + d0[mask] ** lambda2))
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (d0 > lo) & (d0 <= hi)
        s = float(integrand[sel].sum())
        if s > 0:
            shell_sums.append(s)
            shell_mids.append(math.sqrt(lo * hi))
    if len(shell_sums) >= 3:
        slope = float(np.polyfit(np.log(shell_mids), np.log(shell_sums), 1)[0])
    else:
        slope = 0.0
    return WeightedIntegralReport(
        sup_value=sup_value,
        sup_normalized=sup_norm,
        shell_decay_rate=slope,
        diverges=bool(slope >= -0.05),
        lambda1=float(lambda1),
        lambda2=float(lambda2),
        alpha=float(alpha),
    )


@dataclass(frozen=True)
class MomentBoundReport:
    t_values: np.ndarray
    ratios: np.ndarray               # J(t, x0) / t^((alpha + lam)/beta)
    ratio_min: float
    ratio_max: float
    bounded: bool
    C2: float
    lam: float


def check_moment_bound(space, profile, alpha: float, beta: float, lam: float,
                       t_values, spread_tol: float = 0.1) -> MomentBoundReport:
    """Moment quadrature J(t,x) = integral d(x,y)^lam Phi(d(x,y)/t^(1/beta)) d mu(y).

    Under first-moment integrability of the profile the ratio
    J / t^((alpha+lam)/beta) is bounded above; on a regular grid it is
    nearly constant and ``bounded`` asserts its spread stays within
    ``spread_tol``.
    """
    from .profiles import _tail_integral, profile_eval

    if not 0 < lam <= 1:
        raise ValueError("lam must lie in (0, 1]")
    converges, _ = _tail_integral(profile, alpha)
    if not converges:
        raise ValueError("profile fails first-moment integrability; the bound is vacuous")
    t_values = np.sort(np.atleast_1d(np.asarray(t_values, dtype=float)))
    if np.any(t_values <= 0):
        raise ValueError("t_values must be positive")
    d = space.distance_from(space.x0_index)
    ratios = np.empty_like(t_values)
    for k, t in enumerate(t_values):
        j = float(np.sum(space.weights * d**lam
                         * profile_eval(profile, d * t ** (-1.0 / beta))))
        ratios[k] = j / t ** ((alpha + lam) / beta)
    rmin, rmax = float(ratios.min()), float(ratios.max())
    return MomentBoundReport(
        t_values=t_values, ratios=ratios, ratio_min=rmin, ratio_max=rmax,
        bounded=bool(np.isfinite(rmax) and rmax / max(rmin, 1e-300) - 1.0 <= spread_tol),
        C2=rmax, lam=float(lam),
    )


# -- Hoelder continuity -------------------------------------------------------


@dataclass(frozen=True)
class HolderParams:
    """Exponents entering the solution regularity estimate.

    theta1, theta2 are the Hoelder exponents of phi and f; (L, nu, sigma)
    the kernel continuity constants; beta the walk exponent.  The induced
    solution exponent is theta = theta1 sigma / (theta1 + nu beta).
    """

    theta1: float
    theta2: float
    sigma: float
    nu: float
    L: float
    beta: float

    def __post_init__(self):
        if not 0 < self.theta1 <= 1 or not 0 < self.theta2 <= 1:
            raise ValueError("data exponents must lie in (0, 1]")
        if not 0 < self.sigma <= 1:
            raise ValueError("sigma must lie in (0, 1]")
        if self.nu < 1:
            raise ValueError("nu must be >= 1")
        if self.L <= 0 or self.beta <= 0:
            raise ValueError("L and beta must be positive")

    @property
    def theta(self) -> float:
        return self.theta1 * self.sigma / (self.theta1 + self.nu * self.beta)

    def exponent_bounds(self) -> tuple[float, float, float]:
        """The comparison ladder theta <= sigma/nu <= sigma (theta2+beta)/(theta2+nu beta)."""
        mid = self.sigma / self.nu
        upper = self.sigma * (self.theta2 + self.beta) / (self.theta2 + self.nu * self.beta)
        return self.theta, mid, upper


@dataclass(frozen=True)
class HolderReport:
    theta_hat: float
    C_hat: float
    theoretical_theta: float
    passed: bool
    n_pairs: int


def holder_estimate(u, space, params: HolderParams, d_max: float = 1.0,
                    max_pairs: int = 200_000, n_bins: int = 24, seed: int = 0,
                    fit_tolerance: float = 0.05) -> HolderReport:
    """Empirical Hoelder exponent of a grid function by envelope regression.

    Pairs within distance ``d_max`` are binned by log-distance; the upper
    envelope max |u(x)-u(y)| per bin is fitted against distance in log-log.
    C_hat is inflated afterwards so |u(x)-u(y)| <= C_hat d^theta_hat holds
    on every sampled pair.  ``passed`` requires theta_hat to reach the
    theoretical exponent minus ``fit_tolerance``.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (space.n,):
        raise ValueError("u must be a grid function")
    d = space.distances()
    iu, ju = np.triu_indices(space.n, k=1)
    sel = d[iu, ju] <= d_max
    iu, ju = iu[sel], ju[sel]
    if iu.size < 50:
        raise ValueError("need at least 50 point pairs within d_max")
    if iu.size > max_pairs:
        keep = np.random.default_rng(seed).choice(iu.size, size=max_pairs, replace=False)
        iu, ju = iu[keep], ju[keep]
    dd = d[iu, ju]
    du = np.abs(u[iu] - u[ju])

    scale = float(np.max(np.abs(u)))
    if float(du.max()) <= 1e-13 * max(scale, 1.0):
        # constant function: differences vanish; cap the exponent at 1
        theta_hat, c_hat = 1.0, float(du.max())
    else:
        edges = np.geomspace(dd[dd > 0].min(), d_max * (1 + 1e-12), n_bins + 1)
        mids, envelope = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            m = (dd >= lo) & (dd < hi) if hi < edges[-1] else (dd >= lo) & (dd <= hi)
            if np.any(m):
                top = float(du[m].max())
                if top > 0:
                    mids.append(math.sqrt(lo * hi))
                    envelope.append(top)
        if len(envelope) < 3:
            raise ValueError("too few distance bins with nonzero increments")
        slope = float(np.polyfit(np.log(mids), np.log(envelope), 1)[0])
        theta_hat = float(min(max(slope, 0.0), 1.0))
        pos = du > 0
        c_hat = float(np.max(du[pos] / dd[pos] ** theta_hat))

    return HolderReport(
        theta_hat=theta_hat,
        C_hat=c_hat,
        theoretical_theta=params.theta,
        passed=bool(theta_hat >= params.theta - fit_tolerance),
        n_pairs=int(iu.size),
    )


# -- small-data machinery -----------------------------------------------------


@dataclass(frozen=True)
class EnvelopeReport:
    ok: bool
    worst_ratio: float        # max over nodes of u / envelope
    min_value: float
    epsilon: float
    exponent: float           # alpha - beta


def envelope_check(trajectory, space, epsilon: float, alpha: float, beta: float,
                   rel_tol: float = 1e-9) -> EnvelopeReport:
    """Assert 0 <= u(t, x) <= epsilon / (1 + d(x, x0)^(alpha - beta)) at all nodes."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if alpha <= beta:
        raise ValueError("the decay envelope requires alpha > beta")
    d = space.distance_from(space.x0_index)
    env = epsilon / (1.0 + d ** (alpha - beta))
    vals = trajectory.values
    ratio = float(np.max(vals / env[None, :]))
    vmin = float(vals.min())
    ok = bool(vmin >= -rel_tol * epsilon and ratio <= 1.0 + rel_tol)
    return EnvelopeReport(ok=ok, worst_ratio=ratio, min_value=vmin,
                          epsilon=float(epsilon), exponent=float(alpha - beta))


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    epsilon_star: float
    delta_max: float
    contraction_bound: float   # C3 p epsilon^(p-1) at epsilon_star
    C1: float
    C3: float
    p: float
    safety: float


def contraction_feasibility(C1: float, C3: float, p: float,
                            safety: float = 0.9) -> FeasibilityReport:
    """Feasible (epsilon, delta) window from the measured fixed-point constants.

    epsilon must satisfy the contraction bound C3 p epsilon^(p-1) < 1 and
    the self-map bound C1 epsilon^p < epsilon; epsilon_star takes ``safety``
    times the binding limit and delta_max = epsilon/C1 - epsilon^p is the
    largest data amplitude the certificate admits.
    """
    if C1 <= 0 or C3 <= 0:
        raise ValueError("constants must be positive")
    if p <= 1:
        raise ValueError("nonlinearity exponent p must exceed 1")
    if not 0 < safety < 1:
        raise ValueError("safety must lie in (0, 1)")
    eps_contraction = (1.0 / (C3 * p)) ** (1.0 / (p - 1.0))
    eps_selfmap = (1.0 / C1) ** (1.0 / (p - 1.0))
    eps = safety * min(eps_contraction, eps_selfmap)
    delta_max = eps / C1 - eps**p
    return FeasibilityReport(
        feasible=bool(delta_max > 0 and np.isfinite(delta_max)),
        epsilon_star=float(eps),
        delta_max=float(delta_max),
        contraction_bound=float(C3 * p * eps ** (p - 1.0)),
        C1=float(C1), C3=float(C3), p=float(p), safety=float(safety),
    )


@dataclass(frozen=True)
class SmallDataConstants:
    """Quadrature-measured constants of the fixed-point operator on a grid.

    With g = (1 + d^lam)^(-1) (unit data) and e = (1 + d^(alpha-beta))^(-1)
    (unit envelope), the components bound, uniformly over the solve nodes:

    * c_phi:    K_t g           <= c_phi  * e
    * c_source: int_0^t K g     <= c_source * e
    * c_duhamel:int K (e^p)     <= c_duhamel * e
    * c_lip:    int K (e^(p-1)) <= c_lip            (Lipschitz factor)

    C1 = max(c_phi + c_source, c_duhamel) and C3 = c_lip feed
    :func:`contraction_feasibility`.
    """

    C1: float
    C3: float
    c_phi: float
    c_source: float
    c_duhamel: float
    c_lip: float
    lam: float
    p: float


def measure_smalldata_constants(kernel, space, p: float, lam: float,
                                tgrid: TimeGrid) -> SmallDataConstants:
    """Measure the fixed-point constants on the same nodes the solver uses."""
    alpha, beta = kernel.alpha, kernel.beta
    if alpha <= beta:
        raise ValueError("small-data certificates require alpha > beta")
    if lam <= alpha:
        raise ValueError("data decay exponent lam must exceed alpha")
    if p <= 1:
        raise ValueError("nonlinearity exponent p must exceed 1")
    d = space.distance_from(space.x0_index)
    env = 1.0 / (1.0 + d ** (alpha - beta))
    g = power_decay_field(space, 1.0, lam)

    k_rows = transport_all(kernel, space, g, tgrid)
    c_phi = float(np.max(k_rows / env[None, :]))

    # cumulative trapezoid integrals are monotone in t: the last node binds
    t = tgrid.nodes
    acc_g = np.zeros(space.n)
    acc_dul = np.zeros(space.n)
    acc_lip = np.zeros(space.n)
    e_p = env**p
    e_q = env ** (p - 1.0)
    prev = (g, e_p, e_q)
    for i in range(1, tgrid.n):
        h = t[i] - t[i - 1]
        cur = tuple(apply_semigroup(kernel, space, v, t[i]) for v in (g, e_p, e_q))
        acc_g += 0.5 * h * (prev[0] + cur[0])
        acc_dul += 0.5 * h * (prev[1] + cur[1])
        acc_lip += 0.5 * h * (prev[2] + cur[2])
        prev = cur
    c_source = float(np.max(acc_g / env))
    c_duhamel = float(np.max(acc_dul / env))
    c_lip = float(np.max(acc_lip))

    return SmallDataConstants(
        C1=max(c_phi + c_source, c_duhamel),
        C3=c_lip,
        c_phi=c_phi, c_source=c_source, c_duhamel=c_duhamel, c_lip=c_lip,
        lam=float(lam), p=float(p),
    )
