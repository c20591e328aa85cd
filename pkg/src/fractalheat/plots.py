"""Figure writers for the command-line reports.

Every function renders one PNG next to the CSV output of the matching
subcommand and returns the path it wrote.  The module forces the Agg
backend so figures render identically in headless environments.
"""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "apply_style",
    "plot_regime",
    "plot_trajectory",
    "plot_horizon",
    "plot_witness",
    "plot_two_sided",
    "plot_harnack",
    "plot_shells",
    "plot_holder",
    "plot_scan",
]

_STYLE = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 110,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.labelsize": 10,
    "font.size": 10,
    "legend.fontsize": 9,
    "lines.linewidth": 1.6,
}


def apply_style():
    matplotlib.rcParams.update(_STYLE)


def _finish(fig, path):
    fig.savefig(path)
    plt.close(fig)
    return str(path)


def plot_regime(path, alpha, beta, p, verdict):
    """Exponent axis with the critical thresholds and the queried p."""
    apply_style()
    fujita = 1.0 + beta / alpha
    steady = alpha / (alpha - beta) if alpha > beta else None
    p_hi = max(p, fujita, steady or 0.0) * 1.3 + 0.5
    fig, ax = plt.subplots(figsize=(6.4, 2.6))
    ax.axvline(fujita, color="tab:red", ls="--", label=f"1 + beta/alpha = {fujita:.4g}")
    if steady is not None:
        ax.axvline(steady, color="tab:orange", ls=":",
                   label=f"alpha/(alpha-beta) = {steady:.4g}")
    ax.plot([p], [0.5], "kv", ms=11, label=f"p = {p:g}")
    ax.set_xlim(1.0, p_hi)
    ax.set_ylim(0, 1)
    ax.set_yticks([])
    ax.set_xlabel("nonlinearity exponent p")
    ax.set_title(f"{verdict.verdict}  [{verdict.cited_case}]")
    ax.legend(loc="upper right")
    return _finish(fig, path)


def plot_trajectory(path, space, trajectory, n_curves: int = 6):
    """Radial solution profiles plus the sup-norm history."""
    apply_style()
    d = space.distance_from(space.x0_index)
    order = np.argsort(d)
    t = trajectory.t
    idx = np.unique(np.linspace(0, t.size - 1, n_curves).astype(int))
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.2, 4.0))
    for i in idx:
        ax1.plot(d[order], trajectory.values[i, order], label=f"t = {t[i]:.3g}")
    ax1.set_xlabel("d(x, x0)")
    ax1.set_ylabel("u(t, x)")
    ax1.legend()
    sup = np.max(trajectory.values, axis=1)
    ax2.plot(t, sup, "tab:blue")
    ax2.set_xlabel("t")
    ax2.set_ylabel("sup-norm")
    if sup.max() > 0 and sup.max() / max(sup[sup > 0].min(), 1e-300) > 1e2:
        ax2.set_yscale("log")
    fig.suptitle("solution trajectory")
    return _finish(fig, path)


def plot_horizon(path, report):
    """ODE majorant components a(t), b(t) and the horizon estimate."""
    apply_style()
    fig, ax = plt.subplots()
    ax.plot(report.t_samples, report.b_samples, label="b(t)  (data factor)")
    if np.any(report.a_samples > 0):
        ax.plot(report.t_samples, report.a_samples, label="a(t)  (source part)")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("majorant")
    if report.blow_up and math.isfinite(report.T0_estimate):
        ax.axvline(report.T0_estimate, color="tab:red", ls="--",
                   label=f"T0 = {report.T0_estimate:.6g}")
    status = "blow-up" if report.blow_up else "no blow-up in range"
    ax.set_title(f"local horizon majorant ({status})")
    ax.legend()
    return _finish(fig, path)


def plot_witness(path, report):
    """Witness maxima against t with the fitted power law."""
    apply_style()
    fig, ax = plt.subplots()
    ax.loglog(report.t_values, report.w_max, "o", color="tab:blue", label="max_x W(t, x)")
    tt = np.array([report.t_values[0], report.t_values[-1]])
    anchor = report.w_max[0]
    ax.loglog(tt, anchor * (tt / tt[0]) ** report.growth_exponent, "k--",
              label=f"slope = {report.growth_exponent:+.3f}")
    ax.set_xlabel("t")
    ax.set_ylabel("witness functional")
    found = "unbounded growth" if report.witness_found else "no growth detected"
    ax.set_title(f"nonexistence witness ({found})")
    ax.legend()
    return _finish(fig, path)


def plot_two_sided(path, kernel, space, phi1, phi2, t_values):
    """Rescaled kernel samples against the bounding profile pair."""
    from .profiles import profile_eval

    apply_style()
    d = space.distance_from(space.x0_index)
    fig, ax = plt.subplots()
    s_all = []
    for t in t_values:
        row = kernel.matrix(space, t)[space.x0_index] if hasattr(kernel, "base") \
            else kernel.radial(t, d)
        s = d * t ** (-1.0 / kernel.beta)
        scaled = row * t ** (kernel.alpha / kernel.beta)
        keep = scaled > 0
        ax.plot(s[keep], scaled[keep], ".", ms=3, alpha=0.5, label=f"t = {t:g}")
        s_all.append(s[keep])
    s_grid = np.geomspace(max(min(s.min() for s in s_all), 1e-3),
                          max(s.max() for s in s_all), 200)
    ax.plot(s_grid, profile_eval(phi1, s_grid), "k--", label="lower profile")
    ax.plot(s_grid, profile_eval(phi2, s_grid), "k-", label="upper profile")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("s = d / t^(1/beta)")
    ax.set_ylabel("t^(alpha/beta) k(t, x0, y)")
    ax.set_title("two-sided profile bounds")
    ax.legend()
    return _finish(fig, path)


def plot_harnack(path, t_values, reports):
    """Worst-case inequality margins across evaluation times."""
    apply_style()
    t_values = np.asarray(t_values, dtype=float)
    fig, ax = plt.subplots()
    ax.plot(t_values, [r.margin_time for r in reports], "o-", label="time comparison")
    ax.plot(t_values, [r.margin_integral for r in reports], "s-", label="integral comparison")
    ax.plot(t_values, [r.margin_combined for r in reports], "^-", label="combined")
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("worst-case margin")
    ax.set_title("semigroup comparison margins")
    ax.legend()
    return _finish(fig, path)


def plot_shells(path, report, space):
    """Shell contributions of the weighted integral around x0."""
    apply_style()
    d0 = space.distance_from(space.x0_index)
    mask = d0 > 0
    integrand = np.zeros(space.n)
    integrand[mask] = space.weights[mask] / (
        d0[mask] ** report.lambda1 * (1.0 + d0[mask] ** report.lambda2))
    pos = d0[mask]
    edges = np.geomspace(2.0 * max(space.spacing, pos.min()), pos.max(), 9)
    mids, sums = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (d0 > lo) & (d0 <= hi)
        s = float(integrand[sel].sum())
        if s > 0:
            mids.append(math.sqrt(lo * hi))
            sums.append(s)
    fig, ax = plt.subplots()
    ax.loglog(mids, sums, "o-", label="shell contribution")
    anchor = sums[0]
    mm = np.array([mids[0], mids[-1]])
    ax.loglog(mm, anchor * (mm / mm[0]) ** report.shell_decay_rate, "k--",
              label=f"slope = {report.shell_decay_rate:+.3f}")
    verdict = "divergent tail" if report.diverges else "convergent tail"
    ax.set_xlabel("shell radius")
    ax.set_ylabel("contribution")
    ax.set_title(f"weighted integral shells ({verdict})")
    ax.legend()
    return _finish(fig, path)


def plot_holder(path, u, space, report, d_max: float = 1.0, max_points: int = 20000,
                seed: int = 0):
    """Increment scatter with the fitted envelope C d^theta."""
    apply_style()
    u = np.asarray(u, dtype=float)
    d = space.distances()
    iu, ju = np.triu_indices(space.n, k=1)
    sel = (d[iu, ju] <= d_max) & (d[iu, ju] > 0)
    iu, ju = iu[sel], ju[sel]
    if iu.size > max_points:
        keep = np.random.default_rng(seed).choice(iu.size, size=max_points, replace=False)
        iu, ju = iu[keep], ju[keep]
    dd = d[iu, ju]
    du = np.abs(u[iu] - u[ju])
    fig, ax = plt.subplots()
    pos = du > 0
    ax.loglog(dd[pos], du[pos], ".", ms=2, alpha=0.25, label="|u(x) - u(y)|")
    grid = np.geomspace(dd.min(), dd.max(), 100)
    ax.loglog(grid, report.C_hat * grid ** report.theta_hat, "r-",
              label=f"C d^theta, theta = {report.theta_hat:.3f}")
    ax.set_xlabel("d(x, y)")
    ax.set_ylabel("increment")
    ax.set_title(f"regularity envelope (theory theta = {report.theoretical_theta:.3f})")
    ax.legend()
    return _finish(fig, path)


def plot_scan(path, p_values, exponents, alpha, beta):
    """Witness growth exponent across p with the theoretical line."""
    apply_style()
    p_values = np.asarray(p_values, dtype=float)
    fig, ax = plt.subplots()
    ax.plot(p_values, exponents, "o", color="tab:blue", label="fitted exponent")
    pp = np.linspace(p_values.min(), p_values.max(), 200)
    ax.plot(pp, 1.0 / (pp - 1.0) - alpha / beta, "k--",
            label="1/(p-1) - alpha/beta")
    ax.axhline(0.0, color="tab:red", lw=0.8)
    crit = 1.0 + beta / alpha
    if p_values.min() <= crit <= p_values.max():
        ax.axvline(crit, color="tab:red", ls=":", label=f"critical p = {crit:g}")
    ax.set_xlabel("p")
    ax.set_ylabel("growth exponent of the witness")
    ax.set_title("blow-up exponent scan")
    ax.legend()
    return _finish(fig, path)
