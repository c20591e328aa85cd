"""Config-driven experiment runner.

Subcommands bind the library modules to CSV reports and companion PNG
figures written into the output directory:

    classify       exponent-regime verdict (plus a small-data certificate
                   when the verdict is conditional global existence)
    solve          Picard iteration of the mild formulation -> trajectory.csv
    horizon        ODE majorant estimate of the local existence horizon
    witness        blow-up witness functional growth fit
    verify-kernel  semigroup axiom suite (mass, symmetry, composition,
                   conservativeness, two-sided profile bounds)
    harnack        semigroup time-comparison margins across t
    integrals      weighted tail integral and kernel moment quadrature
    holder         solution regularity envelope fit
    fujita-scan    witness growth exponent across p -> scan.csv

Exit status: 0 on success, 1 when a verify-style subcommand records a
failed check, 2 for configuration errors, 3 for numerical failures.

Heavy imports are deferred so ``--threads`` can pin the BLAS thread pools
before numpy is first loaded.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS", "VECLIB_MAXIMUM_THREADS")


class NumericalFailure(RuntimeError):
    """Raised when a computation cannot produce a usable result."""


# -- output helpers ----------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    return f"{float(value):.12g}"


def write_report(path, rows):
    """Write ``report.csv`` rows: (check, value, threshold, pass, paper_ref)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["check", "value", "threshold", "pass", "paper_ref"])
        for check, value, threshold, ok, ref in rows:
            writer.writerow([check, _fmt(value), _fmt(threshold), _fmt(bool(ok)), ref])
    return path


def write_trajectory(path, trajectory):
    """Write ``trajectory.csv`` rows: (t, point_id, value)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "point_id", "value"])
        for i, t in enumerate(trajectory.t):
            row_t = _fmt(t)
            for j, v in enumerate(trajectory.values[i]):
                writer.writerow([row_t, j, _fmt(v)])
    return path


def write_scan(path, rows):
    """Write ``scan.csv`` rows: (p, growth_exponent, verdict)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["p", "growth_exponent", "verdict"])
        for p, exponent, verdict in rows:
            writer.writerow([_fmt(p), _fmt(exponent), verdict])
    return path


# -- shared construction -----------------------------------------------------


def _require(doc, *names):
    from .config import ConfigError

    missing = [n for n in names if n not in doc]
    if missing:
        raise ConfigError(f"config: section(s) {missing} required by this subcommand")


def _build_problem(doc, space, kernel):
    from .config import ConfigError, build_field
    from .solver import ProblemSpec

    prob = doc["problem"]
    for key in ("p", "phi", "f"):
        if key not in prob:
            raise ConfigError(f"problem: missing key '{key}'")
    phi = build_field(prob["phi"], space)
    f = build_field(prob["f"], space)
    try:
        return ProblemSpec(kernel=kernel, space=space, phi=phi, f=f,
                           p=float(prob["p"]))
    except ValueError as exc:
        raise ConfigError(f"problem: {exc}")


def _profile_pair(kernel):
    from .kernel import two_sided_bounds

    return two_sided_bounds(getattr(kernel, "base", kernel))


def _minorization_witness(doc, section_name, kernel, p):
    """(a1, a2) from the config section, else from the profile machinery."""
    from .config import ConfigError
    from .profiles import check_profile_conditions

    section = doc.get(section_name, {})
    if "a1" in section or "a2" in section:
        if not ("a1" in section and "a2" in section):
            raise ConfigError(f"{section_name}: a1 and a2 must be given together")
        return float(section["a1"]), float(section["a2"])
    phi1, phi2 = _profile_pair(kernel)
    report = check_profile_conditions(phi1, phi2, p=p, alpha=kernel.alpha)
    if not report.minorization.holds:
        raise ConfigError(
            f"{section_name}: no minorization witness found for this kernel; "
            "supply a1 and a2 explicitly")
    a1, a2 = report.minorization.constants
    return float(a1), float(a2)


def _field_nonzero(values) -> bool:
    return bool(float(values.max()) > 0.0)


# -- subcommands -------------------------------------------------------------


def run_classify(doc, space, kernel, out, seed):
    from .analysis import classify_regime, contraction_feasibility, measure_smalldata_constants
    from .config import build_timegrid
    from .plots import plot_regime
    from .profiles import check_profile_conditions

    _require(doc, "problem")
    problem = _build_problem(doc, space, kernel)
    phi1, phi2 = _profile_pair(kernel)
    conditions = check_profile_conditions(phi1, phi2, p=problem.p, alpha=kernel.alpha)
    verdict = classify_regime(
        alpha=kernel.alpha, beta=kernel.beta, p=problem.p,
        phi_nonzero=_field_nonzero(problem.phi),
        f_nonzero=_field_nonzero(problem.f),
        conditions=conditions, conservative=kernel.conservative_claim)

    refs = verdict.cited_case
    if verdict.also_cited:
        refs = ";".join((refs, *verdict.also_cited))
    rows = [
        (f"verdict:{verdict.verdict}", 1.0, None, True, refs),
        ("minorization", conditions.minorization.holds, None,
         conditions.minorization.holds, ""),
        ("factorization", conditions.factorization.holds, None,
         conditions.factorization.holds, ""),
        ("power_minorization", conditions.power_minorization.holds, None,
         conditions.power_minorization.holds, ""),
        ("volume_integrable", conditions.volume_integrable, None,
         conditions.volume_integrable, ""),
        ("moment_integrable", conditions.moment_integrable, None,
         conditions.moment_integrable, ""),
        ("conservative_claim", kernel.conservative_claim, None,
         kernel.conservative_claim, ""),
    ]

    if verdict.verdict == "GlobalExistenceSmallData" and "time" in doc:
        phi_spec = doc["problem"].get("phi", {})
        lam = float(phi_spec.get("lam", 0.0)) if phi_spec.get("kind") == "power-decay" else 0.0
        if lam > kernel.alpha:
            constants = measure_smalldata_constants(
                kernel, space, p=problem.p, lam=lam, tgrid=build_timegrid(doc["time"]))
            cert = contraction_feasibility(constants.C1, constants.C3, problem.p)
            rows += [
                ("certificate:epsilon_star", cert.epsilon_star, None, cert.feasible, "thm3.4"),
                ("certificate:delta_max", cert.delta_max, 0.0, cert.feasible, "thm3.4"),
                ("certificate:C1", constants.C1, None, True, ""),
                ("certificate:C3", constants.C3, None, True, ""),
            ]

    write_report(out / "report.csv", rows)
    plot_regime(out / "regime.png", kernel.alpha, kernel.beta, problem.p, verdict)
    return EXIT_OK


def run_solve(doc, space, kernel, out, seed):
    from .config import build_timegrid
    from .plots import plot_trajectory
    from .solver import picard_solve

    _require(doc, "problem", "time")
    problem = _build_problem(doc, space, kernel)
    tgrid = build_timegrid(doc["time"])
    opts = doc.get("solve", {})
    report = picard_solve(problem, tgrid,
                          tol=float(opts.get("tol", 1e-8)),
                          max_iter=int(opts.get("max_iter", 200)),
                          blowup_cap=opts.get("blowup_cap"))

    traj = report.trajectory
    import numpy as np

    dt = np.diff(traj.t)
    inc = np.max(np.abs(np.diff(traj.values, axis=0)), axis=1)
    time_ratio = float(np.max(inc / dt)) if dt.size else 0.0
    converged = report.status == "converged"
    rows = [
        (f"status:{report.status}", float(np.max(report.iterations)), None,
         report.status != "max-iter", ""),
        ("residual", report.residual, report.tol, converged or report.status == "blown-up", ""),
        ("sup_norm", traj.sup_norm(), report.blowup_cap, report.status != "blown-up", ""),
        ("time_increment_ratio", time_ratio, None, True, ""),
    ]
    if report.t_blow is not None:
        rows.append(("t_blow", report.t_blow, None, True, ""))
    write_report(out / "report.csv", rows)
    write_trajectory(out / "trajectory.csv", traj)
    plot_trajectory(out / "trajectory.png", space, traj)
    if report.status == "max-iter":
        raise NumericalFailure(
            f"picard iteration did not settle in {int(np.max(report.iterations))} sweeps "
            f"(residual {report.residual:.3g} > tol {report.tol:.3g})")
    return EXIT_OK


def run_horizon(doc, space, kernel, out, seed):
    from .plots import plot_horizon
    from .solver import local_horizon

    _require(doc, "problem")
    problem = _build_problem(doc, space, kernel)
    opts = doc.get("horizon", {})
    report = local_horizon(problem,
                           ode_step=float(opts.get("ode_step", 1e-2)),
                           blowup_cap=float(opts.get("blowup_cap", 1e6)),
                           t_limit=float(opts.get("t_limit", 100.0)))
    limit = 1.0 / (problem.p - 1.0)
    rows = [
        ("T0_estimate", report.T0_estimate, None, True, ""),
        ("blow_up", report.blow_up, None, True, ""),
        ("existence_condition_value", report.existence_condition_value, limit,
         report.condition_met or report.blow_up, ""),
    ]
    write_report(out / "report.csv", rows)
    plot_horizon(out / "horizon.png", report)
    return EXIT_OK


def _witness_times(doc, section_name):
    section = doc.get(section_name, {})
    ts = section.get("t_values")
    if ts is None:
        import numpy as np

        return np.geomspace(0.5, 50.0, 9)
    return [float(t) for t in ts]


def run_witness(doc, space, kernel, out, seed):
    from .analysis import harnack_constants
    from .plots import plot_witness
    from .solver import nonexistence_witness

    _require(doc, "problem")
    problem = _build_problem(doc, space, kernel)
    a1, a2 = _minorization_witness(doc, "witness", kernel, problem.p)
    hc = harnack_constants(a1, a2, kernel.alpha, kernel.beta)
    report = nonexistence_witness(problem, hc, _witness_times(doc, "witness"))
    rows = [
        ("growth_exponent", report.growth_exponent, None, True, ""),
        ("exponent_stderr", report.exponent_stderr, None, True, ""),
        ("witness_found", report.witness_found, None, True, ""),
        ("witness_max", report.max_value, None, True, ""),
    ]
    write_report(out / "report.csv", rows)
    plot_witness(out / "witness.png", report)
    return EXIT_OK


def run_verify_kernel(doc, space, kernel, out, seed):
    from .kernel import verify_kernel_axioms
    from .plots import plot_two_sided

    opts = doc.get("verify_kernel", {})
    t_values = [float(t) for t in opts.get("t_values", (0.25, 1.0, 4.0))]
    phi1, phi2 = _profile_pair(kernel)
    # axioms are statements about the density itself; a row-normalized
    # wrapper is a quadrature device, so audit its base and report the
    # wrapper's residual mass deviation separately below
    base = getattr(kernel, "base", kernel)
    report = verify_kernel_axioms(base, space, t_values, phi1=phi1, phi2=phi2,
                                  fit_holder=bool(opts.get("fit_holder", False)))
    th = report.thresholds
    rows = [
        ("markov_mass", report.markov_mass, 1.0 + th["markov"], report.markov_ok, ""),
        ("symmetry_residual", report.symmetry_residual, th["symmetry"],
         report.symmetry_ok, ""),
        ("semigroup_residual", report.semigroup_residual, th["semigroup"],
         report.semigroup_ok, ""),
        ("conservative_deficit", report.conservative_deficit, th["conservative"],
         report.conservative_ok, ""),
        ("boundary_warning", report.boundary_warning, None, not report.boundary_warning, ""),
    ]
    if base is not kernel:
        import numpy as np

        from .semigroup import apply_semigroup

        ones = np.ones(space.n)
        wrapped_deficit = max(
            float(np.max(np.abs(apply_semigroup(kernel, space, ones, t) - 1.0)))
            for t in t_values)
        rows.append(("normalized_mass_deficit", wrapped_deficit, 1e-12,
                     wrapped_deficit <= 1e-12, ""))
    if report.two_sided is not None:
        rows += [
            ("two_sided_lower_margin", report.two_sided.lower_margin, 0.0,
             report.two_sided.holds, ""),
            ("two_sided_upper_margin", report.two_sided.upper_margin, 0.0,
             report.two_sided.holds, ""),
        ]
    if report.holder_fit is not None:
        fit = report.holder_fit
        rows += [
            ("holder_L", fit.L, None, True, ""),
            ("holder_nu", fit.nu, None, True, ""),
            ("holder_sigma", fit.sigma, None, True, ""),
        ]
    write_report(out / "report.csv", rows)
    plot_two_sided(out / "kernel.png", kernel, space, phi1, phi2, t_values)
    core_ok = (report.markov_ok and report.symmetry_ok and report.semigroup_ok
               and report.conservative_ok
               and (report.two_sided is None or report.two_sided.holds))
    return EXIT_OK if core_ok else EXIT_ASSERTION


def run_harnack(doc, space, kernel, out, seed):
    from .analysis import harnack_constants, verify_harnack
    from .config import build_field
    from .plots import plot_harnack
    from .space import constant_field

    opts = doc.get("harnack", {})
    t_values = [float(t) for t in opts.get("t_values", (0.25, 1.0, 4.0))]
    a1, a2 = _minorization_witness(doc, "harnack", kernel, p=2.0)
    hc = harnack_constants(a1, a2, kernel.alpha, kernel.beta)
    if "problem" in doc and "phi" in doc["problem"]:
        g = build_field(doc["problem"]["phi"], space)
    else:
        g = constant_field(space, 1.0)
    reports = [verify_harnack(kernel, space, g, t, hc) for t in t_values]
    rows = []
    for t, rep in zip(t_values, reports):
        rows += [
            (f"harnack_time_margin@t={t:g}", rep.margin_time, -rep.tol, rep.passed, ""),
            (f"harnack_integral_margin@t={t:g}", rep.margin_integral, -rep.tol,
             rep.passed, ""),
            (f"harnack_combined_margin@t={t:g}", rep.margin_combined, -rep.tol,
             rep.passed, ""),
        ]
    write_report(out / "report.csv", rows)
    plot_harnack(out / "harnack.png", t_values, reports)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_ASSERTION


def run_integrals(doc, space, kernel, out, seed):
    from .analysis import check_moment_bound, check_weighted_integrals
    from .config import ConfigError
    from .plots import plot_shells

    _require(doc, "integrals")
    opts = doc["integrals"]
    for key in ("lambda1", "lambda2"):
        if key not in opts:
            raise ConfigError(f"integrals: missing key '{key}'")
    report = check_weighted_integrals(space, kernel.alpha,
                                      float(opts["lambda1"]), float(opts["lambda2"]))
    rows = [
        ("weighted_integral_sup", report.sup_value, None, True, ""),
        ("shell_decay_rate", report.shell_decay_rate, -0.05, not report.diverges, ""),
        ("weighted_integral_finite", not report.diverges, None, not report.diverges, ""),
    ]
    if report.sup_normalized is not None:
        rows.append(("weighted_integral_sup_normalized", report.sup_normalized,
                     None, True, ""))
    ok = not report.diverges
    if "moment_lam" in opts:
        _, phi2 = _profile_pair(kernel)
        moment = check_moment_bound(
            space, phi2, kernel.alpha, kernel.beta,
            lam=float(opts["moment_lam"]),
            t_values=[float(t) for t in opts.get("t_values", (0.05, 0.2, 1.0, 5.0))])
        rows += [
            ("moment_ratio_max", moment.ratio_max, None, True, ""),
            ("moment_ratio_spread", moment.ratio_max / max(moment.ratio_min, 1e-300) - 1.0,
             0.1, moment.bounded, ""),
        ]
        ok = ok and moment.bounded
    write_report(out / "report.csv", rows)
    plot_shells(out / "shells.png", report, space)
    return EXIT_OK if ok else EXIT_ASSERTION


def run_holder(doc, space, kernel, out, seed):
    from .analysis import HolderParams, holder_estimate
    from .config import build_timegrid
    from .kernel import estimate_holder_kernel
    from .plots import plot_holder
    from .solver import picard_solve

    _require(doc, "problem", "time")
    problem = _build_problem(doc, space, kernel)
    tgrid = build_timegrid(doc["time"])
    solve = picard_solve(problem, tgrid)
    if solve.status != "converged":
        raise NumericalFailure(f"solver status {solve.status}; no stable slice to fit")
    u = solve.trajectory.values[-1]

    opts = doc.get("holder", {})
    fit = estimate_holder_kernel(getattr(kernel, "base", kernel))
    params = HolderParams(theta1=float(opts.get("theta1", 1.0)),
                          theta2=float(opts.get("theta2", 1.0)),
                          sigma=fit.sigma, nu=fit.nu, L=fit.L, beta=kernel.beta)
    report = holder_estimate(u, space, params,
                             d_max=float(opts.get("d_max", 1.0)), seed=seed)
    rows = [
        ("theta_hat", report.theta_hat, params.theta - 0.05, report.passed, ""),
        ("C_hat", report.C_hat, None, True, ""),
        ("theoretical_theta", params.theta, None, True, ""),
        ("kernel_nu", fit.nu, None, True, ""),
        ("kernel_sigma", fit.sigma, None, True, ""),
    ]
    write_report(out / "report.csv", rows)
    plot_holder(out / "holder.png", u, space, report,
                d_max=float(opts.get("d_max", 1.0)), seed=seed)
    return EXIT_OK if report.passed else EXIT_ASSERTION


def run_fujita_scan(doc, space, kernel, out, seed):
    from .analysis import classify_regime, harnack_constants
    from .config import ConfigError, build_field
    from .plots import plot_scan
    from .profiles import check_profile_conditions
    from .solver import ProblemSpec, nonexistence_witness

    _require(doc, "problem", "scan")
    opts = doc["scan"]
    if "p_values" not in opts:
        raise ConfigError("scan: missing key 'p_values'")
    p_values = [float(p) for p in opts["p_values"]]
    if any(p <= 1 for p in p_values):
        raise ConfigError("scan: all p_values must exceed 1")
    t_values = _witness_times(doc, "scan")
    for key in ("phi", "f"):
        if key not in doc["problem"]:
            raise ConfigError(f"problem: missing key '{key}'")
    phi = build_field(doc["problem"]["phi"], space)
    f = build_field(doc["problem"]["f"], space)
    phi1, phi2 = _profile_pair(kernel)

    a1, a2 = _minorization_witness(doc, "scan", kernel, p=min(p_values))
    hc = harnack_constants(a1, a2, kernel.alpha, kernel.beta)
    rows = []
    exponents = []
    for p in p_values:
        problem = ProblemSpec(kernel=kernel, space=space, phi=phi, f=f, p=p)
        witness = nonexistence_witness(problem, hc, t_values)
        conditions = check_profile_conditions(phi1, phi2, p=p, alpha=kernel.alpha)
        verdict = classify_regime(kernel.alpha, kernel.beta, p,
                                  phi_nonzero=_field_nonzero(phi),
                                  f_nonzero=_field_nonzero(f),
                                  conditions=conditions,
                                  conservative=kernel.conservative_claim)
        rows.append((p, witness.growth_exponent, verdict.verdict))
        exponents.append(witness.growth_exponent)
    write_scan(out / "scan.csv", rows)
    plot_scan(out / "scan.png", p_values, exponents, kernel.alpha, kernel.beta)
    return EXIT_OK


_COMMANDS = {
    "classify": run_classify,
    "solve": run_solve,
    "horizon": run_horizon,
    "witness": run_witness,
    "verify-kernel": run_verify_kernel,
    "harnack": run_harnack,
    "integrals": run_integrals,
    "holder": run_holder,
    "fujita-scan": run_fujita_scan,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fractalheat",
        description="heat-kernel experiments: existence horizons, blow-up "
                    "witnesses, comparison inequalities, regularity fits")
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", required=True, help="JSON experiment configuration")
    shared.add_argument("--out", default="out", help="output directory (default: out)")
    shared.add_argument("--threads", type=int, default=None,
                        help="BLAS/OpenMP thread count")
    shared.add_argument("--seed", type=int, default=0, help="seed for any sampling")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sub.add_parser(name, parents=[shared])
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be >= 1", file=sys.stderr)
            return EXIT_CONFIG
        if "numpy" not in sys.modules:
            # effective only before the first numpy import pins the pools
            for var in _THREAD_VARS:
                os.environ[var] = str(args.threads)
    if args.seed < 0 or args.seed >= 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG

    from .config import ConfigError, build_kernel, build_space, load_config

    out = Path(args.out)
    try:
        doc = load_config(args.config)
        out.mkdir(parents=True, exist_ok=True)
        space = build_space(doc["space"])
        kernel = build_kernel(doc["kernel"], space)
        code = _COMMANDS[args.command](doc, space, kernel, out, args.seed)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if code == EXIT_ASSERTION:
        print("one or more checks failed; see report.csv", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
